import dataclasses

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcrb.bounds import c_d, c_gs, sandwich
from qcrb.exceptions import InfeasibleModel, VerificationFailed
from qcrb.holevo import build_problem, solve, verify_solution
from qcrb.model import QuantumModel, fixture
from qcrb.sld import compute_slds, information
from _support import direct_holevo_oracle, random_model

SZ = np.diag([1.0, -1.0]).astype(complex)


def diag_model(w):
    return QuantumModel(
        dim=2,
        rho=np.diag([(1 + w) / 2, (1 - w) / 2]).astype(complex),
        drho=np.array([np.diag([0.5, -0.5]).astype(complex)]),
        dbeta=np.array([[1.0]]),
        weight=np.array([[1.0]]),
    )


class TestBuildProblem:
    def test_constraint_counting_qubit(self):
        m = fixture("qubit_xy_at_z", [0.5])
        prob = build_problem(m)
        # q*d^2 = 8 raw coefficients, 2*(1+2) = 6 linear constraints
        assert prob.basis.shape[0] * prob.n_targets == 8
        assert prob.constraint_matrix.shape == (3, 4)
        assert prob.constraint_rhs.shape == (3, 2)
        assert prob.basis_coeffs_dim == 2  # one free direction per component

    def test_x0_is_feasible(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            m = random_model(rng, d=3, p=3, q=2, weighted=True)
            prob = build_problem(m)
            res = prob.constraint_matrix @ prob.x0.T - prob.constraint_rhs
            assert np.abs(res).max() < 1e-8

    def test_reduced_variable_count_for_pure_state(self):
        m = fixture("pure_qubit_angles", [1.0, 0.2])
        reduced = build_problem(m, reduce_kernel=True)
        full = build_problem(m, reduce_kernel=False)
        # support-touching elements only: d^2 - (d-r)^2 = 3 for d=2, r=1
        assert reduced.basis.shape[0] == 3
        assert full.basis.shape[0] == 4

    def test_infeasible_model_rejected(self):
        rng = np.random.default_rng(1)
        m = random_model(rng, d=2, p=2, q=1, singular_j=True)
        info = information(m, compute_slds(m))
        kernel = np.linalg.eigh(info.qfim)[1][:, :1]
        bad = dataclasses.replace(m, dbeta=kernel)
        with pytest.raises(InfeasibleModel):
            build_problem(bad)


class TestSolve:
    def test_scalar_model_collapses_to_c_gs(self):
        for w in (0.0, 0.3, 0.8):
            m = diag_model(w)
            sol = solve(build_problem(m))
            assert sol.status == "Optimal"
            assert sol.c_h == pytest.approx(1 - w * w, abs=1e-7)

    def test_commuting_model_collapses_to_c_gs(self):
        m = fixture("classical_diagonal", [0.2, 0.3])
        slds = compute_slds(m)
        info = information(m, slds)
        sol = solve(build_problem(m, slds))
        assert sol.c_h == pytest.approx(c_gs(m, slds, info), abs=1e-7)

    def test_transverse_qubit_within_sandwich(self):
        m = fixture("qubit_xy_at_z", [0.5])
        sol = solve(build_problem(m))
        assert 2.0 - 1e-7 <= sol.c_h <= 3.0 + 1e-7
        assert sol.c_h <= 4.0 + 1e-7

    def test_transverse_qubit_matches_direct_oracle(self):
        rng = np.random.default_rng(2)
        m = fixture("qubit_xy_at_z", [0.5])
        sol = solve(build_problem(m))
        oracle = direct_holevo_oracle(m, rng)
        assert sol.c_h == pytest.approx(oracle, abs=1e-5)

    def test_solution_invariants(self):
        rng = np.random.default_rng(3)
        for _ in range(8):
            m = random_model(rng, d=3, p=2, q=2, weighted=True)
            sol = solve(build_problem(m))
            assert sol.status == "Optimal"
            assert sol.duality_gap <= 1e-8
            assert sol.dual_residual <= 1e-8
            assert sol.dual_objective <= sol.c_h + 1e-6
            # v_opt dominates Z(x_opt) in the PSD sense
            from qcrb.linalg import z_matrix

            z = z_matrix(sol.x_opt, m.rho)
            assert np.linalg.eigvalsh(sol.v_opt.astype(complex) - z).min() > -1e-8
            assert sol.c_h == pytest.approx(float(np.trace(m.weight @ sol.v_opt)), abs=1e-9)

    def test_kernel_reduction_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            m = random_model(rng, d=3, p=2, q=2, rank=2, weighted=True)
            slds = compute_slds(m)
            sol_reduced = solve(build_problem(m, slds, reduce_kernel=True))
            sol_full = solve(build_problem(m, slds, reduce_kernel=False))
            assert sol_reduced.c_h == pytest.approx(sol_full.c_h, abs=1e-7)

    def test_sandwich_on_random_models(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            d = int(rng.integers(2, 5))
            p = int(rng.integers(1, min(5, d * d)))
            q = int(rng.integers(1, p + 1))
            m = random_model(rng, d, p, q, weighted=True)
            slds = compute_slds(m)
            info = information(m, slds)
            sol = solve(build_problem(m, slds))
            gs = c_gs(m, slds, info)
            dd = c_d(m, slds, info)
            assert sol.status == "Optimal"
            assert gs - 1e-7 <= sol.c_h <= dd + 1e-7
            assert dd <= 2 * gs + 1e-7


class TestVerifySolution:
    def test_accepts_optimal_solution(self):
        m = fixture("qubit_xy_at_z", [0.3])
        slds = compute_slds(m)
        sol = solve(build_problem(m, slds))
        report = verify_solution(m, sol, slds)
        assert report.objective_deviation < 1e-7
        assert report.unbias_residual < 1e-8
        assert report.c_gs - 1e-7 <= sol.c_h <= report.c_d + 1e-7

    def test_rejects_corrupted_minimizer(self):
        m = fixture("qubit_xy_at_z", [0.3])
        slds = compute_slds(m)
        sol = solve(build_problem(m, slds))
        corrupted = dataclasses.replace(sol, x_opt=sol.x_opt + 0.05 * SZ)
        with pytest.raises(VerificationFailed):
            verify_solution(m, corrupted, slds)

    def test_rejects_non_optimal_status(self):
        m = fixture("qubit_xy_at_z", [0.3])
        sol = solve(build_problem(m), max_iter=1)
        with pytest.raises(VerificationFailed, match="status"):
            verify_solution(m, sol)

    def test_pure_state_saturation(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            theta = rng.uniform(0.4, np.pi - 0.4)
            phi = rng.uniform(0, 2 * np.pi)
            m = fixture("pure_qubit_angles", [theta, phi])
            slds = compute_slds(m)
            info = information(m, slds)
            sol = solve(build_problem(m, slds))
            gs = c_gs(m, slds, info)
            assert sol.c_h / gs == pytest.approx(2.0, abs=1e-4)
            assert c_d(m, slds, info) / gs == pytest.approx(2.0, abs=1e-8)
