import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcrb.exceptions import ResidualTooLarge
from qcrb.linalg import jordan_product
from qcrb.model import QuantumModel, fixture
from qcrb.sld import compute_slds, feasibility, infeasible_columns, information, InformationData
from _support import random_model

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def diag_model(w):
    return QuantumModel(
        dim=2,
        rho=np.diag([(1 + w) / 2, (1 - w) / 2]).astype(complex),
        drho=np.array([np.diag([0.5, -0.5]).astype(complex)]),
        dbeta=np.array([[1.0]]),
        weight=np.array([[1.0]]),
    )


class TestComputeSlds:
    def test_diagonal_lyapunov_solve(self):
        w = 0.4
        slds = compute_slds(diag_model(w))
        assert_allclose(slds.slds[0], np.diag([1 / (1 + w), -1 / (1 - w)]), atol=1e-12)
        assert slds.residuals.max() < 1e-12

    def test_maximally_mixed(self):
        m = QuantumModel(
            dim=2, rho=np.eye(2, dtype=complex) / 2, drho=np.array([SX / 2]),
            dbeta=np.array([[1.0]]), weight=np.array([[1.0]]),
        )
        slds = compute_slds(m)
        assert_allclose(slds.slds[0], SX, atol=1e-12)

    def test_pure_state_kernel_block_zeroed(self):
        m = fixture("pure_qubit_angles", [1.0, 0.3])
        slds = compute_slds(m)
        vals, vecs = np.linalg.eigh(m.rho)
        kernel = vecs[:, vals < 1e-10]
        for lj in slds.slds:
            block = kernel.conj().T @ lj @ kernel
            assert np.abs(block).max() < 1e-12
        assert slds.residuals.max() < 1e-12

    def test_reconstruction_residual(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            m = random_model(rng, d=int(rng.integers(2, 5)), p=2, q=2,
                             rank=None if rng.random() < 0.5 else 2)
            slds = compute_slds(m)
            for lj, dj in zip(slds.slds, m.drho):
                assert np.linalg.norm(jordan_product(m.rho, lj) - dj) < 1e-8

    def test_zero_mean(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            m = random_model(rng, d=3, p=3, q=2)
            slds = compute_slds(m)
            for lj in slds.slds:
                assert abs(np.trace(m.rho @ lj)) < 1e-10

    def test_residual_too_large_on_kernel_content(self):
        # bypass validation: feed a kernel-block derivative directly
        m = QuantumModel(
            dim=2,
            rho=np.diag([1.0, 0.0]).astype(complex),
            drho=np.array([np.diag([-1.0, 1.0]).astype(complex)]),
            dbeta=np.array([[1.0]]),
            weight=np.array([[1.0]]),
        )
        with pytest.raises(ResidualTooLarge):
            compute_slds(m)

    def test_scale_covariance(self):
        rng = np.random.default_rng(3)
        m = random_model(rng, d=3, p=2, q=2)
        c = 2.5
        scaled = QuantumModel(dim=m.dim, rho=m.rho, drho=c * m.drho,
                              dbeta=m.dbeta, weight=m.weight)
        slds = compute_slds(m)
        slds_c = compute_slds(scaled)
        assert_allclose(slds_c.slds, c * slds.slds, atol=1e-10)
        info = information(m, slds)
        info_c = information(scaled, slds_c)
        assert_allclose(info_c.qfim, c * c * info.qfim, atol=1e-9)


class TestInformation:
    def test_transverse_qubit(self):
        for z in (0.0, 0.3, -0.8):
            m = fixture("qubit_xy_at_z", [z])
            info = information(m, compute_slds(m))
            assert_allclose(info.qfim, np.eye(2), atol=1e-12)
            assert_allclose(info.dmat, [[0, z], [-z, 0]], atol=1e-12)

    def test_one_parameter_diagonal(self):
        w = 0.6
        m = diag_model(w)
        info = information(m, compute_slds(m))
        assert_allclose(info.qfim, [[1 / (1 - w * w)]], atol=1e-12)
        assert info.qfim_rank == 1

    def test_commuting_family_has_zero_dmat(self):
        m = fixture("classical_diagonal", [0.3, 0.2, 0.1])
        info = information(m, compute_slds(m))
        assert np.abs(info.dmat).max() < 1e-10

    def test_exact_symmetry(self):
        rng = np.random.default_rng(4)
        m = random_model(rng, d=4, p=3, q=2)
        info = information(m, compute_slds(m))
        assert np.array_equal(info.qfim, info.qfim.T)
        assert np.array_equal(info.dmat, -info.dmat.T)
        assert np.linalg.eigvalsh(info.qfim).min() > -1e-10

    def test_kernel_block_choice_does_not_matter(self):
        # perturbing the SLD kernel block must leave J and D unchanged
        m = fixture("pure_qubit_angles", [0.8, 1.9])
        slds = compute_slds(m)
        info = information(m, slds)
        vals, vecs = np.linalg.eigh(m.rho)
        k = vecs[:, vals < 1e-10][:, 0]
        perturbed = slds.slds + 3.0 * np.outer(k, k.conj())
        info_p = information(m, type(slds)(slds=perturbed, residuals=slds.residuals))
        assert_allclose(info_p.qfim, info.qfim, atol=1e-10)
        assert_allclose(info_p.dmat, info.dmat, atol=1e-10)


class TestFeasibility:
    def test_range_vector(self):
        info = InformationData(qfim=np.diag([1.0, 0.0]), dmat=np.zeros((2, 2)), qfim_rank=1)
        assert feasibility(info, np.array([[1.0], [0.0]]))

    def test_kernel_vector(self):
        info = InformationData(qfim=np.diag([1.0, 0.0]), dmat=np.zeros((2, 2)), qfim_rank=1)
        assert not feasibility(info, np.array([[0.0], [1.0]]))
        assert infeasible_columns(info, np.array([[0.0], [1.0]])) == [0]

    def test_nonsingular_always_feasible(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            p = int(rng.integers(1, 5))
            g = rng.normal(size=(p, p))
            info = InformationData(qfim=g @ g.T + 0.1 * np.eye(p), dmat=np.zeros((p, p)), qfim_rank=p)
            assert feasibility(info, rng.normal(size=(p, int(rng.integers(1, p + 1)))))

    def test_agrees_with_lstsq_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(60):
            p = int(rng.integers(2, 7))
            rank = int(rng.integers(1, p))
            g = rng.normal(size=(p, rank))
            j = g @ g.T
            info = InformationData(qfim=j, dmat=np.zeros((p, p)), qfim_rank=rank)
            if rng.random() < 0.5:
                dbeta = j @ rng.normal(size=(p, 1))
            else:
                # force a kernel component
                kernel = np.linalg.svd(j)[0][:, rank:]
                dbeta = j @ rng.normal(size=(p, 1)) + kernel @ rng.normal(size=(kernel.shape[1], 1))
            sol, *_ = np.linalg.lstsq(j, dbeta, rcond=None)
            oracle = np.abs(j @ sol - dbeta).max() <= 1e-8
            assert feasibility(info, dbeta) == oracle
