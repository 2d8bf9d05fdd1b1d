import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcrb import linalg
from qcrb.sdp import OPTIMAL, solve_lmi


def epigraph_instance(z0, w):
    """min tr(W V) s.t. V >= Z0: analytic optimum is known in closed form."""
    q = z0.shape[0]
    fs, c = [], []
    for a in range(q):
        for b in range(a, q):
            e = np.zeros((q, q), dtype=complex)
            e[a, b] = 1.0
            e[b, a] = 1.0
            fs.append(e)
            c.append(w[a, a] if a == b else 2.0 * w[a, b])
    return np.array(c), -z0.astype(complex), np.array(fs)


class TestSolveLmi:
    def test_scalar_bound(self):
        # min u s.t. [[u, 1], [1, u]] >= 0 has optimum u = 1
        res = solve_lmi(
            np.array([1.0]),
            np.array([[0, 1], [1, 0]], dtype=complex),
            np.array([np.eye(2, dtype=complex)]),
        )
        assert res.status == OPTIMAL
        assert res.u[0] == pytest.approx(1.0, abs=1e-7)

    def test_epigraph_matches_closed_form(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            q = int(rng.integers(1, 5))
            g = rng.normal(size=(q, q)) + 1j * rng.normal(size=(q, q))
            z0 = g @ g.conj().T
            gw = rng.normal(size=(q, q))
            w = gw @ gw.T + 0.2 * np.eye(q)
            c, f0, fs = epigraph_instance(z0, w)
            res = solve_lmi(c, f0, fs)
            root = linalg.psd_sqrt(w)
            expected = float(np.trace(w @ z0.real)) + linalg.trace_norm(root @ z0.imag @ root)
            assert res.status == OPTIMAL
            assert res.pobj == pytest.approx(expected, rel=1e-7, abs=1e-7)

    def test_certificates_at_optimum(self):
        rng = np.random.default_rng(1)
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        z0 = g @ g.conj().T
        c, f0, fs = epigraph_instance(z0, np.eye(3))
        res = solve_lmi(c, f0, fs)
        assert res.status == OPTIMAL
        assert res.relgap <= 1e-8
        assert res.pinfeas <= 1e-8
        assert res.dinfeas <= 1e-8
        # weak duality: dual objective is a lower bound
        assert res.dobj <= res.pobj + 1e-7
        # dual variable is PSD and complementary
        assert np.linalg.eigvalsh(res.dual).min() > -1e-10
        assert abs(np.tensordot(res.slack, res.dual.conj(), axes=([0, 1], [0, 1])).real) < 1e-6

    def test_infeasible_start_recovers(self):
        # F(0) is indefinite; the solver must still find the optimum
        res = solve_lmi(
            np.array([1.0]),
            np.array([[-2.0, 0.0], [0.0, -1.0]], dtype=complex),
            np.array([np.eye(2, dtype=complex)]),
            u0=np.zeros(1),
        )
        assert res.status == OPTIMAL
        assert res.u[0] == pytest.approx(2.0, abs=1e-6)

    def test_max_iterations_status(self):
        rng = np.random.default_rng(2)
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        z0 = g @ g.conj().T
        c, f0, fs = epigraph_instance(z0, np.eye(3))
        res = solve_lmi(c, f0, fs, max_iter=2)
        assert res.status == "MaxIterations"
        assert res.gap > 0

    def test_respects_tight_tolerance(self):
        rng = np.random.default_rng(3)
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        z0 = g @ g.conj().T
        c, f0, fs = epigraph_instance(z0, np.eye(4))
        res = solve_lmi(c, f0, fs, tol=1e-11)
        assert res.status == OPTIMAL
        assert res.relgap <= 1e-11
