"""Dense primal-dual interior-point solver for one Hermitian PSD block.

Solves the linear-matrix-inequality form

    minimize    c · u
    subject to  F(u) = F0 + Σ_i u_i F_i  ⪰ 0,

with u real and F0, F_i Hermitian N×N, together with its dual

    maximize   −⟨F0, S⟩   subject to   ⟨F_i, S⟩ = c_i,  S ⪰ 0.

The implementation is the standard Nesterov-Todd-scaled Mehrotra
predictor-corrector: the scaling point is computed from the Cholesky
factors of the primal slack X and dual S via one SVD, which renders the
scaled variable diagonal; the Newton system is reduced to a dense
symmetric-positive-definite Schur complement in u.  Problem sizes here
are tiny (N ≲ 25, n ≲ 80), so dense linear algebra throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SdpResult", "solve_lmi"]

OPTIMAL = "Optimal"
MAX_ITERATIONS = "MaxIterations"
NUMERICAL_TROUBLE = "NumericalTrouble"

_STEP_DAMPING = 0.98
_MIN_STEP = 1e-10


@dataclass
class SdpResult:
    """Solver outcome.

    ``gap`` is the absolute complementarity ⟨X, S⟩, ``relgap`` the gap
    relative to the mean objective magnitude; ``pinfeas``/``dinfeas`` are
    scaled primal/dual residual norms.  ``dual_objective`` is a valid lower
    bound on the optimum whenever ``dinfeas`` is at tolerance.
    """

    u: np.ndarray
    slack: np.ndarray
    dual: np.ndarray
    pobj: float
    dobj: float
    gap: float
    relgap: float
    pinfeas: float
    dinfeas: float
    iterations: int
    status: str


def _chol(mat: np.ndarray) -> np.ndarray | None:
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        return None


def _herm(mat: np.ndarray) -> np.ndarray:
    return (mat + mat.conj().T) / 2


def _boundary_step(lam: np.ndarray, delta: np.ndarray) -> float:
    """Largest alpha with diag(lam) + alpha*delta ⪰ 0 (inf -> large cap)."""
    scale = 1.0 / np.sqrt(lam)
    scaled = delta * scale[:, None] * scale[None, :]
    min_eig = float(np.linalg.eigvalsh(_herm(scaled)).min())
    if min_eig >= -1e-16:
        return np.inf
    return -1.0 / min_eig


def solve_lmi(
    c: np.ndarray,
    f0: np.ndarray,
    fs: np.ndarray,
    u0: np.ndarray | None = None,
    s0: np.ndarray | None = None,
    tol: float = 1e-8,
    feas_tol: float = 1e-8,
    max_iter: int = 200,
) -> SdpResult:
    """Run the interior-point iteration.

    Parameters
    ----------
    c : (n,) objective vector.
    f0 : (N, N) Hermitian constant term.
    fs : (n, N, N) Hermitian coefficient matrices, linearly independent.
    u0 : optional start; the slack F(u0) is shifted to be safely positive
        definite, so strict feasibility of u0 is helpful but not required.
    s0 : optional positive-definite dual start.
    """
    c = np.asarray(c, dtype=float)
    f0 = np.asarray(f0, dtype=complex)
    fs = np.asarray(fs, dtype=complex)
    n = c.shape[0]
    dim = f0.shape[0]
    f_flat = fs.reshape(n, -1)

    def f_of(u: np.ndarray) -> np.ndarray:
        return _herm(f0 + np.tensordot(u, fs, axes=(0, 0)))

    u = np.zeros(n) if u0 is None else np.array(u0, dtype=float)
    slack = f_of(u)
    min_eig = float(np.linalg.eigvalsh(slack).min())
    if min_eig < 1e-8:
        slack = slack + (abs(min_eig) * 1.1 + max(1.0, 1e-3 * np.trace(slack).real / dim)) * np.eye(dim)
    dual = np.eye(dim, dtype=complex) if s0 is None else np.array(s0, dtype=complex)
    if float(np.linalg.eigvalsh(dual).min()) < 1e-12:
        dual = dual + np.eye(dim)

    f0_scale = 1.0 + np.linalg.norm(f0)
    c_scale = 1.0 + np.linalg.norm(c)

    def metrics(u, slack, dual):
        rp = f_of(u) - slack
        rd = c - (f_flat @ dual.conj().reshape(-1)).real
        gap = float(np.tensordot(slack, dual.conj(), axes=([0, 1], [0, 1])).real)
        pobj = float(c @ u)
        dobj = -float(np.tensordot(f0, dual.conj(), axes=([0, 1], [0, 1])).real)
        relgap = gap / max(1.0, (abs(pobj) + abs(dobj)) / 2)
        return rp, rd, gap, pobj, dobj, relgap

    rp0, rd0, gap0, pobj0, dobj0, relgap0 = metrics(u, slack, dual)
    best = (u.copy(), slack.copy(), dual.copy(), pobj0, dobj0, gap0, relgap0,
            np.linalg.norm(rp0) / f0_scale, np.linalg.norm(rd0) / c_scale)
    best_score = np.inf
    status = MAX_ITERATIONS
    iterations = 0
    stalls = 0

    for iteration in range(max_iter):
        iterations = iteration
        rp, rd, gap, pobj, dobj, relgap = metrics(u, slack, dual)
        pinf = np.linalg.norm(rp) / f0_scale
        dinf = np.linalg.norm(rd) / c_scale
        score = max(pinf, dinf, relgap)
        if score < best_score:
            best_score = score
            best = (u.copy(), slack.copy(), dual.copy(), pobj, dobj, gap, relgap, pinf, dinf)
        if pinf <= feas_tol and dinf <= feas_tol and relgap <= tol:
            status = OPTIMAL
            break

        lx = _chol(slack)
        lz = _chol(dual)
        if lx is None or lz is None:
            status = NUMERICAL_TROUBLE
            break

        # Nesterov-Todd scaling point: R^{-1} X R^{-H} = R^H S R = diag(lam)
        _, lam, vh = np.linalg.svd(lz.conj().T @ lx)
        if lam.min() <= 0:
            status = NUMERICAL_TROUBLE
            break
        r_mat = lx @ vh.conj().T * (lam ** -0.5)
        r_inv = (lam ** 0.5)[:, None] * (vh @ np.linalg.solve(lx, np.eye(dim)))

        h_scaled = np.einsum("ab,ibc,dc->iad", r_inv, fs, r_inv.conj(), optimize=True)
        h_flat = h_scaled.reshape(n, -1)
        h_rp = r_inv @ rp @ r_inv.conj().T

        schur = (h_flat @ h_flat.conj().T).real
        schur = (schur + schur.T) / 2
        reg = 0.0
        chol_b = None
        for _ in range(4):
            chol_b = _chol(schur + reg * np.eye(n))
            if chol_b is not None:
                break
            reg = max(reg * 100, 1e-14 * max(schur.diagonal().max(), 1.0))
        if chol_b is None:
            status = NUMERICAL_TROUBLE
            break

        def solve_schur(rhs):
            y = np.linalg.solve(chol_b, rhs)
            return np.linalg.solve(chol_b.conj().T, y)

        def direction(y_mat):
            g = (h_flat @ (y_mat - h_rp).conj().reshape(-1)).real - rd
            du = solve_schur(g)
            dlam_x = np.tensordot(du, h_scaled, axes=(0, 0)) + h_rp
            dlam_z = y_mat - dlam_x
            return du, _herm(dlam_x), _herm(dlam_z)

        mu = gap / dim

        # predictor
        y_aff = -np.diag(lam).astype(complex)
        _, dlx_aff, dlz_aff = direction(y_aff)
        ap_aff = min(1.0, _boundary_step(lam, dlx_aff))
        ad_aff = min(1.0, _boundary_step(lam, dlz_aff))
        lam_mat = np.diag(lam)
        gap_aff = float(
            np.trace(
                (lam_mat + ap_aff * dlx_aff) @ (lam_mat + ad_aff * dlz_aff)
            ).real
        )
        sigma = min(1.0, max(0.0, (gap_aff / gap) ** 3))

        # corrector
        correction = (dlx_aff @ dlz_aff + dlz_aff @ dlx_aff) / 2
        rhs = sigma * mu * np.eye(dim) - lam_mat @ lam_mat - correction
        y_comb = 2.0 * rhs / (lam[:, None] + lam[None, :])
        du, dlam_x, dlam_z = direction(_herm(y_comb))

        alpha_p = min(1.0, _STEP_DAMPING * _boundary_step(lam, dlam_x))
        alpha_d = min(1.0, _STEP_DAMPING * _boundary_step(lam, dlam_z))
        if alpha_p < _MIN_STEP and alpha_d < _MIN_STEP:
            stalls += 1
            if stalls >= 3:
                status = NUMERICAL_TROUBLE
                break
        else:
            stalls = 0

        u = u + alpha_p * du
        slack = _herm(slack + alpha_p * (r_mat @ dlam_x @ r_mat.conj().T))
        dual = _herm(dual + alpha_d * (r_inv.conj().T @ dlam_z @ r_inv))
        iterations = iteration + 1

    if status == OPTIMAL:
        rp, rd, gap, pobj, dobj, relgap = metrics(u, slack, dual)
        pinf = np.linalg.norm(rp) / f0_scale
        dinf = np.linalg.norm(rd) / c_scale
        return SdpResult(u, slack, dual, pobj, dobj, gap, relgap, pinf, dinf, iterations, status)
    # fall back to the best iterate seen
    u_b, x_b, s_b, pobj, dobj, gap, relgap, pinf, dinf = best
    return SdpResult(u_b, x_b, s_b, pobj, dobj, gap, relgap, pinf, dinf, iterations, status)
