"""The Holevo bound as a semidefinite program over influence operators.

Each influence operator is expanded over an orthonormal Hermitian basis,
the linear unbiasedness constraints are eliminated through a nullspace
parameterization (iterates stay feasible by construction), and the
epigraph matrix V ⪰ Z(X) is imposed through the Schur-complement block

    [[V, M(x)†], [M(x), I]]  ⪰ 0,      M(x)† M(x) = Z(X),

where column s of M(x) collects the coordinates of X_s √ρ.  The single
PSD block goes to the interior-point core in :mod:`qcrb.sdp`.

For rank-deficient states the kernel×kernel basis directions influence
neither objective nor constraints; by default they are dropped from the
optimization (``reduce_kernel=True``), shrinking both the variable count
and the PSD block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg, sdp
from .bounds import c_d as _c_d
from .bounds import c_gs as _c_gs
from .bounds import x_eff as _x_eff
from .exceptions import InfeasibleModel, VerificationFailed
from .model import QuantumModel
from .sld import SldSet, compute_slds, information

__all__ = ["HolevoProblem", "HolevoSolution", "build_problem", "solve", "verify_solution"]

CONSTRAINT_TOL = 1e-8


@dataclass(frozen=True)
class HolevoProblem:
    """Assembled SDP data for one model.

    ``constraint_matrix`` (rows: zero-mean, then one per model parameter)
    acts on the coefficient vector of a single influence component; the
    right-hand side differs per component and sits in ``constraint_rhs``
    (column s).  ``x0`` holds feasible coefficients (the efficient
    influence operators) and ``nullspace`` a basis of the per-component
    feasible directions; ``basis_coeffs_dim`` counts the free real
    coefficients after elimination.
    """

    model: QuantumModel
    basis: np.ndarray
    constraint_matrix: np.ndarray
    constraint_rhs: np.ndarray
    x0: np.ndarray
    nullspace: np.ndarray
    right_factor: np.ndarray
    basis_coeffs_dim: int
    z_eff: np.ndarray

    @property
    def n_targets(self) -> int:
        return self.constraint_rhs.shape[1]


@dataclass(frozen=True)
class HolevoSolution:
    """SDP outcome: bound value, minimizer, and certificates."""

    c_h: float
    x_opt: np.ndarray
    v_opt: np.ndarray
    duality_gap: float
    iterations: int
    status: str
    dual_objective: float
    primal_residual: float
    dual_residual: float


def _reduced_hermitian_basis(supp: np.ndarray, kern: np.ndarray) -> np.ndarray:
    """Basis of Hermitian operators touching the support of rho.

    ``supp``/``kern`` are orthonormal support and kernel eigenvector
    blocks.  Returns r² support-block elements followed by 2·r·k cross
    pairs; all orthonormal under the Hilbert-Schmidt inner product.
    """
    r = supp.shape[1]
    k = kern.shape[1]
    elems = [supp @ e @ supp.conj().T for e in linalg.hermitian_basis(r)]
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(r):
        u = supp[:, i]
        for j in range(k):
            v = kern[:, j]
            cross = np.outer(u, v.conj())
            elems.append((cross + cross.conj().T) * inv_sqrt2)
            elems.append((-1j * cross + 1j * cross.conj().T) * inv_sqrt2)
    return np.array(elems)


def build_problem(model: QuantumModel, slds: SldSet | None = None,
                  reduce_kernel: bool = True,
                  rank_tol: float = linalg.DEFAULT_RANK_TOL) -> HolevoProblem:
    """Expand the influence operators over a Hermitian basis and encode the
    unbiasedness constraints.

    Raises :class:`InfeasibleModel` when the constraint set is empty (some
    dbeta column leaves the range of the information matrix).
    """
    if slds is None:
        slds = compute_slds(model)
    info = information(model, slds)
    x_eff_ops = _x_eff(model, slds, info)  # raises InfeasibleModel when empty

    rho = linalg.hermitian_part(np.asarray(model.rho, dtype=complex))
    vals, vecs = np.linalg.eigh(rho)
    support = vals > rank_tol * max(vals.max(), 1e-300)
    supp_vecs = vecs[:, support]
    right_factor = supp_vecs * np.sqrt(vals[support])

    if reduce_kernel and not support.all():
        basis = _reduced_hermitian_basis(supp_vecs, vecs[:, ~support])
    else:
        basis = linalg.hermitian_basis(model.dim)
    n_b = basis.shape[0]

    rows = [np.array([np.trace(rho @ e).real for e in basis])]
    for dj in np.asarray(model.drho, dtype=complex):
        rows.append(np.array([np.trace(dj @ e).real for e in basis]))
    a_mat = np.array(rows)  # (1+p, n_b)
    rhs = np.vstack([np.zeros(model.n_targets), np.asarray(model.dbeta, dtype=float)])  # (1+p, q)

    x0 = np.array([linalg.basis_coefficients(xs, basis) for xs in x_eff_ops])  # (q, n_b)
    residual = np.abs(a_mat @ x0.T - rhs).max()
    if residual > CONSTRAINT_TOL:
        raise InfeasibleModel(
            f"no influence operators satisfy the unbiasedness constraints (residual {residual:.3e})"
        )

    svals = np.linalg.svd(a_mat, compute_uv=False)
    cut = max(svals.max(), 1e-300) * 1e-12
    rank = int(np.count_nonzero(svals > cut))
    _, _, vh = np.linalg.svd(a_mat, full_matrices=True)
    nullspace = vh[rank:].T  # (n_b, m_s)

    z_eff = linalg.z_matrix(x_eff_ops, rho)
    return HolevoProblem(
        model=model,
        basis=basis,
        constraint_matrix=a_mat,
        constraint_rhs=rhs,
        x0=x0,
        nullspace=nullspace,
        right_factor=right_factor,
        basis_coeffs_dim=model.n_targets * nullspace.shape[1],
        z_eff=z_eff,
    )


def solve(problem: HolevoProblem, tol: float = 1e-8, max_iter: int = 200) -> HolevoSolution:
    """Minimize tr(W V) over the epigraph SDP by the interior-point core.

    The iteration starts from the efficient influence operators with
    V = Re Z(X_eff) plus a spectral margin, which is strictly interior.
    Status is ``Optimal`` when primal/dual feasibility and the relative
    duality gap reach tolerance; ``MaxIterations``/``NumericalTrouble``
    return the best iterate found.
    """
    model = problem.model
    q = problem.n_targets
    basis = problem.basis
    m_s = problem.nullspace.shape[1]
    d_r = problem.right_factor.shape[0] * problem.right_factor.shape[1]
    block = q + d_r
    weight = np.asarray(model.weight, dtype=float)

    # coefficient vector -> column of M(x): rows of basis_m are vec(E_a sqrt(rho))
    basis_m = np.array([(e @ problem.right_factor).reshape(-1) for e in basis])  # (n_b, d_r)

    v_index = [(a, b) for a in range(q) for b in range(a, q)]
    n_v = len(v_index)

    # Nullspace directions supported purely on the kernel×kernel block of
    # rho leave M(x) (hence objective and constraints) untouched; their
    # induced columns are roundoff-level.  Pin them at the reduced-space
    # representative (x0) instead of letting the solver drift along noise.
    null_cols = problem.nullspace.T @ basis_m  # (m_s, d_r)
    active = [l for l in range(m_s) if np.linalg.norm(null_cols[l]) > 1e-12]
    n = n_v + q * len(active)

    fs = np.zeros((n, block, block), dtype=complex)
    c = np.zeros(n)
    for i, (a, b) in enumerate(v_index):
        fs[i, a, b] = 1.0
        fs[i, b, a] = 1.0
        c[i] = weight[a, a] if a == b else 2.0 * weight[a, b]
    for s in range(q):
        for k, l in enumerate(active):
            i = n_v + s * len(active) + k
            fs[i, q:, s] = null_cols[l]
            fs[i, s, q:] = null_cols[l].conj()

    f0 = np.zeros((block, block), dtype=complex)
    m0 = (problem.x0 @ basis_m).T  # (d_r, q)
    f0[q:, :q] = m0
    f0[:q, q:] = m0.conj().T
    f0[q:, q:] = np.eye(d_r)

    z_eff = problem.z_eff
    z_norm = float(np.linalg.norm(z_eff, 2))
    v_start = z_eff.real + (1.1 * z_norm + 1.0) * np.eye(q)
    u0 = np.zeros(n)
    for i, (a, b) in enumerate(v_index):
        u0[i] = v_start[a, b]

    w_scale = max(float(np.trace(weight)) / q, 1.0)
    s0 = np.zeros((block, block), dtype=complex)
    s0[:q, :q] = weight + 1e-6 * w_scale * np.eye(q)
    s0[q:, q:] = w_scale * np.eye(d_r)

    result = sdp.solve_lmi(c, f0, fs, u0=u0, s0=s0, tol=tol, max_iter=max_iter)

    v_opt = np.zeros((q, q))
    for i, (a, b) in enumerate(v_index):
        v_opt[a, b] = result.u[i]
        v_opt[b, a] = result.u[i]
    y = np.zeros((q, m_s))
    if active:
        y[:, active] = result.u[n_v:].reshape(q, len(active))
    coeffs = problem.x0 + y @ problem.nullspace.T
    x_opt = np.tensordot(coeffs, basis, axes=(1, 0))

    return HolevoSolution(
        c_h=float(np.trace(weight @ v_opt)),
        x_opt=x_opt,
        v_opt=v_opt,
        duality_gap=result.relgap,
        iterations=result.iterations,
        status=result.status,
        dual_objective=result.dobj,
        primal_residual=result.pinfeas,
        dual_residual=result.dinfeas,
    )


@dataclass(frozen=True)
class HolevoVerification:
    nonsmooth_objective: float
    objective_deviation: float
    unbias_residual: float
    c_gs: float
    c_d: float


def verify_solution(model: QuantumModel, sol: HolevoSolution,
                    slds: SldSet | None = None,
                    objective_tol: float = 1e-7,
                    constraint_tol: float = CONSTRAINT_TOL) -> HolevoVerification:
    """Recheck an Optimal solution independently of the solver.

    Recomputes the nonsmooth objective tr W Re Z(X) + ‖√W Im Z(X) √W‖₁ at
    the reported minimizer, the unbiasedness residuals, and the ordering
    against the closed-form bounds.  Raises :class:`VerificationFailed`
    naming the first violated check.
    """
    if sol.status != sdp.OPTIMAL:
        raise VerificationFailed(f"solution status is {sol.status}, not {sdp.OPTIMAL}")
    if slds is None:
        slds = compute_slds(model)
    info = information(model, slds)

    z = linalg.z_matrix(sol.x_opt, model.rho)
    root_w = linalg.psd_sqrt(model.weight)
    nonsmooth = float(np.trace(model.weight @ z.real)) + linalg.trace_norm(root_w @ z.imag @ root_w)
    deviation = abs(nonsmooth - sol.c_h)
    if deviation > objective_tol * max(1.0, abs(sol.c_h)):
        raise VerificationFailed(
            f"nonsmooth objective {nonsmooth!r} deviates from c_h {sol.c_h!r} by {deviation:.3e}"
        )

    mean_res = max(abs(np.trace(model.rho @ xs)) for xs in sol.x_opt)
    deriv = np.array(
        [[np.trace(dj @ xs).real for xs in sol.x_opt] for dj in model.drho]
    )
    deriv_res = np.abs(deriv - model.dbeta).max()
    unbias = float(max(mean_res, deriv_res))
    if unbias > constraint_tol:
        raise VerificationFailed(f"local unbiasedness violated: residual {unbias:.3e}")

    gs = _c_gs(model, slds, info)
    d = _c_d(model, slds, info)
    if not (gs - objective_tol * max(1.0, gs) <= sol.c_h <= d + objective_tol * max(1.0, d)):
        raise VerificationFailed(
            f"bound ordering violated: c_gs={gs!r}, c_h={sol.c_h!r}, c_d={d!r}"
        )
    return HolevoVerification(
        nonsmooth_objective=nonsmooth,
        objective_deviation=deviation,
        unbias_residual=unbias,
        c_gs=gs,
        c_d=d,
    )
