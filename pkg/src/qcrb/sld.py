"""Symmetric logarithmic derivatives and the quantum information matrices.

The Lyapunov equation drho_j = rho ∘ L_j is solved in the eigenbasis of
rho; on rank-deficient states the kernel×kernel block of L_j is set to
zero (minimum-norm representative of the SLD equivalence class).  Every
downstream bound is invariant to that choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import ResidualTooLarge
from .model import QuantumModel

__all__ = [
    "SldSet",
    "InformationData",
    "compute_slds",
    "information",
    "feasibility",
    "infeasible_columns",
]

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class SldSet:
    """SLD operators, shape (p, d, d), with per-equation residual norms."""

    slds: np.ndarray
    residuals: np.ndarray


@dataclass(frozen=True)
class InformationData:
    """Quantum information matrix J = Re Z(L), mean-uncertainty matrix
    D = Im Z(L) (skew-symmetric), and the numerical rank of J."""

    qfim: np.ndarray
    dmat: np.ndarray
    qfim_rank: int


def compute_slds(model: QuantumModel, rank_tol: float = linalg.DEFAULT_RANK_TOL,
                 residual_tol: float = RESIDUAL_TOL) -> SldSet:
    """Solve drho_j = rho ∘ L_j for every parameter.

    In the eigenbasis of rho, (L_j)_ab = 2 (drho_j)_ab / (λ_a + λ_b) when
    λ_a + λ_b exceeds ``rank_tol`` relative to the largest eigenvalue, and
    0 otherwise.  Raises :class:`ResidualTooLarge` when the reconstruction
    ‖rho ∘ L_j − drho_j‖_F exceeds ``residual_tol`` (kernel-block content
    that slipped past validation).
    """
    rho = linalg.hermitian_part(np.asarray(model.rho, dtype=complex))
    vals, vecs = np.linalg.eigh(rho)
    cutoff = rank_tol * max(vals.max(), 1e-300)
    pair_sums = vals[:, None] + vals[None, :]
    solvable = pair_sums > cutoff
    inv_pairs = np.zeros_like(pair_sums)
    inv_pairs[solvable] = 2.0 / pair_sums[solvable]

    slds = []
    residuals = []
    for j, dj in enumerate(np.asarray(model.drho, dtype=complex)):
        dj_eig = vecs.conj().T @ dj @ vecs
        l_eig = dj_eig * inv_pairs
        lj = vecs @ l_eig @ vecs.conj().T
        lj = linalg.hermitian_part(lj)
        res = np.linalg.norm(linalg.jordan_product(rho, lj) - dj)
        if res > residual_tol:
            raise ResidualTooLarge(
                f"SLD equation for parameter {j} left residual {res:.3e} > {residual_tol:.1e}"
            )
        slds.append(lj)
        residuals.append(res)
    return SldSet(slds=np.array(slds), residuals=np.array(residuals))


def information(model: QuantumModel, slds: SldSet,
                rank_tol: float = linalg.DEFAULT_RANK_TOL) -> InformationData:
    """Information matrices from the SLDs: J = Re Z(L), D = Im Z(L).

    J is symmetrized and D antisymmetrized exactly, so downstream code can
    rely on J = Jᵀ and D = −Dᵀ holding to the bit.
    """
    z = linalg.z_matrix(slds.slds, model.rho)
    j = (z.real + z.real.T) / 2
    d = (z.imag - z.imag.T) / 2
    w = np.linalg.eigvalsh(j)
    rank = int(np.count_nonzero(np.abs(w) > rank_tol * max(np.abs(w).max(), 1e-300)))
    return InformationData(qfim=j, dmat=d, qfim_rank=rank)


def feasibility(info: InformationData, dbeta: np.ndarray, tol: float = 1e-8) -> bool:
    """Estimability predicate: every column of dbeta lies in the range of J.

    Checked as ‖J J⁺ dbeta − dbeta‖_max ≤ tol; when it fails, no influence
    operators satisfy the unbiasedness constraints and the affected target
    components carry unbounded variance.
    """
    dbeta = np.asarray(dbeta, dtype=float)
    j = info.qfim
    if dbeta.shape[0] != j.shape[0]:
        raise ValueError(f"dbeta has {dbeta.shape[0]} rows, J is {j.shape[0]}×{j.shape[1]}")
    proj = j @ linalg.pseudoinverse(j)
    return bool(np.abs(proj @ dbeta - dbeta).max() <= tol)


def infeasible_columns(info: InformationData, dbeta: np.ndarray, tol: float = 1e-8) -> list[int]:
    """Indices of dbeta columns outside the range of J (empty iff feasible)."""
    dbeta = np.asarray(dbeta, dtype=float)
    proj = info.qfim @ linalg.pseudoinverse(info.qfim)
    dev = np.abs(proj @ dbeta - dbeta)
    return [s for s in range(dbeta.shape[1]) if dev[:, s].max() > tol]
