"""Hermitian matrix algebra shared by every bound computation.

All operators are plain complex numpy arrays; a "vector of operators" is an
array of shape ``(n, d, d)``.  Functions are pure and never mutate their
arguments.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "hermitian_part",
    "require_hermitian",
    "jordan_product",
    "sld_inner",
    "z_matrix",
    "v_matrix",
    "trace_norm",
    "pseudoinverse",
    "psd_sqrt",
    "hermitian_basis",
    "basis_coefficients",
    "operator_from_coefficients",
    "belavkin_grishanin_gap",
    "weighted_tracenorm_check",
]

#: Relative tolerance used to accept a matrix as Hermitian.
HERMITICITY_TOL = 1e-12

#: Relative spectral cutoff below which eigenvalues count as zero.
DEFAULT_RANK_TOL = 1e-10


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Return (A + A†)/2."""
    return (a + a.conj().T) / 2


def require_hermitian(a: np.ndarray, name: str = "matrix", tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate that ``a`` is square and Hermitian within ``tol`` (relative).

    Returns the exactly Hermitized array so downstream eigendecompositions
    see a symmetric input.  Raises ``ValueError`` otherwise.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    scale = max(np.abs(a).max(), 1.0) if a.size else 1.0
    dev = np.abs(a - a.conj().T).max() if a.size else 0.0
    if dev > tol * scale:
        raise ValueError(f"{name} is not Hermitian (deviation {dev:.3e}, scale {scale:.3e})")
    return hermitian_part(a)


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def jordan_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Symmetrized product (AB + BA)/2 of two same-dimension operators."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_same_dim(a, b)
    return (a @ b + b @ a) / 2


def sld_inner(x_ops: np.ndarray, y_ops: np.ndarray, rho: np.ndarray) -> float:
    """Real inner product Tr ρ Σ_s X_s ∘ Y_s between two operator vectors.

    Parameters
    ----------
    x_ops, y_ops : arrays of shape (n, d, d)
        Hermitian operator vectors of equal length.
    rho : array (d, d)
        Density matrix defining the weight.
    """
    x_ops = np.asarray(x_ops, dtype=complex)
    y_ops = np.asarray(y_ops, dtype=complex)
    if x_ops.shape != y_ops.shape:
        raise ValueError(f"operator vectors differ in shape: {x_ops.shape} vs {y_ops.shape}")
    if x_ops.shape[-1] != rho.shape[-1]:
        raise ValueError("operator dimension does not match rho")
    total = 0.0
    for xs, ys in zip(x_ops, y_ops):
        total += np.trace(rho @ jordan_product(xs, ys)).real
    return float(total)


def z_matrix(x_ops: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Complex covariance matrix Z_st = Tr ρ X_s X_t of an operator vector.

    The result is Hermitian (enforced exactly) and positive semidefinite up
    to roundoff for Hermitian inputs.
    """
    x_ops = np.asarray(x_ops, dtype=complex)
    if x_ops.shape[-1] != rho.shape[-1]:
        raise ValueError("operator dimension does not match rho")
    n = x_ops.shape[0]
    rho_x = np.array([rho @ xs for xs in x_ops])
    z = np.empty((n, n), dtype=complex)
    for s in range(n):
        for t in range(n):
            # Tr(rho X_s X_t) = sum over entries of (rho X_s) * (X_t)^T
            z[s, t] = np.sum(rho_x[s] * x_ops[t].T)
    return hermitian_part(z)


def v_matrix(x_ops: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Real covariance matrix V = Re Z; symmetric PSD up to roundoff."""
    z = z_matrix(x_ops, rho)
    v = z.real
    return (v + v.T) / 2


def trace_norm(a: np.ndarray) -> float:
    """Trace norm ‖A‖₁ = sum of singular values."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False).sum())


def pseudoinverse(m: np.ndarray, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a real symmetric matrix.

    Eigendecomposition based: eigenvalues with |λ| ≤ rank_tol are treated as
    exact zeros.  ``rank_tol`` defaults to ``1e-10`` times the largest
    eigenvalue magnitude.

    Raises
    ------
    ValueError
        If ``m`` is not symmetric.
    """
    m = np.asarray(m)
    if np.iscomplexobj(m):
        if np.abs(m.imag).max() > HERMITICITY_TOL * max(1.0, np.abs(m).max()):
            raise ValueError("pseudoinverse expects a real symmetric matrix")
        m = m.real
    m = m.astype(float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got {m.shape}")
    if np.abs(m - m.T).max() > HERMITICITY_TOL * max(np.abs(m).max(), 1.0):
        raise ValueError("pseudoinverse expects a symmetric matrix")
    w, v = np.linalg.eigh((m + m.T) / 2)
    if rank_tol is None:
        rank_tol = DEFAULT_RANK_TOL * (np.abs(w).max() if w.size else 1.0)
    inv_w = np.zeros_like(w)
    keep = np.abs(w) > rank_tol
    inv_w[keep] = 1.0 / w[keep]
    out = (v * inv_w) @ v.T
    return (out + out.T) / 2


def psd_sqrt(w: np.ndarray, name: str = "weight") -> np.ndarray:
    """Spectral square root of a symmetric PSD matrix, clipping eigenvalues at 0.

    Raises ``ValueError`` when ``w`` is not symmetric or clearly not PSD
    (minimum eigenvalue below −1e−8 times the trace scale).
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"{name} must be square, got {w.shape}")
    if np.abs(w - w.T).max() > HERMITICITY_TOL * max(1.0, np.abs(w).max()):
        raise ValueError(f"{name} must be symmetric")
    vals, vecs = np.linalg.eigh((w + w.T) / 2)
    scale = max(float(np.trace(w)), float(np.abs(vals).max()) if vals.size else 0.0, 1e-300)
    if vals.min() < -1e-8 * scale:
        raise ValueError(f"{name} is not positive semidefinite (min eigenvalue {vals.min():.3e})")
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    return (root + root.T) / 2


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal basis of d×d Hermitian matrices, shape (d², d, d).

    Generalized Gell-Mann construction under the Hilbert-Schmidt inner
    product Tr(E_a E_b) = δ_ab, in a fixed documented order: symmetric
    off-diagonal pairs (i<j, lexicographic), antisymmetric pairs, the d−1
    diagonal traceless matrices, and the scaled identity last.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    basis = []
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = inv_sqrt2
            e[j, i] = inv_sqrt2
            basis.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = -1j * inv_sqrt2
            e[j, i] = 1j * inv_sqrt2
            basis.append(e)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -float(l)
        basis.append(np.diag(diag).astype(complex) / np.sqrt(l * (l + 1)))
    basis.append(np.eye(d, dtype=complex) / np.sqrt(d))
    return np.array(basis)


def basis_coefficients(a: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Real coefficients Tr(A E_a) of a Hermitian A in an orthonormal basis."""
    return np.array([np.sum(e * a.T).real for e in basis])


def operator_from_coefficients(coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Inverse of :func:`basis_coefficients`: Σ_a c_a E_a."""
    return np.tensordot(np.asarray(coeffs, dtype=float), basis, axes=(0, 0))


def belavkin_grishanin_gap(a: np.ndarray) -> float:
    """tr Re A − ‖Im A‖₁ for a Hermitian PSD matrix A; nonnegative up to roundoff.

    Raises ``ValueError`` when A fails the PSD check (minimum eigenvalue
    below −1e−8 · tr A).
    """
    a = require_hermitian(a, "matrix")
    w = np.linalg.eigvalsh(a)
    tr = float(np.trace(a).real)
    if w.size and w.min() < -1e-8 * tr:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")
    return float(np.trace(a.real).real) - trace_norm(a.imag)


def weighted_tracenorm_check(w: np.ndarray, a: np.ndarray) -> tuple[float, float]:
    """Evaluate both sides of ‖√W A √W‖₁ ≤ ‖W A‖₁ for PSD W and skew-symmetric A.

    Returns ``(lhs, rhs)``; the inequality holds for all valid inputs.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"A must be square, got {a.shape}")
    if np.abs(a + a.T).max() > HERMITICITY_TOL * max(1.0, np.abs(a).max()):
        raise ValueError("A must be skew-symmetric")
    root = psd_sqrt(w, "W")
    lhs = trace_norm(root @ a @ root)
    rhs = trace_norm(np.asarray(w, dtype=float) @ a)
    return lhs, rhs
