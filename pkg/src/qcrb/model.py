"""Finite-dimensional quantum statistical models at a fixed parameter point.

A model stores the already-evaluated objects: the density matrix, its
partial derivatives, the derivative matrix of the target map, and the
weight matrix.  Nothing symbolic is kept — derivative provenance stays
with the user.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .exceptions import (
    KernelBlockDerivative,
    ModelError,
    NonHermitianDerivative,
    NotDensityMatrix,
    RankDeficientDbeta,
)

__all__ = [
    "QuantumModel",
    "ModelDiagnostics",
    "validate",
    "load_model",
    "save_model",
    "model_to_dict",
    "model_from_dict",
    "fixture",
    "FIXTURE_NAMES",
]

TRACE_TOL = 1e-10
PSD_TOL = 1e-10
RANK_TOL = 1e-10

_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULIS = (_SIGMA_X, _SIGMA_Y, _SIGMA_Z)


@dataclass(frozen=True)
class QuantumModel:
    """Quantum statistical model evaluated at the true parameter value.

    Attributes
    ----------
    dim : Hilbert-space dimension d.
    rho : (d, d) complex density matrix.
    drho : (p, d, d) complex partial derivatives of rho.
    dbeta : (p, q) real derivative matrix of the target map.
    weight : (q, q) real symmetric PSD weight matrix.
    label : free-form description.
    """

    dim: int
    rho: np.ndarray
    drho: np.ndarray
    dbeta: np.ndarray
    weight: np.ndarray
    label: str = ""

    @property
    def n_params(self) -> int:
        return self.drho.shape[0]

    @property
    def n_targets(self) -> int:
        return self.dbeta.shape[1]


@dataclass(frozen=True)
class ModelDiagnostics:
    rho_rank: int
    support_projector: np.ndarray
    min_eigenvalue: float


def validate(model: QuantumModel) -> ModelDiagnostics:
    """Check every model invariant; return rank diagnostics.

    Raises
    ------
    NotDensityMatrix, NonHermitianDerivative, RankDeficientDbeta,
    KernelBlockDerivative
        Typed errors naming the violated invariant.
    """
    rho = np.asarray(model.rho, dtype=complex)
    if rho.shape != (model.dim, model.dim):
        raise NotDensityMatrix(f"rho has shape {rho.shape}, expected ({model.dim}, {model.dim})")
    try:
        rho = linalg.require_hermitian(rho, "rho")
    except ValueError as exc:
        raise NotDensityMatrix(str(exc)) from exc
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotDensityMatrix(f"Tr rho = {tr!r} differs from 1 beyond {TRACE_TOL}")
    vals, vecs = np.linalg.eigh(rho)
    if vals.min() < -PSD_TOL:
        raise NotDensityMatrix(f"rho has negative eigenvalue {vals.min():.3e}")

    drho = np.asarray(model.drho, dtype=complex)
    if drho.ndim != 3 or drho.shape[1:] != (model.dim, model.dim):
        raise NonHermitianDerivative(f"drho has shape {drho.shape}, expected (p, {model.dim}, {model.dim})")
    for j, dj in enumerate(drho):
        try:
            linalg.require_hermitian(dj, f"drho[{j}]")
        except ValueError as exc:
            raise NonHermitianDerivative(str(exc)) from exc
        dtr = np.trace(dj)
        if abs(dtr) > TRACE_TOL * max(1.0, np.abs(dj).max()):
            raise NonHermitianDerivative(f"drho[{j}] has trace {dtr!r}, expected 0 (unit-trace family)")

    dbeta = np.asarray(model.dbeta, dtype=float)
    p, q = drho.shape[0], dbeta.shape[1] if dbeta.ndim == 2 else 0
    if dbeta.ndim != 2 or dbeta.shape[0] != p:
        raise RankDeficientDbeta(f"dbeta has shape {dbeta.shape}, expected ({p}, q)")
    svals = np.linalg.svd(dbeta, compute_uv=False)
    if q == 0 or svals.min() <= RANK_TOL * max(svals.max(), 1e-300):
        raise RankDeficientDbeta(
            f"dbeta must have full column rank {q}; singular values {np.array2string(svals, precision=3)}"
        )

    weight = np.asarray(model.weight, dtype=float)
    if weight.shape != (q, q):
        raise ModelError(f"weight has shape {weight.shape}, expected ({q}, {q})")
    try:
        linalg.psd_sqrt(weight, "weight")
    except ValueError as exc:
        raise ModelError(str(exc)) from exc

    # Fixed-rank assumption: derivatives may not carry kernel×kernel content,
    # otherwise the SLD equation has no solution.
    scale = max(vals.max(), 1e-300)
    support = vals > RANK_TOL * scale
    rank = int(np.count_nonzero(support))
    kernel_vecs = vecs[:, ~support]
    for j, dj in enumerate(drho):
        block = kernel_vecs.conj().T @ dj @ kernel_vecs
        if block.size and np.abs(block).max() > RANK_TOL * max(1.0, np.abs(dj).max()):
            raise KernelBlockDerivative(
                f"drho[{j}] has kernel-block content {np.abs(block).max():.3e}; "
                "the SLD equation is unsolvable there (rank of rho not locally fixed)"
            )
    supp_vecs = vecs[:, support]
    projector = supp_vecs @ supp_vecs.conj().T
    return ModelDiagnostics(rho_rank=rank, support_projector=projector, min_eigenvalue=float(vals.min()))


# ---------------------------------------------------------------------------
# serialization


def _complex_matrix_to_pairs(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


def _pairs_to_complex_matrix(obj, where: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ValueError(f"{where}: expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list):
            raise ValueError(f"{where}[{i}]: expected a list of [re, im] pairs")
        entries = []
        for j, pair in enumerate(row):
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ValueError(f"{where}[{i}][{j}]: expected an [re, im] pair")
            entries.append(complex(pair[0], pair[1]))
        rows.append(entries)
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{where}: ragged rows")
    return np.array(rows, dtype=complex)


def _real_matrix(obj, where: str) -> np.ndarray:
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{where}: expected a rectangular real matrix") from exc
    if arr.ndim != 2:
        raise ValueError(f"{where}: expected a matrix, got ndim={arr.ndim}")
    return arr


def model_to_dict(model: QuantumModel) -> dict:
    out = {
        "dim": int(model.dim),
        "rho": _complex_matrix_to_pairs(model.rho),
        "drho": [_complex_matrix_to_pairs(dj) for dj in model.drho],
        "dbeta": [[float(x) for x in row] for row in np.asarray(model.dbeta, dtype=float)],
        "weight": [[float(x) for x in row] for row in np.asarray(model.weight, dtype=float)],
    }
    if model.label:
        out["label"] = model.label
    return out


def model_from_dict(data: dict) -> QuantumModel:
    for key in ("dim", "rho", "drho", "dbeta"):
        if key not in data:
            raise ValueError(f"model file misses required field '{key}'")
    dim = data["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ValueError(f"dim: expected a positive integer, got {dim!r}")
    rho = _pairs_to_complex_matrix(data["rho"], "rho")
    if rho.shape != (dim, dim):
        raise ValueError(f"rho: shape {rho.shape} does not match dim={dim}")
    if not isinstance(data["drho"], list) or not data["drho"]:
        raise ValueError("drho: expected a non-empty list of matrices")
    drho = np.array([_pairs_to_complex_matrix(dj, f"drho[{j}]") for j, dj in enumerate(data["drho"])])
    if drho.shape[1:] != (dim, dim):
        raise ValueError(f"drho: matrices of shape {drho.shape[1:]} do not match dim={dim}")
    dbeta = _real_matrix(data["dbeta"], "dbeta")
    q = dbeta.shape[1]
    weight = _real_matrix(data["weight"], "weight") if "weight" in data else np.eye(q)
    label = data.get("label", "")
    if not isinstance(label, str):
        raise ValueError("label: expected a string")
    return QuantumModel(dim=dim, rho=rho, drho=drho, dbeta=dbeta, weight=weight, label=label)


def load_model(path) -> QuantumModel:
    """Load and validate a model file (JSON, complex entries as [re, im])."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        model = model_from_dict(data)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    validate(model)
    return model


def save_model(model: QuantumModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# built-in fixtures

FIXTURE_NAMES = (
    "qubit_bloch",
    "qubit_xy_at_z",
    "pure_qubit_angles",
    "classical_diagonal",
    "random_full_rank",
)


def _bloch_state(n: np.ndarray) -> np.ndarray:
    return (np.eye(2, dtype=complex) + n[0] * _SIGMA_X + n[1] * _SIGMA_Y + n[2] * _SIGMA_Z) / 2


def fixture(name: str, params) -> QuantumModel:
    """Construct one of the built-in closed-form models.

    qubit_bloch(rx, ry, rz)
        Full Bloch parameterization, |r| < 1; p = q = 3.
    qubit_xy_at_z(z)
        rho = (I + z sigma_z)/2 with transverse derivatives
        (sigma_x/2, sigma_y/2); p = q = 2, |z| < 1.
    pure_qubit_angles(theta, phi)
        Rank-1 Bloch state with polar-angle parameters; weight is set to
        the quantum information matrix diag(1, sin²θ) so the scalar risk
        is the one under which pure-state tomography saturates the upper
        bound chain.  Requires sin(theta) well away from 0.
    classical_diagonal(p1, ..., p_{d-1})
        Full-rank diagonal (commuting) model on d = len(params)+1 levels.
    random_full_rank(seed[, d[, p[, q]]])
        Seeded random full-rank model; defaults d=3, p=2, q=2.
    """
    params = [float(x) for x in params]
    if name == "qubit_bloch":
        if len(params) != 3:
            raise ValueError("qubit_bloch expects params (rx, ry, rz)")
        r = np.array(params)
        if np.linalg.norm(r) >= 1:
            raise ValueError(f"qubit_bloch requires |r| < 1, got |r| = {np.linalg.norm(r):.6f}")
        return QuantumModel(
            dim=2,
            rho=_bloch_state(r),
            drho=np.array([s / 2 for s in _PAULIS]),
            dbeta=np.eye(3),
            weight=np.eye(3),
            label=f"qubit_bloch({params[0]!r}, {params[1]!r}, {params[2]!r})",
        )
    if name == "qubit_xy_at_z":
        if len(params) != 1:
            raise ValueError("qubit_xy_at_z expects params (z,)")
        z = params[0]
        if abs(z) >= 1:
            raise ValueError(f"qubit_xy_at_z requires |z| < 1, got {z!r}")
        return QuantumModel(
            dim=2,
            rho=_bloch_state(np.array([0.0, 0.0, z])),
            drho=np.array([_SIGMA_X / 2, _SIGMA_Y / 2]),
            dbeta=np.eye(2),
            weight=np.eye(2),
            label=f"qubit_xy_at_z({z!r})",
        )
    if name == "pure_qubit_angles":
        if len(params) != 2:
            raise ValueError("pure_qubit_angles expects params (theta, phi)")
        theta, phi = params
        st, ct = np.sin(theta), np.cos(theta)
        sp, cp = np.sin(phi), np.cos(phi)
        if abs(st) < 1e-6:
            raise ValueError("pure_qubit_angles is degenerate at the poles (sin(theta) ~ 0)")
        n = np.array([st * cp, st * sp, ct])
        dn_theta = np.array([ct * cp, ct * sp, -st])
        dn_phi = np.array([-st * sp, st * cp, 0.0])
        drho = np.array(
            [
                (dn_theta[0] * _SIGMA_X + dn_theta[1] * _SIGMA_Y + dn_theta[2] * _SIGMA_Z) / 2,
                (dn_phi[0] * _SIGMA_X + dn_phi[1] * _SIGMA_Y + dn_phi[2] * _SIGMA_Z) / 2,
            ]
        )
        return QuantumModel(
            dim=2,
            rho=_bloch_state(n),
            drho=drho,
            dbeta=np.eye(2),
            weight=np.diag([1.0, st * st]),
            label=f"pure_qubit_angles({theta!r}, {phi!r})",
        )
    if name == "classical_diagonal":
        if not params:
            raise ValueError("classical_diagonal expects params (p1, ..., p_{d-1})")
        probs = np.array(params)
        if probs.min() <= 0 or probs.sum() >= 1:
            raise ValueError("classical_diagonal requires p_i > 0 with sum < 1 (full rank)")
        d = len(probs) + 1
        diag = np.append(probs, 1.0 - probs.sum())
        drho = np.zeros((d - 1, d, d), dtype=complex)
        for j in range(d - 1):
            drho[j, j, j] = 1.0
            drho[j, d - 1, d - 1] = -1.0
        return QuantumModel(
            dim=d,
            rho=np.diag(diag).astype(complex),
            drho=drho,
            dbeta=np.eye(d - 1),
            weight=np.eye(d - 1),
            label=f"classical_diagonal({', '.join(repr(x) for x in params)})",
        )
    if name == "random_full_rank":
        if not params:
            raise ValueError("random_full_rank expects params (seed[, d[, p[, q]]])")
        seed = int(params[0])
        d = int(params[1]) if len(params) > 1 else 3
        p = int(params[2]) if len(params) > 2 else 2
        q = int(params[3]) if len(params) > 3 else 2
        if d < 2 or p < 1 or q < 1 or q > p:
            raise ValueError("random_full_rank requires d >= 2 and 1 <= q <= p")
        if p > d * d - 1:
            raise ValueError(f"random_full_rank requires p <= d²-1 = {d * d - 1} for a feasible model")
        rng = np.random.default_rng(seed)
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = g @ g.conj().T
        rho = 0.9 * rho / np.trace(rho).real + 0.1 * np.eye(d) / d
        rho = linalg.hermitian_part(rho)
        drho = []
        for _ in range(p):
            h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            h = linalg.hermitian_part(h)
            h -= np.trace(h).real / d * np.eye(d)
            drho.append(h)
        dbeta = rng.normal(size=(p, q))
        return QuantumModel(
            dim=d,
            rho=rho,
            drho=np.array(drho),
            dbeta=dbeta,
            weight=np.eye(q),
            label=f"random_full_rank(seed={seed}, d={d}, p={p}, q={q})",
        )
    raise ValueError(f"unknown fixture '{name}'; known: {', '.join(FIXTURE_NAMES)}")
