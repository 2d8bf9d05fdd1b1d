"""Gaussian shift models: parameters in the first moments only.

Conventions
-----------
Phase-space ordering is (x_1, p_1, ..., x_k, p_k).  The covariance matrix
is σ = 2·⟨(r − r̄) ∘ (r − r̄)ᵀ⟩, so the vacuum has σ = I and physicality
reads σ + iΩ ⪰ 0.  This normalization is the one consistent with the
general-dyne outcome density

    p(r_out) = exp[−(r_out − r̄)ᵀ (σ + σ_m)⁻¹ (r_out − r̄)] / (π^k √det(σ + σ_m))

and with the information formulas F = 2 (∂r)ᵀ (σ + σ_m)⁻¹ ∂r and
J = 2 (∂r)ᵀ σ⁻¹ ∂r.  Everything here is finite real linear algebra on
2k-dimensional phase space; no Fock-space objects are ever built.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GaussianShiftModel",
    "GaussianMeasurement",
    "symplectic_form",
    "validate_cm",
    "gaussian_fim",
    "gaussian_qfim",
    "half_qfim_check",
    "generaldyne_logdensity",
    "load_gaussian_model",
    "save_gaussian_model",
    "load_measurement",
]

CM_TOL = 1e-10


@dataclass(frozen=True)
class GaussianShiftModel:
    """Gaussian state family with parameter-independent covariance.

    ``djacobian`` is the 2k×p matrix of mean-vector derivatives; ``cm`` the
    2k×2k covariance matrix; ``mean`` the first moments at the true
    parameter point.  ``dbeta`` (p×q) and ``weight`` (q×q) are optional and
    default to identities; they only enter the chained scalar-bound
    comparison.
    """

    modes: int
    djacobian: np.ndarray
    cm: np.ndarray
    mean: np.ndarray
    dbeta: np.ndarray | None = None
    weight: np.ndarray | None = None
    label: str = ""

    @property
    def n_params(self) -> int:
        return self.djacobian.shape[1]

    def dbeta_or_default(self) -> np.ndarray:
        return np.eye(self.n_params) if self.dbeta is None else np.asarray(self.dbeta, dtype=float)

    def weight_or_default(self) -> np.ndarray:
        q = self.dbeta_or_default().shape[1]
        return np.eye(q) if self.weight is None else np.asarray(self.weight, dtype=float)


@dataclass(frozen=True)
class GaussianMeasurement:
    """General-dyne measurement, characterized by its physical CM."""

    cm_m: np.ndarray


def symplectic_form(k: int) -> np.ndarray:
    """Block-diagonal symplectic form, k blocks of [[0, 1], [−1, 0]]."""
    if k < 1:
        raise ValueError(f"mode count must be >= 1, got {k}")
    omega = np.zeros((2 * k, 2 * k))
    for i in range(k):
        omega[2 * i, 2 * i + 1] = 1.0
        omega[2 * i + 1, 2 * i] = -1.0
    return omega


def validate_cm(cm: np.ndarray, k: int, tol: float = CM_TOL) -> bool:
    """Physicality test: min eigenvalue of the Hermitian σ + iΩ above −tol."""
    cm = np.asarray(cm, dtype=float)
    if cm.shape != (2 * k, 2 * k):
        raise ValueError(f"covariance matrix has shape {cm.shape}, expected {(2 * k, 2 * k)}")
    if np.abs(cm - cm.T).max() > 1e-12 * max(1.0, np.abs(cm).max()):
        raise ValueError("covariance matrix must be symmetric")
    herm = cm.astype(complex) + 1j * symplectic_form(k)
    return bool(np.linalg.eigvalsh(herm).min() >= -tol)


def _sum_cm(model: GaussianShiftModel, meas: GaussianMeasurement) -> np.ndarray:
    total = np.asarray(model.cm, dtype=float) + np.asarray(meas.cm_m, dtype=float)
    vals = np.linalg.eigvalsh(total)
    if vals.min() <= 1e-12 * max(vals.max(), 1.0):
        raise ValueError("sigma + sigma_m is numerically singular")
    return total


def gaussian_fim(model: GaussianShiftModel, meas: GaussianMeasurement) -> np.ndarray:
    """Classical information matrix 2 (∂r)ᵀ (σ + σ_m)⁻¹ ∂r of general-dyne outcomes."""
    total = _sum_cm(model, meas)
    dr = np.asarray(model.djacobian, dtype=float)
    f = 2.0 * dr.T @ np.linalg.solve(total, dr)
    return (f + f.T) / 2


def gaussian_qfim(model: GaussianShiftModel) -> np.ndarray:
    """Quantum information matrix 2 (∂r)ᵀ σ⁻¹ ∂r of the shift model."""
    cm = np.asarray(model.cm, dtype=float)
    vals = np.linalg.eigvalsh(cm)
    if vals.min() <= 1e-12 * max(vals.max(), 1.0):
        raise ValueError("sigma is numerically singular")
    dr = np.asarray(model.djacobian, dtype=float)
    j = 2.0 * dr.T @ np.linalg.solve(cm, dr)
    return (j + j.T) / 2


def half_qfim_check(model: GaussianShiftModel) -> tuple[np.ndarray, np.ndarray, float]:
    """Measure with σ_m = σ and compare: returns (F, J, ‖F − J/2‖_max).

    The deviation is zero up to linear-algebra roundoff for every valid
    model: 2(σ+σ)⁻¹ = σ⁻¹ identically.
    """
    f = gaussian_fim(model, GaussianMeasurement(cm_m=np.asarray(model.cm, dtype=float)))
    j = gaussian_qfim(model)
    return f, j, float(np.abs(f - j / 2).max())


def generaldyne_logdensity(r_out: np.ndarray, model: GaussianShiftModel,
                           meas: GaussianMeasurement) -> float:
    """Log of the general-dyne outcome density at ``r_out``."""
    total = _sum_cm(model, meas)
    dev = np.asarray(r_out, dtype=float) - np.asarray(model.mean, dtype=float)
    if dev.shape != (2 * model.modes,):
        raise ValueError(f"outcome vector has shape {dev.shape}, expected ({2 * model.modes},)")
    quad = float(dev @ np.linalg.solve(total, dev))
    _, logdet = np.linalg.slogdet(total)
    return -quad - model.modes * np.log(np.pi) - 0.5 * float(logdet)


# ---------------------------------------------------------------------------
# file formats (same conventions as the quantum-model files)


def _real_matrix(obj, where: str) -> np.ndarray:
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{where}: expected a rectangular real matrix") from exc
    if arr.ndim != 2:
        raise ValueError(f"{where}: expected a matrix, got ndim={arr.ndim}")
    return arr


def gaussian_model_from_dict(data: dict) -> GaussianShiftModel:
    for key in ("modes", "cm", "djacobian"):
        if key not in data:
            raise ValueError(f"gaussian model file misses required field '{key}'")
    k = data["modes"]
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"modes: expected a positive integer, got {k!r}")
    cm = _real_matrix(data["cm"], "cm")
    dj = _real_matrix(data["djacobian"], "djacobian")
    if cm.shape != (2 * k, 2 * k):
        raise ValueError(f"cm: shape {cm.shape} does not match modes={k}")
    if dj.shape[0] != 2 * k:
        raise ValueError(f"djacobian: {dj.shape[0]} rows do not match modes={k}")
    mean = np.array(data.get("mean", np.zeros(2 * k)), dtype=float)
    if mean.shape != (2 * k,):
        raise ValueError(f"mean: shape {mean.shape}, expected ({2 * k},)")
    dbeta = _real_matrix(data["dbeta"], "dbeta") if "dbeta" in data else None
    if dbeta is not None and dbeta.shape[0] != dj.shape[1]:
        raise ValueError(f"dbeta: {dbeta.shape[0]} rows do not match p={dj.shape[1]}")
    weight = _real_matrix(data["weight"], "weight") if "weight" in data else None
    label = data.get("label", "")
    return GaussianShiftModel(modes=k, djacobian=dj, cm=cm, mean=mean,
                              dbeta=dbeta, weight=weight, label=label)


def gaussian_model_to_dict(model: GaussianShiftModel) -> dict:
    out = {
        "modes": int(model.modes),
        "cm": [[float(x) for x in row] for row in np.asarray(model.cm, dtype=float)],
        "djacobian": [[float(x) for x in row] for row in np.asarray(model.djacobian, dtype=float)],
        "mean": [float(x) for x in np.asarray(model.mean, dtype=float)],
    }
    if model.dbeta is not None:
        out["dbeta"] = [[float(x) for x in row] for row in np.asarray(model.dbeta, dtype=float)]
    if model.weight is not None:
        out["weight"] = [[float(x) for x in row] for row in np.asarray(model.weight, dtype=float)]
    if model.label:
        out["label"] = model.label
    return out


def load_gaussian_model(path) -> GaussianShiftModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return gaussian_model_from_dict(data)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def save_gaussian_model(model: GaussianShiftModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(gaussian_model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_measurement(path, modes: int) -> GaussianMeasurement:
    """Load a measurement CM file {"cm": [[...]]} and shape-check it."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if "cm" not in data:
        raise ValueError(f"{path}: measurement file misses field 'cm'")
    cm = _real_matrix(data["cm"], "cm")
    if cm.shape != (2 * modes, 2 * modes):
        raise ValueError(f"{path}: cm shape {cm.shape} does not match modes={modes}")
    return GaussianMeasurement(cm_m=cm)
