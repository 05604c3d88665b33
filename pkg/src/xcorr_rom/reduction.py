"""Proper orthogonal decomposition of a snapshot matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import ParameterError

__all__ = [
    "PodBasis",
    "CoefficientTable",
    "compute_pod",
    "energy_curve",
    "numerical_rank",
    "project",
    "reconstruct",
    "DEFAULT_ENERGY_THRESHOLD",
]

DEFAULT_ENERGY_THRESHOLD = 0.9999

# Singular values below this fraction of sigma_1 are round-off.
RANK_RTOL = 1e-13


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PodBasis:
    """Truncated left-singular basis of a snapshot matrix.

    Attributes
    ----------
    modes : ndarray, shape (N_h, N_r)
        Orthonormal POD modes.
    singular_values : ndarray
        Full singular spectrum, non-increasing.
    energy_captured : float
        Fraction of squared singular values retained by the modes.
    """

    modes: np.ndarray
    singular_values: np.ndarray
    energy_captured: float

    def __post_init__(self):
        object.__setattr__(self, "modes", _frozen(self.modes))
        object.__setattr__(self, "singular_values", _frozen(self.singular_values))

    @property
    def rank_selected(self):
        return self.modes.shape[1]

    @property
    def n_dof(self):
        return self.modes.shape[0]


@dataclass(frozen=True)
class CoefficientTable:
    """Reduced coefficients, column ``i`` belonging to ``times[i]``."""

    times: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        times = _frozen(np.atleast_1d(self.times))
        coeffs = _frozen(np.atleast_2d(self.coeffs))
        if coeffs.shape[1] != times.size:
            raise ParameterError(f"{coeffs.shape[1]} coefficient columns for {times.size} times")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "coeffs", coeffs)


def numerical_rank(singular_values):
    s = np.asarray(singular_values)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > RANK_RTOL * s[0]))


def _cumulative_energy(s):
    e = np.cumsum(s**2)
    return e / e[-1]


def _svd(S):
    try:
        return la.svd(S, full_matrices=False, lapack_driver="gesdd")
    except la.LinAlgError:
        return la.svd(S, full_matrices=False, lapack_driver="gesvd")


def compute_pod(S, energy_threshold=None, rank=None):
    """POD basis of ``S`` without mean subtraction.

    Give at most one of ``energy_threshold`` and ``rank``; with neither the
    threshold defaults to 0.9999. The threshold picks the smallest ``m`` with
    ``E(m) >= energy_threshold``; a fixed rank is clamped to the numerical
    rank of ``S``.
    """
    if energy_threshold is not None and rank is not None:
        raise ParameterError("give either energy_threshold or rank, not both")
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.size == 0:
        raise ParameterError("snapshot matrix must be a non-empty 2D array")
    if not np.all(np.isfinite(S)):
        raise ParameterError("snapshot matrix contains non-finite entries")
    if not np.any(S):
        raise ParameterError("snapshot matrix is identically zero")
    if rank is not None and int(rank) <= 0:
        raise ParameterError(f"rank must be positive, got {rank}")

    U, s, _ = _svd(S)
    r = numerical_rank(s)
    energy = _cumulative_energy(s[:r])
    if rank is not None:
        n_modes = min(int(rank), r)
    else:
        thr = DEFAULT_ENERGY_THRESHOLD if energy_threshold is None else float(energy_threshold)
        if not 0 < thr <= 1:
            raise ParameterError(f"energy_threshold must lie in (0, 1], got {thr}")
        n_modes = int(np.searchsorted(energy, thr - 1e-12)) + 1
        n_modes = min(n_modes, r)
    return PodBasis(U[:, :n_modes], s, float(energy[n_modes - 1]))


def energy_curve(basis):
    """Cumulative energy ``E(m)`` for ``m = 1 .. numerical rank``."""
    s = basis.singular_values
    return _cumulative_energy(s[: numerical_rank(s)])


def project(basis, S, times=None):
    """Coefficients ``U_r^T S`` of the snapshots in ``S``."""
    S = np.asarray(S, dtype=float)
    if S.ndim == 1:
        S = S[:, None]
    if S.shape[0] != basis.n_dof:
        raise ParameterError(f"snapshots have {S.shape[0]} rows, basis has {basis.n_dof}")
    times = np.arange(S.shape[1], dtype=float) if times is None else times
    return CoefficientTable(times, basis.modes.T @ S)


def reconstruct(basis, coeffs):
    """Full-order fields ``U_r c`` from a coefficient table or array."""
    c = coeffs.coeffs if isinstance(coeffs, CoefficientTable) else np.asarray(coeffs, dtype=float)
    vector = c.ndim == 1
    c = c[:, None] if vector else c
    if c.shape[0] != basis.rank_selected:
        raise ParameterError(f"{c.shape[0]} coefficient rows, basis has {basis.rank_selected} modes")
    out = basis.modes @ c
    return out[:, 0] if vector else out
