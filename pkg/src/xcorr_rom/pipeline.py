"""Offline/online reduced-order model on registered snapshots.

Offline: register the training snapshots, compute a POD basis of the
registered matrix, interpolate the reduced coefficients in time and fit a
time-to-shift map. Online: evaluate the coefficients at a new time, expand
in the basis, then shift the field back into the physical frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, ParameterError, RomError, StageError
from .reduction import CoefficientTable, PodBasis, compute_pod, project
from .regression import RbfModel, ShiftMap, eval_rbf, eval_shift, fit_rbf, fit_shift_map
from .registration import register_set, unregister
from .snapshots import Grid

__all__ = [
    "RomModel",
    "ErrorReport",
    "default_reference_index",
    "offline",
    "predict",
    "predict_reference_frame",
    "evaluate",
    "rank_sweep",
    "DEFAULT_SWEEP_RANKS",
]

DEFAULT_SWEEP_RANKS = (1, 2, 5, 10, 15, 20, 25)


@dataclass(frozen=True)
class RomModel:
    """Everything needed to predict a snapshot at a new time.

    ``coefficients`` and ``shifts`` keep the training data the regressors
    were fitted on, so the model can be persisted and refitted exactly.
    """

    basis: PodBasis
    coeff_model: RbfModel
    shift_map: ShiftMap
    grid: Grid
    reference_index: int
    reference_time: float
    registration_enabled: bool
    coefficients: CoefficientTable
    shifts: np.ndarray
    background: float | str | None = None
    field_name: str = "field"

    def __post_init__(self):
        if self.basis.n_dof != self.grid.n_points:
            raise ParameterError(f"basis has {self.basis.n_dof} rows, grid has {self.grid.n_points} points")
        if not self.registration_enabled and np.any(self.shift_map.values):
            raise ParameterError("an unregistered model must carry a zero shift map")

    @property
    def rank(self):
        return self.basis.rank_selected

    @property
    def train_times(self):
        return self.coefficients.times


@dataclass(frozen=True)
class ErrorReport:
    """Relative L2 error of each predicted snapshot."""

    times: np.ndarray
    relative_l2: np.ndarray
    set_label: str = "test"

    @property
    def mean_relative_l2(self):
        return float(np.mean(self.relative_l2))

    @property
    def per_time(self):
        return [{"time": float(t), "relative_l2": float(e)}
                for t, e in zip(self.times, self.relative_l2)]


def default_reference_index(times, reference_time=None, fraction=0.3):
    """Index of the training time nearest ``reference_time``.

    Without an explicit time the target is ``fraction`` of the way through the
    training span. Ties go to the earlier snapshot.
    """
    times = np.asarray(times, dtype=float)
    if reference_time is None:
        reference_time = times[0] + fraction * (times[-1] - times[0])
    return int(np.argmin(np.abs(times - reference_time)))


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except RomError as exc:
        raise StageError(name, exc) from exc


def offline(train, reference_index=None, *, energy_threshold=None, rank=None,
            register=True, background=None, kernel="gaussian", shape_parameter=None,
            ridge=0.0, coeff_extrapolation="clamp",
            shift_extrapolation="least_squares_line"):
    """Build a ROM from training snapshots.

    Parameters
    ----------
    train : SnapshotSet
    reference_index : int, optional
        Reference column for registration; see :func:`default_reference_index`.
    energy_threshold, rank
        Mode selection passed to :func:`compute_pod`.
    register : bool
        With ``False`` the POD runs on the raw snapshots and the shift map is
        identically zero.
    background
        Level removed before correlating, see :func:`optimal_shift`.
    kernel, shape_parameter, ridge, coeff_extrapolation
        Coefficient interpolant settings, see :func:`fit_rbf`.
    shift_extrapolation
        Rule for shifts beyond the training interval. A least-squares line
        is the default because end-segment slopes of integer lags are off by
        up to one cell per step.
    """
    if reference_index is None:
        reference_index = default_reference_index(train.times)
    if not 0 <= reference_index < train.n_snapshots:
        raise ParameterError(f"reference_index {reference_index} out of range")
    if register:
        reg = _stage("registration", register_set, train, reference_index, background)
        S, shifts = reg.snapshots.data, reg.shifts
    else:
        S = train.data
        shifts = np.zeros((train.n_snapshots, train.grid.n_dims), dtype=int)
    basis = _stage("reduction", compute_pod, S, energy_threshold=energy_threshold, rank=rank)
    coeffs = _stage("reduction", project, basis, S, train.times)
    coeff_model = _stage("regression", fit_rbf, train.times, coeffs, kernel=kernel,
                         shape_parameter=shape_parameter, ridge=ridge,
                         extrapolation=coeff_extrapolation)
    shift_map = _stage("regression", fit_shift_map, train.times, shifts,
                       extrapolation=shift_extrapolation, axis_sizes=train.grid.shape)
    return RomModel(basis, coeff_model, shift_map, train.grid, int(reference_index),
                    float(train.times[reference_index]), bool(register), coeffs,
                    np.asarray(shifts), background, train.field_name)


def predict_reference_frame(model, t):
    """ROM output before the shift back: ``modes @ c(t)``."""
    return model.basis.modes @ eval_rbf(model.coeff_model, t)


def predict(model, t):
    """Predicted flat field at ``t`` (or ``N_h x n`` matrix for ``n`` times)."""
    scalar = np.ndim(t) == 0
    tq = np.atleast_1d(np.asarray(t, dtype=float))
    fields = predict_reference_frame(model, tq)
    if model.registration_enabled:
        lags = eval_shift(model.shift_map, tq)
        shape = model.grid.shape
        for j in range(tq.size):
            fields[:, j] = unregister(fields[:, j].reshape(shape), lags[j]).reshape(-1)
    return fields[:, 0] if scalar else fields


def evaluate(model, truth, set_label="test"):
    """Relative L2 error of the ROM against ground-truth snapshots."""
    if truth.grid != model.grid:
        raise GridMismatchError(f"truth grid {truth.grid.sizes} does not match "
                                f"model grid {model.grid.sizes}")
    norms = np.linalg.norm(truth.data, axis=0)
    if np.any(norms == 0):
        bad = truth.times[norms == 0].tolist()
        raise ParameterError(f"relative error undefined for zero-norm truth at t={bad}")
    pred = predict(model, truth.times)
    err = np.linalg.norm(pred - truth.data, axis=0) / norms
    return ErrorReport(truth.times.copy(), err, set_label)


def rank_sweep(train, test, ranks=DEFAULT_SWEEP_RANKS, register=True, **options):
    """Mean test error of ROMs rebuilt at each fixed rank.

    ``options`` are forwarded to :func:`offline`. Returns a list of
    ``(rank, mean_relative_l2)`` pairs.
    """
    limit = min(train.grid.n_points, train.n_snapshots)
    rows = []
    for r in ranks:
        r = int(r)
        if not 1 <= r <= limit:
            raise ParameterError(f"rank {r} outside 1..{limit} for this training set")
        model = offline(train, rank=r, register=register, **options)
        rows.append((r, evaluate(model, test).mean_relative_l2))
    return rows
