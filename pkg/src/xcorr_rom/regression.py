"""Regression from time to reduced coefficients and to registration shifts."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import ParameterError, RegressionError

__all__ = [
    "KERNELS",
    "RbfModel",
    "ShiftMap",
    "fit_rbf",
    "eval_rbf",
    "fit_shift_map",
    "eval_shift",
    "linear_trend",
    "round_half_away",
]


def _gaussian(r):
    return np.exp(-(r**2))


def _multiquadric(r):
    return np.sqrt(1.0 + r**2)


def _thin_plate(r):
    out = np.zeros_like(r)
    nz = r > 0
    out[nz] = r[nz] ** 2 * np.log(r[nz])
    return out


KERNELS = {"gaussian": _gaussian, "multiquadric": _multiquadric, "thin_plate": _thin_plate}

COEFF_EXTRAPOLATION = ("native", "clamp")
_COEFF_ALIASES = {"clamp_to_nearest_knot": "clamp"}
SHIFT_EXTRAPOLATION = ("last_segment_slope", "least_squares_line")


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class RbfModel:
    """Radial basis interpolant ``c(t) = sum_j w_j phi(eps |t - t_j|)``.

    ``extrapolation="clamp"`` evaluates queries outside the training interval
    at the nearest end point instead of letting the kernel sum decay.
    """

    centers: np.ndarray
    weights: np.ndarray
    kernel: str = "gaussian"
    shape_parameter: float = 1.0
    ridge: float = 0.0
    extrapolation: str = "native"

    def __post_init__(self):
        object.__setattr__(self, "centers", _frozen(self.centers))
        object.__setattr__(self, "weights", _frozen(np.atleast_2d(self.weights)))

    @property
    def n_outputs(self):
        return self.weights.shape[0]

    def __call__(self, t):
        return eval_rbf(self, t)


def _kernel_matrix(a, b, kernel, eps):
    return KERNELS[kernel](eps * np.abs(np.subtract.outer(a, b)))


def fit_rbf(times, coeffs, kernel="gaussian", shape_parameter=None, ridge=0.0,
            extrapolation="native"):
    """Interpolate coefficient trajectories with radial basis functions.

    Parameters
    ----------
    times : array_like, shape (N_train,)
        Training time stamps, all distinct.
    coeffs : array_like or CoefficientTable
        ``N_r x N_train`` matrix of values to interpolate.
    kernel : {"gaussian", "multiquadric", "thin_plate"}
    shape_parameter : float, optional
        Inverse length scale. Defaults to ``1 / mean(diff(sorted(times)))``.
    ridge : float
        Diagonal regularisation; 0 gives exact interpolation.
    extrapolation : {"native", "clamp"}
        ``"clamp_to_nearest_knot"`` is accepted for ``"clamp"``.

    Raises
    ------
    RegressionError
        On duplicate times or a kernel system that cannot be solved.
    """
    if hasattr(coeffs, "coeffs"):
        coeffs = coeffs.coeffs
    t = np.asarray(times, dtype=float).ravel()
    C = np.atleast_2d(np.asarray(coeffs, dtype=float))
    if kernel not in KERNELS:
        raise ParameterError(f"unknown kernel {kernel!r}; choose from {sorted(KERNELS)}")
    extrapolation = _COEFF_ALIASES.get(extrapolation, extrapolation)
    if extrapolation not in COEFF_EXTRAPOLATION:
        raise ParameterError(f"unknown extrapolation {extrapolation!r}")
    if C.shape[1] != t.size:
        raise ParameterError(f"{C.shape[1]} coefficient columns for {t.size} times")
    if not np.all(np.isfinite(C)):
        raise ParameterError("coefficients must be finite")
    uniq, counts = np.unique(t, return_counts=True)
    if np.any(counts > 1):
        raise RegressionError(f"duplicate training times make the kernel matrix singular: "
                              f"{uniq[counts > 1].tolist()}")
    if uniq.size < 2:
        raise RegressionError("need at least two distinct training times")
    if shape_parameter is None:
        shape_parameter = 1.0 / np.mean(np.diff(uniq))
    if not shape_parameter > 0:
        raise ParameterError(f"shape_parameter must be positive, got {shape_parameter}")

    K = _kernel_matrix(t, t, kernel, shape_parameter)
    if ridge:
        K = K + ridge * np.eye(t.size)
    try:
        # conditioning is judged by the node residual below
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", la.LinAlgWarning)
            W = la.solve(K, C.T, assume_a="sym").T
    except (la.LinAlgError, ValueError) as exc:
        raise RegressionError(f"kernel system could not be solved ({exc}); "
                              f"try a positive ridge term") from exc
    if not np.all(np.isfinite(W)):
        raise RegressionError("kernel system is numerically singular; try a positive ridge term")
    if ridge == 0:
        residual = np.abs(W @ K - C).max()
        if residual > 1e-8 * (1.0 + np.abs(C).max()):
            raise RegressionError(f"kernel system is ill-conditioned (node residual {residual:.2e}); "
                                  f"try a positive ridge term or a smaller shape parameter")
    return RbfModel(t, W, kernel, float(shape_parameter), float(ridge), extrapolation)


def eval_rbf(model, t):
    """Evaluate the interpolant.

    A scalar ``t`` gives a vector of length ``N_r``; an array of ``n`` times
    gives an ``N_r x n`` matrix.
    """
    scalar = np.ndim(t) == 0
    tq = np.atleast_1d(np.asarray(t, dtype=float))
    if model.extrapolation == "clamp":
        tq = np.clip(tq, model.centers.min(), model.centers.max())
    k = _kernel_matrix(tq, model.centers, model.kernel, model.shape_parameter)
    out = model.weights @ k.T
    return out[:, 0] if scalar else out


# -- shift map --------------------------------------------------------------------

def round_half_away(x):
    """Round to the nearest integer, ties away from zero."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def linear_trend(times, values):
    """Least-squares line through ``(times, values)`` for each value column.

    Returns ``(slope, intercept, r_squared)`` arrays with one entry per
    column. Columns with no variance get ``r_squared = 1``.
    """
    t = np.asarray(times, dtype=float).ravel()
    v = np.asarray(values, dtype=float).reshape(t.size, -1)
    A = np.column_stack([t, np.ones_like(t)])
    coef = np.linalg.lstsq(A, v, rcond=None)[0]
    fit = A @ coef
    ss_res = np.sum((v - fit) ** 2, axis=0)
    ss_tot = np.sum((v - v.mean(axis=0)) ** 2, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(ss_tot > 0, 1.0 - ss_res / ss_tot, 1.0)
    return coef[0], coef[1], r2


@dataclass(frozen=True)
class ShiftMap:
    """Piecewise-linear map from time to real-valued lags.

    Outside the knots the map follows ``extrapolation``: the slope of the
    nearest end segment, or a least-squares line through all knots.
    ``axis_sizes`` (in lag order) bounds rounded lags to ``|lag| <= N - 1``.
    """

    knots: np.ndarray
    values: np.ndarray
    extrapolation: str = "last_segment_slope"
    axis_sizes: tuple | None = None

    def __post_init__(self):
        knots = _frozen(np.asarray(self.knots).ravel())
        values = _frozen(np.asarray(self.values, dtype=float).reshape(knots.size, -1))
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        if self.axis_sizes is not None:
            object.__setattr__(self, "axis_sizes", tuple(int(n) for n in self.axis_sizes))

    @property
    def n_axes(self):
        return self.values.shape[1]

    def evaluate(self, t):
        """Real-valued lags at ``t`` (shape ``(n_axes,)`` or ``(len(t), n_axes)``)."""
        scalar = np.ndim(t) == 0
        tq = np.atleast_1d(np.asarray(t, dtype=float))
        k, v = self.knots, self.values
        out = np.empty((tq.size, self.n_axes))
        for a in range(self.n_axes):
            out[:, a] = np.interp(tq, k, v[:, a])
        lo, hi = tq < k[0], tq > k[-1]
        if self.extrapolation == "least_squares_line":
            slope, icept, _ = linear_trend(k, v)
            line = np.outer(tq, slope) + icept
            out[lo] = line[lo]
            out[hi] = line[hi]
        else:
            s_lo = (v[1] - v[0]) / (k[1] - k[0])
            s_hi = (v[-1] - v[-2]) / (k[-1] - k[-2])
            out[lo] = v[0] + np.outer(tq[lo] - k[0], s_lo)
            out[hi] = v[-1] + np.outer(tq[hi] - k[-1], s_hi)
        return out[0] if scalar else out

    def __call__(self, t):
        return eval_shift(self, t)


def fit_shift_map(times, shifts, extrapolation="last_segment_slope", axis_sizes=None):
    """Build the time-to-shift map from training lags."""
    t = np.asarray(times, dtype=float).ravel()
    if extrapolation not in SHIFT_EXTRAPOLATION:
        raise ParameterError(f"unknown extrapolation {extrapolation!r}")
    if t.size < 2:
        raise RegressionError(f"a shift map needs at least 2 knots, got {t.size}")
    if not np.all(np.diff(t) > 0):
        raise RegressionError("shift-map knots must be strictly increasing")
    values = np.asarray(shifts, dtype=float).reshape(t.size, -1)
    return ShiftMap(t, values, extrapolation, axis_sizes)


def eval_shift(shift_map, t):
    """Integer lags at ``t``: rounded half away from zero, then clamped."""
    lags = round_half_away(shift_map.evaluate(t))
    if shift_map.axis_sizes is not None:
        limit = np.asarray(shift_map.axis_sizes) - 1
        lags = np.clip(lags, -limit, limit)
    return lags.astype(int)
