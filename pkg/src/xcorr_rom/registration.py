"""Cross-correlation shift detection and circular-shift registration.

Lags follow the array axis order of a field, i.e. ``(row, col) == (y, x)``
in 2D. A lag ``k`` along an axis means the snapshot content sits ``k`` cells
further along that axis than the matching reference content, so
``circular_shift(snapshot, k)`` moves it back onto the reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from .errors import DegenerateCorrelationError, ParameterError
from .snapshots import SnapshotSet

__all__ = [
    "RegisteredSet",
    "cross_correlate",
    "optimal_shift",
    "circular_shift",
    "unregister",
    "register_set",
]

# Peaks within this fraction of the maximum count as ties; FFT round-off
# would otherwise decide between exactly tied lags.
_TIE_RTOL = 1e-9


def cross_correlate(f, g):
    """Full zero-padded cross-correlation of two real fields.

    ``out[k + N - 1] = sum_n f[n] * g[n + k]`` per axis, with ``g`` taken as
    zero outside its support. The output has shape ``2 * N - 1`` along every
    axis. Computed through a real FFT of padded length.
    """
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape != g.shape:
        raise ParameterError(f"shape mismatch: {f.shape} vs {g.shape}")
    if np.iscomplexobj(f) or np.iscomplexobj(g):
        raise ParameterError("cross_correlate expects real-valued fields")
    if f.size == 0:
        raise ParameterError("cannot correlate empty fields")
    f = f.astype(float, copy=False)
    g = g.astype(float, copy=False)
    n = f.shape
    axes = tuple(range(f.ndim))
    padded = tuple(sp_fft.next_fast_len(2 * s - 1, real=True) for s in n)
    prod = np.conj(sp_fft.rfftn(f, padded, axes=axes)) * sp_fft.rfftn(g, padded, axes=axes)
    circ = sp_fft.irfftn(prod, padded, axes=axes)
    # circ[k mod L] holds lag k; gather lags -(N-1)..(N-1) in order
    index = np.ix_(*[np.arange(-(s - 1), s) % L for s, L in zip(n, padded)])
    return circ[index]


def _remove_background(a, background):
    if background is None:
        return a
    if isinstance(background, str):
        if background != "mean":
            raise ParameterError(f"unknown background {background!r}")
        return a - a.mean()
    return a - float(background)


def optimal_shift(reference, snapshot, background=None):
    """Integer lag per axis that maximises the correlation with the reference.

    Parameters
    ----------
    reference, snapshot : array_like
        Fields of equal shape.
    background : float, "mean" or None
        Value subtracted from both fields before correlating. Fields sitting
        on a large uniform level (e.g. a freestream density) need this, or
        the zero-padding overlap term dominates and every lag comes out 0.

    Returns
    -------
    numpy.ndarray
        Integer lags, one per axis. Exact ties go to the smallest total
        ``|lag|``, then to the more negative lag.
    """
    reference = np.asarray(reference, dtype=float)
    snapshot = np.asarray(snapshot, dtype=float)
    if reference.shape != snapshot.shape:
        raise ParameterError(f"shape mismatch: {reference.shape} vs {snapshot.shape}")
    f = _remove_background(reference, background)
    g = _remove_background(snapshot, background)
    if not np.any(g):
        raise DegenerateCorrelationError("snapshot is identically zero")
    if not np.any(f):
        raise DegenerateCorrelationError("reference is identically zero")
    c = cross_correlate(f, g)
    peak = c.max()
    scale = np.abs(c).max()
    candidates = np.argwhere(c >= peak - _TIE_RTOL * scale)
    lags = candidates - (np.asarray(reference.shape) - 1)
    best = min(map(tuple, lags), key=lambda k: (sum(abs(v) for v in k), k))
    return np.array(best, dtype=int)


def circular_shift(field, shift):
    """Periodic shift with ``out[n] = field[(n + lag) % N]`` per axis."""
    field = np.asarray(field)
    lags = np.atleast_1d(np.asarray(shift, dtype=int))
    if lags.size != field.ndim:
        raise ParameterError(f"{lags.size} lags given for a {field.ndim}D field")
    return np.roll(field, tuple(-int(k) for k in lags), axis=tuple(range(field.ndim)))


def unregister(field, shift):
    """Undo :func:`circular_shift`: move a reference-frame field back by ``shift``."""
    return circular_shift(field, -np.atleast_1d(np.asarray(shift, dtype=int)))


@dataclass(frozen=True)
class RegisteredSet:
    """Snapshots moved into the frame of one reference snapshot.

    ``shifts[i]`` is the lag vector that registered column ``i``; the
    original time stamps are kept.
    """

    snapshots: SnapshotSet
    shifts: np.ndarray
    reference_index: int
    reference_time: float

    def __post_init__(self):
        shifts = np.array(self.shifts, dtype=int, copy=True).reshape(
            self.snapshots.n_snapshots, self.snapshots.grid.n_dims)
        shifts.flags.writeable = False
        object.__setattr__(self, "shifts", shifts)


def register_set(train, reference_index, background=None):
    """Register every column of ``train`` against column ``reference_index``."""
    n = train.n_snapshots
    if not 0 <= reference_index < n:
        raise ParameterError(f"reference_index {reference_index} out of range for {n} snapshots")
    ref = train.field(reference_index)
    registered = np.empty_like(train.data)
    shifts = np.zeros((n, train.grid.n_dims), dtype=int)
    for i in range(n):
        s = train.field(i)
        try:
            shifts[i] = optimal_shift(ref, s, background)
        except DegenerateCorrelationError as exc:
            raise DegenerateCorrelationError(
                f"column {i} (t={train.times[i]:g}): {exc}") from exc
        registered[:, i] = circular_shift(s, shifts[i]).reshape(-1)
    out = SnapshotSet(train.grid, train.times, registered, train.field_name,
                      dict(train.params))
    return RegisteredSet(out, shifts, int(reference_index), float(train.times[reference_index]))
