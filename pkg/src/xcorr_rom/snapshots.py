"""Grids, snapshot containers and the two analytic benchmark datasets.

Two-dimensional fields are stored row-major: a field on a grid with
``sizes == (nx, ny)`` has array shape ``(ny, nx)`` and is flattened with
``x`` varying fastest.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import GridMismatchError, ParameterError

__all__ = [
    "Grid",
    "SnapshotSet",
    "WaveParams",
    "VortexParams",
    "gaussian_wave",
    "vortex_state",
    "generate_wave",
    "generate_vortex",
    "split",
    "VORTEX_FIELDS",
]


def _readonly(a):
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid:
    """Node-centred Cartesian grid in one or two dimensions.

    Parameters
    ----------
    sizes
        Node count per axis, ``(nx,)`` or ``(nx, ny)``.
    origin, extent
        Lower and upper coordinate per axis. Both endpoints are grid nodes.
    """

    sizes: tuple
    origin: tuple
    extent: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        origin = tuple(float(o) for o in self.origin)
        extent = tuple(float(e) for e in self.extent)
        if len(sizes) not in (1, 2):
            raise ParameterError(f"grid must be 1D or 2D, got {len(sizes)} axes")
        if not (len(sizes) == len(origin) == len(extent)):
            raise ParameterError("sizes, origin and extent must have one entry per axis")
        for a, (n, lo, hi) in enumerate(zip(sizes, origin, extent)):
            if n < 2:
                raise ParameterError(f"axis {a}: need at least 2 nodes, got {n}")
            if not hi > lo:
                raise ParameterError(f"axis {a}: extent {hi} must exceed origin {lo}")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "extent", extent)

    @property
    def n_dims(self):
        return len(self.sizes)

    @property
    def n_points(self):
        return math.prod(self.sizes)

    @property
    def spacing(self):
        return tuple((hi - lo) / (n - 1) for n, lo, hi in zip(self.sizes, self.origin, self.extent))

    @property
    def shape(self):
        """Array shape of one field (axes reversed: ``(ny, nx)`` in 2D)."""
        return tuple(reversed(self.sizes))

    def axis(self, a):
        """Node coordinates along axis ``a`` (0 is x, 1 is y)."""
        return np.linspace(self.origin[a], self.extent[a], self.sizes[a])

    def mesh(self):
        """Coordinate arrays shaped like a field, ordered ``(x[, y])``."""
        if self.n_dims == 1:
            return (self.axis(0),)
        return tuple(np.meshgrid(self.axis(0), self.axis(1), indexing="xy"))

    def nearest_node(self, point):
        """Array index (in field axis order) of the node closest to ``point``.

        Ties go to the lower index.
        """
        idx = []
        for a, p in enumerate(np.atleast_1d(point)):
            d = np.abs(self.axis(a) - p)
            idx.append(int(np.argmin(d)))
        return tuple(reversed(idx))


@dataclass(frozen=True)
class SnapshotSet:
    """Time-ordered snapshot matrix on a grid.

    ``data[:, i]`` is the flattened field at ``times[i]``. Arrays are copied
    and marked read-only on construction.
    """

    grid: Grid
    times: np.ndarray
    data: np.ndarray
    field_name: str = "field"
    params: dict = dc_field(default_factory=dict, compare=False)

    def __post_init__(self):
        times = _readonly(np.atleast_1d(self.times))
        data = _readonly(self.data)
        if data.ndim == 1:
            data = _readonly(data[:, None])
        if times.ndim != 1:
            raise ParameterError("times must be a vector")
        if data.ndim != 2:
            raise ParameterError("data must be a N_h x N_T matrix")
        if data.shape[0] != self.grid.n_points:
            raise ParameterError(
                f"data has {data.shape[0]} rows but the grid has {self.grid.n_points} points"
            )
        if data.shape[1] != times.size:
            raise ParameterError(f"{data.shape[1]} snapshots but {times.size} time stamps")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ParameterError("time stamps must be strictly increasing")
        if not (np.all(np.isfinite(data)) and np.all(np.isfinite(times))):
            raise ParameterError("snapshot data and times must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "data", data)

    @property
    def n_snapshots(self):
        return self.times.size

    def __len__(self):
        return self.n_snapshots

    def field(self, i):
        """Snapshot ``i`` reshaped to the grid."""
        return self.data[:, i].reshape(self.grid.shape)

    def fields(self):
        """All snapshots as an array of shape ``(N_T, *grid.shape)``."""
        return self.data.T.reshape((self.n_snapshots,) + self.grid.shape)

    def columns(self, index):
        """Sub-set holding the selected columns (slice or index array)."""
        return SnapshotSet(self.grid, self.times[index], self.data[:, index],
                           self.field_name, dict(self.params))

    def check_grid(self, other):
        if other.grid != self.grid:
            raise GridMismatchError(f"grid mismatch: {self.grid} vs {other.grid}")


# -- 1D travelling Gaussian ---------------------------------------------------

@dataclass(frozen=True)
class WaveParams:
    """Travelling Gaussian ``beta * exp(-(x - t)**2 / (2 sigma**2))``.

    The time stamp doubles as the wave centre. ``sigma`` defaults to 0.1;
    wider pulses lose too much mass through the domain ends, which biases
    the detected shifts of the early and late snapshots.
    """

    beta: float = 1.0
    sigma: float = 0.1
    x_range: tuple = (0.0, 10.25)
    t_range: tuple = (0.0, 10.25)
    n_nodes: int = 256
    n_times: int = 100

    def validate(self):
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if self.beta == 0 or not math.isfinite(self.beta):
            raise ParameterError(f"beta must be finite and non-zero, got {self.beta}")
        if self.n_nodes < 2:
            raise ParameterError("n_nodes must be at least 2")
        if self.n_times < 1:
            raise ParameterError("n_times must be at least 1")
        if not self.x_range[1] > self.x_range[0]:
            raise ParameterError("x_range must be increasing")
        if self.n_times > 1 and not self.t_range[1] > self.t_range[0]:
            raise ParameterError("t_range must be increasing")


def gaussian_wave(x, t, beta=1.0, sigma=0.1):
    """Evaluate the travelling Gaussian at positions ``x`` and time ``t``."""
    x = np.asarray(x, dtype=float)
    return beta * np.exp(-((x - t) ** 2) / (2.0 * sigma**2))


def generate_wave(params=None):
    """Snapshot set of the travelling Gaussian on an equidistant grid.

    Times are ``n_times`` equidistant values spanning ``t_range`` inclusive.
    """
    params = WaveParams() if params is None else params
    params.validate()
    grid = Grid((params.n_nodes,), (params.x_range[0],), (params.x_range[1],))
    x = grid.axis(0)
    times = np.linspace(params.t_range[0], params.t_range[1], params.n_times)
    data = gaussian_wave(x[:, None], times[None, :], params.beta, params.sigma)
    meta = {"case": "gaussian_wave", "beta": params.beta, "sigma": params.sigma,
            "x_range": list(params.x_range), "t_range": list(params.t_range),
            "n_nodes": params.n_nodes, "n_times": params.n_times}
    return SnapshotSet(grid, times, data, "amplitude", meta)


# -- 2D isentropic convective vortex --------------------------------------------

VORTEX_FIELDS = ("density", "pressure", "x_velocity", "y_velocity",
                 "x_momentum", "y_momentum", "energy")


@dataclass(frozen=True)
class VortexParams:
    """Isentropic vortex convected by a uniform freestream.

    ``freestream`` is ``(rho_inf, u_inf, v_inf, p_inf)``. The vortex profile
    itself does not scale with ``rho_inf``/``p_inf``; the freestream density
    matters downstream as the registration background.
    """

    gamma: float = 1.4
    b: float = 0.5
    center: tuple = (5.0, 10.0)
    freestream: tuple = (1.0, 0.1, 0.0, 1.0)
    x_range: tuple = (0.0, 40.0)
    y_range: tuple = (0.0, 20.0)
    sizes: tuple = (240, 120)
    snapshot_interval: float = 0.625
    n_times: int = 100
    times: tuple | None = None

    def validate(self):
        if not self.gamma > 1:
            raise ParameterError(f"gamma must exceed 1, got {self.gamma}")
        if not self.b > 0:
            raise ParameterError(f"vortex strength must be positive, got {self.b}")
        if len(self.sizes) != 2 or min(self.sizes) < 2:
            raise ParameterError(f"need two axis sizes >= 2, got {self.sizes}")
        if len(self.freestream) != 4:
            raise ParameterError("freestream is (rho_inf, u_inf, v_inf, p_inf)")
        if self.times is None and (self.n_times < 1 or not self.snapshot_interval > 0):
            raise ParameterError("need n_times >= 1 and a positive snapshot interval")
        amp = (self.gamma - 1) * self.b**2 * math.e / (8 * self.gamma * math.pi**2)
        if amp >= 1:
            raise ParameterError("vortex too strong: density becomes non-positive at the core")

    def snapshot_times(self):
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        return self.snapshot_interval * np.arange(1, self.n_times + 1)

    def center_at(self, t):
        _, u_inf, v_inf, _ = self.freestream
        return (self.center[0] + u_inf * t, self.center[1] + v_inf * t)


def vortex_state(x, y, xc, yc, params):
    """Primitive and conserved variables of the vortex centred at ``(xc, yc)``.

    Returns a dict keyed by the names in :data:`VORTEX_FIELDS`.
    """
    g, b = params.gamma, params.b
    _, u_inf, v_inf, _ = params.freestream
    dx = x - xc
    dy = y - yc
    r2 = dx**2 + dy**2
    rho = (1.0 - (g - 1) * b**2 / (8 * g * np.pi**2) * np.exp(1.0 - r2)) ** (1.0 / (g - 1))
    swirl = b / (2 * np.pi) * np.exp(0.5 * (1.0 - r2))
    u = u_inf - swirl * dy
    v = v_inf + swirl * dx
    p = rho**g
    return {
        "density": rho,
        "pressure": p,
        "x_velocity": u,
        "y_velocity": v,
        "x_momentum": rho * u,
        "y_momentum": rho * v,
        "energy": p / (g - 1) + 0.5 * rho * (u**2 + v**2),
    }


def generate_vortex(params=None, field="density"):
    """Snapshots of the vortex advected exactly with the freestream.

    The inviscid vortex translates rigidly, so snapshot ``k`` is the initial
    profile with its centre moved to ``center + (u_inf, v_inf) * t_k``.
    """
    params = VortexParams() if params is None else params
    params.validate()
    if field not in VORTEX_FIELDS:
        raise ParameterError(f"unknown vortex field {field!r}; choose from {VORTEX_FIELDS}")
    grid = Grid(params.sizes, (params.x_range[0], params.y_range[0]),
                (params.x_range[1], params.y_range[1]))
    X, Y = grid.mesh()
    times = params.snapshot_times()
    data = np.empty((grid.n_points, times.size))
    outside = []
    for k, t in enumerate(times):
        xc, yc = params.center_at(t)
        if not (grid.origin[0] <= xc <= grid.extent[0] and grid.origin[1] <= yc <= grid.extent[1]):
            outside.append(float(t))
        data[:, k] = vortex_state(X, Y, xc, yc, params)[field].ravel()
    if outside:
        warnings.warn(f"vortex centre lies outside the domain at {len(outside)} "
                      f"snapshot(s), first at t={outside[0]}", RuntimeWarning, stacklevel=2)
    meta = {"case": "isentropic_vortex", "gamma": params.gamma, "b": params.b,
            "center": list(params.center), "freestream": list(params.freestream),
            "x_range": list(params.x_range), "y_range": list(params.y_range),
            "sizes": list(params.sizes), "times": [float(t) for t in times]}
    return SnapshotSet(grid, times, data, field, meta)


def split(snapshots, train_fraction):
    """Chronological train/test split.

    The first ``floor(train_fraction * N_T)`` columns form the training set.

    Raises
    ------
    ParameterError
        If the fraction is outside (0, 1) or yields fewer than two training
        snapshots.
    """
    if not 0 < train_fraction < 1:
        raise ParameterError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = snapshots.n_snapshots
    # guard against 0.3 * 100 == 29.999...
    n_train = int(math.floor(train_fraction * n + 1e-9))
    if n_train < 2:
        raise ParameterError(
            f"train_fraction={train_fraction} leaves {n_train} training snapshot(s) "
            f"out of {n}; at least 2 are required")
    return snapshots.columns(slice(0, n_train)), snapshots.columns(slice(n_train, n))
