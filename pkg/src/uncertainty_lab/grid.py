"""Uniform 1D/2D grids: fourth-order finite differences and composite Simpson quadrature."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

MIN_NODES = 16
STENCIL_WIDTH = 5

# One-sided 4th-order stencils in units of 1/(12 h), applied to f[1:5] - f[0] so that
# constants differentiate to exactly zero.
_FORWARD_0 = np.array([48.0, -36.0, 16.0, -3.0])
_FORWARD_1 = np.array([-10.0, 18.0, -6.0, 1.0])


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid1D:
    q_min: float
    q_max: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < MIN_NODES:
            raise GridError(f"grid needs at least {MIN_NODES} nodes, got {self.n}")
        if not (np.isfinite(self.q_min) and np.isfinite(self.q_max)) or self.q_max <= self.q_min:
            raise GridError(f"invalid bounds [{self.q_min}, {self.q_max}]")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.q_max - self.q_min) / (self.n - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        q = self.q_min + self.h * np.arange(self.n)
        q.flags.writeable = False
        return q

    @cached_property
    def weights(self) -> np.ndarray:
        w = simpson_weights(self.n, self.h)
        w.flags.writeable = False
        return w

    def derivative(self, values: np.ndarray, axis: int = -1) -> np.ndarray:
        return d_dq(values, self.h, axis=axis)

    def integrate(self, values: np.ndarray) -> float:
        values = np.asarray(values)
        _check_finite(values)
        return float(np.dot(self.weights, values))


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights; with an odd number of intervals the last one is trapezoidal."""
    w = np.zeros(n)
    m = n - 1 if (n - 1) % 2 == 0 else n - 2  # last node covered by Simpson
    w[0:m + 1:2] = 2.0
    w[1:m:2] = 4.0
    w[0] = w[m] = 1.0
    w *= h / 3.0
    if m != n - 1:
        w[m] += h / 2.0
        w[n - 1] += h / 2.0
    return w


def d_dq(values: np.ndarray, h: float, axis: int = -1) -> np.ndarray:
    """Fourth-order derivative along ``axis``: central in the interior, one-sided at the edges."""
    f = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
    n = f.shape[-1]
    if n < STENCIL_WIDTH:
        raise GridError("grid too coarse")
    _check_finite(f)
    out = np.empty_like(f)
    out[..., 2:-2] = (8.0 * (f[..., 3:-1] - f[..., 1:-3]) - (f[..., 4:] - f[..., :-4])) / 12.0
    head = f[..., 1:5] - f[..., :1]
    tail = f[..., -2:-6:-1] - f[..., -1:]
    out[..., 0] = head @ _FORWARD_0 / 12.0
    out[..., 1] = head @ _FORWARD_1 / 12.0
    # mirrored stencils pick up a sign flip
    out[..., -1] = -(tail @ _FORWARD_0) / 12.0
    out[..., -2] = -(tail @ _FORWARD_1) / 12.0
    return np.moveaxis(out / h, -1, axis)


def _check_finite(values):
    if not np.all(np.isfinite(values)):
        raise GridError("field has non-finite values")


@dataclass(frozen=True)
class Field1D:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise GridError(f"expected {self.grid.n} values, got shape {v.shape}")
        _check_finite(v)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid1D, fn) -> "Field1D":
        return cls(grid, fn(grid.nodes))


def derivative(f: Field1D) -> Field1D:
    return Field1D(f.grid, f.grid.derivative(f.values))


def integrate(f: Field1D) -> float:
    return f.grid.integrate(f.values)


@dataclass(frozen=True)
class Grid2D:
    axis1: Grid1D
    axis2: Grid1D

    @property
    def shape(self) -> tuple[int, int]:
        return (self.axis1.n, self.axis2.n)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis1.nodes, self.axis2.nodes, indexing="ij")

    def axis(self, j: int) -> Grid1D:
        if j not in (1, 2):
            raise GridError(f"axis must be 1 or 2, got {j}")
        return self.axis1 if j == 1 else self.axis2

    def partial(self, values: np.ndarray, j: int) -> np.ndarray:
        return d_dq(values, self.axis(j).h, axis=j - 1)

    def integrate(self, values: np.ndarray) -> float:
        values = np.asarray(values)
        _check_finite(values)
        return float(self.axis1.weights @ values @ self.axis2.weights)


@dataclass(frozen=True)
class Field2D:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridError(f"expected shape {self.grid.shape}, got {v.shape}")
        _check_finite(v)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def partial_derivative(f: Field2D, axis: int) -> Field2D:
    return Field2D(f.grid, f.grid.partial(f.values, axis))


def integrate2d(f: Field2D) -> float:
    return f.grid.integrate(f.values)
