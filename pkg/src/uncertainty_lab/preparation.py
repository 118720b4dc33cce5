"""Preparations (S, rho): Gaussian families, superpositions, bipartite products, wave functions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .grid import Grid1D, Grid2D

BOUNDARY_EPS = 1e-10
PHASE_FLOOR = 1e-12
NORM_TOL = 1e-6


class PreparationError(ValueError):
    pass


class PhaseUndefinedError(PreparationError):
    pass


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def _validate_density(rho: np.ndarray, total: float, edges: Sequence[np.ndarray]):
    if not np.all(np.isfinite(rho)):
        raise PreparationError("rho has non-finite values")
    if np.any(rho < 0):
        raise PreparationError("rho must be nonnegative")
    if abs(total - 1.0) > NORM_TOL:
        raise PreparationError(f"rho is not normalized (integral {total:.12g})")
    limit = BOUNDARY_EPS * rho.max()
    if any(np.any(e > limit) for e in edges):
        raise PreparationError("boundary decay violated")


@dataclass(frozen=True)
class Preparation:
    grid: Grid1D
    S: np.ndarray
    rho: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "S", _frozen(self.S))
        object.__setattr__(self, "rho", _frozen(self.rho))
        if self.S.shape != (self.grid.n,) or self.rho.shape != (self.grid.n,):
            raise PreparationError("S and rho must be sampled on the grid")
        if not np.all(np.isfinite(self.S)):
            raise PreparationError("S has non-finite values")
        if not self.hbar > 0:
            raise PreparationError("hbar must be positive")
        _validate_density(self.rho, self.grid.integrate(self.rho), [self.rho[:1], self.rho[-1:]])

    @property
    def support(self) -> np.ndarray:
        """Nodes where rho exceeds the phase floor; everything else contributes zero."""
        return self.rho > PHASE_FLOOR * self.rho.max()

    def normalized(self) -> "Preparation":
        return Preparation(self.grid, self.S, self.rho / self.grid.integrate(self.rho), self.hbar)


@dataclass(frozen=True)
class GaussianSpec:
    q0: float = 0.0
    sigma: float = 1.0
    p0: float = 0.0
    c: float = 0.0  # chirp

    def __post_init__(self):
        if not self.sigma > 0:
            raise PreparationError("sigma must be positive")

    def rho(self, q):
        return np.exp(-((q - self.q0) ** 2) / (2 * self.sigma**2)) / np.sqrt(2 * np.pi * self.sigma**2)

    def phase(self, q):
        d = q - self.q0
        return self.p0 * d + 0.5 * self.c * d**2


def build_gaussian(spec: GaussianSpec, grid: Grid1D, hbar: float = 1.0) -> Preparation:
    q = grid.nodes
    rho = spec.rho(q)
    return Preparation(grid, spec.phase(q), rho / grid.integrate(rho), hbar)


def build_superposition(specs: Sequence[tuple[complex, GaussianSpec]], grid: Grid1D,
                        hbar: float = 1.0) -> Preparation:
    if not specs:
        raise PreparationError("empty superposition")
    q = grid.nodes
    psi = np.zeros(grid.n, dtype=complex)
    for w, spec in specs:
        if w == 0:
            raise PreparationError("superposition weights must be nonzero")
        psi += w * np.sqrt(spec.rho(q)) * np.exp(1j * spec.phase(q) / hbar)
    rho = np.abs(psi) ** 2
    on = np.flatnonzero(rho > PHASE_FLOOR * rho.max())
    if np.any(rho[on[0]:on[-1] + 1] <= PHASE_FLOOR * rho.max()):
        raise PhaseUndefinedError("phase undefined region")
    theta = np.angle(psi)
    unwrapped = np.unwrap(theta)
    # pick the branch that agrees with the principal value at the density peak
    k = int(np.argmax(rho))
    unwrapped -= 2 * np.pi * np.round((unwrapped[k] - theta[k]) / (2 * np.pi))
    S = hbar * unwrapped
    return Preparation(grid, S, rho / grid.integrate(rho), hbar)


@dataclass(frozen=True)
class WaveFunction:
    grid: Grid1D
    re: np.ndarray
    im: np.ndarray

    @property
    def density(self) -> np.ndarray:
        return self.re**2 + self.im**2


def wave_function(prep: Preparation) -> WaveFunction:
    amp = np.sqrt(prep.rho)
    theta = prep.S / prep.hbar
    return WaveFunction(prep.grid, _frozen(amp * np.cos(theta)), _frozen(amp * np.sin(theta)))


@dataclass(frozen=True)
class BipartitePreparation:
    grid: Grid2D
    S: np.ndarray
    rho: np.ndarray
    hbar: float = 1.0
    product_tag: bool = False
    parts: Optional[tuple[Preparation, Preparation]] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "S", _frozen(self.S))
        object.__setattr__(self, "rho", _frozen(self.rho))
        if self.S.shape != self.grid.shape or self.rho.shape != self.grid.shape:
            raise PreparationError("S and rho must be sampled on the 2D grid")
        if self.product_tag and self.parts is None:
            raise PreparationError("product-tagged preparation needs its factors")
        r = self.rho
        _validate_density(r, self.grid.integrate(r), [r[0], r[-1], r[:, 0], r[:, -1]])

    @property
    def support(self) -> np.ndarray:
        return self.rho > PHASE_FLOOR * self.rho.max()


def build_product(prep1: Preparation, prep2: Preparation) -> BipartitePreparation:
    if prep1.hbar != prep2.hbar:
        raise PreparationError("mismatched hbar")
    S = prep1.S[:, None] + prep2.S[None, :]
    rho = prep1.rho[:, None] * prep2.rho[None, :]
    return BipartitePreparation(Grid2D(prep1.grid, prep2.grid), S, rho, prep1.hbar,
                                product_tag=True, parts=(prep1, prep2))


# -- import/export ----------------------------------------------------------

FORMAT = "preparation-1d/1"

def _num(x: float) -> str:
    return format(float(x), ".17g")


def dumps_preparation(prep: Preparation) -> str:
    g = prep.grid
    lines = [
        "{",
        f'  "format": "{FORMAT}",',
        f'  "q_min": {_num(g.q_min)},',
        f'  "q_max": {_num(g.q_max)},',
        f'  "n": {g.n},',
        f'  "hbar": {_num(prep.hbar)},',
        '  "S": [' + ", ".join(_num(v) for v in prep.S) + "],",
        '  "rho": [' + ", ".join(_num(v) for v in prep.rho) + "]",
        "}",
    ]
    return "\n".join(lines) + "\n"


def loads_preparation(text: str) -> Preparation:
    try:
        doc = json.loads(text)
        if doc.get("format") != FORMAT:
            raise PreparationError(f"unsupported preparation format {doc.get('format')!r}")
        grid = Grid1D(float(doc["q_min"]), float(doc["q_max"]), int(doc["n"]))
        return Preparation(grid, doc["S"], doc["rho"], float(doc["hbar"]))
    except (KeyError, TypeError, AttributeError, json.JSONDecodeError) as exc:
        raise PreparationError(f"malformed preparation document: {exc}") from exc


def save_preparation(prep: Preparation, path) -> None:
    Path(path).write_text(dumps_preparation(prep))


def load_preparation(path) -> Preparation:
    return loads_preparation(Path(path).read_text())
