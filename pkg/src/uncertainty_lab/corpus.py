"""Fixed corpus of test preparations: Gaussians, chirped Gaussians, cats, skewed mixtures."""

from __future__ import annotations

from .grid import Grid1D
from .preparation import (BipartitePreparation, GaussianSpec, Preparation, build_gaussian,
                          build_product, build_superposition)

G = GaussianSpec

# node spacing 3/256; every corpus state decays below 1e-10 of its peak at +-12
CORPUS_GRID = Grid1D(-12.0, 12.0, 2049)
# node spacing 1/32, with nodes on every integer
PRODUCT_GRID = Grid1D(-12.0, 12.0, 769)

GAUSSIANS = {
    "gauss-unit": G(0.0, 1.0),
    "gauss-narrow-boosted": G(1.5, 0.5, p0=2.0),
    "gauss-wide-boosted": G(-1.0, 1.5, p0=-1.0),
}
CHIRPED = {
    "chirp-unit": G(0.0, 1.0, c=2.0),
    "chirp-boosted": G(0.5, 0.7, p0=1.0, c=-1.5),
    "chirp-wide": G(-1.0, 1.2, c=0.8),
}
CATS = {
    "cat-symmetric": [(1.0, G(-3.0, 1.0)), (1.0, G(3.0, 1.0))],
    "cat-chirped": [(1.0, G(-2.5, 0.8, c=0.5)), (1.0, G(2.5, 0.8, c=0.5))],
    "cat-quadrature": [(1.0, G(-3.0, 1.0)), (1j, G(3.0, 1.0))],
}
MIXTURES = {
    "skew-two": [(1.0, G(-1.0, 1.0)), (0.6, G(1.5, 0.5))],
    "skew-boosted": [(0.8, G(0.0, 0.7, p0=1.0)), (0.5, G(2.0, 1.2, p0=1.0))],
    "skew-three": [(1.0, G(-2.0, 1.2)), (0.5, G(1.0, 0.4)), (0.3, G(3.0, 0.6))],
}


def corpus(grid: Grid1D = CORPUS_GRID, hbar: float = 1.0) -> dict[str, Preparation]:
    """The twelve single-system preparations, keyed by name."""
    out = {}
    for name, spec in {**GAUSSIANS, **CHIRPED}.items():
        out[name] = build_gaussian(spec, grid, hbar)
    for name, specs in {**CATS, **MIXTURES}.items():
        out[name] = build_superposition(specs, grid, hbar)
    return out


def family(name: str) -> str:
    for fam, members in (("gaussian", GAUSSIANS), ("chirped", CHIRPED), ("cat", CATS),
                         ("mixture", MIXTURES)):
        if name in members:
            return fam
    raise KeyError(name)


PRODUCT_PAIRS = [
    ("gauss-unit", "gauss-unit"),
    ("chirp-unit", "cat-symmetric"),
    ("skew-two", "gauss-narrow-boosted"),
    ("cat-quadrature", "skew-three"),
    ("chirp-boosted", "skew-boosted"),
]


def product_corpus(grid: Grid1D = PRODUCT_GRID, hbar: float = 1.0) -> dict[str, BipartitePreparation]:
    singles = corpus(grid, hbar)
    return {f"{a}*{b}": build_product(singles[a], singles[b]) for a, b in PRODUCT_PAIRS}


CLASSICAL_MOMENTA = (3.0, -5.0)


def classical_fixture(grid: Grid1D = PRODUCT_GRID, hbar: float = 1.0) -> BipartitePreparation:
    """Product of two linear-phase Gaussians; a sensible estimator map must return their slopes."""
    p1, p2 = CLASSICAL_MOMENTA
    return build_product(build_gaussian(G(0.0, 1.0, p0=p1), grid, hbar),
                         build_gaussian(G(0.5, 0.8, p0=p2), grid, hbar))
