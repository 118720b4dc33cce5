"""Momentum estimator, single-shot estimation errors and the law of the global variable xi.

Every in-scope error is separable as ``gamma(xi) * w(q)``: the Standard model has
``gamma = xi/2`` and ``w = d ln rho``, the Lambda-modified model keeps ``gamma = xi/2``
and scales ``w`` by ``1 + Lambda*rho``.  Second-moment quantities therefore only need
the moments of ``gamma(xi)``, which are known in closed form for every built-in law.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field1D, Field2D
from .preparation import BipartitePreparation, Preparation

XI_KINDS = ("two_point", "gaussian", "uniform")
GAMMAS = ("half", "cubic")
VARIANTS = ("standard", "general_gamma", "lambda")


@dataclass(frozen=True)
class XiDistribution:
    kind: str = "two_point"
    hbar: float = 1.0

    def __post_init__(self):
        if self.kind not in XI_KINDS:
            raise ValueError(f"unknown xi law {self.kind!r}; expected one of {XI_KINDS}")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        h = self.hbar
        if self.kind == "two_point":
            return h * (2.0 * rng.integers(0, 2, size=size) - 1.0)
        if self.kind == "gaussian":
            return rng.normal(0.0, h, size=size)
        a = np.sqrt(3.0) * h
        return rng.uniform(-a, a, size=size)

    def raw_moment(self, m: int) -> float:
        """E[xi**m], exact."""
        if m % 2:
            return 0.0
        h = self.hbar
        if self.kind == "two_point":
            return h**m
        if self.kind == "gaussian":
            return h**m * float(np.prod(np.arange(m - 1, 0, -2))) if m else 1.0
        return (np.sqrt(3.0) * h) ** m / (m + 1)


@dataclass(frozen=True)
class ErrorModel:
    variant: str = "standard"
    gamma: str = "half"
    lam: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown error model {self.variant!r}")
        if self.gamma not in GAMMAS:
            raise ValueError(f"unknown gamma {self.gamma!r}")
        if self.variant != "general_gamma" and self.gamma != "half":
            raise ValueError("only the general_gamma variant takes a custom gamma")
        if self.variant != "lambda" and self.lam != 0.0:
            raise ValueError("Lambda is only meaningful for the lambda variant")

    @classmethod
    def standard(cls):
        return cls()

    @classmethod
    def general_gamma(cls, gamma: str):
        return cls("general_gamma", gamma=gamma)

    @classmethod
    def lambda_modified(cls, lam: float):
        return cls("lambda", lam=float(lam))

    def _gamma_form(self, hbar: float) -> tuple[float, int]:
        if self.gamma == "cubic":
            return 0.5 / hbar**2, 3
        return 0.5, 1

    def gamma_of(self, xi, hbar: float):
        coef, power = self._gamma_form(hbar)
        return coef * np.asarray(xi, dtype=float) ** power

    def gamma_moment(self, k: int, xi_dist: XiDistribution) -> float:
        """E[gamma(xi)**k] under ``xi_dist``."""
        coef, power = self._gamma_form(xi_dist.hbar)
        return coef**k * xi_dist.raw_moment(power * k)


def _log_density(rho: np.ndarray) -> np.ndarray:
    pos = rho > 0
    floor = rho[pos].min()
    return np.log(np.where(pos, rho, floor))


def score(prep: Preparation) -> np.ndarray:
    """d/dq ln rho on the support, zero elsewhere."""
    return np.where(prep.support, prep.grid.derivative(_log_density(prep.rho)), 0.0)


def error_profile(prep: Preparation, model: ErrorModel) -> np.ndarray:
    """The q-dependent factor ``w(q)`` of the error ``gamma(xi) * w(q)``."""
    w = score(prep)
    if model.variant == "lambda":
        w = w * (1.0 + model.lam * prep.rho)
    return w


def estimator(prep: Preparation) -> Field1D:
    return Field1D(prep.grid, prep.grid.derivative(prep.S))


def error_field(prep: Preparation, model: ErrorModel, xi: float) -> Field1D:
    return Field1D(prep.grid, model.gamma_of(xi, prep.hbar) * error_profile(prep, model))


def momentum_field(prep: Preparation, model: ErrorModel, xi: float) -> Field1D:
    return Field1D(prep.grid, estimator(prep).values + error_field(prep, model, xi).values)


def weak_unbiasedness(prep: Preparation, model: ErrorModel, xi: float) -> float:
    """Average of the single-shot error over rho for fixed xi."""
    if xi == 0:
        return 0.0
    return prep.grid.integrate(error_field(prep, model, xi).values * prep.rho)


# -- bipartite --------------------------------------------------------------

def _component(j: int) -> int:
    if j not in (1, 2):
        raise ValueError(f"component must be 1 or 2, got {j}")
    return j


def bipartite_estimator(prep: BipartitePreparation, j: int) -> Field2D:
    return Field2D(prep.grid, prep.grid.partial(prep.S, _component(j)))


def bipartite_score(prep: BipartitePreparation, j: int) -> np.ndarray:
    d = prep.grid.partial(_log_density(prep.rho), _component(j))
    return np.where(prep.support, d, 0.0)


def bipartite_error_field(prep: BipartitePreparation, model: ErrorModel, xi: float,
                          j: int) -> Field2D:
    w = bipartite_score(prep, j)
    if model.variant == "lambda":
        w = w * (1.0 + model.lam * prep.rho)
    return Field2D(prep.grid, model.gamma_of(xi, prep.hbar) * w)
