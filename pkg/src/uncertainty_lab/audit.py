"""Estimation-independence audits on product preparations.

The uniqueness arguments (linearity, locality, classical limit) are exercised as
falsification tests over finite candidate families, not as symbolic proofs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .estimation import ErrorModel, bipartite_error_field, bipartite_estimator
from .preparation import BipartitePreparation

LEAK_TOL = 1e-8
ADDITIVITY_TOL = 1e-10
LOCALITY_TOL = 1e-10


class AuditError(ValueError):
    pass


def _require_product(prep: BipartitePreparation):
    if not prep.product_tag:
        raise AuditError("audit requires independent preparations")


def row_variation(values: np.ndarray, support: np.ndarray, j: int) -> np.ndarray:
    """For each fixed q_j, max - min over the other coordinate, restricted to the support."""
    v = np.where(support, values, np.nan)
    other = 1 if j == 1 else 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-nan rows outside the support
        spread = np.nanmax(v, axis=other) - np.nanmin(v, axis=other)
    return np.nan_to_num(spread, nan=0.0)


def leakage(values: np.ndarray, support: np.ndarray, j: int) -> float:
    return float(row_variation(values, support, j).max())


@dataclass(frozen=True)
class IndependenceReport:
    estimator_leakage: float
    error_leakage: float
    normalized_leakage: float
    verdict: str
    per_component: tuple  # ((estimator, error, normalized) for j=1, then j=2)

    def to_record(self) -> dict:
        return {
            "estimator_leakage": self.estimator_leakage,
            "error_leakage": self.error_leakage,
            "normalized_leakage": self.normalized_leakage,
            "verdict": self.verdict,
        }


def audit(prep: BipartitePreparation, model: ErrorModel, xi_samples: Iterable[float],
          leak_tol: float = LEAK_TOL) -> IndependenceReport:
    _require_product(prep)
    xi_samples = [float(x) for x in xi_samples]
    sup = prep.support
    comps = []
    for j in (1, 2):
        est = leakage(bipartite_estimator(prep, j).values, sup, j)
        err, norm = 0.0, 0.0
        for xi in xi_samples:
            eps = bipartite_error_field(prep, model, xi, j).values
            lk = leakage(eps, sup, j)
            scale = np.abs(eps[sup]).max()
            err = max(err, lk)
            norm = max(norm, lk / scale if scale > 0 else 0.0)
        comps.append((est, err, norm))
    est = max(c[0] for c in comps)
    err = max(c[1] for c in comps)
    norm = max(c[2] for c in comps)
    verdict = "independent" if norm <= leak_tol else "violated"
    return IndependenceReport(est, err, norm, verdict, tuple(comps))


# -- functional equation for the error generator G ------------------------------

G_CANDIDATES = ("log", "rho", "rho2", "sqrt")


def _generator(tag: str, gamma: float):
    if tag == "log":
        return lambda r: gamma * np.log(r)
    if tag == "rho":
        return lambda r: r
    if tag == "rho2":
        return lambda r: r * r
    if tag == "sqrt":
        return np.sqrt
    raise ValueError(f"unknown generator {tag!r}; expected one of {G_CANDIDATES}")


class CheckResult(NamedTuple):
    residual: float
    scale: float
    passed: bool


def functional_equation_check(tag: str, preps: Sequence[BipartitePreparation],
                              gamma: float = 0.5) -> list[CheckResult]:
    """Additivity G(rho1 rho2) = G(rho1) + G(rho2) on the support of each product preparation."""
    G = _generator(tag, gamma)
    out = []
    for prep in preps:
        _require_product(prep)
        r1, r2 = prep.parts[0].rho, prep.parts[1].rho
        sup = prep.support
        with np.errstate(divide="ignore"):
            lhs = G(r1[:, None] * r2[None, :])
            rhs = G(r1)[:, None] + G(r2)[None, :]
        residual = float(np.abs(lhs - rhs)[sup].max())
        scale = float(np.abs(lhs[sup]).max())
        out.append(CheckResult(residual, scale, residual <= ADDITIVITY_TOL * scale))
    return out


# -- candidate estimator maps F ------------------------------------------------------

F_CANDIDATES = ("d_qj", "identity", "q_times", "cross")


def apply_map(tag: str, prep: BipartitePreparation, j: int) -> np.ndarray:
    S = prep.S
    q1, q2 = prep.grid.mesh()
    if tag == "d_qj":
        return prep.grid.partial(S, j)
    if tag == "identity":
        return S.copy()
    if tag == "q_times":
        return (q1 if j == 1 else q2) * S
    if tag == "cross":
        return prep.grid.partial(S, 1) + prep.grid.partial(S, 2)
    raise ValueError(f"unknown map {tag!r}; expected one of {F_CANDIDATES}")


class FormCheck(NamedTuple):
    locality: tuple  # per preparation
    classical_limit: bool
    passed: bool


def estimator_form_check(tag: str, preps: Sequence[BipartitePreparation],
                         fixture: BipartitePreparation, fixture_momenta: tuple[float, float]
                         ) -> FormCheck:
    """Locality on every product preparation plus the classical-limit fixture.

    ``fixture`` must be a product of linear-phase preparations whose slopes are
    ``fixture_momenta``; a passing map returns exactly those constants.
    """
    local = []
    for prep in preps:
        _require_product(prep)
        ok = True
        for j in (1, 2):
            out = apply_map(tag, prep, j)
            scale = max(float(np.abs(out[prep.support]).max()), 1.0)
            ok &= leakage(out, prep.support, j) <= LOCALITY_TOL * scale
        local.append(bool(ok))
    classical = True
    for j, p0 in zip((1, 2), fixture_momenta):
        out = apply_map(tag, fixture, j)[fixture.support]
        classical &= bool(np.all(np.abs(out - p0) <= 1e-8 * max(abs(p0), 1.0)))
    return FormCheck(tuple(local), classical, all(local) and classical)
