"""Monte Carlo shots from the restricted phase-space law.

Positions come from inverse-CDF sampling of the gridded density, xi from its law, and the
momentum of each shot is then fixed: p = pbar(q) + error(q, xi).  Shots are generated in
fixed-size chunks, each with its own child seed, so the result does not depend on how many
workers ran the chunks.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .estimation import ErrorModel, XiDistribution, error_profile, estimator
from .preparation import BipartitePreparation, Preparation

MIN_SHOTS = 1000
MIN_FACTORIZABILITY_SHOTS = 10_000
CHUNK = 1 << 17


class SamplingError(ValueError):
    pass


class Estimate(NamedTuple):
    value: float
    se: float

    def within(self, target: float, k: float = 5.0) -> bool:
        return abs(self.value - target) <= k * self.se


@dataclass(frozen=True)
class SampleStats:
    n_samples: int
    seed: int
    moments: dict
    records: dict = field(default_factory=dict, repr=False)
    xi_mode: str = "single"

    def __getitem__(self, key) -> Estimate:
        return self.moments[key]


def _mean_se(z: np.ndarray) -> Estimate:
    return Estimate(float(z.mean()), float(z.std(ddof=1) / np.sqrt(z.size)))


def _var_se(x: np.ndarray) -> Estimate:
    d = x - x.mean()
    z = d * d
    return Estimate(float(z.sum() / (x.size - 1)), float(z.std(ddof=1) / np.sqrt(x.size)))


def _cov_se(x: np.ndarray, y: np.ndarray) -> Estimate:
    z = (x - x.mean()) * (y - y.mean())
    return Estimate(float(z.sum() / (x.size - 1)), float(z.std(ddof=1) / np.sqrt(x.size)))


class InverseCDF:
    """Piecewise-linear inverse of the cumulative trapezoid integral of a gridded density."""

    def __init__(self, nodes: np.ndarray, rho: np.ndarray):
        if np.count_nonzero(rho > 0) < 2:
            raise SamplingError("degenerate density: support is a single node")
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(nodes))])
        self.cdf = cdf / cdf[-1]
        self.nodes = nodes

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return np.interp(u, self.cdf, self.nodes)


def _chunks(n: int, seed: int):
    sizes = [CHUNK] * (n // CHUNK) + ([n % CHUNK] if n % CHUNK else [])
    return list(zip(sizes, np.random.SeedSequence(seed).spawn(len(sizes))))


def _run_chunks(fn, n: int, seed: int, workers: int) -> dict:
    jobs = _chunks(n, seed)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    else:
        parts = [fn(*job) for job in jobs]
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


class _Marginal:
    def __init__(self, prep: Preparation):
        self.nodes = prep.grid.nodes
        self.rho = prep.rho
        self.pbar = estimator(prep).values
        self.w = error_profile(prep, ErrorModel())
        self.icdf = InverseCDF(self.nodes, prep.rho)

    def at(self, q, table):
        return np.interp(q, self.nodes, table)


def sample_shots(prep: Preparation, model: ErrorModel, xi_dist: XiDistribution, n: int,
                 seed: int, xi_fixed: Optional[float] = None, workers: int = 1) -> SampleStats:
    if n < MIN_SHOTS:
        raise SamplingError(f"need at least {MIN_SHOTS} shots, got {n}")
    icdf = InverseCDF(prep.grid.nodes, prep.rho)
    nodes = prep.grid.nodes
    pbar_tab = estimator(prep).values
    w_tab = error_profile(prep, model)
    hbar = prep.hbar

    def chunk(m, ss):
        rng = np.random.default_rng(ss)
        q = icdf(rng.random(m))
        xi = np.full(m, float(xi_fixed)) if xi_fixed is not None else xi_dist.sample(rng, m)
        pbar = np.interp(q, nodes, pbar_tab)
        eps = model.gamma_of(xi, hbar) * np.interp(q, nodes, w_tab)
        return {"q": q, "xi": xi, "pbar": pbar, "eps": eps, "p": pbar + eps}

    rec = _run_chunks(chunk, n, seed, workers)
    moments = {
        "mean_q": _mean_se(rec["q"]),
        "var_q": _var_se(rec["q"]),
        "mean_p": _mean_se(rec["p"]),
        "var_p": _var_se(rec["p"]),
        "cov_qp": _cov_se(rec["q"], rec["p"]),
    }
    return SampleStats(n, seed, moments, rec)


def sample_bipartite(prep: BipartitePreparation, model: ErrorModel, xi_mode: str, n: int,
                     seed: int, xi_dist: Optional[XiDistribution] = None,
                     workers: int = 1) -> SampleStats:
    if not prep.product_tag:
        raise SamplingError("bipartite sampling requires a product preparation")
    if xi_mode not in ("shared", "separable"):
        raise SamplingError(f"xi_mode must be 'shared' or 'separable', got {xi_mode!r}")
    if n < MIN_SHOTS:
        raise SamplingError(f"need at least {MIN_SHOTS} shots, got {n}")
    xi_dist = xi_dist or XiDistribution("two_point", prep.hbar)
    m1, m2 = (_Marginal(p) for p in prep.parts)
    hbar = prep.hbar

    def chunk(m, ss):
        rng = np.random.default_rng(ss)
        q1 = m1.icdf(rng.random(m))
        q2 = m2.icdf(rng.random(m))
        xi1 = xi_dist.sample(rng, m)
        xi2 = xi1 if xi_mode == "shared" else xi_dist.sample(rng, m)
        factor = 1.0
        if model.variant == "lambda":
            factor = 1.0 + model.lam * m1.at(q1, m1.rho) * m2.at(q2, m2.rho)
        out = {"q1": q1, "q2": q2, "xi1": xi1, "xi2": xi2}
        for j, (mj, qj, xj) in enumerate(((m1, q1, xi1), (m2, q2, xi2)), start=1):
            pbar = mj.at(qj, mj.pbar)
            eps = model.gamma_of(xj, hbar) * mj.at(qj, mj.w) * factor
            out[f"pbar{j}"], out[f"eps{j}"], out[f"p{j}"] = pbar, eps, pbar + eps
        return out

    rec = _run_chunks(chunk, n, seed, workers)
    moments = {}
    for j in (1, 2):
        moments[f"mean_q{j}"] = _mean_se(rec[f"q{j}"])
        moments[f"var_q{j}"] = _var_se(rec[f"q{j}"])
        moments[f"mean_p{j}"] = _mean_se(rec[f"p{j}"])
        moments[f"var_p{j}"] = _var_se(rec[f"p{j}"])
    moments["cov_p1p2"] = _cov_se(rec["p1"], rec["p2"])
    moments["cov_q1q2"] = _cov_se(rec["q1"], rec["q2"])
    moments["cov_eps1eps2"] = _cov_se(rec["eps1"], rec["eps2"])
    return SampleStats(n, seed, moments, rec, xi_mode=xi_mode)


# -- (non)factorizability ---------------------------------------------------------

class Factorizability(NamedTuple):
    distance: float  # max |P(cell1, cell2) - P(cell1) P(cell2)|
    se: float  # standard error at the cell with the largest z
    z: float  # max over cells of |difference| / standard error

    def exceeds(self, k: float = 5.0) -> bool:
        return self.z > k


def cell_index(eps: np.ndarray, threshold: float) -> np.ndarray:
    """Four cells per component: sign of the error crossed with |error| above/below threshold."""
    return 2 * (eps > 0) + (np.abs(eps) > threshold)


def factorizability_statistic(stats: SampleStats) -> Factorizability:
    rec = stats.records
    if "eps1" not in rec:
        raise SamplingError("factorizability needs bipartite per-shot records")
    n = rec["eps1"].size
    if n < MIN_FACTORIZABILITY_SHOTS:
        raise SamplingError(f"need at least {MIN_FACTORIZABILITY_SHOTS} shots, got {n}")
    b1 = cell_index(rec["eps1"], np.median(np.abs(rec["eps1"])))
    b2 = cell_index(rec["eps2"], np.median(np.abs(rec["eps2"])))
    joint = np.bincount(4 * b1 + b2, minlength=16).reshape(4, 4) / n
    p1, p2 = joint.sum(axis=1), joint.sum(axis=0)
    diff = np.abs(joint - np.outer(p1, p2))
    se = np.sqrt(np.outer(p1 * (1 - p1), p2 * (1 - p2)) / n)
    z = np.divide(diff, se, out=np.zeros_like(diff), where=se > 0)
    k = np.unravel_index(np.argmax(z), z.shape)
    return Factorizability(float(diff.max()), float(se[k]), float(z[k]))


def write_records_csv(stats: SampleStats, path) -> None:
    rec = stats.records
    if "q" in rec:
        cols = [("q", rec["q"]), ("xi", rec["xi"]), ("p", rec["p"])]
    else:
        cols = [("q1", rec["q1"]), ("q2", rec["q2"])]
        if stats.xi_mode == "shared":
            cols.append(("xi", rec["xi1"]))
        else:
            cols += [("xi1", rec["xi1"]), ("xi2", rec["xi2"])]
        cols += [("p1", rec["p1"]), ("p2", rec["p2"])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "shot"] + [c for c, _ in cols])
        for i in range(stats.n_samples):
            w.writerow([stats.seed, i] + [repr(float(v[i])) for _, v in cols])
