"""Scenario configs (TOML) and the pipeline that turns one into reports and plot data."""

from __future__ import annotations

import csv
import io
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .audit import (F_CANDIDATES, G_CANDIDATES, audit as run_audit,
                    estimator_form_check, functional_equation_check)
from .estimation import ErrorModel, XiDistribution, error_field, estimator, weak_unbiasedness
from .grid import Grid1D, GridError
from .preparation import (BipartitePreparation, GaussianSpec, Preparation, PreparationError,
                          build_gaussian, build_product, build_superposition, load_preparation,
                          wave_function)
from .sampler import factorizability_statistic, sample_bipartite, sample_shots, write_records_csv
from .uncertainty import (analyze, c_functional, fisher_information, hk_relation, modified_hk,
                          ms_error_p, quantum_oracle, schrodinger_robertson, UncertaintyReport)

TOL = 1e-8
ORACLE_TOL = 1e-5
UNBIAS_TOL = 1e-7
N_SE = 5.0

SCHEMA = """\
# Scenario file (TOML). Numbers are plain decimals.
name = "my-scenario"            # also the output subdirectory
description = "free text"        # optional
hbar = 1.0                       # optional, default 1

[grid]                           # spatial lattice shared by every factor
q_min = -12.0
q_max = 12.0
n = 2049                         # >= 16; odd n keeps Simpson exact on every interval

[preparation]
kind = "gaussian"                # gaussian | superposition | product | file
q0 = 0.0                         # gaussian: centre, width, momentum slope, chirp
sigma = 1.0
p0 = 0.0
chirp = 0.0
# kind = "superposition": repeat [[preparation.components]] with
#     weight = 1.0, weight_im = 0.0 (optional), q0, sigma, p0, chirp
# kind = "product": [preparation.first] and [preparation.second], each a
#     gaussian, superposition or file table
# kind = "file": path = "prep.json" (relative to the scenario file)

[model]
variant = "standard"             # standard | general_gamma | lambda
gamma = "half"                   # general_gamma only: half | cubic
lambda = 0.0                     # lambda only

[xi]
kind = "two_point"               # two_point | gaussian | uniform

[analyses]                       # every key optional
uncertainty = true
schrodinger_robertson = true     # standard model only
independence_audit = true        # product preparations only
functional_checks = true         # product preparations only
lambda_sweep = [0.0, 0.5, 1.0]   # Lambda values

[analyses.monte_carlo]
n = 1000000
seed = 12345
xi_mode = "shared"               # product preparations: shared | separable
expect_nonfactorizable = false   # product preparations: require z > 5
records = false                  # dump per-shot CSV
"""


class ConfigError(ValueError):
    pass


# -- parsing ----------------------------------------------------------------------

def _get(table: dict, key: str, kind, default=None, where=""):
    if key not in table:
        if default is None:
            raise ConfigError(f"missing key {where}{key}")
        return default
    v = table[key]
    if kind is float and isinstance(v, int) and not isinstance(v, bool):
        v = float(v)
    if not isinstance(v, kind) or (kind is int and isinstance(v, bool)):
        raise ConfigError(f"{where}{key} must be {kind.__name__}, got {v!r}")
    return v


def _gaussian(table: dict, where: str) -> GaussianSpec:
    return GaussianSpec(
        q0=_get(table, "q0", float, 0.0, where),
        sigma=_get(table, "sigma", float, 1.0, where),
        p0=_get(table, "p0", float, 0.0, where),
        c=_get(table, "chirp", float, 0.0, where),
    )


def _single(table: dict, grid: Grid1D, hbar: float, base: Path, where: str) -> Preparation:
    kind = _get(table, "kind", str, where=where)
    if kind == "gaussian":
        return build_gaussian(_gaussian(table, where), grid, hbar)
    if kind == "superposition":
        comps = table.get("components")
        if not isinstance(comps, list) or not comps:
            raise ConfigError(f"{where}components must be a non-empty array of tables")
        specs = []
        for i, c in enumerate(comps):
            w = f"{where}components[{i}]."
            weight = complex(_get(c, "weight", float, 1.0, w), _get(c, "weight_im", float, 0.0, w))
            specs.append((weight, _gaussian(c, w)))
        return build_superposition(specs, grid, hbar)
    if kind == "file":
        prep = load_preparation(base / _get(table, "path", str, where=where))
        if prep.hbar != hbar:
            raise ConfigError(f"{where}path: file hbar {prep.hbar} differs from scenario hbar")
        return prep
    raise ConfigError(f"{where}kind must be gaussian, superposition, product or file")


@dataclass
class Scenario:
    name: str
    text: str
    hbar: float
    grid: Grid1D
    prep: object  # Preparation or BipartitePreparation
    model: ErrorModel
    xi: XiDistribution
    analyses: dict = field(default_factory=dict)
    description: str = ""

    @property
    def bipartite(self) -> bool:
        return isinstance(self.prep, BipartitePreparation)

    def marginals(self) -> list[tuple[str, Preparation]]:
        if self.bipartite:
            return [("1", self.prep.parts[0]), ("2", self.prep.parts[1])]
        return [("", self.prep)]


ANALYSES = ("uncertainty", "schrodinger_robertson", "monte_carlo", "independence_audit",
            "functional_checks", "lambda_sweep")


def parse_scenario(text: str, base: Path = Path("."), grid_n: Optional[int] = None,
                   seed: Optional[int] = None) -> Scenario:
    """Parse and fully validate a scenario; raises ConfigError on any problem."""
    try:
        doc = tomllib.loads(text)
        name = _get(doc, "name", str)
        if not name or "/" in name or name.startswith("."):
            raise ConfigError(f"invalid scenario name {name!r}")
        hbar = _get(doc, "hbar", float, 1.0)
        g = doc.get("grid", {})
        grid = Grid1D(_get(g, "q_min", float, where="grid."), _get(g, "q_max", float, where="grid."),
                      grid_n if grid_n is not None else _get(g, "n", int, where="grid."))
        ptab = doc.get("preparation")
        if not isinstance(ptab, dict):
            raise ConfigError("missing [preparation] table")
        if ptab.get("kind") == "product":
            prep = build_product(
                _single(ptab.get("first", {}), grid, hbar, base, "preparation.first."),
                _single(ptab.get("second", {}), grid, hbar, base, "preparation.second."))
        else:
            prep = _single(ptab, grid, hbar, base, "preparation.")
        m = doc.get("model", {})
        variant = _get(m, "variant", str, "standard", "model.")
        if variant == "lambda":
            model = ErrorModel.lambda_modified(_get(m, "lambda", float, 0.0, "model."))
        elif variant == "general_gamma":
            model = ErrorModel.general_gamma(_get(m, "gamma", str, "half", "model."))
        else:
            model = ErrorModel(variant)
        xi = XiDistribution(_get(doc.get("xi", {}), "kind", str, "two_point", "xi."), hbar)
        analyses = dict(doc.get("analyses", {}))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc
    except (GridError, PreparationError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc

    unknown = set(analyses) - set(ANALYSES)
    if unknown:
        raise ConfigError(f"unknown analyses: {sorted(unknown)}")
    bip = isinstance(prep, BipartitePreparation)
    for key in ("independence_audit", "functional_checks"):
        if analyses.get(key) and not bip:
            raise ConfigError(f"analysis {key} requires a product preparation")
    if analyses.get("schrodinger_robertson") and model.variant != "standard":
        raise ConfigError("schrodinger_robertson requires the standard model")
    mc = analyses.get("monte_carlo")
    if mc is not None:
        if not isinstance(mc, dict):
            raise ConfigError("analyses.monte_carlo must be a table")
        mc = dict(mc)
        mc["n"] = _get(mc, "n", int, 1_000_000, "analyses.monte_carlo.")
        mc["seed"] = seed if seed is not None else _get(mc, "seed", int, 0, "analyses.monte_carlo.")
        mc["xi_mode"] = _get(mc, "xi_mode", str, "shared", "analyses.monte_carlo.")
        if mc["xi_mode"] not in ("shared", "separable"):
            raise ConfigError("analyses.monte_carlo.xi_mode must be shared or separable")
        if mc["n"] < 1000:
            raise ConfigError("analyses.monte_carlo.n must be at least 1000")
        if not 0 <= mc["seed"] < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        analyses["monte_carlo"] = mc
    sweep = analyses.get("lambda_sweep")
    if sweep is not None:
        if not isinstance(sweep, list) or not all(isinstance(x, (int, float)) for x in sweep):
            raise ConfigError("analyses.lambda_sweep must be a list of numbers")
        analyses["lambda_sweep"] = [float(x) for x in sweep]
    return Scenario(name, text, hbar, grid, prep, model, xi, analyses,
                    doc.get("description", ""))


# -- bundled scenarios ---------------------------------------------------------------

def bundled() -> dict[str, str]:
    root = resources.files("uncertainty_lab") / "scenarios"
    out = {}
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".toml"):
            out[entry.name[:-5]] = entry.read_text()
    return out


# -- running ------------------------------------------------------------------------

@dataclass
class Outcome:
    scenario: Scenario
    report: dict = field(default_factory=dict)  # flat key -> value
    checks: dict = field(default_factory=dict)  # name -> bool
    rows: list = field(default_factory=list)  # corpus CSV rows
    tables: dict = field(default_factory=dict)  # file name -> (header, columns)
    shots: list = field(default_factory=list)  # (file name, SampleStats)

    @property
    def failures(self) -> list[str]:
        return [k for k, ok in self.checks.items() if not ok]

    def check(self, name: str, ok) -> None:
        self.checks[name] = bool(ok)


def _prefix(tag: str, comp: str) -> str:
    return f"{tag}.{comp}." if comp else f"{tag}."


def _uncertainty(out: Outcome, comp: str, prep: Preparation):
    sc = out.scenario
    rep = analyze(prep, sc.model, sc.xi)
    pre = _prefix("uncertainty", comp)
    for k, v in rep.to_record().items():
        if k not in ("model", "xi_kind"):
            out.report[pre + k] = v
    h2 = 0.25 * sc.hbar**2
    model = sc.model
    out.report[pre + "hk_slack"] = hk_relation(rep).slack
    out.report[pre + "hk_final_slack"] = hk_relation(rep, final=True).slack
    out.report[pre + "modified_hk_slack"] = modified_hk(rep).slack
    out.check(pre + "cramer_rao", rep.cramer_rao_slack >= -TOL)
    if model.variant == "standard":
        out.check(pre + "information_tradeoff",
                  abs(rep.E_p2 - h2 * rep.J_q) <= TOL * h2 * rep.J_q)
        out.check(pre + "ms_error_tradeoff", rep.ms_tradeoff >= h2 - TOL)
        orc = quantum_oracle(wave_function(prep), sc.hbar)
        out.report[pre + "oracle_sigma_p2"] = orc.sigma_p2
        out.report[pre + "oracle_sigma_q2"] = orc.sigma_q2
        out.check(pre + "oracle_sigma_p2", abs(orc.sigma_p2 - rep.sigma_p2) <= ORACLE_TOL * rep.sigma_p2)
        out.check(pre + "oracle_sigma_q2", abs(orc.sigma_q2 - rep.sigma_q2) <= ORACLE_TOL * rep.sigma_q2)
    if model.variant == "lambda":
        out.check(pre + "modified_tradeoff",
                  abs(rep.E_p2 - h2 * rep.J_q - rep.C) <= TOL * rep.E_p2)
        if model.lam >= 0:
            out.check(pre + "modified_hk", modified_hk(rep).slack >= -TOL)
    if model.variant != "general_gamma":
        out.check(pre + "hk", hk_relation(rep).slack >= -TOL)
        for xi in (sc.hbar, -sc.hbar):
            out.check(pre + f"weakly_unbiased[{xi:+g}]",
                      abs(weak_unbiasedness(prep, model, xi)) <= UNBIAS_TOL)
    row = {"scenario": sc.name, "component": comp or "0", "record": "uncertainty"}
    row.update(rep.to_record())
    out.rows.append(row)

    suffix = f"_{comp}" if comp else ""
    q = prep.grid.nodes
    out.tables[f"S{suffix}.dat"] = (("q", "S"), (q, prep.S))
    out.tables[f"rho{suffix}.dat"] = (("q", "rho"), (q, prep.rho))
    out.tables[f"estimator{suffix}.dat"] = (("q", "pbar"), (q, estimator(prep).values))
    for xi in (sc.hbar, -sc.hbar):
        out.tables[f"error{suffix}_xi{xi:+g}.dat"] = (
            ("q", "error"), (q, error_field(prep, model, xi).values))


def _schrodinger_robertson(out: Outcome, comp: str, prep: Preparation):
    sc = out.scenario
    sr = schrodinger_robertson(prep, sc.model, sc.xi)
    pre = _prefix("sr", comp)
    out.report.update({pre + "lhs": sr.lhs, pre + "rhs_commutator": sr.rhs_commutator,
                       pre + "rhs_full": sr.rhs_full, pre + "slack": sr.slack,
                       pre + "commutator_im": sr.commutator.imag,
                       pre + "commutator_re": sr.commutator.real})
    out.check(pre + "slack", sr.slack >= -TOL)
    out.check(pre + "commutator", abs(sr.commutator - 1j * sc.hbar) <= ORACLE_TOL * sc.hbar)
    out.check(pre + "robertson_leg", sr.robertson_leg.slack >= -TOL)
    out.check(pre + "covariance_leg", sr.covariance_leg.slack >= -TOL)


def expected_moments(prep: Preparation, model: ErrorModel, xi: XiDistribution) -> dict:
    rep = analyze(prep, model, xi)
    return {"mean_q": rep.q_mean, "var_q": rep.sigma_q2, "mean_p": rep.p_mean,
            "var_p": rep.sigma_p2, "cov_qp": rep.cov_qp}


def expected_cross_covariance(prep: BipartitePreparation, model: ErrorModel,
                              xi: XiDistribution, xi_mode: str) -> float:
    """Cov(p1, p2) for the Standard model on a product preparation."""
    if xi_mode == "separable":
        return model.gamma_moment(1, xi) ** 2 * _mean_error(prep, 0) * _mean_error(prep, 1)
    return model.gamma_moment(2, xi) * _mean_error(prep, 0) * _mean_error(prep, 1)


def _mean_error(prep: BipartitePreparation, k: int) -> float:
    from .estimation import score
    part = prep.parts[k]
    return part.grid.integrate(score(part) * part.rho)


def _monte_carlo(out: Outcome):
    sc = out.scenario
    mc = sc.analyses["monte_carlo"]
    if not sc.bipartite:
        stats = sample_shots(sc.prep, sc.model, sc.xi, mc["n"], mc["seed"])
        expected = expected_moments(sc.prep, sc.model, sc.xi)
        for key, target in expected.items():
            est = stats[key]
            out.report[f"mc.{key}.value"] = est.value
            out.report[f"mc.{key}.se"] = est.se
            out.report[f"mc.{key}.expected"] = target
            out.check(f"mc.{key}", est.within(target, N_SE))
    else:
        stats = sample_bipartite(sc.prep, sc.model, mc["xi_mode"], mc["n"], mc["seed"], sc.xi)
        for comp, part in sc.marginals():
            if sc.model.variant == "lambda":
                break  # marginal moments are not those of the single-system Lambda model
            for key, target in expected_moments(part, sc.model, sc.xi).items():
                if key == "cov_qp":
                    continue
                skey = key + comp
                est = stats[skey]
                out.report[f"mc.{skey}.value"] = est.value
                out.report[f"mc.{skey}.se"] = est.se
                out.report[f"mc.{skey}.expected"] = target
                out.check(f"mc.{skey}", est.within(target, N_SE))
        est = stats["cov_p1p2"]
        out.report["mc.cov_p1p2.value"] = est.value
        out.report["mc.cov_p1p2.se"] = est.se
        if sc.model.variant == "standard":
            target = expected_cross_covariance(sc.prep, sc.model, sc.xi, mc["xi_mode"])
            out.report["mc.cov_p1p2.expected"] = target
            out.check("mc.cov_p1p2", est.within(target, N_SE))
        fz = factorizability_statistic(stats)
        out.report.update({"mc.factorizability.distance": fz.distance,
                           "mc.factorizability.se": fz.se, "mc.factorizability.z": fz.z})
        if mc["xi_mode"] == "separable":
            out.check("mc.factorizable", not fz.exceeds(N_SE))
        elif mc.get("expect_nonfactorizable", False):
            out.check("mc.nonfactorizable", fz.exceeds(N_SE))
    out.report["mc.n"] = stats.n_samples
    out.report["mc.seed"] = stats.seed
    if mc.get("records", False):
        out.shots.append(("shots.csv", stats))


def _audit(out: Outcome, model: ErrorModel, tag: str = "audit"):
    sc = out.scenario
    cfg = sc.analyses.get("independence_audit")
    xis = cfg.get("xi", [sc.hbar, -sc.hbar]) if isinstance(cfg, dict) else [sc.hbar, -sc.hbar]
    rep = run_audit(sc.prep, model, xis)
    for k, v in rep.to_record().items():
        out.report[f"{tag}.{k}"] = v
    row = {"scenario": sc.name, "component": "1+2", "record": tag,
           "model": model.variant, "lam": model.lam}
    row.update(rep.to_record())
    out.rows.append(row)
    expected = "violated" if model.variant == "lambda" and model.lam != 0 else "independent"
    if model.variant != "general_gamma":
        out.check(f"{tag}.verdict", rep.verdict == expected)
    return rep


def _functional(out: Outcome):
    from .corpus import CLASSICAL_MOMENTA, classical_fixture
    sc = out.scenario
    preps = [sc.prep]
    for tag in G_CANDIDATES:
        res = functional_equation_check(tag, preps)
        passed = all(r.passed for r in res)
        out.report[f"functional.G.{tag}"] = "pass" if passed else "fail"
        out.report[f"functional.G.{tag}.residual"] = max(r.residual for r in res)
        out.check(f"functional.G.{tag}", passed == (tag == "log"))
    fixture = classical_fixture(sc.grid, sc.hbar)
    for tag in F_CANDIDATES:
        res = estimator_form_check(tag, preps, fixture, CLASSICAL_MOMENTA)
        out.report[f"functional.F.{tag}"] = "pass" if res.passed else "fail"
        out.report[f"functional.F.{tag}.local"] = "yes" if all(res.locality) else "no"
        out.report[f"functional.F.{tag}.classical_limit"] = "yes" if res.classical_limit else "no"
        # locality alone cannot reject a map on phase-free products
        out.check(f"functional.F.{tag}", res.passed == (tag == "d_qj"))


def _lambda_sweep(out: Outcome):
    sc = out.scenario
    lams = sc.analyses["lambda_sweep"]
    h2 = 0.25 * sc.hbar**2
    for comp, prep in sc.marginals():
        suffix = f"_{comp}" if comp else ""
        C_vals, E_vals, slack = [], [], []
        J = fisher_information(prep)
        for lam in lams:
            model = ErrorModel.lambda_modified(lam)
            C = c_functional(prep, lam)
            E = ms_error_p(prep, model, sc.xi)
            rep = analyze(prep, model, sc.xi)
            C_vals.append(C)
            E_vals.append(E)
            slack.append(modified_hk(rep).slack)
            pre = f"sweep{('.' + comp) if comp else ''}.{lam:g}."
            out.report[pre + "C"] = C
            out.report[pre + "E_p2"] = E
            out.report[pre + "modified_hk_slack"] = slack[-1]
            out.check(pre + "modified_tradeoff", abs(E - h2 * J - C) <= TOL * E)
            if lam >= 0:
                out.check(pre + "modified_hk", slack[-1] >= -TOL)
            if lam == 0:
                out.check(pre + "C_zero", C == 0.0)
            elif lam > 0:
                out.check(pre + "C_positive", C > 0)
        order = np.argsort(lams, kind="stable")
        nonneg = [i for i in order if lams[i] >= 0]
        increasing = all(C_vals[b] > C_vals[a] for a, b in zip(nonneg, nonneg[1:])
                         if lams[b] > lams[a])
        out.check(f"sweep{('.' + comp) if comp else ''}.C_increasing", increasing)
        out.tables[f"lambda_sweep{suffix}.dat"] = (
            ("Lambda", "C", "E_p2", "modified_hk_slack"),
            (np.array(lams), np.array(C_vals), np.array(E_vals), np.array(slack)))
    if sc.bipartite and sc.analyses.get("independence_audit"):
        for lam in lams:
            _audit(out, ErrorModel.lambda_modified(lam), tag=f"audit.lambda={lam:g}")


def execute(sc: Scenario) -> Outcome:
    out = Outcome(sc)
    out.report["scenario.name"] = sc.name
    out.report["scenario.hbar"] = sc.hbar
    out.report["scenario.grid_n"] = sc.grid.n
    out.report["scenario.model"] = sc.model.variant
    out.report["scenario.lambda"] = sc.model.lam
    out.report["scenario.xi"] = sc.xi.kind
    a = sc.analyses
    for comp, prep in sc.marginals():
        if a.get("uncertainty"):
            _uncertainty(out, comp, prep)
        if a.get("schrodinger_robertson"):
            _schrodinger_robertson(out, comp, prep)
    if a.get("monte_carlo"):
        _monte_carlo(out)
    if a.get("independence_audit"):
        _audit(out, sc.model)
    if a.get("functional_checks"):
        _functional(out)
    if a.get("lambda_sweep"):
        _lambda_sweep(out)
    for name, ok in out.checks.items():
        out.report[f"check.{name}"] = "pass" if ok else "FAIL"
    return out


# -- artifacts --------------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_report(out: Outcome) -> str:
    return "".join(f"{k} = {fmt(v)}\n" for k, v in out.report.items())


CSV_COLUMNS = (["scenario", "component", "record"] + UncertaintyReport.keys()
               + ["estimator_leakage", "error_leakage", "normalized_leakage", "verdict"])


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n",
                       quoting=csv.QUOTE_MINIMAL, extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: fmt(v) for k, v in row.items()})
    return buf.getvalue()


def render_table(header, columns) -> str:
    lines = ["# " + " ".join(header)]
    for vals in zip(*columns):
        lines.append(" ".join(fmt(float(v)) for v in vals))
    return "\n".join(lines) + "\n"


def write_artifacts(out: Outcome, root: Path) -> Path:
    d = Path(root) / out.scenario.name
    (d / "plot").mkdir(parents=True, exist_ok=True)
    (d / "report.txt").write_text(render_report(out))
    (d / "corpus.csv").write_text(render_csv(out.rows))
    for name, (header, cols) in out.tables.items():
        (d / "plot" / name).write_text(render_table(header, cols))
    for name, stats in out.shots:
        write_records_csv(stats, d / name)
    return d
