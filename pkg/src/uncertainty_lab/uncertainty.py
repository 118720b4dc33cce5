"""Mean-squared errors, Fisher information, dispersions and the uncertainty relations.

Two routes are kept apart on purpose: the statistical side works from (S, rho) and the
error fields, while :func:`quantum_oracle` only sees the wave function and evaluates
operator moments by finite differences of psi.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import NamedTuple, Optional

import numpy as np

from .estimation import ErrorModel, XiDistribution, error_profile, estimator, score
from .preparation import Preparation, WaveFunction, wave_function

REL_TOL = 1e-8
VARIANCE_TOL = 1e-6
ORACLE_NORM_TOL = 1e-6


class ModelInconsistencyError(RuntimeError):
    pass


def _mean(prep: Preparation, f) -> float:
    return prep.grid.integrate(f * prep.rho)


def fisher_information(prep: Preparation) -> float:
    return _mean(prep, score(prep) ** 2)


def mean_position(prep: Preparation) -> float:
    return _mean(prep, prep.grid.nodes)


def ms_error_q(prep: Preparation) -> float:
    return _mean(prep, (prep.grid.nodes - mean_position(prep)) ** 2)


def mean_estimator(prep: Preparation) -> float:
    return _mean(prep, estimator(prep).values)


def estimator_dispersion(prep: Preparation) -> float:
    pbar = estimator(prep).values
    return _mean(prep, (pbar - _mean(prep, pbar)) ** 2)


def estimator_covariance(prep: Preparation) -> float:
    """Covariance of q and the estimator under rho; equals the symmetrized quantum covariance."""
    q = prep.grid.nodes
    pbar = estimator(prep).values
    return _mean(prep, (q - mean_position(prep)) * (pbar - _mean(prep, pbar)))


def ms_error_p(prep: Preparation, model: ErrorModel, xi_dist: XiDistribution) -> float:
    """Average of the squared error over rho and the law of xi."""
    w2 = error_profile(prep, model) ** 2
    if xi_dist.kind == "two_point":
        h = xi_dist.hbar
        return sum(0.5 * _mean(prep, model.gamma_of(x, h) ** 2 * w2) for x in (h, -h))
    return model.gamma_moment(2, xi_dist) * _mean(prep, w2)


def c_functional(prep: Preparation, lam: float) -> float:
    if lam == 0:
        return 0.0
    rho = prep.rho
    return 0.25 * prep.hbar**2 * _mean(prep, score(prep) ** 2 * (2 * lam * rho + lam**2 * rho**2))


def identity_ms_error_p(prep: Preparation, model: ErrorModel) -> Optional[float]:
    """hbar^2 J_q / 4 (+ C for the Lambda model); None where no identity is known."""
    if model.variant == "general_gamma":
        return None
    base = 0.25 * prep.hbar**2 * fisher_information(prep)
    return base + (c_functional(prep, model.lam) if model.variant == "lambda" else 0.0)


class PhaseSpaceMoments(NamedTuple):
    mean_q: float
    mean_p: float
    sigma_q2: float
    sigma_p2: float
    cross_term: float  # 2 Cov(mean error, estimator)


def phase_space_moments(prep: Preparation, model: ErrorModel,
                        xi_dist: XiDistribution) -> PhaseSpaceMoments:
    """Raw moments of the phase-space law: p = pbar(q) + gamma(xi) w(q), q ~ rho."""
    q = prep.grid.nodes
    pbar = estimator(prep).values
    w = error_profile(prep, model)
    g1 = model.gamma_moment(1, xi_dist)
    g2 = model.gamma_moment(2, xi_dist)
    m_q = _mean(prep, q)
    m_p = _mean(prep, pbar + g1 * w)
    s_q = _mean(prep, q * q) - m_q**2
    s_p = _mean(prep, pbar**2 + 2 * g1 * pbar * w + g2 * w**2) - m_p**2
    ebar = g1 * w
    cross = 2 * _mean(prep, (ebar - _mean(prep, ebar)) * (pbar - _mean(prep, pbar)))
    return PhaseSpaceMoments(m_q, m_p, s_q, s_p, cross)


def variances(prep: Preparation, model: ErrorModel, xi_dist: XiDistribution) -> tuple[float, float]:
    """(sigma_p^2, sigma_q^2) from phase-space moments, checked against the error decomposition."""
    direct = phase_space_moments(prep, model, xi_dist)
    e_p2 = identity_ms_error_p(prep, model)
    if e_p2 is None:
        e_p2 = ms_error_p(prep, model, xi_dist)
    via_identity_p = e_p2 + estimator_dispersion(prep) + direct.cross_term
    via_identity_q = ms_error_q(prep)
    for name, a, b in (("sigma_p2", direct.sigma_p2, via_identity_p),
                       ("sigma_q2", direct.sigma_q2, via_identity_q)):
        if abs(a - b) > VARIANCE_TOL * max(abs(b), 1e-300):
            raise ModelInconsistencyError(f"{name}: moments give {a!r}, identity gives {b!r}")
    return direct.sigma_p2, direct.sigma_q2


# -- quantum side -------------------------------------------------------------

class OracleMoments(NamedTuple):
    sigma_q2: float
    sigma_p2: float
    cov_qp: float
    mean_q: float
    mean_p: float
    commutator: complex  # <[q, p]>


def quantum_oracle(psi: WaveFunction, hbar: float) -> OracleMoments:
    g = psi.grid
    q = g.nodes
    re, im = psi.re, psi.im
    norm = g.integrate(psi.density)
    if abs(norm - 1.0) > ORACLE_NORM_TOL:
        raise ValueError(f"wave function is not normalized (norm {norm:.12g})")
    d_re, d_im = g.derivative(re), g.derivative(im)
    dd_re, dd_im = g.derivative(d_re), g.derivative(d_im)
    current = re * d_im - im * d_re  # Im(psi* psi')

    mean_q = g.integrate(q * psi.density)
    var_q = g.integrate(q * q * psi.density) - mean_q**2
    mean_p = hbar * g.integrate(current)
    p2 = -hbar**2 * g.integrate(re * dd_re + im * dd_im)
    anti_half = hbar * g.integrate(q * current)  # (1/2)<{q, p}>

    # <q p> - <p q>, each with -i hbar d/dq applied by finite differences
    qre, qim = q * re, q * im
    d_qre, d_qim = g.derivative(qre), g.derivative(qim)
    qp = -1j * hbar * g.integrate(re * q * d_re + im * q * d_im) \
        + hbar * g.integrate(re * q * d_im - im * q * d_re)
    pq = -1j * hbar * g.integrate(re * d_qre + im * d_qim) \
        + hbar * g.integrate(re * d_qim - im * d_qre)
    return OracleMoments(var_q, p2 - mean_p**2, anti_half - mean_q * mean_p,
                         mean_q, mean_p, complex(qp - pq))


# -- relations ------------------------------------------------------------------

class Relation(NamedTuple):
    lhs: float
    rhs: float
    slack: float

    @classmethod
    def of(cls, lhs, rhs):
        return cls(lhs, rhs, lhs - rhs)


@dataclass(frozen=True)
class UncertaintyReport:
    hbar: float
    model: str
    lam: float
    xi_kind: str
    E_p2: float
    E_q2: float
    J_q: float
    Delta_p2: float
    C: float
    sigma_p2: float
    sigma_q2: float
    q_mean: float
    p_mean: float
    cov_qp: float
    hk_lhs: float
    hk_rhs: float
    hk_rhs_final: float
    modified_hk_rhs: float
    sr_lhs: float
    sr_rhs: float
    ms_tradeoff: float  # E_p2 * E_q2
    cramer_rao_slack: float  # E_q2 - 1/J_q
    carryover_assumed: bool  # variance identities taken over to the Lambda model

    def to_record(self) -> dict:
        return asdict(self)

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def analyze(prep: Preparation, model: ErrorModel = ErrorModel(),
            xi_dist: Optional[XiDistribution] = None) -> UncertaintyReport:
    xi_dist = xi_dist or XiDistribution("two_point", prep.hbar)
    if xi_dist.hbar != prep.hbar:
        raise ValueError("xi law and preparation disagree on hbar")
    J = fisher_information(prep)
    E_q2 = ms_error_q(prep)
    E_p2 = ms_error_p(prep, model, xi_dist)
    D = estimator_dispersion(prep)
    C = c_functional(prep, model.lam) if model.variant == "lambda" else 0.0
    s_p2, s_q2 = variances(prep, model, xi_dist)
    cov = estimator_covariance(prep)
    h2 = 0.25 * prep.hbar**2
    lhs = s_p2 * s_q2
    return UncertaintyReport(
        hbar=prep.hbar, model=model.variant, lam=model.lam, xi_kind=xi_dist.kind,
        E_p2=E_p2, E_q2=E_q2, J_q=J, Delta_p2=D, C=C,
        sigma_p2=s_p2, sigma_q2=s_q2,
        q_mean=mean_position(prep), p_mean=mean_estimator(prep), cov_qp=cov,
        hk_lhs=lhs, hk_rhs=h2 + D * E_q2, hk_rhs_final=h2,
        modified_hk_rhs=h2 + D * E_q2 + C / J,
        sr_lhs=lhs, sr_rhs=h2 + cov**2,
        ms_tradeoff=E_p2 * E_q2, cramer_rao_slack=E_q2 - 1.0 / J,
        carryover_assumed=model.variant == "lambda",
    )


def hk_relation(report: UncertaintyReport, final: bool = False) -> Relation:
    return Relation.of(report.hk_lhs, report.hk_rhs_final if final else report.hk_rhs)


def modified_hk(report: UncertaintyReport) -> Relation:
    return Relation.of(report.hk_lhs, report.modified_hk_rhs)


class SchrodingerRobertson(NamedTuple):
    lhs: float
    rhs_commutator: float
    rhs_full: float
    slack: float
    commutator: complex
    robertson_leg: Relation  # E_p2 E_q2 >= hbar^2/4
    covariance_leg: Relation  # Delta_p2 E_q2 >= cov^2


def schrodinger_robertson(prep: Preparation, model: ErrorModel = ErrorModel(),
                          xi_dist: Optional[XiDistribution] = None) -> SchrodingerRobertson:
    if model.variant != "standard":
        raise ValueError("the Schrodinger-Robertson chain is derived for the Standard model")
    rep = analyze(prep, model, xi_dist)
    orc = quantum_oracle(wave_function(prep), prep.hbar)
    rhs_comm = 0.25 * abs(orc.commutator) ** 2
    rhs_full = rhs_comm + rep.cov_qp**2
    return SchrodingerRobertson(
        lhs=rep.sr_lhs, rhs_commutator=rhs_comm, rhs_full=rhs_full,
        slack=rep.sr_lhs - rhs_full, commutator=orc.commutator,
        robertson_leg=Relation.of(rep.E_p2 * rep.E_q2, 0.25 * prep.hbar**2),
        covariance_leg=Relation.of(rep.Delta_p2 * rep.E_q2, rep.cov_qp**2),
    )
