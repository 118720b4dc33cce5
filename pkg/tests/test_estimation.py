import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uncertainty_lab.corpus import CORPUS_GRID, PRODUCT_GRID
from uncertainty_lab.estimation import (ErrorModel, XiDistribution, bipartite_error_field,
                                        bipartite_estimator, error_field, estimator,
                                        momentum_field, score, weak_unbiasedness)
from uncertainty_lab.preparation import (GaussianSpec as G, Preparation, build_gaussian,
                                         build_product, build_superposition)

MODELS = [ErrorModel.standard(), ErrorModel.general_gamma("half"),
          ErrorModel.general_gamma("cubic"), ErrorModel.lambda_modified(1.0)]
specs = st.builds(G, q0=st.floats(-2, 2), sigma=st.floats(0.5, 1.4), p0=st.floats(-3, 3),
                  c=st.floats(-2, 2))


@pytest.fixture(scope="module")
def unit():
    return build_gaussian(G(), CORPUS_GRID)


@pytest.fixture(scope="module")
def cat():
    return build_superposition([(1.0, G(-3.0, 1.0)), (1.0, G(3.0, 1.0))], CORPUS_GRID)


# -- xi -------------------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["two_point", "gaussian", "uniform"])
@pytest.mark.parametrize("hbar", [1.0, 0.5])
def test_xi_moments(kind, hbar):
    xi = XiDistribution(kind, hbar).sample(np.random.default_rng(2024), 10**6)
    assert abs(xi.mean()) <= 5 * hbar / 1e3
    assert abs(xi.var() - hbar**2) <= 5 * np.sqrt(2) * hbar**2 / 1e3


@pytest.mark.parametrize("kind", ["two_point", "gaussian", "uniform"])
def test_xi_exact_moments(kind):
    d = XiDistribution(kind, 1.3)
    assert d.raw_moment(1) == 0 and d.raw_moment(3) == 0
    assert d.raw_moment(2) == pytest.approx(1.3**2, rel=1e-15)
    fourth = {"two_point": 1.0, "gaussian": 3.0, "uniform": 9 / 5}[kind]
    assert d.raw_moment(4) == pytest.approx(fourth * 1.3**4, rel=1e-14)


def test_two_point_support():
    xi = XiDistribution("two_point", 0.7).sample(np.random.default_rng(0), 1000)
    assert set(np.unique(xi)) == {-0.7, 0.7}


def test_bad_laws_and_models():
    with pytest.raises(ValueError):
        XiDistribution("cauchy")
    with pytest.raises(ValueError):
        XiDistribution("gaussian", 0.0)
    with pytest.raises(ValueError):
        ErrorModel("quadratic")
    with pytest.raises(ValueError):
        ErrorModel("standard", lam=1.0)
    with pytest.raises(ValueError):
        ErrorModel.general_gamma("even")


# -- estimator ------------------------------------------------------------------------

def test_estimator_of_zero_phase(unit):
    assert np.all(estimator(unit).values == 0)


def test_estimator_of_linear_phase():
    prep = build_gaussian(G(0.0, 1.0, p0=3.0), CORPUS_GRID)
    assert np.max(np.abs(estimator(prep).values - 3.0)) <= 1e-12


def test_estimator_of_chirp():
    prep = build_gaussian(G(0.5, 1.0, c=2.0), CORPUS_GRID)
    q = CORPUS_GRID.nodes
    assert np.max(np.abs(estimator(prep).values - 2 * (q - 0.5))) <= 1e-10


# -- error fields -----------------------------------------------------------------------

@pytest.mark.parametrize("model", MODELS)
def test_zero_xi_gives_zero_error(unit, model):
    assert np.all(error_field(unit, model, 0.0).values == 0)


def test_standard_error_of_unit_gaussian(unit):
    eps = error_field(unit, ErrorModel(), 1.0).values
    sup = unit.support
    assert np.max(np.abs(eps[sup] + CORPUS_GRID.nodes[sup] / 2)) <= 1e-8
    assert np.all(eps[~sup] == 0)


def test_lambda_zero_is_standard(unit, cat):
    for prep in (unit, cat):
        a = error_field(prep, ErrorModel(), 1.0).values
        b = error_field(prep, ErrorModel.lambda_modified(0.0), 1.0).values
        assert np.max(np.abs(a - b)) <= 1e-15


def test_half_gamma_is_standard(cat):
    a = error_field(cat, ErrorModel(), -1.0).values
    b = error_field(cat, ErrorModel.general_gamma("half"), -1.0).values
    assert np.array_equal(a, b)


def test_cubic_gamma():
    m = ErrorModel.general_gamma("cubic")
    assert m.gamma_of(2.0, 2.0) == pytest.approx(8 / 8)
    assert m.gamma_moment(2, XiDistribution("two_point", 1.0)) == pytest.approx(0.25)
    assert m.gamma_moment(2, XiDistribution("gaussian", 1.0)) == pytest.approx(15 / 4)


def test_lambda_error_matches_closed_form(unit):
    lam = 2.0
    eps = error_field(unit, ErrorModel.lambda_modified(lam), 1.0).values
    q, rho = CORPUS_GRID.nodes, unit.rho
    sup = unit.support
    want = 0.5 * (-q) * (1 + lam * rho)
    assert np.max(np.abs(eps[sup] - want[sup])) <= 1e-8


# -- momentum fields --------------------------------------------------------------------

def test_momentum_at_zero_xi_is_estimator(cat):
    prep = build_gaussian(G(0.0, 0.7, p0=1.0, c=-1.5), CORPUS_GRID)
    assert np.array_equal(momentum_field(prep, ErrorModel(), 0.0).values, estimator(prep).values)


def test_two_point_average_is_estimator():
    prep = build_gaussian(G(0.0, 0.7, p0=1.0, c=-1.5), CORPUS_GRID)
    plus = error_field(prep, ErrorModel(), 1.0).values
    minus = error_field(prep, ErrorModel(), -1.0).values
    assert np.all(plus + minus == 0)
    avg = 0.5 * (momentum_field(prep, ErrorModel(), 1.0).values
                 + momentum_field(prep, ErrorModel(), -1.0).values)
    pbar = estimator(prep).values
    assert np.max(np.abs(avg - pbar)) <= 4 * np.finfo(float).eps * np.abs(pbar).max()


@pytest.mark.parametrize("factor", [1.0, 3.0, 10.0])
def test_classical_limit_ratio(factor):
    sigma = 1.0
    p0 = factor * 1e3 / sigma
    prep = build_gaussian(G(0.0, sigma, p0=p0), CORPUS_GRID)
    q = CORPUS_GRID.nodes
    central = np.abs(q) <= 3 * sigma
    ratio = np.abs(error_field(prep, ErrorModel(), 1.0).values) / np.abs(estimator(prep).values)
    assert ratio[central].max() <= 1e-2 / factor


# -- weak unbiasedness ------------------------------------------------------------------

@given(specs, st.sampled_from([1.0, -1.0]))
def test_standard_is_weakly_unbiased(spec, xi):
    prep = build_gaussian(spec, CORPUS_GRID)
    assert abs(weak_unbiasedness(prep, ErrorModel(), xi)) <= 1e-8


def test_lambda_is_weakly_unbiased_on_cat(cat):
    for xi in (1.0, -1.0):
        assert abs(weak_unbiasedness(cat, ErrorModel.lambda_modified(5.0), xi)) <= 1e-7


def test_zero_xi_is_exactly_unbiased(cat):
    for m in MODELS:
        assert weak_unbiasedness(cat, m, 0.0) == 0.0


# -- gauge covariance --------------------------------------------------------------------

@given(specs, st.floats(-50, 50))
def test_constant_action_shift(spec, shift):
    prep = build_gaussian(spec, CORPUS_GRID)
    moved = Preparation(prep.grid, prep.S + shift, prep.rho, prep.hbar)
    tol = 1e-13 * (1 + abs(shift) + np.abs(prep.S).max()) / CORPUS_GRID.h
    assert np.max(np.abs(estimator(moved).values - estimator(prep).values)) <= tol
    assert np.array_equal(error_field(moved, ErrorModel(), 1.0).values,
                          error_field(prep, ErrorModel(), 1.0).values)


@given(specs, st.floats(-5e-7, 5e-7))
def test_log_density_shift(spec, delta):
    prep = build_gaussian(spec, CORPUS_GRID)
    scaled = Preparation(prep.grid, prep.S, prep.rho * np.exp(delta), prep.hbar)
    sup = prep.support
    assert np.max(np.abs(score(scaled)[sup] - score(prep)[sup])) <= 1e-9


# -- bipartite ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def gauss_pair():
    a = build_gaussian(G(), PRODUCT_GRID)
    return build_product(a, a)


def spread_along(values, support, j):
    """Largest max - min along the other coordinate, over rows that meet the support."""
    other = 2 - j
    hi = np.where(support, values, -np.inf).max(axis=other)
    lo = np.where(support, values, np.inf).min(axis=other)
    ok = support.any(axis=other)
    return float((hi - lo)[ok].max())


def test_standard_errors_are_local(products):
    for prod in products.values():
        for j in (1, 2):
            eps = bipartite_error_field(prod, ErrorModel(), 1.0, j).values
            assert spread_along(eps, prod.support, j) <= 1e-12


def test_lambda_errors_leak(gauss_pair):
    eps = bipartite_error_field(gauss_pair, ErrorModel.lambda_modified(1.0), 1.0, 1).values
    sup = gauss_pair.support
    assert spread_along(eps, sup, 1) > 0.01 * np.abs(eps[sup]).max()


def test_lambda_zero_bipartite_is_standard(products):
    prod = products["skew-two*gauss-narrow-boosted"]
    for j in (1, 2):
        a = bipartite_error_field(prod, ErrorModel(), -1.0, j).values
        b = bipartite_error_field(prod, ErrorModel.lambda_modified(0.0), -1.0, j).values
        assert np.array_equal(a, b)


def test_bipartite_estimator_is_marginal_estimator(products):
    prod = products["chirp-boosted*skew-boosted"]
    for j, part in ((1, prod.parts[0]), (2, prod.parts[1])):
        d = bipartite_estimator(prod, j).values
        want = estimator(part).values
        want = want[:, None] if j == 1 else want[None, :]
        assert np.max(np.abs(d - want)) <= 1e-10


def test_bad_component(gauss_pair):
    with pytest.raises(ValueError):
        bipartite_estimator(gauss_pair, 3)
