import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzylip import (
    Clamp,
    ConstructionError,
    DomainError,
    EuclideanFuzzyMetric,
    HFunction,
    InvalidMetricError,
    Linear,
    PiecewiseLinear,
    TNorm,
    TimeScaling,
    efm_eval,
    make_exp_space,
    make_mk_space,
    n_e,
    validate_fuzzy_metric,
    validate_remark1,
)
from fuzzylip.fuzzy_metric import EuclideanSpace, TabulatedSpace, validate_metric_matrix

from instances import random_metric


def test_n_e_values():
    ne = n_e()
    assert efm_eval(ne, 0.0, 0.4, 3.0) == pytest.approx(0.8, abs=1e-15)
    assert efm_eval(ne, 0.0, 7.0, 0.1) == 0.5
    assert efm_eval(ne, 2.5, 2.5, 1.0) == 1.0


def test_negative_membership_is_an_error():
    efm = EuclideanFuzzyMetric(Linear(1.0))
    with pytest.raises(InvalidMetricError) as err:
        efm_eval(efm, 0.0, 3.0, 1.0)
    assert err.value.witness == (0.0, 3.0, 1.0)


def test_t_must_be_positive():
    with pytest.raises(DomainError):
        efm_eval(n_e(), 0.0, 1.0, 0.0)


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50), st.floats(1e-3, 1e3))
def test_efm_symmetric_and_translation_invariant(x, y, c, t):
    ne = n_e()
    assert efm_eval(ne, x, y, t) == efm_eval(ne, y, x, t)
    # exact when the shift leaves |x - y| unchanged in floating point
    if abs((x + c) - (y + c)) == abs(x - y):
        assert efm_eval(ne, x + c, y + c, t) == efm_eval(ne, x, y, t)


def test_codomain_conditions_passes_for_n_e():
    rep = validate_remark1(n_e())
    assert rep.passed, rep.to_dict()


def test_codomain_conditions_g_bound_failure():
    efm = EuclideanFuzzyMetric(Clamp(1.0, 1.0), TimeScaling(constant=2.0))
    rep = validate_remark1(efm)
    assert rep.failures() == ["g_bound"]
    w = rep.checks["g_bound"].witness
    assert w["value"] == 2.0 and w["bound"] == 1.0


def test_codomain_conditions_phi_zero_failure():
    efm = EuclideanFuzzyMetric(PiecewiseLinear(((0.0, 0.1), (1.0, 0.5))))
    rep = validate_remark1(efm)
    assert not rep.checks["phi_zero"].passed
    assert rep.checks["phi_zero"].witness["x"] == 0.0


def test_codomain_conditions_unbounded_phi():
    rep = validate_remark1(EuclideanFuzzyMetric(Linear(0.5)))
    assert not rep.checks["phi_bounded"].passed


def test_codomain_conditions_phi_vanishing_off_zero():
    efm = EuclideanFuzzyMetric(PiecewiseLinear(((0.0, 0.0), (1.0, 0.0), (2.0, 0.5))))
    rep = validate_remark1(efm, distances=[0.5, 1.5])
    assert rep.checks["phi_zero"].witness["x"] == 0.5


def test_mk_membership_value():
    d = np.array([[0.0, 3.0], [3.0, 0.0]])
    sp = make_mk_space(d, 1.0, HFunction("affine", 2.0, 1.0))
    # 1 - min(3, 1) / (2 + 1)
    assert sp.membership(0, 1, 1.0) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert sp.membership(0, 0, 1.0) == 1.0
    with pytest.raises(DomainError):
        sp.membership(0, 1, 0.0)


def test_mk_rejects_h_below_k():
    d = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ConstructionError):
        make_mk_space(d, 2.0, HFunction("affine", 1.0, 1.0))


def test_exp_space_values():
    d = np.array([[0.0, math.log(2.0)], [math.log(2.0), 0.0]])
    sp = make_exp_space(d)
    for t in (0.01, 1.0, 100.0):
        assert sp.membership(0, 1, t) == pytest.approx(0.5, abs=1e-15)
        assert sp.membership(1, 1, t) == 1.0
    assert sp.derived_metric()[0, 1] == pytest.approx(0.5, abs=1e-15)
    assert sp.tnorm is TNorm.PRODUCT and sp.stationary


@pytest.mark.parametrize(
    "d",
    [
        [[0, 1], [2, 0]],
        [[1, 1], [1, 0]],
        [[0, 1, 5], [1, 0, 1], [5, 1, 0]],
        [[0, -1], [-1, 0]],
        [],
    ],
)
def test_metric_matrix_validation(d):
    with pytest.raises(ConstructionError):
        validate_metric_matrix(d)


def test_mk_space_is_fuzzy_metric():
    rng = np.random.default_rng(3)
    sp = make_mk_space(random_metric(rng, 3), 1.0, HFunction("affine", 1.0, 1.0))
    rep = validate_fuzzy_metric(sp)
    assert rep.passed, rep.to_dict()


def test_exp_space_is_fuzzy_metric():
    rng = np.random.default_rng(4)
    rep = validate_fuzzy_metric(make_exp_space(random_metric(rng, 6)))
    assert rep.passed, rep.to_dict()


def test_euclidean_space_is_fuzzy_metric():
    sp = EuclideanSpace([0.0, 0.3, 1.1, 4.0], EuclideanFuzzyMetric(Clamp(2.0, 1.0), tnorm=TNorm.LUKASIEWICZ))
    assert validate_fuzzy_metric(sp).passed


def test_symmetry_failure_has_witness():
    m = np.array([[1.0, 0.9, 0.8], [0.7, 1.0, 0.9], [0.8, 0.9, 1.0]])
    rep = validate_fuzzy_metric(TabulatedSpace([m], "min"))
    assert not rep.checks["symmetry"].passed
    w = rep.checks["symmetry"].witness
    assert {w["i"], w["j"]} == {0, 1}


def test_validation_needs_two_points():
    with pytest.raises(DomainError):
        validate_fuzzy_metric(TabulatedSpace([[[1.0]]], "min"))


def test_tabulated_space_steps_in_t():
    a = np.array([[1.0, 0.5], [0.5, 1.0]])
    b = np.array([[1.0, 0.8], [0.8, 1.0]])
    sp = TabulatedSpace([a, b], "min", [0.0, 1.0])
    assert sp.membership(0, 1, 0.5) == 0.5
    assert sp.membership(0, 1, 1.0) == 0.8
    assert not sp.stationary


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 10))
def test_presets_pass_exhaustive_validation(seed, n):
    rng = np.random.default_rng(seed)
    d = random_metric(rng, n)
    grid = list(np.geomspace(1e-3, 1e3, 10))
    k = float(rng.uniform(0.2, 3.0))
    mk = make_mk_space(d, k, HFunction("affine", k + 0.01, float(rng.uniform(0.1, 3.0))), grid)
    assert validate_fuzzy_metric(mk, grid, grid).passed
    ex = make_exp_space(d)
    assert validate_fuzzy_metric(ex, grid, grid).passed


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 10))
def test_exp_space_stationary_and_derived_metric(seed, n):
    rng = np.random.default_rng(seed)
    sp = make_exp_space(random_metric(rng, n))
    base = sp.membership_matrix(1.0)
    for t in np.geomspace(1e-3, 1e3, 20):
        assert np.array_equal(sp.membership_matrix(t), base)
    dm = sp.derived_metric()
    assert np.all(np.diag(dm) == 0)
    assert np.array_equal(dm, dm.T)
    off = dm[~np.eye(n, dtype=bool)]
    assert np.all(off > 0)
    via = dm[:, :, None] + dm[None, :, :]
    assert np.all(dm[:, None, :] <= via + 1e-15)
