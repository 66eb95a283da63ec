import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_pair
from haarenergy.bounds import (
    BoundContext,
    admissible_t_max,
    d_coefficient,
    d_coefficient_exact,
    f_general,
    f_general_terms,
    f_pure,
    leading_order,
    mgf_bound,
    mgf_bound_grid,
    mgf_bound_terms,
    moment_bound_holds,
    moment_bound_rhs,
    moment_bounds,
    n_star,
    pole_t,
    scaling_factor_G,
    t_window,
    validity_p_max,
)
from haarenergy.errors import ConditionError
from haarenergy.moments import central_moment, gaussian_moment, moment_report, variance
from haarenergy.spectral import fig1_spectra
from haarenergy.weingarten import weingarten_class_sum


def _ctx(d=25, sigma2=0.1, eta=0.2, de=2.0, pure=False):
    return BoundContext(d=d, sigma2=sigma2, eta=eta, delta_e_max=de, purity_flag=pure)


# --- moment-level bound ------------------------------------------------------


def test_f_pure_examples():
    assert f_pure(100, 4, 0.01) == pytest.approx(0.06, abs=1e-12)
    assert f_pure(50, 2, 0.3) == 0.0
    # odd p: sqrt(eta) * ceil(3!/e) / 2!! = 0.2 * 3 / 2
    assert f_pure(10, 3, 0.04) == pytest.approx(0.3, abs=1e-12)


def test_f_pure_rejects_p1():
    with pytest.raises(ConditionError):
        f_pure(10, 1, 0.1)


def test_d_coefficient_example_and_identity():
    assert d_coefficient(10, 4) == pytest.approx(0.70513, abs=5e-6)
    for d in range(2, 12):
        for p in (2, 4, 6):
            expect = abs(weingarten_class_sum(p, d)) * Fraction(d * (d + 1)) ** (p // 2)
            assert d_coefficient_exact(d, p) == expect


def test_d_coefficient_below_one_and_decreasing_in_p():
    for d in (5, 20, 100):
        assert d_coefficient(d, 1) == pytest.approx(math.sqrt((d + 1) / d))
        assert d_coefficient_exact(d, 2) == 1
        vals = [d_coefficient(d, p) for p in range(2, 8)]
        assert all(0 < v <= 1 for v in vals)
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


def test_validity_and_nstar_tables():
    assert [validity_p_max(d) for d in (4, 9, 16, 25, 36, 49)] == [1, 2, 2, 3, 4, 5]
    assert n_star(4) == 1 and n_star(7) == 1 and n_star(49) == 4


@pytest.mark.parametrize("d", range(1, 400))
def test_validity_matches_float_formula(d):
    # away from exact ties the float expression agrees with the integer search
    a = (d / math.sqrt(6)) ** (4 / 7)
    b = (d / (2 * math.sqrt(3))) ** (4 / 7)
    if abs(a - round(a)) > 1e-9:
        assert validity_p_max(d) == min(math.isqrt(d), math.floor(a))
    if abs(b - round(b)) > 1e-9:
        assert n_star(d) == min(math.isqrt(d), math.floor(b))


def test_f_general_decomposition():
    for d in (36, 49, 100, 400):
        for p in range(2, validity_p_max(d) + 1):
            eta = 0.07
            terms = f_general_terms(d, p, eta)
            assert terms.total == pytest.approx(f_general(d, p, eta), rel=1e-15)
            if p % 2:
                assert terms.upper == terms.lower == 0.0
                assert terms.eta_factor == pytest.approx(math.sqrt(eta))
            else:
                assert terms.upper > 0 and terms.lower > 0
                assert terms.eta_factor == eta


def test_f_general_outside_validity():
    with pytest.raises(ConditionError):
        f_general(9, 3, 0.1)
    with pytest.raises(ConditionError):
        f_general(100, 1, 0.1)


def test_context_validation():
    with pytest.raises(ConditionError):
        _ctx(eta=1.5)
    with pytest.raises(ConditionError):
        _ctx(d=2, eta=1e-6)
    with pytest.raises(ConditionError):
        _ctx(sigma2=-1)


def test_scaling_factor_matches_gaussian_moment():
    ctx = _ctx()
    for p in (2, 4, 6):
        assert scaling_factor_G(p, ctx) == pytest.approx(gaussian_moment(p, ctx.sigma2))


def test_fig1_has_no_admissible_order():
    rho, h = fig1_spectra()
    table = moment_bounds(BoundContext.from_spectra(rho, h), 4)
    assert table.no_admissible_p and "no admissible p" in table.reason
    assert all(r.bound_rhs is None for r in moment_report(rho, h, 4).rows)


@pytest.mark.parametrize("d", [9, 16, 25])
def test_general_bound_sweep(d, rng):
    for _ in range(12):
        rho, h = random_pair(rng, d)
        ctx = BoundContext.from_spectra(rho, h)
        s2 = variance(rho, h)
        for p in range(2, validity_p_max(d) + 1):
            exact = central_moment(rho, h, p)
            g = scaling_factor_G(p, ctx)
            assert moment_bound_holds(exact, gaussian_moment(p, s2), moment_bound_rhs(p, ctx), g)


@pytest.mark.parametrize("d", [4, 6, 9, 12])
def test_pure_bound_sweep(d, rng):
    for _ in range(12):
        rho, h = random_pair(rng, d, pure=True)
        ctx = BoundContext.from_spectra(rho, h)
        s2 = variance(rho, h)
        for p in range(2, min(d, 6) + 1):
            exact = central_moment(rho, h, p)
            g = scaling_factor_G(p, ctx)
            assert moment_bound_holds(exact, gaussian_moment(p, s2), moment_bound_rhs(p, ctx), g)


def test_moment_bound_holds_slack_is_relative():
    assert moment_bound_holds(1.0 + 1e-12, 1.0, 0.0, 1.0)
    assert not moment_bound_holds(1.0 + 1e-6, 1.0, 0.0, 1.0)


# --- generating-function bound ------------------------------------------------


def test_mgf_zero_at_origin():
    assert mgf_bound(0.0, _ctx()) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 0.95))
def test_mgf_even_in_t(frac):
    ctx = _ctx()
    t = frac * admissible_t_max(ctx)
    assert mgf_bound(t, ctx) == mgf_bound(-t, ctx)


def test_mgf_monotone_in_t():
    ctx = _ctx()
    grid = mgf_bound_grid(ctx, 40)
    vals = [mgf_bound(t, ctx) for t in grid]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert grid[-1] == pytest.approx(0.95 * admissible_t_max(ctx))


def test_mgf_pole_and_window():
    # small eta*sigma2 keeps the pole outside; large makes it bind first
    ctx = _ctx(d=400, sigma2=0.5, eta=0.9, de=0.1)
    assert pole_t(ctx) < t_window(ctx)
    with pytest.raises(ConditionError, match="pole"):
        mgf_bound_terms(pole_t(ctx) * 1.0001, ctx)
    ctx = _ctx(d=25, sigma2=0.01, eta=0.05, de=5.0)
    assert t_window(ctx) == pytest.approx(n_star(25) / 5.0)
    with pytest.raises(ConditionError, match="window"):
        mgf_bound(t_window(ctx) * 1.01, ctx)


def test_mgf_window_branches():
    ctx = _ctx(d=49, sigma2=4.0, de=0.5)
    assert t_window(ctx) == pytest.approx(math.sqrt(n_star(49)) / 2.0)
    ctx = _ctx(d=49, sigma2=0.01, de=10.0)
    assert t_window(ctx) == pytest.approx(n_star(49) / 10.0)


def test_mgf_tail_leading_order():
    rho, h = fig1_spectra()
    ctx = BoundContext.from_spectra(rho, h)
    for x in (0.001, 0.01, 0.05):
        t = x / math.sqrt(ctx.sigma2)
        tail = mgf_bound_terms(t, ctx).tail
        assert tail == pytest.approx(leading_order(t, ctx), rel=0.2)
    t = 0.001 / math.sqrt(ctx.sigma2)
    assert mgf_bound_terms(t, ctx).tail / leading_order(t, ctx) == pytest.approx(1.0, abs=0.01)


def test_mgf_terms_non_negative():
    ctx = _ctx()
    for t in mgf_bound_grid(ctx, 25):
        terms = mgf_bound_terms(t, ctx)
        for v in (terms.gaussian_excess, terms.finite_d, terms.tail, terms.low_order, terms.range_term):
            assert v >= 0


def test_mgf_grid_degenerate():
    ctx = BoundContext(d=4, sigma2=0.0, eta=1.0, delta_e_max=0.0)
    with pytest.raises(ConditionError):
        mgf_bound_grid(ctx, 5)
