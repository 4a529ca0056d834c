import math

import pytest
from hypothesis import given, strategies as st

from susdswarm.theory import (
    BoundParams,
    epsilon_d,
    epsilon_star,
    mu1_bound,
    mu2_agent_bound,
    mu2_bound,
    ultimate_bound_incomplete,
    ultimate_bound_strip,
)

pos = st.floats(0.01, 10.0)
unit = st.floats(0.01, 0.99)


def test_epsilon_d_unit_inputs():
    assert epsilon_d(0.5, 1, 1, 1, 1, 1) == 2.0


@given(unit, pos, pos, pos, pos, pos)
def test_epsilon_d_formula(d, mu1, mu2, chi1, chi2, k1):
    expect = 2 * (1 - d) * mu1 * chi1**3 / (d * k1 * mu2**2 * chi2**2)
    assert epsilon_d(d, mu1, mu2, chi1, chi2, k1) == pytest.approx(expect, rel=1e-12)


def test_epsilon_star_ell_scaling_is_exact():
    base = epsilon_star(0.5, 1.0, 1.0, 1.0, 1.0, 1.0, ell=1.0)
    assert epsilon_star(0.5, 1.0, 1.0, 1.0, 1.0, 1.0, ell=2.0) == base / 8
    assert base == 2.0


@given(pos, unit)
def test_strip_bound_without_traversal(nu_bar, eps3):
    assert ultimate_bound_strip(1.3, 0.0, nu_bar, eps3) == nu_bar / eps3**2


def test_strip_bound_with_traversal():
    v = ultimate_bound_strip(2.0, 0.5, 0.1, 0.8)
    assert v == pytest.approx((2 * 0.1 + 0.5 * 0.6) / (2 * 0.64))


def test_incomplete_bound():
    assert ultimate_bound_incomplete(0.2, 0.3, 0.5, 4) == pytest.approx(2.0)


@given(st.floats(-5, 5), unit, pos, st.floats(0.0, 1.0), st.floats(-3, 3), pos, pos)
def test_mu1_is_positive_root(vartheta, eps1, lq, ratio, z_a, hn, k1):
    ln = ratio * lq
    mu = mu1_bound(vartheta, eps1, lq, ln, z_a, 0.0, k1, 0.5, hn)
    # eps1 lq mu^2 - |vartheta| mu - gap (|z_a| + k2/k1) |H| = 0
    c = (lq - ln) * (abs(z_a) + 0.5 / k1) * hn
    assert eps1 * lq * mu * mu - abs(vartheta) * mu - c == pytest.approx(0.0, abs=1e-8 * max(1.0, c, abs(vartheta) * mu))
    assert mu >= 0.0


def test_mu2_is_minimum_over_agents():
    a = dict(vartheta_plus_mismatch=0.1, eps2=0.5, lambda_q=1.0, lambda_n=0.2, z_a=2.0, hessian_norm=2.0)
    b = dict(a, z_a=0.5)
    assert mu2_bound([a, b]) == mu2_agent_bound(**b)
    assert mu2_agent_bound(**b) < mu2_agent_bound(**a)
    with pytest.raises(ValueError):
        mu2_bound([])


@pytest.mark.parametrize("bad", [dict(d=0.0), dict(eps1=1.0), dict(ell=0.5), dict(chi1=2.0, chi2=1.0), dict(eps3=1.0)])
def test_bound_params_validation(bad):
    with pytest.raises(ValueError):
        BoundParams(**bad)


def test_bound_argument_validation():
    with pytest.raises(ValueError):
        epsilon_d(1.0, 1, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        epsilon_star(0.5, 1, 1, 1, 1, 1, ell=0.9)
    with pytest.raises(ValueError):
        ultimate_bound_strip(1.0, 0.0, 0.1, 0.0)
    with pytest.raises(ValueError):
        mu1_bound(0.0, 0.5, 1.0, 2.0, 0.0, 0.0, 1.0, 0.0, 1.0)
    assert math.isfinite(mu1_bound(0.0, 0.5, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0))
