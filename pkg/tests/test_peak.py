import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpbdisc.errors import CapTooSmallError, OutsideDiscError
from bpbdisc.peak import (
    choose_eps1_n0,
    eval_h,
    gamma_min,
    make_eta,
    make_g1,
    project_polynomial,
    validate_eta,
)
from bpbdisc.stolz import delta1, stolz_value

theta_st = st.floats(-math.pi, math.pi)


def build(cmap, theta0=0.7, delta2=0.3):
    g1 = make_g1(theta0)
    bump = choose_eps1_n0(gamma_min(g1, delta2), delta1(cmap), delta2=delta2, theta0=theta0)
    return make_eta(cmap.eps, theta0, cmap, bump)


def test_g1_examples():
    g = make_g1(0.7)
    assert g(np.exp(0.7j)) == 0
    assert abs(g(-np.exp(0.7j)) + 1) < 1e-15
    assert g(0) == -0.5


@given(theta_st, st.floats(0, 1), st.floats(-math.pi, math.pi))
def test_g1_real_part_nonpositive(theta0, r, t):
    assert make_g1(theta0)(r * np.exp(1j * t)).real <= 0


@pytest.mark.parametrize("delta2, gamma", [(2.0, 1.0), (0.2, 0.01), (5.0, 1.0)])
def test_gamma_examples(delta2, gamma):
    assert gamma_min(make_g1(0.3), delta2) == pytest.approx(gamma, rel=1e-14)


@given(theta_st, st.floats(0.01, 2.0), st.integers(0, 2**31))
@settings(max_examples=40)
def test_gamma_is_lower_bound_off_cap(theta0, delta2, seed):
    g = make_g1(theta0)
    gamma = gamma_min(g, delta2)
    rng = np.random.default_rng(seed)
    z = np.sqrt(rng.uniform(size=10_000)) * np.exp(2j * np.pi * rng.uniform(size=10_000))
    z = np.concatenate([z, np.exp(2j * np.pi * np.arange(10_000) / 10_000)])
    off = np.abs(z - g.point) >= delta2
    assert np.all(-g(z[off]).real >= gamma * (1 - 1e-12))


def test_gamma_rejects_empty_cap():
    with pytest.raises(CapTooSmallError):
        gamma_min(make_g1(0.0), 0.0)


def test_eps1_n0_example():
    b = choose_eps1_n0(1.0, 0.5)
    assert b.eps1 == pytest.approx(0.25)
    assert b.n0 == 2


@given(st.floats(1e-4, 1.0), st.floats(1e-3, 0.99))
def test_eps1_n0_construction(gamma, d1):
    try:
        b = choose_eps1_n0(gamma, d1)
    except CapTooSmallError:
        return
    assert b.log_eps1 * gamma == pytest.approx(math.log(d1 / 2), rel=1e-12)
    assert -b.n0 < b.log_eps1
    assert -(b.n0 - 1) >= b.log_eps1


def test_n0_guard():
    with pytest.raises(CapTooSmallError):
        choose_eps1_n0(1e-8, 0.01)


@pytest.fixture(scope="module")
def eta03(cmap_factory):
    return build(cmap_factory(0.3))


def test_h_properties(eta03):
    b, g = eta03.bump, eta03.peak
    assert eval_h(b, g, g.point) == 1
    rng = np.random.default_rng(0)
    z = np.sqrt(rng.uniform(size=5000)) * np.exp(2j * np.pi * rng.uniform(size=5000))
    assert np.all(np.abs(eval_h(b, g, z)) <= 1)
    t = 2 * np.pi * np.arange(8192) / 8192
    zz = np.concatenate([np.exp(1j * t), z])
    off = np.abs(zz - g.point) >= b.delta2
    assert np.all(np.abs(eval_h(b, g, zz[off])) < b.delta1)


@pytest.mark.parametrize("eps", [0.1, 0.3, 0.6])
def test_eta_properties(cmap_factory, eps):
    eta = build(cmap_factory(eps))
    assert abs(eta(eta.peak.point) - 1) <= 1e-8
    report = validate_eta(eta)
    for key in ("peak_value_error", "stolz_max", "sup_modulus", "off_cap_max_modulus"):
        assert report[key]["ok"], (key, report[key])
    assert report["n_off_cap"] > 10_000


@given(st.floats(0, 2 * math.pi), st.floats(0, 1))
@settings(max_examples=200)
def test_eta_pointwise_stolz(eta03, t, r):
    v = eta03(r * np.exp(1j * t))
    assert stolz_value(0.3, v) <= 1 + 1e-6


def test_eta_near_peak_continuous(eta03):
    th = eta03.peak.theta0
    for h in (1e-3, 1e-6, 1e-9, 1e-12):
        v = eta03(np.exp(1j * (th + h)))
        assert abs(v - 1) < 10 * (eta03.bump.n0 * h) ** eta03.cmap.alpha + 1e-9


def test_eta_checks_disc(eta03):
    with pytest.raises(OutsideDiscError):
        eta03(1.01)


def test_polynomial_projection_error_shrinks(eta03):
    _, e1 = project_polynomial(eta03, 32)
    _, e2 = project_polynomial(eta03, 256)
    assert e2 < e1
