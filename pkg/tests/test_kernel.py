import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vssph.kernel import KernelFamily, KernelSpec, make_kernel, stability_table

FAMILIES = [f.value for f in KernelFamily]


def unit_quartic(delta=0.4):
    return KernelSpec("proposed_quartic", h=1.0, delta=delta)


def test_proposed_quartic_values():
    k = unit_quartic()
    assert k.omega(0.0) == 1.0
    assert k.omega(1.0) == 0.0
    assert k.omega(0.5) == pytest.approx(0.9375, abs=1e-15)


def test_proposed_quartic_derivative():
    k = unit_quartic()
    assert k.omega_prime(0.0) == 0.0
    assert k.omega_prime(0.5) == pytest.approx(-0.5, abs=1e-15)


@pytest.mark.parametrize("family", FAMILIES)
def test_zero_outside_support(family):
    k = KernelSpec(family, h=1.0, delta=0.4)
    r = np.array([1.0, 1.5, 2.0, 10.0])
    assert np.all(k.omega(r) == 0.0)
    assert np.all(k.omega_prime(r) == 0.0)
    assert np.all(k.omega_over_r(r) == 0.0)
    assert np.all(k.omega_over_r2(r) == 0.0)


def test_clamped_quotients():
    k = unit_quartic(0.4)
    assert k.omega_over_r(0.8) == pytest.approx((1 - 0.8**4) / 0.8, rel=1e-14)
    assert k.omega_over_r(0.8) == pytest.approx(0.7380, abs=5e-5)
    assert k.omega_over_r(0.0) == pytest.approx(2.5)
    assert k.omega_over_r2(0.0) == pytest.approx(1 / 0.16)
    assert k.omega_over_r(1.0) == 0.0


@given(st.floats(0.0, 1.2), st.floats(0.05, 0.9))
def test_clamped_quotients_bounded(r, delta):
    k = unit_quartic(delta)
    assert 0.0 <= k.omega_over_r(r) <= k.omega(0.0) / delta + 1e-12
    assert 0.0 <= k.omega_over_r2(r) <= k.omega(0.0) / delta**2 + 1e-12


def test_stability_indicator_values():
    k = unit_quartic()
    assert k.stability_indicator(0.5) == pytest.approx(4.75, rel=1e-14)
    assert k.stability_indicator(1.0) == pytest.approx(4.0, rel=1e-14)


def test_stability_indicator_domain():
    k = unit_quartic()
    with pytest.raises(ValueError):
        k.stability_indicator(0.0)
    with pytest.raises(ValueError):
        k.stability_indicator(1.5)


@given(st.floats(1e-6, 1.0))
def test_proposed_quartic_indicator_positive(r):
    assert unit_quartic().stability_indicator(r) > 0.0


def test_stability_verdicts():
    for family in FAMILIES:
        r, om = stability_table(make_kernel(family, 1.0, 2.5), 10_000)
        assert len(r) == 10_000 and r[0] > 0 and r[-1] == pytest.approx(2.5)
        if family == "proposed_quartic":
            assert np.all(om > 0)
        else:
            # spline-derived weights vanish at the origin, so the indicator dips below zero
            assert om.min() < 0


def _spline_W(family, q):
    """Smoothing kernels with W(0) = 1, written independently of the module."""
    if family == "cubic_spline":
        s = 2 * q
        return np.where(s < 1, 1 - 1.5 * s**2 + 0.75 * s**3, 0.25 * np.clip(2 - s, 0, None) ** 3)
    if family == "classic_quartic":
        s = 2.5 * q
        raw = (np.clip(2.5 - s, 0, None) ** 4 - 5 * np.clip(1.5 - s, 0, None) ** 4
               + 10 * np.clip(0.5 - s, 0, None) ** 4)
        return raw / (2.5**4 - 5 * 1.5**4 + 10 * 0.5**4)
    if family == "wendland_c2":
        return np.clip(1 - q, 0, None) ** 3 * (1 + 3 * q)
    raise ValueError(family)


@pytest.mark.parametrize("family", ["cubic_spline", "classic_quartic", "wendland_c2"])
def test_spline_families_are_minus_r_dW_dr(family):
    k = KernelSpec(family, h=1.0, delta=0.4)
    q = np.linspace(0.01, 0.99, 97)
    step = 1e-6
    dW = (_spline_W(family, q + step) - _spline_W(family, q - step)) / (2 * step)
    np.testing.assert_allclose(k.omega(q), -q * dW, atol=1e-7)


@pytest.mark.parametrize("family", FAMILIES)
def test_derivative_matches_finite_difference(family):
    k = KernelSpec(family, h=2.0, delta=0.5)
    r = np.linspace(0.02, 1.98, 99)
    step = 1e-6
    fd = (k.omega(r + step) - k.omega(r - step)) / (2 * step)
    np.testing.assert_allclose(k.omega_prime(r), fd, atol=1e-5)


def _midpoint_bigW(k, r, panels=1_000_000):
    edges = np.linspace(r, k.h, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return float(np.sum(k.omega_over_r(mid)) * (k.h - r) / panels)


def test_bigW_against_midpoint_oracle():
    k = make_kernel("proposed_quartic", 1.0, 2.5)
    for r in (k.delta, 1.7):
        assert k.bigW(r) == pytest.approx(_midpoint_bigW(k, r), rel=1e-6)


def test_bigW_endpoints():
    k = make_kernel("proposed_quartic", 1.0, 2.5)
    assert k.bigW(k.h) == 0.0
    assert k.bigW(3.0) == 0.0
    w0 = k.bigW(0.0)
    assert np.isfinite(w0) and w0 > 0
    # integrand is omega/delta on [0, delta]
    assert w0 - k.bigW(k.delta) == pytest.approx(
        (k.delta - k.delta**5 / (5 * k.h**4)) / k.delta, rel=1e-6
    )


@settings(max_examples=50)
@given(st.lists(st.floats(0.0, 3.0), min_size=2, max_size=20))
def test_bigW_nonincreasing(rs):
    k = make_kernel("proposed_quartic", 1.0, 2.5)
    r = np.sort(np.array(rs))
    assert np.all(np.diff(k.bigW(r)) <= 1e-15)


def test_make_kernel_defaults():
    k = make_kernel(d0=0.01)
    assert k.family is KernelFamily.PROPOSED_QUARTIC
    assert k.h == pytest.approx(0.025)
    assert k.delta == pytest.approx(0.01)


@pytest.mark.parametrize("kw", [dict(h=0.0, delta=0.1), dict(h=1.0, delta=0.0),
                                dict(h=1.0, delta=1.0), dict(h=1.0, delta=0.5, table_size=1)])
def test_invalid_specs(kw):
    with pytest.raises(ValueError):
        KernelSpec("proposed_quartic", **kw)


def test_unknown_family():
    with pytest.raises(ValueError):
        make_kernel("gaussian")
