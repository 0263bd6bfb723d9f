import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schattenlab.errors import ContractError, UnsupportedError
from schattenlab.order_calculus import (
    IFF, NECESSARY_WEAK, SUFFICIENT, OrderParameters, Threshold, all_thresholds,
    bessel_nuclearity_threshold, composite_order, conjugate_index, critical_index,
    decay_exponent, dist1_order_threshold, fio_nuclearity_threshold, gl_nuclearity_index,
    lp_lq_order_threshold, schatten_order_threshold, sogge_exponent, summability_exponent,
)

P = OrderParameters


def test_sogge_examples():
    assert sogge_exponent(2, math.inf) == 0.5
    for n in (1, 2, 3, 4):
        assert sogge_exponent(n, 2) == 0
    assert sogge_exponent(3, 4) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(ContractError):
        sogge_exponent(2, 0.5)


def test_composite_examples():
    assert composite_order(P(2, 0, 1, 2, 0)) == 0
    assert composite_order(P(2, 1, 1, 1.5, 0)) == pytest.approx(-1 / 6, abs=1e-15)
    assert composite_order(P(2, 0, 0.5, 1.5, 1)) == pytest.approx(-2 / 3.75, abs=1e-15)


def test_lp_lq_examples():
    t = lp_lq_order_threshold(2, 0, 1, 2, 2)
    assert t.value == 0 and not t.strict
    assert lp_lq_order_threshold(2, 1, 1, 4, 4).value == pytest.approx(-0.25)
    t = lp_lq_order_threshold(2, 0, 1, 1.5, 3)
    assert t.value == pytest.approx(-2 / 3) and t.region == "case (iii)"
    with pytest.raises(UnsupportedError):
        lp_lq_order_threshold(2, 0, 1, 3, 2)


def test_bessel_nuclearity_examples():
    assert bessel_nuclearity_threshold(1, 1, 2, 2).value == 1
    assert bessel_nuclearity_threshold(2, 1, 2, math.inf).value == 2.5
    assert bessel_nuclearity_threshold(2, 2 / 3, 2, 2).value == pytest.approx(3)
    assert bessel_nuclearity_threshold(2, 1, 2, 2).strict
    with pytest.raises(UnsupportedError):
        bessel_nuclearity_threshold(2, 1.5, 2, 2)


def test_fio_nuclearity_examples():
    for n, r in [(1, 1), (2, 0.5), (3, 0.8)]:
        assert fio_nuclearity_threshold(P(n, 0, 0.7, 2, 0, r), 2).value == pytest.approx(-n / r)
    assert fio_nuclearity_threshold(P(2, 1, 1, 2, 2, 1), 2).value == pytest.approx(-2.5)
    assert fio_nuclearity_threshold(P(2, 0, 1, 2, 0, 1), 1).value == pytest.approx(-2.5)


def test_index_examples():
    assert gl_nuclearity_index(2) == 1
    assert gl_nuclearity_index(1) == pytest.approx(2 / 3)
    assert gl_nuclearity_index(4) == pytest.approx(0.8)
    assert summability_exponent(1, 2) == 1 and decay_exponent(1, 2) == -1
    assert summability_exponent(2 / 3, 2) == pytest.approx(2 / 3)
    assert decay_exponent(2 / 3, 2) == pytest.approx(-1.5)
    assert summability_exponent(0.8, 4) == pytest.approx(1)
    assert decay_exponent(0.8, 4) == pytest.approx(-1)


def test_schatten_examples():
    t = schatten_order_threshold(2, 1)
    assert (t.value, t.sharp, t.strict) == (-2, IFF, True)
    assert schatten_order_threshold(2, 2).value == -1
    t = schatten_order_threshold(2, 1.5)
    assert t.value == pytest.approx(-4 / 3) and t.sharp == SUFFICIENT
    assert t.companion.sharp == NECESSARY_WEAK and not t.companion.strict
    assert schatten_order_threshold(2, 0.5).companion is None
    with pytest.raises(ContractError):
        schatten_order_threshold(2, 0)


def test_dist1_examples():
    for n in (1, 2, 3):
        assert dist1_order_threshold(P(n, 0, 1, 2, 0)).value == pytest.approx(-n)
    # phi(3) = (1/2)(1/2 - 1/3) = 1/12 for n = 2
    assert dist1_order_threshold(P(2, 1, 1, 1.5, 0)).value == pytest.approx(-1 / 6 - 7 / 3 - 1 / 12)
    assert dist1_order_threshold(P(2, 1, 1, 4, 0)).value == pytest.approx(-2.875)


def test_parameter_validation():
    with pytest.raises(ContractError):
        P(2, 2)
    with pytest.raises(ContractError):
        P(2, 0, 0.3)
    with pytest.raises(ContractError):
        P(2, 0, 1, 1.0)


def test_threshold_roundtrip():
    t = schatten_order_threshold(3, 2.5)
    assert Threshold.from_dict(t.to_dict()) == t
    assert t.admits(-1.3) and not t.admits(-1.2)


def test_conjugate():
    assert conjugate_index(1) == math.inf and conjugate_index(math.inf) == 1
    assert conjugate_index(4) == pytest.approx(4 / 3)


def test_all_thresholds_keys():
    out = all_thresholds(P(2, 1, 1, 2, 0, 1))
    assert out["schatten"]["value"] == -2 and out["schatten"]["sharp"] == IFF
    assert {"dist1", "fio_nuclearity", "bessel_nuclearity", "lp_lq"} <= set(out)


# -- properties --------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4])
def test_phi_branch_continuity(n):
    pc = critical_index(n)
    d = 0.5 - 1 / pc
    assert abs(0.5 * (n - 1) * d - (n * d - 0.5)) < 1e-12
    assert abs(sogge_exponent(n, 2 + 1e-13)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.floats(2, 200), st.floats(0, 50))
def test_phi_monotone(n, p, dp):
    assert sogge_exponent(n, p) <= sogge_exponent(n, p + dp) + 1e-15


@st.composite
def params(draw, p=None, kappa=None):
    n = draw(st.integers(1, 4))
    k = draw(st.integers(0, n - 1))
    rho = draw(st.floats(0.5, 1.0))
    p = draw(st.floats(1.05, 8.0)) if p is None else p
    kappa = draw(st.floats(0, 6)) if kappa is None else kappa
    return P(n, k, rho, p, kappa)


@settings(max_examples=80, deadline=None)
@given(params())
def test_mu_nonpositive(pr):
    assert composite_order(pr) <= 1e-15


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.floats(0.5, 1.0), st.floats(1.05, 1.95))
def test_mu_region_boundaries(n, rho, p):
    # p + kappa = 2 and p = 2 both sit on two branches; _agree would raise on mismatch
    composite_order(P(n, 0, rho, p, 2 - p))
    composite_order(P(n, max(n - 1, 0), rho, 2.0, 1.3))


@settings(max_examples=60, deadline=None)
@given(params(kappa=0.0))
def test_mu_zero_at_kappa_zero(pr):
    zero = abs(composite_order(pr)) < 1e-15
    expect = pr.p == 2 or abs(pr.sss) < 1e-15
    assert zero == expect


def test_composition_identity_grid():
    for p in np.geomspace(1.01, 100, 50):
        assert abs(summability_exponent(gl_nuclearity_index(p), p) - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(params(), st.floats(1.0, 6.0), st.floats(0.05, 0.99), st.floats(0.01, 0.9))
def test_threshold_monotone_in_inverse_r(pr, p1, r, dr):
    r2 = r * (1 - dr)
    a = fio_nuclearity_threshold(P(pr.n, pr.k, pr.rho, pr.p, pr.kappa, r), p1).value
    b = fio_nuclearity_threshold(P(pr.n, pr.k, pr.rho, pr.p, pr.kappa, r2), p1).value
    assert b < a


@settings(max_examples=60, deadline=None)
@given(params(kappa=0.0))
def test_lp_lq_single_index(pr):
    t = lp_lq_order_threshold(pr.n, pr.k, pr.rho, pr.p, pr.p)
    assert abs(t.value + pr.sss * abs(0.5 - 1 / pr.p)) < 1e-12


def test_threshold_strictness_metadata():
    assert not lp_lq_order_threshold(2, 0, 1, 2, 3).strict
    assert fio_nuclearity_threshold(P(2), 2).strict
    assert dist1_order_threshold(P(2)).strict
