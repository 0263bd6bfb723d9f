import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schattenlab.errors import ConfigurationError, ContractError, FitError
from schattenlab.geometry import (
    ManifoldModel, counting_function, counting_table, level_table, shell_sum,
    spectral_levels, summability_classifier, tail_interval, torus_modes, weyl_fit,
)

from conftest import PI_COTH_PI


def test_unsupported_dimension():
    with pytest.raises(ConfigurationError):
        ManifoldModel.torus(4)
    with pytest.raises(ConfigurationError):
        ManifoldModel("sphere", 3)


def test_torus1_levels(t1):
    levels = spectral_levels(t1, 3)
    assert [(lv.multiplicity, set(lv.modes)) for lv in levels] == [
        (1, {(0,)}), (2, {(-1,), (1,)}), (2, {(-2,), (2,)})]
    np.testing.assert_allclose([lv.eigenvalue for lv in levels], [1, math.sqrt(2), math.sqrt(5)])


def test_sphere_levels(s2):
    levels = spectral_levels(s2, 4)
    assert [lv.multiplicity for lv in levels] == [1, 3, 5, 7]


def test_torus2_second_level(t2):
    lv = spectral_levels(t2, 1.5)[1]
    assert lv.multiplicity == 4 and math.isclose(lv.eigenvalue, math.sqrt(2))
    assert set(lv.modes) == {(1, 0), (-1, 0), (0, 1), (0, -1)}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_counting_matches_brute_force(n):
    lam = 7.3
    r = int(lam)
    grids = np.meshgrid(*([np.arange(-r, r + 1)] * n), indexing="ij")
    norm2 = sum(g**2 for g in grids)
    brute = int(np.sum(np.sqrt(1 + norm2) <= lam))
    assert counting_function(ManifoldModel.torus(n), lam) == brute


def test_counting_examples(t1, s2):
    assert counting_function(t1, 10) == 19
    assert counting_function(t1, 0.5) == 0
    assert counting_function(s2, 0.5) == 0
    L = 12
    assert counting_function(s2, math.sqrt(1 + L * (L + 1)) + 1e-9) == (L + 1) ** 2


def test_torus_modes_prefix():
    small = torus_modes(2, 10)
    big = torus_modes(2, 20)
    assert np.array_equal(big[: small.shape[0]], small)


@pytest.mark.parametrize("kind,target,tol", [(1, 1, 0.02), (2, 2, 0.05), ("s", 2, 0.02)])
def test_weyl_exponents(kind, target, tol):
    m = ManifoldModel.sphere() if kind == "s" else ManifoldModel.torus(kind)
    fit = weyl_fit(m, np.geomspace(20, 200, 40))
    assert abs(fit.exponent - target) < tol


def test_weyl_fit_rejects_degenerate(t1):
    with pytest.raises(FitError):
        weyl_fit(t1, [20, 30])
    with pytest.raises(FitError):
        weyl_fit(t1, np.full(10, 30.0))


def test_shell_sum(t1):
    table = level_table(t1, lam_max=20)
    assert shell_sum(table, np.ones(len(table)), 10) == 10
    assert shell_sum(table, np.zeros(len(table)), 10) == 0
    with pytest.raises(ContractError):
        shell_sum(table, np.ones(3), 10)


def test_shell_sum_decay(t1):
    table = level_table(t1, lam_max=4000)
    v = table.eigenvalues ** -2.0
    s1 = shell_sum(table, v, 500)
    s2 = shell_sum(table, v, 1000)
    assert 1.8 < s1 / s2 < 2.2


def test_summability_examples(t1, t2):
    res = summability_classifier(t1, 2.0)
    assert res.verdict == "converges"
    assert abs(res.value - PI_COTH_PI) < 1e-6
    assert summability_classifier(t1, 1.0).verdict == "borderline"
    assert summability_classifier(t2, 2.0).verdict == "borderline"
    assert summability_classifier(t1, 0.5).verdict == "diverges"


@settings(max_examples=20, deadline=None)
@given(st.floats(2.2, 6.0), st.integers(50, 400))
def test_tail_interval_brackets_truth(kappa, cut):
    # exact tail on T^1 by a long explicit sum plus a crude remainder bound
    m = ManifoldModel.torus(1)
    lam = math.sqrt(1 + cut * cut)
    lo, hi = tail_interval(m, kappa, lam, counting_function(m, lam))
    k = np.arange(cut + 1, 200000, dtype=float)
    explicit = 2 * np.sum((1 + k * k) ** (-kappa / 2))
    rest = 2 * 200000.0 ** (1 - kappa) / (kappa - 1)
    # true tail lies in [explicit, explicit + rest]
    assert lo <= explicit + rest * (1 + 1e-12)
    assert explicit <= hi * (1 + 1e-12)


@settings(max_examples=15, deadline=None)
@given(st.floats(1.5, 5.0))
def test_counting_monotone(lam):
    m = ManifoldModel.torus(2)
    assert counting_function(m, lam) <= counting_function(m, lam + 0.5)
    tab = counting_table(m, [lam, lam + 1])
    assert tab[0] == counting_function(m, lam)
