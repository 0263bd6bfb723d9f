import math

import numpy as np
import pytest

from schattenlab.errors import ContractError, FitError
from schattenlab.geometry import ManifoldModel
from schattenlab.operators import Bessel, Compose, OperatorSpec, TruncatedOperator, assemble, matrix_trace
from schattenlab.spectral_analysis import (
    INCONCLUSIVE, MEMBER, NOT_MEMBER, EigenSpectrum, SchattenReport, SingularSpectrum,
    decay_fit_vs_prediction, eigenvalues, local_weyl_average, membership_crosscheck,
    schatten_report, singular_values, weyl_inequality_check, weyl_slack,
)

from conftest import PI_COTH_PI, bessel, fio, mult_bessel, two_plus_cos


def test_singular_values_diagonal():
    sv = singular_values(assemble(bessel(2), math.sqrt(5)))
    np.testing.assert_array_equal(sv.values, [1, 0.5, 0.5, 0.2, 0.2])


def test_unitary_invariance():
    a = singular_values(assemble(fio(2.5), 64)).values
    b = singular_values(assemble(bessel(2.5), 64)).values
    np.testing.assert_allclose(a, b, atol=1e-10)
    dense = assemble(mult_bessel(2), 32)
    shifted = assemble(OperatorSpec(1, (Compose(1.3),) + mult_bessel(2).factors), 32)
    np.testing.assert_allclose(singular_values(dense).values, singular_values(shifted).values,
                               atol=1e-10)


def test_multiplier_two_sided_bound():
    a = singular_values(assemble(mult_bessel(3), 64)).values
    b = singular_values(assemble(bessel(3), 64)).values
    # guard truncation only touches the bottom of the spectrum
    head = slice(0, 100)
    assert np.all(a[head] >= b[head] * (1 - 1e-9)) and np.all(a[head] <= 3 * b[head] * (1 + 1e-9))


def test_nonfinite_rejected():
    op = TruncatedOperator(ManifoldModel.torus(1), 3, np.zeros((1, 1), int), np.array([np.nan]), True)
    with pytest.raises(ContractError):
        singular_values(op)


def test_eigenvalues_diagonal_order():
    op = assemble(fio(2, tau=0.4), 12)
    ev = eigenvalues(op).values
    assert np.all(np.diff(np.abs(ev)) <= 1e-15)
    k = op.modes[:, 0]
    ref = np.exp(0.4j * k) * (1 + k**2.0) ** -1
    assert sorted(np.round(ev, 12), key=lambda z: (z.real, z.imag)) == \
        sorted(np.round(ref, 12), key=lambda z: (z.real, z.imag))


def test_eigen_tie_order():
    op = TruncatedOperator(ManifoldModel.torus(1), 3, np.zeros((4, 1), int),
                           np.array([1j, -1, 1, -1j]), True)
    np.testing.assert_array_equal(eigenvalues(op).values, [1, 1j, -1j, -1])


def test_trace_consistency():
    op = assemble(mult_bessel(3), 64)
    ev = eigenvalues(op)
    assert abs(ev.values.sum() - matrix_trace(op)) < 1e-8 * op.side


def test_schatten_examples():
    rep = schatten_report(bessel(2), 1, 256, 512)
    assert rep.verdict == MEMBER and abs(rep.total - PI_COTH_PI) < 1e-3
    assert schatten_report(bessel(1), 1, 256, 512).verdict == NOT_MEMBER
    assert schatten_report(bessel(0.6), 2, 256, 512).verdict == MEMBER
    with pytest.raises(ContractError):
        schatten_report(bessel(2), 1, 256, 300)


def test_schatten_monotone_sums():
    rep = schatten_report(bessel(1.7), 1.5, 64, 128)
    assert rep.partial_sums[1] >= rep.partial_sums[0] >= 0


def test_report_roundtrip():
    rep = schatten_report(bessel(2), 1, 64, 128)
    assert SchattenReport.from_dict(rep.to_dict()) == rep


def test_crosscheck_examples():
    assert membership_crosscheck(fio(1.5), 1).consistent
    c = membership_crosscheck(bessel(0.5), 2)
    assert c.consistent and c.verdict == NOT_MEMBER
    c = membership_crosscheck(OperatorSpec(2, (Bessel(3),)), 1)
    assert c.consistent and c.verdict == MEMBER


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("r", [1.0, 2.0])
def test_borderline_strictness(n, r):
    rep = schatten_report(OperatorSpec(n, (Bessel(n / r),)), r, *((64, 128) if n == 1 else (30, 60)))
    assert rep.verdict == NOT_MEMBER


def test_weyl_inequality():
    op = assemble(mult_bessel(3), 128)
    ev, sv = eigenvalues(op), singular_values(op)
    for r in (0.5, 1, 2):
        assert weyl_slack(ev, sv, r).min() >= -1e-10
        assert weyl_inequality_check(ev, sv, r, len(ev))
    d = assemble(bessel(2), 20)
    np.testing.assert_allclose(weyl_slack(eigenvalues(d), singular_values(d), 1), 0, atol=1e-14)
    with pytest.raises(ContractError):
        weyl_inequality_check(ev, sv, 1, 0)


def test_decay_fits():
    for s in (1.5, 2, 3):
        assert decay_fit_vs_prediction(singular_values(assemble(bessel(s), 128)), -s).passed
        assert decay_fit_vs_prediction(eigenvalues(assemble(fio(s), 128)), -s).passed
    assert decay_fit_vs_prediction(singular_values(assemble(bessel(2, n=2), 40)), -1).passed
    with pytest.raises(FitError):
        decay_fit_vs_prediction(SingularSpectrum(np.ones(20)), -1)


def test_local_weyl():
    t1, t2 = ManifoldModel.torus(1), ManifoldModel.torus(2)
    one = lambda u: np.ones(u.shape[0])
    assert local_weyl_average(t2, 1.0, one, 50).average == pytest.approx(1)
    res = local_weyl_average(t1, two_plus_cos(), one, 40)
    assert res.average == pytest.approx(2)
    c = lambda u: 1 + u[:, 0] ** 2 - u[:, 1] ** 2
    res = local_weyl_average(t2, two_plus_cos(2), c, 200)
    assert res.target == pytest.approx(2) and res.error < 0.05
    with pytest.raises(ContractError):
        local_weyl_average(t1, 1.0, one, 5)
