"""Singular values, eigenvalues, Schatten sums and spectral cross-checks."""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ContractError, FitError, SolverError
from .fitting import PowerLawFit, fit_power_law
from .geometry import ManifoldModel, torus_modes
from .operators import DEFAULT_GUARD, Multiply, assemble, matrix_trace
from .order_calculus import schatten_order_threshold

MEMBER = "Member"
NOT_MEMBER = "NotMember"
INCONCLUSIVE = "Inconclusive"

STABILITY_TOL = 0.05
# Fitted exponents on finite sections are biased towards the borderline from
# below, so divergence is declared once e*r is within this band of -1.
BORDERLINE_FIT_BAND = 0.02
WEYL_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class SingularSpectrum:
    values: np.ndarray

    def __len__(self):
        return int(self.values.size)

    def rows(self):
        return [(j, float(v)) for j, v in enumerate(self.values)]


@dataclass(frozen=True, eq=False)
class EigenSpectrum:
    values: np.ndarray

    def __len__(self):
        return int(self.values.size)

    @property
    def moduli(self):
        return np.abs(self.values)

    def rows(self):
        return [(j, float(v.real), float(v.imag)) for j, v in enumerate(self.values)]


def _check_finite(op):
    if not np.all(np.isfinite(op.data)):
        raise ContractError("operator has non-finite entries")


def singular_values(op, check=True):
    """Descending singular values; dense matrices get a residual check on sampled triplets."""
    _check_finite(op)
    if op.diagonal:
        return SingularSpectrum(np.sort(np.abs(op.data))[::-1].copy())
    a = op.data
    u, s, vh = scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesdd")
    if check and s.size:
        scale = max(float(s[0]), np.finfo(float).tiny)
        for j in np.unique(np.linspace(0, s.size - 1, 8).astype(int)):
            v = vh[j].conj()
            res = max(np.linalg.norm(a @ v - s[j] * u[:, j]),
                      np.linalg.norm(a.conj().T @ u[:, j] - s[j] * v))
            if res > 1e-8 * scale:
                raise SolverError(f"SVD residual {res:.3e} at index {j}", residual=float(res))
    return SingularSpectrum(np.asarray(s, dtype=float))


def _order_eigs(vals):
    idx = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    return vals[idx]


def eigenvalues(op):
    """Eigenvalues by descending modulus, ties by descending real then imaginary part."""
    _check_finite(op)
    if op.diagonal:
        vals = np.asarray(op.data, dtype=complex)
    else:
        try:
            vals = scipy.linalg.eigvals(op.data, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"eigenvalue iteration failed: {exc}", residual=math.inf) from exc
    vals = _order_eigs(np.asarray(vals, dtype=complex))
    residual = abs(complex(np.sum(vals)) - matrix_trace(op))
    if residual > 1e-8 * op.side:
        raise SolverError(f"eigenvalue sum misses the trace by {residual:.3e}", residual=residual)
    return EigenSpectrum(vals)


# -- Schatten classes ------------------------------------------------------------


@dataclass(frozen=True)
class SchattenReport:
    r: float
    cutoffs: tuple
    partial_sums: tuple
    tail_estimate: float
    total: float
    relative_change: float
    verdict: str
    fit: PowerLawFit

    @property
    def partial_sum(self):
        return self.partial_sums[-1]

    def to_dict(self):
        return {
            "r": self.r,
            "cutoffs": list(self.cutoffs),
            "partial_sums": list(self.partial_sums),
            "partial_sum": self.partial_sum,
            "tail_estimate": self.tail_estimate,
            "total": self.total,
            "relative_change": self.relative_change,
            "verdict": self.verdict,
            "fit": self.fit.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            r=float(d["r"]),
            cutoffs=tuple(float(v) for v in d["cutoffs"]),
            partial_sums=tuple(float(v) for v in d["partial_sums"]),
            tail_estimate=float(d["tail_estimate"]),
            total=float(d["total"]),
            relative_change=float(d["relative_change"]),
            verdict=str(d["verdict"]),
            fit=PowerLawFit.from_dict(d["fit"]),
        )


def _last_decade_fit(values):
    vals = np.asarray(values, dtype=float)
    usable = int(np.sum(vals > 1e-300))
    lo = max(usable // 10, 1)
    if usable - lo < 8:
        raise FitError("too few singular values for a last-decade fit")
    j = np.arange(1, vals.size + 1, dtype=float)
    return fit_power_law(j, vals, window=(lo, usable))


def _power_tail(fit, r, count):
    """sum_{j >= count} (C (j+1)^e)^r by the midpoint integral; inf if e r >= -1."""
    er = fit.exponent * r
    if er >= -1.0:
        return math.inf
    return math.exp(r * fit.log_intercept) * (count + 0.5) ** (er + 1.0) / (-(er + 1.0))


def schatten_report(spec, r, lam1, lam2, guard=DEFAULT_GUARD):
    """Sum of s_j^r at two cutoffs with power-law tail extrapolation and a verdict."""
    if r <= 0:
        raise ContractError("r must be > 0")
    if lam2 < 1.5 * lam1:
        raise ContractError("need lam2 >= 1.5 * lam1")
    sums, tails, fit = [], [], None
    for lam in (lam1, lam2):
        s = singular_values(assemble(spec, lam, guard)).values
        fit = _last_decade_fit(s)
        sums.append(float(np.sum(s**r)))
        tails.append(_power_tail(fit, r, s.size))
    if fit.exponent * r >= -1.0 - BORDERLINE_FIT_BAND:
        verdict, rel = NOT_MEMBER, math.inf
        tails[1] = math.inf
    else:
        t1, t2 = sums[0] + tails[0], sums[1] + tails[1]
        rel = abs(t2 - t1) / max(abs(t2), 1e-30)
        verdict = MEMBER if rel < STABILITY_TOL else INCONCLUSIVE
    return SchattenReport(
        r=float(r),
        cutoffs=(float(lam1), float(lam2)),
        partial_sums=tuple(sums),
        tail_estimate=tails[1],
        total=sums[1] + tails[1],
        relative_change=float(rel),
        verdict=verdict,
        fit=fit,
    )


def default_cutoffs(dimension):
    return {1: (256.0, 512.0), 2: (40.0, 80.0), 3: (12.0, 24.0)}[dimension]


@dataclass(frozen=True)
class CrosscheckResult:
    consistent: bool
    mu: float
    r: float
    threshold: dict
    predicted_member: bool
    verdict: str
    reason: str

    def to_dict(self):
        return dict(self.__dict__)


def membership_crosscheck(spec, r, cutoffs=None, guard=DEFAULT_GUARD):
    """Compare the numerical verdict with the order threshold mu < -n/r."""
    n = spec.dimension
    lam1, lam2 = cutoffs or default_cutoffs(n)
    report = schatten_report(spec, r, lam1, lam2, guard)
    thr = schatten_order_threshold(n, r)
    mu = spec.nominal_order
    predicted = thr.admits(mu)
    verdict = report.verdict
    if thr.sharp == "iff":
        expected = MEMBER if predicted else NOT_MEMBER
        ok = verdict == expected
        reason = f"iff threshold: expected {expected}, got {verdict}"
    elif predicted:
        ok = verdict == MEMBER
        reason = f"sufficient condition holds: expected {MEMBER}, got {verdict}"
    elif thr.companion is not None and not thr.companion.admits(mu):
        ok = verdict != MEMBER
        reason = f"weak necessary condition fails: {MEMBER} not allowed, got {verdict}"
    else:
        ok = True
        reason = "no claim outside the sufficient region"
    return CrosscheckResult(ok, mu, float(r), thr.to_dict(), predicted, verdict, reason)


# -- inequalities and decay --------------------------------------------------------


def weyl_slack(eigs, svs, r):
    """Array of sum_{j<l} s_j^r - sum_{j<l} |lambda_j|^r for l = 1..len."""
    a = np.cumsum(np.abs(eigs.values) ** r)
    b = np.cumsum(np.asarray(svs.values) ** r)
    if a.size != b.size:
        raise ContractError("spectra have different lengths")
    return b - a


def weyl_inequality_check(eigs, svs, r, ell):
    """Partial-sum Weyl inequality over the first ``ell`` terms."""
    if not 1 <= ell <= min(len(eigs), len(svs)):
        raise ContractError("ell must lie in [1, common length]")
    a = float(np.sum(np.abs(eigs.values[:ell]) ** r))
    b = float(np.sum(np.asarray(svs.values[:ell]) ** r))
    return a <= b + WEYL_SLACK


@dataclass(frozen=True)
class DecayVerdict:
    fit: PowerLawFit
    predicted: float
    passed: bool

    def to_dict(self):
        return {"fit": self.fit.to_dict(), "predicted": self.predicted, "passed": self.passed}


def decay_fit(spectrum):
    """Fit |value_j| ~ C (j+1)^e over the middle two quartiles."""
    vals = np.abs(np.asarray(spectrum.values))
    vals = np.sort(vals)[::-1]
    usable = int(np.sum(vals > 1e-14))
    if usable < 50:
        raise FitError(f"only {usable} entries above 1e-14 (need 50)")
    j = np.arange(1, vals.size + 1, dtype=float)
    return fit_power_law(j, vals, window=(usable // 4, (3 * usable) // 4))


def decay_fit_vs_prediction(spectrum, predicted):
    fit = decay_fit(spectrum)
    tol = max(0.1, 0.1 * abs(predicted))
    return DecayVerdict(fit, float(predicted), abs(fit.exponent - predicted) <= tol)


# -- local Weyl averages ------------------------------------------------------------


def _direction_mean(direction, n):
    if n == 1:
        u = np.array([[1.0], [-1.0]])
        return float(np.mean(direction(u)))
    if n == 2:
        th = 2.0 * np.pi * np.arange(4096) / 4096
        u = np.stack([np.cos(th), np.sin(th)], axis=1)
        return float(np.mean(direction(u)))
    x, w = np.polynomial.legendre.leggauss(64)
    ph = 2.0 * np.pi * np.arange(128) / 128
    st = np.sqrt(1.0 - x**2)
    u = np.stack([np.multiply.outer(st, np.cos(ph)).ravel(),
                  np.multiply.outer(st, np.sin(ph)).ravel(),
                  np.repeat(x, ph.size)], axis=1)
    return float(np.dot(np.repeat(w, ph.size), direction(u)) / (4.0 * np.pi) * (2.0 * np.pi / 128))


@dataclass(frozen=True)
class LocalWeylResult:
    average: float
    target: float
    error: float
    count: int
    lam: float

    def to_dict(self):
        return dict(self.__dict__)


def local_weyl_average(manifold, multiplier, direction, lam):
    """Average of (F e_k, e_k) = a_hat(0) c(k/|k|) over eigenvalues <= lam.

    ``multiplier`` is a ``Multiply`` (only a_hat(0) enters the diagonal) and
    ``direction`` maps an (N, n) array of unit vectors to c values.  The k = 0
    mode has no direction and uses the mean of c.
    """
    if not manifold.is_torus:
        raise ContractError("local Weyl averages are modeled on tori")
    if lam < 10:
        raise ContractError("lam must be >= 10")
    n = manifold.dimension
    a0 = multiplier.mean.real if isinstance(multiplier, Multiply) else float(multiplier)
    cbar = _direction_mean(direction, n)
    modes = torus_modes(n, lam).astype(float)
    norms = np.sqrt(np.sum(modes**2, axis=1))
    nz = norms > 0
    c = np.empty(modes.shape[0])
    c[nz] = np.asarray(direction(modes[nz] / norms[nz, None]), dtype=float)
    c[~nz] = cbar
    avg = a0 * float(np.mean(c))
    target = a0 * cbar
    return LocalWeylResult(avg, target, abs(avg - target), int(modes.shape[0]), float(lam))


__all__ = [
    "MEMBER", "NOT_MEMBER", "INCONCLUSIVE", "SingularSpectrum", "EigenSpectrum",
    "SchattenReport", "CrosscheckResult", "DecayVerdict", "LocalWeylResult",
    "singular_values", "eigenvalues", "schatten_report", "membership_crosscheck",
    "weyl_slack", "weyl_inequality_check", "decay_fit", "decay_fit_vs_prediction",
    "local_weyl_average", "default_cutoffs", "ManifoldModel",
]
