"""Nuclear decompositions, nuclear traces and trace-formula comparisons."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ContractError, DivergenceError, ThresholdViolation, UnsupportedError
from .fitting import PowerLawFit
from .geometry import level_table, summability_classifier, torus_modes
from .eigenfunctions import harmonic_norms
from .operators import (
    DEFAULT_GUARD, Bessel, Compose, Multiply, TraceEstimate, assemble, spectral_tail,
)
from .order_calculus import (
    OrderParameters, conjugate_index, decay_exponent, dist1_order_threshold,
    fio_nuclearity_threshold, gl_nuclearity_index, sogge_exponent, summability_exponent,
)
from .spectral_analysis import decay_fit, eigenvalues

CONVERGENT = "Convergent"
DIVERGENT = "Divergent"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True, eq=False)
class NuclearDecomposition:
    """Eigenbasis decomposition sum_l lambda_l^-s e_l (x) conj(e_l) of a Bessel potential.

    ``level_products[i]`` is the sum over the level's modes of
    (||g||_p2 ||h||_p1')^r; ``partial_sums`` is its running total.
    """

    manifold: object
    s: float
    r: float
    p1: float
    p2: float
    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    level_products: np.ndarray
    partial_sums: np.ndarray
    classification: str
    tail_bound: float
    kappa: float
    sogge_constant: float
    estimate: float

    @property
    def partial_quasi_norm(self):
        return float(self.partial_sums[-1])

    def to_dict(self):
        return {
            "manifold": self.manifold.to_dict(),
            "s": self.s, "r": self.r, "p1": self.p1, "p2": self.p2,
            "levels": int(self.eigenvalues.size),
            "partial_quasi_norm": self.partial_quasi_norm,
            "classification": self.classification,
            "tail_bound": self.tail_bound,
            "kappa": self.kappa,
            "sogge_constant": self.sogge_constant,
            "estimate": self.estimate,
        }


def _sphere_level_products(ells, lam, s, r, p1c, p2):
    """Per-level sums of (lambda^-s ||Y||_p2 ||Y||_p1')^r and the max of ||Y||_p2||Y||_p1'."""
    lmax = int(ells[-1])
    prods = np.zeros(ells.size)
    ratio_max = 0.0
    growth = lam ** (sogge_exponent(2, p2) + sogge_exponent(2, p1c))
    for m in range(lmax + 1):
        deg = ells[m:]
        a = harmonic_norms(m, deg, p2)
        b = a if p2 == p1c else harmonic_norms(m, deg, p1c)
        ab = a * b
        prods[m:] += (1 if m == 0 else 2) * ab**r
        ratio_max = max(ratio_max, float(np.max(ab / growth[m:])))
    return prods * lam ** (-s * r), ratio_max


def bessel_nuclear_decomposition(manifold, s, r, p1, p2, budget=400):
    """r-nuclear quasi-norm partial sums of sqrt(1-Lap)^-s: L^p1 -> L^p2."""
    if not 0 < r <= 1:
        raise UnsupportedError("r-nuclearity is defined for 0 < r <= 1")
    if budget < 100:
        raise ContractError("level budget must be >= 100")
    if not (1 <= p1 < math.inf) or p2 < 1:
        raise ContractError("need 1 <= p1 < inf and p2 >= 1")
    n = manifold.dimension
    p1c = conjugate_index(p1)
    table = level_table(manifold, count=int(budget))
    lam = np.asarray(table.eigenvalues, dtype=float)
    mult = np.asarray(table.multiplicities)
    if manifold.is_torus:
        prods = mult * lam ** (-s * r)
        const = 1.0
    else:
        ells = np.asarray(table.keys, dtype=np.int64)
        prods, const = _sphere_level_products(ells, lam, s, r, p1c, p2)
    partial = np.cumsum(prods)
    kappa = r * (s - sogge_exponent(n, p2) - sogge_exponent(n, p1c))
    summ = summability_classifier(manifold, kappa, budget=int(budget))
    if summ.verdict == "converges":
        upper_tail = summ.value - summ.partial_sum + summ.tail_bound
        mid_tail = summ.value - summ.partial_sum
        label, bound = CONVERGENT, const**r * upper_tail
        estimate = float(partial[-1] + const**r * mid_tail)
    elif manifold.is_torus or (p2 >= 2 and p1c >= 2 and r * s <= n):
        # Exact on tori; on the sphere ||Y||_p >= (4 pi)^(1/p - 1/2) for p >= 2,
        # so the products dominate a multiple of lambda^(-s r).
        label, bound, estimate = DIVERGENT, math.inf, math.inf
    else:
        label, bound, estimate = INCONCLUSIVE, math.inf, math.inf
    return NuclearDecomposition(
        manifold, float(s), float(r), float(p1), float(p2), lam, mult, prods, partial,
        label, float(bound), float(kappa), float(const), estimate,
    )


# -- nuclear trace through the eigenbasis -------------------------------------------


def _merge(freqs, coefs):
    """Sum coefficients of repeated frequencies."""
    if freqs.shape[1] == 1:
        keys, inv = np.unique(freqs[:, 0], return_inverse=True)
        keys = keys[:, None]
    else:
        keys, inv = np.unique(freqs, axis=0, return_inverse=True)
    out = np.bincount(inv.ravel(), weights=coefs.real, minlength=keys.shape[0]) + 1j * \
        np.bincount(inv.ravel(), weights=coefs.imag, minlength=keys.shape[0])
    return keys, out


def _apply_factor(factor, freqs, coefs, target=None, reach=math.inf):
    """Apply one factor to the trigonometric series sum coefs_i exp(i freqs_i . x).

    Output frequencies farther than ``reach`` from ``target`` (sup norm) are
    dropped; callers use this to discard terms that cannot return to the
    diagonal.
    """
    if isinstance(factor, Bessel):
        norm2 = np.sum(freqs * freqs, axis=1).astype(float)
        return freqs, coefs * (1.0 + norm2) ** (-factor.s / 2.0)
    if isinstance(factor, Multiply):
        shifts = np.array([f for f, _ in factor.terms], dtype=np.int64)
        amps = np.array([c for _, c in factor.terms], dtype=complex)
        new_f = (freqs[:, None, :] + shifts[None, :, :]).reshape(-1, freqs.shape[1])
        new_c = (coefs[:, None] * amps[None, :]).ravel()
    else:
        phase = np.exp(1j * (freqs @ np.asarray(factor.tau)))
        if factor.is_shift:
            return freqs, coefs * phase
        # exp(i k (x + eps sin x)) = sum_m J_m(k eps) exp(i (k + m) x)
        k = freqs[:, 0]
        if math.isinf(reach):
            z = float(np.max(np.abs(k))) * abs(factor.eps)
            width = int(math.ceil(z + 12.0 * z ** (1.0 / 3.0) + 30.0))
            m = np.arange(-width, width + 1)[None, :] + 0 * k[:, None]
        else:
            d = np.arange(-int(reach), int(reach) + 1)
            m = (target[0] + d)[None, :] - k[:, None]
        jm = special.jv(m, factor.eps * k[:, None])
        new_f = (k[:, None] + m).reshape(-1, 1)
        new_c = ((coefs * phase)[:, None] * jm).ravel()
    if not math.isinf(reach):
        keep = np.max(np.abs(new_f - target), axis=1) <= reach
        new_f, new_c = new_f[keep], new_c[keep]
    return _merge(new_f, new_c)


def _reaches(spec):
    """For each factor, how far the factors to its left can still move a frequency."""
    out, acc = [], 0.0
    for f in spec.factors:
        out.append(acc)
        if isinstance(f, Multiply):
            acc += f.bandwidth
        elif isinstance(f, Compose) and not f.is_shift:
            acc = math.inf
    return out


def _diagonal_entry(spec, mode, reaches):
    target = np.asarray(mode, dtype=np.int64)
    freqs = target[None, :]
    coefs = np.ones(1, dtype=complex)
    for factor, reach in zip(reversed(spec.factors), reversed(reaches)):
        freqs, coefs = _apply_factor(factor, freqs, coefs, target, reach)
    hit = np.all(freqs == target, axis=1)
    return complex(np.sum(coefs[hit]))


def nuclear_trace(spec, budget=2000):
    """sum_k <T e_k, e_k> with T applied to each basis function as a Fourier series.

    This route never forms a matrix: factors act on coefficient lists (the
    diffeomorphism through the Jacobi-Anger expansion), so it is independent
    of both the truncated matrices and the closed-form diagonal.
    """
    manifold = spec.manifold
    if spec.bessel_order <= manifold.dimension:
        raise DivergenceError(
            f"not trace class: total Bessel order {spec.bessel_order} <= n = {manifold.dimension}"
        )
    table = level_table(manifold, count=int(budget))
    cut = float(table.eigenvalues[-1])
    modes = torus_modes(manifold.dimension, cut)
    reaches = _reaches(spec)
    diag = np.array([_diagonal_entry(spec, k, reaches) for k in modes])
    corr, bound = spectral_tail(spec, cut, modes.shape[0])
    return TraceEstimate(complex(np.sum(diag)) + corr, float(bound), len(table), cut)


# -- trace formula and decay ------------------------------------------------------


@dataclass(frozen=True)
class LidskiiReport:
    nuclear_trace: complex
    eigen_sum: complex
    tail_correction: complex
    diff: float
    raw_diff: float
    tolerance: float
    r: float
    q: float
    cutoff: float
    thresholds: dict
    verdicts: dict
    stability: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(v is True for v in self.verdicts.values())

    def to_dict(self):
        return {
            "nuclear_trace": self.nuclear_trace,
            "eigen_sum": self.eigen_sum,
            "tail_correction": self.tail_correction,
            "diff": self.diff,
            "raw_diff": self.raw_diff,
            "tolerance": self.tolerance,
            "r": self.r,
            "q": self.q,
            "cutoff": self.cutoff,
            "thresholds": self.thresholds,
            "verdicts": self.verdicts,
            "stability": self.stability,
        }

    @classmethod
    def from_dict(cls, d):
        def cx(v):
            return complex(v["re"], v["im"]) if isinstance(v, dict) else complex(v)

        return cls(
            nuclear_trace=cx(d["nuclear_trace"]), eigen_sum=cx(d["eigen_sum"]),
            tail_correction=cx(d["tail_correction"]), diff=float(d["diff"]),
            raw_diff=float(d["raw_diff"]), tolerance=float(d["tolerance"]), r=float(d["r"]),
            q=float(d["q"]), cutoff=float(d["cutoff"]), thresholds=dict(d["thresholds"]),
            verdicts=dict(d["verdicts"]), stability=dict(d.get("stability", {})),
        )


def _trace_params(spec, p, k, rho):
    r = gl_nuclearity_index(p)
    return OrderParameters(n=spec.dimension, k=k, rho=rho, p=p, kappa=0.0, r=r)


def lidskii_compare(spec, p, lam, lam2=None, k=0, rho=1.0, budget=2000,
                    guard=DEFAULT_GUARD, drift_tol=1e-4):
    """Nuclear trace against the eigenvalue sum of the lam-truncation.

    The eigenvalue sum is completed by the diagonal tail beyond lam, so the
    comparison is limited by the tail bounds rather than by truncation.
    Passing ``lam2`` adds a stability gate on the eigenvalue-sum drift.
    """
    params = _trace_params(spec, p, k, rho)
    thr = dist1_order_threshold(params)
    mu = spec.nominal_order
    if not thr.admits(mu):
        raise ThresholdViolation(
            f"order {mu} does not satisfy {thr.describe()}", inequality=thr.describe()
        )
    nt = nuclear_trace(spec, budget)
    op = assemble(spec, lam, guard)
    eig_sum = complex(np.sum(eigenvalues(op).values))
    corr, corr_bound = spectral_tail(spec, lam, op.side)
    diff = abs(nt.value - (eig_sum + corr))
    tol = nt.tail_bound + corr_bound + 1e-8 * op.side
    verdicts = {"threshold_satisfied": True, "trace_formula": bool(diff <= tol)}
    stability = {}
    if lam2 is not None:
        op2 = assemble(spec, lam2, guard)
        eig2 = complex(np.sum(eigenvalues(op2).values))
        drift = abs(eig2 - eig_sum)
        stability = {"cutoff2": float(lam2), "eigen_sum2": eig2, "drift": drift,
                     "drift_tol": drift_tol}
        verdicts["stability"] = bool(drift < drift_tol)
    return LidskiiReport(
        nuclear_trace=nt.value, eigen_sum=eig_sum, tail_correction=corr, diff=float(diff),
        raw_diff=float(abs(nt.value - eig_sum)), tolerance=float(tol), r=params.r,
        q=summability_exponent(params.r, p), cutoff=float(lam),
        thresholds={"dist1": thr.to_dict(), "mu": mu}, verdicts=verdicts, stability=stability,
    )


@dataclass(frozen=True)
class DecaySummability:
    fit: PowerLawFit
    predicted: float
    q: float
    q_sum: float
    passed_decay: bool
    passed_summability: bool

    @property
    def passed(self):
        return self.passed_decay and self.passed_summability

    def to_dict(self):
        return {"fit": self.fit.to_dict(), "predicted": self.predicted, "q": self.q,
                "q_sum": self.q_sum, "passed_decay": self.passed_decay,
                "passed_summability": self.passed_summability, "passed": self.passed}


def decay_vs_summability(spec, p, r, lam, k=0, rho=1.0, guard=DEFAULT_GUARD):
    """Eigenvalue decay against -1/r + |1/2 - 1/p| and q-summability of the moduli."""
    params = OrderParameters(n=spec.dimension, k=k, rho=rho, p=p, kappa=0.0, r=r)
    thr = fio_nuclearity_threshold(params, p)
    if not thr.admits(spec.nominal_order):
        raise ContractError(
            f"operator is not {r}-nuclear by the order bound: need {thr.describe()}"
        )
    eigs = eigenvalues(assemble(spec, lam, guard))
    fit = decay_fit(eigs)
    pred = decay_exponent(r, p)
    q = summability_exponent(r, p)
    q_sum = float(np.sum(eigs.moduli**q))
    return DecaySummability(fit, pred, q, q_sum,
                            bool(fit.exponent <= pred + 0.1), bool(fit.exponent * q < -1.0))
