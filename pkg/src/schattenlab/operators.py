"""Truncated matrices of model operators in the torus Fourier basis.

An ``OperatorSpec`` is an ordered composition T = F_1 o F_2 o ... o F_m of

* ``Bessel(s)``     -- sqrt(1 - Lap)^(-s), diagonal with (1 + |k|^2)^(-s/2);
* ``Multiply(a)``   -- multiplication by a trigonometric polynomial with
                       Fourier coefficients a_hat(j);
* ``Compose(tau, eps)`` -- f -> f o kappa with kappa(x) = x + tau + eps sin x
                       on T^1, or the shift x -> x + tau on T^n (eps = 0).

Matrix entries are A[m, k] = <T e_k, e_m>, with modes ordered by (|k|^2, lex k),
so the modes below any cutoff form a prefix of the modes below a larger one.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConfigurationError, ContractError, DivergenceError, UnsupportedError
from .geometry import ManifoldModel, level_table, tail_interval, torus_modes

MIN_DIFFEO_MARGIN = 0.1
DEFAULT_GUARD = 2.0
MAX_DENSE_SIDE = 6000


def _as_freq(j, n):
    t = (int(j),) if np.ndim(j) == 0 else tuple(int(v) for v in j)
    if len(t) != n:
        raise ContractError(f"frequency {j!r} does not have {n} components")
    return t


@dataclass(frozen=True)
class Bessel:
    s: float

    @property
    def order(self):
        return -float(self.s)


@dataclass(frozen=True)
class Multiply:
    """Multiplication by sum_j coef_j exp(i j.x); ``terms`` is a tuple of (freq, coef)."""

    terms: tuple

    @classmethod
    def from_coefficients(cls, coeffs, n=1):
        merged = {}
        for j, c in dict(coeffs).items():
            key = _as_freq(j, n)
            merged[key] = merged.get(key, 0) + complex(c)
        return cls(tuple(sorted(merged.items())))

    @property
    def order(self):
        return 0.0

    @property
    def dimension(self):
        return len(self.terms[0][0]) if self.terms else None

    def coefficient(self, j):
        j = tuple(j)
        for f, c in self.terms:
            if f == j:
                return c
        return 0j

    @property
    def mean(self):
        """a_hat(0)."""
        if not self.terms:
            return 0j
        return self.coefficient((0,) * len(self.terms[0][0]))

    @property
    def bandwidth(self):
        return max((max(abs(v) for v in f) for f, _ in self.terms), default=0)

    def adjoint(self):
        return Multiply(tuple(sorted((tuple(-v for v in f), complex(np.conj(c)))
                                     for f, c in self.terms)))


@dataclass(frozen=True)
class Compose:
    tau: tuple
    eps: float = 0.0

    def __post_init__(self):
        tau = self.tau
        tau = (float(tau),) if np.ndim(tau) == 0 else tuple(float(v) for v in tau)
        object.__setattr__(self, "tau", tau)
        if 1.0 - abs(self.eps) < MIN_DIFFEO_MARGIN:
            raise ContractError("Compose needs 1 - |eps| >= 0.1")
        if self.eps != 0.0 and len(tau) != 1:
            raise UnsupportedError("eps-perturbed diffeomorphisms are only modeled on T^1")

    @property
    def order(self):
        return 0.0

    @property
    def is_shift(self):
        return self.eps == 0.0

    def adjoint(self):
        if not self.is_shift:
            raise UnsupportedError("adjoint of a non-shift composition is not a composition")
        return Compose(tuple(-t for t in self.tau), 0.0)


@dataclass(frozen=True)
class OperatorSpec:
    dimension: int
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        ManifoldModel.torus(self.dimension)
        for f in self.factors:
            if isinstance(f, Multiply) and f.terms and f.dimension != self.dimension:
                raise ContractError("Multiply frequencies do not match the torus dimension")
            if isinstance(f, Compose) and len(f.tau) != self.dimension:
                raise ContractError("Compose shift does not match the torus dimension")
            if not isinstance(f, (Bessel, Multiply, Compose)):
                raise ContractError(f"unknown factor {f!r}")

    @property
    def manifold(self):
        return ManifoldModel.torus(self.dimension)

    @property
    def bessel_order(self):
        """Total s over Bessel factors."""
        return float(sum(f.s for f in self.factors if isinstance(f, Bessel)))

    @property
    def nominal_order(self):
        return -self.bessel_order

    def adjoint(self):
        out = []
        for f in reversed(self.factors):
            out.append(f if isinstance(f, Bessel) else f.adjoint())
        return OperatorSpec(self.dimension, tuple(out))


def spec_for(manifold, factors):
    """Convenience constructor that rejects non-torus manifolds."""
    if not manifold.is_torus:
        raise UnsupportedError("operator matrices are only assembled on tori")
    return OperatorSpec(manifold.dimension, tuple(factors))


# -- assembly --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """Finite section of an operator.

    ``data`` is the dense matrix, or the diagonal vector when ``diagonal`` is
    set; ``matrix`` always returns the dense form.
    """

    manifold: ManifoldModel
    cutoff: float
    modes: np.ndarray
    data: np.ndarray
    diagonal: bool = False

    @property
    def side(self):
        return int(self.modes.shape[0])

    @property
    def matrix(self):
        if self.diagonal:
            return np.diag(self.data)
        return self.data

    def diagonal_entries(self):
        return self.data if self.diagonal else np.diagonal(self.data).copy()


def _encode(modes):
    off, width = 1 << 20, 1 << 21
    key = np.zeros(modes.shape[0], dtype=np.int64)
    for i in range(modes.shape[1]):
        key += (modes[:, i] + off) * (width**i)
    return key


def _lookup(modes):
    keys = _encode(modes)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]

    def find(targets):
        t = _encode(targets)
        pos = np.searchsorted(sorted_keys, t)
        pos = np.clip(pos, 0, len(sorted_keys) - 1)
        hit = sorted_keys[pos] == t
        return np.where(hit, order[pos], -1)

    return find


def _multiply_matrix(factor, modes):
    side = modes.shape[0]
    mat = np.zeros((side, side), dtype=complex)
    find = _lookup(modes)
    cols = np.arange(side)
    for j, c in factor.terms:
        rows = find(modes + np.asarray(j, dtype=np.int64))
        ok = rows >= 0
        mat[rows[ok], cols[ok]] += c
    return mat


def _compose_matrix(factor, modes, quad_points):
    k = modes[:, 0].astype(float)
    x = 2.0 * np.pi * np.arange(quad_points) / quad_points
    phase = x + factor.tau[0] + factor.eps * np.sin(x)
    vals = np.exp(1j * np.multiply.outer(phase, k))
    coef = np.fft.fft(vals, axis=0) / quad_points
    return coef[np.mod(modes[:, 0], quad_points), :]


def _factor_operator(factor, modes, quad_points):
    """(is_diagonal, data) for one factor on the given mode set."""
    if isinstance(factor, Bessel):
        norm2 = np.sum(modes * modes, axis=1).astype(float)
        return True, (1.0 + norm2) ** (-factor.s / 2.0) + 0j
    if isinstance(factor, Compose):
        if factor.is_shift:
            return True, np.exp(1j * (modes @ np.asarray(factor.tau)))
        return False, _compose_matrix(factor, modes, quad_points)
    return False, _multiply_matrix(factor, modes)


def required_quad_points(lam, guard, eps=0.0):
    internal = guard * lam
    floor = max(4.0 * internal, 2.0 * internal * (1.0 + abs(eps)) + 64.0)
    return 1 << int(math.ceil(math.log2(floor)))


def assemble(spec, lam, guard=DEFAULT_GUARD, quad_points=None, manifold=None):
    """Matrix of ``spec`` restricted to modes with sqrt(1 + |k|^2) <= lam.

    Each factor is built on the larger mode set with cutoff guard * lam, the
    factors are multiplied in order, and the product is restricted.
    """
    if manifold is not None and not manifold.is_torus:
        raise UnsupportedError("operator matrices are only assembled on tori")
    if lam < 1:
        raise ContractError("cutoff must be >= 1 (the constant mode)")
    if guard < 1:
        raise ContractError("guard must be >= 1")
    n = spec.dimension
    internal = torus_modes(n, guard * lam)
    side = int(np.searchsorted(
        np.sqrt(1.0 + np.sum(internal * internal, axis=1)), lam, side="right"))
    diagonal_only = all(
        isinstance(f, Bessel) or (isinstance(f, Compose) and f.is_shift) for f in spec.factors
    )
    if not diagonal_only and internal.shape[0] > MAX_DENSE_SIDE:
        raise ContractError(
            f"internal side {internal.shape[0]} exceeds dense limit {MAX_DENSE_SIDE}"
        )
    eps_max = max((abs(f.eps) for f in spec.factors if isinstance(f, Compose)), default=0.0)
    needed = int(math.ceil(4.0 * guard * lam))
    if quad_points is None:
        quad_points = required_quad_points(lam, guard, eps_max)
    elif quad_points < needed:
        raise ContractError(
            f"quadrature under-resolved: {quad_points} points < 4 * guard * lam = {needed}"
        )
    is_diag, acc = True, np.ones(internal.shape[0], dtype=complex)
    for factor in spec.factors:
        f_diag, f = _factor_operator(factor, internal, quad_points)
        if is_diag and f_diag:
            acc = acc * f
        elif is_diag:
            acc = acc[:, None] * f
        elif f_diag:
            acc = acc * f[None, :]
        else:
            acc = acc @ f
        is_diag = is_diag and f_diag
    modes = internal[:side]
    data = acc[:side] if is_diag else np.ascontiguousarray(acc[:side, :side])
    return TruncatedOperator(ManifoldModel.torus(n), float(lam), modes, data, is_diag)


def matrix_trace(op):
    return complex(np.sum(op.diagonal_entries()))


def truncation_stability(spec, lam1, lam2, functional="trace", r=None, guard=DEFAULT_GUARD):
    """Relative change |F(lam2) - F(lam1)| / max(|F(lam2)|, 1e-30).

    ``functional`` is ``"trace"`` or ``"schatten"`` (sum of s_j^r).
    """
    if lam1 != lam2 and lam2 < 1.5 * lam1:
        raise ContractError("need lam2 >= 1.5 * lam1")
    if lam1 == lam2:
        return 0.0

    def value(lam):
        op = assemble(spec, lam, guard)
        if functional == "trace":
            return matrix_trace(op)
        if functional == "schatten":
            if r is None or r <= 0:
                raise ContractError("schatten functional needs r > 0")
            from .spectral_analysis import singular_values

            return float(np.sum(singular_values(op).values ** r))
        raise ContractError(f"unknown functional {functional!r}")

    f1, f2 = value(lam1), value(lam2)
    return float(abs(f2 - f1) / max(abs(f2), 1e-30))


# -- diagonal of the kernel --------------------------------------------------------


@dataclass(frozen=True)
class TraceEstimate:
    value: complex
    tail_bound: float
    levels: int
    cutoff: float

    def to_dict(self):
        return {"re": self.value.real, "im": self.value.imag,
                "tail_bound": self.tail_bound, "levels": self.levels, "cutoff": self.cutoff}


@dataclass(frozen=True)
class _DiagonalModel:
    """diag(k) = const * w(k) * (1 + |k|^2)^(-s/2) with |w| <= 1."""

    const: complex
    s: float
    composes: tuple

    @property
    def constant_tail(self):
        return not self.composes

    def weights(self, modes):
        w = np.ones(modes.shape[0], dtype=complex)
        for c in self.composes:
            w *= np.exp(1j * (modes @ np.asarray(c.tau)))
            if c.eps != 0.0:
                w *= special.j0(c.eps * modes[:, 0])
        return w


def _diagonal_model(spec):
    non_diag = [f for f in spec.factors
                if isinstance(f, Multiply) or (isinstance(f, Compose) and not f.is_shift)]
    if len(non_diag) > 1:
        raise UnsupportedError("closed-form diagonal needs at most one non-diagonal factor")
    const = 1.0 + 0j
    for f in spec.factors:
        if isinstance(f, Multiply):
            const *= f.mean
    composes = tuple(f for f in spec.factors if isinstance(f, Compose))
    return _DiagonalModel(const, spec.bessel_order, composes)


def _norm_product_bound(spec):
    """(C, s_right) with |<T e_k, e_k>| <= C lambda_k^-s_right.

    Only the Bessel factors acting before every non-diagonal factor give
    decay; the others are bounded by their L^2 operator norms.
    """
    const, s_right, right = 1.0, 0.0, True
    for f in reversed(spec.factors):
        if isinstance(f, Bessel):
            if right:
                s_right += f.s
        elif isinstance(f, Multiply):
            const *= sum(abs(c) for _, c in f.terms)
            right = False
        elif not f.is_shift:
            const *= (1.0 - abs(f.eps)) ** -0.5
            right = False
    return const, s_right


def spectral_tail(spec, lam_cut, count_at_cut=None):
    """Estimated sum of diagonal entries over modes with eigenvalue > lam_cut.

    Returns (correction, bound): when the diagonal is const * lambda^-s the
    correction is const times the midpoint of the rigorous tail bracket and
    the bound its half-width; otherwise (oscillating factors) the correction
    is 0 and the bound covers the whole tail.  Chains without a closed-form
    diagonal fall back to a norm-product bound.
    """
    manifold = spec.manifold
    if spec.bessel_order <= manifold.dimension:
        raise DivergenceError(
            f"diagonal sum diverges: total Bessel order {spec.bessel_order} <= n = {manifold.dimension}"
        )
    if count_at_cut is None:
        from .geometry import counting_function

        count_at_cut = counting_function(manifold, lam_cut)
    try:
        model = _diagonal_model(spec)
    except UnsupportedError:
        const, s_right = _norm_product_bound(spec)
        if s_right <= manifold.dimension:
            return 0j, math.inf
        return 0j, const * tail_interval(manifold, s_right, lam_cut, count_at_cut)[1]
    lo, hi = tail_interval(manifold, model.s, lam_cut, count_at_cut)
    if model.constant_tail:
        return model.const * 0.5 * (lo + hi), abs(model.const) * 0.5 * (hi - lo)
    return 0j, abs(model.const) * hi


def kernel_diagonal_integral(spec, budget=4000):
    """int K(x, x) dx from the closed-form diagonal <T e_k, e_k>, with tail bound.

    Multiply contributes a_hat(0); a shift by tau contributes exp(i k.tau); the
    T^1 diffeomorphism x + tau + eps sin x contributes exp(i k tau) J_0(k eps).
    """
    model = _diagonal_model(spec)
    manifold = spec.manifold
    if model.s <= manifold.dimension:
        raise DivergenceError(
            f"kernel diagonal not integrable: s = {model.s} <= n = {manifold.dimension}"
        )
    table = level_table(manifold, count=int(budget))
    cut = float(table.eigenvalues[-1])
    modes = torus_modes(manifold.dimension, cut)
    norm2 = np.sum(modes * modes, axis=1).astype(float)
    diag = model.const * model.weights(modes) * (1.0 + norm2) ** (-model.s / 2.0)
    partial = complex(np.sum(diag))
    corr, bound = spectral_tail(spec, cut, modes.shape[0])
    return TraceEstimate(partial + corr, float(bound), len(table), cut)
