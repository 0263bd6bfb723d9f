"""Closed-form order conditions and exponents.

Lebesgue indices are floats with ``math.inf`` allowed; 1/inf is taken as 0
exactly, so no large surrogate is ever substituted.  Every threshold records
whether the condition is strict and how sharp it is known to be.
"""

import math
from dataclasses import dataclass

from .errors import ConsistencyError, ContractError, UnsupportedError

IFF = "iff"
SUFFICIENT = "sufficient"
NECESSARY_WEAK = "necessary-weak"

AGREEMENT_TOL = 1e-12


def inv(p):
    """1/p with 1/inf = 0."""
    return 0.0 if math.isinf(p) else 1.0 / p


def conjugate_index(p):
    """Hölder conjugate p' = p/(p-1), with 1' = inf and inf' = 1."""
    if p < 1:
        raise ContractError(f"index must be >= 1 (got {p})")
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class Threshold:
    """An order bound ``mu < value`` (strict) or ``mu <= value``."""

    value: float
    strict: bool
    sharp: str
    region: str
    companion: "Threshold | None" = None

    def admits(self, mu):
        return mu < self.value if self.strict else mu <= self.value

    def describe(self):
        op = "<" if self.strict else "<="
        return f"mu {op} {self.value!r} [{self.region}]"

    def to_dict(self):
        return {
            "value": self.value,
            "strict": self.strict,
            "sharp": self.sharp,
            "region": self.region,
            "companion": None if self.companion is None else self.companion.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        comp = d.get("companion")
        return cls(
            value=float(d["value"]),
            strict=bool(d["strict"]),
            sharp=str(d["sharp"]),
            region=str(d["region"]),
            companion=None if comp is None else cls.from_dict(comp),
        )


@dataclass(frozen=True)
class OrderParameters:
    """Dimension n, factorization rank k, type rho, index p, gap kappa, nuclearity r."""

    n: int
    k: int = 0
    rho: float = 1.0
    p: float = 2.0
    kappa: float = 0.0
    r: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ContractError("n must be >= 1")
        if not 0 <= self.k <= max(self.n - 1, 0):
            raise ContractError(f"k must satisfy 0 <= k <= n-1 (got k={self.k}, n={self.n})")
        if not 0.5 <= self.rho <= 1.0:
            raise ContractError("rho must lie in [1/2, 1]")
        if not self.p > 1:
            raise ContractError("p must be > 1")
        if self.kappa < 0:
            raise ContractError("kappa must be >= 0")
        if not self.r > 0:
            raise ContractError("r must be > 0")

    @property
    def sss(self):
        """Coefficient k + (n-k)(1-rho) of the factorization loss."""
        return self.k + (self.n - self.k) * (1.0 - self.rho)

    def to_dict(self):
        return {"n": self.n, "k": self.k, "rho": self.rho, "p": self.p,
                "kappa": self.kappa, "r": self.r}


def sogge_exponent(n, p):
    """Growth exponent phi(p) of L^p norms of L2-normalized eigenfunctions.

    phi = 0 on [1, 2]; (n-1)/2 (1/2 - 1/p) on [2, p_c]; n (1/2 - 1/p) - 1/2 on
    [p_c, inf], with p_c = 2(n+1)/(n-1).  For n = 1 the critical index is
    undefined and phi is taken as 0.
    """
    if p < 1:
        raise ContractError(f"p must be >= 1 (got {p})")
    if n < 1:
        raise ContractError("n must be >= 1")
    if n == 1 or p <= 2:
        return 0.0
    pc = 2.0 * (n + 1) / (n - 1)
    d = 0.5 - inv(p)
    if p <= pc:
        return 0.5 * (n - 1) * d
    return n * d - 0.5


def critical_index(n):
    return math.inf if n == 1 else 2.0 * (n + 1) / (n - 1)


def _agree(values, what):
    if max(values) - min(values) > AGREEMENT_TOL:
        raise ConsistencyError(f"{what}: overlapping branches disagree {values}")
    return values[0] + 0.0


def composite_order(params):
    """mu(kappa): order allowing L^p -> L^(p+kappa) boundedness."""
    n, p, kap, c = params.n, params.p, params.kappa, params.sss
    q = p + kap
    base = -n * kap / (p * q)
    branches = []
    if q <= 2:
        branches.append(base - c * abs(0.5 - 1.0 / q))
    if p >= 2:
        branches.append(base - c * abs(0.5 - 1.0 / p))
    if p <= 2 <= q:
        branches.append(base)
    return _agree(branches, "mu(kappa)")


def composite_region(params):
    q = params.p + params.kappa
    if q <= 2:
        return "p+kappa<=2"
    if params.p >= 2:
        return "2<=p"
    return "p<=2<=p+kappa"


def lp_lq_order_threshold(n, k, rho, p, q):
    """Largest order mu for L^p -> L^q boundedness, 1 < p <= q < inf (non-strict)."""
    if p > q:
        raise UnsupportedError("only p <= q is covered")
    if not (1 < p and q < math.inf):
        raise ContractError("need 1 < p <= q < inf")
    c = OrderParameters(n=n, k=k, rho=rho).sss
    hls = -n * (1.0 / p - 1.0 / q)
    cases = {}
    if q <= 2:
        cases["i"] = hls - c * abs(0.5 - 1.0 / q)
    if p >= 2:
        cases["ii"] = hls - c * abs(0.5 - 1.0 / p)
    if p <= 2 <= q:
        cases["iii"] = hls
    value = _agree(list(cases.values()), "Lp-Lq threshold")
    label = "ii" if "ii" in cases else ("i" if "i" in cases else "iii")
    return Threshold(value, strict=False, sharp=SUFFICIENT, region=f"case ({label})")


def bessel_nuclearity_threshold(n, r, p1, p2):
    """Order s above which sqrt(1-Lap)^(-s): L^p1 -> L^p2 is r-nuclear (strict)."""
    if not 0 < r <= 1:
        raise UnsupportedError("Bessel nuclearity threshold needs 0 < r <= 1")
    if not (1 <= p1 < math.inf) or p2 < 1:
        raise ContractError("need 1 <= p1 < inf and 1 <= p2 <= inf")
    value = n / r + sogge_exponent(n, p2) + sogge_exponent(n, conjugate_index(p1))
    return Threshold(value, strict=True, sharp=SUFFICIENT, region="bessel: s > value")


def fio_nuclearity_threshold(params, p1):
    """Order bound for r-nuclearity of L^p1 -> L^(p2+kappa), p2 = params.p."""
    if not 1 <= p1 < math.inf:
        raise ContractError("need 1 <= p1 < inf")
    if math.isinf(params.p):
        raise ContractError("need p2 < inf")
    n = params.n
    value = (composite_order(params) - n / params.r
             - sogge_exponent(n, params.p) - sogge_exponent(n, conjugate_index(p1)))
    return Threshold(value, strict=True, sharp=SUFFICIENT, region=composite_region(params))


def gl_nuclearity_index(p):
    """r with 1/r = 1 + |1/p - 1/2|; lies in [2/3, 1]."""
    if p < 1:
        raise ContractError("p must be >= 1")
    return 1.0 / (1.0 + abs(inv(p) - 0.5))


def summability_exponent(r, p):
    """q with 1/r = 1/q + |1/2 - 1/p|."""
    if not 0 < r <= 1:
        raise ContractError("r must lie in (0, 1]")
    denom = 1.0 / r - abs(0.5 - inv(p))
    if denom <= 0:
        raise ContractError("1/r - |1/2 - 1/p| must be positive")
    return 1.0 / denom


def decay_exponent(r, p):
    """Exponent e in |lambda_j| = O(j^e): -1/r + |1/2 - 1/p|."""
    if not 0 < r <= 1:
        raise ContractError("r must lie in (0, 1]")
    return -1.0 / r + abs(0.5 - inv(p))


def schatten_order_threshold(n, r):
    """mu < -n/r for S_r(L^2) membership.

    Necessary and sufficient for integer r; sufficient only otherwise, with
    the weak necessary condition mu <= -n/r attached for r > 1.
    """
    if not r > 0:
        raise ContractError("r must be > 0")
    value = -n / r
    integer = float(r).is_integer()
    if integer:
        return Threshold(value, strict=True, sharp=IFF, region=f"S_{r:g}")
    companion = None
    if r > 1:
        companion = Threshold(value, strict=False, sharp=NECESSARY_WEAK, region=f"S_{r:g}")
    return Threshold(value, strict=True, sharp=SUFFICIENT, region=f"S_{r:g}", companion=companion)


def dist1_order_threshold(params):
    """Order bound under which T: L^(p+kappa) -> L^(p+kappa) satisfies the trace formula.

    The first region (p + kappa <= 2) uses n(1/2 + 1/(p+kappa)) and the other
    two use n(3/2 - 1/(p+kappa)); both equal n(1 + |1/2 - 1/(p+kappa)|).
    """
    if math.isinf(params.p):
        raise ContractError("need p < inf")
    n, p, kap = params.n, params.p, params.kappa
    q = p + kap
    mu = composite_order(params)
    phis = sogge_exponent(n, p) + sogge_exponent(n, q / (q - 1.0))
    if q <= 2:
        loss = n * (0.5 + 1.0 / q)
    else:
        loss = n * (1.5 - 1.0 / q)
    return Threshold(mu - loss - phis, strict=True, sharp=SUFFICIENT,
                     region=composite_region(params))


def dist1_nuclearity_index(params):
    """The r fixed by 1/r = 1 + |1/2 - 1/(p+kappa)|."""
    return gl_nuclearity_index(params.p + params.kappa)


def all_thresholds(params, p1=None, q=None):
    """Every threshold applicable to ``params``, keyed by name (for the CLI)."""
    n, p, r = params.n, params.p, params.r
    out = {
        "sogge_exponent_p": sogge_exponent(n, p),
        "critical_index": critical_index(n),
        "composite_order": composite_order(params),
        "composite_region": composite_region(params),
        "schatten": schatten_order_threshold(n, r).to_dict(),
        "gl_nuclearity_index": gl_nuclearity_index(p + params.kappa),
        "dist1": dist1_order_threshold(params).to_dict(),
    }
    if 0 < r <= 1:
        out["summability_exponent"] = summability_exponent(r, p + params.kappa)
        out["decay_exponent"] = decay_exponent(r, p + params.kappa)
        pp1 = p if p1 is None else p1
        if pp1 < math.inf:
            out["bessel_nuclearity"] = bessel_nuclearity_threshold(n, r, pp1, p).to_dict()
            out["fio_nuclearity"] = fio_nuclearity_threshold(params, pp1).to_dict()
    qq = p + params.kappa if q is None else q
    if p <= qq < math.inf:
        out["lp_lq"] = lp_lq_order_threshold(n, params.k, params.rho, p, qq).to_dict()
    return out
