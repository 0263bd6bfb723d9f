"""Spectral data of sqrt(1 - Laplacian) on model manifolds.

Tori T^n (n <= 3) carry the probability-normalized measure, so the Fourier
exponentials exp(i k.x) are orthonormal with eigenvalue sqrt(1 + |k|^2).  The
2-sphere carries surface measure (total 4 pi) with eigenvalues
sqrt(1 + l(l+1)) of multiplicity 2l + 1.  A *level* groups every mode with the
same eigenvalue; on tori that means every lattice vector with the same |k|^2.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import ConfigurationError, ContractError, FitError
from .fitting import PowerLawFit, fit_power_law

BORDERLINE_BAND = 1e-9


@dataclass(frozen=True)
class ManifoldModel:
    kind: str
    dimension: int

    def __post_init__(self):
        if self.kind == "torus":
            if not (isinstance(self.dimension, (int, np.integer)) and 1 <= self.dimension <= 3):
                raise ConfigurationError(
                    f"torus dimension must be 1, 2 or 3 (got {self.dimension!r})"
                )
        elif self.kind == "sphere":
            if self.dimension != 2:
                raise ConfigurationError("only the 2-sphere is modeled")
        else:
            raise ConfigurationError(f"unknown manifold kind {self.kind!r}")

    @classmethod
    def torus(cls, n):
        return cls("torus", int(n))

    @classmethod
    def sphere(cls):
        return cls("sphere", 2)

    @property
    def is_torus(self):
        return self.kind == "torus"

    @property
    def volume(self):
        return 1.0 if self.is_torus else 4.0 * math.pi

    @property
    def label(self):
        return f"T{self.dimension}" if self.is_torus else "S2"

    def to_dict(self):
        return {"kind": self.kind, "dimension": int(self.dimension)}

    @classmethod
    def from_dict(cls, d):
        return cls(str(d["kind"]), int(d["dimension"]))


class SphereMode(NamedTuple):
    ell: int
    m: int


def check_sphere_mode(mode):
    ell, m = int(mode[0]), int(mode[1])
    if ell < 0 or abs(m) > ell:
        raise ContractError(f"invalid spherical harmonic index (l={ell}, m={m})")
    return SphereMode(ell, m)


@dataclass(frozen=True)
class SpectralLevel:
    index: int
    eigenvalue: float
    multiplicity: int
    modes: tuple = ()


@dataclass(frozen=True)
class LevelTable:
    """Array form of a list of levels, cheap enough for large cutoffs.

    ``keys`` holds |k|^2 on tori and l on the sphere.
    """

    manifold: ManifoldModel
    keys: np.ndarray
    eigenvalues: np.ndarray
    multiplicities: np.ndarray

    def __len__(self):
        return int(self.keys.size)

    @property
    def total_modes(self):
        return int(self.multiplicities.sum())


def eigenvalue_of_key(manifold, key):
    key = np.asarray(key, dtype=float)
    if manifold.is_torus:
        return np.sqrt(1.0 + key)
    return np.sqrt(1.0 + key * (key + 1.0))


def _sphere_max_ell(lam):
    if lam < 1.0:
        return -1
    ell = int(math.floor((-1.0 + math.sqrt(max(4.0 * lam * lam - 3.0, 0.0))) / 2.0))
    while math.sqrt(1.0 + (ell + 1) * (ell + 2)) <= lam:
        ell += 1
    while ell >= 0 and math.sqrt(1.0 + ell * (ell + 1)) > lam:
        ell -= 1
    return ell


def _torus_max_key(lam):
    """Largest integer j with sqrt(1 + j) <= lam, or -1."""
    if lam < 1.0:
        return -1
    j = int(math.floor(lam * lam - 1.0))
    while math.sqrt(1.0 + j + 1) <= lam:
        j += 1
    while j >= 0 and math.sqrt(1.0 + j) > lam:
        j -= 1
    return j


def _torus1_keys(kmax):
    k = np.arange(kmax + 1, dtype=np.int64)
    mult = np.where(k == 0, 1, 2).astype(np.int64)
    return k * k, mult


def level_table(manifold, lam_max=None, count=None):
    """Levels with eigenvalue <= lam_max, or the first ``count`` levels."""
    if (lam_max is None) == (count is None):
        raise ContractError("give exactly one of lam_max or count")
    if lam_max is not None and lam_max < 1.0:
        raise ContractError("lam_max must be >= 1")
    if count is not None and count < 1:
        raise ContractError("count must be positive")
    if not manifold.is_torus:
        top = _sphere_max_ell(lam_max) if lam_max is not None else count - 1
        ell = np.arange(top + 1, dtype=np.int64)
        return LevelTable(manifold, ell, eigenvalue_of_key(manifold, ell), 2 * ell + 1)
    n = manifold.dimension
    if n == 1:
        if lam_max is not None:
            kmax = math.isqrt(_torus_max_key(lam_max))
        else:
            kmax = count - 1
        keys, mult = _torus1_keys(kmax)
        return LevelTable(manifold, keys, eigenvalue_of_key(manifold, keys), mult)
    if lam_max is not None:
        jmax = _torus_max_key(lam_max)
        counts = kernels.lattice_norm_counts(n, jmax)
        keys = np.flatnonzero(counts).astype(np.int64)
    else:
        jmax = max(16, 2 * count)
        while True:
            counts = kernels.lattice_norm_counts(n, jmax)
            keys = np.flatnonzero(counts).astype(np.int64)
            if keys.size >= count:
                keys = keys[:count]
                break
            jmax *= 2
    return LevelTable(manifold, keys, eigenvalue_of_key(manifold, keys), counts[keys])


def torus_modes(n, lam_max):
    """Lattice vectors with sqrt(1 + |k|^2) <= lam_max, ordered by (|k|^2, lex k)."""
    jmax = _torus_max_key(lam_max)
    if jmax < 0:
        return np.zeros((0, n), dtype=np.int64)
    r = math.isqrt(jmax)
    axis = np.arange(-r, r + 1, dtype=np.int64)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    norm2 = np.sum(pts * pts, axis=1)
    pts, norm2 = pts[norm2 <= jmax], norm2[norm2 <= jmax]
    # np.lexsort sorts by the last key first
    order = np.lexsort(tuple(pts[:, i] for i in range(n - 1, -1, -1)) + (norm2,))
    return pts[order]


def spectral_levels(manifold, lam_max, with_modes=True):
    """All levels with eigenvalue <= lam_max, sorted, multiplicities exact."""
    table = level_table(manifold, lam_max=lam_max)
    if not with_modes:
        return [
            SpectralLevel(i, float(lam), int(d))
            for i, (lam, d) in enumerate(zip(table.eigenvalues, table.multiplicities))
        ]
    levels = []
    if manifold.is_torus:
        modes = torus_modes(manifold.dimension, lam_max)
        norm2 = np.sum(modes * modes, axis=1)
        bounds = np.searchsorted(norm2, table.keys, side="left")
        ends = np.searchsorted(norm2, table.keys, side="right")
        for i, (lo, hi) in enumerate(zip(bounds, ends)):
            group = tuple(tuple(int(v) for v in row) for row in modes[lo:hi])
            levels.append(SpectralLevel(i, float(table.eigenvalues[i]), len(group), group))
    else:
        for i, ell in enumerate(table.keys):
            ell = int(ell)
            group = tuple(SphereMode(ell, m) for m in range(-ell, ell + 1))
            levels.append(SpectralLevel(i, float(table.eigenvalues[i]), len(group), group))
    return levels


def counting_function(manifold, lam):
    """N(lam): number of eigenfunctions (with multiplicity) with eigenvalue <= lam."""
    return int(counting_table(manifold, [lam])[0])


def counting_table(manifold, lams):
    """Vectorized counting function over an array of eigenvalue thresholds."""
    lams = np.asarray(lams, dtype=float)
    if np.any(lams < 0):
        raise ContractError("counting function needs lam >= 0")
    out = np.zeros(lams.shape, dtype=np.int64)
    if not manifold.is_torus:
        for idx, lam in np.ndenumerate(lams):
            ell = _sphere_max_ell(float(lam))
            out[idx] = (ell + 1) ** 2
        return out
    n = manifold.dimension
    top = float(lams.max()) if lams.size else 0.0
    jmax = _torus_max_key(top)
    if jmax < 0:
        return out
    if n == 1:
        for idx, lam in np.ndenumerate(lams):
            j = _torus_max_key(float(lam))
            out[idx] = 0 if j < 0 else 2 * math.isqrt(j) + 1
        return out
    cum = np.cumsum(kernels.lattice_norm_counts(n, jmax))
    for idx, lam in np.ndenumerate(lams):
        j = _torus_max_key(float(lam))
        out[idx] = 0 if j < 0 else cum[j]
    return out


def weyl_fit(manifold, lam_grid):
    """Least-squares exponent of N(lam) against lam; estimates the dimension."""
    grid = np.asarray(lam_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 8:
        raise FitError("Weyl fit needs at least 8 grid points")
    if np.any(np.diff(grid) <= 0):
        raise FitError("Weyl grid must be strictly increasing")
    if grid[0] < 10.0:
        raise FitError("Weyl grid must start at lam >= 10")
    counts = counting_table(manifold, grid)
    return fit_power_law(grid, counts.astype(float))


def _levels_arrays(levels):
    if isinstance(levels, LevelTable):
        return levels.eigenvalues, levels.multiplicities
    lam = np.array([lv.eigenvalue for lv in levels], dtype=float)
    mult = np.array([lv.multiplicity for lv in levels], dtype=np.int64)
    return lam, mult


def shell_sum(levels, values, lam):
    """Sum of d_l * v_l over the dyadic shell lam/2 < lam_l <= lam."""
    eig, mult = _levels_arrays(levels)
    values = np.asarray(values)
    if values.shape != eig.shape:
        raise ContractError(
            f"values ({values.shape}) not aligned with levels ({eig.shape})"
        )
    mask = (eig > lam / 2.0) & (eig <= lam)
    return float(np.sum(mult[mask] * values[mask]))


# -- convergence of spectral sums ------------------------------------------------


def _count_envelope(manifold, lam_cut):
    """(V, a, b, n) with V (lam - a)^n <= N(lam) <= V (lam + b)^n for lam >= lam_cut.

    Torus: unit cubes centred at lattice points of the ball of radius
    R = sqrt(lam^2 - 1) cover the ball of radius R - sqrt(n)/2 and sit inside
    the ball of radius R + sqrt(n)/2; and lam - 1/lam <= R <= lam.
    Sphere: N = (L + 1)^2 with u <= L + 1 <= u + 1,
    u = (sqrt(4 lam^2 - 3) - 1)/2 in [lam - 1/2 - 1/(2 lam), lam - 1/2].
    """
    n = manifold.dimension
    if manifold.is_torus:
        vol = math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)
        c = math.sqrt(n) / 2.0
        return vol, c + 1.0 / lam_cut, c, n
    return 1.0, 0.5 + 0.5 / lam_cut, 0.5, 2


def _envelope_integral(vol, shift, n, kappa, lam):
    """kappa * int_lam^inf vol * (t + shift)^n * t^(-kappa-1) dt, for kappa > n."""
    total = 0.0
    for i in range(n + 1):
        total += math.comb(n, i) * shift ** (n - i) * lam ** (i - kappa) / (kappa - i)
    return kappa * vol * total


def tail_interval(manifold, kappa, lam_cut, count_at_cut):
    """Rigorous bracket for sum over lam_l > lam_cut of d_l * lam_l^(-kappa).

    Uses the Stieltjes identity
    tail = -N(lam_cut) lam_cut^-kappa + kappa int_{lam_cut}^inf N(t) t^(-kappa-1) dt
    with the counting envelope from ``_count_envelope``.
    """
    if kappa <= manifold.dimension:
        raise ContractError("tail bracket needs kappa > n")
    vol, a, b, n = _count_envelope(manifold, lam_cut)
    boundary = count_at_cut * lam_cut ** (-kappa)
    hi = _envelope_integral(vol, b, n, kappa, lam_cut) - boundary
    if a <= lam_cut:
        lo = _envelope_integral(vol, -a, n, kappa, lam_cut) - boundary
    else:
        lo = 0.0
    return max(lo, 0.0), max(hi, 0.0)


@dataclass(frozen=True)
class SummabilityResult:
    """Verdict for sum over levels of d_l * lam_l^(-kappa).

    For ``converges``, ``value`` is partial sum plus the midpoint of the
    rigorous tail bracket and ``tail_bound`` its half-width.
    """

    verdict: str
    kappa: float
    dimension: int
    partial_sum: float
    levels: int
    cutoff: float
    value: float | None = None
    tail_bound: float | None = None

    def to_dict(self):
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d):
        return cls(
            verdict=str(d["verdict"]),
            kappa=float(d["kappa"]),
            dimension=int(d["dimension"]),
            partial_sum=float(d["partial_sum"]),
            levels=int(d["levels"]),
            cutoff=float(d["cutoff"]),
            value=None if d.get("value") is None else float(d["value"]),
            tail_bound=None if d.get("tail_bound") is None else float(d["tail_bound"]),
        )


def partial_level_sums(table, kappa):
    """Cumulative sums of d_l * lam_l^(-kappa), in level order."""
    return np.cumsum(table.multiplicities * table.eigenvalues ** (-kappa))


def summability_classifier(manifold, kappa, budget=4000):
    """Classify convergence of sum_l d_l lam_l^(-kappa); converges iff kappa > n."""
    if budget < 100:
        raise ContractError("level budget must be at least 100")
    table = level_table(manifold, count=int(budget))
    partial = float(partial_level_sums(table, kappa)[-1])
    n = manifold.dimension
    cutoff = float(table.eigenvalues[-1])
    common = dict(kappa=float(kappa), dimension=n, partial_sum=partial,
                  levels=len(table), cutoff=cutoff)
    if abs(kappa - n) < BORDERLINE_BAND:
        return SummabilityResult("borderline", **common)
    if kappa < n:
        return SummabilityResult("diverges", **common)
    lo, hi = tail_interval(manifold, kappa, cutoff, table.total_modes)
    return SummabilityResult(
        "converges", value=partial + 0.5 * (lo + hi), tail_bound=0.5 * (hi - lo), **common
    )
