"""Eigenbasis evaluation, quadrature grids, L^p norms and Sogge growth fits.

Sphere points are (colatitude, longitude).  Spherical harmonics are complex,
orthonormal for surface measure, with the Condon-Shortley phase, and
Y_l^{-m} = (-1)^m conj(Y_l^m).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ContractError, UnsupportedError
from .fitting import PowerLawFit, fit_power_law
from .geometry import ManifoldModel, check_sphere_mode, eigenvalue_of_key

ZONAL = "zonal"
HIGHEST_WEIGHT = "highest-weight"


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Tensor-product rule; ``nodes`` has shape (N, dim), ``weights`` sums to the volume.

    ``axes`` keeps the one-dimensional factors (angles per torus axis, or
    (colatitudes, longitudes) on the sphere) in the order the nodes are
    flattened, so separable functions can be sampled without a full loop.
    """

    manifold: ManifoldModel
    nodes: np.ndarray
    weights: np.ndarray
    degree: int
    axes: tuple

    def __len__(self):
        return int(self.weights.size)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        if np.shape(self.values) != (len(self.grid),):
            raise ContractError("value count must equal node count")


def _sphere_harmonic(ell, m, theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    am = abs(m)
    p = kernels.legendre_table(am, ell, np.cos(theta).ravel())[-1].reshape(theta.shape)
    y = p * np.exp(1j * am * phi)
    if m < 0:
        y = (-1) ** am * np.conj(y)
    return y


def evaluate_mode(manifold, mode, point):
    """Value of the basis function ``mode`` at ``point`` (scalars or broadcastable arrays).

    Torus points are angle vectors of length n (last axis); sphere points are
    (colatitude, longitude) pairs.
    """
    if manifold.is_torus:
        k = np.atleast_1d(np.asarray(mode, dtype=float))
        if k.size != manifold.dimension:
            raise ContractError("torus mode must have n components")
        x = np.asarray(point, dtype=float)
        if manifold.dimension == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            phase = k[0] * x
        else:
            phase = x @ k
        out = np.exp(1j * phase)
    else:
        ell, m = check_sphere_mode(mode)
        theta, phi = point
        out = _sphere_harmonic(ell, m, theta, phi)
    return complex(out) if np.ndim(out) == 0 else out


def sphere_grid_resolution(degree):
    """Resolution whose sphere grid integrates Y_a conj(Y_b) exactly for degrees <= ``degree``."""
    return int(degree) + 1


def quadrature_grid(manifold, resolution):
    """Uniform trapezoidal grid on tori; Gauss-Legendre x uniform longitude on S^2.

    Torus: ``resolution`` points per axis, exact for trigonometric polynomials
    of degree < resolution, so products of modes with |k_i| <= (resolution-1)//2.
    Sphere: ``resolution`` Gauss-Legendre colatitudes and 2*resolution
    longitudes, exact for products of harmonics of degree <= resolution - 1.
    """
    if resolution < 4:
        raise ContractError("resolution must be at least 4")
    if manifold.is_torus:
        n = manifold.dimension
        axis = 2.0 * np.pi * np.arange(resolution) / resolution
        grids = np.meshgrid(*([axis] * n), indexing="ij")
        nodes = np.stack([g.ravel() for g in grids], axis=1)
        weights = np.full(nodes.shape[0], 1.0 / nodes.shape[0])
        return QuadratureGrid(manifold, nodes, weights, (resolution - 1) // 2, (axis,) * n)
    x, w = np.polynomial.legendre.leggauss(resolution)
    theta = np.arccos(x)
    nphi = 2 * resolution
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    nodes = np.stack([tt.ravel(), pp.ravel()], axis=1)
    weights = np.repeat(w * (2.0 * np.pi / nphi), nphi)
    return QuadratureGrid(manifold, nodes, weights, resolution - 1, (theta, phi))


def sample_mode(grid, mode):
    """Sample a basis function on every node of ``grid``."""
    manifold = grid.manifold
    if manifold.is_torus:
        k = np.atleast_1d(np.asarray(mode, dtype=float))
        factors = [np.exp(1j * ki * ax) for ki, ax in zip(k, grid.axes)]
        vals = factors[0]
        for f in factors[1:]:
            vals = np.multiply.outer(vals, f)
        return SampledFunction(grid, np.ravel(vals))
    ell, m = check_sphere_mode(mode)
    theta, phi = grid.axes
    am = abs(m)
    p = kernels.legendre_table(am, ell, np.cos(theta))[-1]
    vals = np.multiply.outer(p, np.exp(1j * am * phi))
    if m < 0:
        vals = (-1) ** am * np.conj(vals)
    return SampledFunction(grid, vals.ravel())


def integrate(f):
    return complex(np.dot(f.grid.weights, f.values))


def inner_product(f, g):
    """Quadrature value of int f conj(g)."""
    if f.grid is not g.grid:
        raise ContractError("functions live on different grids")
    return complex(np.dot(f.grid.weights, f.values * np.conj(g.values)))


def lp_norm(f, p):
    """Quadrature L^p norm; p = inf gives the sup over grid nodes (a lower bound)."""
    if len(f.grid) == 0:
        raise ContractError("empty grid")
    if p < 1:
        raise ContractError("p must be >= 1")
    mod = np.abs(f.values)
    if math.isinf(p):
        return float(mod.max())
    return float(np.dot(f.grid.weights, mod**p) ** (1.0 / p))


# -- axisymmetric norms and Sogge saturation -------------------------------------


def _gl_nodes(count):
    return np.polynomial.legendre.leggauss(int(count))


def harmonic_norm(ell, m, p):
    """L^p(S^2) norm of Y_l^m.

    |Y_l^m| does not depend on longitude, so the longitude integral is the
    factor 2 pi and only a colatitude rule is needed.  Finite p uses
    Gauss-Legendre in cos(colatitude) with enough nodes to be exact when p is
    an even integer; p = inf takes the max over a uniform colatitude grid that
    includes both poles and the equator at 8x the degree.
    """
    ell, m = check_sphere_mode((ell, m))
    return harmonic_norms(abs(m), [ell], p)[0]


def harmonic_norms(m, ells, p):
    """Norms of Y_l^m for one order m and several degrees l (all >= m)."""
    ells = np.asarray(ells, dtype=np.int64)
    if ells.size == 0:
        return np.zeros(0)
    if np.any(ells < m):
        raise ContractError("every degree must satisfy l >= |m|")
    lmax = int(ells.max())
    if math.isinf(p):
        npts = 8 * max(lmax, 1) + 1
        x = np.cos(np.linspace(0.0, np.pi, npts))
        table = kernels.legendre_table(m, lmax, x)
        return np.abs(table[ells - m]).max(axis=1)
    if p < 1:
        raise ContractError("p must be >= 1")
    count = int(math.ceil((p * lmax + 1) / 2.0)) + 8
    x, w = _gl_nodes(count)
    table = kernels.legendre_table(m, lmax, x)
    rows = np.abs(table[ells - m])
    return (2.0 * np.pi * (rows**p @ w)) ** (1.0 / p)


def _family_norms(family, p, ells):
    if family == ZONAL:
        return harmonic_norms(0, ells, p)
    if family == HIGHEST_WEIGHT:
        return np.array([harmonic_norms(int(ell), [int(ell)], p)[0] for ell in ells])
    raise ContractError(f"unknown family {family!r}")


def sogge_norm_table(family, p, ells):
    """Rows (ell, lambda, p, norm) for the saturating family."""
    ells = np.asarray(ells, dtype=np.int64)
    norms = _family_norms(family, p, ells)
    lam = eigenvalue_of_key(ManifoldModel.sphere(), ells)
    return [(int(e), float(lv), float(p), float(v)) for e, lv, v in zip(ells, lam, norms)]


def sogge_saturation_fit(family, p, ell_range=(8, 200), manifold=None):
    """Fit log ||Y||_p against log lambda_l for zonal (Y_l^0) or highest-weight (Y_l^l) harmonics."""
    if manifold is not None and manifold.is_torus:
        raise UnsupportedError("torus eigenfunctions are flat; Sogge saturation is undefined there")
    lo, hi = int(ell_range[0]), int(ell_range[1])
    if not 8 <= lo < hi <= 400:
        raise ContractError("ell range must lie within [8, 400]")
    ells = np.arange(lo, hi + 1)
    norms = _family_norms(family, p, ells)
    lam = eigenvalue_of_key(ManifoldModel.sphere(), ells)
    return fit_power_law(lam, norms)
