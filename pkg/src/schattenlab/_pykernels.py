"""Pure numpy implementations of the hot kernels.

These are the reference versions; ``_ckernels.pyx`` must agree with them to
rounding.
"""

import math

import numpy as np


def lattice_norm_counts(n, jmax):
    """Number of k in Z^n with |k|^2 == j, for j = 0..jmax.

    Built by repeated shift-and-add of the one-dimensional square indicator,
    so the cost is O(sqrt(jmax) * jmax) per dimension.
    """
    if n < 1:
        raise ValueError("dimension must be positive")
    jmax = int(jmax)
    counts = np.zeros(jmax + 1, dtype=np.int64)
    counts[0] = 1
    kmax = math.isqrt(jmax)
    for _ in range(n):
        nxt = counts.copy()
        for k in range(1, kmax + 1):
            t = k * k
            nxt[t:] += 2 * counts[: jmax + 1 - t]
        counts = nxt
    return counts


def legendre_table(m, lmax, x):
    """Orthonormal associated Legendre functions for fixed order ``m``.

    Returns an array of shape (lmax - m + 1, len(x)) whose row ``l - m`` holds
    P(l, m, x), scaled so that P(l, m, cos t) * exp(i m phi) is the
    L2-normalized spherical harmonic Y_l^m (Condon-Shortley phase included).
    """
    x = np.asarray(x, dtype=float)
    if m < 0 or lmax < m:
        raise ValueError("need 0 <= m <= lmax")
    out = np.empty((lmax - m + 1, x.size))
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    pmm = np.full(x.size, 1.0 / math.sqrt(4.0 * math.pi))
    for i in range(1, m + 1):
        pmm = -math.sqrt((2.0 * i + 1.0) / (2.0 * i)) * s * pmm
    out[0] = pmm
    if lmax == m:
        return out
    out[1] = x * math.sqrt(2.0 * m + 3.0) * pmm
    for ell in range(m + 2, lmax + 1):
        a = math.sqrt((4.0 * ell * ell - 1.0) / (ell * ell - m * m))
        b = math.sqrt(((ell - 1.0) ** 2 - m * m) / (4.0 * (ell - 1.0) ** 2 - 1.0))
        out[ell - m] = a * (x * out[ell - m - 1] - b * out[ell - m - 2])
    return out
