"""Log-log least-squares power-law fits."""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import FitError


@dataclass(frozen=True)
class PowerLawFit:
    """y ~ exp(log_intercept) * x**exponent over the index window [lo, hi)."""

    exponent: float
    log_intercept: float
    r_squared: float
    window: tuple

    def predict(self, x):
        return np.exp(self.log_intercept) * np.asarray(x, dtype=float) ** self.exponent

    def to_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            exponent=float(d["exponent"]),
            log_intercept=float(d["log_intercept"]),
            r_squared=float(d["r_squared"]),
            window=tuple(int(v) for v in d["window"]),
        )


def fit_power_law(x, y, window=None):
    """Fit log y = a + e log x by ordinary least squares.

    ``window`` is an index range (lo, hi) into x and y; the whole arrays are
    used when omitted.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise FitError("x and y must have the same shape")
    lo, hi = (0, x.size) if window is None else (int(window[0]), int(window[1]))
    if not 0 <= lo < hi <= x.size:
        raise FitError(f"empty or out-of-range window ({lo}, {hi})")
    xs, ys = x[lo:hi], y[lo:hi]
    if xs.size < 2:
        raise FitError("need at least two points")
    if np.any(xs <= 0) or np.any(ys <= 0) or not np.all(np.isfinite(ys)):
        raise FitError("power-law fit needs positive finite data")
    lx, ly = np.log(xs), np.log(ys)
    if np.ptp(lx) == 0.0:
        raise FitError("degenerate abscissae")
    e, a = np.polyfit(lx, ly, 1)
    resid = ly - (a + e * lx)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return PowerLawFit(float(e), float(a), min(r2, 1.0), (lo, hi))
