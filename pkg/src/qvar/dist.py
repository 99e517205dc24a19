"""F_Q and f_Q from the Fourier coefficients.

    F_Q(x) = (2/pi) sum_k Im f_Q(t_k) (1 - cos t_k x) / k
    f_Q(x) = (2/q) sum_k Im f_Q(t_k) sin t_k x

Both sums run to K and then continue with the fitted tail model, summed
analytically.  Per-point errors compare the evaluation cut at K with the
one cut at 0.8 K (each with its own tail model).
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cf import FourierCoefficients, coefficients
from .errors import RangeError, SlowDecayWarning
from .kernel import PsiContext

RANGE_SLACK = 1e-12


@dataclass
class DistributionTable:
    n: int
    q: float
    grid: np.ndarray
    F: np.ndarray
    err: np.ndarray
    f: np.ndarray = None
    f_err: np.ndarray = None
    meta: dict = field(default_factory=dict)


def _check_range(coeffs, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < -RANGE_SLACK) or np.any(x > coeffs.q + RANGE_SLACK) or np.any(np.isnan(x)):
        raise RangeError("x must lie in [0, q] = [0, %g]" % coeffs.q)
    return np.clip(x, 0.0, coeffs.q)


def _cdf_cut(coeffs, x, model):
    K = model.K
    k = np.arange(1, K + 1)
    t = k * math.pi / coeffs.q
    im = coeffs.im[:K]
    head = (1.0 - np.cos(np.outer(x, t))) @ (im / k)
    return 2.0 / math.pi * (head + model.cdf_tail(math.pi * x / coeffs.q))


def _pdf_cut(coeffs, x, model):
    K = model.K
    t = np.arange(1, K + 1) * math.pi / coeffs.q
    head = np.sin(np.outer(x, t)) @ coeffs.im[:K]
    return 2.0 / coeffs.q * (head + model.sin_tail(math.pi * x / coeffs.q))


def cdf_q(coeffs: FourierCoefficients, x, with_error=False):
    """F_Q(x); with ``with_error`` also the per-point error estimate."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(_check_range(coeffs, x))
    F = _cdf_cut(coeffs, x, coeffs.model)
    F[x == 0] = 0.0
    if with_error:
        err = np.maximum(np.abs(F - _cdf_cut(coeffs, x, coeffs.alt_model)), coeffs.tail_bound)
        return (F[0], err[0]) if scalar else (F, err)
    return F[0] if scalar else F


def slow_decay(coeffs):
    """True outside the regime where term-wise differentiation is proven.

    That needs n >= 4 for bounded parents, and delta > 1 for parents with
    power singularities.  Here delta = min(n p, n - 1)/2 and p is the
    smallest endpoint exponent.
    """
    n = coeffs.n
    p = coeffs.meta.get("min_exponent", 1.0)
    if p >= 1.0:
        return n < 4
    return min(n * p, n - 1) / 2.0 <= 1.0


def pdf_q(coeffs: FourierCoefficients, x, with_error=False, smoothing="none"):
    """f_Q(x) from the sine series.

    ``smoothing="cesaro"`` applies Cesaro (Fejer) weights 1 - k/(K+1) to the
    first K terms and drops the tail; it damps the ripple near the endpoints
    at the price of O(1/K) bias.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(_check_range(coeffs, x))
    if slow_decay(coeffs):
        warnings.warn("density series for n = %d is outside the proven regime "
                      "of term-wise differentiation" % coeffs.n, SlowDecayWarning, stacklevel=2)
    if smoothing == "cesaro":
        K = coeffs.K
        k = np.arange(1, K + 1)
        w = 1.0 - k / (K + 1.0)
        f = 2.0 / coeffs.q * (np.sin(np.outer(x, k * math.pi / coeffs.q)) @ (w * coeffs.im))
        err = np.full(x.shape, np.nan)
    elif smoothing == "none":
        f = _pdf_cut(coeffs, x, coeffs.model)
        err = np.abs(f - _pdf_cut(coeffs, x, coeffs.alt_model))
    else:
        raise ValueError("smoothing must be 'none' or 'cesaro'")
    if with_error:
        return (f[0], err[0]) if scalar else (f, err)
    return f[0] if scalar else f


def table(density, n, grid, tol=1e-8, with_pdf=False, coeffs=None):
    """Evaluate F_Q (and optionally f_Q) on a grid of [0, q].

    ``grid`` is either a point count (equispaced, both ends included) or an
    explicit sequence.  Precomputed ``coeffs`` may be passed to reuse them.
    """
    ctx = density if isinstance(density, PsiContext) else PsiContext(density)
    if coeffs is None:
        coeffs = coefficients(ctx, n, tol)
    elif coeffs.n != n:
        raise ValueError("coefficients were computed for n = %d" % coeffs.n)
    if np.ndim(grid) == 0:
        count = int(grid)
        if count < 2:
            raise ValueError("grid needs at least two points")
        xs = np.linspace(0.0, coeffs.q, count)
    else:
        xs = np.asarray(grid, dtype=float)
    F, err = cdf_q(coeffs, xs, with_error=True)
    f = f_err = None
    if with_pdf:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SlowDecayWarning)
            f, f_err = pdf_q(coeffs, xs, with_error=True)
        if slow_decay(coeffs):
            warnings.warn("density series for n = %d is outside the proven regime"
                          % n, SlowDecayWarning, stacklevel=2)
    dens = ctx.density
    meta = {
        "density": dens.to_json() if dens is not None else None,
        "tol": tol,
        "K": coeffs.K,
        "tail_bound": coeffs.tail_bound,
        "tail_method": coeffs.meta.get("tail_method"),
    }
    return DistributionTable(n, coeffs.q, xs, F, err, f, f_err, meta)
