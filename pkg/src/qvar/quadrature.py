"""Cached Gauss rules. Nodes come from scipy's Golub-Welsch routines."""

from functools import lru_cache

import numpy as np
from scipy import special


@lru_cache(maxsize=256)
def gauss_legendre(n):
    """n-point Gauss-Legendre rule on [0, 1]."""
    x, w = special.roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=256)
def gauss_jacobi01(n, alpha, beta):
    """Rule for integral over [0, 1] of x**alpha (1 - x)**beta g(x)."""
    # scipy weight is (1 - xi)**a (1 + xi)**b on [-1, 1], x = (1 + xi) / 2
    xi, w = special.roots_jacobi(n, beta, alpha)
    return 0.5 * (xi + 1.0), w * 2.0 ** (-(alpha + beta + 1.0))


@lru_cache(maxsize=128)
def gen_laguerre(n, alpha):
    """Rule for integral over [0, inf) of x**alpha exp(-x) g(x)."""
    return special.roots_genlaguerre(n, alpha)


@lru_cache(maxsize=64)
def gauss_hermite(n):
    """Rule for integral over R of exp(-x**2) g(x)."""
    return special.roots_hermite(n)


def composite_legendre(edges, order):
    """Nodes and weights of a composite rule over consecutive panels."""
    x, w = gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    a = edges[:-1, None]
    h = np.diff(edges)[:, None]
    return (a + h * x).ravel(), (h * w).ravel()
