import json
from functools import lru_cache

import numpy as np

from qvar.cf import coefficients
from qvar.density import from_json
from qvar.kernel import PsiContext


@lru_cache(maxsize=None)
def _coeffs(key, n, tol):
    density, _ = from_json(json.loads(key))
    return coefficients(PsiContext(density), n, tol)


def cached_coefficients(density, n, tol):
    """Coefficients shared between test modules of one session."""
    return _coeffs(json.dumps(density.to_json(), sort_keys=True), n, tol)


def gl01(m):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1), 0.5 * w


def tensor_cf(q_of, pdfs, t, m=200):
    """E exp(i t Q(X)) by tensor Gauss-Legendre on [0, 1]**d."""
    x, w = gl01(m)
    grids = np.meshgrid(*([x] * len(pdfs)), indexing="ij")
    weights = np.ones_like(grids[0])
    for g, wt, f in zip(grids, np.meshgrid(*([w] * len(pdfs)), indexing="ij"), pdfs):
        weights = weights * wt * f(g)
    return complex(np.sum(weights * np.exp(1j * t * q_of(*grids))))
