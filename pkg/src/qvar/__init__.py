"""Exact distribution of the sample variance of bounded random variables.

Q = sum (X_i - mean)**2 for i.i.d. X_i on [0, 1].  The CDF and density of Q
are Fourier series on [0, sup Q] whose coefficients are values of the
characteristic function of Q, computed by quadrature along complex paths.
One-factorial quadratic forms X'(D -/+ cc')X are handled the same way.
"""

from .asymptotics import (AsymptoticLaw, c_pn, lt_consistency, power_density_exponent,
                          power_density_law, uniform_small_x, uniform_upper_tail)
from .cf import FourierCoefficients, cf_at, cf_at_alt, coefficients, sup_q, t_grid
from .density import (Beta, Polynomial, PowerTailMix, SupportMap, TrigPolynomial,
                      decompose_beta, from_json, power_density, standardize, uniform, validate)
from .dist import DistributionTable, cdf_q, pdf_q, table
from .errors import (ConvergenceError, DomainError, FitError, InvalidDensity, MismatchError,
                     QVarError, RangeError, SizeError, SlowDecayWarning, TruncationError)
from .kernel import PsiContext, psi_from_cdf
from .mc import McResult, closed_form_n2_uniform, ks_distance, sample_q
from .quadform import QuadFormSpec, cdf_form, cf_form_at, coefficients_form, sup_q_form

__version__ = "0.1.0"
