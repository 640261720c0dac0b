"""Gamma-family kernels: sign-tracked log-gamma and digamma.

Backed by scipy's real lgamma/gammasgn/psi, wrapped with explicit pole
detection so that callers never receive silent inf/nan.  Branch-free ratios
of gammas at hugely different magnitudes are formed in the log domain.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln as _gammaln, gammasgn as _gammasgn, psi as _psi

from ..errors import PoleError
from ._signedlog import SignedLogValue

#: nonpositive-integer proximity that counts as a pole
POLE_TOL = 1e-12


def _near_nonpositive_integer(x: float, tol: float = POLE_TOL) -> bool:
    if x > 0.5:
        return False
    return abs(x - round(x)) <= tol


def log_gamma_signed(x: float) -> SignedLogValue:
    """ln|Gamma(x)| and sign(Gamma(x)) for real x.

    Raises PoleError when x is within POLE_TOL of a nonpositive integer.
    """
    x = float(x)
    if not math.isfinite(x):
        raise PoleError(f"log_gamma_signed requires finite x, got {x}")
    if _near_nonpositive_integer(x):
        raise PoleError(f"Gamma pole at x = {x}")
    return SignedLogValue(float(_gammaln(x)), float(_gammasgn(x)))


def log_gamma_signed_or_zero_reciprocal(x: float):
    """(log|Gamma(x)|, sign) with poles mapped to 'reciprocal is exact zero'.

    Returns (+inf, 0.0) at nonpositive integers; callers dividing by this
    Gamma treat the whole term as an exact zero.  Used for the denominator
    gammas of the finite p-sums.
    """
    x = float(x)
    if _near_nonpositive_integer(x):
        return math.inf, 0.0
    return float(_gammaln(x)), float(_gammasgn(x))


def digamma(x: float) -> float:
    """psi(x) for real x away from nonpositive integers."""
    x = float(x)
    if not math.isfinite(x):
        raise PoleError(f"digamma requires finite x, got {x}")
    if _near_nonpositive_integer(x):
        raise PoleError(f"digamma pole at x = {x}")
    return float(_psi(x))


def digamma_array(x: np.ndarray) -> np.ndarray:
    """Vectorized psi without pole checks (callers guarantee the domain)."""
    return _psi(np.asarray(x, dtype=float))


def log_gamma_ratio(num: float, den: float) -> SignedLogValue:
    """Gamma(num)/Gamma(den) as a SignedLogValue (both pole-free)."""
    return log_gamma_signed(num) / log_gamma_signed(den)


def cot_pi(x: float) -> float:
    """cot(pi x) computed from the fractional part for full-precision
    arguments of large magnitude."""
    r = x - round(x)
    if r == 0.0:
        raise PoleError(f"cot(pi x) pole at x = {x}")
    return math.cos(math.pi * r) / math.sin(math.pi * r)


def lgamma_vec(x: np.ndarray) -> np.ndarray:
    return _gammaln(np.asarray(x, dtype=float))


def gammasgn_vec(x: np.ndarray) -> np.ndarray:
    return _gammasgn(np.asarray(x, dtype=float))
