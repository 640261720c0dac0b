"""Confluent hypergeometric kernels M(a,b,x) and U(a,b,x) on the real line.

The physics layer only ever needs

  * M(a, b, x) with x >= 0, where a may be a large negative (non-integer)
    channel index or a nonpositive integer (bound Laguerre case), and
  * U(a, b, x) with x > 0 and b a positive integer (the logarithmic case),
    where a runs from moderately negative values to ~10^3.

Direct Taylor summation of M is catastrophically cancellative once the
oscillatory regime 2*sqrt(|a| x) >> 1 is entered, and the integer-b U limit
series loses all digits once a*x is large.  Each evaluator therefore
dispatches between

  series   -- plain Taylor / limit-formula summation with running
              amplification (max |term| / |sum|) monitoring;
  sweep    -- upward Laguerre three-term recurrence for integer a <= 0
              (stable inside the oscillatory region);
  ladder   -- three-term recurrence in a run in its stable direction,
              seeded near a = 0 (for M, downward) or at a >= 2 from the
              integral representation (for U, downward);
  quad     -- peak-normalized Gauss-Legendre evaluation of
              U = Gamma(a)^-1 Int_0^inf e^{-xt} t^{a-1} (1+t)^{b-a-1} dt
              after the substitution t = u^2, carried in the log domain.

U values span hundreds of orders of magnitude across a channel set, so the
U evaluators return sign-tracked log-domain results; products with the
factorially large coefficients they multiply are balanced downstream.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np
from scipy.special import gammaln, psi, roots_legendre

from ..errors import ConvergenceError, DomainError, PoleError, RangeError
from ._gamma import log_gamma_signed
from ._signedlog import SignedLogValue

_INT_TOL = 1e-12
_GL_NODES, _GL_WEIGHTS = roots_legendre(100)

# dispatch boundaries (validated against 40-digit references)
_SERIES_X_MAX = 10.0
_SERIES_AX_MAX = 10.0
_M_AMP_MAX = 1e4


def _is_nonpositive_integer(a: float, tol: float = _INT_TOL) -> bool:
    return a <= 0.5 and abs(a - round(a)) <= tol


# ---------------------------------------------------------------------------
# Kummer M
# ---------------------------------------------------------------------------

def _m_series_vec(a: float, b: float, x: np.ndarray, max_terms: int = 4000):
    """Taylor series of M(a,b,x) for an array of x >= 0.

    Returns (values, amplification) where amplification is the per-point
    ratio max|term| / |sum|, the cancellation-driven error magnifier.
    """
    x = np.asarray(x, dtype=float)
    term = np.ones_like(x)
    s = np.ones_like(x)
    c = np.zeros_like(x)
    mx = np.ones_like(x)
    # alternation for a < 0 persists until j ~ |a|; growth until j ~ x + sqrt(|a| x)
    j_min = 10 + int(1.2 * (np.max(x) + 2.0 * math.sqrt(max(-a, 0.0) * max(np.max(x), 0.0))))
    for j in range(max_terms):
        term = term * ((a + j) * x / ((b + j) * (j + 1.0)))
        t = s + term
        big = np.abs(s) >= np.abs(term)
        c += np.where(big, (s - t) + term, (term - t) + s)
        s = t
        np.maximum(mx, np.abs(term), out=mx)
        if j > j_min and np.all(np.abs(term) <= 1e-17 * (np.abs(s) + 1e-300)):
            break
    else:
        raise ConvergenceError(f"M series did not converge (a={a}, b={b}, max x={x.max()})")
    total = s + c
    amp = mx / np.maximum(np.abs(total), 1e-300)
    return total, amp


def _m_integer_sweep_vec(n_terminate: int, b: float, x: np.ndarray) -> np.ndarray:
    """M(-n_terminate, b, x) via the upward generalized-Laguerre recurrence.

    M(-n, b, x) = n! / (b)_n * L_n^{(b-1)}(x); the L recurrence is run
    upward, which is stable throughout the oscillatory region.
    """
    x = np.asarray(x, dtype=float)
    if n_terminate == 0:
        return np.ones_like(x)
    alpha = b - 1.0
    lm1 = np.zeros_like(x)
    l0 = np.ones_like(x)
    conv = 1.0
    for k in range(1, n_terminate + 1):
        l1 = ((2 * k - 1 + alpha - x) * l0 - (k - 1 + alpha) * lm1) / k
        lm1, l0 = l0, l1
        conv *= k / (alpha + k)
    return conv * l0


def kummer_m_integer_blocks(n1_max: int, b: float, x: np.ndarray,
                            block: int = 512) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (n1, M(-n1, b, x)) for n1 = 0..n1_max in ascending order.

    Single upward Laguerre sweep shared by all n1; O(1) extra memory.
    """
    x = np.asarray(x, dtype=float)
    alpha = b - 1.0
    lm1 = np.zeros_like(x)
    l0 = np.ones_like(x)
    conv = 1.0
    yield 0, np.ones_like(x)
    for k in range(1, n1_max + 1):
        l1 = ((2 * k - 1 + alpha - x) * l0 - (k - 1 + alpha) * lm1) / k
        lm1, l0 = l0, l1
        conv *= k / (alpha + k)
        yield k, conv * l0


def _m_ladder_vec(a: float, b: float, x: np.ndarray) -> np.ndarray:
    """M(a,b,x) for non-integer a < 0 via the downward recurrence in a.

    (b-c) M(c-1) = c M(c+1) - (2c - b + x) M(c), seeded by direct series at
    the fractional offset near zero.  Backward is the neutral direction in
    the oscillatory regime; accumulated error stays near roundoff.
    """
    x = np.asarray(x, dtype=float)
    n_steps = int(math.ceil(-a - 0.5))
    a_seed = a + n_steps  # in (-1.5, -0.5]
    m_hi, _ = _m_series_vec(a_seed + 1.0, b, x)
    m_mid, _ = _m_series_vec(a_seed, b, x)
    c = a_seed
    for _ in range(n_steps):
        m_lo = (c * m_hi - (2.0 * c - b + x) * m_mid) / (b - c)
        m_hi, m_mid = m_mid, m_lo
        c -= 1.0
    return m_mid


def kummer_m_vec(a: float, b: float, x: np.ndarray) -> np.ndarray:
    """M(a, b, x) over an array of x >= 0 (scalar a, b)."""
    x = np.asarray(x, dtype=float)
    if b <= 0 and abs(b - round(b)) <= _INT_TOL:
        raise DomainError(f"M(a,b,x) undefined at nonpositive integer b = {b}")
    if np.any(x < 0):
        raise DomainError("kummer_m requires x >= 0")
    if _is_nonpositive_integer(a):
        return _m_integer_sweep_vec(int(round(-a)), b, x)
    vals, amp = _m_series_vec(a, b, x)
    bad = amp > _M_AMP_MAX
    if np.any(bad) and a < 0:
        vals = np.where(bad, _m_ladder_vec(a, b, x), vals)
    return vals


def kummer_m(a: float, b: float, x: float) -> float:
    """Kummer's confluent hypergeometric function M(a, b, x) = 1F1(a; b; x)."""
    return float(kummer_m_vec(a, b, np.asarray([float(x)]))[0])


def kummer_m_prime(a: float, b: float, x: float) -> float:
    """dM/dx via the contiguous relation M'(a,b,x) = (a/b) M(a+1, b+1, x)."""
    return (a / b) * kummer_m(a + 1.0, b + 1.0, x)


# ---------------------------------------------------------------------------
# Tricomi U, integer second parameter (logarithmic case)
# ---------------------------------------------------------------------------

def _u_series_signed_vec(a: float, b_int: int, x: np.ndarray,
                         max_terms: int = 600) -> tuple[np.ndarray, np.ndarray]:
    """U(a, n+1, x) by the limit formula for integer b = n+1, in log domain.

    U(a,n+1,x) = (-1)^(n+1)/(n! Gamma(a-n)) * Sum_{k>=0} (a)_k x^k/((n+1)_k k!)
                   * [ln x + psi(a+k) - psi(1+k) - psi(1+n+k)]
                 + x^(-n)/Gamma(a) * Sum_{k=0}^{n-1} (n-1-k)!/k! (-x)^k (a-n)_k

    Returns (log|U|, sign) arrays over x.
    """
    n = b_int - 1
    x = np.asarray(x, dtype=float)
    lnx = np.log(x)

    # log-part sum
    coef = np.ones_like(x)
    s = np.zeros_like(x)
    c = np.zeros_like(x)
    for k in range(max_terms):
        w = lnx + (psi(a + k) - psi(1.0 + k) - psi(1.0 + n + k))
        term = coef * w
        t = s + term
        big = np.abs(s) >= np.abs(term)
        c += np.where(big, (s - t) + term, (term - t) + s)
        s = t
        coef = coef * ((a + k) * x / ((n + 1.0 + k) * (k + 1.0)))
        wb = np.abs(lnx) + abs(psi(abs(a) + k + 1.0)) + 2.0 * math.log(k + 2.0) + 10.0
        if k > 4 and np.all(np.abs(coef) * wb <= 1e-18 * (np.abs(s + c) + 1e-300)):
            break
    else:
        raise ConvergenceError(f"U limit series did not converge (a={a}, b={b_int})")
    log_sum = s + c

    lg_an = gammaln(a - n)
    sg_an = _gamma_sign(a - n)
    lpre = -gammaln(n + 1.0) - lg_an
    spre = sg_an * (1.0 if (n + 1) % 2 == 0 else -1.0)

    if n == 0:
        return _log_signed_from_plain(log_sum, lpre, spre)

    # singular part: all one sign while the pochhammer factors stay negative
    sing = np.zeros_like(x)
    poch = 1.0
    for k in range(n):
        fk = math.exp(gammaln(n - k) - gammaln(k + 1.0))
        sign_k = 1.0 if k % 2 == 0 else -1.0
        sing = sing + fk * sign_k * poch * x ** k
        poch *= (a - n + k)
    lpre_s = -gammaln(a)
    spre_s = _gamma_sign(a)

    la, sa = _log_signed_from_plain(log_sum, lpre, spre)
    lb, sb = _log_signed_from_plain(sing, lpre_s - n * lnx, spre_s)
    return _log_signed_add(la, sa, lb, sb)


def _gamma_sign(z: float) -> float:
    from scipy.special import gammasgn
    return float(gammasgn(z))


def _log_signed_from_plain(vals: np.ndarray, log_pre, sign_pre: float):
    vals = np.asarray(vals, dtype=float)
    mag = np.abs(vals)
    with np.errstate(divide="ignore"):
        l = np.where(mag > 0, np.log(np.maximum(mag, 1e-300)), -np.inf) + log_pre
    s = sign_pre * np.sign(vals)
    return l, s


def _log_signed_add(la, sa, lb, sb):
    """(la,sa) + (lb,sb) elementwise in sign-tracked log space."""
    lmax = np.maximum(la, lb)
    lmax = np.where(np.isneginf(lmax), 0.0, lmax)
    tot = sa * np.exp(la - lmax) + sb * np.exp(lb - lmax)
    mag = np.abs(tot)
    with np.errstate(divide="ignore"):
        l = np.where(mag > 0, np.log(np.maximum(mag, 1e-300)) + lmax, -np.inf)
    return l, np.sign(tot)


def _u_quad_log_vec(a: float, b: float, x: np.ndarray) -> np.ndarray:
    """log U(a,b,x) for a >= 2 by peak-normalized Gauss-Legendre quadrature.

    After t = u^2:  Gamma(a) U = Int_0^inf 2 u^(2a-1) (1+u^2)^(b-a-1)
    e^{-x u^2} du. The integrand is a single smooth positive bump; it is
    evaluated as exp(h(u) - h(u*)) over a bracket where h drops 46 below
    the peak, so the result is accurate at any overall magnitude.
    """
    x = np.asarray(x, dtype=float)
    # peak t* of the t-integrand: x t^2 + (x - (b-2)) t - (a-1) = 0
    B = x - (b - 2.0)
    tstar = (-B + np.sqrt(B * B + 4.0 * x * (a - 1.0))) / (2.0 * x)
    u = np.sqrt(np.maximum(tstar, 1e-12))

    two_am1 = 2.0 * a - 1.0
    bam1 = b - a - 1.0

    def h(uu):
        return two_am1 * np.log(uu) + bam1 * np.log1p(uu * uu) - x * uu * uu

    def hp(uu):
        return two_am1 / uu + 2.0 * bam1 * uu / (1.0 + uu * uu) - 2.0 * x * uu

    def hpp(uu):
        return (-two_am1 / uu ** 2
                + 2.0 * bam1 * (1.0 - uu * uu) / (1.0 + uu * uu) ** 2 - 2.0 * x)

    for _ in range(50):
        d = hp(u) / hpp(u)
        u_new = np.where(u - d > 0, u - d, 0.5 * u)
        if np.all(np.abs(u_new - u) <= 1e-14 * u):
            u = u_new
            break
        u = u_new
    h0 = h(u)
    sig = 1.0 / np.sqrt(np.abs(hpp(u)))

    # expanding brackets to h - h0 <= -46 on both sides
    lo = np.maximum(u - sig, 0.25 * u)
    step = sig.copy()
    for _ in range(200):
        need = h(np.maximum(lo, 1e-300)) - h0 > -46.0
        if not np.any(need & (lo > 0)):
            break
        step = np.where(need, step * 1.4, step)
        lo = np.where(need, np.maximum(lo - step, 0.0), lo)
        lo = np.where(lo <= 0, 0.0, lo)
        if np.all(lo == 0.0):
            break
    hi = u + sig
    step = sig.copy()
    for _ in range(200):
        need = h(hi) - h0 > -46.0
        if not np.any(need):
            break
        step = np.where(need, step * 1.4, step)
        hi = np.where(need, hi + step, hi)

    mid = 0.5 * (hi + lo)
    half = 0.5 * (hi - lo)
    uu = mid[..., None] + half[..., None] * _GL_NODES  # (nx, nodes)
    with np.errstate(divide="ignore", invalid="ignore"):
        hval = (two_am1 * np.log(np.maximum(uu, 1e-300))
                + bam1 * np.log1p(uu * uu) - x[..., None] * uu * uu)
        integ = np.where(uu > 0, np.exp(hval - h0[..., None]), 0.0)
    integral = 2.0 * half * (integ @ _GL_WEIGHTS)
    return h0 + np.log(integral) - gammaln(a)


def _u_ladder_down(l_hi: np.ndarray, s_hi: np.ndarray,
                   l_mid: np.ndarray, s_mid: np.ndarray,
                   c_start: float, b: float, x: np.ndarray, n_steps: int):
    """Run U(c-1) = (2c-b+x) U(c) - c(c-b+1) U(c+1) down n_steps from
    c_start; returns (log|U(c_start-n_steps)|, sign)."""
    lm, sm, _, _ = _chain_advance(l_hi, s_hi, l_mid, s_mid, c_start, b, x,
                                  n_steps)
    return lm, sm


def _u_poly_signed_vec(n_poly: int, b: float, x: np.ndarray):
    """U(-N, b, x) = (-1)^N (b)_N M(-N, b, x), exact polynomial case."""
    m_val = _m_integer_sweep_vec(n_poly, b, x)
    lpoch = gammaln(b + n_poly) - gammaln(b)
    sign_pre = 1.0 if n_poly % 2 == 0 else -1.0
    return _log_signed_from_plain(m_val, lpoch, sign_pre)


def tricomi_u_signed_vec(a: float, b_int: int, x: np.ndarray):
    """U(a, b, x), b a positive integer, over an array of x > 0.

    Returns (log|U|, sign) arrays.  Dispatches between the polynomial case,
    the limit-formula series, the Laplace quadrature, and seeded downward
    ladders, according to the validated accuracy regions.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("tricomi_u requires x > 0")
    if b_int < 1 or abs(b_int - round(b_int)) > _INT_TOL:
        raise DomainError(f"tricomi_u implements integer b >= 1 only, got {b_int}")
    b = float(round(b_int))

    if _is_nonpositive_integer(a):
        return _u_poly_signed_vec(int(round(-a)), b, x)

    l_out = np.empty_like(x)
    s_out = np.empty_like(x)

    small_x = x <= _SERIES_X_MAX
    series_mask = small_x & (a * x <= _SERIES_AX_MAX) if a > -1.5 else np.zeros_like(small_x)
    if a > -1.5:
        if np.any(series_mask):
            l, s = _u_series_signed_vec(a, b_int, x[series_mask])
            l_out[series_mask] = l
            s_out[series_mask] = s
        rest = ~series_mask
    else:
        # fractional ladder: seeds near zero by series, stable downward run
        if np.any(small_x):
            xs = x[small_x]
            n_steps = int(math.ceil(-a - 0.5))
            a_seed = a + n_steps  # in (-0.5, 0.5]
            l1, s1 = _u_series_signed_vec(a_seed + 1.0, b_int, xs)
            l0, s0 = _u_series_signed_vec(a_seed, b_int, xs)
            l, s = _u_ladder_down(l1, s1, l0, s0, a_seed, b, xs, n_steps)
            l_out[small_x] = l
            s_out[small_x] = s
        rest = ~small_x

    if np.any(rest):
        xr = x[rest]
        # quadrature seeds at a_top >= 2 congruent to a mod 1, ladder down
        k_up = max(0, int(math.ceil(2.0 - a)))
        a_top = a + k_up
        if k_up == 0:
            l_out[rest] = _u_quad_log_vec(a, b, xr)
            s_out[rest] = 1.0
        else:
            l1 = _u_quad_log_vec(a_top + 1.0, b, xr)
            l0 = _u_quad_log_vec(a_top, b, xr)
            ones = np.ones_like(xr)
            l, s = _u_ladder_down(l1, ones, l0, ones, a_top, b, xr, k_up)
            l_out[rest] = l
            s_out[rest] = s
    return l_out, s_out


def tricomi_u_signed(a: float, b_int: int, x: float) -> SignedLogValue:
    l, s = tricomi_u_signed_vec(a, b_int, np.asarray([float(x)]))
    if s[0] == 0.0:
        return SignedLogValue.zero()
    return SignedLogValue(float(l[0]), float(s[0]))


def tricomi_u(a: float, b_int: int, x: float) -> float:
    """Tricomi's confluent hypergeometric function U(a, b, x), integer b.

    Raises RangeError if the value does not fit in binary64; use
    tricomi_u_signed for log-domain access.
    """
    if x <= 0:
        raise DomainError("tricomi_u requires x > 0")
    if b_int >= 2 and not _is_nonpositive_integer(a):
        # prefactor gammas of the limit formula blow up only at poles of
        # Gamma(a-n) with a-n a nonpositive integer, i.e. integer a <= b-2
        if abs(a - round(a)) <= _INT_TOL and 0 < round(a) <= b_int - 2:
            raise PoleError(f"U prefactor pole at integer a = {a} with b = {b_int}")
    return tricomi_u_signed(a, b_int, x).to_real()


def tricomi_u_prime(a: float, b_int: int, x: float) -> float:
    """dU/dx via the contiguous relation U'(a,b,x) = -a U(a+1, b+1, x)."""
    return -a * tricomi_u(a, b_int + 1, x)


def tricomi_u_chain_blocks(a_top: float, b_int: int, x: np.ndarray, count: int,
                           block: int = 512):
    """U(a_top - j, b, x) for j = 0..count-1, yielded in ascending-a blocks.

    The chain is integer-spaced in a, run once in the stable downward
    direction from quadrature seeds at max(a_top, 2)+; block boundary
    states are checkpointed so the caller can consume blocks with j
    descending (a ascending) at O(block) memory.

    Yields (j_start, log_abs_block, sign_block) with block arrays shaped
    (block_len, nx), row r holding U(a_top - (j_start + r)).
    """
    x = np.asarray(x, dtype=float)
    b = float(b_int)
    k_up = max(0, int(math.ceil(2.0 - a_top)))
    a_seed = a_top + k_up
    l_hi = _u_quad_log_vec(a_seed + 1.0, b, x)
    l_mid = _u_quad_log_vec(a_seed, b, x)
    s_hi = np.ones_like(x)
    s_mid = np.ones_like(x)
    if k_up:
        l_mid, s_mid, l_hi, s_hi = _chain_advance(l_hi, s_hi, l_mid, s_mid,
                                                  a_seed, b, x, k_up)[:4]

    # checkpoint states at every block start, running down the full chain
    checkpoints = []
    c = a_top
    lh, sh, lm, sm = l_hi, s_hi, l_mid, s_mid
    j = 0
    while j < count:
        blen = min(block, count - j)
        checkpoints.append((j, blen, lh.copy(), sh.copy(), lm.copy(), sm.copy(), c))
        lm2, sm2, lh2, sh2 = _chain_advance(lh, sh, lm, sm, c, b, x, blen)[:4]
        lh, sh, lm, sm = lh2, sh2, lm2, sm2
        c -= blen
        j += blen

    for j_start, blen, lh, sh, lm, sm, c in reversed(checkpoints):
        lab = np.empty((blen,) + x.shape)
        sab = np.empty((blen,) + x.shape)
        lab[0], sab[0] = lm, sm
        lcur_h, scur_h, lcur_m, scur_m = lh, sh, lm, sm
        cc = c
        for r in range(1, blen):
            lcur_m, scur_m, lcur_h, scur_h = _chain_advance(
                lcur_h, scur_h, lcur_m, scur_m, cc, b, x, 1)[:4]
            cc -= 1.0
            lab[r], sab[r] = lcur_m, scur_m
        yield j_start, lab, sab


def _chain_advance(l_hi, s_hi, l_mid, s_mid, c_start: float, b: float,
                   x: np.ndarray, n_steps: int):
    """Advance the U chain down n_steps; returns new (mid, hi) log/sign
    where 'mid' is U(c_start - n_steps) and 'hi' is U(c_start - n_steps + 1)."""
    off = np.where(np.isneginf(l_mid), np.where(np.isneginf(l_hi), 0.0, l_hi), l_mid)
    u_hi = s_hi * np.exp(l_hi - off)
    u_mid = s_mid * np.exp(l_mid - off)
    c = c_start
    for _ in range(n_steps):
        u_lo = (2.0 * c - b + x) * u_mid - c * (c - b + 1.0) * u_hi
        u_hi, u_mid = u_mid, u_lo
        c -= 1.0
        mag = np.abs(u_mid)
        rebase = (mag > 1e250) | ((mag > 0) & (mag < 1e-250))
        if np.any(rebase):
            lm = np.where(rebase & (mag > 0), np.log(np.maximum(mag, 1e-300)), 0.0)
            off = off + lm
            scale = np.exp(-lm)
            u_hi = u_hi * scale
            u_mid = u_mid * scale
    mag_m = np.abs(u_mid)
    mag_h = np.abs(u_hi)
    with np.errstate(divide="ignore"):
        lm_out = np.where(mag_m > 0, np.log(np.maximum(mag_m, 1e-300)) + off, -np.inf)
        lh_out = np.where(mag_h > 0, np.log(np.maximum(mag_h, 1e-300)) + off, -np.inf)
    return lm_out, np.sign(u_mid), lh_out, np.sign(u_hi)


def kummer_m_ladder_vec(nu: float, b: float, x: np.ndarray) -> np.ndarray:
    """M(-nu, b, x) over an x array for non-integer nu > 0, always by the
    seeded downward ladder (used for the channel functions at large nu)."""
    return _m_ladder_vec(-nu, b, np.asarray(x, dtype=float))
