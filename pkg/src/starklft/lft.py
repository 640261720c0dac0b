"""Frame-transformation matrices between parabolic and spherical Coulomb
solutions, and the two exact expansion identities used as oracles.

Regular-solution coupling (finite p-sum, mu = n - nu - m - 1):

  A_{nu mu, l} = Sum_{p=0}^{l-m} (-1)^{p+m} 2^l (l-m)! l! G(1+nu) G(1+mu) m!^2
                 / [(2l)! G(1+nu-p) G(1+mu+m-l+p) (l-p)! (l-m-p)! (m+p)! p!]

with the asymptotic form A ~ (-1)^l nu^{l-m} 2^l m!^2 / (l!^2 (l+m)!).
The digamma-weighted companion used by the dual-series gamma construction
carries G(1+mu+m) in place of G(1+mu) m!^2 and inserts the factor

  Psi(mu, s) = psi(-mu+s) - psi(1+m+s) - psi(1+s),  s = l - m - p.

Irregular expansion coefficients:

  B_{l,n1} = W_l/(m! N_lm) A_{n1 n2, l} N_{n1}^2 Gamma(-n2),  n2 = n-n1-m-1,

and the cotangent-weight function of the Green-function route:

  Omega(mu) = G(1+m+mu)/G(1+mu) [ (psi(1+m+mu)+psi(1+mu)-2 ln n)/2
                                  + pi cot(pi mu) ].

Two exact re-expansions serve as the master self-consistency oracles; they
pin the Legendre phase convention and every normalization at once:

  f_nu(xi) f_mu(eta)    = Sum_l  A_{nu mu, l} P_l^m(cos t) F_l(r)
  P_l^m(cos t) G_l(r)   = Sum_n1 B_{l,n1} f_{n1}(xi) g_{n2}(eta)

The second sum converges non-uniformly at eta = 0; flagged small-eta nodes
are excluded from its norms and stopping rule.

1/Gamma at a nonpositive integer is treated as an exact zero (the term
drops); there is no epsilon nudging anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, gammasgn, psi

from .coulomb import (
    FieldGrid,
    QuantumContext,
    norm_Nlm,
    norm_Nn1,
    parabolic_regular_f_vec,
    radial_irregular_G_signed_vec,
    radial_regular_F_vec,
    wronskian_W,
)
from .errors import ConvergenceError, DomainError, PoleError, RangeError
from .specfun import (
    DoubleDouble,
    SignedLogValue,
    cot_pi,
    digamma,
    kummer_m_integer_blocks,
    legendre_p_all,
    log_gamma_signed,
    tricomi_u_chain_blocks,
)

_INT_TOL = 1e-12


def _lgamma_signed_arr(x: np.ndarray):
    """(ln|Gamma|, sign, pole_mask) for an array; poles give (inf, 0, True)."""
    x = np.asarray(x, dtype=float)
    pole = (x < 0.5) & (np.abs(x - np.round(x)) <= _INT_TOL)
    safe = np.where(pole, 0.5, x)
    lg = np.where(pole, np.inf, gammaln(safe))
    sg = np.where(pole, 0.0, gammasgn(safe))
    return lg, sg, pole


def a_row_values(nu, mu, m: int, l: int, breve: bool = False,
                 extended: bool = False) -> np.ndarray:
    """A_{nu mu, l} (or the digamma-weighted variant) for paired index
    arrays nu, mu; returns plain floats.

    The p-sum alternates and cancels for large l; terms are assembled in
    sign-tracked log form, rescaled to the largest magnitude and summed
    with compensation (double-double when ``extended``).
    """
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if nu.shape != mu.shape:
        raise DomainError("nu and mu arrays must have identical shape")
    if l < m:
        raise DomainError(f"need l >= m, got l={l}, m={m}")
    pmax = l - m
    p = np.arange(pmax + 1)

    lg_nu, sg_nu, pole_nu = _lgamma_signed_arr(1.0 + nu)
    if np.any(pole_nu):
        raise PoleError("Gamma(1+nu) pole in coupling-matrix numerator")
    if breve:
        lg_mu, sg_mu, pole_mu = _lgamma_signed_arr(1.0 + mu + m)
    else:
        lg_mu, sg_mu, pole_mu = _lgamma_signed_arr(1.0 + mu)
    if np.any(pole_mu):
        raise PoleError("Gamma(1+mu[+m]) pole in coupling-matrix numerator")

    # denominator gamma ladders, shape (..., p)
    lg_nup, sg_nup, pole_nup = _lgamma_signed_arr(1.0 + nu[..., None] - p)
    lg_mup, sg_mup, pole_mup = _lgamma_signed_arr(1.0 + mu[..., None] + m - l + p)

    lfac = (l * math.log(2.0) + gammaln(l - m + 1.0) + gammaln(l + 1.0)
            - gammaln(2.0 * l + 1.0))  # ln[2^l (l-m)! l! / (2l)!]
    lcomb = -(gammaln(l - p + 1.0) + gammaln(l - m - p + 1.0)
              + gammaln(m + p + 1.0) + gammaln(p + 1.0))
    num_extra = 0.0 if breve else 2.0 * gammaln(m + 1.0)

    log_t = (lfac + lcomb + num_extra
             + lg_nu[..., None] - lg_nup + lg_mu[..., None] - lg_mup)
    sign_t = (np.where((p + m) % 2 == 0, 1.0, -1.0)
              * sg_nu[..., None] * sg_nup * sg_mu[..., None] * sg_mup)
    dead = pole_nup | pole_mup
    sign_t = np.where(dead, 0.0, sign_t)
    log_t = np.where(dead, -np.inf, log_t)

    if breve:
        s = l - m - p
        w = psi(-mu[..., None] + s) - psi(1.0 + m + s) - psi(1.0 + s)
        mag_w = np.abs(w)
        with np.errstate(divide="ignore"):
            log_t = log_t + np.where(mag_w > 0,
                                     np.log(np.maximum(mag_w, 1e-300)), -np.inf)
        sign_t = sign_t * np.sign(w)

    live = sign_t != 0.0
    lmax = np.max(np.where(live, log_t, -np.inf), axis=-1)
    lmax_safe = np.where(np.isneginf(lmax), 0.0, lmax)
    scaled = np.where(live, sign_t * np.exp(log_t - lmax_safe[..., None]), 0.0)

    if extended:
        out = np.empty(nu.shape)
        flat_out = out.reshape(-1)
        for i, row in enumerate(scaled.reshape(-1, pmax + 1)):
            acc = DoubleDouble()
            for v in row:
                acc.add(float(v))
            flat_out[i] = acc.total
    else:
        s_acc = np.zeros(nu.shape)
        c_acc = np.zeros(nu.shape)
        for k in range(pmax + 1):
            x = scaled[..., k]
            t = s_acc + x
            big = np.abs(s_acc) >= np.abs(x)
            c_acc += np.where(big, (s_acc - t) + x, (x - t) + s_acc)
            s_acc = t
        out = s_acc + c_acc
    return out * np.exp(lmax_safe)


def a_matrix(ctx: QuantumContext, nu: float, mu: float, l: int,
             extended: bool = False) -> float:
    """Regular-solution coupling matrix element A_{nu mu, l}."""
    return float(a_row_values(nu, mu, ctx.m, l, breve=False, extended=extended)[0])


def a_matrix_asymptotic(nu: float, l: int, m: int) -> float:
    """Large-index form (-1)^l nu^{l-m} 2^l m!^2 / (l!^2 (l+m)!)."""
    sign = 1.0 if l % 2 == 0 else -1.0
    lg = (l * math.log(2.0) + 2.0 * gammaln(m + 1.0) - 2.0 * gammaln(l + 1.0)
          - gammaln(l + m + 1.0))
    return sign * nu ** (l - m) * math.exp(lg)


def a_breve_matrix(ctx: QuantumContext, nu: float, mu: float, l: int,
                   extended: bool = False) -> float:
    """Digamma-weighted companion matrix element.

    Requires the psi arguments -mu + s (s = 0..l-m) pole-free, which any
    non-integer mu guarantees; integer mu >= s flags misuse with integer
    quantum numbers.
    """
    for s in range(0, l - ctx.m + 1):
        arg = -mu + s
        if arg < 0.5 and abs(arg - round(arg)) <= _INT_TOL:
            raise PoleError(f"psi(-mu+s) pole at mu={mu}, s={s}")
    return float(a_row_values(nu, mu, ctx.m, l, breve=True, extended=extended)[0])


def b_matrix(ctx: QuantumContext, l: int, n1: int) -> SignedLogValue:
    """Irregular-expansion coefficient B_{l,n1} as a sign-tracked log value."""
    if n1 < 0:
        raise DomainError(f"n1 must be nonnegative, got {n1}")
    n2 = ctx.n - n1 - ctx.m - 1.0
    if abs(n2 - round(n2)) <= _INT_TOL:
        raise PoleError(f"Gamma(-n2) pole: integer n2 = {n2} (integer n)")
    a_val = a_matrix(ctx, float(n1), n2, l)
    if a_val == 0.0:
        return SignedLogValue.zero()
    w = wronskian_W(ctx, l)
    g = log_gamma_signed(-n2)
    pref = math.factorial(ctx.m) * norm_Nlm(l, ctx.m)
    nsq = norm_Nn1(ctx, n1) ** 2
    log_abs = (w.log_abs + math.log(abs(a_val)) + math.log(nsq) + g.log_abs
               - math.log(pref))
    return SignedLogValue(log_abs, w.sign * math.copysign(1.0, a_val) * g.sign)


def omega(ctx: QuantumContext, mu: float) -> float:
    """Cotangent-weight function of the Green-function gamma construction."""
    if abs(mu - round(mu)) <= _INT_TOL:
        raise PoleError(f"omega pole at integer mu = {mu}")
    m = ctx.m
    ratio = 1.0
    for i in range(1, m + 1):
        ratio *= (mu + i)  # Gamma(1+m+mu)/Gamma(1+mu) exactly
    bracket = 0.5 * (digamma(1.0 + m + mu) + digamma(1.0 + mu)
                     - 2.0 * math.log(ctx.n)) + math.pi * cot_pi(mu)
    return ratio * bracket


def omega_vec(ctx: QuantumContext, mu_arr: np.ndarray) -> np.ndarray:
    """Vectorized omega over an array of non-integer arguments."""
    mu_arr = np.asarray(mu_arr, dtype=float)
    if np.any(np.abs(mu_arr - np.round(mu_arr)) <= _INT_TOL):
        raise PoleError("omega pole at integer argument")
    m = ctx.m
    ratio = np.ones_like(mu_arr)
    for i in range(1, m + 1):
        ratio = ratio * (mu_arr + i)
    r = mu_arr - np.round(mu_arr)
    cot = np.cos(math.pi * r) / np.sin(math.pi * r)
    bracket = 0.5 * (psi(1.0 + m + mu_arr) + psi(1.0 + mu_arr)
                     - 2.0 * math.log(ctx.n)) + math.pi * cot
    return ratio * bracket


# ---------------------------------------------------------------------------
# Identity residual oracles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidualField:
    """Residual of an exact re-expansion over a grid."""

    grid: FieldGrid
    lhs: np.ndarray
    rhs: np.ndarray
    flagged: np.ndarray
    truncation: int

    @property
    def residual(self) -> np.ndarray:
        return self.lhs - self.rhs

    def sup_relative(self, floor_frac: float = 1e-2) -> float:
        """Sup over unflagged nodes of |lhs-rhs| / max(|lhs|, floor*scale).

        The floor keeps nodal lines of the expanded function (where both
        sides vanish together) from dominating the statistic.
        """
        scale = np.max(np.abs(self.lhs[~self.flagged]))
        denom = np.maximum(np.abs(self.lhs), floor_frac * scale)
        rel = np.abs(self.residual) / denom
        return float(np.max(rel[~self.flagged]))


def regular_lft_identity_residual(ctx: QuantumContext, nu: float,
                                  grid: FieldGrid, l_max: int,
                                  check_convergence: bool = True,
                                  extended: bool = False,
                                  a_matrix_fn=None) -> ResidualField:
    """f_nu(xi) f_mu(eta) - Sum_{l=m}^{l_max} A_{nu mu,l} P_l^m(cos t) F_l(r).

    The master self-consistency oracle: it pins the Legendre convention,
    the coupling matrix and both regular solutions simultaneously.
    ``a_matrix_fn`` may substitute the coupling-matrix implementation
    (used by the verification driver's mutation check).
    """
    m, n = ctx.m, ctx.n
    mu = n - nu - m - 1.0
    a_fn = a_matrix_fn if a_matrix_fn is not None else a_matrix
    xi, eta = grid.xi_eta()
    f_xi = parabolic_regular_f_vec(ctx, nu, xi.ravel()).reshape(xi.shape)
    f_eta = parabolic_regular_f_vec(ctx, mu, eta.ravel()).reshape(eta.shape)
    lhs = f_xi * f_eta

    def partial(lmax: int) -> np.ndarray:
        ls = np.arange(m, lmax + 1)
        a_vals = np.array([a_fn(ctx, nu, mu, int(l), extended=extended)
                           for l in ls])
        p_all = legendre_p_all(lmax, m, grid.costheta_values)   # (L, ncos)
        f_all = np.stack([radial_regular_F_vec(ctx, int(l), grid.r_values)
                          for l in ls])                          # (L, nr)
        return np.einsum("k,kr,kc->rc", a_vals, f_all, p_all)

    rhs = partial(l_max)
    flagged = grid.flagged()
    field = ResidualField(grid, lhs, rhs, flagged, l_max)
    if check_convergence:
        ext = ResidualField(grid, lhs, partial(l_max + 5), flagged, l_max + 5)
        n0, n1_ = field.sup_relative(), ext.sup_relative()
        if n1_ > 1e-14 and abs(n0 - n1_) > 0.10 * max(n0, n1_):
            raise ConvergenceError(
                f"l-sum not converged at l_max={l_max}: sup residual "
                f"{n0:.3e} -> {n1_:.3e} when extending by 5")
        field = ext
    return field


def _log_b_over_n1(ctx: QuantumContext, n1_arr: np.ndarray, l: int):
    """(ln|B_{l,n1}|, sign) vectorized over integer n1 values."""
    m, n = ctx.m, ctx.n
    n2 = n - n1_arr - m - 1.0
    a_vals = a_row_values(n1_arr.astype(float), n2, m, l)
    mag = np.abs(a_vals)
    with np.errstate(divide="ignore"):
        la = np.where(mag > 0, np.log(np.maximum(mag, 1e-300)), -np.inf)
    sa = np.sign(a_vals)
    w = wronskian_W(ctx, l)
    l_nsq = (gammaln(m + n1_arr + 1.0) - gammaln(n1_arr + 1.0)
             - math.log(n) - 2.0 * gammaln(m + 1.0))
    log_b = (w.log_abs - math.log(math.factorial(m) * norm_Nlm(l, m))
             + la + l_nsq + gammaln(-n2))
    sign_b = w.sign * sa * gammasgn(-n2)
    return log_b, sign_b


class _CompensatedGridSum:
    """Neumaier accumulator over a flat grid, fixed deterministic order."""

    def __init__(self, size: int):
        self.s = np.zeros(size)
        self.c = np.zeros(size)

    def add(self, term: np.ndarray) -> None:
        t = self.s + term
        big = np.abs(self.s) >= np.abs(term)
        self.c += np.where(big, (self.s - t) + term, (term - t) + self.s)
        self.s = t

    @property
    def total(self) -> np.ndarray:
        return self.s + self.c


def _accumulate_irregular_terms(ctx: QuantumContext, l: int, n1_lo: int,
                                n1_hi: int, x_xi: np.ndarray,
                                x_eta: np.ndarray, acc: _CompensatedGridSum,
                                block: int = 512) -> None:
    """Add terms B_{l,n1} f_{n1}(xi) g_{n2}(eta) for n1 in [n1_lo, n1_hi].

    B grows factorially while g decays; each term is balanced in the log
    domain before exponentiation.  f comes from the single upward Laguerre
    sweep, g from the checkpointed downward U chain.
    """
    m, n = ctx.m, ctx.n
    n1_arr = np.arange(n1_lo, n1_hi + 1)
    log_b, sign_b = _log_b_over_n1(ctx, n1_arr.astype(float), l)

    if m > 0:
        with np.errstate(divide="ignore"):
            pref_xi = (0.5 * m) * np.where(x_xi > 0,
                                           np.log(np.maximum(x_xi, 1e-300)),
                                           -np.inf) - 0.5 * x_xi
    else:
        pref_xi = -0.5 * x_xi
    pref_eta = (0.5 * m) * np.log(x_eta) - 0.5 * x_eta

    g_iter = _g_blocks_ascending(ctx, n1_hi, x_eta, block, n1_min=n1_lo)
    g_start, g_lab, g_sab = next(g_iter)
    for n1_val, m_val in kummer_m_integer_blocks(n1_hi, m + 1.0, x_xi):
        if n1_val < n1_lo:
            continue
        while n1_val >= g_start + g_lab.shape[0]:
            g_start, g_lab, g_sab = next(g_iter)
        row = n1_val - g_start
        idx = n1_val - n1_lo
        if sign_b[idx] == 0.0:
            continue
        mag_f = np.abs(m_val)
        with np.errstate(divide="ignore"):
            lt = (log_b[idx] + pref_xi
                  + np.where(mag_f > 0, np.log(np.maximum(mag_f, 1e-300)), -np.inf)
                  + pref_eta + g_lab[row])
        st = sign_b[idx] * np.sign(m_val) * g_sab[row]
        acc.add(np.where(st != 0.0, st * np.exp(lt), 0.0))


def exact_irregular_identity_residual(ctx: QuantumContext, l: int,
                                      grid: FieldGrid,
                                      n1_max: int | None = None,
                                      residual_target: float = 1e-6,
                                      block: int = 512,
                                      n1_cap: int = 60000) -> ResidualField:
    """P_l^m(cos t) G_l(r) - Sum_{n1} B_{l,n1} f_{n1}(xi) g_{n2}(eta).

    When ``n1_max`` is None the sum is extended until the contribution of
    the trailing 20%-of-terms window over unflagged nodes drops below
    1e-3 of the residual target (times the field scale).
    """
    m, n = ctx.m, ctx.n
    if abs((n - m - 1) - round(n - m - 1)) <= _INT_TOL:
        raise PoleError("exact expansion requires non-integer n (Gamma(-n2) poles)")
    xi, eta = grid.xi_eta()
    flagged = grid.flagged()
    p_l = legendre_p_all(l, m, grid.costheta_values)[l - m]
    lg, sg = radial_irregular_G_signed_vec(ctx, l, grid.r_values)
    if np.any(lg > 700.0):
        raise RangeError("G_l overflows binary64 on this grid")
    lhs = (sg * np.exp(lg))[:, None] * p_l[None, :]
    scale = np.max(np.abs(lhs[~flagged]))

    x_xi = (xi / n).ravel()
    x_eta = (eta / n).ravel()
    flagged_flat = flagged.ravel()
    adaptive = n1_max is None
    target_tail = 1e-3 * residual_target * scale
    eta_min = float(np.min(eta[~flagged]))
    nmax = n1_max if n1_max is not None else min(
        n1_cap, max(512, int(175.0 * n / max(eta_min, 1e-3))))

    acc = _CompensatedGridSum(x_xi.size)
    n1_done = -1
    while True:
        _accumulate_irregular_terms(ctx, l, n1_done + 1, nmax, x_xi, x_eta,
                                    acc, block)
        n1_done = nmax
        if not adaptive:
            break
        window = max(1, int(math.ceil(0.2 * (n1_done + 1))))
        tail_acc = _CompensatedGridSum(x_xi.size)
        _accumulate_irregular_terms(ctx, l, n1_done - window + 1, n1_done,
                                    x_xi, x_eta, tail_acc, block)
        tail_sup = float(np.max(np.abs(tail_acc.total)[~flagged_flat]))
        if tail_sup < target_tail:
            break
        if n1_done >= n1_cap:
            raise ConvergenceError(
                f"irregular expansion not converged by n1 = {n1_cap} "
                f"(tail {tail_sup:.2e} vs target {target_tail:.2e})")
        nmax = min(n1_cap, int(1.5 * nmax) + 1)

    rhs = acc.total.reshape(xi.shape)
    return ResidualField(grid, lhs, rhs, flagged, n1_done)


def _g_blocks_ascending(ctx: QuantumContext, n1_max: int, x_eta: np.ndarray,
                        block: int, n1_min: int = 0):
    """Yield the U factors of g_{n2} in ascending-n1 blocks.

    Yields (n1_start, log_abs, sign); row r holds
    U(n1_start + r + m + 1 - n, m+1, x_eta).  Backed by the single stable
    downward chain with block checkpoints.
    """
    n, m = ctx.n, ctx.m
    a_top = n1_max + m + 1.0 - n
    count = n1_max - n1_min + 1
    for j_start, lab, sab in tricomi_u_chain_blocks(a_top, m + 1, x_eta, count,
                                                    block=block):
        blen = lab.shape[0]
        n1_start = n1_max - (j_start + blen - 1)
        yield n1_start, lab[::-1], sab[::-1]
