"""Spherical and parabolic Coulomb solutions at negative energy.

Conventions (atomic units, E = -1/(2 n^2), n = 1/sqrt(-2E) typically
non-integer):

    F_l(r)      = (r/n)^l   e^{-r/n}   M(-n+l+1, 2l+2, 2r/n)   regular
    G_l(r)      = (r/n)^l   e^{-r/n}   U(-n+l+1, 2l+2, 2r/n)   irregular,
                                                               bounded at inf
    f_kappa(z)  = (z/n)^{m/2} e^{-z/2n} M(-kappa, m+1, z/n)    regular
    g_mu(eta)   = (eta/n)^{m/2} e^{-eta/2n} U(-mu, m+1, eta/n) irregular

together with the Wronskian and normalization constants

    W_l   = n (2l+1)! / (2^{2l+1} Gamma(1+l-n))
    N_lm  = (2l+1)/2 * (l-m)!/(l+m)!
    N_n1  = (1/m!) sqrt((m+n1)!/(n1! n))

The numerically measured radial Wronskian satisfies
r^2 (G_l F_l' - G_l' F_l) = +W_l, i.e. W_l corresponds to the pair order
(G, F) with derivative weight r^2 (measured once, asserted by the tests).

Parabolic coordinates: xi = r (1 + cos theta), eta = r (1 - cos theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PoleError, RangeError
from .specfun import (
    SignedLogValue,
    kummer_m_vec,
    lgamma_vec,
    log_gamma_signed,
    tricomi_u_signed_vec,
)

#: nodes with eta below this are flagged (non-uniform-convergence zone)
ETA_FLOOR_DEFAULT = 0.05

#: exponential factors leave binary64 beyond this multiple of n^2
R_WORKING_RANGE_FACTOR = 4.0


@dataclass(frozen=True)
class QuantumContext:
    """Bundle (n, m, F) fixing energy E = -1/(2 n^2), azimuthal quantum
    number m and field strength F (atomic units).

    Exactly one of ``F`` or ``delta`` is given; the other is derived from
    delta = 16 F n^4 (delta = 1 is the classical ionization threshold).
    """

    n: float
    m: int
    F: float = field(default=None)  # type: ignore[assignment]
    delta: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.n <= 0:
            raise DomainError(f"n must be positive, got {self.n}")
        if self.m < 0 or self.m != int(self.m):
            raise DomainError(f"m must be a nonnegative integer, got {self.m}")
        if (self.F is None) == (self.delta is None):
            raise DomainError("exactly one of F and delta must be given")
        if self.F is None:
            object.__setattr__(self, "F", self.delta / (16.0 * self.n ** 4))
        else:
            object.__setattr__(self, "delta", 16.0 * self.F * self.n ** 4)
        if self.F < 0:
            raise DomainError(f"F must be nonnegative, got {self.F}")

    @property
    def energy(self) -> float:
        return -0.5 / (self.n * self.n)

    def r_max_working(self) -> float:
        return R_WORKING_RANGE_FACTOR * self.n * self.n


@dataclass(frozen=True)
class FieldGrid:
    """Rectangular evaluation grid over (r, cos theta)."""

    r_values: np.ndarray
    costheta_values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r_values, dtype=float)
        u = np.asarray(self.costheta_values, dtype=float)
        if np.any(r <= 0):
            raise DomainError("grid radii must be positive")
        if np.any(np.abs(u) > 1):
            raise DomainError("cos theta must lie in [-1, 1]")
        if np.any(np.diff(r) <= 0) or np.any(np.diff(u) <= 0):
            raise DomainError("grid axes must be strictly increasing")
        object.__setattr__(self, "r_values", r)
        object.__setattr__(self, "costheta_values", u)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.r_values), len(self.costheta_values))

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.r_values, self.costheta_values, indexing="ij")

    def xi_eta(self) -> tuple[np.ndarray, np.ndarray]:
        r, u = self.meshes()
        return r * (1.0 + u), r * (1.0 - u)

    def flagged(self, eta_floor: float = ETA_FLOOR_DEFAULT) -> np.ndarray:
        """Boolean mask of nodes in the small-eta non-uniform-convergence
        zone; these are computed but excluded from acceptance statistics."""
        _, eta = self.xi_eta()
        return eta < eta_floor


def xi_eta_from_spherical(r, costheta):
    r = np.asarray(r, dtype=float)
    u = np.asarray(costheta, dtype=float)
    return r * (1.0 + u), r * (1.0 - u)


def spherical_from_xi_eta(xi, eta):
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    r = 0.5 * (xi + eta)
    return r, (xi - eta) / (xi + eta)


def _check_r(ctx: QuantumContext, r: np.ndarray) -> None:
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    if np.any(r > ctx.r_max_working()):
        raise RangeError(
            f"r exceeds the working range {ctx.r_max_working():.3g} = 4 n^2; "
            "exponential factors would leave binary64")


def radial_regular_F_vec(ctx: QuantumContext, l: int, r) -> np.ndarray:
    """Regular radial solution F_l(r), unnormalized; vectorized in r."""
    if l < ctx.m:
        raise DomainError(f"need l >= m, got l={l}, m={ctx.m}")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    _check_r(ctx, r)
    n = ctx.n
    x = 2.0 * r / n
    mval = kummer_m_vec(l + 1.0 - n, 2 * l + 2.0, x)
    return (r / n) ** l * np.exp(-r / n) * mval


def radial_regular_F(ctx: QuantumContext, l: int, r: float) -> float:
    return float(radial_regular_F_vec(ctx, l, r)[0])


def radial_irregular_G_signed_vec(ctx: QuantumContext, l: int, r):
    """log|G_l(r)| and sign, vectorized in r."""
    if l < ctx.m:
        raise DomainError(f"need l >= m, got l={l}, m={ctx.m}")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    _check_r(ctx, r)
    n = ctx.n
    x = 2.0 * r / n
    lu, su = tricomi_u_signed_vec(l + 1.0 - n, 2 * l + 2, x)
    return lu + l * np.log(r / n) - r / n, su


def radial_irregular_G_vec(ctx: QuantumContext, l: int, r) -> np.ndarray:
    l_abs, s = radial_irregular_G_signed_vec(ctx, l, r)
    if np.any(l_abs > 700.0):
        raise RangeError("G_l overflows binary64 on this grid")
    return s * np.exp(l_abs)


def radial_irregular_G(ctx: QuantumContext, l: int, r: float) -> float:
    return float(radial_irregular_G_vec(ctx, l, r)[0])


def parabolic_regular_f_vec(ctx: QuantumContext, kappa: float, zeta) -> np.ndarray:
    """Regular parabolic solution f_kappa(zeta), vectorized in zeta >= 0."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    if np.any(zeta < 0):
        raise DomainError("zeta must be nonnegative")
    n, m = ctx.n, ctx.m
    x = zeta / n
    mval = kummer_m_vec(-kappa, m + 1.0, x)
    pref = np.where(zeta > 0, (zeta / n) ** (0.5 * m), 1.0 if m == 0 else 0.0)
    return pref * np.exp(-0.5 * zeta / n) * mval


def parabolic_regular_f(ctx: QuantumContext, kappa: float, zeta: float) -> float:
    return float(parabolic_regular_f_vec(ctx, kappa, zeta)[0])


def parabolic_irregular_g_signed_vec(ctx: QuantumContext, mu: float, eta):
    """log|g_mu(eta)| and sign, vectorized in eta > 0.

    For m >= 1 the U factor grows like eta^{-m/2} toward eta = 0 relative
    to the prefactor; evaluation is exact but the product magnitudes carry
    the eta^{-m/2} blow-up, which callers flag near eta = 0.
    """
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if np.any(eta <= 0):
        raise DomainError("eta must be positive")
    n, m = ctx.n, ctx.m
    x = eta / n
    lu, su = tricomi_u_signed_vec(-mu, m + 1, x)
    return lu + 0.5 * m * np.log(x) - 0.5 * x, su


def parabolic_irregular_g_vec(ctx: QuantumContext, mu: float, eta) -> np.ndarray:
    l_abs, s = parabolic_irregular_g_signed_vec(ctx, mu, eta)
    if np.any(l_abs > 700.0):
        raise RangeError("g_mu overflows binary64 on this grid")
    return s * np.exp(l_abs)


def parabolic_irregular_g(ctx: QuantumContext, mu: float, eta: float) -> float:
    return float(parabolic_irregular_g_vec(ctx, mu, eta)[0])


def wronskian_W(ctx: QuantumContext, l: int) -> SignedLogValue:
    """W_l = n (2l+1)! / (2^{2l+1} Gamma(1+l-n)) as a sign-tracked log value."""
    n = ctx.n
    arg = 1.0 + l - n
    try:
        lg = log_gamma_signed(arg)
    except PoleError as exc:
        raise PoleError(f"W_l pole: Gamma(1+l-n) with 1+l-n = {arg}") from exc
    log_abs = (math.log(n) + float(lgamma_vec(np.array([2 * l + 2.0]))[0])
               - (2 * l + 1) * math.log(2.0) - lg.log_abs)
    return SignedLogValue(log_abs, lg.sign)


def norm_Nlm(l: int, m: int) -> float:
    """N_lm = ((2l+1)/2) (l-m)!/(l+m)!"""
    if not (0 <= m <= l):
        raise DomainError(f"need 0 <= m <= l, got l={l}, m={m}")
    val = 0.5 * (2 * l + 1)
    for i in range(l - m + 1, l + m + 1):
        val /= i
    return val


def norm_Nn1(ctx: QuantumContext, n1: int) -> float:
    """N_n1 = (1/m!) sqrt((m+n1)!/(n1! n)), the zero-field normalization of
    f_n1 under the weight-1 inner product int f^2 dxi."""
    if n1 < 0:
        raise DomainError(f"n1 must be nonnegative, got {n1}")
    return math.sqrt(norm_Nnu_sq(ctx, float(n1)))


def norm_Nnu_sq(ctx: QuantumContext, nu: float) -> float:
    """Continuous-index extension N^2(nu) = Gamma(m+nu+1)/(Gamma(nu+1) n m!^2)."""
    m = ctx.m
    lg = (float(lgamma_vec(np.array([m + nu + 1.0]))[0])
          - float(lgamma_vec(np.array([nu + 1.0]))[0]))
    return math.exp(lg) / (ctx.n * math.factorial(m) ** 2)
