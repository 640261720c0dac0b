"""Associated Legendre functions in the Ferrers convention, no
Condon-Shortley phase:

    P_l^m(u) = (1 - u^2)^(m/2) d^m P_l / du^m,   0 <= m <= l,  u in [-1, 1].

The sign convention is pinned by the regular frame-transformation identity
test; with the (-1)^m phase the identity fails at the sign level.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError


def legendre_p(l: int, m: int, u) -> float | np.ndarray:
    """P_l^m(u), scalar or elementwise over an array of u."""
    arr = legendre_p_all(l, m, u)
    return arr[l - m]


def legendre_p_all(l_max: int, m: int, u) -> np.ndarray:
    """All P_l^m(u) for l = m..l_max, stacked on axis 0.

    Upward three-term recurrence:
        P_m^m     = (2m-1)!! (1-u^2)^(m/2)
        P_{m+1}^m = u (2m+1) P_m^m
        (l-m) P_l^m = u (2l-1) P_{l-1}^m - (l+m-1) P_{l-2}^m
    """
    if not (0 <= m <= l_max):
        raise DomainError(f"need 0 <= m <= l_max, got m={m}, l_max={l_max}")
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1.0 + 1e-14):
        raise DomainError("u must lie in [-1, 1]")
    u = np.clip(u, -1.0, 1.0)

    s2 = np.maximum(1.0 - u * u, 0.0)
    pmm = np.ones_like(u)
    if m > 0:
        dfact = 1.0
        for i in range(1, 2 * m, 2):
            dfact *= i
        pmm = dfact * s2 ** (0.5 * m)

    out = np.empty((l_max - m + 1,) + u.shape)
    out[0] = pmm
    if l_max == m:
        return out
    out[1] = u * (2 * m + 1) * pmm
    for l in range(m + 2, l_max + 1):
        out[l - m] = (u * (2 * l - 1) * out[l - m - 1]
                      - (l + m - 1) * out[l - m - 2]) / (l - m)
    return out
