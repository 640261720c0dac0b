"""Real-argument special-function kernels with sign-tracked log-domain
evaluation.

All operations are pure functions with no shared mutable state.
"""

from ._signedlog import (
    DoubleDouble,
    NeumaierSum,
    SignedLogValue,
    neumaier_sum_array,
    signedlog_sum,
)
from ._gamma import (
    POLE_TOL,
    cot_pi,
    digamma,
    digamma_array,
    gammasgn_vec,
    lgamma_vec,
    log_gamma_ratio,
    log_gamma_signed,
    log_gamma_signed_or_zero_reciprocal,
)
from ._legendre import legendre_p, legendre_p_all
from ._hyp import (
    kummer_m,
    kummer_m_integer_blocks,
    kummer_m_ladder_vec,
    kummer_m_prime,
    kummer_m_vec,
    tricomi_u,
    tricomi_u_chain_blocks,
    tricomi_u_prime,
    tricomi_u_signed,
    tricomi_u_signed_vec,
)

__all__ = [
    "DoubleDouble",
    "NeumaierSum",
    "POLE_TOL",
    "SignedLogValue",
    "cot_pi",
    "digamma",
    "digamma_array",
    "gammasgn_vec",
    "kummer_m",
    "kummer_m_integer_blocks",
    "kummer_m_ladder_vec",
    "kummer_m_prime",
    "kummer_m_vec",
    "legendre_p",
    "legendre_p_all",
    "lgamma_vec",
    "log_gamma_ratio",
    "log_gamma_signed",
    "log_gamma_signed_or_zero_reciprocal",
    "neumaier_sum_array",
    "signedlog_sum",
    "tricomi_u",
    "tricomi_u_chain_blocks",
    "tricomi_u_prime",
    "tricomi_u_signed",
    "tricomi_u_signed_vec",
]
