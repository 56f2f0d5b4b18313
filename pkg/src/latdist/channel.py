"""Finite-blocklength decoding error models for AWGN and Rayleigh fading links.

Unit conventions follow the source formulas: the AWGN model works in bits
per channel use, while both fading models work in nats and convert the
payload from bits with an explicit ln(2) factor. Blocklengths always count
channel uses, so latency is n / (2B) for every family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri

from .errors import DomainError, QuadratureFailure

LOG2_E = math.log2(math.e)
LN_2 = math.log(2.0)
EULER_GAMMA = float(np.euler_gamma)

# Absolute tolerance required of the fading-moment quadratures.
_QUAD_TOL = 1e-8


class ChannelFamily(Enum):
    AWGN = "awgn"
    FADING_CSI = "fading-csi"
    FADING_NOCSI = "fading-nocsi"


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise DomainError(f"need a positive ratio, got {x}")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class ChannelSpec:
    """A channel family with its reference SNR, bandwidths, and coherence interval.

    ``gamma0`` is the linear SNR measured at reference bandwidth
    ``bandwidth0_hz``; operating at ``bandwidth_hz`` rescales it.
    """

    family: ChannelFamily
    gamma0: float
    bandwidth0_hz: float
    bandwidth_hz: float
    coherence: int | None = None

    def __post_init__(self):
        if self.gamma0 <= 0 or self.bandwidth0_hz <= 0 or self.bandwidth_hz <= 0:
            raise DomainError("SNR and bandwidths must be positive")
        if self.family is not ChannelFamily.AWGN:
            if self.coherence is None or self.coherence < 1:
                raise DomainError("fading channels need a coherence interval >= 1")
            if self.family is ChannelFamily.FADING_NOCSI and self.coherence <= 2:
                raise DomainError("the no-CSI model needs a coherence interval > 2")

    @property
    def gamma(self) -> float:
        return operational_snr(self)


def operational_snr(spec: ChannelSpec) -> float:
    """Linear SNR at the operating bandwidth: gamma0 * B0 / B."""
    return spec.gamma0 * spec.bandwidth0_hz / spec.bandwidth_hz


def q_func(x: float) -> float:
    """Complementary CDF of the standard Gaussian."""
    return float(ndtr(-x))


def q_inv(p: float) -> float:
    """Inverse of q_func on (0, 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"q_inv needs p in (0, 1), got {p}")
    return float(-ndtri(p))


class AwgnCoefficients(NamedTuple):
    capacity: float  # bits per channel use
    dispersion: float  # bits^2 per channel use


def awgn_coeffs(gamma: float) -> AwgnCoefficients:
    """Capacity (1/2)log2(1+g) and dispersion g(g+2)/(2(g+1)^2) * log2(e)^2."""
    if gamma <= 0:
        raise DomainError(f"SNR must be positive, got {gamma}")
    capacity = 0.5 * math.log2(1.0 + gamma)
    dispersion = gamma * (gamma + 2.0) / (2.0 * (gamma + 1.0) ** 2) * LOG2_E**2
    return AwgnCoefficients(capacity, dispersion)


def epsilon_awgn(n: int, gamma: float, j_bits: float) -> float:
    """Block error probability for sending j_bits over n AWGN channel uses."""
    if n < 1:
        raise DomainError(f"blocklength must be >= 1, got {n}")
    if j_bits <= 0:
        raise DomainError(f"payload must be positive, got {j_bits}")
    c, v = awgn_coeffs(gamma)
    return q_func((n * c - j_bits + 0.5 * math.log2(n)) / math.sqrt(n * v))


def _exp_expectation(f: Callable[[float], float]) -> float:
    """E[f(Z)] for Z ~ unit-mean exponential, by adaptive quadrature."""
    value, err = integrate.quad(
        lambda z: f(z) * math.exp(-z), 0.0, np.inf, epsabs=1e-11, epsrel=1e-11, limit=200
    )
    if err > _QUAD_TOL:
        raise QuadratureFailure(f"quadrature error {err} above {_QUAD_TOL}")
    return value


class FadingCsiCoefficients(NamedTuple):
    capacity: float  # nats per channel use
    dispersion: float  # nats^2, already includes the coherence terms


@lru_cache(maxsize=None)
def fading_csi_coeffs(gamma: float, coherence: int) -> FadingCsiCoefficients:
    """Moments of log(1+gamma*Z), Z exponential, for the receiver-CSI model.

    capacity = E[log(1+gZ)]; dispersion = var[log(1+gZ)] + 1/F - E[1/(1+gZ)]^2/F.
    Computed by deterministic quadrature; closed forms via the exponential
    integral exist and are used as cross-checks in the tests.
    """
    if gamma <= 0:
        raise DomainError(f"SNR must be positive, got {gamma}")
    if coherence < 1:
        raise DomainError(f"coherence interval must be >= 1, got {coherence}")
    mean = _exp_expectation(lambda z: math.log1p(gamma * z))
    second = _exp_expectation(lambda z: math.log1p(gamma * z) ** 2)
    recip = _exp_expectation(lambda z: 1.0 / (1.0 + gamma * z))
    variance = second - mean * mean
    dispersion = variance + (1.0 - recip * recip) / coherence
    return FadingCsiCoefficients(mean, dispersion)


def epsilon_fading_csi(n: int, gamma: float, j_bits: float, coherence: int) -> float:
    """Block error probability with receiver CSI over a Rayleigh block-fading link."""
    if n < 1:
        raise DomainError(f"blocklength must be >= 1, got {n}")
    if j_bits <= 0:
        raise DomainError(f"payload must be positive, got {j_bits}")
    c, v = fading_csi_coeffs(gamma, coherence)
    return q_func((n * c - j_bits * LN_2) / math.sqrt(n * coherence * v))


class NoCsiCoefficients(NamedTuple):
    block_info: float  # nats per coherence block
    block_dispersion: float  # nats^2 per coherence block


def default_snr_correction(coherence: int, gamma: float) -> float:
    """Vanishing high-SNR correction term, F / (5*gamma)."""
    return coherence / (5.0 * gamma)


@lru_cache(maxsize=None)
def fading_nocsi_coeffs(
    gamma: float,
    coherence: int,
    correction: Callable[[int, float], float] | None = None,
) -> NoCsiCoefficients:
    """High-SNR information and dispersion per block for the no-CSI model.

    block_info = (F-1)log(F*gamma) - log Gamma(F) - (F-1)(1+euler_gamma)
    plus a pluggable correction that must vanish as gamma grows;
    block_dispersion = (F-1)^2 * pi^2/6 + (F-1). Only meaningful at high SNR.
    """
    if gamma <= 0:
        raise DomainError(f"SNR must be positive, got {gamma}")
    if coherence <= 2:
        raise DomainError(f"coherence interval must exceed 2, got {coherence}")
    fix = correction if correction is not None else default_snr_correction
    block_info = (
        (coherence - 1) * math.log(coherence * gamma)
        - math.lgamma(coherence)
        - (coherence - 1) * (1.0 + EULER_GAMMA)
        + fix(coherence, gamma)
    )
    block_dispersion = (coherence - 1) ** 2 * math.pi**2 / 6.0 + (coherence - 1)
    return NoCsiCoefficients(block_info, block_dispersion)


def epsilon_fading_nocsi(n: int, gamma: float, j_bits: float, coherence: int) -> float:
    """Block error probability without CSI; the model is valid only where it lands in (0, 1/2)."""
    if n < 1:
        raise DomainError(f"blocklength must be >= 1, got {n}")
    if j_bits <= 0:
        raise DomainError(f"payload must be positive, got {j_bits}")
    info, disp = fading_nocsi_coeffs(gamma, coherence)
    return q_func(
        (n * info - j_bits * coherence * LN_2) / math.sqrt(n * coherence * disp)
    )


def epsilon_for(spec: ChannelSpec, n: int, j_bits: float) -> float:
    """Exact model error probability for a channel spec at blocklength n."""
    gamma = spec.gamma
    if spec.family is ChannelFamily.AWGN:
        return epsilon_awgn(n, gamma, j_bits)
    if spec.family is ChannelFamily.FADING_CSI:
        return epsilon_fading_csi(n, gamma, j_bits, spec.coherence)
    return epsilon_fading_nocsi(n, gamma, j_bits, spec.coherence)
