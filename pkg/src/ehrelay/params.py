"""System parameters and derived constants for the relay outage model.

Powers are stored in watts; dBm values are converted at the boundary
(config files and CLI flags).  Fading is Rayleigh, so squared channel
envelopes are exponential with means lambda_a, lambda_b (terminal-relay
links) and lambda_t (direct link between the terminals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ParameterError(ValueError):
    """Raised when a parameter set violates a physical constraint."""


def dbm_to_watts(value_dbm: float) -> float:
    """Convert a power level from dBm to watts."""
    return 10.0 ** (value_dbm / 10.0) * 1e-3


def watts_to_dbm(value_w: float) -> float:
    """Convert a power level from watts to dBm."""
    if value_w <= 0.0:
        raise ParameterError("power must be positive to express in dBm")
    return 10.0 * math.log10(value_w * 1e3)


@dataclass(frozen=True)
class SystemParams:
    """Static description of one network configuration.

    Attributes:
        p_tx: transmit power of each terminal in watts.
        noise_power: receiver noise power in watts.
        p_th: harvester sensitivity in watts; below it nothing is harvested.
        eta: energy conversion efficiency of the harvester.
        beta: fraction of the block reserved for energy harvesting.
        block_time: block duration in seconds (cancels in all SNRs).
        d_a, d_b: terminal-to-relay distances in meters.
        d_t: terminal-to-terminal distance in meters.
        alpha_s: path-loss exponent of the terminal-relay links.
        alpha_t: path-loss exponent of the direct link.
        lambda_a, lambda_b, lambda_t: mean squared fading envelopes.
        rate: target transmission rate in bit/s/Hz.
    """

    p_tx: float
    noise_power: float
    p_th: float
    eta: float
    beta: float
    block_time: float
    d_a: float
    d_b: float
    d_t: float
    alpha_s: float
    alpha_t: float
    lambda_a: float
    lambda_b: float
    lambda_t: float
    rate: float


@dataclass(frozen=True)
class DerivedConstants:
    """Quantities derived from SystemParams that the formulas consume.

    Attributes:
        snr_tx: transmit SNR, p_tx / noise_power.
        rate_a, rate_b: exponential rates of the terminal-relay path gains,
            d_i**alpha_s / lambda_i (the gains have mean 1 / rate).
        rate_direct: exponential rate of the direct path gain.
        harvest_gain: relay power per unit received power,
            3 * beta * eta / (1 - beta); the harvested energy is spent in
            one of the three equal information sub-slots.
        snr_threshold: SNR needed to decode, 2**rate - 1.
    """

    snr_tx: float
    rate_a: float
    rate_b: float
    rate_direct: float
    harvest_gain: float
    snr_threshold: float


def validate(params: SystemParams) -> None:
    """Check physical constraints, raising ParameterError on violation."""
    if params.p_tx <= 0.0:
        raise ParameterError("p_tx must be positive")
    if params.noise_power <= 0.0:
        raise ParameterError("noise_power must be positive")
    if params.p_th < 0.0:
        raise ParameterError("p_th must be nonnegative")
    if not 0.0 < params.eta <= 1.0:
        raise ParameterError("eta out of (0, 1]")
    if not 0.0 < params.beta < 1.0:
        raise ParameterError("beta out of (0, 1)")
    if params.block_time <= 0.0:
        raise ParameterError("block_time must be positive")
    for name in ("d_a", "d_b", "d_t"):
        if getattr(params, name) <= 0.0:
            raise ParameterError(f"{name} must be positive")
    if params.alpha_s <= 0.0 or params.alpha_t <= 0.0:
        raise ParameterError("path-loss exponents must be positive")
    for name in ("lambda_a", "lambda_b", "lambda_t"):
        if getattr(params, name) <= 0.0:
            raise ParameterError(f"{name} must be positive")
    if params.rate <= 0.0:
        raise ParameterError("rate must be positive")


def derive(params: SystemParams) -> DerivedConstants:
    """Compute the constants used throughout the outage formulas."""
    validate(params)
    return DerivedConstants(
        snr_tx=params.p_tx / params.noise_power,
        rate_a=params.d_a ** params.alpha_s / params.lambda_a,
        rate_b=params.d_b ** params.alpha_s / params.lambda_b,
        rate_direct=params.d_t ** params.alpha_t / params.lambda_t,
        harvest_gain=3.0 * params.beta * params.eta / (1.0 - params.beta),
        snr_threshold=2.0 ** params.rate - 1.0,
    )


# Default configuration used by the CLI when a config file omits a key.
DEFAULT_PARAMS = SystemParams(
    p_tx=dbm_to_watts(10.0),
    noise_power=dbm_to_watts(-70.0),
    p_th=dbm_to_watts(-30.0),
    eta=0.6,
    beta=0.25,
    block_time=1.0,
    d_a=5.0,
    d_b=15.0,
    d_t=20.0,
    alpha_s=4.0,
    alpha_t=4.0,
    lambda_a=1.0,
    lambda_b=1.0,
    lambda_t=2.0,
    rate=3.0,
)
