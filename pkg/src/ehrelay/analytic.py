"""Closed-form and quadrature evaluation of the system outage probability.

The derivation works with three reduced variables of one coherence block:

    gain_sum     X = gain_a + gain_b        (sum of terminal-relay gains)
    inv_product  Y = 1 / (gain_a * gain_b)  (inverse product of the same)
    direct gain  Z                          (terminal-terminal gain)

The outage splits into the direct-link success probability plus the
probability that the relay path saves the block, the latter evaluated by
integration by parts and a Gauss-Chebyshev rule.  The derivation treats
the gain sum and the inverse product as independent, which is the one
modeling approximation in this path; the Monte Carlo engine samples the
exact joint event and quantifies the gap.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .numerics import chebyshev_nodes, x_times_k1
from .params import DerivedConstants, SystemParams, dbm_to_watts, derive

log = logging.getLogger(__name__)

# Relative rate difference below which the two terminal-relay links are
# treated as identically distributed (the general CDF branch divides by
# the rate difference).
_EQUAL_RATE_RTOL = 1e-6

# Largest exponent fed to exp() inside the weighted window term; above
# this the integration-by-parts intermediates overflow double precision.
_MAX_EXPONENT = 700.0

_clamp_events = 0


class FormulaRangeError(ValueError):
    """Raised when the quadrature path cannot be evaluated reliably."""


def clamp_event_count() -> int:
    """Number of times an analytic probability was clamped into [0, 1]."""
    return _clamp_events


def reset_clamp_events() -> None:
    global _clamp_events
    _clamp_events = 0


def _clamp_unit(value: float, context: str) -> float:
    global _clamp_events
    if value < 0.0 or value > 1.0:
        _clamp_events += 1
        log.debug("clamped %s = %r into [0, 1]", context, value)
        return min(1.0, max(0.0, value))
    return value


def _rates_equal(consts: DerivedConstants) -> bool:
    gap = abs(consts.rate_a - consts.rate_b)
    return gap <= _EQUAL_RATE_RTOL * max(consts.rate_a, consts.rate_b)


def gain_sum_cdf(delta, consts: DerivedConstants):
    """CDF of the sum of the two terminal-relay path gains.

    Hypoexponential with rates rate_a, rate_b; the two-sided expm1 form
    avoids cancellation between the nearly equal exponentials.
    """
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0.0):
        raise ValueError("delta must be nonnegative")
    a, b = consts.rate_a, consts.rate_b
    if _rates_equal(consts):
        r = 0.5 * (a + b)
        out = -np.expm1(-r * delta) - r * delta * np.exp(-r * delta)
    else:
        # 1 - (hi exp(-lo d) - lo exp(-hi d)) / (hi - lo), anchored on the
        # smaller rate so the expm1 argument stays nonpositive.
        lo, hi = min(a, b), max(a, b)
        s = hi - lo
        out = -np.expm1(-lo * delta) + (lo / s) * np.exp(-lo * delta) * np.expm1(-s * delta)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def gain_sum_pdf(delta, consts: DerivedConstants):
    """Density of the gain sum, the derivative of gain_sum_cdf."""
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0.0):
        raise ValueError("delta must be nonnegative")
    a, b = consts.rate_a, consts.rate_b
    if _rates_equal(consts):
        r = 0.5 * (a + b)
        out = r * r * delta * np.exp(-r * delta)
    else:
        lo, hi = min(a, b), max(a, b)
        s = hi - lo
        out = -(lo * hi / s) * np.exp(-lo * delta) * np.expm1(-s * delta)
    return float(out) if np.ndim(out) == 0 else out


def inv_product_cdf(delta, consts: DerivedConstants):
    """CDF of the inverse product of the two terminal-relay path gains.

    Equals u * K1(u) with u = sqrt(4 * rate_a * rate_b / delta); as delta
    grows u falls to zero and the CDF rises to one.  delta = 0 returns 0
    by the limit convention.
    """
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0.0):
        raise ValueError("delta must be nonnegative")
    zero = delta == 0.0
    u = np.sqrt(4.0 * consts.rate_a * consts.rate_b / np.where(zero, 1.0, delta))
    out = np.where(zero, 0.0, np.clip(x_times_k1(u), 0.0, 1.0))
    return float(out) if np.ndim(out) == 0 else out


def direct_gain_cdf(delta, consts: DerivedConstants):
    """CDF of the direct terminal-terminal path gain (exponential)."""
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0.0):
        raise ValueError("delta must be nonnegative")
    out = -np.expm1(-consts.rate_direct * delta)
    return float(out) if np.ndim(out) == 0 else out


def direct_success_prob(consts: DerivedConstants) -> float:
    """Probability that the direct link decodes on its own."""
    return math.exp(-consts.snr_threshold * consts.rate_direct / consts.snr_tx)


@dataclass(frozen=True)
class IntegrationBounds:
    """Integration region of the relay-success probability.

    Attributes:
        sum_floor: least gain sum that powers the harvester and lets both
            uplinks decode, max(p_th / p_tx, 2 * snr_threshold / snr_tx).
        inv_prod_max: largest inverse product compatible with sum_floor.
        inv_prod_min: split point between the regime where the relay
            boost alone crosses the threshold (below) and the regime
            needing direct-link help (above).
    """

    sum_floor: float
    inv_prod_max: float
    inv_prod_min: float


def integration_bounds(consts: DerivedConstants, params: SystemParams) -> IntegrationBounds:
    """Compute the integration region from the system constants."""
    ratio = consts.snr_threshold / consts.snr_tx
    sum_floor = max(params.p_th / params.p_tx, 2.0 * ratio)
    inv_prod_max = 1.0 / ((sum_floor - ratio) * ratio)
    inv_prod_min = min(consts.snr_tx * consts.harvest_gain / consts.snr_threshold, inv_prod_max)
    return IntegrationBounds(
        sum_floor=sum_floor,
        inv_prod_max=inv_prod_max,
        inv_prod_min=inv_prod_min,
    )


def _window_upper(y, consts: DerivedConstants):
    """Largest gain sum for which the relay boost still rescues the block."""
    return consts.snr_tx / (np.asarray(y, dtype=float) * consts.snr_threshold) \
        + consts.snr_threshold / consts.snr_tx


def window_prob(y, consts: DerivedConstants, bounds: IntegrationBounds):
    """Probability that the gain sum lies in the rescue window at inverse
    product y: CDF(upper(y)) - CDF(sum_floor)."""
    upper = _window_upper(y, consts)
    out = gain_sum_cdf(upper, consts) - gain_sum_cdf(bounds.sum_floor, consts)
    return float(out) if np.ndim(out) == 0 else out


def window_prob_deriv(y, consts: DerivedConstants, bounds: IntegrationBounds):
    """Derivative of window_prob in y (nonpositive: the window shrinks)."""
    y = np.asarray(y, dtype=float)
    density = gain_sum_pdf(_window_upper(y, consts), consts)
    upper_deriv = -consts.snr_tx / (y * y * consts.snr_threshold)
    # The density underflows to zero long before upper_deriv can overflow;
    # keep 0 * inf out of the product.
    out = np.where(density == 0.0, 0.0, density * upper_deriv)
    return float(out) if np.ndim(out) == 0 else out


def _harvest_exponent(y, consts: DerivedConstants):
    exponent = consts.rate_direct * consts.harvest_gain / np.asarray(y, dtype=float)
    if np.any(exponent > _MAX_EXPONENT):
        raise FormulaRangeError(
            "direct-gain weight overflows for inverse products this small; "
            "the quadrature path is unreliable here, use the montecarlo engine"
        )
    return exponent


def window_prob_weighted(y, consts: DerivedConstants, bounds: IntegrationBounds):
    """Rescue-window probability weighted by the direct-gain slice factor
    expm1(rate_direct * harvest_gain / y)."""
    out = np.expm1(_harvest_exponent(y, consts)) * window_prob(y, consts, bounds)
    return float(out) if np.ndim(out) == 0 else out


def window_prob_weighted_deriv(y, consts: DerivedConstants, bounds: IntegrationBounds):
    """Derivative of window_prob_weighted in y."""
    y = np.asarray(y, dtype=float)
    exponent = _harvest_exponent(y, consts)
    weight_deriv = -np.exp(exponent) * exponent / y
    out = weight_deriv * window_prob(y, consts, bounds) \
        + np.expm1(exponent) * window_prob_deriv(y, consts, bounds)
    return float(out) if np.ndim(out) == 0 else out


def _mapped_nodes(lo: float, hi: float, rule) -> np.ndarray:
    return 0.5 * (hi - lo) * rule.nodes + 0.5 * (hi + lo)


def _assisted_pieces(consts, bounds, rule):
    """Boundary piece and success integral of the direct-assisted component.

    Returns (edge, integral) where the component equals
    direct_success * integral and edge - integral recovers the quadrature
    correction of the integration-by-parts form.  Both are zero when the
    integration interval is degenerate.

    The success integral is evaluated directly rather than as
    edge - correction: the weighted window vanishes at inv_prod_max, so

        integral = int [F(inv_prod_min) - F(y)] * w'(y) dy

    over [inv_prod_min, inv_prod_max] with F the inverse-product CDF and
    w the weighted window.  The integrand is nonnegative, which removes
    the edge/correction cancellation that otherwise loses every digit at
    high transmit SNR.  Substituting y = 1/u and clustering nodes toward
    u = 1/inv_prod_max (where w' concentrates) makes a four-node rule
    track the converged integral across the power sweep.
    """
    lo, hi = bounds.inv_prod_min, bounds.inv_prod_max
    if not hi > lo:
        return 0.0, 0.0
    edge = (
        inv_product_cdf(hi, consts) * window_prob_weighted(hi, consts, bounds)
        - inv_product_cdf(lo, consts) * window_prob_weighted(lo, consts, bounds)
    )
    u_lo, u_hi = 1.0 / hi, 1.0 / lo
    s = 0.5 * (rule.nodes + 1.0)
    u = u_lo + (u_hi - u_lo) * s * s
    jacobian = (u_hi - u_lo) * s / (u * u)
    y = 1.0 / u
    cdf_floor = inv_product_cdf(lo, consts)
    integrand = (cdf_floor - inv_product_cdf(y, consts)) \
        * window_prob_weighted_deriv(y, consts, bounds) * jacobian
    integral = float(np.dot(rule.weights, integrand))
    return edge, integral


def _alone_pieces(consts, bounds, rule):
    """Boundary and quadrature pieces of the relay-alone component."""
    lo = bounds.inv_prod_min
    edge = inv_product_cdf(lo, consts) * window_prob(lo, consts, bounds)
    nodes = _mapped_nodes(0.0, lo, rule)
    integrand = inv_product_cdf(nodes, consts) * window_prob_deriv(nodes, consts, bounds)
    correction = 0.5 * lo * float(np.dot(rule.weights, integrand))
    return edge, correction


def relay_assisted_success_prob(
    consts: DerivedConstants, params: SystemParams, node_count: int = 4
) -> float:
    """Probability that relaying succeeds with the direct copy's help.

    Covers inverse products above inv_prod_min, where the relay boost
    alone stays below the threshold and success also needs a large
    enough direct gain.
    """
    rule = chebyshev_nodes(node_count)
    bounds = integration_bounds(consts, params)
    _, integral = _assisted_pieces(consts, bounds, rule)
    value = direct_success_prob(consts) * integral
    return _clamp_unit(value, "relay_assisted_success_prob")


def relay_alone_success_prob(
    consts: DerivedConstants, params: SystemParams, node_count: int = 4
) -> float:
    """Probability that the relay boost alone rescues the block.

    Covers inverse products up to inv_prod_min, where the boost crosses
    the threshold regardless of the direct gain.
    """
    rule = chebyshev_nodes(node_count)
    bounds = integration_bounds(consts, params)
    edge, correction = _alone_pieces(consts, bounds, rule)
    value = (1.0 - direct_success_prob(consts)) * (edge - correction)
    return _clamp_unit(value, "relay_alone_success_prob")


@dataclass(frozen=True)
class OutageBreakdown:
    """Intermediate values of one quadrature evaluation.

    Attributes:
        direct_success: probability the direct link decodes alone.
        relay_assisted: success probability of the direct-assisted regime.
        relay_alone: success probability of the relay-alone regime.
        boundary_term: combined integration-by-parts boundary value.
        correction: combined quadrature correction subtracted from it.
        weighted_window_at_bounds: weighted window term at the interval
            ends (inv_prod_min, inv_prod_max); zeros when degenerate.
        window_at_bounds: plain window term at the same two points.
        outage: the resulting system outage probability.
    """

    direct_success: float
    relay_assisted: float
    relay_alone: float
    boundary_term: float
    correction: float
    weighted_window_at_bounds: tuple
    window_at_bounds: tuple
    outage: float


def outage_breakdown(params: SystemParams, node_count: int = 4) -> OutageBreakdown:
    """Evaluate the quadrature outage formula, keeping the pieces."""
    consts = derive(params)
    rule = chebyshev_nodes(node_count)
    bounds = integration_bounds(consts, params)
    p_direct = direct_success_prob(consts)

    assisted_edge, assisted_integral = _assisted_pieces(consts, bounds, rule)
    alone_edge, alone_corr = _alone_pieces(consts, bounds, rule)

    assisted = _clamp_unit(p_direct * assisted_integral, "relay_assisted_success_prob")
    alone = _clamp_unit((1.0 - p_direct) * (alone_edge - alone_corr),
                        "relay_alone_success_prob")
    boundary = p_direct * assisted_edge + (1.0 - p_direct) * alone_edge
    correction = p_direct * (assisted_edge - assisted_integral) \
        + (1.0 - p_direct) * alone_corr
    outage = _clamp_unit(1.0 - p_direct - assisted - alone, "outage_quadrature")

    degenerate = not bounds.inv_prod_max > bounds.inv_prod_min
    if degenerate:
        weighted_at_bounds = (0.0, 0.0)
    else:
        weighted_at_bounds = (
            window_prob_weighted(bounds.inv_prod_min, consts, bounds),
            window_prob_weighted(bounds.inv_prod_max, consts, bounds),
        )
    window_at_bounds = (
        window_prob(bounds.inv_prod_min, consts, bounds),
        window_prob(bounds.inv_prod_max, consts, bounds),
    )

    return OutageBreakdown(
        direct_success=p_direct,
        relay_assisted=assisted,
        relay_alone=alone,
        boundary_term=boundary,
        correction=correction,
        weighted_window_at_bounds=weighted_at_bounds,
        window_at_bounds=window_at_bounds,
        outage=outage,
    )


def outage_quadrature(params: SystemParams, node_count: int = 4) -> float:
    """System outage probability under the optimal power split.

    Uses the integration-by-parts form with a node_count-point
    Gauss-Chebyshev rule; node_count = 4 already tracks the Monte Carlo
    estimate closely at the default geometry.
    """
    return outage_breakdown(params, node_count).outage


def outage_high_snr(params: SystemParams) -> float:
    """High-SNR approximation of the optimal-split outage probability.

    Drops the direct-assisted component and freezes the rescue window at
    its limit, leaving closed forms only.
    """
    consts = derive(params)
    bounds = integration_bounds(consts, params)
    direct_fail = -math.expm1(-consts.snr_threshold * consts.rate_direct / consts.snr_tx)
    f_y = inv_product_cdf(bounds.inv_prod_min, consts)
    f_x = gain_sum_cdf(bounds.sum_floor, consts)
    return _clamp_unit(direct_fail * (1.0 - f_y + f_y * f_x), "outage_high_snr")


def outage_direct_only(params: SystemParams) -> float:
    """Outage probability when the relay is ignored entirely."""
    consts = derive(params)
    return -math.expm1(-consts.snr_threshold * consts.rate_direct / consts.snr_tx)


def diversity_slope(
    params: SystemParams,
    p_low_dbm: float,
    p_high_dbm: float,
    outage_fn=None,
) -> float:
    """Log-log slope of an outage curve between two transmit powers.

    Computes -dlog10(p_out) / dlog10(snr_tx) with the given outage
    function (outage_high_snr by default); the slope approaches the
    diversity order as both powers grow.
    """
    if not p_high_dbm > p_low_dbm:
        raise ValueError("p_high_dbm must exceed p_low_dbm")
    if outage_fn is None:
        outage_fn = outage_high_snr
    p_low = outage_fn(replace(params, p_tx=dbm_to_watts(p_low_dbm)))
    p_high = outage_fn(replace(params, p_tx=dbm_to_watts(p_high_dbm)))
    if not (p_low > 0.0 and p_high > 0.0 and math.isfinite(p_low) and math.isfinite(p_high)):
        raise ValueError("outage values must be positive and finite for a log slope")
    decades_snr = (p_high_dbm - p_low_dbm) / 10.0
    return -(math.log10(p_high) - math.log10(p_low)) / decades_snr
