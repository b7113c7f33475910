"""Outage analysis toolkit for a time-switching SWIPT two-way DF relay network.

The package pairs two independent evaluation routes for the system outage
probability: a quadrature-based analytic pipeline and a deterministic
Monte Carlo engine, plus a sweep CLI that writes CSV tables and figures.
"""

from .analytic import (
    FormulaRangeError,
    IntegrationBounds,
    OutageBreakdown,
    clamp_event_count,
    direct_gain_cdf,
    direct_success_prob,
    diversity_slope,
    gain_sum_cdf,
    gain_sum_pdf,
    integration_bounds,
    inv_product_cdf,
    outage_breakdown,
    outage_direct_only,
    outage_high_snr,
    outage_quadrature,
    relay_alone_success_prob,
    relay_assisted_success_prob,
    reset_clamp_events,
    window_prob,
    window_prob_deriv,
    window_prob_weighted,
    window_prob_weighted_deriv,
)
from .channel import (
    ChannelDraw,
    CombiningScheme,
    LinkGains,
    LinkSnrs,
    end_to_end_snrs,
    first_hop_snrs,
    harvested_energy,
    link_gains,
    link_snrs,
    optimal_split,
    outage_event,
    received_power,
    relay_link_snrs,
    relay_power,
    sample_draw,
)
from .montecarlo import (
    MergeError,
    OutageEstimate,
    SimulationPlan,
    empirical_samples,
    estimate_outage,
    ks_statistic,
    merge,
    wilson_interval,
)
from .numerics import (
    QuadratureNodes,
    bessel_k1,
    central_difference,
    chebyshev_nodes,
    x_times_k1,
)
from .params import (
    DEFAULT_PARAMS,
    DerivedConstants,
    ParameterError,
    SystemParams,
    dbm_to_watts,
    derive,
    validate,
    watts_to_dbm,
)
from .sweep import (
    ConfigError,
    SweepRow,
    SweepSpec,
    compare_report,
    emit_csv,
    parse_config,
    run_sweep,
)

__version__ = "0.1.0"
