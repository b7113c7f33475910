"""Acceptance gate: the nine headline properties of the toolkit.

Each test records one "criterion N: PASS/FAIL" line (repeated in the
terminal summary by conftest) and then asserts, so a red criterion shows
both the verdict line and the measured numbers.

Criterion 2 documents a real limitation and is expected to fail: the
high-SNR closed form drops the direct-assisted success component on the
grounds that the integration interval collapses at large transmit power,
but the interval ratio actually grows linearly with power, so the
dropped component stays a roughly constant fraction of the outage.  A
1e8-trial simulation at 30 dBm brackets the quadrature value and
excludes the high-SNR value, so the gap is in the approximation, not in
this implementation.  The full analysis lives in the project notes.
"""

import math
from dataclasses import replace

import numpy as np

from ehrelay.analytic import (
    diversity_slope,
    integration_bounds,
    outage_direct_only,
    outage_high_snr,
    outage_quadrature,
    window_prob,
    window_prob_deriv,
    window_prob_weighted,
    window_prob_weighted_deriv,
)
from ehrelay.channel import (
    CombiningScheme,
    link_gains,
    optimal_split,
    received_power,
    relay_link_snrs,
    sample_draw,
)
from ehrelay.montecarlo import (
    SimulationPlan,
    _chunk_rng,
    empirical_samples,
    estimate_outage,
    ks_statistic,
)
from ehrelay.numerics import bessel_k1, central_difference
from ehrelay.params import dbm_to_watts, derive
from ehrelay.sweep import SweepSpec, emit_csv, run_sweep

RESULTS = []

FIG1_POWERS_DBM = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
FIG2_DISTANCES = tuple(float(d) for d in range(2, 19, 2))


def record(number, passed, detail) -> bool:
    verdict = "PASS" if passed else "FAIL"
    RESULTS.append(f"criterion {number}: {verdict} - {detail}")
    return passed


def at_power(params, dbm):
    return replace(params, p_tx=dbm_to_watts(dbm))


def fig2_point(params, d_a):
    return replace(params, d_a=d_a, d_b=params.d_t - d_a)


def test_criterion_1_quadrature_tracks_simulation(defaults):
    """Four-node quadrature within max(10%, 3 SE) of 1e7-trial estimates."""
    worst = 0.0
    worst_at = None
    compared = 0
    skipped = []
    for dbm in FIG1_POWERS_DBM:
        params = at_power(defaults, dbm)
        plan = SimulationPlan(
            params, CombiningScheme.optimal(),
            n_trials=10_000_000, base_seed=20_260_819 + int(dbm),
        )
        est = estimate_outage(plan, workers=4)
        if est.p_hat < 1e-4:
            skipped.append(dbm)
            continue
        compared += 1
        quad = outage_quadrature(params, 4)
        tolerance = max(0.10 * est.p_hat, 3.0 * est.std_error)
        ratio = abs(quad - est.p_hat) / tolerance
        if ratio > worst:
            worst, worst_at = ratio, dbm
    passed = compared >= 5 and worst <= 1.0
    record(
        1, passed,
        f"{compared} powers compared, worst deviation {worst:.2f} of tolerance "
        f"at {worst_at:g} dBm, skipped {[f'{s:g}' for s in skipped]} (p_hat < 1e-4)",
    )
    assert passed, (
        f"quadrature left the simulation tolerance band: worst ratio {worst:.3f} "
        f"at {worst_at} dBm over {compared} compared powers"
    )


def test_criterion_2_high_snr_form_converges(defaults):
    """High-SNR approximation should approach the quadrature value.

    Expected to fail: the deviation grows with power instead of
    shrinking, because the approximation drops the direct-assisted
    component whose share of the outage does not vanish.  See the module
    docstring.
    """
    powers = (20.0, 25.0, 30.0, 35.0)
    ratios = []
    for dbm in powers:
        params = at_power(defaults, dbm)
        quad = outage_quadrature(params, 4)
        approx = outage_high_snr(params)
        ratios.append(abs(approx - quad) / quad)
    decreasing = all(b < a for a, b in zip(ratios, ratios[1:]))
    at_30 = ratios[powers.index(30.0)]
    passed = decreasing and at_30 <= 0.10
    shown = ", ".join(f"{r:.3f}" for r in ratios)
    record(
        2, passed,
        f"deviation over 20/25/30/35 dBm: {shown} "
        f"(needs decreasing and <= 0.10 at 30 dBm)",
    )
    assert passed, (
        "high-SNR form does not converge to the quadrature value: deviations "
        f"[{shown}] grow with power and reach {at_30:.3f} at 30 dBm. The form "
        "drops the direct-assisted success component assuming the integration "
        "interval collapses at high power, but the interval ratio grows "
        "linearly with transmit power and the dropped component stays a "
        "constant fraction of the outage (about 43% at 30 dBm). A 1e8-trial "
        "matched simulation at 30 dBm gave a 95% interval [3.62e-6, 4.40e-6], "
        "which contains the quadrature value 3.83e-6 and puts the high-SNR "
        "value 6.68e-6 about 11 standard errors out, so the quadrature path "
        "is the accurate one and this bound is not attainable as stated."
    )


def test_criterion_3_diversity_order(defaults):
    """Log-log outage slope near 2 with the relay, near 1 without it."""
    relayed = diversity_slope(defaults, 40.0, 50.0)
    direct = diversity_slope(defaults, 40.0, 50.0, outage_fn=outage_direct_only)
    passed = 1.8 <= relayed <= 2.2 and 0.9 <= direct <= 1.1
    record(
        3, passed,
        f"relayed slope {relayed:.4f} (needs [1.8, 2.2]), "
        f"direct-only slope {direct:.4f} (needs [0.9, 1.1])",
    )
    assert passed


def test_criterion_4_optimal_split_dominates_fixed(defaults):
    """Matched-seed outage counts: optimal <= every fixed split, exactly."""
    n = 200_000
    violations = []
    margin = None
    for d_a in FIG2_DISTANCES:
        params = fig2_point(defaults, d_a)
        seed = 91_000 + int(d_a)
        count = {}
        for scheme in (
            CombiningScheme.optimal(),
            CombiningScheme.fixed(0.3),
            CombiningScheme.fixed(0.5),
            CombiningScheme.fixed(0.7),
        ):
            plan = SimulationPlan(params, scheme, n_trials=n, base_seed=seed)
            count[scheme.label] = estimate_outage(plan).n_outages
        for theta in ("fixed:0.3", "fixed:0.5", "fixed:0.7"):
            gap = count[theta] - count["optimal"]
            if gap < 0:
                violations.append((d_a, theta, gap))
            margin = gap if margin is None else min(margin, gap)
    passed = not violations
    record(
        4, passed,
        f"{len(FIG2_DISTANCES)} placements x 3 fixed splits at {n} matched "
        f"trials, smallest count margin {margin}"
        + (f", violations {violations}" if violations else ""),
    )
    assert passed, f"fixed splits beat the optimal split at: {violations}"


def test_criterion_5_worst_placement_is_midway(defaults):
    """The outage-vs-placement curve peaks strictly inside the grid."""
    values = [
        outage_quadrature(fig2_point(defaults, d_a), 4) for d_a in FIG2_DISTANCES
    ]
    peak = int(np.argmax(values))
    mid = FIG2_DISTANCES.index(10.0)
    interior = 0 < peak < len(values) - 1
    passed = interior and values[mid] > values[0] and values[mid] > values[-1]
    record(
        5, passed,
        f"peak at d_a={FIG2_DISTANCES[peak]:g} with outage {values[peak]:.6g}; "
        f"midpoint {values[mid]:.6g} vs ends {values[0]:.6g}, {values[-1]:.6g}",
    )
    assert passed


def test_criterion_6_sampled_distributions_match_the_formulas(defaults, consts_10dbm):
    """KS distance of 1e6 samples to each reduced-variable CDF <= 0.005."""
    from ehrelay.analytic import direct_gain_cdf, gain_sum_cdf, inv_product_cdf

    n = 1_000_000
    pairs = (
        ("gain_sum", lambda v: gain_sum_cdf(v, consts_10dbm)),
        ("inv_product", lambda v: inv_product_cdf(v, consts_10dbm)),
        ("direct_gain", lambda v: direct_gain_cdf(v, consts_10dbm)),
    )
    distances = {}
    for kind, cdf in pairs:
        samples = empirical_samples(kind, defaults, n, seed=60_601)
        distances[kind] = ks_statistic(samples, cdf)
    passed = all(d <= 0.005 for d in distances.values())
    shown = ", ".join(f"{k}={v:.5f}" for k, v in distances.items())
    record(6, passed, f"KS at 1e6 samples: {shown} (each needs <= 0.005)")
    assert passed, distances


def test_criterion_7_split_maximizes_the_weaker_snr(defaults):
    """Closed-form split equals a grid argmax and equalizes the two SNRs."""
    n = 10_000
    draw = sample_draw(_chunk_rng(70_707, 0), defaults, size=n)
    gains = link_gains(draw, defaults)
    powered = received_power(gains, defaults) >= defaults.p_th
    assert int(np.count_nonzero(powered)) > 9_000

    # The relay power scales both broadcast SNRs identically, so the grid
    # metric can drop it without moving the argmax.
    theta = np.linspace(5e-4, 1.0 - 5e-4, 2000)
    norm = theta**2 + (1.0 - theta) ** 2
    f_a = (1.0 - theta) ** 2 / norm
    f_b = theta**2 / norm
    gain_a = np.asarray(gains.gain_a)[powered]
    gain_b = np.asarray(gains.gain_b)[powered]
    split = np.asarray(optimal_split(draw, defaults))
    star = split[powered]
    worst_gap = 0.0
    for start in range(0, len(gain_a), 500):
        stop = start + 500
        metric = np.minimum(
            gain_a[start:stop, None] * f_a[None, :],
            gain_b[start:stop, None] * f_b[None, :],
        )
        best = theta[np.argmax(metric, axis=1)]
        worst_gap = max(worst_gap, float(np.max(np.abs(best - star[start:stop]))))

    snr_a, snr_b = relay_link_snrs(draw, defaults, split)
    snr_a, snr_b = np.asarray(snr_a)[powered], np.asarray(snr_b)[powered]
    imbalance = float(np.max(np.abs(snr_a - snr_b) / np.maximum(snr_a, snr_b)))

    passed = worst_gap <= 1e-3 and imbalance <= 1e-12
    record(
        7, passed,
        f"worst |split - grid argmax| {worst_gap:.2e} (needs <= 1e-3), "
        f"worst SNR imbalance {imbalance:.2e} (needs <= 1e-12) "
        f"over {len(gain_a)} powered draws",
    )
    assert passed


def test_criterion_8_numerical_kernels(defaults, params_10dbm, consts_10dbm,
                                       bounds_10dbm, k1_table):
    """Bessel oracle, window derivatives, and quadrature refinement."""
    x, expected = k1_table
    k1_err = float(np.max(np.abs(bessel_k1(x) - expected) / expected))

    lo, hi = bounds_10dbm.inv_prod_min, bounds_10dbm.inv_prod_max
    deriv_err = 0.0
    for fn, deriv, y_floor in (
        # The plain window is flat in double precision below y ~ 1e9 (its
        # upper edge sits in the saturated tail of the gain-sum CDF), so a
        # central difference there reads exactly zero; compare only where
        # the finite-difference oracle resolves the derivative.
        (window_prob, window_prob_deriv, 1e9),
        (window_prob_weighted, window_prob_weighted_deriv, None),
    ):
        low = lo if y_floor is None else max(lo, y_floor)
        points = np.logspace(math.log10(low) + 0.05, math.log10(hi) - 0.05, 20)
        for y in points:
            numeric = central_difference(
                lambda t: fn(t, consts_10dbm, bounds_10dbm), float(y),
                h=float(y) * 1e-5,
            )
            analytic = deriv(float(y), consts_10dbm, bounds_10dbm)
            scale = max(abs(numeric), abs(analytic), 1e-300)
            deriv_err = max(deriv_err, abs(analytic - numeric) / scale)

    refine_err = 0.0
    for dbm in FIG1_POWERS_DBM:
        params = at_power(defaults, dbm)
        coarse = outage_quadrature(params, 8)
        fine = outage_quadrature(params, 64)
        refine_err = max(refine_err, abs(coarse - fine) / fine)

    passed = k1_err <= 1e-10 and deriv_err <= 1e-6 and refine_err <= 0.01
    record(
        8, passed,
        f"bessel table error {k1_err:.2e} (<= 1e-10), window derivative error "
        f"{deriv_err:.2e} (<= 1e-6), 8-vs-64-node gap {refine_err:.2e} (<= 0.01)",
    )
    assert passed


def test_criterion_9_runs_are_reproducible(defaults, tmp_path):
    """Worker count never changes counts; sweeps re-emit identical bytes."""
    plan = SimulationPlan(
        defaults, CombiningScheme.optimal(),
        n_trials=400_000, base_seed=424_242, chunk_size=100_000,
    )
    sequential = estimate_outage(plan, workers=1)
    parallel = estimate_outage(plan, workers=4)
    counts_match = sequential.n_outages == parallel.n_outages

    spec = SweepSpec(
        grid=(0.0, 10.0),
        schemes=(CombiningScheme.optimal(), CombiningScheme.direct_only()),
        engines=("quadrature", "montecarlo"),
        mc_trials=20_000,
    )
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    emit_csv(run_sweep(defaults, spec), first)
    emit_csv(run_sweep(defaults, spec), second)
    bytes_match = first.read_bytes() == second.read_bytes()

    passed = counts_match and bytes_match
    record(
        9, passed,
        f"4-chunk parallel count {parallel.n_outages} vs sequential "
        f"{sequential.n_outages}; sweep CSV byte-identical: {bytes_match}",
    )
    assert passed
