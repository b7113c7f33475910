"""Deterministic chunked Monte Carlo estimation of outage probability.

Draws are generated by a counter-based generator (Philox) keyed on
(base_seed, chunk ordinal), so results are bit-identical for any worker
count and chunked runs can be merged without replaying each other's
streams.  Estimates carry Wilson score intervals, which stay inside
[0, 1] and behave sensibly for rare events.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import CombiningScheme, outage_event, sample_draw
from .params import SystemParams, validate

WILSON_Z = 1.96  # two-sided 95%

WORKERS_ENV_VAR = "EHRELAY_WORKERS"


class MergeError(ValueError):
    """Raised when two estimates cannot be combined."""


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Returns the uninformative (0, 1) when trials is zero.
    """
    if trials < 0 or successes < 0 or successes > trials:
        raise ValueError("need 0 <= successes <= trials")
    if trials == 0:
        return 0.0, 1.0
    p_hat = successes / trials
    z_sq = z * z
    denom = 1.0 + z_sq / trials
    center = (p_hat + z_sq / (2.0 * trials)) / denom
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / trials + z_sq / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class OutageEstimate:
    """Result of a Monte Carlo run (or a merge of runs).

    p_hat is n_outages / n_trials and (ci_low, ci_high) the 95% Wilson
    interval; scheme_label and base_seed identify the lineage.
    """

    p_hat: float
    ci_low: float
    ci_high: float
    n_trials: int
    n_outages: int
    base_seed: int
    scheme_label: str

    @classmethod
    def from_counts(cls, n_outages: int, n_trials: int, base_seed: int,
                    scheme_label: str) -> "OutageEstimate":
        low, high = wilson_interval(n_outages, n_trials)
        p_hat = n_outages / n_trials if n_trials else 0.0
        return cls(
            p_hat=p_hat,
            ci_low=min(low, p_hat),
            ci_high=max(high, p_hat),
            n_trials=n_trials,
            n_outages=n_outages,
            base_seed=base_seed,
            scheme_label=scheme_label,
        )

    @property
    def std_error(self) -> float:
        """Wilson-width standard error, (ci_high - ci_low) / (2 z)."""
        return (self.ci_high - self.ci_low) / (2.0 * WILSON_Z)


def merge(a: OutageEstimate, b: OutageEstimate) -> OutageEstimate:
    """Combine two estimates of the same scheme by summing counts.

    The merged estimate keeps the left operand's base_seed; merging runs
    that shared a seed is only sound when their chunk offsets differ.
    """
    if a.scheme_label != b.scheme_label:
        raise MergeError(
            f"cannot merge estimates of schemes {a.scheme_label!r} and {b.scheme_label!r}"
        )
    return OutageEstimate.from_counts(
        a.n_outages + b.n_outages,
        a.n_trials + b.n_trials,
        a.base_seed,
        a.scheme_label,
    )


@dataclass(frozen=True)
class SimulationPlan:
    """Description of one deterministic Monte Carlo run.

    chunk_size bounds peak memory; chunk_offset shifts the substream
    ordinals so separate plans can cover disjoint chunks of one logical
    run and be merged afterwards.
    """

    params: SystemParams
    scheme: CombiningScheme
    n_trials: int
    base_seed: int
    chunk_size: int = 1_000_000
    chunk_offset: int = 0

    def __post_init__(self):
        validate(self.params)
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be at least 1")
        if self.chunk_offset < 0:
            raise ValueError("chunk_offset must be nonnegative")


def _chunk_rng(base_seed: int, ordinal: int) -> np.random.Generator:
    """Generator for one chunk, keyed so every (seed, ordinal) pair maps
    to an independent Philox substream."""
    key = ((base_seed % (1 << 64)) << 64) | (ordinal % (1 << 64))
    return np.random.Generator(np.random.Philox(key=key))


def _chunk_layout(plan: SimulationPlan) -> list[tuple[int, int]]:
    """(ordinal, trials) pairs covering plan.n_trials."""
    full, rest = divmod(plan.n_trials, plan.chunk_size)
    layout = [(plan.chunk_offset + i, plan.chunk_size) for i in range(full)]
    if rest:
        layout.append((plan.chunk_offset + full, rest))
    return layout


def _run_chunk(plan: SimulationPlan, ordinal: int, trials: int) -> int:
    rng = _chunk_rng(plan.base_seed, ordinal)
    draw = sample_draw(rng, plan.params, size=trials)
    return int(np.count_nonzero(outage_event(draw, plan.params, plan.scheme)))


def default_workers() -> int:
    """Worker count from the environment, defaulting to 1."""
    raw = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        workers = int(raw)
    except ValueError as exc:
        raise ValueError(f"{WORKERS_ENV_VAR} must be an integer, got {raw!r}") from exc
    return max(1, workers)


def estimate_outage(plan: SimulationPlan, workers: int | None = None) -> OutageEstimate:
    """Run the plan and return its outage estimate.

    The outage count depends only on the plan, never on the worker
    count: chunks own disjoint substreams and integer counts are summed.
    """
    if workers is None:
        workers = default_workers()
    layout = _chunk_layout(plan)
    if workers > 1 and len(layout) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda item: _run_chunk(plan, *item), layout))
    else:
        counts = [_run_chunk(plan, ordinal, trials) for ordinal, trials in layout]
    return OutageEstimate.from_counts(
        sum(counts), plan.n_trials, plan.base_seed, plan.scheme.label
    )


_REDUCED_VARIABLES = ("gain_sum", "inv_product", "direct_gain")


def empirical_samples(kind: str, params: SystemParams, n_samples: int, seed: int) -> np.ndarray:
    """Sorted samples of one reduced variable for distribution checks.

    kind is "gain_sum" (sum of terminal-relay gains), "inv_product"
    (inverse of their product), or "direct_gain".
    """
    if kind not in _REDUCED_VARIABLES:
        raise ValueError(f"kind must be one of {_REDUCED_VARIABLES}, got {kind!r}")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    validate(params)
    rng = _chunk_rng(seed, 0)
    draw = sample_draw(rng, params, size=n_samples)
    gain_a = draw.fade_a * params.d_a ** -params.alpha_s
    gain_b = draw.fade_b * params.d_b ** -params.alpha_s
    if kind == "gain_sum":
        values = gain_a + gain_b
    elif kind == "inv_product":
        values = 1.0 / (gain_a * gain_b)
    else:
        values = draw.fade_direct * params.d_t ** -params.alpha_t
    return np.sort(values)


def ks_statistic(sorted_samples: np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov distance between sorted samples and a CDF."""
    n = len(sorted_samples)
    if n == 0:
        raise ValueError("need at least one sample")
    theory = np.asarray(cdf(sorted_samples), dtype=float)
    steps = np.arange(n, dtype=float)
    return float(np.maximum(theory - steps / n, (steps + 1.0) / n - theory).max())
