"""Per-draw channel model: fading, harvesting, link SNRs, outage events.

Every function here accepts either scalar draws or equal-shaped arrays of
draws, so the Monte Carlo engine evaluates the exact same expressions the
unit tests probe one draw at a time.

Protocol recap: each block of length T splits into an energy-harvesting
interval beta*T and three equal information sub-slots.  Terminal A
transmits in the first sub-slot, terminal B in the second, and the relay
broadcasts in the third using only the energy harvested in this block.
Each terminal combines the relayed copy with the direct copy it overheard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import SystemParams, derive


@dataclass(frozen=True)
class ChannelDraw:
    """Squared fading envelopes for one coherence block (or arrays of them)."""

    fade_a: object
    fade_b: object
    fade_direct: object


@dataclass(frozen=True)
class LinkGains:
    """Path gains after distance loss: fade * d**(-alpha)."""

    gain_a: object
    gain_b: object
    gain_direct: object


@dataclass(frozen=True)
class LinkSnrs:
    """Every SNR in one block, plus the relay power chain that shaped them."""

    snr_a_relay: object      # terminal A's signal at the relay
    snr_b_relay: object      # terminal B's signal at the relay
    snr_direct: object       # overheard terminal-to-terminal copy
    snr_relay_a: object      # relay broadcast received at A
    snr_relay_b: object      # relay broadcast received at B
    snr_a: object            # post-combining SNR at A
    snr_b: object            # post-combining SNR at B
    p_in: object             # power reaching the harvester
    p_relay: object          # relay transmit power


class CombiningScheme:
    """How a terminal's receiver and the relay's power split are configured.

    kind is one of:
        "optimal":     relay splits power to equalize both broadcast SNRs,
                       terminals combine relayed and direct copies.
        "fixed":       relay uses the given split, terminals combine.
        "relay_only":  combining disabled, only the relayed copy counts.
        "direct_only": the relay is ignored entirely.
    """

    _KINDS = ("optimal", "fixed", "relay_only", "direct_only")

    def __init__(self, kind: str, split: float | None = None):
        if kind not in self._KINDS:
            raise ValueError(f"unknown scheme kind {kind!r}")
        if kind == "fixed":
            if split is None or not 0.0 < split < 1.0:
                raise ValueError("fixed scheme needs a split in (0, 1)")
        elif split is not None:
            raise ValueError(f"scheme {kind!r} takes no split")
        self.kind = kind
        self.split = split

    @classmethod
    def optimal(cls) -> "CombiningScheme":
        return cls("optimal")

    @classmethod
    def fixed(cls, split: float) -> "CombiningScheme":
        return cls("fixed", split)

    @classmethod
    def relay_only(cls) -> "CombiningScheme":
        return cls("relay_only")

    @classmethod
    def direct_only(cls) -> "CombiningScheme":
        return cls("direct_only")

    @classmethod
    def parse(cls, label: str) -> "CombiningScheme":
        """Parse a scheme label such as "optimal" or "fixed:0.3"."""
        name, _, arg = label.partition(":")
        name = name.strip()
        if name == "fixed":
            if not arg:
                raise ValueError("fixed scheme label needs a value, e.g. fixed:0.3")
            return cls.fixed(float(arg))
        if arg:
            raise ValueError(f"scheme {name!r} takes no argument")
        return cls(name)

    @property
    def label(self) -> str:
        if self.kind == "fixed":
            return f"fixed:{self.split:g}"
        return self.kind

    def __eq__(self, other):
        return (
            isinstance(other, CombiningScheme)
            and self.kind == other.kind
            and self.split == other.split
        )

    def __hash__(self):
        return hash((self.kind, self.split))

    def __repr__(self):
        return f"CombiningScheme({self.label!r})"


def sample_draw(rng: np.random.Generator, params: SystemParams, size=None) -> ChannelDraw:
    """Draw squared fading envelopes by inverse transform.

    Uses -mean * log1p(-u) on uniforms so the mapping from generator
    output to draw is explicit and stable across numpy versions.  The
    field order fade_a, fade_b, fade_direct is part of the stream
    contract; changing it changes every seeded result.
    """
    def exponential(mean):
        return -mean * np.log1p(-rng.random(size))

    return ChannelDraw(
        fade_a=exponential(params.lambda_a),
        fade_b=exponential(params.lambda_b),
        fade_direct=exponential(params.lambda_t),
    )


def link_gains(draw: ChannelDraw, params: SystemParams) -> LinkGains:
    """Apply distance loss to the fading envelopes."""
    return LinkGains(
        gain_a=draw.fade_a * params.d_a ** -params.alpha_s,
        gain_b=draw.fade_b * params.d_b ** -params.alpha_s,
        gain_direct=draw.fade_direct * params.d_t ** -params.alpha_t,
    )


def received_power(gains: LinkGains, params: SystemParams):
    """Power reaching the harvester while both terminals transmit."""
    return params.p_tx * (gains.gain_a + gains.gain_b)


def harvested_energy(p_in, params: SystemParams):
    """Energy stored during the harvesting interval.

    The harvester circuit needs at least p_th to activate; exactly p_th
    still harvests.
    """
    energy = params.beta * params.block_time * params.eta * np.asarray(p_in, dtype=float)
    out = np.where(np.asarray(p_in) >= params.p_th, energy, 0.0)
    return float(out) if np.ndim(p_in) == 0 else out


def relay_power(energy, params: SystemParams):
    """Relay transmit power: the stored energy spent in one of the three
    equal information sub-slots of length (1 - beta) * T / 3."""
    return 3.0 * energy / ((1.0 - params.beta) * params.block_time)


def optimal_split(draw: ChannelDraw, params: SystemParams):
    """Power split that equalizes the two relay broadcast SNRs.

    Equals sqrt(gain_a) / (sqrt(gain_a) + sqrt(gain_b)); when both gains
    are zero any split is optimal and 0.5 is returned.
    """
    gains = link_gains(draw, params)
    root_a = np.sqrt(gains.gain_a)
    root_b = np.sqrt(gains.gain_b)
    denom = root_a + root_b
    safe = np.where(denom > 0.0, denom, 1.0)
    split = np.where(denom > 0.0, root_a / safe, 0.5)
    return float(split) if np.ndim(denom) == 0 else split


def first_hop_snrs(draw: ChannelDraw, params: SystemParams):
    """SNRs of the two uplink copies at the relay and of the direct copy."""
    gains = link_gains(draw, params)
    snr_tx = params.p_tx / params.noise_power
    return (
        snr_tx * gains.gain_a,
        snr_tx * gains.gain_b,
        snr_tx * gains.gain_direct,
    )


def relay_link_snrs(draw: ChannelDraw, params: SystemParams, split):
    """SNRs of the relay broadcast at terminals A and B.

    The relay assigns fraction (1 - split) of its amplitude to the symbol
    destined for A and split to the one for B; each receiver cancels its
    own symbol, and the power normalization split**2 + (1 - split)**2
    stays in the denominator.  Below the harvester sensitivity the relay
    stays silent and both SNRs are zero.
    """
    gains = link_gains(draw, params)
    p_in = received_power(gains, params)
    p_r = relay_power(harvested_energy(p_in, params), params)
    norm = split**2 + (1.0 - split) ** 2
    scale = p_r / (norm * params.noise_power)
    return (
        scale * (1.0 - split) ** 2 * gains.gain_a,
        scale * split**2 * gains.gain_b,
    )


def end_to_end_snrs(first_hop, relay_link, params: SystemParams):
    """Post-combining SNRs at the terminals.

    The relayed copy carries a terminal's partner message only when the
    relay decoded that partner's uplink, so the direct copy is added on
    top of the broadcast SNR exactly in that case.
    """
    snr_a_relay, snr_b_relay, snr_direct = first_hop
    snr_relay_a, snr_relay_b = relay_link
    threshold = derive(params).snr_threshold
    snr_a = snr_relay_a + snr_direct * (snr_b_relay >= threshold)
    snr_b = snr_relay_b + snr_direct * (snr_a_relay >= threshold)
    return snr_a, snr_b


def link_snrs(draw: ChannelDraw, params: SystemParams, split) -> LinkSnrs:
    """Assemble every SNR of one block under a given relay power split."""
    gains = link_gains(draw, params)
    p_in = received_power(gains, params)
    p_r = relay_power(harvested_energy(p_in, params), params)
    first = first_hop_snrs(draw, params)
    relay = relay_link_snrs(draw, params, split)
    snr_a, snr_b = end_to_end_snrs(first, relay, params)
    return LinkSnrs(
        snr_a_relay=first[0],
        snr_b_relay=first[1],
        snr_direct=first[2],
        snr_relay_a=relay[0],
        snr_relay_b=relay[1],
        snr_a=snr_a,
        snr_b=snr_b,
        p_in=p_in,
        p_relay=p_r,
    )


def outage_event(draw: ChannelDraw, params: SystemParams, scheme: CombiningScheme):
    """Whether the system is in outage for this draw under the scheme.

    The system succeeds when the direct link alone decodes, or when the
    relay decodes both uplinks, was able to harvest, and both terminals
    decode after combining.  relay_only drops the direct contribution
    everywhere; direct_only ignores the relay.
    """
    threshold = derive(params).snr_threshold
    snr_a_relay, snr_b_relay, snr_direct = first_hop_snrs(draw, params)
    direct_ok = snr_direct >= threshold

    if scheme.kind == "direct_only":
        outage = np.logical_not(direct_ok)
        return bool(outage) if np.ndim(outage) == 0 else outage

    if scheme.kind == "fixed":
        split = scheme.split
    else:
        split = optimal_split(draw, params)

    gains = link_gains(draw, params)
    p_in = received_power(gains, params)
    powered = p_in >= params.p_th
    relay_decodes = (snr_a_relay >= threshold) & (snr_b_relay >= threshold)
    snr_relay_a, snr_relay_b = relay_link_snrs(draw, params, split)

    if scheme.kind == "relay_only":
        relayed_ok = (snr_relay_a >= threshold) & (snr_relay_b >= threshold)
        success = powered & relay_decodes & relayed_ok
    else:
        snr_a, snr_b = end_to_end_snrs(
            (snr_a_relay, snr_b_relay, snr_direct),
            (snr_relay_a, snr_relay_b),
            params,
        )
        combined_ok = (snr_a >= threshold) & (snr_b >= threshold)
        success = direct_ok | (powered & relay_decodes & combined_ok)

    # logical_not, not ~: on plain python bools ~ is the integer complement
    outage = np.logical_not(success)
    return bool(outage) if np.ndim(outage) == 0 else outage
