"""Config-driven parameter sweeps over the analytic and Monte Carlo engines.

A sweep config is a plain key = value file; unspecified keys fall back to
the defaults in params.DEFAULT_PARAMS and SweepSpec.  Engines:

    quadrature   full integration-by-parts formula (optimal split; the
                 direct-only scheme gets its exact closed form)
    high_snr     closed-form high-SNR approximation (optimal split only)
    montecarlo   simulation, applicable to every scheme

Rows keep grid order, then config scheme order, then config engine order,
so identical configs produce byte-identical CSV files.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .analytic import outage_direct_only, outage_high_snr, outage_quadrature
from .channel import CombiningScheme
from .montecarlo import WILSON_Z, SimulationPlan, default_workers, estimate_outage
from .params import (
    DEFAULT_PARAMS,
    ParameterError,
    SystemParams,
    dbm_to_watts,
    validate,
)

ENGINES = ("quadrature", "high_snr", "montecarlo")
SWEEP_VARIABLES = ("p_tx_dbm", "d_a", "beta", "rate", "m_count")
COUPLINGS = ("none", "d_b_complement")

CSV_HEADER = "variable,value,scheme,engine,p_out,ci_low,ci_high,n_trials,m_count"

# Agreement thresholds for compare_report: a quadrature value passes when
# it is within 10% of the Monte Carlo estimate or within 3 Wilson
# standard errors; estimates below MIN_COMPARABLE are skipped as beyond
# the simulation's resolution.
REL_TOLERANCE = 0.10
SE_TOLERANCE = 3.0
MIN_COMPARABLE = 1e-4


class ConfigError(ValueError):
    """Config file problem, carrying the offending line and key."""

    def __init__(self, line_no, key, message):
        self.line_no = line_no
        self.key = key
        where = f"line {line_no}" if line_no else "config"
        what = f"{key}: " if key else ""
        super().__init__(f"{where}: {what}{message}")


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep and how to evaluate each point."""

    variable: str = "p_tx_dbm"
    grid: tuple = tuple(float(v) for v in range(0, 31, 2))
    schemes: tuple = (CombiningScheme.optimal(), CombiningScheme.direct_only())
    engines: tuple = ("quadrature", "montecarlo")
    mc_trials: int = 100_000
    base_seed: int = 20260819
    node_count: int = 4
    coupling: str = "none"

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"variable must be one of {SWEEP_VARIABLES}")
        if not self.grid:
            raise ValueError("grid must be nonempty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid values must be strictly increasing")
        if not self.schemes:
            raise ValueError("schemes must be nonempty")
        unknown = [e for e in self.engines if e not in ENGINES]
        if unknown or not self.engines:
            raise ValueError(f"engines must be a nonempty subset of {ENGINES}")
        if "montecarlo" in self.engines and self.mc_trials < 1:
            raise ValueError("mc_trials must be at least 1")
        if self.node_count < 1:
            raise ValueError("m_count must be at least 1")
        if self.coupling not in COUPLINGS:
            raise ValueError(f"coupling must be one of {COUPLINGS}")


@dataclass(frozen=True)
class SweepRow:
    """One evaluated (grid value, scheme, engine) combination.

    ci_low/ci_high/n_trials are None for analytic engines; m_count is
    set only where a quadrature rule was actually used.
    """

    variable: str
    value: float
    scheme: str
    engine: str
    p_out: float
    ci_low: float | None = None
    ci_high: float | None = None
    n_trials: int | None = None
    m_count: int | None = None


# Config keys holding dBm values, mapped to their SystemParams field.
_DBM_KEYS = {
    "p_tx_dbm": "p_tx",
    "noise_dbm": "noise_power",
    "p_th_dbm": "p_th",
}

# Plain numeric keys: field name, validator, constraint description.
_FLOAT_KEYS = {
    "eta": (lambda v: 0.0 < v <= 1.0, "out of (0, 1]"),
    "beta": (lambda v: 0.0 < v < 1.0, "out of (0, 1)"),
    "rate": (lambda v: v > 0.0, "must be positive"),
    "d_a": (lambda v: v > 0.0, "must be positive"),
    "d_b": (lambda v: v > 0.0, "must be positive"),
    "d_t": (lambda v: v > 0.0, "must be positive"),
    "alpha_s": (lambda v: v > 0.0, "must be positive"),
    "alpha_t": (lambda v: v > 0.0, "must be positive"),
    "lambda_a": (lambda v: v > 0.0, "must be positive"),
    "lambda_b": (lambda v: v > 0.0, "must be positive"),
    "lambda_t": (lambda v: v > 0.0, "must be positive"),
}

_INT_SWEEP_KEYS = {
    "sweep.mc_trials": "mc_trials",
    "sweep.seed": "base_seed",
    "sweep.m_count": "node_count",
}


def _parse_float(line_no, key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(line_no, key, f"expected a number, got {text!r}") from None


def _parse_int(line_no, key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(line_no, key, f"expected an integer, got {text!r}") from None


def parse_config(path) -> tuple[SystemParams, SweepSpec]:
    """Parse a key = value config file.

    Lines are `key = value`; blank lines and text after `#` are ignored.
    Every key is optional and defaults to the built-in configuration; an
    empty file yields DEFAULT_PARAMS and the default SweepSpec.
    """
    param_kwargs = {}
    sweep_kwargs = {}
    seen = set()

    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(line_no, None, f"expected key = value, got {line!r}")
            key, _, text = line.partition("=")
            key, text = key.strip(), text.strip()
            if key in seen:
                raise ConfigError(line_no, key, "duplicate key")
            seen.add(key)
            if not text:
                raise ConfigError(line_no, key, "missing value")

            if key in _DBM_KEYS:
                param_kwargs[_DBM_KEYS[key]] = dbm_to_watts(_parse_float(line_no, key, text))
            elif key in _FLOAT_KEYS:
                value = _parse_float(line_no, key, text)
                ok, constraint = _FLOAT_KEYS[key]
                if not ok(value):
                    raise ConfigError(line_no, key, constraint)
                param_kwargs[key] = value
            elif key == "sweep.variable":
                if text not in SWEEP_VARIABLES:
                    raise ConfigError(line_no, key, f"must be one of {SWEEP_VARIABLES}")
                sweep_kwargs["variable"] = text
            elif key == "sweep.grid":
                grid = tuple(
                    _parse_float(line_no, key, part.strip()) for part in text.split(",")
                )
                sweep_kwargs["grid"] = grid
            elif key == "sweep.schemes":
                try:
                    schemes = tuple(
                        CombiningScheme.parse(part.strip()) for part in text.split(",")
                    )
                except ValueError as exc:
                    raise ConfigError(line_no, key, str(exc)) from None
                sweep_kwargs["schemes"] = schemes
            elif key == "sweep.engines":
                engines = tuple(part.strip() for part in text.split(","))
                sweep_kwargs["engines"] = engines
            elif key in _INT_SWEEP_KEYS:
                sweep_kwargs[_INT_SWEEP_KEYS[key]] = _parse_int(line_no, key, text)
            elif key == "sweep.coupling":
                sweep_kwargs["coupling"] = text
            else:
                raise ConfigError(line_no, key, "unknown key")

    params = replace(DEFAULT_PARAMS, **param_kwargs)
    validate(params)
    try:
        spec = SweepSpec(**sweep_kwargs)
    except ValueError as exc:
        raise ConfigError(None, None, str(exc)) from None
    return params, spec


def _point_params(params: SystemParams, spec: SweepSpec, value: float) -> SystemParams:
    """Parameter set at one grid value, applying the coupling rule."""
    if spec.variable == "p_tx_dbm":
        point = replace(params, p_tx=dbm_to_watts(value))
    elif spec.variable == "d_a":
        kwargs = {"d_a": value}
        if spec.coupling == "d_b_complement":
            kwargs["d_b"] = params.d_t - value
        point = replace(params, **kwargs)
    elif spec.variable == "beta":
        point = replace(params, beta=value)
    elif spec.variable == "rate":
        point = replace(params, rate=value)
    else:  # m_count: the physical point is unchanged
        point = params
    validate(point)
    return point


def _point_node_count(spec: SweepSpec, value: float) -> int:
    if spec.variable != "m_count":
        return spec.node_count
    count = int(value)
    if count != value or count < 1:
        raise ParameterError("m_count grid values must be positive integers")
    return count


def _evaluate_point(params, spec, value, mc_workers) -> list[SweepRow]:
    point = _point_params(params, spec, value)
    node_count = _point_node_count(spec, value)
    rows = []
    for scheme in spec.schemes:
        for engine in spec.engines:
            if engine == "quadrature":
                if scheme.kind == "optimal":
                    rows.append(SweepRow(
                        variable=spec.variable, value=value, scheme=scheme.label,
                        engine=engine, p_out=outage_quadrature(point, node_count),
                        m_count=node_count,
                    ))
                elif scheme.kind == "direct_only":
                    rows.append(SweepRow(
                        variable=spec.variable, value=value, scheme=scheme.label,
                        engine=engine, p_out=outage_direct_only(point),
                    ))
                # other schemes have no closed form; skip the pair
            elif engine == "high_snr":
                if scheme.kind == "optimal":
                    rows.append(SweepRow(
                        variable=spec.variable, value=value, scheme=scheme.label,
                        engine=engine, p_out=outage_high_snr(point),
                    ))
            else:
                plan = SimulationPlan(
                    params=point, scheme=scheme, n_trials=spec.mc_trials,
                    base_seed=spec.base_seed,
                )
                est = estimate_outage(plan, workers=mc_workers)
                rows.append(SweepRow(
                    variable=spec.variable, value=value, scheme=scheme.label,
                    engine=engine, p_out=est.p_hat, ci_low=est.ci_low,
                    ci_high=est.ci_high, n_trials=est.n_trials,
                ))
    return rows


def run_sweep(params: SystemParams, spec: SweepSpec, workers: int | None = None) -> list[SweepRow]:
    """Evaluate the whole sweep, deterministically.

    Grid points are independent, so they are evaluated concurrently when
    workers > 1 and gathered back in grid order; the Monte Carlo engine
    then runs single-threaded inside each point.  Every Monte Carlo
    point reuses base_seed, which makes scheme comparisons at one point
    matched-draw comparisons.
    """
    validate(params)
    if workers is None:
        workers = default_workers()
    values = list(spec.grid)
    if workers > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_point = list(pool.map(
                lambda v: _evaluate_point(params, spec, v, 1), values
            ))
    else:
        per_point = [_evaluate_point(params, spec, v, workers) for v in values]
    return [row for rows in per_point for row in rows]


def _format_field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def emit_csv(rows: list[SweepRow], path) -> None:
    """Write rows as CSV with 12 significant digits per numeric field."""
    if not rows:
        raise ValueError("rows must be nonempty")
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fields = (
                row.variable,
                _format_field(float(row.value)),
                row.scheme,
                row.engine,
                _format_field(float(row.p_out)),
                _format_field(row.ci_low),
                _format_field(row.ci_high),
                _format_field(row.n_trials),
                _format_field(row.m_count),
            )
            fh.write(",".join(fields) + "\n")


def compare_report(rows: list[SweepRow]) -> str:
    """Compare quadrature rows against Monte Carlo rows point by point.

    Pairs rows sharing (value, scheme).  A pair passes when the
    quadrature value is within REL_TOLERANCE of the estimate or within
    SE_TOLERANCE Wilson standard errors; estimates below MIN_COMPARABLE
    are reported but skipped.  The last line is "OVERALL PASS" or
    "OVERALL FAIL".
    """
    analytic = {}
    simulated = {}
    for row in rows:
        key = (row.value, row.scheme)
        if row.engine == "quadrature":
            analytic[key] = row
        elif row.engine == "montecarlo":
            simulated[key] = row

    shared = [key for key in analytic if key in simulated]
    if not shared:
        raise ValueError("no comparable quadrature/montecarlo pairs in rows")

    lines = []
    failures = 0
    comparisons = 0
    for key in sorted(shared):
        a_row, m_row = analytic[key], simulated[key]
        value, scheme = key
        point = f"{a_row.variable}={value:g} scheme={scheme}"
        p_mc = m_row.p_out
        se = (m_row.ci_high - m_row.ci_low) / (2.0 * WILSON_Z)
        if p_mc < MIN_COMPARABLE:
            lines.append(f"{point}: montecarlo={p_mc:.6g} below {MIN_COMPARABLE:g}, SKIP")
            continue
        comparisons += 1
        gap = abs(a_row.p_out - p_mc)
        rel = gap / p_mc
        se_mult = gap / se if se > 0.0 else float("inf")
        ok = rel <= REL_TOLERANCE or se_mult <= SE_TOLERANCE
        failures += 0 if ok else 1
        lines.append(
            f"{point}: quadrature={a_row.p_out:.6g} montecarlo={p_mc:.6g} "
            f"rel_gap={rel:.4f} se_mult={se_mult:.2f} {'PASS' if ok else 'FAIL'}"
        )
    lines.append(
        f"{comparisons - failures}/{comparisons} comparisons passed, "
        f"{len(shared) - comparisons} skipped"
    )
    lines.append("OVERALL PASS" if failures == 0 else "OVERALL FAIL")
    return "\n".join(lines)
