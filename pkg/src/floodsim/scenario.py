"""Scenario files: a line-oriented ``section.key = value`` format.

Example::

    # background traffic
    benign.period_s = 0.01
    benign.num_sources = 2
    flood.1.start_s = 20
    flood.1.duration_s = 60
    flood.1.rate_pps = 6667
    sqf.D_ms = 3.0
    aam.m_mode = optimal
    run.seed = 7
    run.horizon_s = 120

Unknown keys, bad types and out-of-range values raise ScenarioError with the
offending line number (a configuration error, exit code 2 in the CLI);
scenarios whose horizon does not cover every flood violate a run invariant
(exit code 3). Floods are optional and numbered from 1; the whole benign
section may be omitted for flood-only scenarios.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .detector import DetectorModel
from .model import ConfigError, InvariantViolation, RngStream, ServiceTimeModel, Trace, substream
from .traffic import BenignSpec, FloodSpec, gen_benign, gen_flood, merge


class ScenarioError(ConfigError):
    """Scenario file problem, with a line number when it comes from parsing."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


@dataclass
class Scenario:
    benign: BenignSpec | None = field(default_factory=lambda: BenignSpec(period_s=0.01))
    floods: list = field(default_factory=list)
    service: ServiceTimeModel = field(default_factory=ServiceTimeModel)
    detector: DetectorModel = field(default_factory=DetectorModel)
    sqf_enabled: bool = True
    pacing_gap_s: float = 3.0e-3
    link_latency_s: float = 0.0
    aam_enabled: bool = True
    skip_mode: str = "optimal"      # "optimal" | "fixed"
    fixed_skip: int = 100
    alpha: float = 1.0
    beta: float = 0.05
    tau_s: float = 3.0e-3
    seed: int = 1
    horizon_s: float = 10.0
    sample_dt_s: float = 0.1
    drain_slowdown: float = 1.0

    def validate(self) -> None:
        if self.pacing_gap_s <= 0:
            raise ConfigError("sqf.D_ms must be positive")
        if self.link_latency_s < 0:
            raise ConfigError("sqf.link_latency_ms must be >= 0")
        if self.skip_mode not in ("optimal", "fixed"):
            raise ConfigError("aam.m_mode must be 'optimal' or 'fixed'")
        if self.fixed_skip < 1:
            raise ConfigError("aam.m_fixed must be >= 1")
        if self.alpha <= 0 or self.beta <= 0:
            raise ConfigError("cost.alpha and cost.beta must be positive")
        if self.tau_s <= 0:
            raise ConfigError("cost.tau_ms must be positive")
        if self.horizon_s <= 0:
            raise ConfigError("run.horizon_s must be positive")
        if self.sample_dt_s <= 0:
            raise ConfigError("run.sample_dt_ms must be positive")
        if self.drain_slowdown < 1:
            raise ConfigError("run.drain_slowdown_factor must be >= 1")
        if self.seed < 0:
            raise ConfigError("run.seed must be >= 0")
        if self.aam_enabled and not self.sqf_enabled:
            raise ConfigError(
                "mitigation drops from the forwarder's input queue; "
                "aam.enabled requires sqf.enabled"
            )
        for fl in self.floods:
            if fl.end_s > self.horizon_s:
                raise InvariantViolation(
                    f"horizon {self.horizon_s}s does not cover flood ending at {fl.end_s}s"
                )


_MS = 1e-3
_MS2 = 1e-6  # ms^2 -> s^2


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


# key -> (converter, setter(state, value))
def _key_table():
    def set_benign(field_name, conv):
        def setter(state, raw):
            state["benign"][field_name] = conv(raw)
        return setter

    def set_plain(field_name, conv, scale=None):
        def setter(state, raw):
            v = conv(raw)
            state["plain"][field_name] = v * scale if scale else v
        return setter

    def set_service(field_name, conv, scale=None):
        def setter(state, raw):
            v = conv(raw)
            state["service"][field_name] = v * scale if scale else v
        return setter

    def set_detector(field_name, conv):
        def setter(state, raw):
            state["detector"][field_name] = conv(raw)
        return setter

    return {
        "benign.period_s": set_benign("period_s", float),
        "benign.jitter_fraction": set_benign("jitter_fraction", float),
        "benign.num_sources": set_benign("num_sources", int),
        "service.mean_normal_ms": set_service("mean_normal_s", float, _MS),
        "service.var_normal_ms2": set_service("var_normal_s2", float, _MS2),
        "service.mean_attack_ms": set_service("mean_attack_s", float, _MS),
        "service.var_attack_ms2": set_service("var_attack_s2", float, _MS2),
        "service.outlier_prob": set_service("outlier_prob", float),
        "service.outlier_scale": set_service("outlier_scale", float),
        "service.ceiling_ms": set_service("ceiling_s", float, _MS),
        "sqf.enabled": set_plain("sqf_enabled", _parse_bool),
        "sqf.D_ms": set_plain("pacing_gap_s", float, _MS),
        "sqf.link_latency_ms": set_plain("link_latency_s", float, _MS),
        "detector.tpr": set_detector("tpr", float),
        "detector.tnr": set_detector("tnr", float),
        "detector.window": set_detector("window", int),
        "aam.enabled": set_plain("aam_enabled", _parse_bool),
        "aam.m_mode": set_plain("skip_mode", str),
        "aam.m_fixed": set_plain("fixed_skip", int),
        "cost.alpha": set_plain("alpha", float),
        "cost.beta": set_plain("beta", float),
        "cost.tau_ms": set_plain("tau_s", float, _MS),
        "run.seed": set_plain("seed", int),
        "run.horizon_s": set_plain("horizon_s", float),
        "run.sample_dt_ms": set_plain("sample_dt_s", float, _MS),
        "run.drain_slowdown_factor": set_plain("drain_slowdown", float),
    }


_KEYS = _key_table()
_FLOOD_FIELDS = {"start_s": float, "duration_s": float, "rate_pps": float}


def parse_scenario(text: str) -> Scenario:
    state = {"benign": {}, "service": {}, "detector": {}, "plain": {}}
    floods: dict[int, dict] = {}
    benign_mentioned = False
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError("expected 'key = value'", line_no)
        key, _, raw_val = line.partition("=")
        key = key.strip()
        raw_val = raw_val.strip()
        if not raw_val:
            raise ScenarioError(f"empty value for {key!r}", line_no)
        if key.startswith("flood."):
            parts = key.split(".")
            if len(parts) != 3 or parts[2] not in _FLOOD_FIELDS:
                raise ScenarioError(f"unknown key {key!r}", line_no)
            try:
                idx = int(parts[1])
                val = _FLOOD_FIELDS[parts[2]](raw_val)
            except ValueError as exc:
                raise ScenarioError(str(exc), line_no) from exc
            floods.setdefault(idx, {})[parts[2]] = val
            continue
        if key == "benign.enabled":
            benign_mentioned = True
            try:
                state["benign"]["enabled"] = _parse_bool(raw_val)
            except ValueError as exc:
                raise ScenarioError(str(exc), line_no) from exc
            continue
        setter = _KEYS.get(key)
        if setter is None:
            raise ScenarioError(f"unknown key {key!r}", line_no)
        if key.startswith("benign."):
            benign_mentioned = True
        try:
            setter(state, raw_val)
        except ValueError as exc:
            raise ScenarioError(str(exc), line_no) from exc

    try:
        benign_fields = dict(state["benign"])
        benign_enabled = benign_fields.pop("enabled", True)
        if benign_mentioned and benign_enabled:
            benign = BenignSpec(**{"period_s": 0.01, **benign_fields})
        elif benign_mentioned:
            benign = None
        else:
            benign = Scenario().benign
        flood_specs = []
        for idx in sorted(floods):
            f = floods[idx]
            missing = set(_FLOOD_FIELDS) - set(f)
            if missing:
                raise ConfigError(f"flood.{idx} is missing {sorted(missing)}")
            flood_specs.append(FloodSpec(**f))
        scn = Scenario(
            benign=benign,
            floods=flood_specs,
            service=ServiceTimeModel(**state["service"]),
            detector=DetectorModel(**state["detector"]),
            **state["plain"],
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc)) from exc
    scn.validate()
    return scn


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text())


# --- traffic assembly --------------------------------------------------
#
# rng stream registry, composed through model.substream relative to the
# scenario's base stream (seed, 0):
#   run_key + 1       benign traffic           (run_key = 0 for a single run,
#   run_key + 2       service sampling          (r+1)*1000 for Monte-Carlo
#   run_key + 3       detector labels           run r)
#   run_key + 10 + k  flood number k


def build_trace(scenario: Scenario, rng: RngStream, run_key: int = 0) -> Trace:
    """Generate and merge the scenario's arrival streams."""
    parts = []
    if scenario.benign is not None:
        parts.append(
            gen_benign(scenario.benign, scenario.horizon_s, substream(rng, run_key + 1))
        )
    for k, flood in enumerate(scenario.floods):
        parts.append(gen_flood(flood, substream(rng, run_key + 10 + k), source_id=0))
    if not parts:
        return Trace.empty()
    return merge(parts)


def expected_attack_packets(scenario: Scenario) -> float:
    """E[X]: expected arrivals during flood windows (attack plus benign)."""
    benign_rate = scenario.benign.rate_pps if scenario.benign is not None else 0.0
    return sum(f.rate_pps * f.duration_s + benign_rate * f.duration_s for f in scenario.floods)


def expected_attack_fraction(scenario: Scenario) -> float:
    """f: expected attack share of arrivals during flood windows."""
    total = expected_attack_packets(scenario)
    if total == 0:
        return 0.0
    attack = sum(f.rate_pps * f.duration_s for f in scenario.floods)
    return attack / total
