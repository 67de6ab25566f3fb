"""Flat ``key = value`` configuration covering every tunable of the pipeline."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .bandpass import BandpassSpec
from .detector import DetectorParams
from .errors import ConfigError
from .features import FramePlan
from .merger import MergerParams


@dataclass(frozen=True)
class Config:
    # frame plan
    si_frame_ms: float = 10.0
    feature_frame_ms: float = 40.0
    hop_ms: float = 5.0
    min_silence_run: int = 3
    ade_threshold: float = 0.02
    # SI rules
    si_hi: float = 0.6
    si_lo: float = 0.4
    si_resume_lo: float = 0.35
    si_resume_hi: float = 0.7
    si_crossover: float = 0.5
    subseg_ms: float = 1.0
    # PFE/PLE rules
    weak_window_ms: float = 5.0
    far_threshold_ms: float = 5.0
    # merger windows
    sn_lh_ms: float = 10.0
    sn_hl_ms: float = 20.0
    amp_ns_ms: float = 20.0
    # band
    f1: float = 70.0
    f2: float = 500.0
    # io
    phone_map: str = ""
    output_format: str = "json"

    def __post_init__(self):
        if self.output_format not in ("json", "lab", "both"):
            raise ConfigError(f"output_format must be json, lab or both, not {self.output_format!r}")
        try:
            self.plan
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def plan(self):
        return FramePlan(self.si_frame_ms, self.feature_frame_ms, self.hop_ms,
                         self.min_silence_run, self.ade_threshold)

    @property
    def detector(self):
        return DetectorParams(self.si_hi, self.si_lo, self.si_resume_lo, self.si_resume_hi,
                              self.si_crossover, self.weak_window_ms, self.far_threshold_ms,
                              self.ade_threshold, self.subseg_ms)

    @property
    def merger(self):
        return MergerParams(self.sn_lh_ms, self.sn_hl_ms, self.amp_ns_ms)

    @property
    def band(self):
        return BandpassSpec(self.f1, self.f2)


_FIELDS = {f.name: f for f in dataclasses.fields(Config)}


def _coerce(name, raw):
    kind = _FIELDS[name].type
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {kind}") from exc
    return raw


def parse_config(text, base=None):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value)
    return dataclasses.replace(base or Config(), **values)


def serialize_config(config):
    # str(float) is the shortest round-tripping repr
    return "".join(f"{name} = {getattr(config, name)}\n" for name in _FIELDS)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
