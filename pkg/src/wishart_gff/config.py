"""Experiment configuration: TOML file, schema validation and derived objects."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Any, Mapping

import jsonschema

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .analytic import BetaWeights, OverlapGeometry
from .rng_ensemble import ArrayHandle, CornerFamilySpec, DistributionKind, EntryDistribution, SubmatrixSpec
from .spectra import LinearStat, SpectralSample, sample_trace

__all__ = ["ConfigError", "ExperimentConfig", "StatisticDef", "WeightedStat", "validate", "load_config", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid experiment configuration; ``errors`` lists the diagnostics."""

    def __init__(self, errors):
        self.errors = list(errors) if not isinstance(errors, str) else [errors]
        super().__init__("; ".join(self.errors))


_interval = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

SCHEMA = {
    "type": "object",
    "required": ["seed", "distribution", "geometry", "statistics", "simulation"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "distribution": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {"kind": {"enum": [k.value for k in DistributionKind]}},
        },
        "geometry": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["corner", "submatrices"]},
                "mu": {"type": "number", "exclusiveMinimum": 0},
                "nu": {"type": "number", "exclusiveMinimum": 0},
                "levels": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "blocks": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["rows", "cols"],
                        "additionalProperties": False,
                        "properties": {"rows": _interval, "cols": _interval},
                    },
                },
            },
            "additionalProperties": False,
        },
        "statistics": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["label"],
                "additionalProperties": False,
                "properties": {
                    "label": {"type": "string", "minLength": 1},
                    "degree": {"type": "integer", "minimum": 1},
                    "coeffs": {"type": "array", "items": {"type": "number"}, "minItems": 2},
                    "level": {"type": "number"},
                    "rho": {
                        "type": "array",
                        "minItems": 1,
                        "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    },
                },
            },
        },
        "simulation": {
            "type": "object",
            "required": ["L", "replicates"],
            "additionalProperties": False,
            "properties": {
                "L": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                "replicates": {"type": "integer", "minimum": 4},
                "batches": {"type": "integer", "minimum": 2},
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "threshold": {"type": "number", "minimum": 0},
                "oracle": {"type": "boolean"},
                "reference": {"enum": ["analytic", "oracle"]},
            },
        },
        "analytic": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"requests": {"type": "array", "items": {"type": "object"}}},
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"requests": {"type": "array", "items": {"type": "object"}}},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}},
        },
    },
}


@dataclass(frozen=True)
class StatisticDef:
    """A polynomial statistic spread over one or more levels (or blocks) with weights."""

    label: str
    coeffs: tuple[float, ...]
    rho: tuple[tuple[Any, float], ...]

    def build(self):
        if len(self.rho) == 1 and self.rho[0][1] == 1.0:
            return LinearStat(self.coeffs, self.rho[0][0], self.label)
        return WeightedStat(self)


@dataclass(frozen=True)
class WeightedStat:
    """``sum_t w_t tr f(W(key_t))`` evaluated on a spectral sample."""

    definition: StatisticDef

    @property
    def name(self) -> str:
        return self.definition.label

    def __call__(self, sample: SpectralSample) -> float:
        d = self.definition
        return float(sum(w * sample_trace(sample, k, d.coeffs) for k, w in d.rho))


def _floor(x: float) -> int:
    return int(math.floor(x + 1e-9))


@dataclass
class ExperimentConfig:
    raw: dict

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    @property
    def distribution(self) -> EntryDistribution:
        return EntryDistribution(self.raw["distribution"]["kind"])

    @property
    def weights(self) -> BetaWeights:
        return BetaWeights.from_distribution(self.distribution)

    @property
    def handle(self) -> ArrayHandle:
        return ArrayHandle(self.seed, self.distribution)

    @property
    def geometry_kind(self) -> str:
        return self.raw["geometry"]["kind"]

    @property
    def L_schedule(self) -> list[int]:
        return [int(x) for x in self.raw["simulation"]["L"]]

    @property
    def replicates(self) -> int:
        return int(self.raw["simulation"]["replicates"])

    @property
    def batches(self) -> int:
        return int(self.raw["simulation"].get("batches", 20))

    @property
    def threshold(self) -> float:
        return float(self.raw.get("verify", {}).get("threshold", 4.0))

    @property
    def use_oracle(self) -> bool:
        return bool(self.raw.get("verify", {}).get("oracle", True))

    @property
    def reference(self) -> str:
        """Value the z-score is taken against: the limit formula or the exact oracle."""
        return self.raw.get("verify", {}).get("reference", "analytic")

    @property
    def output_dir(self) -> str:
        return self.raw.get("output", {}).get("dir", "results")

    @property
    def statistics(self) -> list[StatisticDef]:
        out = []
        for s in self.raw["statistics"]:
            coeffs = tuple(s["coeffs"]) if "coeffs" in s else tuple([0.0] * s["degree"] + [1.0])
            if "rho" in s:
                rho = tuple((self._key(y), float(w)) for y, w in s["rho"])
            else:
                rho = ((self._key(s.get("level", self._default_key())), 1.0),)
            out.append(StatisticDef(s["label"], tuple(float(c) for c in coeffs), rho))
        return out

    def _default_key(self):
        return 1.0 if self.geometry_kind == "corner" else 0

    def _key(self, v):
        return float(v) if self.geometry_kind == "corner" else int(v)

    def keys(self) -> list:
        g = self.raw["geometry"]
        if self.geometry_kind == "corner":
            return [float(y) for y in g.get("levels", [1.0])]
        return list(range(len(g["blocks"])))

    def sim_geometry(self, L: int):
        """Geometry argument for :func:`spectra.estimate_moments` at size ``L``."""
        g = self.raw["geometry"]
        if self.geometry_kind == "corner":
            return CornerFamilySpec(g["mu"], g["nu"], L, tuple(g.get("levels", [1.0])))
        return (self.blocks(L), L)

    def blocks(self, L: int) -> list[SubmatrixSpec]:
        return [
            SubmatrixSpec((_floor(b["rows"][0] * L), _floor(b["rows"][1] * L)),
                          (_floor(b["cols"][0] * L), _floor(b["cols"][1] * L)))
            for b in self.raw["geometry"]["blocks"]
        ]

    def pair_geometry(self, key1, key2, L: int | None = None) -> OverlapGeometry:
        """Overlap geometry of two levels/blocks; realized sizes when ``L`` is given."""
        g = self.raw["geometry"]
        if self.geometry_kind == "corner":
            if L is None:
                return OverlapGeometry.nested(key1, key2, g["mu"], g["nu"])
            spec = self.sim_geometry(L)
            return OverlapGeometry.from_specs(spec.submatrix(key1), spec.submatrix(key2), L)
        if L is None:
            b1, b2 = g["blocks"][key1], g["blocks"][key2]
            return OverlapGeometry.from_rects(b1["rows"], b1["cols"], b2["rows"], b2["cols"])
        blocks = self.blocks(L)
        return OverlapGeometry.from_specs(blocks[key1], blocks[key2], L)

    def block_spec(self, key, L: int) -> SubmatrixSpec:
        if self.geometry_kind == "corner":
            return self.sim_geometry(L).submatrix(key)
        return self.blocks(L)[key]

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        """Copy with scalar fields replaced (``None`` values are ignored)."""
        raw = copy.deepcopy(self.raw)
        mapping = {
            "seed": ("seed",),
            "replicates": ("simulation", "replicates"),
            "batches": ("simulation", "batches"),
            "L": ("simulation", "L"),
            "threshold": ("verify", "threshold"),
            "out": ("output", "dir"),
        }
        for name, value in overrides.items():
            if value is None:
                continue
            path = mapping[name]
            node = raw
            for part in path[:-1]:
                node = node.setdefault(part, {})
            node[path[-1]] = value
        return validate(raw)


def validate(raw: Mapping) -> ExperimentConfig:
    raw = copy.deepcopy(dict(raw))
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}"
              for e in sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))]
    if errors:
        raise ConfigError(errors)
    cfg = ExperimentConfig(raw)
    problems = []
    sim = raw["simulation"]
    if sim["replicates"] < 2 * sim.get("batches", 20):
        problems.append("simulation: replicates must be at least twice the batch count")
    g = raw["geometry"]
    try:
        if g["kind"] == "corner":
            if "mu" not in g or "nu" not in g:
                problems.append("geometry: corner families need mu and nu")
            else:
                for L in cfg.L_schedule:
                    spec = cfg.sim_geometry(L)
                    for y in spec.levels:
                        spec.submatrix(y)
        else:
            if "blocks" not in g:
                problems.append("geometry: submatrix geometry needs blocks")
            else:
                n = len(g["blocks"])
                for i in range(n):
                    for j in range(n):
                        cfg.pair_geometry(i, j)
                for L in cfg.L_schedule:
                    cfg.blocks(L)
    except ValueError as exc:
        problems.append(f"geometry: {exc}")
    if problems:
        raise ConfigError(problems)
    keys = set(cfg.keys())
    labels = set()
    for s in raw["statistics"]:
        if ("degree" in s) == ("coeffs" in s):
            problems.append(f"statistics/{s['label']}: give exactly one of degree or coeffs")
        if "rho" in s and "level" in s:
            problems.append(f"statistics/{s['label']}: give level or rho, not both")
        if s["label"] in labels:
            problems.append(f"statistics/{s['label']}: duplicate label")
        labels.add(s["label"])
    if not problems:
        for st in cfg.statistics:
            for key, _ in st.rho:
                if key not in keys:
                    problems.append(f"statistics/{st.label}: unknown level or block {key!r}")
            if len({k for k, _ in st.rho}) != len(st.rho):
                problems.append(f"statistics/{st.label}: rho atoms must be distinct")
            if any(w <= 0 for _, w in st.rho):
                problems.append(f"statistics/{st.label}: rho weights must be positive")
            if abs(sum(w for _, w in st.rho) - 1.0) > 1e-12:
                problems.append(f"statistics/{st.label}: rho weights must sum to 1")
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    return validate(raw)
