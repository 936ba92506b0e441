"""Experiment configuration: JSON schema, validation and object construction."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from ..cp_core import MAX_NODES, MAX_UNIVERSE, DepthRange
from ..group import FiniteSubset, FolnerSequence
from ..measures import MeasureSpec
from ..potential import Potential, parse_value
from ..symbolic import Cylinder, SymbolicSystem, TargetSet

SCHEMA_VERSION = 1
CHECK_IDS = ("bowen", "m1", "m3", "m2", "m4", "billing-1", "billing-2", "inequalities")

_number = {"type": ["number", "string"]}
_system = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["full_shift", "sft", "golden_mean"]},
        "k": {"type": "integer", "minimum": 2},
        "d": {"type": "integer", "minimum": 1, "maximum": 3},
        "forbidden": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
    },
    "required": ["kind"],
}
_potential = {
    "type": "object",
    "properties": {
        "constant": _number,
        "symbol_values": {"type": "array", "items": _number},
        "affine": {"type": "object", "properties": {
            "constant": _number,
            "coefficients": {"type": "object", "additionalProperties": _number}}},
        "window_radius": {"type": "integer", "minimum": 0},
        "entries": {"type": "array", "items": {"type": "object", "properties": {
            "pattern": {"type": "array", "items": {"type": "integer"}}, "value": _number},
            "required": ["pattern", "value"]}},
    },
}
_measure = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["bernoulli", "markov", "golden_markov"]},
        "probs": {"type": "array", "items": _number},
        "P": {"type": "array", "items": {"type": "array", "items": _number}},
        "pi": {"type": "array", "items": _number},
        "a": _number,
    },
    "required": ["kind"],
}
_cylinder = {"type": "object", "properties": {
    "support": {"type": "array"}, "symbols": {"type": "array", "items": {"type": "integer"}}},
    "required": ["support", "symbols"]}
_positive = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "system": _system,
        "potential": _potential,
        "folner": {"type": "object", "properties": {
            "kind": {"enum": ["box", "explicit"]}, "members": {"type": "array"}}},
        "target": {"type": ["array", "null"], "items": _cylinder},
        "eps_levels": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "depths": {"type": "array", "minItems": 1, "items": {"type": "object", "properties": {
            "N": {"type": "integer", "minimum": 1}, "N_max": {"type": "integer", "minimum": 1}},
            "required": ["N"]}},
        "measures": {"type": "object", "properties": {
            "reference": _measure,
            "family": {"type": "object", "properties": {
                "kind": {"enum": ["bernoulli_grid", "golden_markov_grid"]},
                "start": _number, "stop": _number, "step": _number},
                "required": ["kind", "start", "stop", "step"]},
            "mode": {"enum": ["exact", "monte_carlo"]},
            "exact_depth": {"type": "integer", "minimum": 1},
            "samples": {"type": "integer", "minimum": 2},
            "N_range": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2, "maxItems": 2},
            "tail_window": {"type": "integer", "minimum": 0},
        }},
        "delta_grid": {"type": "array", "items": _number},
        "seeds": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
        "tolerances": {"type": "object", "additionalProperties": _positive},
        "budgets": {"type": "object", "properties": {
            "max_nodes": {"type": "integer", "minimum": 1},
            "max_balls": {"type": "integer", "minimum": 1},
            "max_depth_span": {"type": "integer", "minimum": 0}}},
        "checks": {"type": "array", "items": {"enum": list(CHECK_IDS)}},
        "oracle": {"type": "object", "additionalProperties": {"type": "number"}},
        "inequality_grid": {"type": "object", "properties": {
            "instances": {"type": "array", "items": {"type": "object", "properties": {
                "system": _system, "potential": _potential, "measure": _measure}}},
            "pairs": {"type": "array", "items": {"type": "array", "items": {"type": "integer"},
                                                 "minItems": 2, "maxItems": 2}}}},
        "outputs": {"type": "object", "properties": {
            "dir": {"type": "string"}, "figures": {"type": "boolean"}}},
    },
    "required": ["schema_version", "system", "potential", "eps_levels", "depths"],
}

DEFAULT_TOLERANCES = {
    "bisection": 1e-4,
    "agreement": 0.01,
    "variational_gap": 0.02,
    "variational_sup": 0.02,
    "measure": 0.02,
    "inverse": 0.01,
    "billingsley": 0.01,
    "exact": 1e-9,
}


class ConfigError(ValueError):
    pass


def build_system(spec: dict) -> SymbolicSystem:
    kind = spec["kind"]
    if kind == "golden_mean":
        return SymbolicSystem.golden_mean()
    if kind == "sft":
        return SymbolicSystem.sft(spec["k"], spec.get("forbidden", []))
    return SymbolicSystem.full_shift(spec.get("k", 2), spec.get("d", 1))


def build_potential(spec: dict, system: SymbolicSystem) -> Potential:
    if "constant" in spec:
        return Potential.constant(system, parse_value(spec["constant"]))
    if "symbol_values" in spec:
        return Potential.from_symbol_values(system, spec["symbol_values"])
    if "affine" in spec:
        aff = spec["affine"]
        c0 = parse_value(aff.get("constant", 1))
        coefs = {int(h): parse_value(v) for h, v in aff.get("coefficients", {}).items()}
        if system.d != 1:
            raise ConfigError("affine potentials are one-dimensional")
        r = max([abs(h) for h in coefs] + [0])
        # the radius-r window is -r..r, so offset h sits at index h + r
        return Potential.from_function(system, r, lambda p: c0 + sum(v * p[h + r] for h, v in coefs.items()))
    if "entries" in spec:
        r = spec.get("window_radius", 0)
        return Potential.from_entries(system, r, {tuple(e["pattern"]): e["value"] for e in spec["entries"]})
    raise ConfigError("potential needs one of constant, symbol_values, affine, entries")


def build_measure(spec: dict) -> MeasureSpec:
    kind = spec["kind"]
    if kind == "bernoulli":
        return MeasureSpec.bernoulli(spec["probs"], spec.get("d", 1))
    if kind == "golden_markov":
        return MeasureSpec.golden_markov(parse_value(spec["a"]))
    return MeasureSpec.markov(spec["P"], spec.get("pi"))


def build_folner(spec: dict | None, d: int) -> FolnerSequence:
    if not spec or spec.get("kind", "box") == "box":
        return FolnerSequence.boxes(d)
    members = [FiniteSubset.from_json(m, d) for m in spec["members"]]
    return FolnerSequence.explicit(members)


@dataclass
class ExperimentConfig:
    raw: dict
    name: str
    system: SymbolicSystem
    potential: Potential
    folner: FolnerSequence
    target: TargetSet
    eps_levels: list
    depths: list
    reference: MeasureSpec | None
    delta_grid: list
    seeds: list
    tolerances: dict
    max_nodes: int
    max_balls: int
    checks: list
    oracle: dict = field(default_factory=dict)

    @property
    def measures(self) -> dict:
        return self.raw.get("measures", {})

    def with_seed(self, seed: int) -> "ExperimentConfig":
        raw = copy.deepcopy(self.raw)
        raw["seeds"] = [seed]
        return load_config(raw)

    def echo(self) -> dict:
        return {"name": self.name, "system": self.system.label(), "potential": self.potential.label(),
                "folner": self.folner.label(), "target": self.target.label(), "eps_levels": self.eps_levels,
                "depths": [d.to_json() for d in self.depths], "seeds": self.seeds,
                "reference_measure": None if self.reference is None else self.reference.label(),
                "delta_grid": [str(d) for d in self.delta_grid], "tolerances": self.tolerances,
                "budgets": {"max_nodes": self.max_nodes, "max_balls": self.max_balls}}


def load_config(source) -> ExperimentConfig:
    """Validate and build a config from a path, a JSON string or a dict."""
    if isinstance(source, dict):
        raw = copy.deepcopy(source)
    else:
        path = Path(source)
        try:
            raw = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from exc
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message} at {list(exc.absolute_path)}") from exc
    try:
        system = build_system(raw["system"])
        potential = build_potential(raw["potential"], system)
        folner = build_folner(raw.get("folner"), system.d)
        target = TargetSet.whole(system)
        if raw.get("target"):
            target = TargetSet.union(system, [Cylinder.from_json(c, system.d) for c in raw["target"]])
        depths = [DepthRange(d["N"], d.get("N_max", d["N"])) for d in raw["depths"]]
        ref = raw.get("measures", {}).get("reference")
        reference = build_measure(ref) if ref else None
        if reference is not None and not reference.compatible_with(system):
            raise ConfigError("reference measure is not supported on the system")
    except ConfigError:
        raise
    except Exception as exc:  # object construction failures are config errors
        raise ConfigError(f"invalid config: {exc}") from exc
    budgets = raw.get("budgets", {})
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(raw.get("tolerances", {}))
    return ExperimentConfig(
        raw=raw, name=raw.get("name", "experiment"), system=system, potential=potential, folner=folner,
        target=target, eps_levels=list(raw["eps_levels"]), depths=depths, reference=reference,
        delta_grid=[Fraction(str(d)) for d in raw.get("delta_grid", ["0.1"])],
        seeds=list(raw.get("seeds", [0])), tolerances=tolerances,
        max_nodes=budgets.get("max_nodes", MAX_NODES), max_balls=budgets.get("max_balls", MAX_UNIVERSE),
        checks=list(raw.get("checks", ["bowen"])), oracle=dict(raw.get("oracle", {})))


def bundled_names() -> list:
    return sorted(p.name[:-5] for p in resources.files("dimlab.configs").iterdir() if p.name.endswith(".json"))


def bundled_path(name: str):
    path = resources.files("dimlab.configs") / f"{name}.json"
    if not path.is_file():
        raise ConfigError(f"no bundled config {name!r}; available: {', '.join(bundled_names())}")
    return path
