"""Scenario configuration: JSON documents validated into model objects.

Every field is checked against the owning builder's preconditions before
any computation starts; the first violation raises a ConfigError naming
the field path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .diagnostics import DEFAULT_LAMBDA_REF
from .errors import ConfigError
from .models import (ChiralModel, PropagatorSpec, Scenario, StateSpec,
                     TwoLeadLattice, bond_pulse_drive, build_chiral,
                     build_lattice_scenario, mixing_scatter, phase_scatter,
                     site_pulse_drive)

_MISSING = object()


class Section:
    """A config mapping with path-qualified extraction and error reporting."""

    def __init__(self, data: dict, path: str = ""):
        if not isinstance(data, dict):
            raise ConfigError(f"{path or 'config'}: expected an object")
        self.data = data
        self.path = path

    def _qual(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def section(self, key: str, required: bool = True) -> "Section | None":
        if key not in self.data:
            if required:
                raise ConfigError(f"{self._qual(key)}: section missing")
            return None
        return Section(self.data[key], self._qual(key))

    def get(self, key: str, kind: type, default: Any = _MISSING) -> Any:
        if key not in self.data:
            if default is _MISSING:
                raise ConfigError(f"{self._qual(key)}: required field missing")
            return default
        value = self.data[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool):
            raise ConfigError(
                f"{self._qual(key)}: expected {kind.__name__}, got {value!r}")
        return value

    def number(self, key: str, default: Any = _MISSING, *, minimum: float | None = None,
               exclusive_minimum: float | None = None, maximum: float | None = None) -> float:
        value = self.get(key, float, default)
        if value is None:
            return value
        qual = self._qual(key)
        if minimum is not None and value < minimum:
            raise ConfigError(f"{qual}: must be >= {minimum}, got {value}")
        if exclusive_minimum is not None and value <= exclusive_minimum:
            raise ConfigError(f"{qual}: must be > {exclusive_minimum}, got {value}")
        if maximum is not None and value > maximum:
            raise ConfigError(f"{qual}: must be <= {maximum}, got {value}")
        return value

    def count(self, key: str, default: Any = _MISSING, *, minimum: int = 1) -> int:
        value = self.get(key, int, default)
        if value is None:
            return value
        if value < minimum:
            raise ConfigError(f"{self._qual(key)}: must be >= {minimum}, got {value}")
        return value

    def choice(self, key: str, options: tuple[str, ...], default: Any = _MISSING) -> str:
        value = self.get(key, str, default)
        if value not in options:
            raise ConfigError(
                f"{self._qual(key)}: expected one of {options}, got {value!r}")
        return value

    def int_list(self, key: str) -> list[int]:
        value = self.get(key, list)
        if not value or not all(isinstance(v, int) and not isinstance(v, bool)
                                for v in value):
            raise ConfigError(f"{self._qual(key)}: expected a non-empty list of integers")
        return list(value)

    def extra_keys(self, allowed: set[str]) -> None:
        extra = set(self.data) - allowed
        if extra:
            raise ConfigError(
                f"{self.path or 'config'}: unknown field(s) {sorted(extra)}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated configuration; carries builders, not built operators."""

    raw: dict
    model_kind: str
    lattice: TwoLeadLattice | None
    chiral: ChiralModel | None
    state: StateSpec
    propagator: PropagatorSpec | None
    variant: str
    grid_size: int | None
    cumulant_order: int
    lambda_ref: float
    scans: dict[str, dict]

    def build(self) -> Scenario:
        if self.model_kind == "chiral":
            return build_chiral(self.chiral)
        return build_lattice_scenario(self.lattice, self.state, self.propagator)

    def grid_for(self, scenario: Scenario) -> int:
        if self.grid_size is not None:
            return self.grid_size
        return 2 * scenario.dim + 1


def _parse_lattice(sec: Section) -> TwoLeadLattice:
    sec.extra_keys({"kind", "sites_left", "sites_right", "hopping",
                    "onsite_left", "onsite_right", "coupling", "bias"})
    return TwoLeadLattice(
        sites_left=sec.count("sites_left", minimum=1),
        sites_right=sec.count("sites_right", minimum=1),
        hopping=sec.number("hopping", 1.0),
        onsite_left=sec.number("onsite_left", 0.0),
        onsite_right=sec.number("onsite_right", 0.0),
        coupling=sec.number("coupling", 0.0),
        bias=sec.number("bias", 0.0),
    )


def _parse_scatter(sec: Section):
    sec.extra_keys({"form", "amplitude", "center", "width"})
    form = sec.choice("form", ("mixing", "phase"))
    amplitude = sec.number("amplitude")
    center = sec.number("center", 0.0)
    width = sec.number("width", exclusive_minimum=0.0)
    factory = mixing_scatter if form == "mixing" else phase_scatter
    return factory(amplitude, center, width), (center - width, center + width)


def _parse_chiral(sec: Section) -> ChiralModel:
    sec.extra_keys({"kind", "energy_cutoff", "grid_points", "scatter"})
    scatter, support = _parse_scatter(sec.section("scatter"))
    return ChiralModel(
        energy_cutoff=sec.number("energy_cutoff", exclusive_minimum=0.0),
        grid_points=sec.count("grid_points", minimum=4),
        scatter=scatter,
        support=support,
    )


def _parse_state(sec: Section, model_kind: str) -> StateSpec:
    sec.extra_keys({"kind", "mu", "beta"})
    kind = sec.choice("kind", ("pure", "thermal"))
    mu = sec.number("mu", 0.0)
    if model_kind == "chiral":
        if kind != "pure" or mu != 0.0:
            raise ConfigError(
                f"{sec.path}.kind: the chiral model fixes its own Fermi sea; "
                "only a pure state at mu = 0 is meaningful")
        return StateSpec(kind="pure", mu=0.0)
    if kind == "thermal":
        beta = sec.number("beta", exclusive_minimum=0.0)
        return StateSpec(kind="thermal", mu=mu, beta=beta)
    return StateSpec(kind="pure", mu=mu)


def _parse_drive(sec: Section, lattice: TwoLeadLattice):
    sec.extra_keys({"form", "amplitude", "center", "width", "site"})
    form = sec.choice("form", ("bond_pulse", "site_pulse"))
    amplitude = sec.number("amplitude")
    center = sec.number("center")
    width = sec.number("width", exclusive_minimum=0.0)
    if form == "bond_pulse":
        return bond_pulse_drive(lattice, amplitude, center, width)
    site = sec.count("site", minimum=0)
    return site_pulse_drive(lattice, site, amplitude, center, width)


def _parse_evolution(sec: Section, lattice: TwoLeadLattice) -> PropagatorSpec:
    sec.extra_keys({"mode", "total_time", "steps", "drive"})
    mode = sec.choice("mode", ("static", "driven"), "static")
    total_time = sec.number("total_time", minimum=0.0)
    if mode == "static":
        return PropagatorSpec(mode="static", total_time=total_time)
    steps = sec.count("steps", minimum=1)
    drive = _parse_drive(sec.section("drive"), lattice)
    return PropagatorSpec(mode="driven", total_time=total_time,
                          steps=steps, drive=drive)


def _parse_scans(sec: Section | None) -> dict[str, dict]:
    if sec is None:
        return {}
    sec.extra_keys({"length", "depth", "variance"})
    scans: dict[str, dict] = {}
    length = sec.section("length", required=False)
    if length is not None:
        length.extra_keys({"lengths", "total_time"})
        scans["length"] = {
            "lengths": length.int_list("lengths"),
            "total_time": length.number("total_time"),
        }
    depth = sec.section("depth", required=False)
    if depth is not None:
        depth.extra_keys({"factors", "mus", "total_time"})
        entry: dict[str, Any] = {}
        if "factors" in depth.data:
            entry["factors"] = depth.int_list("factors")
        if "mus" in depth.data:
            mus = depth.get("mus", list)
            if not mus or not all(isinstance(v, (int, float)) and
                                  not isinstance(v, bool) for v in mus):
                raise ConfigError(f"{depth.path}.mus: expected a list of numbers")
            entry["mus"] = [float(v) for v in mus]
            entry["total_time"] = depth.number("total_time")
        if not entry:
            raise ConfigError(f"{depth.path}: needs 'factors' (chiral) or 'mus' (lattice)")
        scans["depth"] = entry
    variance = sec.section("variance", required=False)
    if variance is not None:
        variance.extra_keys({"lengths", "beta", "mu"})
        scans["variance"] = {
            "lengths": variance.int_list("lengths"),
            "beta": variance.number("beta", exclusive_minimum=0.0),
            "mu": variance.number("mu", 0.0),
        }
    return scans


def parse_config(data: dict) -> ScenarioConfig:
    root = Section(data)
    root.extra_keys({"model", "state", "evolution", "analysis"})
    model = root.section("model")
    kind = model.choice("kind", ("two_lead", "chiral"))

    lattice = chiral = None
    if kind == "two_lead":
        lattice = _parse_lattice(model)
    else:
        chiral = _parse_chiral(model)

    state = _parse_state(root.section("state"), kind)

    propagator = None
    evolution = root.section("evolution", required=kind == "two_lead")
    if kind == "chiral":
        if evolution is not None:
            raise ConfigError(
                "evolution: not applicable to the chiral model (the scatterer "
                "defines the evolution)")
    else:
        propagator = _parse_evolution(evolution, lattice)

    analysis = root.section("analysis", required=False)
    if analysis is None:
        analysis = Section({}, "analysis")
    analysis.extra_keys({"variant", "grid_size", "cumulant_order",
                         "lambda_ref", "scans"})
    variant = analysis.choice("variant",
                              ("naive", "regularized", "zero_temperature"),
                              "regularized")
    grid_size = analysis.data.get("grid_size")
    if grid_size is not None:
        grid_size = analysis.count("grid_size", minimum=3)
        if grid_size % 2 == 0:
            raise ConfigError("analysis.grid_size: must be odd")
    order = analysis.count("cumulant_order", 4, minimum=1)
    if order > 6:
        raise ConfigError("analysis.cumulant_order: must be <= 6")
    lambda_ref = analysis.number("lambda_ref", DEFAULT_LAMBDA_REF,
                                 exclusive_minimum=0.0, maximum=2.0 * math.pi)
    if state.kind == "thermal" and variant == "zero_temperature":
        raise ConfigError(
            "analysis.variant: the zero_temperature kernel needs a pure state")
    scans = _parse_scans(analysis.section("scans", required=False))
    if kind == "chiral" and "mus" in scans.get("depth", {}):
        raise ConfigError("analysis.scans.depth.mus: a chiral model scans factors")
    if kind == "two_lead" and "factors" in scans.get("depth", {}):
        raise ConfigError("analysis.scans.depth.factors: a lattice scans mus")

    return ScenarioConfig(raw=data, model_kind=kind, lattice=lattice,
                          chiral=chiral, state=state, propagator=propagator,
                          variant=variant, grid_size=grid_size,
                          cumulant_order=order, lambda_ref=lambda_ref,
                          scans=scans)


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc}") from exc
    return parse_config(data)
