"""JSON scenario descriptions and their translation into solver objects."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..boundary_modes import family_from_dict
from ..collar_profiles import Constant, profile_from_dict
from ..errors import ConfigurationError
from ..mode_solver import BleeckerCollar, CollarScenario, ConformalCylinder

SOLVERS = ("mode", "fem")
CHECK_KINDS = ("fixed_volume", "mixed", "mixed_auxiliary", "component_upper", "invariance")


@dataclass
class ScenarioConfig:
    """One experiment: a collar geometry, an epsilon-dependent profile and the bounds to check.

    ``geometry`` keys: ``family`` (boundary family JSON), ``collar``
    (``"conformal"`` or ``"bleecker"``), ``length``, ``ambient_dim``,
    ``right_end``, ``mode_cap``, ``grid_size``.  Each entry of ``checks``
    names an eigenvalue index ``k`` and a ``certificate`` kind plus that
    kind's parameters.  ``fem`` holds the parameters of finite-element
    scenarios, which do not sweep epsilon.
    """

    name: str
    solver: str = "mode"
    geometry: dict[str, Any] = field(default_factory=dict)
    profile: dict[str, Any] | None = None
    checks: list[dict[str, Any]] = field(default_factory=list)
    epsilons: list[float] = field(default_factory=list)
    count: int | None = None
    output: dict[str, str] = field(default_factory=dict)
    fem: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ConfigurationError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.solver == "fem":
            if int(self.fem.get("k", 10)) < 2:
                raise ConfigurationError("k must be at least 2")
            return
        if not self.epsilons:
            raise ConfigurationError("the epsilon sweep is empty")
        eps = [float(e) for e in self.epsilons]
        if any(not 0.0 < e < 1.0 for e in eps):
            raise ConfigurationError(f"epsilon values must lie in (0, 1), got {eps}")
        if any(b >= a for a, b in zip(eps[:-1], eps[1:])):
            raise ConfigurationError(f"epsilon values must be strictly decreasing, got {eps}")
        self.epsilons = eps
        if self.profile is None or "family" not in self.geometry:
            raise ConfigurationError("mode scenarios need geometry.family and a profile")
        if not self.checks:
            raise ConfigurationError("no checks requested")
        for check in self.checks:
            if check.get("certificate") not in CHECK_KINDS:
                raise ConfigurationError(f"unknown certificate kind {check.get('certificate')!r}")
            if int(check.get("k", 0)) < 2:
                raise ConfigurationError("checked eigenvalue index k must be at least 2")
        if self.count is None:
            self.count = max(int(c["k"]) for c in self.checks)
        if self.count < max(int(c["k"]) for c in self.checks):
            raise ConfigurationError("count is smaller than a checked index")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigurationError(f"unknown config keys {sorted(extra)}")
        if "name" not in data:
            raise ConfigurationError("config needs a name")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def with_epsilons(self, epsilons) -> "ScenarioConfig":
        return ScenarioConfig.from_dict({**self.to_dict(), "epsilons": list(epsilons)})


def build_scenario(config: ScenarioConfig, epsilon: float | None) -> CollarScenario:
    """The collar at one epsilon; ``epsilon=None`` gives the undeformed collar."""
    geo = dict(config.geometry)
    family = family_from_dict(geo.pop("family"))
    collar = geo.pop("collar", "conformal")
    length = float(geo.pop("length", 1.0))
    right_end = geo.pop("right_end", "neumann")
    mode_cap = float(geo.pop("mode_cap", 16.0))
    grid_size = int(geo.pop("grid_size", 2048))
    ambient = int(geo.pop("ambient_dim", family.dim + 1))
    if geo:
        raise ConfigurationError(f"unknown geometry keys {sorted(geo)}")
    if collar == "bleecker":
        profile = Constant(1.0) if epsilon is None else profile_from_dict(config.profile, epsilon)
        kind = BleeckerCollar(profile, length, right_end)
    elif collar == "conformal":
        profile = Constant(0.0) if epsilon is None else profile_from_dict(config.profile, epsilon)
        kind = ConformalCylinder(profile, ambient, length, right_end)
    else:
        raise ConfigurationError(f"unknown collar {collar!r}")
    return CollarScenario(family, kind, mode_cap, grid_size)
