"""Explicit eigenvalue bounds with the inputs they were computed from."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

from scipy.integrate import quad

from ..collar_profiles import SmoothStep
from ..errors import ConfigurationError, DomainError
from ..mode_solver import CollarScenario, ConformalCylinder, ConformalWeight

FIXED_VOLUME = "fixed_volume"
MIXED = "mixed"
MIXED_AUXILIARY = "mixed_auxiliary"
COMPONENT_UPPER = "component_upper"
INVARIANCE = "invariance"

LOWER_KINDS = (FIXED_VOLUME, MIXED, MIXED_AUXILIARY)


@dataclass
class Certificate:
    """A bound on one eigenvalue.

    ``bound`` is what a run is checked against: a lower bound for the
    ``*_LOWER`` kinds, an upper bound for ``component_upper``.
    """

    kind: str
    bound: float
    constants: dict[str, float]
    inputs: dict[str, Any] = field(default_factory=dict)
    epsilon: float | None = None

    @property
    def is_lower(self) -> bool:
        return self.kind in LOWER_KINDS

    def holds(self, value: float) -> bool:
        if self.kind == INVARIANCE:
            return abs(value - self.bound) <= self.inputs["rel_tol"] * max(1.0, abs(self.bound))
        return value >= self.bound if self.is_lower else value <= self.bound

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Certificate":
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        return cls.from_dict(json.loads(text))


def _check_epsilon(epsilon: float):
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")


def certificate_fixed_volume(epsilon: float, delta_bleecker: float) -> Certificate:
    """``sigma_2 >= A / epsilon`` with ``A = min(1/4, delta/8)``."""
    _check_epsilon(epsilon)
    if not delta_bleecker > 0:
        raise DomainError(f"delta must be positive, got {delta_bleecker}")
    A = min(0.25, delta_bleecker / 8.0)
    return Certificate(FIXED_VOLUME, A / epsilon, {"A": A}, {"delta": float(delta_bleecker)}, float(epsilon))


def certificate_mixed(
    epsilon: float,
    lambda_next: float,
    b: int,
    L: float,
    neumann_gap_value: float | None = None,
    component_volumes: Sequence[float] = (),
) -> Certificate:
    """Lower bound ``C_final / epsilon`` for the second mixed eigenvalue.

    ``A = min(lambda_{b+1}, 1/4) / 4``.  With ``b >= 2`` components the
    second branch
    ``B = min(mu b L, 1/(2b)) / (32 (b-1)^2) * min|S_j| / max|S_j|``
    enters as ``C_final = min(A, B/2)``; with ``b = 1`` it is absent.
    """
    _check_epsilon(epsilon)
    if b < 1:
        raise DomainError(f"b must be at least 1, got {b}")
    if not lambda_next > 0 or not L > 0:
        raise DomainError("lambda_next and L must be positive")
    A = 0.25 * min(lambda_next, 0.25)
    constants = {"A": A}
    inputs: dict[str, Any] = {"lambda_next": float(lambda_next), "b": int(b), "L": float(L)}
    C = A
    if b >= 2:
        vols = [float(v) for v in component_volumes]
        if len(vols) < b:
            raise ConfigurationError(f"b = {b} needs {b} component volumes, got {len(vols)}")
        if neumann_gap_value is None or not neumann_gap_value > 0:
            raise DomainError("b >= 2 needs a positive Neumann gap")
        if min(vols) <= 0:
            raise DomainError("component volumes must be positive")
        B = min(neumann_gap_value * b * L, 1.0 / (2 * b)) / (32.0 * (b - 1) ** 2) * (min(vols[:b]) / max(vols[:b]))
        constants["B"] = B
        inputs["neumann_gap"] = float(neumann_gap_value)
        inputs["component_volumes"] = vols
        C = min(A, B / 2.0)
    constants["C_final"] = C
    return Certificate(MIXED, C / epsilon, constants, inputs, float(epsilon))


def certificate_auxiliary(epsilon: float, lambda_next: float, b: int) -> Certificate:
    """``sigma_{b+1} >= A / (b epsilon)``: a one-component mixed bound shared over ``b`` pieces."""
    inner = certificate_mixed(epsilon, lambda_next, 1, 1.0)
    A = inner.constants["A"]
    return Certificate(
        MIXED_AUXILIARY,
        A / (b * epsilon),
        {"A": A, "C_final": A / b},
        {"lambda_next": float(lambda_next), "b": int(b)},
        float(epsilon),
    )


@dataclass(frozen=True)
class CutoffRegion:
    """``psi = |S|^-1/2`` on ``omega``, decaying to 0 at the edges of ``tilde``."""

    omega: tuple[float, float]
    tilde: tuple[float, float]

    def transitions(self) -> list[tuple[float, float]]:
        out = []
        if self.tilde[0] < self.omega[0]:
            out.append((self.tilde[0], self.omega[0]))
        if self.omega[1] < self.tilde[1]:
            out.append((self.omega[1], self.tilde[1]))
        return out


def _cutoff_energy(region: CutoffRegion, weight) -> float:
    total = 0.0
    for a, b in region.transitions():
        step = SmoothStep(a, b)
        val, _ = quad(
            lambda t: float(weight(t)) * float(step.eval_derivative(t)) ** 2,
            a,
            b,
            epsabs=0.0,
            epsrel=1e-13,
            limit=200,
        )
        total += val
    return total


def upper_bound_components(scenario: CollarScenario, regions: Sequence[CutoffRegion]) -> Certificate:
    """``sigma_b <= C``: the largest cutoff energy among ``b`` boundary-adjacent regions.

    Energies are computed in the undeformed metric and again in the
    deformed one; they must agree, since the conformal factor has to vanish
    where the cutoffs vary.
    """
    if not isinstance(scenario.kind, ConformalCylinder):
        raise ConfigurationError("component cutoffs are implemented for conformal cylinders")
    if not regions:
        raise DomainError("need at least one region")
    L = scenario.length
    regions = [CutoffRegion(tuple(map(float, r.omega)), tuple(map(float, r.tilde))) for r in regions]
    for r in regions:
        if not (0.0 <= r.tilde[0] <= r.omega[0] < r.omega[1] <= r.tilde[1] <= L):
            raise ConfigurationError(f"region {r} is not nested inside [0, {L}]")
        touches = r.omega[0] == 0.0 or r.omega[1] == L
        if not touches:
            raise ConfigurationError(f"region {r} does not meet the boundary")
    ordered = sorted(regions, key=lambda r: r.tilde[0])
    for a, b in zip(ordered[:-1], ordered[1:]):
        if a.tilde[1] > b.tilde[0]:
            raise ConfigurationError("enlarged regions overlap")
    # the boundary term |S|^-1 * |S| cancels; only the axial profile enters
    n = scenario.family.dim
    deformed = ConformalWeight(scenario.profile, n - 1.0)
    flat = []
    bent = []
    for r in regions:
        flat.append(_cutoff_energy(r, lambda t: 1.0))
        bent.append(_cutoff_energy(r, deformed))
    for f, d in zip(flat, bent):
        if not math.isclose(f, d, rel_tol=1e-12, abs_tol=1e-300):
            raise ConfigurationError(f"the deformation reaches a cutoff region ({f} vs {d})")
    C = max(flat)
    return Certificate(
        COMPONENT_UPPER,
        C,
        {"C": C},
        {
            "b": len(regions),
            "energies": flat,
            "regions": [{"omega": list(r.omega), "tilde": list(r.tilde)} for r in regions],
        },
        None,
    )


def invariance_certificate(reference: float, rel_tol: float = 1e-9) -> Certificate:
    """Records the undeformed value a run must reproduce."""
    return Certificate(INVARIANCE, float(reference), {"reference": float(reference)}, {"rel_tol": rel_tol}, None)


def lambda_next(family, b: int, cap: float = 64.0) -> float:
    """``lambda_{b+1}`` of ``b`` disjoint copies of the cross-section."""
    modes = family.enumerate_modes(cap)
    vals = sorted(v for m in modes for v in [m.eigenvalue(1.0)] * (m.multiplicity * b))
    if len(vals) <= b:
        raise ConfigurationError("mode cap too small to reach lambda_{b+1}")
    out = float(vals[b])
    if not out > 0:
        raise DomainError("lambda_{b+1} vanishes")
    return out


__all__ = [
    "Certificate",
    "CutoffRegion",
    "certificate_fixed_volume",
    "certificate_mixed",
    "certificate_auxiliary",
    "upper_bound_components",
    "invariance_certificate",
    "lambda_next",
    "FIXED_VOLUME",
    "MIXED",
    "MIXED_AUXILIARY",
    "COMPONENT_UPPER",
    "INVARIANCE",
]
