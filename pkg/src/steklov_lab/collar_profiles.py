"""Radial profile functions for the collar metric constructions.

All profiles are immutable, act on ``t >= 0`` (distance from the boundary)
and accept scalars or numpy arrays.  Between consecutive entries of
:attr:`Profile.breakpoints` every profile is monotone, which is what
:meth:`Profile.range_on` relies on to return exact extrema.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import Any, Mapping

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "Profile",
    "SmoothStep",
    "BleeckerRamp",
    "ConformalStep",
    "ConformalPulse",
    "Mirrored",
    "Constant",
    "profile_from_dict",
]


def _domain(t, upper: float | None = None) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise DomainError(f"profiles are defined for t >= 0, got {t!r}")
    if upper is not None and np.any(arr > upper):
        raise DomainError(f"profile defined on [0, {upper}], got {t!r}")
    return arr


def _out(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


def smoothstep_poly(x: np.ndarray, order: int) -> np.ndarray:
    """Generalized smoothstep of degree ``2*order + 1`` on [0, 1], clamped outside."""
    x = np.clip(x, 0.0, 1.0)
    acc = np.zeros_like(x)
    for k in range(order + 1):
        acc += comb(order + k, k) * comb(2 * order + 1, order - k) * (-x) ** k
    return x ** (order + 1) * acc


def smoothstep_poly_derivative(x: np.ndarray, order: int) -> np.ndarray:
    # d/dx S_N = (2N+1)!/(N!)^2 * x^N (1-x)^N
    scale = math.factorial(2 * order + 1) / math.factorial(order) ** 2
    inside = (x > 0.0) & (x < 1.0)
    xc = np.clip(x, 0.0, 1.0)
    return np.where(inside, scale * xc**order * (1.0 - xc) ** order, 0.0)


class Profile:
    """Common interface; subclasses implement ``_value`` and ``_slope``."""

    upper: float | None = None

    def eval(self, t):
        arr = _domain(t, self.upper)
        return _out(self._value(arr), t)

    def eval_derivative(self, t):
        arr = _domain(t, self.upper)
        return _out(self._slope(arr), t)

    __call__ = eval

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def range_on(self, a: float, b: float) -> tuple[float, float]:
        lo, hi = self.cell_ranges(np.array([a, b], dtype=float))
        return float(lo[0]), float(hi[0])

    def cell_ranges(self, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Exact (min, max) of the profile on every cell ``[edges[i], edges[i+1]]``."""
        edges = np.asarray(edges, dtype=float)
        vals = self._value(_domain(edges, self.upper))
        lo = np.minimum(vals[:-1], vals[1:])
        hi = np.maximum(vals[:-1], vals[1:])
        for bp in self.breakpoints:
            i = int(np.searchsorted(edges, bp, side="right")) - 1
            if 0 <= i < len(edges) - 1 and edges[i] < bp < edges[i + 1]:
                v = float(self._value(np.asarray(bp)))
                lo[i] = min(lo[i], v)
                hi[i] = max(hi[i], v)
        return lo, hi

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class SmoothStep(Profile):
    """0 for ``t <= lo``, 1 for ``t >= hi``, polynomial of degree 2*order+1 between.

    Derivatives of orders 1..``order`` vanish at both knots, so the step is
    C^order.
    """

    lo: float
    hi: float
    order: int = 2

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ConfigurationError(f"SmoothStep needs lo < hi, got {self.lo}, {self.hi}")
        if self.order < 2:
            raise ConfigurationError("SmoothStep order must be >= 2")

    def _value(self, t):
        return smoothstep_poly((t - self.lo) / (self.hi - self.lo), self.order)

    def _slope(self, t):
        width = self.hi - self.lo
        return smoothstep_poly_derivative((t - self.lo) / width, self.order) / width

    @property
    def breakpoints(self):
        return tuple(x for x in (self.lo, self.hi) if x > 0.0)

    def to_dict(self):
        return {"kind": "smooth_step", "lo": self.lo, "hi": self.hi, "order": self.order}


@dataclass(frozen=True)
class BleeckerRamp(Profile):
    """``1 + eps**-3 * t`` on [0, ramp_end), 1 on [plateau_start, inf).

    The gap is bridged by the quintic Hermite interpolant matching value,
    slope and curvature at both ends.  The bridge overshoots slightly
    above ``1 + eps**-3 * ramp_end`` before descending; it never drops
    below 1.
    """

    epsilon: float
    ramp_end: float = 1.0
    plateau_start: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigurationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.ramp_end < self.plateau_start:
            raise ConfigurationError("need 0 < ramp_end < plateau_start")

    @property
    def slope(self) -> float:
        return self.epsilon**-3

    def _bridge(self, s):
        c, h = self.slope, self.plateau_start - self.ramp_end
        v = c * self.ramp_end
        h00 = 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s**2)
        h10 = s - s**3 * (6.0 - 8.0 * s + 3.0 * s**2)
        return 1.0 + v * h00 + c * h * h10

    def _bridge_slope(self, s):
        c, h = self.slope, self.plateau_start - self.ramp_end
        v = c * self.ramp_end
        d00 = -30.0 * s**2 * (1.0 - s) ** 2
        d10 = (1.0 - s) ** 2 * (1.0 + 2.0 * s - 15.0 * s**2)
        return (v * d00 + c * h * d10) / h

    def _value(self, t):
        h = self.plateau_start - self.ramp_end
        s = np.clip((t - self.ramp_end) / h, 0.0, 1.0)
        return np.where(
            t < self.ramp_end,
            1.0 + self.slope * t,
            np.where(t >= self.plateau_start, 1.0, self._bridge(s)),
        )

    def _slope(self, t):
        h = self.plateau_start - self.ramp_end
        s = np.clip((t - self.ramp_end) / h, 0.0, 1.0)
        return np.where(
            t < self.ramp_end,
            self.slope,
            np.where(t >= self.plateau_start, 0.0, self._bridge_slope(s)),
        )

    @property
    def peak(self) -> float:
        """Location of the bridge maximum (the only interior critical point)."""
        c, h = self.slope, self.plateau_start - self.ramp_end
        a = 30.0 * c * self.ramp_end + 15.0 * c * h
        s = (c * h + math.sqrt((c * h) ** 2 + c * h * a)) / a
        return self.ramp_end + s * h

    @property
    def breakpoints(self):
        return (self.ramp_end, self.peak, self.plateau_start)

    def to_dict(self):
        return {
            "kind": "bleecker_ramp",
            "epsilon": self.epsilon,
            "ramp_end": self.ramp_end,
            "plateau_start": self.plateau_start,
        }


@dataclass(frozen=True)
class ConformalStep(Profile):
    """Log conformal factor: 0 on [0, flat_width], ``amplitude`` beyond rise_end."""

    epsilon: float
    rise_end: float
    flat_width: float | None = None
    amplitude: float | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigurationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.flat_width is None:
            object.__setattr__(self, "flat_width", self.epsilon)
        if self.amplitude is None:
            object.__setattr__(self, "amplitude", -2.0 * math.log(self.epsilon))
        if not 0.0 <= self.flat_width < self.rise_end:
            raise ConfigurationError("need 0 <= flat_width < rise_end")
        if self.amplitude < 0.0:
            raise ConfigurationError("amplitude must be nonnegative")

    @property
    def _step(self) -> SmoothStep:
        return SmoothStep(self.flat_width, self.rise_end)

    def _value(self, t):
        return self.amplitude * self._step._value(t)

    def _slope(self, t):
        return self.amplitude * self._step._slope(t)

    @property
    def breakpoints(self):
        return tuple(x for x in (self.flat_width, self.rise_end) if x > 0.0)

    def to_dict(self):
        return {
            "kind": "conformal_step",
            "epsilon": self.epsilon,
            "flat_width": self.flat_width,
            "rise_end": self.rise_end,
            "amplitude": self.amplitude,
        }


@dataclass(frozen=True)
class ConformalPulse(Profile):
    """Conformal step that returns to zero, so its support is [flat_width, fall_end]."""

    epsilon: float
    rise_end: float
    fall_start: float
    fall_end: float
    flat_width: float | None = None
    amplitude: float | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigurationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.flat_width is None:
            object.__setattr__(self, "flat_width", self.epsilon)
        if self.amplitude is None:
            object.__setattr__(self, "amplitude", -2.0 * math.log(self.epsilon))
        if not 0.0 <= self.flat_width < self.rise_end <= self.fall_start < self.fall_end:
            raise ConfigurationError(
                "need 0 <= flat_width < rise_end <= fall_start < fall_end, got "
                f"{self.flat_width}, {self.rise_end}, {self.fall_start}, {self.fall_end}"
            )
        if self.amplitude < 0.0:
            raise ConfigurationError("amplitude must be nonnegative")

    def _value(self, t):
        up = SmoothStep(self.flat_width, self.rise_end)._value(t)
        down = SmoothStep(self.fall_start, self.fall_end)._value(t)
        return self.amplitude * up * (1.0 - down)

    def _slope(self, t):
        up_s, down_s = SmoothStep(self.flat_width, self.rise_end), SmoothStep(self.fall_start, self.fall_end)
        up, down = up_s._value(t), down_s._value(t)
        return self.amplitude * (up_s._slope(t) * (1.0 - down) - up * down_s._slope(t))

    @property
    def breakpoints(self):
        pts = (self.flat_width, self.rise_end, self.fall_start, self.fall_end)
        return tuple(sorted({x for x in pts if x > 0.0}))

    def to_dict(self):
        return {
            "kind": "conformal_pulse",
            "epsilon": self.epsilon,
            "flat_width": self.flat_width,
            "rise_end": self.rise_end,
            "fall_start": self.fall_start,
            "fall_end": self.fall_end,
            "amplitude": self.amplitude,
        }


@dataclass(frozen=True)
class Mirrored(Profile):
    """``inner(min(t, length - t))`` on [0, length]: the same collar at both ends."""

    inner: Profile
    length: float

    def __post_init__(self):
        if self.length <= 0.0:
            raise ConfigurationError("length must be positive")
        object.__setattr__(self, "upper", self.length)
        if any(bp > self.length / 2 for bp in self.inner.breakpoints):
            raise ConfigurationError("inner profile must settle before the midpoint")

    def _value(self, t):
        return self.inner._value(np.minimum(t, self.length - t))

    def _slope(self, t):
        left = t <= self.length / 2
        return np.where(left, 1.0, -1.0) * self.inner._slope(np.minimum(t, self.length - t))

    @property
    def breakpoints(self):
        half = self.length / 2
        pts = set(self.inner.breakpoints) | {self.length - b for b in self.inner.breakpoints} | {half}
        return tuple(sorted(p for p in pts if 0.0 < p < self.length))

    def to_dict(self):
        return {"kind": "mirrored", "length": self.length, "inner": self.inner.to_dict()}


@dataclass(frozen=True)
class Constant(Profile):
    value: float = 0.0

    def _value(self, t):
        return np.full_like(t, self.value, dtype=float)

    def _slope(self, t):
        return np.zeros_like(t, dtype=float)

    def to_dict(self):
        return {"kind": "constant", "value": self.value}


_KINDS = {
    "smooth_step": SmoothStep,
    "bleecker_ramp": BleeckerRamp,
    "conformal_step": ConformalStep,
    "conformal_pulse": ConformalPulse,
    "constant": Constant,
}
_LENGTHS = ("lo", "hi", "ramp_end", "plateau_start", "flat_width", "rise_end", "fall_start", "fall_end")


def profile_from_dict(desc: Mapping[str, Any], epsilon: float | None = None) -> Profile:
    """Build a profile from its JSON description.

    Length parameters may be given absolutely (``"rise_end": 0.25``) or as
    multiples of epsilon (``"rise_end_eps": 2``).  ``epsilon`` fills in the
    epsilon field when the description leaves it out (sweeps).
    """
    desc = dict(desc)
    kind = desc.pop("kind", None)
    if kind == "mirrored":
        inner = profile_from_dict(desc["inner"], epsilon)
        return Mirrored(inner, float(desc["length"]))
    if kind not in _KINDS:
        raise ConfigurationError(f"unknown profile kind {kind!r}")
    cls = _KINDS[kind]
    eps = desc.pop("epsilon", epsilon)
    kwargs: dict[str, Any] = {}
    for key, value in desc.items():
        if key.endswith("_eps") and key[:-4] in _LENGTHS:
            if eps is None:
                raise ConfigurationError(f"{key} needs an epsilon")
            kwargs[key[:-4]] = float(value) * float(eps)
        else:
            kwargs[key] = value
    if cls in (BleeckerRamp, ConformalStep, ConformalPulse):
        if eps is None:
            raise ConfigurationError(f"{kind} needs an epsilon")
        kwargs["epsilon"] = float(eps)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for {kind}: {exc}") from None
