"""Cross-section spectra: circles, flat tori and the Berger deformation of S^3.

A family exposes its Laplace eigenmodes with eigenfunctions that do not
depend on the deformation parameter ``t``.  For the Berger sphere the
metric ``t^-1 g + (t^n - t^-1) eta (x) eta`` with ``n = dim - 1 = 2`` keeps
the volume form fixed and scales the horizontal Laplacian by ``t`` and the
fibre part by ``t^-n``, so a mode of degree ``k`` and fibre weight ``m``
has eigenvalue ``t (k(k+2) - m^2) + m^2 / t^2``.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.linalg import null_space

from .errors import ConfigurationError, DomainError, NumericError, ResourceError

__all__ = [
    "Mode",
    "BoundaryModeFamily",
    "Circle",
    "FlatTorus",
    "BergerS3",
    "EigenvalueBound",
    "berger_mu",
    "berger_oracle",
    "write_oracle_csv",
    "lambda2_bleecker",
    "expand_multiplicities",
    "family_from_dict",
]

DEFAULT_MODE_BUDGET = 100_000
ORACLE_KMAX = 8


@dataclass(frozen=True)
class EigenvalueBound:
    """``mu(s) = linear * s + inverse * s**-exponent`` (constant when both vanish).

    Used both for exact Berger eigenvalues and for lower envelopes over
    all modes above a threshold.  Convex in ``s > 0``.
    """

    constant: float = 0.0
    linear: float = 0.0
    inverse: float = 0.0
    exponent: int = 2

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = self.constant + self.linear * s + self.inverse * s ** (-self.exponent)
        return float(out) if out.ndim == 0 else out

    @property
    def static(self) -> bool:
        return self.linear == 0.0 and self.inverse == 0.0

    def minimum_on(self, lo, hi):
        """Exact minimum over ``s`` in ``[lo, hi]`` (elementwise, ``lo > 0``)."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.static:
            return np.full(np.broadcast(lo, hi).shape, self.constant)
        if self.linear > 0.0 and self.inverse > 0.0:
            star = (self.exponent * self.inverse / self.linear) ** (1.0 / (self.exponent + 1))
            s = np.clip(star, lo, hi)
        elif self.linear >= 0.0 and self.inverse <= 0.0:
            s = lo
        else:
            s = hi
        return np.asarray(self(s))


@dataclass(frozen=True)
class Mode:
    id: int
    label: tuple
    multiplicity: int
    component: str
    mu1: float
    eigenvalue_fn: EigenvalueBound

    def eigenvalue(self, t=1.0):
        return self.eigenvalue_fn(t)

    @property
    def is_zero(self) -> bool:
        return self.mu1 == 0.0 and self.eigenvalue_fn.static

    def label_str(self) -> str:
        inner = ",".join(str(x) for x in self.label)
        return f"({inner})"


def expand_multiplicities(modes: Iterable[Mode], t: float = 1.0) -> list[float]:
    out: list[float] = []
    for mode in modes:
        out.extend([float(mode.eigenvalue(t))] * mode.multiplicity)
    return out


@dataclass(frozen=True)
class BoundaryModeFamily:
    """Base class; subclasses provide ``_labels(cap)`` in any order."""

    component: str = field(default="sigma", kw_only=True)
    mode_budget: int = field(default=DEFAULT_MODE_BUDGET, kw_only=True)

    dim: int = field(init=False, default=1)
    t_dependent: bool = field(init=False, default=False)

    @property
    def total_volume(self) -> float:
        return float(sum(self.component_volumes))

    @property
    def component_volumes(self) -> list[float]:
        return [self.volume]

    @property
    def volume(self) -> float:
        raise NotImplementedError

    def _labels(self, cap: float) -> Iterable[tuple[tuple, int, EigenvalueBound, float]]:
        raise NotImplementedError

    def _count_bound(self, cap: float) -> int:
        raise NotImplementedError

    def enumerate_modes(self, cap: float) -> list[Mode]:
        """All modes with ``mu(1) <= cap`` sorted by ``(mu(1), label)``."""
        if not cap > 0:
            raise DomainError("cap must be positive")
        if self._count_bound(cap) > self.mode_budget:
            raise ResourceError(
                f"enumerating modes up to cap {cap:g} exceeds the mode budget "
                f"of {self.mode_budget}; lower the cap or raise mode_budget"
            )
        raw = sorted(
            ((mu1, label, mult, fn) for label, mult, fn, mu1 in self._labels(cap) if mu1 <= cap),
            key=lambda item: (item[0], item[1]),
        )
        if len(raw) > self.mode_budget:
            raise ResourceError(f"{len(raw)} modes exceed the mode budget of {self.mode_budget}")
        return [
            Mode(i, label, mult, self.component, mu1, fn) for i, (mu1, label, mult, fn) in enumerate(raw)
        ]

    def lower_envelope(self, threshold: float) -> EigenvalueBound:
        """Pointwise lower bound on ``mu(s)``, ``s >= 1``, for every mode with ``mu(1) >= threshold``."""
        return EigenvalueBound(constant=max(threshold, 0.0))

    def first_nonzero_mu1(self) -> float:
        cap = 1.0
        while True:
            vals = [m.mu1 for m in self.enumerate_modes(cap) if not m.is_zero]
            if vals:
                return min(vals)
            cap *= 4.0

    def sharp_linear_rate(self) -> float:
        """Largest delta with ``lambda_2(t) >= delta * t`` for ``t >= 1``."""
        raise ConfigurationError(f"{type(self).__name__} has t-independent eigenvalues")

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Circle(BoundaryModeFamily):
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigurationError("radius must be positive")
        object.__setattr__(self, "dim", 1)

    @property
    def volume(self):
        return 2.0 * math.pi * self.radius

    def _kmax(self, cap):
        return int(math.floor(self.radius * math.sqrt(cap))) + 1

    def _count_bound(self, cap):
        return 2 * self._kmax(cap) + 1

    def _labels(self, cap):
        kmax = self._kmax(cap)
        for k in range(-kmax, kmax + 1):
            mu = (k / self.radius) ** 2
            yield (k,), 1, EigenvalueBound(constant=mu), mu

    def to_dict(self):
        return {"kind": "circle", "radius": self.radius}


@dataclass(frozen=True)
class FlatTorus(BoundaryModeFamily):
    edges: tuple[float, ...] = (1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(float(e) for e in self.edges))
        if not self.edges or any(e <= 0 for e in self.edges):
            raise ConfigurationError("torus edge lengths must be positive")
        object.__setattr__(self, "dim", len(self.edges))

    @property
    def volume(self):
        return float(np.prod(self.edges))

    def _ranges(self, cap):
        return [int(math.floor(a * math.sqrt(cap) / (2 * math.pi))) for a in self.edges]

    def _count_bound(self, cap):
        return int(np.prod([2 * r + 1 for r in self._ranges(cap)]))

    def _labels(self, cap):
        ranges = [range(-r, r + 1) for r in self._ranges(cap)]
        for freq in itertools.product(*ranges):
            mu = sum((2 * math.pi * k / a) ** 2 for k, a in zip(freq, self.edges))
            yield tuple(freq), 1, EigenvalueBound(constant=mu), mu

    def to_dict(self):
        return {"kind": "flat_torus", "edges": list(self.edges)}


def _check_berger_label(k: int, m: int):
    if k < 0 or abs(m) > k or (k - m) % 2:
        raise DomainError(f"need k >= 0, |m| <= k, k - m even; got k={k}, m={m}")


def berger_bound(k: int, m: int) -> EigenvalueBound:
    _check_berger_label(k, m)
    return EigenvalueBound(linear=float(k * (k + 2) - m * m), inverse=float(m * m), exponent=2)


def berger_mu(k: int, m: int, t: float) -> float:
    """Eigenvalue of the Berger mode ``(k, m)`` at parameter ``t``."""
    if not t > 0:
        raise DomainError("t must be positive")
    return float(berger_bound(k, m)(t))


@dataclass(frozen=True)
class BergerS3(BoundaryModeFamily):
    """Unit round S^3 with the Hopf-fibre deformation (``n = 2``)."""

    def __post_init__(self):
        object.__setattr__(self, "dim", 3)
        object.__setattr__(self, "t_dependent", True)

    @property
    def fiber_exponent(self) -> int:
        return self.dim - 1

    @property
    def volume(self):
        return 2.0 * math.pi**2

    def _kmax(self, cap):
        return int(math.floor(math.sqrt(cap + 1.0) - 1.0))

    def _count_bound(self, cap):
        kmax = self._kmax(cap)
        return (kmax + 1) * (kmax + 2) // 2

    def _labels(self, cap):
        for k in range(self._kmax(cap) + 1):
            for m in range(-k, k + 1, 2):
                yield (k, m), k + 1, berger_bound(k, m), float(k * (k + 2))

    def lower_envelope(self, threshold):
        # mu(s; k, m) >= 2 k s + k^2 / s^2 for s >= 1, increasing in k
        k = max(0, math.ceil(math.sqrt(max(threshold, 0.0) + 1.0) - 1.0 - 1e-12))
        if k == 0:
            return EigenvalueBound()
        return EigenvalueBound(linear=2.0 * k, inverse=float(k * k), exponent=2)

    def sharp_linear_rate(self):
        # k(k+2) - m^2 >= 2k >= 2 over nonzero modes, attained at (1, +-1)
        modes = [m for m in self.enumerate_modes(8.0) if not m.is_zero]
        return min(m.eigenvalue_fn.linear for m in modes)

    def to_dict(self):
        return {"kind": "berger_s3"}


def family_from_dict(desc: dict) -> BoundaryModeFamily:
    desc = dict(desc)
    kind = desc.pop("kind", None)
    try:
        if kind == "circle":
            return Circle(**desc)
        if kind == "flat_torus":
            return FlatTorus(edges=tuple(desc.pop("edges", (1.0, 1.0))), **desc)
        if kind == "berger_s3":
            return BergerS3(**desc)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for {kind}: {exc}") from None
    raise ConfigurationError(f"unknown boundary family {kind!r}")


def lambda2_bleecker(t: float) -> float:
    """First nonzero Laplace eigenvalue of the Berger family at ``t >= 1``.

    Search over degrees stops once ``2 k t`` (a lower bound for every mode
    of degree ``k`` and all larger degrees) reaches the current minimum.
    """
    if not t >= 1.0:
        raise DomainError("lambda2_bleecker needs t >= 1")
    best = math.inf
    k = 1
    while 2.0 * k * t < best:
        for m in range(-k, k + 1, 2):
            best = min(best, berger_mu(k, m, t))
        k += 1
    return best


# -- harmonic polynomial oracle ---------------------------------------------


def _monomials(degree: int) -> list[tuple[int, int, int, int]]:
    """Exponents (a, b, c, d) of z1^a z2^b zbar1^c zbar2^d with total degree ``degree``."""
    return [
        (a, b, c, degree - a - b - c)
        for a in range(degree + 1)
        for b in range(degree + 1 - a)
        for c in range(degree + 1 - a - b)
    ]


def _laplacian_matrix(degree: int) -> np.ndarray:
    # Delta_R4 = 4 (d_z1 d_zbar1 + d_z2 d_zbar2)
    src = _monomials(degree)
    dst = _monomials(degree - 2) if degree >= 2 else []
    index = {mono: i for i, mono in enumerate(dst)}
    mat = np.zeros((len(dst), len(src)))
    for j, (a, b, c, d) in enumerate(src):
        if a and c:
            mat[index[(a - 1, b, c - 1, d)], j] += 4.0 * a * c
        if b and d:
            mat[index[(a, b - 1, c, d - 1)], j] += 4.0 * b * d
    return mat


def berger_oracle(k_max: int) -> list[tuple[int, int, int, float]]:
    """Brute-force fibre-weight decomposition of degree-k spherical harmonics on S^3.

    For each degree ``k <= k_max`` the space of harmonic homogeneous
    polynomials on C^2 = R^4 is computed as a numerical null space of the
    Euclidean Laplacian on the monomial basis.  The Hopf field acts on a
    monomial ``z^a zbar^c`` as ``i (|a| - |c|)``; its restriction to the
    harmonic space is diagonalized to read off weights ``m`` and their
    multiplicities.  Round-sphere eigenvalues come from the radial split
    of the Euclidean Laplacian: ``k (k + 4 - 2)``.

    Returns rows ``(k, m, multiplicity, mu1)``.
    """
    if k_max > ORACLE_KMAX:
        raise ResourceError(f"berger_oracle is dense; k_max <= {ORACLE_KMAX}, got {k_max}")
    if k_max < 0:
        raise DomainError("k_max must be nonnegative")
    rows = []
    for k in range(k_max + 1):
        monos = _monomials(k)
        if k >= 2:
            basis = null_space(_laplacian_matrix(k))
        else:
            basis = np.eye(len(monos))
        weight = np.array([a + b - c - d for a, b, c, d in monos], dtype=float)
        # -i xi is diagonal on monomials; restrict to the harmonic subspace
        restricted = basis.T @ (weight[:, None] * basis)
        eig = np.linalg.eigvalsh(0.5 * (restricted + restricted.T))
        weights, counts = np.unique(np.rint(eig).astype(int), return_counts=True)
        if np.max(np.abs(eig - np.rint(eig))) > 1e-8:
            raise NumericError("fibre weights are not integral")
        mu1 = float(k * (k + 2))
        for m, c in zip(weights, counts):
            rows.append((k, int(m), int(c), mu1))
    return rows


def write_oracle_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "m", "multiplicity", "mu1"])
        for k, m, mult, mu1 in rows:
            writer.writerow([k, m, mult, f"{mu1:.12e}"])
