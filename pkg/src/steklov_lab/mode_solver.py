"""Separable collar problems reduced to one weighted Sturm-Liouville problem per mode.

On ``Sigma x [0, L]`` with a metric whose cross-section eigenfunctions do
not depend on ``t``, a harmonic function splits into modes
``a(t) phi(x)`` and the Dirichlet energy of a mode becomes

    integral_0^L  w(t) a'(t)^2 + q(t) a(t)^2  dt,

with flux weight ``w`` and potential ``q`` determined by the collar:

* Berger collar ``g_Sigma(f(t)) + dt^2``: ``w = 1``, ``q = mu_mode(f(t))``;
* conformal cylinder ``exp(2 delta(t)) (g_Sigma + dt^2)`` of dimension
  ``n + 1``: ``w = exp((n - 1) delta)``, ``q = lambda_mode * w``.

The Steklov end at ``t = 0`` carries point mass ``exp(n delta(0))``.
A mixed problem (Neumann or Dirichlet at ``t = L``) has exactly one
Steklov eigenvalue per mode, the Dirichlet-to-Neumann value, computed by
integrating a Riccati equation backwards from ``t = L``.  A two-ended
Steklov problem has two per mode, computed with 1D P1 elements.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.integrate import quad, solve_ivp, trapezoid
from scipy.linalg import eigh_tridiagonal, solve_banded

from .boundary_modes import BoundaryModeFamily, EigenvalueBound, Mode
from .collar_profiles import Profile
from .errors import ConfigurationError, DomainError, NumericError, ResourceError

__all__ = [
    "Steklov",
    "Neumann",
    "Dirichlet",
    "ReducedModeProblem",
    "BleeckerCollar",
    "ConformalCylinder",
    "CollarScenario",
    "SteklovSpectrum",
    "Provenance",
    "reduce",
    "dtn_value",
    "mode_eigenvalues",
    "steklov_spectrum",
    "neumann_gap",
    "collar_volume",
    "mode_lower_bound",
    "constant_problem",
    "graded_grid",
]

log = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
DEFAULT_CELLS = 2048
STIFF_POTENTIAL = 1e9


@dataclass(frozen=True)
class Steklov:
    boundary_mass: float = 1.0

    def __post_init__(self):
        if not self.boundary_mass > 0:
            raise ConfigurationError("boundary_mass must be positive")


@dataclass(frozen=True)
class Neumann:
    pass


@dataclass(frozen=True)
class Dirichlet:
    pass


EndCondition = Union[Steklov, Neumann, Dirichlet]


# -- coefficient callables (picklable, vectorized) ----------------------------


@dataclass(frozen=True)
class ConstantCoefficient:
    value: float

    def __call__(self, t):
        return self.value + 0.0 * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class ConformalWeight:
    """``exp(power * delta(t))``."""

    profile: Profile
    power: float

    def __call__(self, t):
        return np.exp(self.power * np.asarray(self.profile.eval(t)))


@dataclass(frozen=True)
class Scaled:
    inner: Callable
    factor: float

    def __call__(self, t):
        return self.factor * np.asarray(self.inner(t))


@dataclass(frozen=True)
class BleeckerPotential:
    """``mu_mode(f(t))`` for a Berger mode on the collar ``g_Sigma(f(t)) + dt^2``."""

    profile: Profile
    eigenvalue: EigenvalueBound

    def __call__(self, t):
        return np.asarray(self.eigenvalue(np.asarray(self.profile.eval(t))))


@dataclass(frozen=True)
class ReducedModeProblem:
    length: float
    flux_weight: Callable
    potential: Callable
    left_bc: Steklov = Steklov()
    right_bc: EndCondition = Neumann()
    grid_size: int = DEFAULT_CELLS
    breakpoints: tuple[float, ...] = ()
    volume_weight: Callable | None = None
    label: str = ""

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigurationError("length must be positive")
        if not isinstance(self.left_bc, Steklov):
            raise ConfigurationError("the left end must be a Steklov end")

    def coefficients(self, t):
        w = np.asarray(self.flux_weight(t), dtype=float)
        q = np.asarray(self.potential(t), dtype=float)
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(q))):
            bad = np.atleast_1d(t)[~(np.isfinite(np.atleast_1d(w)) & np.isfinite(np.atleast_1d(q)))]
            raise NumericError(f"non-finite coefficient at t={float(bad[0]):.6g}")
        if np.any(w <= 0):
            raise NumericError(f"flux weight must be positive, t={t}")
        return w, q

    def interior_breakpoints(self) -> list[float]:
        return sorted({float(b) for b in self.breakpoints if 0.0 < b < self.length})


def constant_problem(w: float, q: float, length: float, right_bc: EndCondition = Neumann(), **kw) -> ReducedModeProblem:
    return ReducedModeProblem(length, ConstantCoefficient(w), ConstantCoefficient(q), right_bc=right_bc, **kw)


# -- scenarios ----------------------------------------------------------------


def _end_condition(name: str, mass: float) -> EndCondition:
    name = name.lower()
    if name == "neumann":
        return Neumann()
    if name == "dirichlet":
        return Dirichlet()
    if name == "steklov":
        return Steklov(mass)
    raise ConfigurationError(f"unknown end condition {name!r}")


@dataclass(frozen=True)
class BleeckerCollar:
    """Collar ``g_Sigma(f(t)) + dt^2`` over a Berger family; Neumann end stands in for the cap."""

    profile: Profile
    length: float = 3.0
    right_end: str = "neumann"


@dataclass(frozen=True)
class ConformalCylinder:
    """Cylinder ``exp(2 delta(t)) (g_Sigma + dt^2)`` of dimension ``ambient_dim``."""

    profile: Profile
    ambient_dim: int
    length: float = 1.0
    right_end: str = "neumann"


@dataclass(frozen=True)
class CollarScenario:
    family: BoundaryModeFamily
    kind: Union[BleeckerCollar, ConformalCylinder]
    mode_cap: float = 16.0
    grid_size: int = DEFAULT_CELLS

    def __post_init__(self):
        if isinstance(self.kind, BleeckerCollar):
            if not self.family.t_dependent:
                raise ConfigurationError("a Bleecker collar needs a t-dependent family (BergerS3)")
            if float(self.kind.profile.eval(0.0)) != 1.0:
                raise ConfigurationError("the Bleecker profile must equal 1 at the boundary")
        elif isinstance(self.kind, ConformalCylinder):
            if self.family.t_dependent:
                raise ConfigurationError("a conformal cylinder needs a t-independent family")
            if self.kind.ambient_dim != self.family.dim + 1:
                raise ConfigurationError(
                    f"ambient_dim {self.kind.ambient_dim} does not match cross-section dim {self.family.dim}"
                )
        else:
            raise ConfigurationError(f"unknown collar kind {self.kind!r}")
        _end_condition(self.kind.right_end, 1.0)

    @property
    def length(self) -> float:
        return self.kind.length

    @property
    def profile(self) -> Profile:
        return self.kind.profile

    @property
    def two_ended(self) -> bool:
        return self.kind.right_end.lower() == "steklov"

    def with_profile(self, profile: Profile) -> "CollarScenario":
        kind = type(self.kind)(**{**self.kind.__dict__, "profile": profile})
        return CollarScenario(self.family, kind, self.mode_cap, self.grid_size)

    def boundary_masses(self) -> tuple[float, float]:
        if isinstance(self.kind, BleeckerCollar):
            return 1.0, 1.0
        n = self.family.dim
        delta = self.profile
        return math.exp(n * delta.eval(0.0)), math.exp(n * delta.eval(self.length))


def reduce(scenario: CollarScenario, mode: Mode) -> ReducedModeProblem:
    """Per-mode Sturm-Liouville problem of a separable collar."""
    fam = scenario.family
    if mode.component != fam.component or mode.eigenvalue_fn.static == fam.t_dependent and not mode.is_zero:
        raise ConfigurationError(f"mode {mode.label} does not belong to {type(fam).__name__}")
    kind = scenario.kind
    m0, m1 = scenario.boundary_masses()
    right = _end_condition(kind.right_end, m1)
    bps = tuple(kind.profile.breakpoints)
    label = mode.label_str()
    if isinstance(kind, BleeckerCollar):
        return ReducedModeProblem(
            kind.length,
            ConstantCoefficient(1.0),
            BleeckerPotential(kind.profile, mode.eigenvalue_fn),
            Steklov(m0),
            right,
            scenario.grid_size,
            bps,
            ConstantCoefficient(1.0),
            label,
        )
    n = fam.dim
    w = ConformalWeight(kind.profile, n - 1.0)
    return ReducedModeProblem(
        kind.length,
        w,
        Scaled(w, float(mode.mu1)),
        Steklov(m0),
        right,
        scenario.grid_size,
        bps,
        ConformalWeight(kind.profile, n + 1.0),
        label,
    )


# -- mixed problems: Riccati ---------------------------------------------------


def _check_grid(problem: ReducedModeProblem):
    if problem.grid_size < 64:
        raise DomainError("grid_size must be at least 64")


def dtn_value(problem: ReducedModeProblem, rtol: float = DEFAULT_RTOL) -> float:
    """Dirichlet-to-Neumann value at ``t = 0`` for a Neumann or Dirichlet far end.

    With ``rho = -w a'/a`` the mode equation ``(w a')' = q a`` becomes
    ``rho' = rho^2 / w - q``, integrated from ``rho(L) = 0`` down to 0.
    For a Dirichlet end ``eta = 1/rho`` obeys ``eta' = q eta^2 - 1/w`` with
    ``eta(L) = 0``.  Both are stable in the backward direction and stay
    bounded where ``a`` itself would overflow.
    """
    _check_grid(problem)
    right = problem.right_bc
    if isinstance(right, Steklov):
        raise DomainError("dtn_value needs a Neumann or Dirichlet far end; use mode_eigenvalues")
    dirichlet = isinstance(right, Dirichlet)
    L = problem.length

    def rhs(t, y):
        w, q = problem.coefficients(t)
        if q < 0:
            raise DomainError(f"potential must be nonnegative, q({t:.6g}) = {float(q):.6g}")
        if dirichlet:
            return [q * y[0] ** 2 - 1.0 / w]
        return [y[0] ** 2 / w - q]

    knots = [L] + problem.interior_breakpoints()[::-1] + [0.0]
    y = 0.0
    for hi, lo in zip(knots[:-1], knots[1:]):
        if hi - lo <= 0:
            continue
        sol = solve_ivp(
            rhs,
            (hi, lo),
            [y],
            method="DOP853",
            rtol=rtol,
            atol=1e-14,
            max_step=L / 64,
        )
        if not sol.success:
            raise NumericError(f"Riccati integration failed on [{lo:.6g}, {hi:.6g}]: {sol.message}")
        y = float(sol.y[0, -1])
        if not math.isfinite(y):
            raise NumericError(f"Riccati variable diverged near t={lo:.6g}")
    value = 1.0 / y if dirichlet else y
    sigma = value / problem.left_bc.boundary_mass
    if sigma < 0:
        if sigma > -1e-12:
            return 0.0
        raise NumericError(f"negative DtN value {sigma}")
    return sigma


# -- two-ended problems: 1D P1 elements ---------------------------------------


def graded_grid(problem: ReducedModeProblem, cells: int | None = None) -> np.ndarray:
    """Nodes equidistributing boundary-layer and weight-variation error.

    Density is the sum of a uniform part, ``kappa^(4/3) exp(-2 kappa d / 3)``
    at each end (``kappa = sqrt(q/w)`` there, ``d`` the distance to the
    end) and ``|d log w / dt|``.  The uniform part always holds at least an
    eighth of the nodes.
    """
    cells = cells or problem.grid_size
    L = problem.length
    s = np.linspace(0.0, L, 8193)
    w, q = problem.coefficients(s)
    w = np.broadcast_to(w, s.shape)
    q = np.broadcast_to(q, s.shape)
    k0 = math.sqrt(max(q[0], 0.0) / w[0])
    k1 = math.sqrt(max(q[-1], 0.0) / w[-1])
    dens = k0 ** (4 / 3) * np.exp(-2 * k0 * s / 3) + k1 ** (4 / 3) * np.exp(-2 * k1 * (L - s) / 3)
    dens = dens + np.abs(np.gradient(np.log(w), s))
    feature = trapezoid(dens, s)
    dens = dens + max(1.0, feature / 7.0) / L
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(s))])
    nodes = np.interp(np.linspace(0.0, cum[-1], cells + 1), cum, s)
    nodes[0], nodes[-1] = 0.0, L
    return nodes


def _assemble_1d(problem: ReducedModeProblem, nodes: np.ndarray):
    h = np.diff(nodes)
    if np.any(h <= 0):
        raise NumericError("degenerate 1D grid")
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    w, q = problem.coefficients(mid)
    w = np.broadcast_to(w, mid.shape)
    q = np.broadcast_to(q, mid.shape)
    if np.any(q < 0):
        raise DomainError("potential must be nonnegative")
    diag = np.zeros(len(nodes))
    diag[:-1] += w / h + q * h / 3
    diag[1:] += w / h + q * h / 3
    off = -w / h + q * h / 6
    return diag, off


def _two_point(problem: ReducedModeProblem, nodes: np.ndarray):
    diag, off = _assemble_1d(problem, nodes)
    n = len(nodes) - 1
    ab = np.zeros((3, n - 1))
    ab[0, 1:] = off[1:-1]
    ab[1, :] = diag[1:-1]
    ab[2, :-1] = off[1:-1]
    coupling = np.zeros((n - 1, 2))
    coupling[0, 0] = off[0]
    coupling[-1, 1] += off[-1]
    try:
        x = solve_banded((1, 1), ab, coupling)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"interior solve failed: {exc}") from None
    schur = np.diag([diag[0], diag[-1]]) - coupling.T @ x
    schur = 0.5 * (schur + schur.T)
    masses = np.array([problem.left_bc.boundary_mass, problem.right_bc.boundary_mass])
    scale = 1.0 / np.sqrt(masses)
    vals, vecs = np.linalg.eigh(scale[:, None] * schur * scale[None, :])
    # Schur round-off scales with the largest stiffness entry
    tol = 1e3 * np.finfo(float).eps * float(np.max(np.abs(diag))) / float(masses.min())
    if vals[0] < -tol:
        raise NumericError(f"negative two-point eigenvalue {vals}")
    vals = np.where(np.abs(vals) <= tol, 0.0, vals)
    return vals, scale[:, None] * vecs, x


def mode_eigenvalues(
    problem: ReducedModeProblem,
    *,
    nodes: np.ndarray | None = None,
    extrapolate: bool = True,
    return_vectors: bool = False,
):
    """The two Steklov eigenvalues of a mode with Steklov conditions at both ends.

    Interior unknowns of the P1 system are eliminated, leaving a 2x2
    symmetric pencil against the diagonal boundary masses.  With
    ``extrapolate`` the values on the grid and on its every-other-node
    subgrid are combined as ``(4 fine - coarse) / 3``, cancelling the
    ``h^2`` term.  Eigenvectors always come from the fine grid.
    """
    _check_grid(problem)
    if not isinstance(problem.right_bc, Steklov):
        raise DomainError("mode_eigenvalues needs a Steklov far end")
    if nodes is None:
        nodes = graded_grid(problem)
    nodes = np.asarray(nodes, dtype=float)
    vals, ends, x = _two_point(problem, nodes)
    if extrapolate and (len(nodes) - 1) % 2 == 0:
        coarse, _, _ = _two_point(problem, nodes[::2])
        vals = np.where(vals == 0.0, 0.0, (4.0 * vals - coarse) / 3.0)
    if not return_vectors:
        return float(vals[0]), float(vals[1])
    full = np.zeros((len(nodes), 2))
    full[0], full[-1] = ends[0], ends[1]
    full[1:-1] = -x @ ends
    return (float(vals[0]), float(vals[1])), nodes, full


# -- certified lower bounds ----------------------------------------------------


def _propagate(rho: float, h: float, w: float, q: float) -> float:
    """Admittance at the left of a constant-coefficient cell given the admittance at its right."""
    if q <= 0.0:
        if math.isinf(rho):
            return w / h
        return rho / (1.0 + rho * h / w)
    c = math.sqrt(q * w)
    th = math.tanh(math.sqrt(q / w) * h)
    if math.isinf(rho):
        return c / th
    x = rho / c
    return c * (x + th) / (1.0 + x * th)


def _chain(h: np.ndarray, w: np.ndarray, q: np.ndarray, rho_end: float) -> float:
    rho = rho_end
    for i in range(len(h) - 1, -1, -1):
        rho = _propagate(rho, h[i], w[i], q[i])
    return rho


def _bound_edges(scenario: CollarScenario) -> np.ndarray:
    L = scenario.length
    near = L * np.geomspace(1e-7, 0.05, 160)
    parts = [np.linspace(0.0, L, 2049), near, L - near, np.array(scenario.profile.breakpoints, dtype=float)]
    edges = np.unique(np.clip(np.concatenate(parts), 0.0, L))
    return edges


def _lower_cells(scenario: CollarScenario, env: EigenvalueBound, edges: np.ndarray):
    lo, hi = scenario.profile.cell_ranges(edges)
    if isinstance(scenario.kind, BleeckerCollar):
        w = np.ones_like(lo)
        q = np.asarray(env.minimum_on(np.maximum(lo, 1.0), np.maximum(hi, 1.0)))
    else:
        n = scenario.family.dim
        w = np.exp((n - 1.0) * lo)
        q = env.constant * w
    return w, q


def _bound_from_envelope(scenario: CollarScenario, env: EigenvalueBound) -> float:
    edges = _bound_edges(scenario)
    h = np.diff(edges)
    w, q = _lower_cells(scenario, env, edges)
    m0, m1 = scenario.boundary_masses()
    right = scenario.kind.right_end.lower()
    if right == "steklov":
        mid = int(np.searchsorted(edges, scenario.length / 2))
        left = _chain(h[:mid], w[:mid], q[:mid], 0.0) / m0
        rest = _chain(h[mid:][::-1], w[mid:][::-1], q[mid:][::-1], 0.0) / m1
        return min(left, rest)
    rho_end = math.inf if right == "dirichlet" else 0.0
    return _chain(h, w, q, rho_end) / m0


def mode_lower_bound(scenario: CollarScenario, mode: Mode) -> float:
    """Certified lower bound on the smallest Steklov value contributed by ``mode``."""
    return _bound_from_envelope(scenario, mode.eigenvalue_fn)


def _remaining_bound(scenario: CollarScenario, threshold: float) -> float:
    return _bound_from_envelope(scenario, scenario.family.lower_envelope(threshold))


# -- spectra -------------------------------------------------------------------


@dataclass(frozen=True)
class Provenance:
    mode_id: int
    mode_label: str
    which: str  # "first" | "second"
    slot: int


@dataclass
class SteklovSpectrum:
    values: np.ndarray
    provenance: list[Provenance]
    truncation_bound: float
    modes_used: int = 0

    def __len__(self):
        return len(self.values)

    def sigma(self, k: int) -> float:
        """1-based: ``sigma(1)`` is the smallest eigenvalue."""
        return float(self.values[k - 1])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["index", "sigma", "mode_label", "multiplicity_slot", "truncation_bound"])
            for i, (v, p) in enumerate(zip(self.values, self.provenance), start=1):
                writer.writerow([i, f"{v:.12e}", f"{p.mode_label}:{p.which}", p.slot, f"{self.truncation_bound:.12e}"])


def _mode_values(scenario: CollarScenario, mode: Mode) -> tuple[float, ...]:
    problem = reduce(scenario, mode)
    if isinstance(scenario.kind, BleeckerCollar):
        peak = float(np.max(problem.potential(np.linspace(0, scenario.length, 1025))))
        if peak > STIFF_POTENTIAL:
            log.warning("potential reaches %.3g for mode %s; the Riccati solve is stiff", peak, problem.label)
    if isinstance(problem.right_bc, Steklov):
        return mode_eigenvalues(problem)
    return (dtn_value(problem),)


def steklov_spectrum(scenario: CollarScenario, count: int) -> SteklovSpectrum:
    """The ``count`` smallest Steklov (or mixed) eigenvalues of a separable collar.

    Modes are visited in increasing ``mu(1)``.  Before each mode, a lower
    bound valid for it and every later mode is evaluated from constant
    coefficients on a fine partition (each cell uses the infimum of the
    weight and of the family's eigenvalue envelope there).  The sweep stops
    once that bound exceeds the current ``count``-th value; the bound is
    returned as ``truncation_bound``.
    """
    if count < 1:
        raise DomainError("count must be at least 1")
    cache: dict[int, tuple[float, ...]] = {}
    cap = scenario.mode_cap
    while True:
        try:
            modes = scenario.family.enumerate_modes(cap)
        except ResourceError as exc:
            raise ResourceError(
                f"mode budget exhausted before the truncation certificate was reached ({exc}); "
                "raise mode_budget or start from a larger mode_cap"
            ) from None
        entries: list[tuple[float, int, int, int, str]] = []
        bound = None
        for mode in modes:
            if len(entries) >= count:
                kth = sorted(e[0] for e in entries)[count - 1]
                candidate = _remaining_bound(scenario, mode.mu1)
                if candidate > kth:
                    bound = candidate
                    break
            if mode.id not in cache:
                cache[mode.id] = _mode_values(scenario, mode)
            for which, value in enumerate(cache[mode.id]):
                for slot in range(mode.multiplicity):
                    entries.append((value, mode.id, which, slot, mode.label_str()))
        else:
            if len(entries) >= count:
                kth = sorted(e[0] for e in entries)[count - 1]
                candidate = _remaining_bound(scenario, math.nextafter(cap, math.inf))
                if candidate > kth:
                    bound = candidate
        if bound is not None:
            break
        cap *= 4.0
    entries.sort(key=lambda e: (e[0], e[1], e[2], e[3]))
    chosen = entries[:count]
    values = np.array([e[0] for e in chosen])
    prov = [Provenance(e[1], e[4], ("first", "second")[e[2]], e[3]) for e in chosen]
    return SteklovSpectrum(values, prov, float(bound), modes_used=len(cache))


# -- Neumann gap and volume ----------------------------------------------------


def _restricted(problem: ReducedModeProblem, t0: float, t1: float):
    def shift(fn):
        return lambda s: fn(np.asarray(s) + t0)

    vw = problem.volume_weight or ConstantCoefficient(1.0)
    return shift(problem.flux_weight), shift(problem.potential), shift(vw)


def _neumann_eigs(w_fn, q_fn, v_fn, length: float, cells: int, count: int) -> np.ndarray:
    nodes = np.linspace(0.0, length, cells + 1)
    h = np.diff(nodes)
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    w = np.broadcast_to(np.asarray(w_fn(mid), dtype=float), mid.shape)
    q = np.broadcast_to(np.asarray(q_fn(mid), dtype=float), mid.shape)
    v = np.broadcast_to(np.asarray(v_fn(mid), dtype=float), mid.shape)
    # lumped potential and mass keep the pencil tridiagonal against a diagonal mass
    diag = np.zeros(cells + 1)
    diag[:-1] += w / h + q * h / 2
    diag[1:] += w / h + q * h / 2
    off = -w / h
    mass = np.zeros(cells + 1)
    mass[:-1] += v * h / 2
    mass[1:] += v * h / 2
    s = 1.0 / np.sqrt(mass)
    return eigh_tridiagonal(diag * s * s, off * s[:-1] * s[1:], select="i", select_range=(0, count - 1))[0]


def neumann_gap(
    scenario: CollarScenario,
    t0: float,
    t1: float,
    include_cross_modes: bool = True,
    cells: int | None = None,
) -> float:
    """First positive Neumann Laplace eigenvalue of ``Sigma x [t0, t1]``.

    The axial candidate is the second eigenvalue of the zero mode; the
    cross-section candidate is the first eigenvalue of the lowest nonzero
    modes (every other mode has a pointwise larger potential).
    """
    if not 0.0 <= t0 < t1 <= scenario.length:
        raise DomainError(f"need 0 <= t0 < t1 <= L, got [{t0}, {t1}]")
    cells = cells or scenario.grid_size
    modes = scenario.family.enumerate_modes(max(scenario.mode_cap, 1.0))
    zero = next(m for m in modes if m.is_zero)
    w, q, v = _restricted(reduce(scenario, zero), t0, t1)
    best = float(_neumann_eigs(w, q, v, t1 - t0, cells, 2)[1])
    if include_cross_modes:
        first = scenario.family.first_nonzero_mu1()
        for mode in scenario.family.enumerate_modes(first):
            if mode.is_zero or mode.mu1 != first:
                continue
            w, q, v = _restricted(reduce(scenario, mode), t0, t1)
            best = min(best, float(_neumann_eigs(w, q, v, t1 - t0, cells, 1)[0]))
    return best


def _integrate(fn, length: float, breakpoints: Sequence[float]) -> float:
    knots = [0.0] + sorted(b for b in breakpoints if 0 < b < length) + [length]
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        val, _ = quad(lambda t: float(fn(t)), a, b, epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
    return total


def collar_volume(scenario: CollarScenario) -> float:
    fam, kind = scenario.family, scenario.kind
    if isinstance(kind, BleeckerCollar):
        dim = fam.dim
        n = dim - 1

        def density(t):
            # sqrt(det) of t^-1 on dim-1 horizontal directions and t^n on the fibre
            s = kind.profile.eval(t)
            return math.sqrt(s ** (-(dim - 1)) * s**n)

        return fam.total_volume * _integrate(density, kind.length, kind.profile.breakpoints)
    n1 = kind.ambient_dim
    weight = ConformalWeight(kind.profile, float(n1))
    return fam.total_volume * _integrate(weight, kind.length, kind.profile.breakpoints)
