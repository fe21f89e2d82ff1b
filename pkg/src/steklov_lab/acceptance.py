"""Acceptance checks, one function per criterion.

Each check returns a :class:`CriterionResult`; :func:`run_acceptance`
prints one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from . import fem2d
from .boundary_modes import BergerS3, Circle, berger_mu, berger_oracle, lambda2_bleecker
from .collar_profiles import ConformalPulse, Constant
from .experiments import emit_csv, preset, quasi_isometry_trials, sweep
from .mode_solver import (
    CollarScenario,
    ConformalCylinder,
    ReducedModeProblem,
    Steklov,
    constant_problem,
    dtn_value,
    mode_eigenvalues,
    steklov_spectrum,
)

DISK_REFINEMENT = 2
DISK_EXACT = np.array([1.0, 1.0, 2.0, 2.0, 3.0, 3.0])


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.title}: {self.detail}"


def disk_error(refinement: int) -> float:
    """Largest relative error of sigma_2..sigma_7 on the unit disk."""
    mesh = fem2d.build_disk_mesh(refinement)
    vals = fem2d.steklov_solve(fem2d.assemble(mesh, fem2d.euclidean_metric()), 7)
    return float(np.max(np.abs(vals[1:] - DISK_EXACT) / DISK_EXACT))


def criterion_fem_disk() -> CriterionResult:
    e0, e1 = disk_error(DISK_REFINEMENT), disk_error(DISK_REFINEMENT + 1)
    ratio = e0 / e1
    ok = e0 <= 0.02 and 3.2 <= ratio <= 4.8
    return CriterionResult(1, "FEM disk validation", ok, f"error {e0:.3e} at r={DISK_REFINEMENT}, ratio {ratio:.3f}")


def criterion_mode_oracle() -> CriterionResult:
    worst_dtn = 0.0
    worst_two = 0.0
    for L in (0.5, 1.0, 2.0):
        for k in range(0, 21):
            d = dtn_value(constant_problem(1.0, k * k, L))
            worst_dtn = max(worst_dtn, abs(d - k * math.tanh(k * L)) / max(1, k))
            lo, hi = mode_eigenvalues(constant_problem(1.0, k * k, L, Steklov(), grid_size=2048))
            exact = (0.0, 2.0 / L) if k == 0 else (k * math.tanh(k * L / 2), k / math.tanh(k * L / 2))
            worst_two = max(worst_two, abs(lo - exact[0]), abs(hi - exact[1]))
    ok = worst_dtn <= 1e-8 and worst_two <= 1e-6
    return CriterionResult(
        2, "mode-solver oracle", ok, f"max |dtn - k tanh(kL)|/k = {worst_dtn:.2e}, max two-point error {worst_two:.2e}"
    )


def _cylinder_pair(profile, nx: int = 48, nt: int = 8, count: int = 8):
    scen = CollarScenario(Circle(1.0), ConformalCylinder(profile, 2, 1.0, "steklov"), mode_cap=16.0)
    modal = steklov_spectrum(scen, count).values
    mesh = fem2d.build_cylinder_mesh(1.0, 1.0, nx, nt)
    metric = fem2d.conformal_metric(lambda x, y: np.exp(2.0 * profile.eval(np.clip(y, 0.0, 1.0))))
    fem = fem2d.steklov_solve(fem2d.assemble(mesh, metric), count)
    return modal, fem


def criterion_cross_solver() -> CriterionResult:
    tol = 3.0 * disk_error(DISK_REFINEMENT)
    flat = _cylinder_pair(Constant(0.0))
    bent = _cylinder_pair(ConformalPulse(0.2, rise_end=0.3, fall_start=0.6, fall_end=0.8))
    errs = []
    for modal, fem in (flat, bent):
        errs.append(float(np.max(np.abs(modal[1:] - fem[1:]) / modal[1:])))
    ok = max(errs) <= tol and abs(flat[0][0]) < 1e-12 and abs(bent[0][0]) < 1e-12
    return CriterionResult(
        3, "cross-solver agreement", ok, f"flat {errs[0]:.2e}, deformed {errs[1]:.2e}, tolerance {tol:.2e}"
    )


def criterion_bleecker() -> CriterionResult:
    ts = np.logspace(0.0, 3.0, 50)
    problems = []
    for t in ts:
        closed = 2 * t + t**-2
        lam = lambda2_bleecker(t)
        search = min(berger_mu(k, m, t) for k in range(1, 21) for m in range(-k, k + 1, 2))
        if lam < 2 * t or not math.isclose(lam, closed, rel_tol=1e-12) or not math.isclose(search, closed, rel_tol=1e-12):
            problems.append(f"t={t:.4g}")
    rows = berger_oracle(8)
    enumerated = {}
    for mode in BergerS3().enumerate_modes(8 * 10 + 0.5):
        k, m = mode.label
        if k <= 8:
            enumerated[(k, m)] = mode.multiplicity
    for k in range(0, 9):
        mine = [(r[1], r[2]) for r in rows if r[0] == k]
        weights = sorted(m for m, _ in mine)
        if weights != list(range(-k, k + 1, 2)):
            problems.append(f"weights k={k}")
        if any(mult != k + 1 for _, mult in mine) or sum(mult for _, mult in mine) != (k + 1) ** 2:
            problems.append(f"multiplicity k={k}")
        if any(r[3] != k * (k + 2) for r in rows if r[0] == k):
            problems.append(f"degree eigenvalue k={k}")
        if any(enumerated.get((k, m)) != mult for m, mult in mine):
            problems.append(f"enumeration k={k}")
    ok = not problems
    detail = "50 grid points and k <= 8 oracle consistent" if ok else "mismatch at " + ", ".join(problems[:5])
    return CriterionResult(4, "Bleecker eigenvalue bound", ok, detail)


def criterion_fixed_volume() -> CriterionResult:
    table = sweep(preset("thm11_bleecker_cylinder"))
    rows = table.select(2, "fixed_volume")
    sig = np.array([r.sigma_k for r in rows])
    A = rows[0].certificate.constants["A"]
    vols = np.array([r.volume for r in rows])
    increasing = bool(np.all(np.diff(sig) > 0))
    vol_ok = float(np.max(np.abs(vols - vols[0]))) <= 1e-10 * vols[0]
    ok = table.all_hold and A == 0.25 and increasing and vol_ok and len(rows) == 4
    detail = "sigma_2*eps = " + ", ".join(f"{r.sigma_k * r.epsilon:.3f}" for r in rows) + f" (A = {A}), volume {vols[0]:.6f}"
    return CriterionResult(5, "fixed-volume divergence", ok, detail)


def _rate_detail(rows) -> tuple[float, str]:
    prod = [r.sigma_k * r.epsilon for r in rows]
    return min(prod), ", ".join(f"{p:.3f}" for p in prod)


def criterion_connected_collar() -> CriterionResult:
    table = sweep(preset("thm12_connected_collar"))
    rows = table.select(2, "mixed")
    floor = min(r.certificate.constants["C_final"] for r in rows)
    low, prod = _rate_detail(rows)
    ok = table.all_hold and floor > 0 and low >= floor
    return CriterionResult(6, "connected collar divergence", ok, f"sigma_2*eps = {prod} >= {floor:.4g}")


def criterion_disconnected() -> CriterionResult:
    table = sweep(preset("thm13_disconnected_b2"))
    upper = table.select(2, "component_upper")
    lower = table.select(3, "mixed_auxiliary")
    C = upper[0].certificate_bound
    floor = min(r.certificate.constants["C_final"] for r in lower)
    low, prod = _rate_detail(lower)
    ok = table.all_hold and floor > 0 and low >= floor and len(upper) == len(lower) == 4
    s2 = ", ".join(f"{r.sigma_k:.3f}" for r in upper)
    return CriterionResult(7, "b = 2 dichotomy", ok, f"sigma_2 = {s2} <= C = {C:.4f}; sigma_3*eps = {prod}")


def criterion_dimension() -> CriterionResult:
    two = sweep(preset("dim2_contrast"))
    three = sweep(preset("dim3_contrast"))
    sig3 = three.sigma(2)
    ok = two.all_hold and three.all_hold and bool(np.all(np.diff(sig3) > 0))
    spread = float(np.ptp(two.sigma(2)))
    detail = f"2D sigma_2 spread {spread:.1e}; 3D sigma_2 = " + ", ".join(f"{s:.3f}" for s in sig3)
    return CriterionResult(8, "dimension contrast", ok, detail)


def criterion_quasi_isometry() -> CriterionResult:
    report = quasi_isometry_trials(preset("quasi_isometry"))
    trials = report["trials"]
    ok = (
        report["pass"]
        and len(trials) == 20
        and all(t["A"] <= 2.0 and len(t["ratios"]) == 9 for t in trials)
    )
    worst = max(max(abs(math.log(r)) / math.log(t["A"]) for r in t["ratios"]) for t in trials if t["A"] > 1)
    return CriterionResult(9, "quasi-isometry ratios", ok, f"20 trials, largest |log ratio| / log A = {worst:.3f} (limit 5)")


@dataclass(frozen=True)
class PiecewiseConstant:
    edges: tuple[float, ...]  # interior cell edges, increasing
    values: tuple[float, ...]  # one more than edges

    def __call__(self, t):
        return np.asarray(self.values)[np.searchsorted(self.edges, t, side="right")]


def dtn_monotonicity_trials(trials: int = 100, seed: int = 11) -> int:
    """Randomized piecewise-constant pairs ``(w1, q1) <= (w2, q2)``; returns how many gave a smaller DtN value."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        L = rng.uniform(0.3, 2.5)
        cells = int(rng.integers(1, 7))
        edges = tuple(np.sort(rng.uniform(0.0, L, cells - 1)))
        w1 = rng.uniform(0.2, 3.0, cells)
        q1 = rng.uniform(0.0, 40.0, cells)
        w2 = w1 + rng.uniform(0.0, 1.0, cells) * rng.integers(0, 2, cells)
        q2 = q1 + rng.uniform(0.0, 10.0, cells) * rng.integers(0, 2, cells)
        lo = ReducedModeProblem(L, PiecewiseConstant(edges, tuple(w1)), PiecewiseConstant(edges, tuple(q1)), breakpoints=edges)
        hi = ReducedModeProblem(L, PiecewiseConstant(edges, tuple(w2)), PiecewiseConstant(edges, tuple(q2)), breakpoints=edges)
        if dtn_value(hi) < dtn_value(lo) * (1 - 1e-9):
            failures += 1
    return failures


def csv_is_deterministic(name: str = "lemma31_mixed") -> bool:
    import os
    import tempfile

    texts = []
    with tempfile.TemporaryDirectory() as tmp:
        for i in range(2):
            path = os.path.join(tmp, f"run{i}.csv")
            emit_csv(sweep(preset(name)), path)
            with open(path, encoding="utf-8") as fh:
                # runtime_ms is the last column
                texts.append("\n".join(line.rsplit(",", 1)[0] for line in fh.read().splitlines()))
    return texts[0] == texts[1]


def random_spd_metric(rng: np.random.Generator) -> fem2d.MetricField:
    c = rng.uniform(-1, 1, size=4)

    def evaluate(x, y):
        a = 1.5 + np.sin(c[0] * x + c[1] * y)
        b = 1.5 + np.cos(c[2] * x - c[3] * y)
        off = 0.4 * np.sin(x * y)
        G = np.empty(np.shape(x) + (2, 2))
        G[..., 0, 0], G[..., 1, 1] = a, b
        G[..., 0, 1] = G[..., 1, 0] = off
        return G

    return fem2d.MetricField(evaluate)


def operators_are_sound(ops: fem2d.DiscreteOperators) -> bool:
    K = ops.stiffness.toarray()
    norm = np.abs(K).max()
    sym = np.abs(K - K.T).max() <= 1e-12 * norm
    psd = sla.eigvalsh(K)[0] >= -1e-9 * norm
    rows = np.abs(K.sum(axis=1)).max() <= 1e-10 * norm
    B = ops.boundary_mass.toarray()
    bsym = np.abs(B - B.T).max() <= 1e-12 * np.abs(B).max()
    bpos = bool(np.all(np.diag(B)[ops.steklov_dofs] > 0))
    return bool(sym and psd and rows and bsym and bpos)


def criterion_properties() -> CriterionResult:
    failures = dtn_monotonicity_trials()
    deterministic = csv_is_deterministic()
    rng = np.random.default_rng(5)
    meshes = [
        fem2d.build_disk_mesh(1),
        fem2d.build_disk_mesh(2),
        fem2d.build_cylinder_mesh(1.0, 1.0, 16, 6, top="neumann"),
    ]
    metrics = [fem2d.euclidean_metric()] + [random_spd_metric(rng) for _ in range(3)]
    sound = all(operators_are_sound(fem2d.assemble(m, g)) for m in meshes for g in metrics)
    ok = failures == 0 and deterministic and sound
    detail = f"monotonicity failures {failures}/100, CSV deterministic {deterministic}, matrices symmetric PSD {sound}"
    return CriterionResult(10, "property suites", ok, detail)


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_fem_disk,
    2: criterion_mode_oracle,
    3: criterion_cross_solver,
    4: criterion_bleecker,
    5: criterion_fixed_volume,
    6: criterion_connected_collar,
    7: criterion_disconnected,
    8: criterion_dimension,
    9: criterion_quasi_isometry,
    10: criterion_properties,
}


def run_acceptance(numbers=None, out: io.TextIOBase | None = None) -> list[CriterionResult]:
    results = []
    for n in numbers or sorted(CRITERIA):
        try:
            res = CRITERIA[n]()
        except Exception as exc:  # a crash counts as a failure, not an abort
            res = CriterionResult(n, CRITERIA[n].__name__, False, f"{type(exc).__name__}: {exc}")
        results.append(res)
        if out is not None:
            print(res.line(), file=out, flush=True)
    return results
