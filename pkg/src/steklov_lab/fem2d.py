"""P1 finite elements for Steklov and mixed Steklov-Neumann problems in 2D.

Meshes are structured (concentric-ring disks, periodic rectangles for
cylinders) and carry an arbitrary Riemannian metric given in coordinates.
Metric coefficients are sampled once per triangle at the barycenter, so a
conformal change ``c(x) g`` leaves the discrete Dirichlet form exactly
unchanged, as it does in the continuum.

Eigenvalues are computed by eliminating all non-Steklov unknowns (Schur
complement of the SPD block) and solving the resulting dense symmetric
pencil against the diagonal boundary mass.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import ConfigurationError, DomainError, NumericError

__all__ = [
    "TriMesh",
    "MetricField",
    "DiscreteOperators",
    "build_disk_mesh",
    "build_cylinder_mesh",
    "validate_mesh",
    "euclidean_metric",
    "conformal_metric",
    "assemble",
    "steklov_solve",
    "mixed_solve",
    "full_pencil_eigenvalues",
    "quasi_isometry_experiment",
    "random_conformal_factor",
    "write_mesh_csv",
    "write_spectrum_csv",
    "write_report_json",
]

STEKLOV = "steklov"
NEUMANN = "neumann"


@dataclass
class TriMesh:
    vertices: np.ndarray  # (nv, 2)
    triangles: np.ndarray  # (nt, 3), counter-clockwise
    boundary_edges: np.ndarray  # (ne, 2)
    boundary_component: np.ndarray  # (ne,) str tags
    boundary_role: np.ndarray  # (ne,) "steklov" | "neumann"
    periodic_pairs: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=int))

    def dof_map(self) -> tuple[np.ndarray, int]:
        """Vertex -> degree of freedom after merging periodic pairs ``(slave, master)``."""
        target = np.arange(len(self.vertices))
        for slave, master in self.periodic_pairs:
            target[slave] = master
        _, dofs = np.unique(target, return_inverse=True)
        return dofs, int(dofs.max()) + 1

    def with_roles(self, roles: dict[str, str]) -> "TriMesh":
        """Copy with boundary roles reassigned per component tag."""
        role = np.array([roles.get(c, r) for c, r in zip(self.boundary_component, self.boundary_role)], dtype=object)
        return TriMesh(self.vertices, self.triangles, self.boundary_edges, self.boundary_component, role, self.periodic_pairs)


def _signed_areas(vertices: np.ndarray, tris: np.ndarray) -> np.ndarray:
    p = vertices[tris]
    u = p[:, 1] - p[:, 0]
    v = p[:, 2] - p[:, 0]
    return 0.5 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])


def _orient(vertices: np.ndarray, tris: np.ndarray) -> np.ndarray:
    area = _signed_areas(vertices, tris)
    tris = tris.copy()
    flip = area < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


def build_disk_mesh(refinement: int, radius: float = 1.0, base_rings: int = 4) -> TriMesh:
    """Concentric-ring mesh of the disk with ``R = base_rings * 2**(refinement-1)`` rings.

    Ring ``i`` has ``6 i`` vertices on the circle of radius ``i R^-1``, so
    the mesh has ``1 + 3 R (R + 1)`` vertices and ``6 R^2`` triangles.
    """
    if refinement < 1 or base_rings < 1:
        raise ConfigurationError("refinement and base_rings must be >= 1")
    R = base_rings * 2 ** (refinement - 1)
    verts = [(0.0, 0.0)]
    start = [0]
    for i in range(1, R + 1):
        start.append(len(verts))
        ang = 2 * np.pi * np.arange(6 * i) / (6 * i)
        verts.extend(zip(radius * i / R * np.cos(ang), radius * i / R * np.sin(ang)))

    def ring(i, j):
        if i == 0:
            return 0
        return start[i] + j % (6 * i)

    tris = []
    for i in range(1, R + 1):
        for s in range(6):
            inner = [ring(i - 1, s * (i - 1) + p) for p in range(i)]
            outer = [ring(i, s * i + p) for p in range(i + 1)]
            for p in range(i):
                tris.append((inner[p], outer[p], outer[p + 1]))
            for p in range(i - 1):
                tris.append((inner[p], outer[p + 1], inner[p + 1]))
    vertices = np.array(verts)
    triangles = _orient(vertices, np.array(tris, dtype=int))
    edges = np.array([(ring(R, j), ring(R, j + 1)) for j in range(6 * R)], dtype=int)
    n = len(edges)
    return TriMesh(
        vertices,
        triangles,
        edges,
        np.array(["outer"] * n, dtype=object),
        np.array([STEKLOV] * n, dtype=object),
    )


def build_cylinder_mesh(
    radius: float,
    length: float,
    nx: int,
    nt: int,
    bottom: str = STEKLOV,
    top: str = STEKLOV,
) -> TriMesh:
    """``[0, 2 pi radius) x [0, length]``, periodic in x, split into ``2 nx nt`` triangles.

    Coordinates are arclength ``x`` around the circle and ``t`` along the
    axis.  Boundary components are tagged ``bottom`` (t = 0) and ``top``.
    """
    if nx < 4 or nt < 4:
        raise ConfigurationError("need nx, nt >= 4")
    if radius <= 0 or length <= 0:
        raise ConfigurationError("radius and length must be positive")
    for role in (bottom, top):
        if role not in (STEKLOV, NEUMANN):
            raise ConfigurationError(f"unknown boundary role {role!r}")
    xs = 2 * np.pi * radius * np.arange(nx + 1) / nx
    ts = length * np.arange(nt + 1) / nt
    X, T = np.meshgrid(xs, ts, indexing="ij")
    vertices = np.column_stack([X.ravel(), T.ravel()])

    def idx(i, j):
        return i * (nt + 1) + j

    tris = []
    for i in range(nx):
        for j in range(nt):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    triangles = _orient(vertices, np.array(tris, dtype=int))
    bottom_edges = [(idx(i, 0), idx(i + 1, 0)) for i in range(nx)]
    top_edges = [(idx(i + 1, nt), idx(i, nt)) for i in range(nx)]
    edges = np.array(bottom_edges + top_edges, dtype=int)
    comp = np.array(["bottom"] * nx + ["top"] * nx, dtype=object)
    role = np.array([bottom] * nx + [top] * nx, dtype=object)
    pairs = np.array([(idx(nx, j), idx(0, j)) for j in range(nt + 1)], dtype=int)
    return TriMesh(vertices, triangles, edges, comp, role, pairs)


def validate_mesh(mesh: TriMesh) -> None:
    """Raise ConfigurationError unless orientation, edge incidence and periodic pairing are sound."""
    area = _signed_areas(mesh.vertices, mesh.triangles)
    if np.any(area <= 0):
        raise ConfigurationError(f"{int(np.sum(area <= 0))} triangles are not positively oriented")
    pairs = mesh.periodic_pairs
    if len(pairs):
        slaves, masters = pairs[:, 0], pairs[:, 1]
        if len(set(slaves)) != len(slaves) or set(slaves) & set(masters) or np.any(slaves == masters):
            raise ConfigurationError("periodic identification is not an involution")
    dofs, _ = mesh.dof_map()
    t = dofs[mesh.triangles]
    all_edges = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
    uniq, counts = np.unique(all_edges, axis=0, return_counts=True)
    incidence = {tuple(e): c for e, c in zip(uniq, counts)}
    if np.any(counts > 2):
        raise ConfigurationError("an edge is shared by more than two triangles")
    bnd = {tuple(sorted(e)) for e in dofs[mesh.boundary_edges]}
    for e in bnd:
        if incidence.get(e) != 1:
            raise ConfigurationError(f"boundary edge {e} is not on exactly one triangle")
    free = {e for e, c in incidence.items() if c == 1}
    if free != bnd:
        raise ConfigurationError("boundary edge list does not match the mesh boundary")


@dataclass
class MetricField:
    """Symmetric 2x2 metric tensor field in mesh coordinates."""

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    spd_margin: float = 1e-12

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        G = np.asarray(self.evaluator(x, y), dtype=float)
        return np.broadcast_to(G, x.shape + (2, 2))

    def scaled(self, factor: float) -> "MetricField":
        return MetricField(lambda x, y: factor * self(x, y), self.spd_margin)


def euclidean_metric() -> MetricField:
    return MetricField(lambda x, y: np.broadcast_to(np.eye(2), np.shape(x) + (2, 2)))


def conformal_metric(factor: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> MetricField:
    """``factor(x, y) * Euclidean``; ``factor`` must be positive."""
    return MetricField(lambda x, y: np.asarray(factor(x, y))[..., None, None] * np.eye(2))


@dataclass
class DiscreteOperators:
    stiffness: sp.csr_matrix
    boundary_mass: sp.csr_matrix  # Steklov-labelled edges only
    full_boundary_mass: sp.csr_matrix  # every boundary edge
    steklov_dofs: np.ndarray
    boundary_dofs: np.ndarray
    interior_dofs: np.ndarray
    dofs: np.ndarray

    @property
    def ndof(self) -> int:
        return self.stiffness.shape[0]


def _spd_check(G: np.ndarray, where: np.ndarray, margin: float, what: str):
    sym = np.abs(G[..., 0, 1] - G[..., 1, 0]) <= 1e-12 * np.abs(G).max(axis=(-1, -2))
    tr = G[..., 0, 0] + G[..., 1, 1]
    det = G[..., 0, 0] * G[..., 1, 1] - G[..., 0, 1] * G[..., 1, 0]
    lam_min = 0.5 * (tr - np.sqrt(np.maximum(tr**2 - 4 * det, 0.0)))
    bad = ~sym | ~np.isfinite(lam_min) | (lam_min < margin)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NumericError(f"metric is not SPD at {what} {i}, point {tuple(np.round(where[i], 6))}")


def assemble(mesh: TriMesh, metric: MetricField) -> DiscreteOperators:
    """Stiffness ``int grad u . G^-1 grad v sqrt(det G)`` and trapezoidal boundary mass."""
    dofs, ndof = mesh.dof_map()
    P = mesh.vertices[mesh.triangles]  # (nt, 3, 2)
    centroid = P.mean(axis=1)
    G = metric(centroid[:, 0], centroid[:, 1])
    _spd_check(G, centroid, metric.spd_margin, "triangle")
    e1 = P[:, 1] - P[:, 0]
    e2 = P[:, 2] - P[:, 0]
    area = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    # barycentric gradients: rotate the opposite edge by -90 degrees
    opp = np.stack([P[:, 2] - P[:, 1], P[:, 0] - P[:, 2], P[:, 1] - P[:, 0]], axis=1)
    grads = np.stack([opp[..., 1], -opp[..., 0]], axis=-1) / (2 * area)[:, None, None]
    det = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] * G[:, 1, 0]
    Ginv = np.linalg.inv(G)
    Ke = np.einsum("tia,tab,tjb->tij", grads, Ginv, grads) * (area * np.sqrt(det))[:, None, None]
    Ke = 0.5 * (Ke + Ke.transpose(0, 2, 1))
    td = dofs[mesh.triangles]
    rows = np.repeat(td, 3, axis=1).ravel()
    cols = np.tile(td, (1, 3)).ravel()
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(ndof, ndof)).tocsr()

    E = mesh.vertices[mesh.boundary_edges]
    mid = E.mean(axis=1)
    vec = E[:, 1] - E[:, 0]
    Gb = metric(mid[:, 0], mid[:, 1])
    _spd_check(Gb, mid, metric.spd_margin, "boundary edge")
    length = np.sqrt(np.einsum("ea,eab,eb->e", vec, Gb, vec))
    bd = dofs[mesh.boundary_edges]

    def lumped(mask):
        vals = np.repeat(0.5 * length[mask], 2)
        idx = bd[mask].ravel()
        diag = np.bincount(idx, weights=vals, minlength=ndof)
        return sp.diags(diag).tocsr()

    steklov = np.array([r == STEKLOV for r in mesh.boundary_role], dtype=bool)
    B = lumped(steklov)
    Bfull = lumped(np.ones(len(length), dtype=bool))
    sdofs = np.unique(bd[steklov].ravel()) if steklov.any() else np.zeros(0, dtype=int)
    bdofs = np.unique(bd.ravel())
    interior = np.setdiff1d(np.arange(ndof), bdofs)
    return DiscreteOperators(K, B, Bfull, sdofs, bdofs, interior, dofs)


def _pencil(K: sp.csr_matrix, bdiag: np.ndarray, sdofs: np.ndarray, k: int) -> np.ndarray:
    ns = len(sdofs)
    if ns == 0:
        raise DomainError("no Steklov boundary degrees of freedom")
    if not 1 <= k <= ns:
        raise DomainError(f"k must be between 1 and the {ns} Steklov boundary DOFs, got {k}")
    other = np.setdiff1d(np.arange(K.shape[0]), sdofs)
    Kss = K[sdofs][:, sdofs].toarray()
    if len(other):
        Koo = K[other][:, other].tocsc()
        Kos = K[other][:, sdofs].toarray()
        try:
            lu = splu(Koo)
        except RuntimeError as exc:
            raise NumericError(f"interior block factorization failed: {exc}") from None
        X = lu.solve(Kos)
        if not np.all(np.isfinite(X)):
            raise NumericError("interior solve produced non-finite values")
        S = Kss - Kos.T @ X
    else:
        S = Kss
    S = 0.5 * (S + S.T)
    b = bdiag[sdofs]
    scale = 1.0 / np.sqrt(b)
    vals = sla.eigvalsh(scale[:, None] * S * scale[None, :], subset_by_index=(0, k - 1))
    return np.sort(vals)


def steklov_solve(ops: DiscreteOperators, k: int) -> np.ndarray:
    """``k`` smallest Steklov eigenvalues with every boundary edge Steklov."""
    return _pencil(ops.stiffness, ops.full_boundary_mass.diagonal(), ops.boundary_dofs, k)


def mixed_solve(ops: DiscreteOperators, k: int) -> np.ndarray:
    """``k`` smallest eigenvalues with the Neumann-labelled edges left free."""
    return _pencil(ops.stiffness, ops.boundary_mass.diagonal(), ops.steklov_dofs, k)


def full_pencil_eigenvalues(ops: DiscreteOperators, k: int, mixed: bool = True) -> np.ndarray:
    """Same eigenvalues without elimination: ``B u = theta (K + B) u``, ``sigma = 1/theta - 1``.

    Dense; meant for coarse meshes as an independent check of the Schur route.
    """
    B = (ops.boundary_mass if mixed else ops.full_boundary_mass).toarray()
    K = ops.stiffness.toarray()
    theta = sla.eigvalsh(B, K + B)
    theta = np.sort(theta)[::-1]
    finite = theta[: min(k, int(np.count_nonzero(np.diag(B))))]
    return np.sort(1.0 / finite - 1.0)


def random_conformal_factor(rng: np.random.Generator, modes: int = 4) -> Callable:
    """Smooth positive factor with values in (1/2, 2)."""
    a = rng.normal(size=(modes, modes))
    ph = rng.uniform(0, 2 * np.pi, size=(modes, modes))

    def factor(x, y):
        acc = np.zeros(np.broadcast(x, y).shape)
        for i in range(modes):
            for j in range(modes):
                acc = acc + a[i, j] * np.cos(i * x + j * y + ph[i, j]) / (1 + i + j)
        return 2.0 ** np.tanh(acc)

    return factor


def _pair_ratio(mesh: TriMesh, metric1: MetricField, metric2: MetricField) -> float:
    P = mesh.vertices[mesh.triangles].mean(axis=1)
    E = mesh.vertices[mesh.boundary_edges].mean(axis=1)
    pts = np.concatenate([P, E])
    G1 = metric1(pts[:, 0], pts[:, 1])
    G2 = metric2(pts[:, 0], pts[:, 1])
    lam = np.real(np.linalg.eigvals(np.linalg.solve(G2, G1)))
    return float(max(lam.max(), 1.0 / lam.min(), 1.0))


def quasi_isometry_experiment(metric1: MetricField, metric2: MetricField, mesh: TriMesh, k: int) -> dict:
    """Compare ``sigma_j(g2) / sigma_j(g1)`` for ``2 <= j <= k`` with ``A^(+-e)``.

    ``A`` is the quadratic-form ratio: the largest generalized eigenvalue of
    the metric pair (or its reciprocal) over triangle barycenters and
    boundary edge midpoints.  ``A_length = sqrt(A)`` is the same ratio for
    lengths.  The pass flag uses ``e = 2 dim + 1 = 5``; ``e = 3`` is
    reported alongside.
    """
    A = _pair_ratio(mesh, metric1, metric2)
    s1 = mixed_solve(assemble(mesh, metric1), k)
    s2 = mixed_solve(assemble(mesh, metric2), k)
    ratios = (s2[1:] / s1[1:]).tolist()
    exponent, alt = 5, 3
    tol = 1e-12

    def within(e):
        return all(A**-e * (1 - tol) <= r <= A**e * (1 + tol) for r in ratios)

    return {
        "A": A,
        "A_length": math.sqrt(A),
        "exponent": exponent,
        "exponent_alternative": alt,
        "ratios": ratios,
        "pass": within(exponent),
        "pass_alternative": within(alt),
    }


def write_mesh_csv(mesh: TriMesh, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "i", "a", "b", "c"])
        for i, (x, y) in enumerate(mesh.vertices):
            w.writerow(["vertex", i, f"{x:.12e}", f"{y:.12e}", ""])
        for i, tri in enumerate(mesh.triangles):
            w.writerow(["triangle", i, *tri])


def write_spectrum_csv(values, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "sigma"])
        for i, v in enumerate(values, start=1):
            w.writerow([i, f"{v:.12e}"])


def write_report_json(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
