from __future__ import annotations

import json
import math

import numpy as np
import pytest

from steklov_lab import fem2d
from steklov_lab.errors import ConfigurationError, DomainError, NumericError


def reference_triangle() -> fem2d.TriMesh:
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    edges = np.array([[0, 1], [1, 2], [2, 0]])
    comp = np.array(["outer"] * 3, dtype=object)
    return fem2d.TriMesh(verts, np.array([[0, 1, 2]]), edges, comp, np.array(["steklov"] * 3, dtype=object))


def test_mesh_counts():
    disk = fem2d.build_disk_mesh(1)
    assert len(disk.vertices) == 61 and len(disk.triangles) == 96
    fem2d.validate_mesh(disk)
    cyl = fem2d.build_cylinder_mesh(1.0, 1.0, 4, 4)
    assert len(cyl.triangles) == 32
    fem2d.validate_mesh(cyl)
    _, ndof = cyl.dof_map()
    assert ndof == 4 * 5


def test_mesh_validation_rejects_bad_input():
    bad = reference_triangle()
    bad.triangles = bad.triangles[:, ::-1].copy()
    with pytest.raises(ConfigurationError):
        fem2d.validate_mesh(bad)
    short = reference_triangle()
    short.boundary_edges = short.boundary_edges[:2]
    with pytest.raises(ConfigurationError):
        fem2d.validate_mesh(short)
    with pytest.raises(ConfigurationError):
        fem2d.build_cylinder_mesh(1.0, 1.0, 3, 8)


def test_reference_triangle_stiffness():
    ops = fem2d.assemble(reference_triangle(), fem2d.euclidean_metric())
    expected = np.array([[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])
    assert np.allclose(ops.stiffness.toarray(), expected, atol=1e-15)
    # trapezoidal boundary mass: half of each incident edge length
    s = math.sqrt(2.0)
    assert np.allclose(ops.full_boundary_mass.diagonal(), [1.0, 0.5 + s / 2, 0.5 + s / 2])


def test_constant_scaling_keeps_stiffness():
    mesh = fem2d.build_disk_mesh(1)
    K1 = fem2d.assemble(mesh, fem2d.euclidean_metric()).stiffness
    ops = fem2d.assemble(mesh, fem2d.euclidean_metric().scaled(7.0))
    assert abs(ops.stiffness - K1).max() <= 1e-13
    assert np.allclose(np.asarray(ops.stiffness.sum(axis=1)).ravel(), 0.0, atol=1e-12)


def test_non_spd_metric_raises():
    mesh = fem2d.build_disk_mesh(1)
    metric = fem2d.MetricField(lambda x, y: np.broadcast_to(np.diag([1.0, -1.0]), np.shape(x) + (2, 2)))
    with pytest.raises(NumericError, match="not SPD"):
        fem2d.assemble(mesh, metric)


def test_disk_eigenvalues():
    vals = fem2d.steklov_solve(fem2d.assemble(fem2d.build_disk_mesh(3), fem2d.euclidean_metric()), 7)
    assert abs(vals[0]) < 1e-10
    assert np.allclose(vals[1:], [1, 1, 2, 2, 3, 3], rtol=5e-3)


def test_flat_cylinder_both_ends_and_mixed():
    mesh = fem2d.build_cylinder_mesh(1.0, 1.0, 64, 16)
    both = fem2d.steklov_solve(fem2d.assemble(mesh, fem2d.euclidean_metric()), 4)
    exact = sorted([0.0, 2.0] + [math.tanh(0.5), 1 / math.tanh(0.5), 2 * math.tanh(1.0)] * 2)[:4]
    assert both[0] <= 1e-8 * both[1]
    assert np.allclose(both[1:], exact[1:], rtol=5e-3)
    mixed_mesh = fem2d.build_cylinder_mesh(1.0, 1.0, 64, 16, top="neumann")
    mixed = fem2d.mixed_solve(fem2d.assemble(mixed_mesh, fem2d.euclidean_metric()), 4)
    assert np.allclose(mixed[1:], [math.tanh(1.0), math.tanh(1.0), 2 * math.tanh(2.0)], rtol=5e-3)


def test_k_out_of_range():
    ops = fem2d.assemble(fem2d.build_cylinder_mesh(1.0, 1.0, 8, 4, top="neumann"), fem2d.euclidean_metric())
    with pytest.raises(DomainError):
        fem2d.mixed_solve(ops, 9)
    with pytest.raises(DomainError):
        fem2d.mixed_solve(ops, 0)


def test_mixed_with_all_steklov_matches_steklov_solve():
    ops = fem2d.assemble(fem2d.build_disk_mesh(2), fem2d.euclidean_metric())
    assert np.allclose(fem2d.mixed_solve(ops, 8), fem2d.steklov_solve(ops, 8), rtol=1e-13, atol=1e-13)


def test_schur_matches_full_pencil():
    mesh = fem2d.build_cylinder_mesh(1.0, 1.0, 12, 6, top="neumann")
    metric = fem2d.conformal_metric(fem2d.random_conformal_factor(np.random.default_rng(5)))
    ops = fem2d.assemble(mesh, metric)
    schur = fem2d.mixed_solve(ops, 6)
    full = fem2d.full_pencil_eigenvalues(ops, 6)
    assert np.allclose(schur, full, rtol=1e-9, atol=1e-9)


def test_conformal_invariance_in_2d():
    mesh = fem2d.build_disk_mesh(2)
    rng = np.random.default_rng(1)
    c = fem2d.random_conformal_factor(rng)
    # a conformal factor equal to 1 near the boundary leaves the boundary mass unchanged
    bump = lambda x, y: 1.0 + (c(x, y) - 1.0) * np.clip(1.0 - (x * x + y * y) / 0.5, 0.0, None)  # noqa: E731
    base = fem2d.steklov_solve(fem2d.assemble(mesh, fem2d.euclidean_metric()), 8)
    bent = fem2d.steklov_solve(fem2d.assemble(mesh, fem2d.conformal_metric(bump)), 8)
    assert np.max(np.abs(bent - base)) <= 1e-12


def test_random_factor_range():
    f = fem2d.random_conformal_factor(np.random.default_rng(0))
    x, y = np.meshgrid(np.linspace(-1, 1, 50), np.linspace(-1, 1, 50))
    v = f(x, y)
    assert np.all(v > 0.5) and np.all(v < 2.0)


def test_quasi_isometry_identity_and_scaling():
    mesh = fem2d.build_disk_mesh(1)
    g = fem2d.euclidean_metric()
    same = fem2d.quasi_isometry_experiment(g, g, mesh, 6)
    assert same["A"] == 1.0 and np.allclose(same["ratios"], 1.0) and same["pass"]
    four = fem2d.quasi_isometry_experiment(g, g.scaled(4.0), mesh, 6)
    assert four["A"] == pytest.approx(4.0) and four["A_length"] == pytest.approx(2.0)
    assert np.allclose(four["ratios"], 0.5, rtol=1e-12)
    assert four["pass"] and four["pass_alternative"]


def test_writers(tmp_path):
    mesh = fem2d.build_cylinder_mesh(1.0, 1.0, 4, 4)
    fem2d.write_mesh_csv(mesh, tmp_path / "mesh.csv")
    lines = (tmp_path / "mesh.csv").read_text().splitlines()
    assert lines[0] == "kind,i,a,b,c" and len(lines) == 1 + 25 + 32
    fem2d.write_spectrum_csv([0.0, 1.5], tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_text().splitlines()[2] == "2,1.500000000000e+00"
    fem2d.write_report_json({"A": 2.0}, tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text()) == {"A": 2.0}
