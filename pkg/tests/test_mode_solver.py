from __future__ import annotations

import math

import numpy as np
import pytest

from steklov_lab.acceptance import dtn_monotonicity_trials
from steklov_lab.boundary_modes import BergerS3, Circle, FlatTorus
from steklov_lab.collar_profiles import BleeckerRamp, ConformalStep, Constant
from steklov_lab.errors import ConfigurationError, DomainError
from steklov_lab.mode_solver import (
    BleeckerCollar,
    CollarScenario,
    ConformalCylinder,
    Dirichlet,
    Steklov,
    collar_volume,
    constant_problem,
    dtn_value,
    mode_eigenvalues,
    mode_lower_bound,
    neumann_gap,
    reduce,
    steklov_spectrum,
)


def flat_cylinder(right_end="neumann", length=1.0, profile=None):
    profile = profile or Constant(0.0)
    return CollarScenario(Circle(1.0), ConformalCylinder(profile, 2, length, right_end), mode_cap=16.0)


@pytest.mark.parametrize("k", [0, 1, 3, 7, 20])
@pytest.mark.parametrize("L", [0.5, 1.0, 2.0])
def test_dtn_closed_form(k, L):
    assert dtn_value(constant_problem(1.0, k * k, L)) == pytest.approx(k * math.tanh(k * L), rel=1e-9, abs=1e-12)


def test_dtn_zero_potential_and_dirichlet_end():
    assert dtn_value(constant_problem(1.0, 0.0, 1.0)) == 0.0
    assert dtn_value(constant_problem(1.0, 1.0, 1.0, Dirichlet())) == pytest.approx(1 / math.tanh(1.0), rel=1e-9)
    # Dirichlet end with zero potential: a(t) = 1 - t/L, flux 1/L
    assert dtn_value(constant_problem(1.0, 0.0, 2.0, Dirichlet())) == pytest.approx(0.5, rel=1e-9)


def test_dtn_weight_and_mass_scaling():
    # w a'' = q a with w = 4, q = 4: a = cosh(t - L), DtN = w tanh(L) / mass
    p = constant_problem(4.0, 4.0, 1.0, left_bc=Steklov(2.0))
    assert dtn_value(p) == pytest.approx(4.0 * math.tanh(1.0) / 2.0, rel=1e-9)


@pytest.mark.parametrize("k,L", [(0, 1.0), (1, 1.0), (4, 0.5), (10, 2.0)])
def test_two_point_closed_form(k, L):
    lo, hi = mode_eigenvalues(constant_problem(1.0, k * k, L, Steklov()))
    if k == 0:
        assert lo == 0.0 and hi == pytest.approx(2.0 / L, abs=1e-8)
    else:
        assert lo == pytest.approx(k * math.tanh(k * L / 2), abs=1e-8)
        assert hi == pytest.approx(k / math.tanh(k * L / 2), abs=1e-8)


def test_two_point_eigenvectors_even_and_odd():
    (lo, hi), nodes, vecs = mode_eigenvalues(constant_problem(1.0, 4.0, 1.0, Steklov()), return_vectors=True)
    assert lo < hi
    even, odd = vecs[:, 0], vecs[:, 1]
    mirror = np.interp(1.0 - nodes, nodes, even)
    assert np.allclose(even, mirror, atol=1e-6 * np.abs(even).max())
    assert odd[0] == pytest.approx(-odd[-1], rel=1e-9)
    exact = np.cosh(2.0 * (nodes - 0.5))
    assert np.allclose(even / even[0], exact / exact[0], atol=1e-5)


def test_two_point_grid_convergence_is_second_order():
    p = constant_problem(1.0, 9.0, 1.0, Steklov())
    exact = 3 / math.tanh(1.5)
    errs = []
    for cells in (64, 128, 256):
        nodes = np.linspace(0.0, 1.0, cells + 1)
        errs.append(abs(mode_eigenvalues(p, nodes=nodes, extrapolate=False)[1] - exact))
    for a, b in zip(errs[:-1], errs[1:]):
        assert 3.2 <= a / b <= 4.8


def test_reduce_conformal_2d_has_unit_weight():
    scen = flat_cylinder(profile=ConformalStep(0.2, rise_end=0.4))
    mode = Circle(1.0).enumerate_modes(4.5)[-1]
    prob = reduce(scen, mode)
    t = np.linspace(0.0, 1.0, 11)
    w, q = prob.coefficients(t)
    assert np.allclose(w, 1.0) and np.allclose(q, mode.mu1)


def test_reduce_conformal_3d_weights():
    delta = ConformalStep(0.2, rise_end=0.4)
    scen = CollarScenario(FlatTorus((1.0, 1.0)), ConformalCylinder(delta, 3, 1.0), mode_cap=50.0)
    mode = scen.family.enumerate_modes(50.0)[1]
    prob = reduce(scen, mode)
    t = np.array([0.1, 0.3, 0.7])
    w, q = prob.coefficients(t)
    assert np.allclose(w, np.exp(delta.eval(t)))
    assert np.allclose(q, mode.mu1 * np.exp(delta.eval(t)))
    assert np.allclose(prob.volume_weight(t), np.exp(3 * delta.eval(t)))


def test_reduce_bleecker_potential():
    scen = CollarScenario(BergerS3(), BleeckerCollar(BleeckerRamp(0.1)), mode_cap=3.5)
    modes = {m.label: m for m in BergerS3().enumerate_modes(3.5)}
    assert np.allclose(reduce(scen, modes[(0, 0)]).coefficients(np.linspace(0, 3, 7))[1], 0.0)
    q = reduce(scen, modes[(1, 1)]).potential(0.5)
    assert float(q) == pytest.approx(2 * 501 + 501.0**-2, rel=1e-12)


def test_flat_mixed_cylinder_spectrum():
    spectrum = steklov_spectrum(flat_cylinder(), 5)
    expected = [0.0, math.tanh(1.0), math.tanh(1.0), 2 * math.tanh(2.0), 2 * math.tanh(2.0)]
    assert np.allclose(spectrum.values, expected, atol=1e-9)
    assert spectrum.provenance[0].mode_label == "(0)"
    assert spectrum.truncation_bound > spectrum.values[-1]


def test_flat_two_ended_cylinder_spectrum():
    spectrum = steklov_spectrum(flat_cylinder("steklov"), 6)
    expected = sorted([0.0, 2.0] + [math.tanh(0.5)] * 2 + [1 / math.tanh(0.5)] * 2 + [2 * math.tanh(1.0)] * 2)[:6]
    assert np.allclose(spectrum.values, expected, atol=1e-8)
    assert spectrum.sigma(1) == 0.0
    assert spectrum.truncation_bound > spectrum.values[-1]


def test_spectrum_csv(tmp_path):
    spectrum = steklov_spectrum(flat_cylinder(), 3)
    path = tmp_path / "s.csv"
    spectrum.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "index,sigma,mode_label,multiplicity_slot,truncation_bound"
    assert len(lines) == 4


def test_truncation_bound_is_below_every_later_mode():
    scen = flat_cylinder()
    spectrum = steklov_spectrum(scen, 5)
    later = [m for m in Circle(1.0).enumerate_modes(100.0) if m.mu1 > 4.0]
    for mode in later:
        assert mode_lower_bound(scen, mode) <= dtn_value(reduce(scen, mode)) * (1 + 1e-9)
    assert spectrum.truncation_bound <= min(dtn_value(reduce(scen, m)) for m in later) * (1 + 1e-9)


def test_neumann_gap():
    scen = flat_cylinder()
    assert neumann_gap(scen, 0.0, 1.0) == pytest.approx(1.0, rel=1e-6)
    assert neumann_gap(scen, 0.0, 1.0, include_cross_modes=False) == pytest.approx(math.pi**2, rel=1e-5)
    assert neumann_gap(flat_cylinder(length=4.0), 0.5, 3.0, include_cross_modes=False) == pytest.approx(
        math.pi**2 / 2.5**2, rel=1e-5
    )
    with pytest.raises(DomainError):
        neumann_gap(scen, 0.5, 0.5)


def test_collar_volume():
    torus = FlatTorus((1.0, 2.0))
    flat = CollarScenario(torus, ConformalCylinder(Constant(0.0), 3, 1.5))
    assert collar_volume(flat) == pytest.approx(2.0 * 1.5, rel=1e-12)
    lifted = CollarScenario(torus, ConformalCylinder(Constant(0.3), 3, 1.5))
    assert collar_volume(lifted) == pytest.approx(2.0 * 1.5 * math.exp(3 * 0.3), rel=1e-12)
    vols = [collar_volume(CollarScenario(BergerS3(), BleeckerCollar(BleeckerRamp(e)))) for e in (0.4, 0.1, 0.05)]
    assert np.allclose(vols, vols[0], rtol=1e-12)
    assert vols[0] == pytest.approx(2 * math.pi**2 * 3.0, rel=1e-12)


def test_dtn_monotone_in_potential():
    assert dtn_monotonicity_trials(40, seed=3) == 0


def test_errors():
    with pytest.raises(DomainError):
        steklov_spectrum(flat_cylinder(), 0)
    with pytest.raises(DomainError):
        dtn_value(constant_problem(1.0, 1.0, 1.0, Steklov()))
    with pytest.raises(DomainError):
        mode_eigenvalues(constant_problem(1.0, 1.0, 1.0))
    with pytest.raises(DomainError):
        dtn_value(constant_problem(1.0, 1.0, 1.0, grid_size=10))
    with pytest.raises(ConfigurationError):
        CollarScenario(Circle(1.0), ConformalCylinder(Constant(0.0), 3))
    with pytest.raises(ConfigurationError):
        CollarScenario(Circle(1.0), BleeckerCollar(BleeckerRamp(0.1)))
    with pytest.raises(ConfigurationError):
        flat_cylinder("robin")
