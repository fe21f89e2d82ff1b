from __future__ import annotations

import json
import math

import numpy as np
import pytest

from steklov_lab.acceptance import csv_is_deterministic
from steklov_lab.boundary_modes import Circle, FlatTorus
from steklov_lab.collar_profiles import ConformalPulse, Constant, Mirrored
from steklov_lab.errors import ConfigurationError, DomainError
from steklov_lab.experiments import (
    COLUMNS,
    Certificate,
    CutoffRegion,
    ScenarioConfig,
    build_scenario,
    certificate_auxiliary,
    certificate_fixed_volume,
    certificate_mixed,
    emit_certificates,
    emit_csv,
    emit_svg,
    invariance_certificate,
    lambda_next,
    preset,
    run_scenario,
    sweep,
    upper_bound_components,
)
from steklov_lab.mode_solver import CollarScenario, ConformalCylinder


def torus_cylinder(profile, length=3.0, right_end="steklov"):
    return CollarScenario(FlatTorus((1.0, 1.0)), ConformalCylinder(profile, 3, length, right_end))


def test_fixed_volume_certificate():
    c = certificate_fixed_volume(0.1, 2.0)
    assert c.constants["A"] == 0.25 and c.bound == pytest.approx(2.5)
    assert certificate_fixed_volume(0.1, 1.0).constants["A"] == 0.125
    assert certificate_fixed_volume(0.05, 2.0).bound == pytest.approx(5.0)
    assert c.holds(2.6) and not c.holds(2.4)
    with pytest.raises(DomainError):
        certificate_fixed_volume(1.0, 2.0)
    with pytest.raises(DomainError):
        certificate_fixed_volume(0.1, 0.0)


def test_mixed_certificate():
    one = certificate_mixed(0.1, 1.0, 1, 1.0)
    assert one.constants["A"] == pytest.approx(1 / 16) and "B" not in one.constants
    assert one.bound == pytest.approx(0.625)
    assert certificate_mixed(0.1, 0.1, 1, 1.0).constants["A"] == pytest.approx(0.025)
    two = certificate_mixed(0.1, 1.0, 2, 2.0, neumann_gap_value=1.0, component_volumes=[1.0, 1.0])
    # min(mu b L, 1/(2b)) = 1/4, over 32 (b-1)^2
    assert two.constants["B"] == pytest.approx(1 / 128)
    assert two.constants["C_final"] == pytest.approx(1 / 256)
    uneven = certificate_mixed(0.1, 1.0, 2, 2.0, neumann_gap_value=1.0, component_volumes=[1.0, 2.0])
    assert uneven.constants["B"] == pytest.approx(1 / 256)
    with pytest.raises(ConfigurationError):
        certificate_mixed(0.1, 1.0, 2, 2.0, neumann_gap_value=1.0, component_volumes=[1.0])
    with pytest.raises(DomainError):
        certificate_mixed(0.1, 1.0, 2, 2.0, component_volumes=[1.0, 1.0])


def test_auxiliary_certificate():
    c = certificate_auxiliary(0.1, 1.0, 2)
    assert c.bound == pytest.approx((1 / 16) / (2 * 0.1))
    assert c.is_lower


def test_certificate_json_roundtrip():
    c = certificate_mixed(0.2, 1.0, 2, 2.0, neumann_gap_value=0.5, component_volumes=[1.0, 1.0])
    assert Certificate.from_json(c.to_json()) == c
    assert json.loads(c.to_json())["kind"] == "mixed"


def test_invariance_certificate():
    c = invariance_certificate(2.0)
    assert c.holds(2.0 + 1e-10) and not c.holds(2.0 + 1e-6)


def test_component_upper_single_region():
    scen = torus_cylinder(Constant(0.0), right_end="neumann")
    c = upper_bound_components(scen, [CutoffRegion((0.0, 1.0), (0.0, 1.5))])
    # quintic smoothstep: int_0^1 (30 x^2 (1-x)^2)^2 dx = 10/7
    assert c.bound == pytest.approx((10 / 7) / 0.5, rel=1e-10)
    assert not c.is_lower and c.holds(1.0)


def test_component_upper_whole_collar_is_zero():
    scen = torus_cylinder(Constant(0.0), right_end="neumann")
    assert upper_bound_components(scen, [CutoffRegion((0.0, 3.0), (0.0, 3.0))]).bound == 0.0


def test_component_upper_symmetric_regions_and_checks():
    profile = Mirrored(ConformalPulse(0.1, rise_end=0.2, fall_start=0.8, fall_end=0.9), 3.0)
    scen = torus_cylinder(profile)
    regions = [CutoffRegion((0.0, 0.9), (0.0, 1.2)), CutoffRegion((2.1, 3.0), (1.8, 3.0))]
    c = upper_bound_components(scen, regions)
    e = c.inputs["energies"]
    assert e[0] == pytest.approx(e[1], rel=1e-12) and c.inputs["b"] == 2
    with pytest.raises(ConfigurationError, match="overlap"):
        upper_bound_components(scen, [CutoffRegion((0.0, 1.0), (0.0, 2.0)), CutoffRegion((2.0, 3.0), (1.5, 3.0))])
    with pytest.raises(ConfigurationError, match="boundary"):
        upper_bound_components(scen, [CutoffRegion((1.0, 2.0), (0.5, 2.5))])
    with pytest.raises(ConfigurationError, match="deformation"):
        upper_bound_components(scen, [CutoffRegion((0.0, 0.3), (0.0, 0.6))])


def test_lambda_next():
    assert lambda_next(Circle(1.0), 1) == pytest.approx(1.0)
    # two copies of the square torus: 0, 0, then 4 pi^2
    assert lambda_next(FlatTorus((1.0, 1.0)), 2) == pytest.approx(4 * math.pi**2)


def test_config_validation():
    base = preset("dim3_contrast").to_dict()
    with pytest.raises(ConfigurationError, match="empty"):
        ScenarioConfig.from_dict({**base, "epsilons": []})
    with pytest.raises(ConfigurationError, match="decreasing"):
        ScenarioConfig.from_dict({**base, "epsilons": [0.1, 0.2]})
    with pytest.raises(ConfigurationError):
        ScenarioConfig.from_dict({**base, "epsilons": [1.5]})
    with pytest.raises(ConfigurationError, match="unknown config keys"):
        ScenarioConfig.from_dict({**base, "colour": "red"})
    with pytest.raises(ConfigurationError):
        ScenarioConfig.from_dict({**base, "checks": [{"k": 1, "certificate": "mixed"}]})
    with pytest.raises(ConfigurationError):
        preset("no_such_preset")


def test_config_file_roundtrip(tmp_path):
    cfg = preset("lemma31_mixed", [0.2, 0.1])
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ScenarioConfig.load(path) == cfg
    path.write_text("{not json")
    with pytest.raises(ConfigurationError):
        ScenarioConfig.load(path)


def test_build_scenario_undeformed():
    cfg = preset("dim3_contrast")
    flat = build_scenario(cfg, None)
    assert flat.profile.eval(0.5) == 0.0
    assert build_scenario(cfg, 0.1).profile.eval(0.5) > 0.0


def test_fixed_volume_sweep():
    table = sweep(preset("thm11_bleecker_cylinder"))
    assert len(table.rows) == 4 and table.all_hold
    assert table.epsilons() == [0.4, 0.2, 0.1, 0.05]
    scaled = [r.sigma_k * r.epsilon for r in table.rows]
    assert all(r.sigma_k >= r.certificate_bound for r in table.rows)
    assert np.all(np.diff(table.sigma(2)) > 0) and min(scaled) > 0.25
    vols = [r.volume for r in table.rows]
    assert np.allclose(vols, vols[0], rtol=1e-12)


def test_dimension_two_is_invariant():
    table = sweep(preset("dim2_contrast", [0.4, 0.1]))
    s = table.sigma(2)
    assert table.all_hold and abs(s[0] - s[1]) <= 1e-9 * s[0]


def test_run_scenario_defaults_to_first_epsilon():
    table = run_scenario(preset("dim3_contrast", [0.3, 0.1]))
    assert [r.epsilon for r in table.rows] == [0.3]


def test_boundary_metric_must_not_move():
    cfg = preset("dim3_contrast").to_dict()
    cfg["profile"] = {"kind": "constant", "value": 0.5}
    with pytest.raises(ConfigurationError, match="boundary metric"):
        run_scenario(ScenarioConfig.from_dict(cfg))


def test_reports(tmp_path):
    table = sweep(preset("dim3_contrast", [0.3, 0.15]))
    csv_path = emit_csv(table, tmp_path / "t.csv")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == ",".join(COLUMNS) and len(lines) == 3
    certs = json.loads(emit_certificates(table, tmp_path / "t.certificates.json").read_text())
    assert [c["kind"] for c in certs] == ["mixed", "mixed"]
    svg = emit_svg(table, tmp_path / "t.svg")
    assert svg.read_text().lstrip().startswith("<?xml") and "<svg" in svg.read_text()
    with pytest.raises(OSError):
        emit_csv(table, tmp_path / "missing" / "dir" / "t.csv")


def test_csv_is_deterministic():
    assert csv_is_deterministic("dim3_contrast")
