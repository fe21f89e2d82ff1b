"""Scenario presets, eigenvalue certificates, epsilon sweeps and reporting."""

from .certificates import (
    Certificate,
    CutoffRegion,
    certificate_auxiliary,
    certificate_fixed_volume,
    certificate_mixed,
    invariance_certificate,
    lambda_next,
    upper_bound_components,
)
from .config import ScenarioConfig, build_scenario
from .presets import DEFAULT_GRID, PRESET_NAMES, preset
from .report import emit_certificates, emit_csv, emit_ratio_csv, emit_report_json, emit_svg
from .runner import COLUMNS, ResultTable, Row, quasi_isometry_trials, run_scenario, sweep

__all__ = [
    "Certificate",
    "CutoffRegion",
    "certificate_auxiliary",
    "certificate_fixed_volume",
    "certificate_mixed",
    "invariance_certificate",
    "lambda_next",
    "upper_bound_components",
    "ScenarioConfig",
    "build_scenario",
    "DEFAULT_GRID",
    "PRESET_NAMES",
    "preset",
    "emit_certificates",
    "emit_csv",
    "emit_ratio_csv",
    "emit_report_json",
    "emit_svg",
    "COLUMNS",
    "ResultTable",
    "Row",
    "quasi_isometry_trials",
    "run_scenario",
    "sweep",
]
