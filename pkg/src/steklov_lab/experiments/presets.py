"""Named scenarios with their default epsilon grid."""

from __future__ import annotations

import copy

from ..errors import ConfigurationError
from .config import ScenarioConfig

DEFAULT_GRID = [0.4, 0.2, 0.1, 0.05]

_TORUS = {"kind": "flat_torus", "edges": [1.0, 1.0]}

_PRESETS: dict[str, dict] = {
    # Berger S^3 boundary, volume-preserving Bleecker ramp, Neumann cap
    "thm11_bleecker_cylinder": {
        "geometry": {
            "family": {"kind": "berger_s3"},
            "collar": "bleecker",
            "length": 3.0,
            "right_end": "neumann",
            "mode_cap": 3.5,
        },
        "profile": {"kind": "bleecker_ramp"},
        "checks": [{"k": 2, "certificate": "fixed_volume", "delta": "auto"}],
    },
    # conformal bump supported in [eps, 4 eps]: support shrinks with eps
    "thm12_connected_collar": {
        "geometry": {"family": _TORUS, "collar": "conformal", "ambient_dim": 3, "length": 2.0, "right_end": "neumann"},
        "profile": {
            "kind": "conformal_pulse",
            "flat_width_eps": 1.0,
            "rise_end_eps": 2.0,
            "fall_start_eps": 3.0,
            "fall_end_eps": 4.0,
        },
        "checks": [{"k": 2, "certificate": "mixed", "b": 1, "lambda_next": "auto"}],
    },
    # two boundary tori; the deformation lives inside [0, 0.9] and [2.1, 3]
    "thm13_disconnected_b2": {
        "geometry": {"family": _TORUS, "collar": "conformal", "ambient_dim": 3, "length": 3.0, "right_end": "steklov"},
        "profile": {
            "kind": "mirrored",
            "length": 3.0,
            "inner": {"kind": "conformal_pulse", "rise_end_eps": 2.0, "fall_start": 0.8, "fall_end": 0.9},
        },
        "checks": [
            {
                "k": 2,
                "certificate": "component_upper",
                "regions": [
                    {"omega": [0.0, 0.9], "tilde": [0.0, 1.2]},
                    {"omega": [2.1, 3.0], "tilde": [1.8, 3.0]},
                ],
            },
            {"k": 3, "certificate": "mixed_auxiliary", "b": 2, "lambda_next": "auto"},
        ],
    },
    # both ends Steklov, deformation everywhere except eps-collars at the ends
    "lemma31_mixed": {
        "geometry": {"family": _TORUS, "collar": "conformal", "ambient_dim": 3, "length": 4.0, "right_end": "steklov"},
        "profile": {"kind": "mirrored", "length": 4.0, "inner": {"kind": "conformal_step", "rise_end_eps": 2.0}},
        "checks": [
            {
                "k": 2,
                "certificate": "mixed",
                "b": 2,
                "collar_length": 2.0,
                "omega": [1.0, 3.0],
                "lambda_next": "auto",
            }
        ],
    },
    "dim2_contrast": {
        "geometry": {
            "family": {"kind": "circle", "radius": 1.0},
            "collar": "conformal",
            "ambient_dim": 2,
            "length": 1.0,
            "right_end": "neumann",
        },
        "profile": {"kind": "conformal_pulse", "rise_end_eps": 2.0, "fall_start": 0.85, "fall_end": 0.95},
        "checks": [{"k": 2, "certificate": "invariance"}],
        "count": 8,
    },
    "dim3_contrast": {
        "geometry": {"family": _TORUS, "collar": "conformal", "ambient_dim": 3, "length": 1.0, "right_end": "neumann"},
        "profile": {"kind": "conformal_step", "rise_end_eps": 2.0},
        "checks": [{"k": 2, "certificate": "mixed", "b": 1, "lambda_next": "auto"}],
    },
    "quasi_isometry": {
        "solver": "fem",
        "fem": {"mesh": "disk", "refinement": 2, "trials": 20, "seed": 20240607, "k": 10},
    },
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str, epsilons=None) -> ScenarioConfig:
    if name not in _PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    data = copy.deepcopy(_PRESETS[name])
    data["name"] = name
    if data.get("solver", "mode") == "mode":
        data["epsilons"] = list(DEFAULT_GRID if epsilons is None else epsilons)
    return ScenarioConfig.from_dict(data)
