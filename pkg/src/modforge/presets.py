"""Preset assemblies shipped with the package.

These mirror the robot builds used throughout the docs and tests: the three
drilling-arm morphologies (total lengths 1.75 m / 2.15 m / 2.75 m), the
collaborative gripper arm (2.0 m), the mobile robot with four steered wheels
and a drill arm, and a dual-arm torso build.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .assembly import AssemblySpec
from .errors import AssemblyError

PRESET_NAMES = (
    "morphology_a",
    "morphology_b",
    "morphology_c",
    "collab_arm",
    "fig5_robot",
    "torso_dual_arm",
)


def preset_path(name: str) -> Path:
    if name not in PRESET_NAMES:
        raise AssemblyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return Path(resources.files("modforge") / "assemblies" / f"{name}.json")


def load_preset(name: str) -> AssemblySpec:
    doc = json.loads(preset_path(name).read_text(encoding="utf-8"))
    return AssemblySpec.from_json(doc)
