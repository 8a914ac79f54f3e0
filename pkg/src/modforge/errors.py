"""Exception hierarchy and structured diagnostics.

Every failure surfaced to a user carries a pipeline stage and, where known,
the entity (module, instance, connector, frame) it concerns, so that CLI
and HTTP layers can report it without string-parsing.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    path: str      # dotted field path, e.g. "elbow_a.frames.T_joint_out"
    message: str

    def __str__(self) -> str:
        return f"[{self.severity}] {self.path}: {self.message}"


class ModforgeError(Exception):
    """Base class; carries stage/entity for structured reporting."""

    stage = "general"

    def __init__(self, message: str, *, entity: str | None = None):
        super().__init__(message)
        self.entity = entity

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "entity": self.entity,
            "message": str(self),
        }


class CatalogError(ModforgeError):
    stage = "catalog"


class AssemblyError(ModforgeError):
    stage = "assembly"


class TopologyCorruptionError(ModforgeError):
    """The slave ring is inconsistent with any tree-shaped network."""

    stage = "topology"


class ModelError(ModforgeError):
    stage = "model"


class CustomizationError(ModforgeError):
    stage = "customization"


class LimitError(ModforgeError):
    """A joint value lies outside its position range."""

    stage = "limits"


class ContractError(ModforgeError):
    """An operation was called in violation of its preconditions."""

    stage = "contract"
