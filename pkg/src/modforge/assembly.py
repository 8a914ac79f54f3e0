"""Assembly declarations: what the human bolted together.

An assembly is an ordered list of placements forming a tree. Files are JSON
or YAML with the same field names; ``flipped`` defaults to false and is only
honored by simulation code that explicitly allows violation scenarios.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .database import ModuleDatabase
from .errors import AssemblyError


@dataclass(frozen=True)
class Placement:
    instance_id: str
    module_id: str
    parent_instance: str | None = None
    parent_connector: str | None = None
    flipped: bool = False

    def to_json(self) -> dict:
        out = {
            "instance_id": self.instance_id,
            "module_id": self.module_id,
            "parent_instance": self.parent_instance,
            "parent_connector": self.parent_connector,
        }
        if self.flipped:
            out["flipped"] = True
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Placement":
        return cls(
            instance_id=obj["instance_id"],
            module_id=obj["module_id"],
            parent_instance=obj.get("parent_instance"),
            parent_connector=obj.get("parent_connector"),
            flipped=bool(obj.get("flipped", False)),
        )


@dataclass
class AssemblySpec:
    placements: list[Placement]
    root: str

    def placement(self, instance_id: str) -> Placement | None:
        for p in self.placements:
            if p.instance_id == instance_id:
                return p
        return None

    def children_of(self, instance_id: str) -> list[Placement]:
        return [p for p in self.placements if p.parent_instance == instance_id]

    def to_json(self) -> dict:
        return {"root": self.root, "placements": [p.to_json() for p in self.placements]}

    @classmethod
    def from_json(cls, obj: dict) -> "AssemblySpec":
        placements = [Placement.from_json(p) for p in obj.get("placements", [])]
        root = obj.get("root")
        if root is None and placements:
            root = placements[0].instance_id
        return cls(placements=placements, root=root or "")

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")).encode("utf-8")

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical_bytes()).hexdigest()


def validate_assembly(assembly: AssemblySpec, db: ModuleDatabase) -> None:
    """Check the placement list forms a connector-respecting tree.

    Raises AssemblyError on the first structural violation. Flip legality is
    checked separately by the network simulator, which owns that scenario.
    """
    if not assembly.placements:
        raise AssemblyError("assembly has no placements")
    seen: dict[str, Placement] = {}
    occupied: set[tuple[str, str]] = set()
    roots = [p for p in assembly.placements if p.parent_instance is None]
    if len(roots) != 1:
        raise AssemblyError(f"assembly must have exactly one root placement, found {len(roots)}")
    if roots[0].instance_id != assembly.root:
        raise AssemblyError(
            f"declared root {assembly.root!r} does not match the parentless "
            f"placement {roots[0].instance_id!r}"
        )

    for p in assembly.placements:
        if p.instance_id in seen:
            raise AssemblyError(f"duplicate instance id {p.instance_id!r}", entity=p.instance_id)
        desc = db.lookup(p.module_id)
        if desc is None:
            raise AssemblyError(f"unknown module_identifier {p.module_id!r}", entity=p.instance_id)
        if p.parent_instance is None:
            if p.parent_connector is not None:
                raise AssemblyError(
                    f"root placement {p.instance_id!r} cannot name a parent connector",
                    entity=p.instance_id,
                )
        else:
            parent = seen.get(p.parent_instance)
            if parent is None:
                raise AssemblyError(
                    f"placement {p.instance_id!r} references parent "
                    f"{p.parent_instance!r} that is not placed before it",
                    entity=p.instance_id,
                )
            parent_desc = db.lookup(parent.module_id)
            conn = parent_desc.connector(p.parent_connector or "")
            if conn is None:
                raise AssemblyError(
                    f"unknown connector {p.parent_connector!r} on module "
                    f"{parent.module_id!r}",
                    entity=p.instance_id,
                )
            if parent.flipped:
                if conn.kind != "input":
                    raise AssemblyError(
                        f"flipped module {parent.instance_id!r} exposes only its input "
                        f"connector downstream",
                        entity=p.instance_id,
                    )
            elif conn.kind != "output":
                raise AssemblyError(
                    f"connector {p.parent_connector!r} of {parent.module_id!r} is not "
                    f"an output connector",
                    entity=p.instance_id,
                )
            key = (p.parent_instance, p.parent_connector)
            if key in occupied:
                raise AssemblyError(
                    f"connector {p.parent_connector!r} of {p.parent_instance!r} is "
                    f"already occupied",
                    entity=p.instance_id,
                )
            occupied.add(key)
        seen[p.instance_id] = p


def load_assembly(path: str | Path) -> AssemblySpec:
    path = Path(path)
    if not path.exists():
        raise AssemblyError(f"assembly file {path} does not exist")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in (".yaml", ".yml"):
        obj = yaml.safe_load(text)
    else:
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise AssemblyError(
                f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}"
            ) from exc
    if not isinstance(obj, dict):
        raise AssemblyError(f"{path}: assembly document must be a mapping")
    return AssemblySpec.from_json(obj)
