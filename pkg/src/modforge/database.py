"""Module database: catalog types, loading, validation, serialization.

Each robot module is described by one JSON object. A database is either a
directory of per-module files, a single aggregate ``catalog.json`` holding
``{"version": ..., "modules": [...]}``, or a single-module file. The package
ships a default catalog covering the full module set.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import CatalogError, Diagnostic
from .geometry import Transform, TwistAxis

MODULE_TYPES = ("Joint", "Link", "Hub", "EndEffector")
SEMANTIC_TAGS = ("gripper", "wheel", "drill", "sander", "sprayer", "none")
INERTIA_SYMMETRY_TOL = 1e-12
INERTIA_TRIANGLE_TOL = 1e-9


@dataclass(frozen=True)
class ActuatorSpec:
    actuator_type: str
    gear_ratio: float
    max_velocity: float        # rad/s
    peak_torque: float         # N*m
    continuous_torque: float   # N*m
    position_range: tuple[float, float]  # rad (or m for prismatic)
    peak_power: float | None = None        # W
    continuous_power: float | None = None  # W
    actuator_mass: float | None = None     # kg

    def to_json(self) -> dict:
        out = {
            "actuator_type": self.actuator_type,
            "gear_ratio": self.gear_ratio,
            "max_velocity": self.max_velocity,
            "peak_torque": self.peak_torque,
            "continuous_torque": self.continuous_torque,
            "position_range": list(self.position_range),
        }
        if self.peak_power is not None:
            out["peak_power"] = self.peak_power
        if self.continuous_power is not None:
            out["continuous_power"] = self.continuous_power
        if self.actuator_mass is not None:
            out["actuator_mass"] = self.actuator_mass
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ActuatorSpec":
        return cls(
            actuator_type=obj["actuator_type"],
            gear_ratio=float(obj["gear_ratio"]),
            max_velocity=float(obj["max_velocity"]),
            peak_torque=float(obj["peak_torque"]),
            continuous_torque=float(obj["continuous_torque"]),
            position_range=(float(obj["position_range"][0]), float(obj["position_range"][1])),
            peak_power=obj.get("peak_power"),
            continuous_power=obj.get("continuous_power"),
            actuator_mass=obj.get("actuator_mass"),
        )


class BodyInertia:
    """Mass, CoM (body frame, m) and inertia about the CoM (kg*m^2)."""

    __slots__ = ("mass", "com", "inertia")

    def __init__(self, mass: float, com, inertia):
        self.mass = float(mass)
        self.com = np.asarray(com, dtype=float)
        self.inertia = np.asarray(inertia, dtype=float)

    @classmethod
    def zero(cls) -> "BodyInertia":
        return cls(0.0, np.zeros(3), np.zeros((3, 3)))

    def to_json(self) -> dict:
        ine = self.inertia
        return {
            "mass": self.mass,
            "com": [float(v) for v in self.com],
            "inertia": {
                "ixx": float(ine[0, 0]), "ixy": float(ine[0, 1]), "ixz": float(ine[0, 2]),
                "iyy": float(ine[1, 1]), "iyz": float(ine[1, 2]), "izz": float(ine[2, 2]),
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BodyInertia":
        i = obj["inertia"]
        mat = np.array([
            [i["ixx"], i["ixy"], i["ixz"]],
            [i["ixy"], i["iyy"], i["iyz"]],
            [i["ixz"], i["iyz"], i["izz"]],
        ], dtype=float)
        return cls(obj["mass"], obj["com"], mat)


@dataclass(frozen=True)
class ConnectorSpec:
    name: str
    kind: str                 # "input" | "output"
    esc_index: int | None     # None only on modules without an ESC
    esc_port: int | None
    size: str = "standard"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "esc_index": self.esc_index,
            "esc_port": self.esc_port,
            "size": self.size,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ConnectorSpec":
        return cls(
            name=obj["name"],
            kind=obj["kind"],
            esc_index=obj.get("esc_index"),
            esc_port=obj.get("esc_port"),
            size=obj.get("size", "standard"),
        )


@dataclass(frozen=True)
class JointSpec:
    axis: TwistAxis
    actuator: ActuatorSpec

    def to_json(self) -> dict:
        return {"kind": self.axis.kind, "actuator": self.actuator.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "JointSpec":
        return cls(TwistAxis(obj["kind"]), ActuatorSpec.from_json(obj["actuator"]))


@dataclass(frozen=True)
class MeshRef:
    path: str
    origin: Transform

    def to_json(self) -> dict:
        return {"path": self.path, "origin": self.origin.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "MeshRef":
        return cls(obj["path"], Transform.from_json(obj["origin"]))


@dataclass
class ModuleDescription:
    module_identifier: str
    module_type: str
    connectors: list[ConnectorSpec]
    esc_count: int
    frames: dict[str, Transform]
    inertia: list[BodyInertia]
    internal_links: list[tuple[tuple[int, int], tuple[int, int]]] = field(default_factory=list)
    joint: JointSpec | None = None
    semantic_tag: str = "none"
    mesh_ref: MeshRef | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def is_actuated(self) -> bool:
        return self.joint is not None

    @property
    def input_connector(self) -> ConnectorSpec:
        return next(c for c in self.connectors if c.kind == "input")

    @property
    def output_connectors(self) -> list[ConnectorSpec]:
        return [c for c in self.connectors if c.kind == "output"]

    def connector(self, name: str) -> ConnectorSpec | None:
        for c in self.connectors:
            if c.name == name:
                return c
        return None

    def connector_at(self, esc_index: int, esc_port: int) -> ConnectorSpec | None:
        for c in self.connectors:
            if c.esc_index == esc_index and c.esc_port == esc_port:
                return c
        return None

    def internal_link_target(self, esc_index: int, esc_port: int) -> int | None:
        """ESC wired downstream of (esc_index, esc_port), if that pair is internal wiring."""
        for (src, dst) in self.internal_links:
            if tuple(src) == (esc_index, esc_port):
                return dst[0]
        return None

    def output_transform(self, connector_name: str) -> Transform:
        """Input-frame -> output-frame transform for one output connector (Link/Hub)."""
        key = f"T_in_out:{connector_name}"
        if key in self.frames:
            return self.frames[key]
        if "T_in_out" in self.frames and len(self.output_connectors) == 1:
            return self.frames["T_in_out"]
        raise CatalogError(
            f"module {self.module_identifier!r} has no output transform for "
            f"connector {connector_name!r}",
            entity=self.module_identifier,
        )

    @property
    def tip_frame_key(self) -> str | None:
        for key in ("T_in_tcp", "T_in_wheel"):
            if key in self.frames:
                return key
        return None

    def to_json(self) -> dict:
        out = {
            "module_identifier": self.module_identifier,
            "module_type": self.module_type,
            "esc_count": self.esc_count,
            "connectors": [c.to_json() for c in self.connectors],
            "internal_links": [[list(src), list(dst)] for src, dst in self.internal_links],
            "frames": {k: t.to_json() for k, t in sorted(self.frames.items())},
            "joint": self.joint.to_json() if self.joint else None,
            "inertia": [b.to_json() for b in self.inertia],
            "semantic_tag": self.semantic_tag,
            "mesh_ref": self.mesh_ref.to_json() if self.mesh_ref else None,
        }
        if self.provenance:
            out["provenance"] = self.provenance
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ModuleDescription":
        return cls(
            module_identifier=obj["module_identifier"],
            module_type=obj["module_type"],
            connectors=[ConnectorSpec.from_json(c) for c in obj.get("connectors", [])],
            esc_count=int(obj.get("esc_count", 0)),
            internal_links=[
                (tuple(src), tuple(dst)) for src, dst in obj.get("internal_links", [])
            ],
            frames={k: Transform.from_json(v) for k, v in obj.get("frames", {}).items()},
            joint=JointSpec.from_json(obj["joint"]) if obj.get("joint") else None,
            inertia=[BodyInertia.from_json(b) for b in obj.get("inertia", [])],
            semantic_tag=obj.get("semantic_tag", "none"),
            mesh_ref=MeshRef.from_json(obj["mesh_ref"]) if obj.get("mesh_ref") else None,
            provenance=obj.get("provenance", {}),
        )


@dataclass
class ModuleDatabase:
    entries: dict[str, ModuleDescription]
    version: str = "unversioned"
    warnings: list[Diagnostic] = field(default_factory=list)

    def lookup(self, module_id: str) -> ModuleDescription | None:
        return self.entries.get(module_id)

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "modules": [self.entries[k].to_json() for k in sorted(self.entries)],
        }


def lookup(db: ModuleDatabase, module_id: str) -> ModuleDescription | None:
    """Catalog lookup; returns None for unknown identifiers."""
    return db.lookup(module_id)


def _check_inertia(prefix: str, body: BodyInertia, diags: list[Diagnostic]) -> None:
    if body.mass < 0:
        diags.append(Diagnostic("error", f"{prefix}.mass", f"mass {body.mass} < 0"))
    ine = body.inertia
    if np.max(np.abs(ine - ine.T)) > INERTIA_SYMMETRY_TOL:
        diags.append(Diagnostic("error", f"{prefix}.inertia", "inertia matrix not symmetric"))
        return
    eigvals = np.linalg.eigvalsh(ine)
    if eigvals[0] < -INERTIA_SYMMETRY_TOL:
        diags.append(Diagnostic(
            "error", f"{prefix}.inertia", f"not positive semi-definite (min eig {eigvals[0]:g})"
        ))
    a, b, c = sorted(float(v) for v in eigvals)
    if a + b < c - INERTIA_TRIANGLE_TOL:
        diags.append(Diagnostic(
            "error", f"{prefix}.inertia",
            f"principal moments violate the triangle inequality ({a:g} + {b:g} < {c:g})",
        ))


def _required_frames(desc: ModuleDescription) -> list[str]:
    if desc.module_type == "Joint":
        return ["T_in_joint", "T_joint_out"]
    if desc.module_type in ("Link", "Hub"):
        if len(desc.output_connectors) == 1 and "T_in_out" in desc.frames:
            return ["T_in_out"]
        return [f"T_in_out:{c.name}" for c in desc.output_connectors]
    # EndEffector
    needed = []
    if desc.joint is not None:
        needed.append("T_in_joint")
    if desc.tip_frame_key is None:
        needed.append("T_in_tcp")  # reported missing; T_in_wheel also satisfies
    return needed


def validate_module(desc: ModuleDescription) -> list[Diagnostic]:
    """Check every module invariant; empty list means the entry is well-formed."""
    diags: list[Diagnostic] = []
    mid = desc.module_identifier

    def err(path: str, message: str) -> None:
        diags.append(Diagnostic("error", f"{mid}.{path}", message))

    if not mid:
        diags.append(Diagnostic("error", "module_identifier", "empty identifier"))
    if desc.module_type not in MODULE_TYPES:
        err("module_type", f"unknown module type {desc.module_type!r}")
        return diags
    if desc.semantic_tag not in SEMANTIC_TAGS:
        err("semantic_tag", f"unknown semantic tag {desc.semantic_tag!r}")
    if desc.esc_count < 0:
        err("esc_count", "esc_count must be >= 0")

    inputs = [c for c in desc.connectors if c.kind == "input"]
    outputs = desc.output_connectors
    if len(inputs) != 1:
        err("connectors", f"expected exactly one input connector, found {len(inputs)}")
    else:
        inp = inputs[0]
        if desc.esc_count > 0 and (inp.esc_index, inp.esc_port) != (0, 0):
            err("connectors.input", "input connector must map to port 0 of ESC 0")
        if desc.esc_count == 0 and (inp.esc_index is not None or inp.esc_port is not None):
            err("connectors.input", "module without ESC cannot map its connector to a port")

    seen_ports: set[tuple[int, int]] = set()
    for c in outputs:
        if desc.esc_count == 0:
            err(f"connectors.{c.name}", "module without ESC cannot have output connectors")
            continue
        if c.esc_index is None or c.esc_port is None:
            err(f"connectors.{c.name}", "output connector missing ESC mapping")
            continue
        if not (0 <= c.esc_index < desc.esc_count):
            err(f"connectors.{c.name}", f"esc_index {c.esc_index} out of range")
        if c.esc_port not in (1, 2, 3):
            err(f"connectors.{c.name}", f"output port must be 1..3, got {c.esc_port}")
        if (c.esc_index, c.esc_port) in seen_ports:
            err(f"connectors.{c.name}", f"duplicate (esc, port) pair {(c.esc_index, c.esc_port)}")
        seen_ports.add((c.esc_index, c.esc_port))

    wired = set()
    for (src, dst) in desc.internal_links:
        src, dst = tuple(src), tuple(dst)
        if dst[1] != 0:
            err("internal_links", f"internal link must enter the downstream ESC at port 0: {dst}")
        if src in seen_ports:
            err("internal_links", f"internal link source {src} collides with a connector port")
        seen_ports.add(src)
        wired.add(dst[0])
    if desc.esc_count >= 2:
        missing = [e for e in range(1, desc.esc_count) if e not in wired]
        if missing:
            err("internal_links", f"ESCs {missing} not wired to the first ESC")

    if desc.module_type == "EndEffector" and outputs:
        err("connectors", "EndEffector modules must have zero output connectors")

    expects_joint = desc.module_type == "Joint" or (
        desc.module_type == "EndEffector" and desc.joint is not None
    )
    if desc.module_type == "Joint" and desc.joint is None:
        err("joint", "Joint module requires a joint definition")
    if desc.module_type in ("Link", "Hub") and desc.joint is not None:
        err("joint", f"{desc.module_type} module cannot be actuated")
    expected_bodies = 2 if expects_joint and desc.joint is not None else 1
    if len(desc.inertia) != expected_bodies:
        err("inertia", f"expected {expected_bodies} inertia entries, found {len(desc.inertia)}")
    for i, body in enumerate(desc.inertia):
        _check_inertia(f"{mid}.inertia[{i}]", body, diags)

    if desc.joint is not None:
        act = desc.joint.actuator
        if not (0 < act.continuous_torque <= act.peak_torque):
            err("joint.actuator", "need 0 < continuous_torque <= peak_torque")
        if act.max_velocity <= 0:
            err("joint.actuator.max_velocity", "max_velocity must be > 0")
        if act.position_range[0] >= act.position_range[1]:
            err("joint.actuator.position_range", "range min must be < max")

    for key in _required_frames(desc):
        if key not in desc.frames:
            err(f"frames.{key}", "required transform missing")
    for key, tf in desc.frames.items():
        gram_defect, det_defect = tf.orthonormality_defects()
        if gram_defect > 1e-9 or det_defect > 1e-9:
            err(f"frames.{key}", "rotation is not a proper orthonormal matrix")

    return diags


def _iter_module_objects(path: Path):
    """Yield (source_file, module_json) pairs; accepts files and directories."""
    def parse(file: Path):
        try:
            doc = json.loads(file.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CatalogError(
                f"{file}: malformed JSON at line {exc.lineno} column {exc.colno} "
                f"(offset {exc.pos})",
                entity=str(file),
            ) from exc
        if isinstance(doc, dict) and "modules" in doc:
            for mod in doc["modules"]:
                yield file, mod, doc.get("version")
        elif isinstance(doc, list):
            for mod in doc:
                yield file, mod, None
        else:
            yield file, doc, None

    if path.is_dir():
        for file in sorted(path.glob("*.json")):
            yield from parse(file)
    else:
        yield from parse(path)


def load_database(path: str | Path) -> ModuleDatabase:
    """Load and validate a module database from a file or directory."""
    path = Path(path)
    if not path.exists():
        raise CatalogError(f"database path {path} does not exist", entity=str(path))

    entries: dict[str, ModuleDescription] = {}
    version: str | None = None
    warnings: list[Diagnostic] = []

    for file, obj, doc_version in _iter_module_objects(path):
        if doc_version and version is None:
            version = doc_version
        try:
            desc = ModuleDescription.from_json(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise CatalogError(
                f"{file}: module entry is structurally invalid: {exc}", entity=str(file)
            ) from exc
        if desc.module_identifier in entries:
            raise CatalogError(
                f"duplicate module identifier {desc.module_identifier!r} (in {file})",
                entity=desc.module_identifier,
            )
        diags = validate_module(desc)
        errors = [d for d in diags if d.severity == "error"]
        if errors:
            raise CatalogError(
                "module validation failed:\n" + "\n".join(str(d) for d in errors),
                entity=desc.module_identifier,
            )
        warnings.extend(d for d in diags if d.severity == "warning")
        if desc.mesh_ref is not None:
            mesh_path = Path(desc.mesh_ref.path)
            if not mesh_path.is_absolute():
                mesh_path = file.parent / mesh_path
            if not mesh_path.exists():
                warnings.append(Diagnostic(
                    "warning", f"{desc.module_identifier}.mesh_ref",
                    f"mesh file {desc.mesh_ref.path!r} not resolvable",
                ))
        entries[desc.module_identifier] = desc

    ordered = {k: entries[k] for k in sorted(entries)}
    return ModuleDatabase(ordered, version=version or "unversioned", warnings=warnings)


def default_catalog_path() -> Path:
    """Location of the catalog shipped with the package."""
    return Path(resources.files("modforge") / "catalog" / "catalog.json")


def load_default_database() -> ModuleDatabase:
    return load_database(default_catalog_path())
