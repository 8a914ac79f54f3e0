"""URDF/SRDF emission and bundle reading.

The emitted XML is byte-deterministic: fixed element and attribute order,
two-space indentation, and shortest-round-trip float formatting (integral
values render without a decimal point). Bundles are a directory with
``robot.urdf``, ``robot.srdf``, ``homing.json`` and ``manifest.json``.
"""
from __future__ import annotations

import json
import os
import xml.etree.ElementTree as ET
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .database import BodyInertia
from .errors import ModelError
from .geometry import Transform, TwistAxis
from .model import BodyNode, BodySource, JointEdge, JointLimits, PhysicalGraph

URDF_FILE = "robot.urdf"
SRDF_FILE = "robot.srdf"
HOMING_FILE = "homing.json"
MANIFEST_FILE = "manifest.json"


def fmt_float(value: float) -> str:
    """Shortest decimal that round-trips; integral values without a point."""
    value = float(value)
    if value == 0.0:
        return "0"
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _fmt_vec(values) -> str:
    return " ".join(fmt_float(v) for v in values)


def _origin_line(indent: str, tf: Transform) -> str:
    return (f'{indent}<origin xyz="{_fmt_vec(tf.translation)}" '
            f'rpy="{_fmt_vec(tf.rpy())}"/>\n')


def _check_tree(phi: PhysicalGraph) -> None:
    children: dict[str, list[str]] = {}
    for edge in phi.edges:
        children.setdefault(edge.parent, []).append(edge.child)
    seen = set()
    stack = [phi.root]
    while stack:
        cur = stack.pop()
        if cur in seen:
            raise ModelError("model graph contains a cycle; emission refused")
        seen.add(cur)
        stack.extend(children.get(cur, []))
    orphans = set(phi.bodies) - seen
    if orphans:
        raise ModelError(
            f"model graph has orphan bodies {sorted(orphans)}; emission refused"
        )


def emit_urdf(phi: PhysicalGraph) -> str:
    """Serialize the physical graph as URDF; node/edge mapping is 1:1."""
    _check_tree(phi)
    out: list[str] = ['<?xml version="1.0" encoding="utf-8"?>\n']
    out.append(f'<robot name="{phi.robot_name}">\n')

    def link_block(node: BodyNode) -> None:
        ine = node.inertia
        out.append(f'  <link name="{node.name}">\n')
        out.append('    <inertial>\n')
        out.append(f'      <origin xyz="{_fmt_vec(ine.com)}" rpy="0 0 0"/>\n')
        out.append(f'      <mass value="{fmt_float(ine.mass)}"/>\n')
        out.append(
            f'      <inertia ixx="{fmt_float(ine.inertia[0, 0])}" '
            f'ixy="{fmt_float(ine.inertia[0, 1])}" '
            f'ixz="{fmt_float(ine.inertia[0, 2])}" '
            f'iyy="{fmt_float(ine.inertia[1, 1])}" '
            f'iyz="{fmt_float(ine.inertia[1, 2])}" '
            f'izz="{fmt_float(ine.inertia[2, 2])}"/>\n'
        )
        out.append('    </inertial>\n')
        if node.mesh_ref is not None:
            for tag in ("visual", "collision"):
                out.append(f'    <{tag}>\n')
                out.append(_origin_line("      ", node.mesh_ref.origin))
                out.append('      <geometry>\n')
                out.append(f'        <mesh filename="{node.mesh_ref.path}"/>\n')
                out.append('      </geometry>\n')
                out.append(f'    </{tag}>\n')
        out.append('  </link>\n')

    def joint_block(edge: JointEdge) -> None:
        out.append(f'  <joint name="{edge.name}" type="{edge.kind}">\n')
        out.append(_origin_line("    ", edge.origin))
        out.append(f'    <parent link="{edge.parent}"/>\n')
        out.append(f'    <child link="{edge.child}"/>\n')
        if edge.is_moving:
            out.append('    <axis xyz="0 0 1"/>\n')
            lim = edge.limits
            out.append(
                f'    <limit effort="{fmt_float(lim.effort)}" '
                f'velocity="{fmt_float(lim.velocity)}" '
                f'lower="{fmt_float(lim.lower)}" '
                f'upper="{fmt_float(lim.upper)}"/>\n'
            )
        out.append('  </joint>\n')

    link_block(phi.bodies[phi.root])
    for edge in phi.edges:
        joint_block(edge)
        link_block(phi.bodies[edge.child])
    out.append('</robot>\n')
    return "".join(out)


def emit_srdf(phi: PhysicalGraph) -> str:
    """Semantic description: one group per chain, end-effector declarations."""
    _check_tree(phi)
    out: list[str] = ['<?xml version="1.0" encoding="utf-8"?>\n']
    out.append(f'<robot name="{phi.robot_name}">\n')
    group_names: dict[str, str] = {}
    for tag in sorted(phi.chains):
        bodies = phi.chains[tag]
        if not bodies:
            continue
        cls = phi.semantics.get(tag, "unclassified")
        gname = f"{cls}_{tag}" if cls in ("arm", "leg") else f"chain_{tag}"
        group_names[tag] = gname
        base = phi.chain_base.get(tag, phi.root)
        out.append(f'  <group name="{gname}">\n')
        out.append(f'    <chain base_link="{base}" tip_link="{bodies[-1]}"/>\n')
        out.append('  </group>\n')
    for tag in sorted(phi.chains):
        tip = phi.chain_tip.get(tag)
        if tip is None or tag not in group_names:
            continue
        semantic = phi.ee_semantic.get(tag, "none")
        out.append(
            f'  <end_effector name="{semantic}_{tag}" parent_link="{tip}" '
            f'group="{group_names[tag]}"/>\n'
        )
    out.append('</robot>\n')
    return "".join(out)


def _generated_at() -> str | None:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is None:
        return None
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()


def build_manifest(phi: PhysicalGraph, catalog_version: str,
                   assembly_hash: str, slave_count: int) -> dict:
    return {
        "robot_name": phi.robot_name,
        "catalog_version": catalog_version,
        "assembly_hash": assembly_hash,
        "slave_count": slave_count,
        "bodies": len(phi.bodies),
        "joints": len(phi.edges),
        "moving_joints": [e.name for e in phi.moving_joints],
        "generated_at": _generated_at(),
    }


def bundle_texts(phi: PhysicalGraph, manifest: dict) -> dict[str, str]:
    """Exact file contents of a bundle, keyed by file name."""
    return {
        URDF_FILE: emit_urdf(phi),
        SRDF_FILE: emit_srdf(phi),
        HOMING_FILE: json.dumps(phi.homing, indent=2, sort_keys=True) + "\n",
        MANIFEST_FILE: json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    }


def write_bundle(out_dir: str | Path, phi: PhysicalGraph, manifest: dict) -> dict[str, Path]:
    """Write the deployable bundle; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    written: list[Path] = []
    try:
        for name, text in bundle_texts(phi, manifest).items():
            path = out_dir / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
            paths[name] = path
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return paths


def _parse_origin(elem) -> Transform:
    if elem is None:
        return Transform.identity()
    xyz = [float(v) for v in elem.get("xyz", "0 0 0").split()]
    rpy = [float(v) for v in elem.get("rpy", "0 0 0").split()]
    return Transform.from_rpy(xyz, rpy)


def parse_urdf(text: str, robot_name_hint: str | None = None) -> PhysicalGraph:
    """Rebuild a physical graph from URDF text (our emission subset).

    Moving joints must rotate/translate about the child-frame Z axis, which
    is the frame convention every emitted model follows.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ModelError(f"URDF parse error: {exc}") from exc
    phi = PhysicalGraph(root.get("name", robot_name_hint or "robot"))

    links: dict[str, BodyNode] = {}
    for link in root.findall("link"):
        name = link.get("name")
        inertial = link.find("inertial")
        if inertial is None:
            body = BodyInertia.zero()
        else:
            mass = float(inertial.find("mass").get("value"))
            origin = inertial.find("origin")
            com = ([float(v) for v in origin.get("xyz", "0 0 0").split()]
                   if origin is not None else [0.0, 0.0, 0.0])
            ine = inertial.find("inertia")
            vals = {k: float(ine.get(k, "0")) for k in ("ixx", "ixy", "ixz", "iyy", "iyz", "izz")}
            body = BodyInertia(mass, com, np.array([
                [vals["ixx"], vals["ixy"], vals["ixz"]],
                [vals["ixy"], vals["iyy"], vals["iyz"]],
                [vals["ixz"], vals["iyz"], vals["izz"]],
            ]))
        links[name] = BodyNode(name, body, BodySource(None, "whole"))

    edges: list[JointEdge] = []
    children = set()
    for joint in root.findall("joint"):
        kind = joint.get("type")
        if kind not in ("fixed", "revolute", "prismatic", "continuous"):
            raise ModelError(f"unsupported joint type {kind!r} in URDF")
        parent = joint.find("parent").get("link")
        child = joint.find("child").get("link")
        origin = _parse_origin(joint.find("origin"))
        axis_elem = joint.find("axis")
        axis_xyz = ([float(v) for v in axis_elem.get("xyz").split()]
                    if axis_elem is not None else [0.0, 0.0, 1.0])
        limits = None
        axis = None
        if kind != "fixed":
            if not np.allclose(axis_xyz, [0.0, 0.0, 1.0], atol=1e-12):
                raise ModelError(
                    f"joint {joint.get('name')!r} axis {axis_xyz} is not the "
                    f"child-frame Z axis; unsupported"
                )
            axis = TwistAxis("prismatic" if kind == "prismatic" else "revolute")
            kind = "revolute" if kind == "continuous" else kind
            lim = joint.find("limit")
            limits = JointLimits(
                effort=float(lim.get("effort", "0")) if lim is not None else 0.0,
                velocity=float(lim.get("velocity", "0")) if lim is not None else 0.0,
                lower=float(lim.get("lower", "-3.141592653589793")) if lim is not None else -3.141592653589793,
                upper=float(lim.get("upper", "3.141592653589793")) if lim is not None else 3.141592653589793,
            )
        edges.append(JointEdge(joint.get("name"), kind, origin, parent, child,
                               axis=axis, limits=limits))
        children.add(child)

    roots = [n for n in links if n not in children]
    if len(roots) != 1:
        raise ModelError(f"URDF must have exactly one root link, found {roots}")
    phi.root = roots[0]
    phi.bodies = {}
    phi.add_body(links[phi.root])
    remaining = [e for e in edges]
    # insert in parent-before-child order while preserving document order
    while remaining:
        progressed = False
        for edge in list(remaining):
            if edge.parent in phi.bodies:
                phi.add_body(links[edge.child])
                phi.add_edge(edge)
                remaining.remove(edge)
                progressed = True
        if not progressed:
            raise ModelError("URDF joint graph is disconnected or cyclic")
    return phi


def parse_srdf_chains(text: str, phi: PhysicalGraph) -> None:
    """Recover chain tags, classes and tips from SRDF group declarations."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ModelError(f"SRDF parse error: {exc}") from exc
    tips: dict[str, str] = {}
    for group in root.findall("group"):
        gname = group.get("name", "")
        chain = group.find("chain")
        if chain is None or "_" not in gname:
            continue
        cls, tag = gname.rsplit("_", 1)
        base = chain.get("base_link")
        tip = chain.get("tip_link")
        bodies: list[str] = []
        cur = tip
        while cur is not None and cur != base:
            bodies.append(cur)
            edge = phi.incoming_edge(cur)
            cur = edge.parent if edge else None
        bodies.reverse()
        phi.chains[tag] = bodies
        phi.chain_base[tag] = base
        phi.semantics[tag] = cls if cls in ("arm", "leg") else "unclassified"
        phi.chain_tip[tag] = None
        tips[tag] = tip
    for ee in root.findall("end_effector"):
        parent_link = ee.get("parent_link")
        for tag, tip in tips.items():
            if tip == parent_link:
                phi.chain_tip[tag] = parent_link
                name = ee.get("name", "")
                phi.ee_semantic[tag] = name.rsplit("_", 1)[0] if "_" in name else name


def load_bundle(bundle_dir: str | Path) -> PhysicalGraph:
    """Load a previously written bundle back into a physical graph."""
    bundle_dir = Path(bundle_dir)
    urdf_path = bundle_dir / URDF_FILE
    if not urdf_path.exists():
        raise ModelError(f"bundle {bundle_dir} has no {URDF_FILE}")
    phi = parse_urdf(urdf_path.read_text(encoding="utf-8"))
    srdf_path = bundle_dir / SRDF_FILE
    if srdf_path.exists():
        parse_srdf_chains(srdf_path.read_text(encoding="utf-8"), phi)
    homing_path = bundle_dir / HOMING_FILE
    if homing_path.exists():
        phi.homing = {k: float(v) for k, v in
                      json.loads(homing_path.read_text(encoding="utf-8")).items()}
    return phi
