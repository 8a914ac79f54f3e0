from __future__ import annotations

import math
import random
import xml.etree.ElementTree as ET

import numpy as np
import pytest

import modforge as mf
from modforge.model import PhysicalGraph, BodyNode, BodySource
from modforge.database import BodyInertia


# ---------------------------------------------------------------------------
# independent URDF reader: parses emitted bytes and runs its own FK
# ---------------------------------------------------------------------------

def oracle_rpy_matrix(r, p, y):
    cr, sr = math.cos(r), math.sin(r)
    cp, sp = math.cos(p), math.sin(p)
    cy, sy = math.cos(y), math.sin(y)
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    return rz @ ry @ rx


def oracle_axis_rotation(axis, angle):
    ux, uy, uz = axis
    c, s = math.cos(angle), math.sin(angle)
    cc = 1 - c
    return np.array([
        [c + ux * ux * cc, ux * uy * cc - uz * s, ux * uz * cc + uy * s],
        [uy * ux * cc + uz * s, c + uy * uy * cc, uy * uz * cc - ux * s],
        [uz * ux * cc - uy * s, uz * uy * cc + ux * s, c + uz * uz * cc],
    ])


class UrdfOracle:
    """Minimal URDF interpreter for parse-back checks; no library code shared."""

    def __init__(self, text: str):
        root = ET.fromstring(text)
        self.joints = {}
        self.parent_of = {}
        children = set()
        links = [li.get("name") for li in root.findall("link")]
        for j in root.findall("joint"):
            name = j.get("name")
            parent = j.find("parent").get("link")
            child = j.find("child").get("link")
            origin = j.find("origin")
            xyz = [float(v) for v in origin.get("xyz").split()] if origin is not None else [0, 0, 0]
            rpy = [float(v) for v in origin.get("rpy").split()] if origin is not None else [0, 0, 0]
            mat = np.eye(4)
            mat[:3, :3] = oracle_rpy_matrix(*rpy)
            mat[:3, 3] = xyz
            axis_el = j.find("axis")
            axis = ([float(v) for v in axis_el.get("xyz").split()]
                    if axis_el is not None else [0.0, 0.0, 1.0])
            self.joints[child] = (name, j.get("type"), mat, axis)
            self.parent_of[child] = parent
            children.add(child)
        self.root = next(li for li in links if li not in children)

    def fk(self, q: dict, target: str) -> np.ndarray:
        chain = []
        cur = target
        while cur != self.root:
            chain.append(cur)
            cur = self.parent_of[cur]
        chain.reverse()
        pose = np.eye(4)
        for child in chain:
            name, jtype, origin, axis = self.joints[child]
            pose = pose @ origin
            if jtype in ("revolute", "continuous"):
                rot = np.eye(4)
                rot[:3, :3] = oracle_axis_rotation(axis, q.get(name, 0.0))
                pose = pose @ rot
            elif jtype == "prismatic":
                tr = np.eye(4)
                tr[:3, 3] = np.asarray(axis) * q.get(name, 0.0)
                pose = pose @ tr
        return pose


def random_q(phi, rng):
    q = {}
    for e in phi.moving_joints:
        lo, hi = e.limits.lower, e.limits.upper
        q[e.name] = lo + rng.random() * (hi - lo)
    return q


# ---------------------------------------------------------------------------


def test_one_to_one_mapping(db, discover):
    result = discover("fig5_robot")
    doc = ET.fromstring(result.urdf)
    assert len(doc.findall("link")) == len(result.phi.bodies)
    assert len(doc.findall("joint")) == len(result.phi.edges)


def test_elbow_a_limit_attributes(db, discover):
    result = discover("morphology_a")
    doc = ET.fromstring(result.urdf)
    elbow_joints = [j for j in doc.findall("joint")
                    if j.get("type") == "revolute"
                    and j.find("limit").get("effort") == "460"]
    assert elbow_joints, "no joint carries the LargeA effort limit"
    for j in elbow_joints:
        assert j.find("limit").get("velocity") == "2.14"
        assert j.find("axis").get("xyz") == "0 0 1"


def test_massless_tcp_marker_emitted(db, discover):
    result = discover("morphology_a")
    doc = ET.fromstring(result.urdf)
    tip = result.phi.chain_tip["A"]
    link = next(li for li in doc.findall("link") if li.get("name") == tip)
    assert link.find("inertial/mass").get("value") == "0"


def test_emission_is_byte_deterministic(db):
    asm = mf.load_preset("fig5_robot")
    a = mf.run_discovery(asm, db)
    b = mf.run_discovery(asm, db)
    assert a.urdf == b.urdf
    assert a.srdf == b.srdf


def test_parse_back_fk_matches_model(db, discover):
    result = discover("fig5_robot")
    oracle = UrdfOracle(result.urdf)
    rng = random.Random(42)
    targets = [tip for tip in result.phi.chain_tip.values() if tip]
    for _ in range(5):
        q = random_q(result.phi, rng)
        for target in targets:
            ours = mf.fk(result.phi, q, target).pose.matrix
            theirs = oracle.fk(q, target)
            assert np.max(np.abs(ours[:3, 3] - theirs[:3, 3])) <= 1e-9
            assert np.linalg.norm(ours[:3, :3] - theirs[:3, :3]) <= 1e-9


def test_emission_refuses_orphans():
    phi = PhysicalGraph("broken")
    phi.add_body(BodyNode("base_link", BodyInertia.zero(), BodySource(None, "whole")))
    phi.root = "base_link"
    phi.bodies["floating"] = BodyNode("floating", BodyInertia.zero(),
                                      BodySource(None, "whole"))
    with pytest.raises(mf.ModelError, match="orphan"):
        mf.emit_urdf(phi)


def test_srdf_fig5_groups(db, discover):
    result = discover("fig5_robot")
    doc = ET.fromstring(result.srdf)
    groups = [g.get("name") for g in doc.findall("group")]
    assert sum(1 for g in groups if g.startswith("leg_")) == 4
    assert sum(1 for g in groups if g.startswith("arm_")) == 1
    ees = doc.findall("end_effector")
    assert len(ees) == 5
    drill = [e for e in ees if e.get("name").startswith("drill")]
    assert len(drill) == 1


def test_srdf_without_end_effector(db):
    asm = mf.AssemblySpec(root="a", placements=[
        mf.Placement(instance_id="a", module_id="straight_a"),
        mf.Placement(instance_id="b", module_id="passive_link_030",
                     parent_instance="a", parent_connector="out"),
    ])
    result = mf.run_discovery(asm, db)
    doc = ET.fromstring(result.srdf)
    assert doc.findall("group")
    assert doc.findall("end_effector") == []


def test_srdf_dual_arm_groups(db, discover):
    result = discover("torso_dual_arm")
    doc = ET.fromstring(result.srdf)
    arm_groups = [g.get("name") for g in doc.findall("group")
                  if g.get("name").startswith("arm_")]
    assert len(arm_groups) == 2
    assert len(set(arm_groups)) == 2


def test_bundle_write_and_load_round_trip(db, discover, tmp_path):
    result = discover("morphology_b")
    paths = mf.write_bundle(tmp_path, result.phi, result.manifest)
    assert set(paths) == {"robot.urdf", "robot.srdf", "homing.json", "manifest.json"}
    loaded = mf.load_bundle(tmp_path)
    assert set(loaded.bodies) == set(result.phi.bodies)
    assert [e.name for e in loaded.moving_joints] == \
           [e.name for e in result.phi.moving_joints]
    rng = random.Random(7)
    q = random_q(result.phi, rng)
    tip = result.phi.chain_tip["A"]
    ours = mf.fk(result.phi, q, tip).pose.matrix
    again = mf.fk(loaded, q, tip).pose.matrix
    assert np.max(np.abs(ours - again)) <= 1e-9
    assert loaded.semantics["A"] == "arm"
    assert mf.chain_length(loaded, "A") == pytest.approx(2.15, abs=1e-9)


def test_float_formatting():
    from modforge.urdf import fmt_float
    assert fmt_float(460.0) == "460"
    assert fmt_float(2.14) == "2.14"
    assert fmt_float(0.0) == "0"
    assert fmt_float(-0.0) == "0"
    assert float(fmt_float(1/3)) == 1/3


def test_mesh_ref_emits_visual_and_collision(db, tmp_path):
    import json
    doc = db.lookup("drill_ee").to_json()
    doc["mesh_ref"] = {"path": "meshes/drill.stl",
                       "origin": {"translation": [0, 0, 0.01], "rpy": [0, 0, 0]}}
    catalog = {"version": "m", "modules": [doc]}
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps(catalog), encoding="utf-8")
    custom = mf.load_database(path)
    asm = mf.AssemblySpec(root="d", placements=[
        mf.Placement(instance_id="d", module_id="drill_ee")])
    result = mf.run_discovery(asm, custom)
    parsed = ET.fromstring(result.urdf)
    meshes = parsed.findall(".//mesh")
    assert len(meshes) == 2  # visual + collision on the drill body
