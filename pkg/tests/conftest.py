"""Shared fixtures and independent oracles used across the suite."""
from __future__ import annotations

import random

import numpy as np
import pytest

import modforge as mf


@pytest.fixture(scope="session")
def db() -> mf.ModuleDatabase:
    return mf.load_default_database()


@pytest.fixture()
def discover(db):
    def run(preset_name: str, customization=None) -> mf.DiscoveryResult:
        return mf.run_discovery(mf.load_preset(preset_name), db, customization)
    return run


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------

def series_expm(mat: np.ndarray, terms: int = 30) -> np.ndarray:
    """Truncated-series matrix exponential, independent of the closed forms."""
    out = np.eye(mat.shape[0])
    term = np.eye(mat.shape[0])
    for k in range(1, terms + 1):
        term = term @ mat / k
        out = out + term
    return out


def twist_hat(coords) -> np.ndarray:
    """4x4 se(3) matrix of twist coordinates [linear(3); angular(3)]."""
    v = np.asarray(coords[:3], dtype=float)
    w = np.asarray(coords[3:], dtype=float)
    hat = np.zeros((4, 4))
    hat[:3, :3] = np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])
    hat[:3, 3] = v
    return hat


def dfs_ring_oracle(assembly: mf.AssemblySpec, db: mf.ModuleDatabase):
    """Expected ring order by plain pre-order DFS over the declared tree.

    Walks the assembly directly (never the simulator's link graph): for each
    ESC, ports 1..3 in ascending order lead either to the module's next ESC
    (internal wiring) or to the child placed on the matching connector.
    Returns a list of (instance_id, esc_index, parent_ring_index, parent_port)
    where parent_ring_index is 0 for the master.
    """
    children: dict[tuple[str, int, int], str] = {}
    for p in assembly.placements:
        if p.parent_instance is None:
            continue
        parent = assembly.placement(p.parent_instance)
        desc = db.lookup(parent.module_id)
        if desc.esc_count == 0:
            continue
        conn = desc.connector(p.parent_connector)
        children[(p.parent_instance, conn.esc_index, conn.esc_port)] = p.instance_id

    order: list[tuple[str, int, int, int | None]] = []

    def visit(instance_id: str, esc: int, parent_idx: int, parent_port: int | None):
        desc = db.lookup(assembly.placement(instance_id).module_id)
        my_idx = len(order) + 1
        order.append((instance_id, esc, parent_idx, parent_port))
        for port in (1, 2, 3):
            target_esc = desc.internal_link_target(esc, port)
            if target_esc is not None:
                visit(instance_id, target_esc, my_idx, port)
                continue
            child = children.get((instance_id, esc, port))
            if child is not None:
                child_desc = db.lookup(assembly.placement(child).module_id)
                if child_desc.esc_count >= 1:
                    visit(child, 0, my_idx, port)

    root_desc = db.lookup(assembly.placement(assembly.root).module_id)
    if root_desc.esc_count >= 1:
        visit(assembly.root, 0, 0, None)
    return order


NON_TERMINAL = ("elbow_a", "elbow_b", "straight_a", "straight_b", "steering_joint",
                "passive_link_030", "passive_link_040", "angle_90", "angle_45",
                "passive_base_link")
HUBS = ("torso_hub", "mobile_base_hub")
TERMINAL = ("drill_ee", "spray_tool_ee", "sand_tool_ee", "wheel_ee", "active_gripper")


def random_assembly(rng: random.Random, db: mf.ModuleDatabase,
                    n_modules: int) -> mf.AssemblySpec:
    """Random valid assembly of roughly n_modules mixed module types."""
    root_mid = rng.choice(NON_TERMINAL + HUBS)
    placements = [mf.Placement(instance_id="m0", module_id=root_mid)]
    open_slots = [("m0", c.name) for c in db.lookup(root_mid).output_connectors]

    while open_slots and len(placements) < n_modules:
        slot_idx = rng.randrange(len(open_slots))
        parent, connector = open_slots.pop(slot_idx)
        remaining = n_modules - len(placements)
        roll = rng.random()
        # never strand the build: keep at least one slot open until the
        # budget is reached
        may_terminate = remaining <= 1 or len(open_slots) > 0
        if may_terminate and (remaining <= 1 or roll < 0.22):
            mid = rng.choice(TERMINAL)
        elif roll < 0.40:
            mid = rng.choice(HUBS)
        else:
            mid = rng.choice(NON_TERMINAL)
        iid = f"m{len(placements)}"
        placements.append(mf.Placement(
            instance_id=iid, module_id=mid,
            parent_instance=parent, parent_connector=connector,
        ))
        open_slots.extend((iid, c.name) for c in db.lookup(mid).output_connectors)

    return mf.AssemblySpec(placements=placements, root="m0")


@pytest.fixture()
def assembly_factory(db):
    def make(seed: int, n_modules: int) -> mf.AssemblySpec:
        return random_assembly(random.Random(seed), db, n_modules)
    return make


ACCEPTANCE_CRITERIA = {
    "test_round_trip_topology_1000_assemblies":
        "exact topology round-trip over 1000 random assemblies (2-30 modules)",
    "test_fig_a1_example_fidelity":
        "two-slave telegram order and the upside-down failure mode",
    "test_module_transform_series_oracle_1000_draws":
        "modular kinematics vs series matrix exponential <= 1e-12, 1000 draws",
    "test_urdf_parse_back_100_random_q":
        "URDF parse-back FK equals model FK <= 1e-9 over 100 random q",
    "test_jacobian_vs_finite_differences_100_cases":
        "geometric Jacobian vs central differences <= 1e-5 rel, 100+ cases",
    "test_catalog_limits_and_length_deltas":
        "actuator limit values bit-exact; arm length deltas 0.400 m / 0.600 m",
    "test_semantic_groups_four_legs_one_arm":
        "mobile robot classifies as 4 leg chains + 1 arm chain",
    "test_discovery_performance_and_determinism":
        "9-module arm < 1 s, 30-module < 2 s, byte-identical reruns",
    "test_inertia_aggregation_10_composites":
        "composite inertia: mass/CoM closed-form, tensor <= 1e-6 vs point masses",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome, mark in (("passed", "PASS"), ("failed", "FAIL")):
        for report in terminalreporter.stats.get(outcome, ()):
            if "test_acceptance.py" not in report.nodeid:
                continue
            name = report.nodeid.split("::")[-1]
            if name in ACCEPTANCE_CRITERIA:
                lines.append((name, mark))
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in ACCEPTANCE_CRITERIA:
        for got, mark in lines:
            if got == name:
                terminalreporter.write_line(f"[{mark}] {ACCEPTANCE_CRITERIA[name]}")
