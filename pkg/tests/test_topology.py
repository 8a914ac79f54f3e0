from __future__ import annotations

import random

import pytest

import modforge as mf
from modforge.ecat import EcatNetwork, EcatSlave
from modforge.topology import find_parent_position

from conftest import random_assembly
from test_ecat import two_slave_line


def fake_ring(open_port_lists):
    """Network stub built straight from register values."""
    slaves = [
        EcatSlave(position=i + 1, module_identifier=f"mod{i}", instance_id=f"i{i}",
                  esc_index_within_module=0, open_ports=sorted(ports), entry_port=0)
        for i, ports in enumerate(open_port_lists)
    ]
    return EcatNetwork(slaves=slaves)


def ports_reader(net):
    return lambda pos: mf.get_open_ports(net, pos)


def test_parent_of_first_slave_is_master():
    net = fake_ring([[0]])
    assert find_parent_position(1, ports_reader(net)) == 0


def test_parent_positions_on_a_line():
    net = fake_ring([[0, 2], [0, 2], [0]])
    reader = ports_reader(net)
    assert find_parent_position(2, reader) == 1
    assert find_parent_position(3, reader) == 2


def test_parent_positions_star():
    # hub with three leaf children: open count 4 at position 1
    net = fake_ring([[0, 1, 2, 3], [0], [0], [0]])
    reader = ports_reader(net)
    assert find_parent_position(2, reader) == 1
    assert find_parent_position(3, reader) == 1
    # counter walk for the last leaf: -1, -2, then +2 at the hub => parent
    assert find_parent_position(4, reader) == 1


def test_recognize_example_one(db):
    net = mf.build_network(two_slave_line(), db)
    records = mf.recognize_topology(net)
    assert (records[0].position, records[0].parent_position, records[0].parent_port) == \
           (1, 0, None)
    assert (records[1].position, records[1].parent_position, records[1].parent_port) == \
           (2, 1, 2)
    assert all(not r.free_ports_stack for r in records)


def test_recognize_single_slave(db):
    asm = mf.AssemblySpec(root="j", placements=[
        mf.Placement(instance_id="j", module_id="elbow_a")])
    records = mf.recognize_topology(mf.build_network(asm, db))
    assert len(records) == 1
    assert records[0].parent_position == 0
    assert records[0].parent_port is None


def test_recognize_fig5_matches_ground_truth(db):
    net = mf.build_network(mf.load_preset("fig5_robot"), db)
    records = mf.recognize_topology(net)
    for rec, slave in zip(records, net.slaves):
        assert rec.parent_position == slave.gt_parent_position
        assert rec.parent_port == slave.gt_parent_port
    assert all(not r.free_ports_stack for r in records)


def test_recognition_depends_only_on_port_counts(db):
    """Swapping module types without changing the connector shape changes nothing."""
    def line(mids):
        placements = [mf.Placement(instance_id="m0", module_id=mids[0])]
        for i, mid in enumerate(mids[1:], start=1):
            placements.append(mf.Placement(
                instance_id=f"m{i}", module_id=mid,
                parent_instance=f"m{i-1}", parent_connector="out"))
        return mf.AssemblySpec(placements=placements, root="m0")

    a = mf.recognize_topology(mf.build_network(
        line(["elbow_a", "passive_link_030", "straight_b"]), db))
    b = mf.recognize_topology(mf.build_network(
        line(["passive_link_040", "elbow_b", "angle_90"]), db))
    assert [(r.parent_position, r.parent_port) for r in a] == \
           [(r.parent_position, r.parent_port) for r in b]


def test_flipped_module_yields_wrong_tree_not_crash(db):
    """Fig. A1 Example II: the scan returns a tree that differs from reality."""
    net = mf.build_network(two_slave_line(flipped_root=True), db, allow_flipped=True)
    records = mf.recognize_topology(net)
    # recognized: B first (parent master), A second hanging off B's port 0
    assert [r.position for r in records] == [1, 2]
    assert records[0].parent_position == 0
    assert records[1].parent_position == 1
    assert records[1].parent_port == 0  # the impossible upstream-port claim
    ground_truth = {(s.position, s.gt_parent_position, s.gt_parent_port)
                    for s in net.slaves}
    recognized = {(r.position, r.parent_position, r.parent_port) for r in records}
    assert recognized != ground_truth
    chi = mf.build_chi(records)
    assert len(chi.edges) == 1


def test_stack_underflow_raises_corruption_error():
    # two "children" claim a parent that only ever had its upstream port open
    net = fake_ring([[0, 1], [0], [0], [0]])
    with pytest.raises(mf.TopologyCorruptionError, match="no unassigned open port"):
        mf.recognize_topology(net)


def test_build_chi_two_records(db):
    records = mf.recognize_topology(mf.build_network(two_slave_line(), db))
    chi = mf.build_chi(records)
    assert chi.edges == {(1, 2): 2}


def test_build_chi_single_record(db):
    asm = mf.AssemblySpec(root="j", placements=[
        mf.Placement(instance_id="j", module_id="elbow_a")])
    chi = mf.build_chi(mf.recognize_topology(mf.build_network(asm, db)))
    assert len(chi.nodes) == 1
    assert chi.edges == {}


def test_build_chi_fig5_shape(db):
    net = mf.build_network(mf.load_preset("fig5_robot"), db)
    chi = mf.build_chi(mf.recognize_topology(net))
    assert len(chi.nodes) == 15
    assert len(chi.edges) == 14
    out_degree = {}
    for (parent, _), _child in chi.edges.items():
        out_degree[parent] = out_degree.get(parent, 0) + 1
    assert max(out_degree.values()) <= 3


def test_build_chi_rejects_duplicate_port_claims():
    records = [
        mf.SlaveRecord("a", 1, 0, None),
        mf.SlaveRecord("b", 2, 1, 2),
        mf.SlaveRecord("c", 3, 1, 2),
    ]
    with pytest.raises(mf.TopologyCorruptionError, match="two children"):
        mf.build_chi(records)


def test_build_chi_rejects_forest():
    records = [
        mf.SlaveRecord("a", 1, 0, None),
        mf.SlaveRecord("b", 2, 0, None),
    ]
    with pytest.raises(mf.TopologyCorruptionError):
        mf.build_chi(records)


def test_chi_json_round_trip_shape(db):
    chi = mf.build_chi(mf.recognize_topology(
        mf.build_network(mf.load_preset("torso_dual_arm"), db)))
    doc = chi.to_json()
    assert len(doc["nodes"]) == len(chi.nodes)
    assert len(doc["edges"]) == len(chi.edges)


@pytest.mark.parametrize("seed", range(80))
def test_round_trip_random_assemblies(db, seed):
    rng = random.Random(7000 + seed)
    asm = random_assembly(rng, db, rng.randint(2, 30))
    net = mf.build_network(asm, db)
    records = mf.recognize_topology(net)
    for rec, slave in zip(records, net.slaves):
        assert rec.parent_position == slave.gt_parent_position, (seed, rec.position)
        assert rec.parent_port == slave.gt_parent_port, (seed, rec.position)
    assert all(not r.free_ports_stack for r in records)
    mf.build_chi(records)
