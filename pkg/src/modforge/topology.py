"""Network topology reconstruction from ring-order register reads.

Works backwards from two per-slave registers: the list of open ports and the
stored module identifier. A topology counter classifies each predecessor by
its open-port count (1 end point, 2 link, 3 split, 4 cross) to locate the
parent; a per-slave stack of free downstream ports then assigns the parent
port, popping in ascending order to match the telegram's child-visit order.

Port 0 never leads to a child on a standards-compliant ring, so it is kept
off the working stack and claimed only as a last resort. That last-resort
claim reproduces the documented upside-down-module failure mode: the scan
still returns a tree, just not the one that was physically assembled.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .ecat import EcatNetwork, get_module_identifier, get_open_ports
from .errors import TopologyCorruptionError


@dataclass
class SlaveRecord:
    module_identifier: str
    position: int
    parent_position: int            # 0 = master
    parent_port: int | None         # 1..3; 0 only in violation scenarios
    free_ports_stack: list[int] = field(default_factory=list)
    upstream_port_claimed: bool = False


def find_parent_position(slave_pos: int, open_ports_of: Callable[[int], list[int]]) -> int:
    """Position of the parent of the slave at ``slave_pos`` (0 for the master).

    Scans the ring backwards keeping a running topology counter; the parent is
    the first predecessor with more than one open port once the counter is
    non-negative, or slave 1 as the final fallback.
    """
    parent_pos = 0
    if slave_pos > 1:
        candidate = slave_pos - 1
        counter = 0
        while candidate > 0:
            num_open = len(open_ports_of(candidate))
            if num_open == 1:      # end point
                counter -= 1
            elif num_open == 2:    # link point
                pass
            elif num_open == 3:    # split point
                counter += 1
            elif num_open == 4:    # cross point
                counter += 2
            if (counter >= 0 and num_open > 1) or candidate == 1:
                parent_pos = candidate
                candidate = 0
            candidate -= 1
    return parent_pos


def recognize_topology(net: EcatNetwork) -> list[SlaveRecord]:
    """Reconstruct parent/port relations for every slave on the ring."""
    records: list[SlaveRecord] = []
    for position in range(1, len(net.slaves) + 1):
        open_ports = get_open_ports(net, position)
        parent_pos = find_parent_position(position, lambda p: get_open_ports(net, p))
        record = SlaveRecord(
            module_identifier=get_module_identifier(net, position),
            position=position,
            parent_position=parent_pos,
            parent_port=None,
            # descending push order, so pops yield ascending port numbers
            free_ports_stack=sorted((p for p in open_ports if p in (1, 2, 3)), reverse=True),
        )
        if parent_pos != 0:
            parent = records[parent_pos - 1]
            if parent.free_ports_stack:
                record.parent_port = parent.free_ports_stack.pop()
            elif 0 in get_open_ports(net, parent_pos) and not parent.upstream_port_claimed:
                # only reachable when a module was mounted upside down: the
                # "child" hangs off what should have been the upstream port
                parent.upstream_port_claimed = True
                record.parent_port = 0
            else:
                raise TopologyCorruptionError(
                    f"slave {position} claims parent {parent_pos}, but that slave has "
                    f"no unassigned open port left; the ring is inconsistent with a tree",
                    entity=f"slave:{position}",
                )
        records.append(record)
    return records


@dataclass
class TopologyGraph:
    """Chi: slaves as nodes, parent-port connections as edges."""

    nodes: list[SlaveRecord]
    edges: dict[tuple[int, int], int]  # (parent_position, parent_port) -> child position

    def children_of(self, position: int) -> list[tuple[int, int]]:
        """(port, child_position) pairs in ascending port order."""
        out = [(port, child) for (parent, port), child in self.edges.items()
               if parent == position]
        return sorted(out)

    def to_json(self) -> dict:
        return {
            "nodes": [
                {
                    "position": r.position,
                    "module_identifier": r.module_identifier,
                    "parent_position": r.parent_position,
                    "parent_port": r.parent_port,
                }
                for r in self.nodes
            ],
            "edges": [
                {"parent": parent, "port": port, "child": child}
                for (parent, port), child in sorted(self.edges.items())
            ],
        }


def build_chi(records: list[SlaveRecord]) -> TopologyGraph:
    """Assemble the recognized records into a tree-shaped graph."""
    edges: dict[tuple[int, int], int] = {}
    n = len(records)
    for rec in records:
        if rec.parent_position == 0:
            if rec.position != 1:
                raise TopologyCorruptionError(
                    f"slave {rec.position} claims the master as parent; only the "
                    f"first slave may",
                    entity=f"slave:{rec.position}",
                )
            continue
        if not 1 <= rec.parent_position <= n:
            raise TopologyCorruptionError(
                f"slave {rec.position} names out-of-ring parent {rec.parent_position}",
                entity=f"slave:{rec.position}",
            )
        key = (rec.parent_position, rec.parent_port)
        if key in edges:
            raise TopologyCorruptionError(
                f"port {rec.parent_port} of slave {rec.parent_position} is claimed "
                f"by two children",
                entity=f"slave:{rec.position}",
            )
        edges[key] = rec.position

    # every non-first node must be reachable from position 1
    children: dict[int, list[int]] = {}
    for (parent, _), child in edges.items():
        children.setdefault(parent, []).append(child)
    seen = set()
    stack = [1] if records else []
    while stack:
        pos = stack.pop()
        if pos in seen:
            raise TopologyCorruptionError("cycle detected in recognized topology")
        seen.add(pos)
        stack.extend(children.get(pos, []))
    if len(seen) != n:
        raise TopologyCorruptionError(
            f"recognized topology is not a tree: {n - len(seen)} unreachable slaves"
        )
    return TopologyGraph(nodes=list(records), edges=edges)
