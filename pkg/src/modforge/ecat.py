"""Structural simulation of the EtherCAT slave ring for a declared assembly.

Each module contributes one slave per embedded ESC. A port is open exactly
when a physical link is active on it. Ring positions follow the telegram:
inside an ESC the element order is cyclic [P0, EPU, P1, P2, P3]; the telegram
enters at the upstream link's port, advances cyclically, is stamped with a
ring position at the EPU, dives into every open non-entry port's subtree in
encounter order, and exits where it entered. No timing or payload is
modeled; only the topology registers matter.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .assembly import AssemblySpec, Placement, validate_assembly
from .database import ModuleDatabase, ModuleDescription
from .errors import AssemblyError, ContractError


@dataclass
class EcatSlave:
    position: int                 # 1-based ring order (EPU processing order)
    module_identifier: str
    instance_id: str
    esc_index_within_module: int
    open_ports: list[int]         # ascending, includes the upstream port
    entry_port: int               # 0 unless the module is flipped
    # Ground truth for round-trip tests; recognition never reads these.
    gt_parent_position: int = 0   # 0 = master
    gt_parent_port: int | None = None


@dataclass
class EcatNetwork:
    slaves: list[EcatSlave]       # indexed by ring position - 1
    warnings: list[str] = field(default_factory=list)
    skipped_addons: list[Placement] = field(default_factory=list)

    def slave(self, position: int) -> EcatSlave:
        if not 1 <= position <= len(self.slaves):
            raise ContractError(
                f"ring position {position} out of range 1..{len(self.slaves)}"
            )
        return self.slaves[position - 1]


class _EscNode:
    """One ESC during construction: links maps port -> (neighbor, neighbor_port)."""

    __slots__ = ("instance_id", "module_id", "esc_index", "links", "entry_port", "position")

    def __init__(self, instance_id: str, module_id: str, esc_index: int):
        self.instance_id = instance_id
        self.module_id = module_id
        self.esc_index = esc_index
        self.links: dict[int, tuple["_EscNode | None", int | None]] = {}
        self.entry_port = 0
        self.position = 0


def _upstream_attachment(desc: ModuleDescription, flipped: bool,
                         instance_id: str) -> tuple[int, int]:
    """(esc_index, port) through which this module faces its parent."""
    if not flipped:
        inp = desc.input_connector
        return (inp.esc_index, inp.esc_port)
    outs = desc.output_connectors
    if len(outs) != 1:
        raise AssemblyError(
            f"flipped placement {instance_id!r} requires a module with exactly one "
            f"output connector",
            entity=instance_id,
        )
    return (outs[0].esc_index, outs[0].esc_port)


def _downstream_attachment(desc: ModuleDescription, connector_name: str) -> tuple[int, int]:
    """(esc_index, port) on the parent side for a child on the named connector.

    For flipped parents the assembly validator has already constrained the
    connector to be the input connector, so a plain name lookup is enough.
    """
    conn = desc.connector(connector_name)
    return (conn.esc_index, conn.esc_port)


def build_network(assembly: AssemblySpec, db: ModuleDatabase, *,
                  allow_flipped: bool = False) -> EcatNetwork:
    """Expand an assembly into its slave ring.

    Modules without an ESC never appear on the ring; their placements are
    returned as ``skipped_addons`` with a warning, mirroring add-ons that the
    network scan cannot see.
    """
    validate_assembly(assembly, db)

    warnings: list[str] = []
    skipped: list[Placement] = []
    nodes: dict[tuple[str, int], _EscNode] = {}
    instance_entry: dict[str, _EscNode] = {}

    for p in assembly.placements:
        desc = db.lookup(p.module_id)
        if p.flipped and not allow_flipped:
            raise AssemblyError(
                f"placement {p.instance_id!r} is flipped; flipped modules are only "
                f"legal in explicitly marked violation scenarios",
                entity=p.instance_id,
            )
        if desc.esc_count == 0:
            if p.parent_instance is None:
                raise AssemblyError(
                    f"root module {p.module_id!r} has no ESC and cannot start a network",
                    entity=p.instance_id,
                )
            warnings.append(
                f"{p.instance_id} ({p.module_id}) has no ESC; treated as an add-on, "
                f"not a slave"
            )
            skipped.append(p)
            continue

        for esc in range(desc.esc_count):
            nodes[(p.instance_id, esc)] = _EscNode(p.instance_id, p.module_id, esc)
        for (src, dst) in desc.internal_links:
            a = nodes[(p.instance_id, src[0])]
            b = nodes[(p.instance_id, dst[0])]
            a.links[src[1]] = (b, dst[1])
            b.links[dst[1]] = (a, src[1])

        up_esc, up_port = _upstream_attachment(desc, p.flipped, p.instance_id)
        entry_node = nodes[(p.instance_id, up_esc)]
        entry_node.entry_port = up_port
        instance_entry[p.instance_id] = entry_node

        if p.parent_instance is None:
            entry_node.links[up_port] = (None, None)  # master
        else:
            # parents with connectors always carry an ESC (catalog invariant),
            # so the parent node exists whenever validation passed
            parent_p = assembly.placement(p.parent_instance)
            parent_desc = db.lookup(parent_p.module_id)
            pe, pp = _downstream_attachment(parent_desc, p.parent_connector)
            parent_node = nodes[(p.parent_instance, pe)]
            parent_node.links[pp] = (entry_node, up_port)
            entry_node.links[up_port] = (parent_node, pp)

    root_node = instance_entry[assembly.root]

    ordered: list[_EscNode] = []

    def traverse(node: _EscNode, entry_port: int) -> None:
        # Cyclic element list [P0, EPU, P1, P2, P3]; walk the four elements
        # after the entry port, diving into open non-entry ports.
        elements = ["P0", "EPU", "P1", "P2", "P3"]
        start = elements.index(f"P{entry_port}")
        for off in range(1, 5):
            element = elements[(start + off) % 5]
            if element == "EPU":
                node.position = len(ordered) + 1
                ordered.append(node)
                continue
            port = int(element[1])
            link = node.links.get(port)
            if link is None or link[0] is None:
                continue
            neighbor, neighbor_port = link
            traverse(neighbor, neighbor_port)

    traverse(root_node, root_node.entry_port)

    slaves: list[EcatSlave] = []
    for node in ordered:
        upstream = node.links[node.entry_port]
        if upstream[0] is None:
            gt_parent, gt_port = 0, None
        else:
            gt_parent, gt_port = upstream[0].position, upstream[1]
        slaves.append(EcatSlave(
            position=node.position,
            module_identifier=node.module_id,
            instance_id=node.instance_id,
            esc_index_within_module=node.esc_index,
            open_ports=sorted(node.links.keys()),
            entry_port=node.entry_port,
            gt_parent_position=gt_parent,
            gt_parent_port=gt_port,
        ))
    return EcatNetwork(slaves=slaves, warnings=warnings, skipped_addons=skipped)


def get_open_ports(net: EcatNetwork, position: int) -> list[int]:
    """Open-port register of the slave at a ring position, ascending."""
    return list(net.slave(position).open_ports)


def get_module_identifier(net: EcatNetwork, position: int) -> str:
    """Module identifier stored in the slave's microprocessor."""
    return net.slave(position).module_identifier
