"""End-to-end discovery pipeline shared by the CLI and the HTTP service.

Runs build_network -> recognize_topology -> build_chi -> expand -> name ->
customize and reports per-stage wall times. Modules without an ESC declared
in the assembly are folded back in as add-ons, since the network scan cannot
see them.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .assembly import AssemblySpec
from .database import ModuleDatabase
from .ecat import EcatNetwork, build_network
from .model import (AddOn, Customization, PhysicalGraph, apply_customization,
                    expand, name_model)
from .topology import TopologyGraph, build_chi, recognize_topology
from .urdf import build_manifest, emit_srdf, emit_urdf


@dataclass
class DiscoveryResult:
    network: EcatNetwork
    chi: TopologyGraph
    phi: PhysicalGraph
    urdf: str
    srdf: str
    manifest: dict
    timings_ms: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


def _addons_for_skipped(net: EcatNetwork, assembly: AssemblySpec,
                        phi: PhysicalGraph) -> list[AddOn]:
    """Turn ESC-less placements into add-ons attached to their parent's body."""
    by_instance = {}
    for slave in net.slaves:
        by_instance.setdefault(slave.instance_id, slave.position)
    pos_to_uid = {}
    for info in phi.instances:
        pos_to_uid[info.first_position] = info

    addons = []
    for p in net.skipped_addons:
        parent_pos = by_instance.get(p.parent_instance)
        info = pos_to_uid.get(parent_pos) if parent_pos else None
        if info is None or info.anchor_body is None:
            continue
        addons.append(AddOn(
            target_body=info.anchor_body,
            name=p.instance_id,
            module_id=p.module_id,
        ))
    return addons


def run_discovery(assembly: AssemblySpec, db: ModuleDatabase,
                  customization: Customization | None = None,
                  robot_name: str = "modforge_robot") -> DiscoveryResult:
    timings: dict[str, float] = {}

    def timed(stage, fn):
        start = time.perf_counter()
        result = fn()
        timings[stage] = (time.perf_counter() - start) * 1000.0
        return result

    net = timed("build_network", lambda: build_network(assembly, db))
    records = timed("recognize_topology", lambda: recognize_topology(net))
    chi = timed("build_chi", lambda: build_chi(records))
    phi = timed("expand", lambda: expand(chi, db, robot_name))
    timed("name_model", lambda: name_model(phi))

    cust = customization or Customization()
    implicit = _addons_for_skipped(net, assembly, phi)
    if implicit:
        cust = Customization(homing=dict(cust.homing), addons=implicit + list(cust.addons))
    timed("customize", lambda: apply_customization(phi, cust, db))

    urdf_text = timed("emit_urdf", lambda: emit_urdf(phi))
    srdf_text = timed("emit_srdf", lambda: emit_srdf(phi))
    manifest = build_manifest(phi, db.version, assembly.content_hash(), len(net.slaves))

    return DiscoveryResult(
        network=net, chi=chi, phi=phi, urdf=urdf_text, srdf=srdf_text,
        manifest=manifest, timings_ms=timings, warnings=list(net.warnings),
    )
