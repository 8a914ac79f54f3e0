"""Physical model construction: expand the network graph into bodies/joints.

Slaves are grouped back into module instances (multi-ESC hubs collapse into
one body), each instance contributes bodies and edges according to its type,
and kinematic chains are tracked so the semantic description can classify
them. Naming is a separate deterministic pass so the same expanded graph
always yields the same URDF names.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .database import ActuatorSpec, BodyInertia, MeshRef, ModuleDatabase, ModuleDescription
from .errors import ContractError, CustomizationError, LimitError, ModelError
from .geometry import Transform, TwistAxis, twist_exp
from .topology import TopologyGraph

ROOT_BODY = "base_link"


@dataclass(frozen=True)
class BodySource:
    instance_uid: str | None
    role: str  # "whole" | "proximal" | "distal" | "tcp_marker"


@dataclass
class BodyNode:
    name: str
    inertia: BodyInertia
    source: BodySource
    mesh_ref: MeshRef | None = None


@dataclass(frozen=True)
class JointLimits:
    effort: float
    velocity: float
    lower: float
    upper: float

    @classmethod
    def from_actuator(cls, act: ActuatorSpec) -> "JointLimits":
        return cls(
            effort=act.peak_torque,
            velocity=act.max_velocity,
            lower=act.position_range[0],
            upper=act.position_range[1],
        )


@dataclass
class JointEdge:
    name: str
    kind: str  # "fixed" | "revolute" | "prismatic"
    origin: Transform
    parent: str
    child: str
    axis: TwistAxis | None = None
    limits: JointLimits | None = None

    @property
    def is_moving(self) -> bool:
        return self.kind != "fixed"


@dataclass
class InstanceInfo:
    uid: str
    module_id: str
    first_position: int
    chain: str
    bodies: dict[str, str] = field(default_factory=dict)  # role -> body name
    anchor_body: str | None = None  # where children / add-ons attach


class PhysicalGraph:
    """Tree of bodies and joints; the URDF/SRDF source of truth."""

    def __init__(self, robot_name: str = "modforge_robot"):
        self.robot_name = robot_name
        self.root = ROOT_BODY
        self.bodies: dict[str, BodyNode] = {}
        self.edges: list[JointEdge] = []
        self.chains: dict[str, list[str]] = {}
        self.chain_base: dict[str, str] = {}
        self.semantics: dict[str, str] = {}       # chain tag -> arm|leg|unclassified
        self.chain_tip: dict[str, str | None] = {}
        self.ee_semantic: dict[str, str] = {}     # chain tag -> module semantic tag
        self.homing: dict[str, float] = {}
        self.instances: list[InstanceInfo] = []
        self._incoming: dict[str, JointEdge] = {}

    # construction -------------------------------------------------------

    def add_body(self, node: BodyNode) -> BodyNode:
        if node.name in self.bodies:
            raise ModelError(f"duplicate body name {node.name!r}", entity=node.name)
        self.bodies[node.name] = node
        return node

    def add_edge(self, edge: JointEdge) -> JointEdge:
        if edge.parent not in self.bodies or edge.child not in self.bodies:
            raise ModelError(f"edge {edge.name!r} references unknown bodies")
        if edge.child in self._incoming:
            raise ModelError(f"body {edge.child!r} already has a parent edge")
        self.edges.append(edge)
        self._incoming[edge.child] = edge
        return edge

    # queries --------------------------------------------------------------

    def body(self, name: str) -> BodyNode:
        try:
            return self.bodies[name]
        except KeyError:
            raise ModelError(f"unknown body/frame {name!r}", entity=name) from None

    def incoming_edge(self, body_name: str) -> JointEdge | None:
        return self._incoming.get(body_name)

    def path_to(self, body_name: str) -> list[JointEdge]:
        """Edges from the root to a body, in traversal order."""
        self.body(body_name)
        path: list[JointEdge] = []
        cur = body_name
        while cur != self.root:
            edge = self._incoming.get(cur)
            if edge is None:
                raise ModelError(f"body {cur!r} is not connected to the root", entity=cur)
            path.append(edge)
            cur = edge.parent
        path.reverse()
        return path

    @property
    def moving_joints(self) -> list[JointEdge]:
        return [e for e in self.edges if e.is_moving]

    def joint(self, name: str) -> JointEdge:
        for e in self.edges:
            if e.name == name:
                return e
        raise ModelError(f"unknown joint {name!r}", entity=name)

    def total_mass(self) -> float:
        return sum(b.inertia.mass for b in self.bodies.values())

    def summary(self) -> dict:
        return {
            "robot_name": self.robot_name,
            "bodies": len(self.bodies),
            "joints": len(self.edges),
            "moving_joints": [e.name for e in self.moving_joints],
            "chains": {
                tag: {
                    "class": self.semantics.get(tag, "unclassified"),
                    "base": self.chain_base.get(tag),
                    "bodies": list(self.chains[tag]),
                    "tip": self.chain_tip.get(tag),
                    "end_effector": self.ee_semantic.get(tag),
                }
                for tag in sorted(self.chains)
            },
            "total_mass": self.total_mass(),
        }


def _chain_tag(index: int) -> str:
    """A, B, ..., Z, AA, AB, ... (spreadsheet-style)."""
    out = ""
    index += 1
    while index > 0:
        index, rem = divmod(index - 1, 26)
        out = chr(ord("A") + rem) + out
    return out


def module_transform(desc: ModuleDescription, q: float | None = None) -> Transform:
    """Input-to-output transform of one module (modular kinematics).

    Joints compose proximal frame, joint motion, and distal frame; links and
    hubs return their stored output transform; end-effectors return the
    input-to-tip transform (which for actuated tips includes the joint
    motion when the tip rides the moving body).
    """
    if desc.is_actuated:
        if q is None:
            raise ContractError(
                f"module {desc.module_identifier!r} is actuated; a joint value is required"
            )
        lo, hi = desc.joint.actuator.position_range
        if not lo <= q <= hi:
            raise LimitError(
                f"q={q:g} outside position range [{lo:g}, {hi:g}] of "
                f"{desc.module_identifier!r}",
                entity=desc.module_identifier,
            )
    elif q is not None:
        raise ContractError(
            f"module {desc.module_identifier!r} is passive; no joint value applies"
        )

    if desc.module_type == "Joint":
        motion = twist_exp(desc.joint.axis, q)
        return desc.frames["T_in_joint"] @ motion @ desc.frames["T_joint_out"]
    if desc.module_type in ("Link", "Hub"):
        outs = desc.output_connectors
        if len(outs) != 1:
            raise ContractError(
                f"module {desc.module_identifier!r} has {len(outs)} outputs; use "
                f"parent_child_transform with a connector name"
            )
        return desc.output_transform(outs[0].name)
    # EndEffector
    tip_key = desc.tip_frame_key
    if tip_key is None:
        raise ModelError(
            f"end-effector {desc.module_identifier!r} has no tip frame",
            entity=desc.module_identifier,
        )
    tip = desc.frames[tip_key]
    if desc.is_actuated and tip_key == "T_in_wheel":
        # wheel frame rides the spinning body
        t_in_joint = desc.frames["T_in_joint"]
        motion = twist_exp(desc.joint.axis, q)
        return t_in_joint @ motion @ t_in_joint.inverse() @ tip
    return tip


def parent_child_transform(parent: ModuleDescription, connector: str) -> Transform:
    """Transform from parent input frame to child input frame at q = 0.

    The mating transform between paired connector frames is identity, so this
    is exactly the parent's input-to-output transform for that connector.
    """
    conn = parent.connector(connector)
    if conn is None or conn.kind != "output":
        raise ModelError(
            f"module {parent.module_identifier!r} has no output connector "
            f"{connector!r}",
            entity=parent.module_identifier,
        )
    if parent.module_type == "Joint":
        return module_transform(parent, 0.0)
    return parent.output_transform(connector)


class _Instance:
    __slots__ = ("idx", "uid", "module_id", "desc", "first_position", "parent",
                 "parent_connector", "chain", "branches_assigned", "anchor_body",
                 "anchor_transform_for", "bodies")

    def __init__(self, idx, uid, module_id, desc, first_position, parent, parent_connector):
        self.idx = idx
        self.uid = uid
        self.module_id = module_id
        self.desc = desc
        self.first_position = first_position
        self.parent: _Instance | None = parent
        self.parent_connector: str | None = parent_connector
        self.chain: str | None = None
        self.branches_assigned = 0
        self.anchor_body: str | None = None
        self.bodies: dict[str, str] = {}


def _group_instances(chi: TopologyGraph, db: ModuleDatabase) -> list[_Instance]:
    """Collapse ring slaves into module instances using the catalog wiring."""
    instances: list[_Instance] = []
    slave_map: dict[int, tuple[_Instance, int]] = {}
    per_module_counter = 0

    for rec in chi.nodes:
        desc = db.lookup(rec.module_identifier)
        if desc is None:
            raise ModelError(
                f"module_identifier {rec.module_identifier!r} (slave {rec.position}) "
                f"is not in the database",
                entity=rec.module_identifier,
            )
        if rec.parent_position == 0:
            inst = _Instance(len(instances), f"{rec.module_identifier}_{per_module_counter}",
                             rec.module_identifier, desc, rec.position, None, None)
            per_module_counter += 1
            instances.append(inst)
            slave_map[rec.position] = (inst, 0)
            continue

        parent_inst, parent_esc = slave_map[rec.parent_position]
        internal_target = parent_inst.desc.internal_link_target(parent_esc, rec.parent_port)
        if internal_target is not None:
            if rec.module_identifier != parent_inst.module_id:
                raise ModelError(
                    f"slave {rec.position} hangs off internal wiring of "
                    f"{parent_inst.module_id!r} but reports module "
                    f"{rec.module_identifier!r}; ring is inconsistent",
                    entity=rec.module_identifier,
                )
            slave_map[rec.position] = (parent_inst, internal_target)
            continue

        conn = parent_inst.desc.connector_at(parent_esc, rec.parent_port)
        if conn is None or conn.kind != "output":
            raise ModelError(
                f"slave {rec.position} is connected to ESC {parent_esc} port "
                f"{rec.parent_port} of {parent_inst.module_id!r}, which maps to no "
                f"output connector",
                entity=parent_inst.module_id,
            )
        inst = _Instance(len(instances), f"{rec.module_identifier}_{per_module_counter}",
                         rec.module_identifier, desc, rec.position, parent_inst, conn.name)
        per_module_counter += 1
        instances.append(inst)
        slave_map[rec.position] = (inst, 0)

    return instances


def expand(chi: TopologyGraph, db: ModuleDatabase,
           robot_name: str = "modforge_robot") -> PhysicalGraph:
    """Expand the network topology graph into the physical graph.

    Joints become proximal+distal body pairs joined by a moving edge, links
    and hubs become single bodies, end-effectors gain a massless tip-marker
    body locating the TCP or wheel frame. Chain tags are assigned as branches
    are discovered; a new chain can only start at a hub, everything else
    extends the chain it grows from.
    """
    phi = PhysicalGraph(robot_name)
    phi.add_body(BodyNode(ROOT_BODY, BodyInertia.zero(), BodySource(None, "whole")))

    instances = _group_instances(chi, db)
    next_chain = 0

    def new_chain(base_body: str) -> str:
        nonlocal next_chain
        tag = _chain_tag(next_chain)
        next_chain += 1
        phi.chains[tag] = []
        phi.chain_base[tag] = base_body
        phi.semantics[tag] = "unclassified"
        phi.chain_tip[tag] = None
        return tag

    for inst in instances:
        desc = inst.desc

        if inst.parent is None:
            attach_body = ROOT_BODY
            attach_origin = Transform.identity()
            inst.chain = new_chain(ROOT_BODY)
        else:
            parent = inst.parent
            attach_body = parent.anchor_body
            if parent.desc.module_type == "Joint":
                attach_origin = parent.desc.frames["T_joint_out"]
            else:
                attach_origin = parent.desc.output_transform(inst.parent_connector)
            if parent.desc.module_type == "Hub":
                if parent.branches_assigned == 0:
                    inst.chain = parent.chain  # first branch continues the hub's chain
                else:
                    inst.chain = new_chain(parent.anchor_body)
                parent.branches_assigned += 1
            else:
                inst.chain = parent.chain

        tag = inst.chain

        def add(role: str, inertia: BodyInertia, parent_body: str, origin: Transform,
                kind: str = "fixed", axis: TwistAxis | None = None,
                limits: JointLimits | None = None, inst=inst, tag=tag) -> str:
            name = f"{inst.uid}:{role}"
            phi.add_body(BodyNode(name, inertia, BodySource(inst.uid, role),
                                  mesh_ref=desc.mesh_ref if role in ("whole", "proximal") else None))
            edge_name = f"{inst.uid}:joint" if kind != "fixed" else f"fix:{parent_body}:{name}"
            phi.add_edge(JointEdge(edge_name, kind, origin, parent_body, name,
                                   axis=axis, limits=limits))
            phi.chains[tag].append(name)
            inst.bodies[role] = name
            return name

        if desc.module_type == "Joint":
            prox = add("proximal", desc.inertia[0], attach_body, attach_origin)
            dist = add("distal", desc.inertia[1], prox, desc.frames["T_in_joint"],
                       kind=desc.joint.axis.kind, axis=desc.joint.axis,
                       limits=JointLimits.from_actuator(desc.joint.actuator))
            inst.anchor_body = dist
        elif desc.module_type in ("Link", "Hub"):
            body = add("whole", desc.inertia[0], attach_body, attach_origin)
            inst.anchor_body = body
        else:  # EndEffector
            tip_key = desc.tip_frame_key
            if desc.is_actuated:
                prox = add("proximal", desc.inertia[0], attach_body, attach_origin)
                dist = add("distal", desc.inertia[1], prox, desc.frames["T_in_joint"],
                           kind=desc.joint.axis.kind, axis=desc.joint.axis,
                           limits=JointLimits.from_actuator(desc.joint.actuator))
                if tip_key == "T_in_wheel":
                    # wheel frame rides the spinning body
                    origin = desc.frames["T_in_joint"].inverse() @ desc.frames[tip_key]
                    marker = add("tcp_marker", BodyInertia.zero(), dist, origin)
                else:
                    marker = add("tcp_marker", BodyInertia.zero(), prox, desc.frames[tip_key])
            else:
                body = add("whole", desc.inertia[0], attach_body, attach_origin)
                marker = add("tcp_marker", BodyInertia.zero(), body, desc.frames[tip_key])
            inst.anchor_body = None  # no further connections
            phi.chain_tip[tag] = marker
            phi.semantics[tag] = "leg" if tip_key == "T_in_wheel" else "arm"
            phi.ee_semantic[tag] = desc.semantic_tag

        phi.instances.append(InstanceInfo(
            uid=inst.uid, module_id=inst.module_id, first_position=inst.first_position,
            chain=tag, bodies=dict(inst.bodies), anchor_body=inst.anchor_body,
        ))

    return phi


def name_model(phi: PhysicalGraph) -> PhysicalGraph:
    """Assign the deterministic body/joint naming convention in place.

    Moving joints are named ``J<joint_idx><chain>``; bodies are named
    ``L_<joint_idx>_<link_idx><chain>`` where the joint index increments only
    after a moving joint and the link index counts bodies since the last
    moving joint, resetting when one is added. Fixed edges are named after
    the bodies they join. Renaming twice is a no-op.
    """
    rename: dict[str, str] = {phi.root: phi.root}

    for tag in sorted(phi.chains):
        joint_idx = 0
        link_idx = 0
        for i, body in enumerate(phi.chains[tag]):
            edge = phi.incoming_edge(body)
            if i == 0:
                rename[body] = f"L_0_0{tag}"
                continue
            if edge is not None and edge.is_moving:
                edge.name = f"J{joint_idx}{tag}"
                joint_idx += 1
                link_idx = 0
            else:
                link_idx += 1
            rename[body] = f"L_{joint_idx}_{link_idx}{tag}"

    for body in list(phi.bodies):
        if body not in rename:  # bodies outside chains (add-ons) keep their names
            rename[body] = body

    phi.bodies = {rename[name]: node for name, node in phi.bodies.items()}
    for name, node in phi.bodies.items():
        node.name = name
    for edge in phi.edges:
        edge.parent = rename[edge.parent]
        edge.child = rename[edge.child]
        if not edge.is_moving:
            edge.name = f"fixed_{edge.parent}_{edge.child}"
    phi._incoming = {e.child: e for e in phi.edges}
    phi.chains = {tag: [rename[b] for b in bodies] for tag, bodies in phi.chains.items()}
    phi.chain_base = {tag: rename[b] for tag, b in phi.chain_base.items()}
    phi.chain_tip = {tag: (rename[b] if b else None) for tag, b in phi.chain_tip.items()}
    for info in phi.instances:
        info.bodies = {role: rename[b] for role, b in info.bodies.items()}
        info.anchor_body = rename[info.anchor_body] if info.anchor_body else None
    return phi


@dataclass
class AddOn:
    target_body: str
    name: str | None = None
    module_id: str | None = None
    transform: Transform = field(default_factory=Transform.identity)
    inertia: BodyInertia | None = None
    mesh_ref: MeshRef | None = None

    @classmethod
    def from_json(cls, obj: dict) -> "AddOn":
        return cls(
            target_body=obj["target_body"],
            name=obj.get("name"),
            module_id=obj.get("module_id"),
            transform=(Transform.from_json(obj["transform"])
                       if obj.get("transform") else Transform.identity()),
            inertia=BodyInertia.from_json(obj["inertia"]) if obj.get("inertia") else None,
            mesh_ref=MeshRef.from_json(obj["mesh_ref"]) if obj.get("mesh_ref") else None,
        )


@dataclass
class Customization:
    homing: dict[str, float] = field(default_factory=dict)
    addons: list[AddOn] = field(default_factory=list)

    @classmethod
    def from_json(cls, obj: dict) -> "Customization":
        return cls(
            homing={k: float(v) for k, v in (obj.get("homing") or {}).items()},
            addons=[AddOn.from_json(a) for a in (obj.get("addons") or [])],
        )

    def to_json(self) -> dict:
        out: dict = {"homing": dict(self.homing), "addons": []}
        for a in self.addons:
            entry: dict = {"target_body": a.target_body}
            if a.name:
                entry["name"] = a.name
            if a.module_id:
                entry["module_id"] = a.module_id
            entry["transform"] = a.transform.to_json()
            if a.inertia is not None:
                entry["inertia"] = a.inertia.to_json()
            out["addons"].append(entry)
        return out


def apply_customization(phi: PhysicalGraph, cust: Customization,
                        db: ModuleDatabase) -> PhysicalGraph:
    """Apply homing values and manually declared add-ons to a named graph."""
    moving = {e.name: e for e in phi.moving_joints}
    for joint_name, value in cust.homing.items():
        edge = moving.get(joint_name)
        if edge is None:
            raise CustomizationError(f"unknown homing joint {joint_name!r}", entity=joint_name)
        if not edge.limits.lower <= value <= edge.limits.upper:
            raise LimitError(
                f"homing value {value:g} for {joint_name} outside "
                f"[{edge.limits.lower:g}, {edge.limits.upper:g}]",
                entity=joint_name,
            )
        phi.homing[joint_name] = value

    for k, addon in enumerate(cust.addons):
        if addon.target_body not in phi.bodies:
            raise CustomizationError(
                f"add-on target body {addon.target_body!r} does not exist",
                entity=addon.target_body,
            )
        name = addon.name or f"addon_{k}"
        if addon.module_id is not None:
            desc = db.lookup(addon.module_id)
            if desc is None:
                raise CustomizationError(
                    f"add-on module {addon.module_id!r} is not in the database",
                    entity=addon.module_id,
                )
            inertia = desc.inertia[0]
            mesh = desc.mesh_ref
            tip_key = desc.tip_frame_key if desc.module_type == "EndEffector" else None
        else:
            if addon.inertia is None:
                raise CustomizationError(
                    f"add-on {name!r} needs either a module_id or a literal inertia",
                    entity=name,
                )
            inertia = addon.inertia
            mesh = addon.mesh_ref
            tip_key = None

        phi.add_body(BodyNode(name, inertia, BodySource(None, "whole"), mesh_ref=mesh))
        phi.add_edge(JointEdge(f"fixed_{addon.target_body}_{name}", "fixed",
                               addon.transform, addon.target_body, name))
        if tip_key is not None:
            marker = f"{name}_tcp"
            phi.add_body(BodyNode(marker, BodyInertia.zero(), BodySource(None, "tcp_marker")))
            phi.add_edge(JointEdge(f"fixed_{name}_{marker}", "fixed",
                                   db.lookup(addon.module_id).frames[tip_key], name, marker))
    return phi
