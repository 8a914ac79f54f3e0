"""Kinematic queries over a physical graph.

Forward kinematics walks the unique tree path composing fixed-edge origins
and joint twists; the geometric Jacobian, composite inertia aggregation and
the sampled reach envelope build on the same path machinery. All angles are
radians, all lengths meters.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .database import BodyInertia
from .errors import ContractError, LimitError, ModelError
from .geometry import Transform, twist_exp
from .model import JointEdge, PhysicalGraph

__all__ = [
    "FkResult", "twist_exp", "fk", "jacobian", "aggregate_inertia",
    "subtree_inertia", "chain_length", "reach_envelope", "halton_samples",
]

DEFAULT_REACH_SAMPLES = 65536

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
           67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113)


@dataclass(frozen=True)
class FkResult:
    frame: str
    pose: Transform


def _joint_value(edge: JointEdge, q: dict[str, float]) -> float:
    if edge.name not in q:
        raise ContractError(f"missing joint value for {edge.name!r}")
    value = q[edge.name]
    if edge.limits is not None and not edge.limits.lower <= value <= edge.limits.upper:
        raise LimitError(
            f"value {value:g} for joint {edge.name} outside "
            f"[{edge.limits.lower:g}, {edge.limits.upper:g}]",
            entity=edge.name,
        )
    return value


def _edge_transform(edge: JointEdge, q: dict[str, float]) -> Transform:
    if not edge.is_moving:
        return edge.origin
    return edge.origin @ twist_exp(edge.axis, _joint_value(edge, q))


def _path_between(phi: PhysicalGraph, base: str, target: str):
    """Edges from base to target: (edge, inverted) pairs along the tree path."""
    up = {e.child: e for e in phi.edges}

    def root_path(name: str) -> list[str]:
        phi.body(name)
        chain = [name]
        while chain[-1] != phi.root:
            chain.append(up[chain[-1]].parent)
        chain.reverse()
        return chain

    base_path = root_path(base)
    target_path = root_path(target)
    common = 0
    for a, b in zip(base_path, target_path):
        if a != b:
            break
        common += 1
    steps: list[tuple[JointEdge, bool]] = []
    for name in reversed(base_path[common:]):
        steps.append((up[name], True))   # climb toward the common ancestor
    for name in target_path[common:]:
        steps.append((up[name], False))  # descend to the target
    return steps


def fk(phi: PhysicalGraph, q: dict[str, float], target: str,
       base: str | None = None) -> FkResult:
    """Pose of ``target`` expressed in ``base`` (root frame by default)."""
    base = base or phi.root
    pose = Transform.identity()
    for edge, inverted in _path_between(phi, base, target):
        step = _edge_transform(edge, q)
        pose = pose @ (step.inverse() if inverted else step)
    return FkResult(frame=target, pose=pose)


def jacobian(phi: PhysicalGraph, q: dict[str, float],
             target: str) -> tuple[np.ndarray, list[str]]:
    """Geometric Jacobian of ``target`` in the root frame.

    Returns (6 x n matrix, joint names): rows are [linear; angular], columns
    are the moving joints on the root-to-target path in path order.
    """
    z = np.array([0.0, 0.0, 1.0])
    running = Transform.identity()
    columns: list[tuple[str, str, np.ndarray, np.ndarray]] = []
    for edge in phi.path_to(target):
        joint_frame = running @ edge.origin
        if edge.is_moving:
            axis_world = joint_frame.rotation @ z
            columns.append((edge.name, edge.axis.kind, axis_world,
                            joint_frame.translation.copy()))
        running = running @ _edge_transform(edge, q)

    p_target = running.translation
    jac = np.zeros((6, len(columns)))
    names = []
    for i, (name, kind, axis_world, p_joint) in enumerate(columns):
        names.append(name)
        if kind == "revolute":
            jac[:3, i] = np.cross(axis_world, p_target - p_joint)
            jac[3:, i] = axis_world
        else:
            jac[:3, i] = axis_world
    return jac, names


def aggregate_inertia(bodies: list[tuple[BodyInertia, Transform]]) -> BodyInertia:
    """Combine rigidly connected bodies into one equivalent body.

    Each entry is (inertia, transform of its body frame into the common
    frame). Mass and CoM are exact closed forms; the inertia tensor collects
    rotated contributions plus parallel-axis terms about the composite CoM.
    """
    if not bodies:
        raise ContractError("aggregate_inertia requires at least one body")
    total_mass = 0.0
    placed = []
    for body, tf in bodies:
        com_world = tf.rotation @ body.com + tf.translation
        placed.append((body, tf.rotation, com_world))
        total_mass += body.mass
    com = np.zeros(3)
    if total_mass > 0:
        # normalized weights keep the single-body case bit-exact
        for body, _, com_world in placed:
            com = com + (body.mass / total_mass) * com_world

    inertia = np.zeros((3, 3))
    for body, rot, com_world in placed:
        rotated = rot @ body.inertia @ rot.T
        d = com_world - com
        inertia += rotated + body.mass * (float(d @ d) * np.eye(3) - np.outer(d, d))
    return BodyInertia(total_mass, com, inertia)


def subtree_inertia(phi: PhysicalGraph, body_name: str,
                    q: dict[str, float] | None = None) -> BodyInertia:
    """Aggregate the fixed-edge-connected subtree hanging from a body.

    Traversal stops at moving joints unless their values are supplied, in
    which case the whole subtree is frozen at that configuration.
    """
    phi.body(body_name)
    children: dict[str, list[JointEdge]] = {}
    for edge in phi.edges:
        children.setdefault(edge.parent, []).append(edge)
    collected: list[tuple[BodyInertia, Transform]] = []

    def visit(name: str, tf: Transform) -> None:
        collected.append((phi.bodies[name].inertia, tf))
        for edge in children.get(name, []):
            if edge.is_moving and (q is None or edge.name not in q):
                continue
            visit(edge.child, tf @ _edge_transform(edge, q or {}))

    visit(body_name, Transform.identity())
    return aggregate_inertia(collected)


def chain_length(phi: PhysicalGraph, chain: str) -> float:
    """Length of a chain at q = 0: sum of edge-origin translation norms from
    the chain's first module to its tip.

    Edges leaving a hub (branch fan-out offsets) are not part of any chain's
    own span, so every branch of the same hardware measures the same.
    """
    if chain not in phi.chains:
        raise ModelError(f"unknown chain {chain!r}", entity=chain)
    bodies = phi.chains[chain]
    if not bodies:
        return 0.0
    fanout_bodies = set(phi.chain_base.values()) | {phi.root}
    tip = phi.chain_tip.get(chain) or bodies[-1]
    total = 0.0
    for edge, inverted in _path_between(phi, bodies[0], tip):
        if inverted or edge.parent in fanout_bodies:
            continue
        total += float(np.linalg.norm(edge.origin.translation))
    return total


def halton_samples(count: int, dims: int) -> np.ndarray:
    """Deterministic low-discrepancy points in the unit cube, shape (count, dims)."""
    if dims > len(_PRIMES):
        raise ContractError(f"halton_samples supports at most {len(_PRIMES)} dimensions")
    out = np.empty((count, dims))
    indices = np.arange(1, count + 1, dtype=np.int64)
    for d in range(dims):
        base = _PRIMES[d]
        n = indices.copy()
        value = np.zeros(count)
        denom = np.ones(count)
        while np.any(n > 0):
            denom *= base
            value += (n % base) / denom
            n //= base
        out[:, d] = value
    return out


def _batch_rot_z(angles: np.ndarray) -> np.ndarray:
    n = angles.shape[0]
    mats = np.tile(np.eye(4), (n, 1, 1))
    c, s = np.cos(angles), np.sin(angles)
    mats[:, 0, 0] = c
    mats[:, 0, 1] = -s
    mats[:, 1, 0] = s
    mats[:, 1, 1] = c
    return mats


def _batch_trans_z(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    mats = np.tile(np.eye(4), (n, 1, 1))
    mats[:, 2, 3] = values
    return mats


def reach_envelope(phi: PhysicalGraph, chain: str,
                   samples: int = DEFAULT_REACH_SAMPLES) -> dict:
    """Sampled workspace bounds of a chain's tip in the root frame.

    Joint boxes are swept with a deterministic Halton sequence, so repeated
    calls give identical inner bounds. Heights are Z extrema of the tip;
    the radius is the largest horizontal distance from the root origin.
    """
    if chain not in phi.chains:
        raise ModelError(f"unknown chain {chain!r}", entity=chain)
    tip = phi.chain_tip.get(chain)
    if tip is None:
        raise ContractError(f"chain {chain!r} does not end in a TCP")

    path = phi.path_to(tip)
    moving = [e for e in path if e.is_moving]
    if moving:
        unit = halton_samples(samples, len(moving))
        lows = np.array([e.limits.lower for e in moving])
        highs = np.array([e.limits.upper for e in moving])
        qs = lows + unit * (highs - lows)
        n = samples
    else:
        qs = np.zeros((1, 0))
        n = 1

    poses = np.tile(np.eye(4), (n, 1, 1))
    col = 0
    for edge in path:
        poses = poses @ edge.origin.matrix
        if edge.is_moving:
            if edge.axis.kind == "revolute":
                poses = poses @ _batch_rot_z(qs[:, col])
            else:
                poses = poses @ _batch_trans_z(qs[:, col])
            col += 1

    positions = poses[:, :3, 3]
    radius = np.hypot(positions[:, 0], positions[:, 1])
    return {
        "chain": chain,
        "min_height": float(np.min(positions[:, 2])),
        "max_height": float(np.max(positions[:, 2])),
        "max_radius": float(np.max(radius)),
        "metadata": {
            "samples": int(n),
            "joints": [e.name for e in moving],
            "tip": tip,
            "method": "halton",
        },
    }


def straight_pose(phi: PhysicalGraph) -> dict[str, float]:
    """All moving joints at zero: the catalog's straightened configuration."""
    return {e.name: 0.0 for e in phi.moving_joints}


def tip_distance(phi: PhysicalGraph, chain: str,
                 q: dict[str, float] | None = None) -> float:
    """Distance of a chain tip from the chain's first module frame."""
    if chain not in phi.chains:
        raise ModelError(f"unknown chain {chain!r}", entity=chain)
    tip = phi.chain_tip.get(chain)
    if tip is None:
        raise ContractError(f"chain {chain!r} does not end in a TCP")
    start = phi.chains[chain][0]
    q = q if q is not None else straight_pose(phi)
    pose = fk(phi, q, tip, base=start).pose
    # measure from the module input frame: the start body frame itself
    return float(np.linalg.norm(pose.translation))
