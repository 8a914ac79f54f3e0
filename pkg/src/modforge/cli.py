"""Command-line driver: validate, discover, fk, reach, serve."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import kinematics
from .assembly import load_assembly
from .database import default_catalog_path, load_database, validate_module
from .errors import ModforgeError
from .model import Customization
from .pipeline import run_discovery
from .urdf import HOMING_FILE, MANIFEST_FILE, SRDF_FILE, URDF_FILE, load_bundle, write_bundle


def _db_path(args) -> Path:
    if args.db:
        return Path(args.db)
    env = os.environ.get("MODFORGE_DB")
    if env:
        return Path(env)
    return default_catalog_path()


def _fail(exc: ModforgeError, as_json: bool) -> int:
    if as_json:
        print(json.dumps({"error": exc.to_json()}), file=sys.stderr)
    else:
        print(f"error [{exc.stage}]"
              + (f" ({exc.entity})" if exc.entity else "")
              + f": {exc}", file=sys.stderr)
    return 1


def cmd_validate(args) -> int:
    try:
        db = load_database(_db_path(args))
    except ModforgeError as exc:
        return _fail(exc, args.json)
    diags = []
    for desc in db.entries.values():
        diags.extend(validate_module(desc))
    diags.extend(db.warnings)
    errors = [d for d in diags if d.severity == "error"]
    if args.json:
        print(json.dumps({
            "version": db.version,
            "modules": len(db.entries),
            "diagnostics": [d.__dict__ for d in diags],
        }, indent=2))
    else:
        for d in diags:
            print(str(d))
        print(f"catalog {db.version}: {len(db.entries)} modules, "
              f"{len(errors)} errors, {len(diags) - len(errors)} warnings")
    return 1 if errors else 0


def cmd_discover(args) -> int:
    try:
        db = load_database(_db_path(args))
        assembly = load_assembly(args.assembly)
        cust = Customization()
        if args.homing:
            cust.homing = {k: float(v) for k, v in
                           json.loads(Path(args.homing).read_text(encoding="utf-8")).items()}
        if args.addons:
            cust = Customization(
                homing=cust.homing,
                addons=Customization.from_json(
                    {"addons": json.loads(Path(args.addons).read_text(encoding="utf-8"))}
                ).addons,
            )
        result = run_discovery(assembly, db, cust, robot_name=args.name)
        write_bundle(args.out, result.phi, result.manifest)
    except ModforgeError as exc:
        return _fail(exc, args.json)

    total = sum(result.timings_ms.values())
    if args.json:
        print(json.dumps({
            "out": str(args.out),
            "files": [URDF_FILE, SRDF_FILE, HOMING_FILE, MANIFEST_FILE],
            "timings_ms": result.timings_ms,
            "total_ms": total,
            "summary": result.phi.summary(),
            "warnings": result.warnings,
        }, indent=2))
    else:
        for warning in result.warnings:
            print(f"warning: {warning}")
        for stage, ms in result.timings_ms.items():
            print(f"{stage:22s} {ms:8.2f} ms")
        print(f"{'total':22s} {total:8.2f} ms")
        summary = result.phi.summary()
        print(f"bundle written to {args.out}: {summary['bodies']} links, "
              f"{summary['joints']} joints, {len(summary['chains'])} chains")
    return 0


def _parse_q(text: str, joints: list[str]) -> dict[str, float]:
    values = [float(v) for v in text.split(",")] if text.strip() else []
    if len(values) != len(joints):
        raise ModforgeError(
            f"q has {len(values)} values but the model has {len(joints)} moving "
            f"joints ({', '.join(joints)})"
        )
    return dict(zip(joints, values))


def cmd_fk(args) -> int:
    try:
        phi = load_bundle(args.bundle)
        joints = [e.name for e in phi.moving_joints]
        q = _parse_q(args.q, joints)
        frame = args.frame or phi.root
        result = kinematics.fk(phi, q, frame)
    except ModforgeError as exc:
        return _fail(exc, args.json)
    trans = [float(v) for v in result.pose.translation]
    rpy = [float(v) for v in result.pose.rpy()]
    if args.json:
        print(json.dumps({"frame": frame, "translation": trans, "rpy": rpy}))
    else:
        print(f"frame: {frame}")
        print(f"translation [m]:  {trans[0]:+.6f} {trans[1]:+.6f} {trans[2]:+.6f}")
        print(f"rpy [rad]:        {rpy[0]:+.6f} {rpy[1]:+.6f} {rpy[2]:+.6f}")
    return 0


def cmd_reach(args) -> int:
    try:
        phi = load_bundle(args.bundle)
        chains = sorted(phi.chains)
        chain = args.chain
        if chain is None:
            arms = [t for t in chains if phi.semantics.get(t) == "arm"]
            if not arms:
                raise ModforgeError("no arm chain in this bundle; pass --chain")
            chain = arms[0]
        envelope = kinematics.reach_envelope(phi, chain, samples=args.samples)
    except ModforgeError as exc:
        return _fail(exc, args.json)
    if args.json:
        print(json.dumps(envelope))
    else:
        print(f"chain {chain}: height [{envelope['min_height']:.3f}, "
              f"{envelope['max_height']:.3f}] m, radius <= "
              f"{envelope['max_radius']:.3f} m "
              f"({envelope['metadata']['samples']} samples)")
    return 0


def cmd_serve(args) -> int:
    from .service import serve
    try:
        db = load_database(_db_path(args))
    except ModforgeError as exc:
        return _fail(exc, False)
    serve(db, port=args.port, host=args.host, ui_dir=args.ui, state_dir=args.state_dir)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="modforge",
        description="Model compiler for modular reconfigurable robots",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load and validate a module catalog")
    p.add_argument("--db", help="catalog file or directory (default: shipped catalog)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("discover", help="simulate discovery and emit a bundle")
    p.add_argument("assembly", help="assembly JSON/YAML file")
    p.add_argument("--db")
    p.add_argument("--out", required=True, help="bundle output directory")
    p.add_argument("--homing", help="homing JSON file: joint name -> rad")
    p.add_argument("--addons", help="add-ons JSON file (list of add-on objects)")
    p.add_argument("--name", default="modforge_robot", help="robot name")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("fk", help="forward kinematics from a bundle")
    p.add_argument("bundle", help="bundle directory")
    p.add_argument("--frame", help="target frame (default: root)")
    p.add_argument("--q", default="", help="comma-separated joint values, model order")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fk)

    p = sub.add_parser("reach", help="reach envelope of a chain from a bundle")
    p.add_argument("bundle", help="bundle directory")
    p.add_argument("--chain", help="chain tag (default: first arm chain)")
    p.add_argument("--samples", type=int, default=kinematics.DEFAULT_REACH_SAMPLES)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("serve", help="run the composer HTTP service")
    p.add_argument("--db")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", help="directory of built UI assets to serve at /")
    p.add_argument("--state-dir", help="directory for session snapshots")
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
