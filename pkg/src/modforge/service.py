"""HTTP composer service: session-based assembly editing plus discovery.

A thin JSON API over the same pipeline the CLI runs, so both produce
byte-identical bundles for identical inputs. Sessions are in-memory (with
optional JSON snapshots); the catalog is immutable and shared. Requests to
one session are serialized by a per-session lock, different sessions run in
parallel on the threading server.
"""
from __future__ import annotations

import json
import mimetypes
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import kinematics
from .assembly import AssemblySpec, Placement, validate_assembly
from .database import ModuleDatabase
from .errors import ModforgeError
from .model import Customization
from .pipeline import DiscoveryResult, run_discovery
from .urdf import bundle_texts

API_PREFIX = "/v1"


class HttpError(Exception):
    def __init__(self, status: int, message: str, *, stage: str = "request",
                 entity: str | None = None):
        super().__init__(message)
        self.status = status
        self.payload = {"error": {"stage": stage, "entity": entity, "message": message}}


class Session:
    def __init__(self, session_id: str):
        self.id = session_id
        self.lock = threading.RLock()
        self.placements: list[Placement] = []
        self.customization = Customization()
        self.draft_rev = 0
        self.discovered_rev = -1
        self.last: DiscoveryResult | None = None

    @property
    def assembly(self) -> AssemblySpec:
        root = self.placements[0].instance_id if self.placements else ""
        return AssemblySpec(placements=list(self.placements), root=root)

    def state(self) -> dict:
        return {
            "id": self.id,
            "assembly": self.assembly.to_json(),
            "customization": self.customization.to_json(),
            "draft_rev": self.draft_rev,
            "discovered_rev": self.discovered_rev,
            "stale": self.last is not None and self.discovered_rev != self.draft_rev,
        }


class ComposerService:
    def __init__(self, db: ModuleDatabase, ui_dir: str | None = None,
                 state_dir: str | None = None):
        self.db = db
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        self.state_dir = Path(state_dir) if state_dir else None
        self.sessions: dict[str, Session] = {}
        self.sessions_lock = threading.Lock()
        if self.state_dir:
            self.state_dir.mkdir(parents=True, exist_ok=True)
            self._load_snapshots()

    # session store --------------------------------------------------------

    def _load_snapshots(self) -> None:
        for path in sorted(self.state_dir.glob("*.json")):
            try:
                doc = json.loads(path.read_text(encoding="utf-8"))
                session = Session(doc["id"])
                session.placements = [
                    Placement.from_json(p) for p in doc["assembly"]["placements"]
                ]
                session.customization = Customization.from_json(doc.get("customization", {}))
                self.sessions[session.id] = session
            except (KeyError, ValueError, json.JSONDecodeError):
                continue

    def _snapshot(self, session: Session) -> None:
        if not self.state_dir:
            return
        path = self.state_dir / f"{session.id}.json"
        path.write_text(json.dumps(session.state(), indent=2), encoding="utf-8")

    def _drop_snapshot(self, session_id: str) -> None:
        if self.state_dir:
            (self.state_dir / f"{session_id}.json").unlink(missing_ok=True)

    def create_session(self) -> Session:
        session = Session(uuid.uuid4().hex[:12])
        with self.sessions_lock:
            self.sessions[session.id] = session
        self._snapshot(session)
        return session

    def session(self, session_id: str) -> Session:
        with self.sessions_lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise HttpError(404, f"unknown session {session_id!r}", entity=session_id)
        return session

    def delete_session(self, session_id: str) -> None:
        with self.sessions_lock:
            if self.sessions.pop(session_id, None) is None:
                raise HttpError(404, f"unknown session {session_id!r}", entity=session_id)
        self._drop_snapshot(session_id)

    # session operations ----------------------------------------------------

    def attach(self, session: Session, body: dict) -> dict:
        module_id = body.get("module_id")
        if not module_id or self.db.lookup(module_id) is None:
            raise HttpError(404, f"unknown module_identifier {module_id!r}",
                            stage="assembly", entity=module_id)
        parent_instance = body.get("parent_instance")
        parent_connector = body.get("parent_connector")
        instance_id = body.get("instance_id")

        with session.lock:
            if parent_instance is None and session.placements:
                raise HttpError(409, "assembly already has a root; attach to a connector",
                                stage="assembly")
            if instance_id is None:
                n = len(session.placements)
                existing = {p.instance_id for p in session.placements}
                instance_id = f"{module_id}_{n}"
                while instance_id in existing:
                    n += 1
                    instance_id = f"{module_id}_{n}"
            candidate = session.placements + [Placement(
                instance_id=instance_id, module_id=module_id,
                parent_instance=parent_instance, parent_connector=parent_connector,
            )]
            root = candidate[0].instance_id
            try:
                validate_assembly(AssemblySpec(candidate, root), self.db)
            except ModforgeError as exc:
                status = 409 if "occupied" in str(exc) or "duplicate" in str(exc) else 400
                raise HttpError(status, str(exc), stage=exc.stage, entity=exc.entity)
            session.placements = candidate
            session.draft_rev += 1
            self._snapshot(session)
            return {"instance_id": instance_id, **session.state()}

    def detach(self, session: Session, body: dict) -> dict:
        instance_id = body.get("instance_id")
        with session.lock:
            ids = {p.instance_id for p in session.placements}
            if instance_id not in ids:
                raise HttpError(404, f"unknown instance {instance_id!r}",
                                stage="assembly", entity=instance_id)
            doomed = {instance_id}
            changed = True
            while changed:
                changed = False
                for p in session.placements:
                    if p.parent_instance in doomed and p.instance_id not in doomed:
                        doomed.add(p.instance_id)
                        changed = True
            session.placements = [p for p in session.placements
                                  if p.instance_id not in doomed]
            session.draft_rev += 1
            self._snapshot(session)
            return {"removed": sorted(doomed), **session.state()}

    def set_customization(self, session: Session, body: dict) -> dict:
        try:
            cust = Customization.from_json(body)
        except (KeyError, TypeError, ValueError) as exc:
            raise HttpError(400, f"malformed customization: {exc}", stage="customization")
        with session.lock:
            session.customization = cust
            session.draft_rev += 1
            self._snapshot(session)
            return session.state()

    def discover(self, session: Session) -> dict:
        with session.lock:
            if not session.placements:
                raise HttpError(409, "draft assembly is empty; attach modules first",
                                stage="assembly")
            assembly = session.assembly
            try:
                result = run_discovery(assembly, self.db, session.customization)
            except ModforgeError as exc:
                raise HttpError(422, str(exc), stage=exc.stage, entity=exc.entity)
            session.last = result
            session.discovered_rev = session.draft_rev
            texts = bundle_texts(result.phi, result.manifest)
            summary = result.phi.summary()
            summary["chain_lengths"] = {
                tag: kinematics.chain_length(result.phi, tag)
                for tag in result.phi.chains
            }
            return {
                "urdf": texts["robot.urdf"],
                "srdf": texts["robot.srdf"],
                "homing": texts["homing.json"],
                "manifest": texts["manifest.json"],
                "stats": result.timings_ms,
                "warnings": result.warnings,
                "summary": summary,
                **session.state(),
            }

    def _last_model(self, session: Session) -> DiscoveryResult:
        if session.last is None:
            raise HttpError(409, "no model discovered yet for this session",
                            stage="model")
        return session.last

    def fk(self, session: Session, query: dict) -> dict:
        with session.lock:
            result = self._last_model(session)
            phi = result.phi
            joints = [e.name for e in phi.moving_joints]
            q_text = (query.get("q") or [""])[0]
            values = [float(v) for v in q_text.split(",")] if q_text.strip() else []
            if len(values) != len(joints):
                raise HttpError(400, f"q has {len(values)} values, expected "
                                     f"{len(joints)} ({', '.join(joints)})",
                                stage="kinematics")
            frame = (query.get("frame") or [phi.root])[0]
            try:
                pose = kinematics.fk(phi, dict(zip(joints, values)), frame).pose
            except ModforgeError as exc:
                raise HttpError(404 if "unknown" in str(exc) else 400, str(exc),
                                stage=exc.stage, entity=exc.entity)
            return {
                "frame": frame,
                "translation": [float(v) for v in pose.translation],
                "rpy": [float(v) for v in pose.rpy()],
            }

    def reach(self, session: Session, query: dict) -> dict:
        with session.lock:
            result = self._last_model(session)
            chain = (query.get("chain") or [None])[0]
            if chain is None:
                arms = sorted(t for t, c in result.phi.semantics.items() if c == "arm")
                if not arms:
                    raise HttpError(400, "no arm chain; pass ?chain=", stage="kinematics")
                chain = arms[0]
            samples = int((query.get("samples") or [kinematics.DEFAULT_REACH_SAMPLES])[0])
            try:
                return kinematics.reach_envelope(result.phi, chain, samples=samples)
            except ModforgeError as exc:
                raise HttpError(404 if "unknown" in str(exc) else 400, str(exc),
                                stage=exc.stage, entity=exc.entity)

    def catalog(self) -> dict:
        return self.db.to_json()


class _Handler(BaseHTTPRequestHandler):
    service: ComposerService = None  # injected by serve()

    # silence default request logging
    def log_message(self, fmt, *args):
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise HttpError(400, f"malformed JSON body: {exc}")
        if not isinstance(doc, dict):
            raise HttpError(400, "request body must be a JSON object")
        return doc

    def _serve_static(self, path: str) -> None:
        ui_dir = self.service.ui_dir
        if ui_dir is None:
            self._send_json(404, {"error": {"stage": "request", "entity": path,
                                            "message": "no UI assets configured"}})
            return
        rel = path.lstrip("/") or "index.html"
        target = (ui_dir / rel).resolve()
        if not str(target).startswith(str(ui_dir)) or not target.is_file():
            target = ui_dir / "index.html"
            if not target.is_file():
                self._send_json(404, {"error": {"stage": "request", "entity": path,
                                                "message": "not found"}})
                return
        data = target.read_bytes()
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _route(self, method: str) -> None:
        svc = self.service
        parsed = urlparse(self.path)
        query = parse_qs(parsed.query)
        parts = [p for p in parsed.path.split("/") if p]

        try:
            if not parts or parts[0] != "v1":
                if method == "GET":
                    self._serve_static(parsed.path)
                    return
                raise HttpError(404, f"unknown path {parsed.path!r}")

            rest = parts[1:]
            if rest == ["catalog"] and method == "GET":
                self._send_json(200, svc.catalog())
                return
            if rest == ["sessions"] and method == "POST":
                session = svc.create_session()
                self._send_json(201, session.state())
                return
            if len(rest) >= 2 and rest[0] == "sessions":
                session_id = rest[1]
                tail = rest[2:]
                if not tail:
                    if method == "GET":
                        self._send_json(200, svc.session(session_id).state())
                        return
                    if method == "DELETE":
                        svc.delete_session(session_id)
                        self._send_json(200, {"deleted": session_id})
                        return
                session = svc.session(session_id)
                if tail == ["attach"] and method == "POST":
                    self._send_json(200, svc.attach(session, self._read_body()))
                    return
                if tail == ["detach"] and method == "POST":
                    self._send_json(200, svc.detach(session, self._read_body()))
                    return
                if tail == ["customization"] and method == "PUT":
                    self._send_json(200, svc.set_customization(session, self._read_body()))
                    return
                if tail == ["discover"] and method == "POST":
                    self._send_json(200, svc.discover(session))
                    return
                if tail == ["fk"] and method == "GET":
                    self._send_json(200, svc.fk(session, query))
                    return
                if tail == ["reach"] and method == "GET":
                    self._send_json(200, svc.reach(session, query))
                    return
            raise HttpError(404, f"unknown endpoint {method} {parsed.path!r}")
        except HttpError as exc:
            self._send_json(exc.status, exc.payload)
        except ModforgeError as exc:
            self._send_json(400, {"error": exc.to_json()})
        except ValueError as exc:
            self._send_json(400, {"error": {"stage": "request", "entity": None,
                                            "message": str(exc)}})

    def do_GET(self):
        self._route("GET")

    def do_POST(self):
        self._route("POST")

    def do_PUT(self):
        self._route("PUT")

    def do_DELETE(self):
        self._route("DELETE")


class _Server(ThreadingHTTPServer):
    # default backlog of 5 drops SYNs under concurrent clients, which shows
    # up as 1 s retransmission stalls on loopback
    request_queue_size = 128
    daemon_threads = True


def make_server(db: ModuleDatabase, port: int = 8080, host: str = "127.0.0.1",
                ui_dir: str | None = None,
                state_dir: str | None = None) -> _Server:
    service = ComposerService(db, ui_dir=ui_dir, state_dir=state_dir)
    handler = type("BoundHandler", (_Handler,), {"service": service})
    server = _Server((host, port), handler)
    server.service = service
    return server


def serve(db: ModuleDatabase, port: int = 8080, host: str = "127.0.0.1",
          ui_dir: str | None = None, state_dir: str | None = None) -> None:
    server = make_server(db, port=port, host=host, ui_dir=ui_dir, state_dir=state_dir)
    print(f"modforge service on http://{host}:{port}{API_PREFIX} "
          f"(catalog {db.version}, {len(db.entries)} modules)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
