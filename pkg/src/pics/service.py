"""HTTP session service for the browser annotation workbench.

Routes (JSON bodies, server-sent events for the iteration stream):
  POST  /sessions                  upload PGM/PNG slices, returns session id
  POST  /sessions/{id}/init        click-to-initialize the contour
  POST  /sessions/{id}/run         start or resume optimization
  POST  /sessions/{id}/pause       pause at the next iteration boundary
  PATCH /sessions/{id}/knots       move / pin knots (atomic batch)
  GET   /sessions/{id}/events      SSE, one event per iteration + "done"
  GET   /sessions/{id}/export      annotation document + mask
  POST  /sessions/{id}/next-slice  advance with warm-started knots

The engine is shared with the CLI; the service adds no numerics of its own.
"""

from __future__ import annotations

import argparse
import base64
import io as _io
import json
import threading
import uuid
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Request, UploadFile
from fastapi.responses import StreamingResponse

from .energy import Hyperparameters
from .errors import InvalidEdit, OutOfBounds, PicsError, UnsupportedFormat
from .image_io import (
    AnnotationRecord,
    builtin_presets,
    export_annotation,
    load_gray_bytes,
)
from .optim import OptimizerControl, apply_edits, optimize
from .raster import Mask
from .spline import KnotVector
from .volume import ImageStack, contour_mask, init_from_click


class Session:
    def __init__(self, stack: ImageStack):
        self.id = uuid.uuid4().hex
        self.stack = stack
        self.slice_index = 0
        self.knots: Optional[KnotVector] = None
        self.hyper = Hyperparameters()
        self.state = "idle"
        self.events: list[dict] = []
        self.cond = threading.Condition()
        self.control: Optional[OptimizerControl] = None
        self.thread: Optional[threading.Thread] = None
        self.last_breakdown = None
        self.lock = threading.Lock()

    @property
    def image(self):
        return self.stack.slices[self.slice_index]

    def emit(self, event: dict) -> None:
        with self.cond:
            self.events.append(event)
            self.cond.notify_all()

    def knot_payload(self) -> dict:
        return {
            "knots": [[float(u), float(v)] for u, v in self.knots.points],
            "pinned": [bool(p) for p in self.knots.pinned],
        }


def create_app(workdir: str | None = None) -> FastAPI:
    app = FastAPI(title="pics annotation service")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    out_root = Path(workdir) if workdir else None

    def get_session(session_id: str) -> Session:
        with registry_lock:
            if session_id not in sessions:
                raise HTTPException(404, f"no session {session_id}")
            return sessions[session_id]

    @app.post("/sessions", status_code=201)
    async def create_session(files: list[UploadFile]):
        images = []
        for f in files:
            data = await f.read()
            try:
                images.append(load_gray_bytes(data, name=f.filename or "upload"))
            except (UnsupportedFormat, PicsError) as exc:
                raise HTTPException(422, str(exc))
        try:
            stack = ImageStack(tuple(images))
        except PicsError as exc:
            raise HTTPException(422, str(exc))
        session = Session(stack)
        with registry_lock:
            sessions[session.id] = session
        return {
            "id": session.id,
            "n_slices": len(stack),
            "width": stack.width,
            "height": stack.height,
        }

    @app.post("/sessions/{session_id}/init")
    def post_init(session_id: str, body: dict):
        session = get_session(session_id)
        if session.state == "running":
            raise HTTPException(409, "optimization is running")
        hyper = session.hyper
        if body.get("preset"):
            try:
                hyper = builtin_presets().get(body["preset"])
            except KeyError as exc:
                raise HTTPException(422, str(exc))
        radius = float(body.get("radius", hyper.init_radius))
        n_knots = int(body.get("n_knots", hyper.n_knots))
        try:
            knots = init_from_click((body["x"], body["y"]), radius, n_knots,
                                    session.stack.width, session.stack.height)
        except (OutOfBounds, PicsError, KeyError, ValueError) as exc:
            raise HTTPException(422, str(exc))
        with session.lock:
            session.hyper = replace(hyper, init_radius=radius, n_knots=n_knots)
            session.knots = knots
            session.state = "idle"
        return session.knot_payload()

    def apply_hyper_overrides(session: Session, body: dict) -> None:
        hyper = session.hyper
        if body.get("preset"):
            try:
                hyper = builtin_presets().get(body["preset"])
            except KeyError as exc:
                raise HTTPException(422, str(exc))
        weights = body.get("weights") or {}
        try:
            hyper = hyper.with_weights(**{
                k: float(v) for k, v in weights.items()
                if k in ("alpha", "beta", "mu", "gamma", "sigma")
            })
            if "max_iters" in body:
                hyper = replace(hyper, max_iters=int(body["max_iters"]))
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        session.hyper = hyper

    def run_loop(session: Session) -> None:
        def observer(record):
            with session.lock:
                session.knots = session.knots.with_points(record.knots) \
                    if record.knots is not None else session.knots
                session.last_breakdown = record.breakdown
            b = record.breakdown
            session.emit({
                "iter": record.iteration,
                "knots": [[float(u), float(v)] for u, v in record.knots]
                if record.knots is not None else None,
                "j_int": b.j_int,
                "j_ext": b.j_ext,
                "j_shape": b.j_shape,
                "j_total": b.j_total,
                "opi": None if np.isnan(record.opi) else record.opi,
                "mu": record.mu,
            })

        try:
            final, _ = optimize(session.image, session.knots, session.hyper,
                                observer=observer, control=session.control)
            with session.lock:
                session.knots = final
                session.state = "done"
        except PicsError as exc:
            with session.lock:
                session.state = "idle"
            session.emit({"error": str(exc)})
        session.emit({"done": True})

    @app.post("/sessions/{session_id}/run")
    def post_run(session_id: str, body: dict | None = None):
        session = get_session(session_id)
        if session.knots is None:
            raise HTTPException(409, "initialize the contour first")
        if session.state == "running":
            raise HTTPException(409, "already running")
        if session.state == "paused":
            session.control.resume()
            session.state = "running"
            return {"state": session.state}
        apply_hyper_overrides(session, body or {})
        session.control = OptimizerControl()
        session.state = "running"
        session.thread = threading.Thread(target=run_loop, args=(session,), daemon=True)
        session.thread.start()
        return {"state": session.state}

    @app.post("/sessions/{session_id}/pause")
    def post_pause(session_id: str):
        session = get_session(session_id)
        if session.state != "running":
            raise HTTPException(409, f"cannot pause while {session.state}")
        session.control.pause()
        session.state = "paused"
        return {"state": session.state}

    @app.patch("/sessions/{session_id}/knots")
    def patch_knots(session_id: str, body: dict):
        session = get_session(session_id)
        if session.knots is None:
            raise HTTPException(409, "initialize the contour first")
        edits = []
        for e in body.get("edits", []):
            point = None
            if "x" in e or "y" in e:
                if "x" not in e or "y" not in e:
                    raise HTTPException(422, "edit must give both x and y")
                point = (float(e["x"]), float(e["y"]))
            edits.append((int(e["index"]), point, e.get("pinned")))
        with session.lock:
            try:
                accepted = apply_edits(session.knots, edits)
            except InvalidEdit as exc:
                raise HTTPException(422, str(exc))
            w, h = session.stack.width, session.stack.height
            if np.any(accepted.points < 0) or np.any(accepted.points[:, 0] > w) \
                    or np.any(accepted.points[:, 1] > h):
                raise HTTPException(422, "knot outside image")
            session.knots = accepted
            if session.state in ("running", "paused"):
                session.control.queue_edits(edits)
        return session.knot_payload()

    @app.get("/sessions/{session_id}/events")
    def stream_iterations(session_id: str, request: Request):
        session = get_session(session_id)

        def generator():
            index = 0
            while True:
                with session.cond:
                    while index >= len(session.events):
                        session.cond.wait(timeout=0.5)
                    event = session.events[index]
                index += 1
                if event.get("done"):
                    yield "event: done\ndata: {}\n\n"
                    return
                yield f"data: {json.dumps(event)}\n\n"

        return StreamingResponse(generator(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/export")
    def get_export(session_id: str):
        session = get_session(session_id)
        if session.knots is None:
            raise HTTPException(409, "nothing to export")
        with session.lock:
            knots = session.knots
            record = AnnotationRecord(
                image_id=f"{session.id}/slice_{session.slice_index:03d}",
                image_size=(session.stack.width, session.stack.height),
                knots=knots, hyper=session.hyper,
                final_loss=session.last_breakdown)
        document = export_annotation(record)
        mask = contour_mask(knots, session.stack.width, session.stack.height,
                            session.hyper.samples_per_segment)
        png = _mask_png(mask)
        if out_root is not None:
            out_root.mkdir(parents=True, exist_ok=True)
            stem = f"{session.id}_slice{session.slice_index:03d}"
            (out_root / f"{stem}.json").write_text(document)
            (out_root / f"{stem}_mask.png").write_bytes(png)
        return {
            "annotation": json.loads(document),
            "mask_png_base64": base64.b64encode(png).decode(),
        }

    @app.post("/sessions/{session_id}/next-slice")
    def post_next_slice(session_id: str):
        session = get_session(session_id)
        if session.state == "running":
            raise HTTPException(409, "pause or finish the current run first")
        if session.slice_index + 1 >= len(session.stack):
            raise HTTPException(409, "already at the last slice")
        with session.lock:
            session.slice_index += 1
            session.state = "idle"  # warm start: knots carry over unchanged
        return {
            "state": session.state,
            "slice_index": session.slice_index,
            **(session.knot_payload() if session.knots is not None else {}),
        }

    return app


def _mask_png(mask: Mask) -> bytes:
    from PIL import Image

    buf = _io.BytesIO()
    arr = np.where(mask.inside, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def main(argv=None) -> int:
    import uvicorn

    parser = argparse.ArgumentParser(prog="pics-serve")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--workdir", help="directory for write-through exports")
    args = parser.parse_args(argv)
    uvicorn.run(create_app(args.workdir), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    main()
