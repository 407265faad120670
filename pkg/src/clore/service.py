"""HTTP session API for interactive annotation, plus mask RLE codec.

Sessions are in-memory and expire after an idle TTL; a restart loses them
(clients then see 404s).  Masks travel as row-major run-length counts that
alternate starting with background, so per-click payloads stay small.
"""

import io
import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.responses import JSONResponse, Response
from PIL import Image

from .pipeline import ClickEngine, SessionConfig, SessionState, StepOutput
from .predictor import Predictor, PredictorError, ReferenceClickPredictor

MAX_IMAGE_SIDE = 4096
CONFIG_FIELDS = ("n_trigger", "working_dims", "gamma_expand", "crop_expand",
                 "click_radius", "binarize_threshold",
                 "enforce_click_consistency", "max_clicks")


def rle_encode(mask: np.ndarray) -> dict:
    """Run lengths over the flattened mask, alternating from background."""
    h, w = mask.shape
    flat = np.asarray(mask, bool).ravel()
    changes = np.flatnonzero(np.diff(flat))
    edges = np.concatenate(([0], changes + 1, [flat.size]))
    counts = np.diff(edges).tolist()
    if flat.size and flat[0]:
        counts = [0] + counts
    return {"height": h, "width": w, "counts": [int(c) for c in counts]}


def rle_decode(rle: dict) -> np.ndarray:
    h, w = int(rle["height"]), int(rle["width"])
    counts = [int(c) for c in rle["counts"]]
    if any(c < 0 for c in counts):
        raise ValueError("negative run length")
    if sum(counts) != h * w:
        raise ValueError(f"run lengths sum to {sum(counts)}, expected {h * w}")
    flat = np.zeros(h * w, bool)
    pos = 0
    value = False
    for count in counts:
        if value:
            flat[pos:pos + count] = True
        pos += count
        value = not value
    return flat.reshape(h, w)


@dataclass
class Session:
    id: str
    engine: ClickEngine
    state: SessionState
    created_at: float
    last_access: float
    lock: threading.Lock = field(default_factory=threading.Lock)

    def config_dict(self) -> dict:
        cfg = self.engine.cfg
        return {name: getattr(cfg, name) for name in CONFIG_FIELDS}


class SessionStore:
    """Thread-safe id -> Session map with idle eviction."""

    def __init__(self, ttl_secs: float = 1800.0):
        self.ttl_secs = ttl_secs
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def _evict_expired(self, now: float) -> None:
        dead = [sid for sid, s in self._sessions.items()
                if now - s.last_access > self.ttl_secs]
        for sid in dead:
            del self._sessions[sid]

    def add(self, session: Session) -> None:
        with self._lock:
            self._evict_expired(time.monotonic())
            self._sessions[session.id] = session

    def get(self, session_id: str) -> Optional[Session]:
        with self._lock:
            now = time.monotonic()
            self._evict_expired(now)
            session = self._sessions.get(session_id)
            if session is not None:
                session.last_access = now
            return session

    def remove(self, session_id: str) -> bool:
        with self._lock:
            return self._sessions.pop(session_id, None) is not None

    def __len__(self) -> int:
        return len(self._sessions)


def predictor_from_spec(spec: str) -> Predictor:
    """Build a predictor from a CLI/env spec: 'reference' or 'external:<addr>'."""
    if spec == "reference":
        return ReferenceClickPredictor()
    if spec.startswith("external:"):
        from .wire import ExternalPredictor

        return ExternalPredictor(spec.split(":", 1)[1])
    raise ValueError(f"unknown predictor spec {spec!r}")


def _decode_upload(data: bytes) -> np.ndarray:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except Exception as e:
        raise ValueError(f"cannot decode image: {e}") from e
    return np.asarray(img.convert("RGB"), np.float32) / 255.0


def _step_response(session: Session, out: StepOutput) -> dict:
    lp = None
    if out.local_patch is not None:
        r = out.local_patch
        lp = {"y1": r.y1, "y2": r.y2, "x1": r.x1, "x2": r.x2}
    return {
        "mask": rle_encode(out.mask),
        "phase": out.phase,
        "local_patch": lp,
        "elapsed_ms": int(round(out.elapsed_ms)),
        "click_count": session.state.click_count,
    }


def create_app(predictor: Optional[Predictor] = None,
               default_config: Optional[SessionConfig] = None,
               session_ttl_secs: Optional[float] = None,
               ui_dir: Optional[str] = None):
    """Build the FastAPI app; one predictor instance serves every session."""
    if predictor is None:
        predictor = predictor_from_spec(os.environ.get("CLORE_PREDICTOR", "reference"))
    if default_config is None:
        default_config = SessionConfig()
    if session_ttl_secs is None:
        session_ttl_secs = float(os.environ.get("CLORE_SESSION_TTL_SECS", "1800"))

    app = FastAPI(title="clore annotation service")
    store = SessionStore(session_ttl_secs)
    app.state.store = store
    app.state.predictor = predictor

    def lookup(session_id: str) -> Session:
        session = store.get(session_id)
        if session is None:
            raise HTTPException(404, f"no session {session_id}")
        return session

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": len(store)}

    @app.post("/sessions")
    async def create_session(image: UploadFile = File(...),
                             config: str = Form("{}")):
        try:
            overrides = json.loads(config) if config else {}
        except ValueError as e:
            raise HTTPException(400, f"bad config JSON: {e}")
        data = await image.read()
        try:
            pixels = _decode_upload(data)
        except ValueError as e:
            raise HTTPException(400, str(e))
        h, w = pixels.shape[:2]
        if h > MAX_IMAGE_SIDE or w > MAX_IMAGE_SIDE:
            raise HTTPException(413, f"image {h}x{w} exceeds {MAX_IMAGE_SIDE}")
        cfg_kwargs = {name: getattr(default_config, name) for name in CONFIG_FIELDS}
        unknown = set(overrides) - set(CONFIG_FIELDS)
        if unknown:
            raise HTTPException(400, f"unknown config fields: {sorted(unknown)}")
        cfg_kwargs.update(overrides)
        try:
            cfg = SessionConfig(**cfg_kwargs)
        except ValueError as e:
            raise HTTPException(400, str(e))
        engine = ClickEngine(predictor, cfg)
        session = Session(uuid.uuid4().hex, engine, engine.new_session(pixels),
                          time.monotonic(), time.monotonic())
        store.add(session)
        return {"id": session.id, "config": session.config_dict(),
                "height": h, "width": w}

    @app.post("/sessions/{session_id}/clicks")
    def post_click(session_id: str, body: dict):
        session = lookup(session_id)
        try:
            y, x = int(body["y"]), int(body["x"])
            positive = bool(body["positive"])
        except (KeyError, TypeError, ValueError) as e:
            raise HTTPException(400, f"body needs y, x, positive: {e}")
        with session.lock:
            try:
                out = session.engine.add_click(session.state, y, x, positive)
            except ValueError as e:
                raise HTTPException(400, str(e))
            except PredictorError as e:
                raise HTTPException(502, f"predictor failure: {e}")
            return _step_response(session, out)

    @app.post("/sessions/{session_id}/undo")
    def post_undo(session_id: str):
        session = lookup(session_id)
        with session.lock:
            try:
                out = session.engine.undo(session.state)
            except IndexError:
                raise HTTPException(409, "nothing to undo")
            return _step_response(session, out)

    @app.get("/sessions/{session_id}/mask.png")
    def get_mask(session_id: str):
        session = lookup(session_id)
        with session.lock:
            mask = session.state.cur_mask
            img = Image.fromarray(np.asarray(mask, np.uint8) * 255, "L").convert("1")
        buf = io.BytesIO()
        img.save(buf, "PNG")
        return Response(buf.getvalue(), media_type="image/png")

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        if not store.remove(session_id):
            raise HTTPException(404, f"no session {session_id}")
        return JSONResponse({"deleted": session_id})

    if ui_dir is None:
        ui_dir = os.environ.get("CLORE_UI_DIR", "frontend/dist")
    if ui_dir and os.path.isdir(ui_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
