# -*- coding: utf-8 -*-
"""Local control service for the companion UI.

One engine instance per session: POST an ARIR to analyze it, steer the
listener over a WebSocket, and audition the current pose via a chunked
stereo preview stream. Localhost plumbing, no auth.
"""

import json
import struct
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from fastapi import FastAPI, File, HTTPException, Query, UploadFile, WebSocket
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse
from starlette.websockets import WebSocketDisconnect

from . import io as rio
from . import pipeline, renderer, sources, translation
from .errors import ConfigError, FileFormatError, RoomshiftError, UnsupportedInputError

#: Close code for pose channels addressing a missing session.
WS_UNKNOWN_SESSION = 4404

_PREVIEW_BATCH_S = 0.1
_MAX_PREVIEW_S = 30.0


@dataclass
class Session:
    preset: pipeline.AnalysisPreset
    stream: renderer.StreamRenderer
    lock: threading.Lock = field(default_factory=threading.Lock)


def _build_session(preset, block_size=256):
    config = renderer.RenderConfig(block_size=block_size,
                                   sample_rate=preset.sample_rate,
                                   order=preset.order)
    stream = renderer.StreamRenderer(preset.events, preset.residual.signal,
                                     config, walls=preset.walls, clamp=True)
    return Session(preset=preset, stream=stream)


def _wav_header(n_samples, n_channels, sample_rate):
    """RIFF header for 32-bit float PCM with a known final length."""
    data_bytes = n_samples * n_channels * 4
    byte_rate = int(sample_rate) * n_channels * 4
    return b"".join([
        b"RIFF", struct.pack("<I", 36 + data_bytes), b"WAVE",
        b"fmt ", struct.pack("<IHHIIHH", 16, 3, n_channels,
                             int(sample_rate), byte_rate, n_channels * 4, 32),
        b"data", struct.pack("<I", data_bytes),
    ])


def create_app():
    app = FastAPI(title="roomshift control service")
    # the companion UI is served from its own origin (file or dev server);
    # the service itself stays bound to localhost
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    sessions: Dict[str, Session] = {}
    app.state.sessions = sessions

    def get_session(session_id):
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    @app.get("/")
    def root():
        return {"service": "roomshift", "sessions": len(sessions)}

    @app.post("/session")
    async def create_session(
            file: Optional[UploadFile] = File(default=None),
            path: Optional[str] = Query(default=None),
            order: int = Query(default=3, ge=1, le=5),
            max_events: int = Query(default=10, ge=1, le=64),
            normalization: str = Query(default="auto")):
        if normalization not in ("auto", "n3d", "sn3d"):
            raise HTTPException(status_code=400, detail="bad normalization")
        norm = None if normalization == "auto" else normalization
        try:
            if file is not None:
                data = await file.read()
                if not data:
                    raise HTTPException(status_code=400, detail="empty upload")
                with tempfile.NamedTemporaryFile(suffix=".wav") as tmp:
                    tmp.write(data)
                    tmp.flush()
                    arir = rio.read_arir(tmp.name, norm)
            elif path:
                arir = rio.read_arir(path, norm)
            else:
                raise HTTPException(status_code=400,
                                    detail="provide a file upload or ?path=")
        except FileNotFoundError:
            raise HTTPException(status_code=400, detail="no such file")
        except (FileFormatError, UnsupportedInputError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

        try:
            config = pipeline.AnalysisConfig(order=order, max_events=max_events)
            preset = pipeline.analyze(arir, config)
            session = _build_session(preset)
        except RoomshiftError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

        session_id = uuid.uuid4().hex[:12]
        sessions[session_id] = session
        return {"session": session_id, **preset.summary()}

    @app.get("/session/{session_id}")
    def session_info(session_id: str):
        session = get_session(session_id)
        snap = session.stream.snapshot
        return {
            "session": session_id,
            "pose": [float(v) for v in snap.pose],
            **session.preset.summary(),
        }

    @app.websocket("/session/{session_id}/pose")
    async def pose_channel(websocket: WebSocket, session_id: str):
        await websocket.accept()
        session = sessions.get(session_id)
        if session is None:
            await websocket.close(code=WS_UNKNOWN_SESSION)
            return
        while True:
            try:
                raw = await websocket.receive_text()
            except WebSocketDisconnect:
                return
            try:
                msg = json.loads(raw)
                pose = np.array([float(msg[k]) for k in ("x", "y", "z")])
                timestamp = float(msg.get("t", 0.0))
                if not np.all(np.isfinite(pose)):
                    raise ValueError("non-finite pose")
            except (KeyError, TypeError, ValueError):
                await websocket.send_json(
                    {"error": "expected {x, y, z} with finite numbers"})
                continue
            with session.lock:
                snapshot = session.stream.set_pose(
                    translation.ListenerPose(tuple(pose), timestamp))
            await websocket.send_json({
                "applied": [float(v) for v in snapshot.pose],
                "clamped": snapshot.clamped,
                "generation": snapshot.generation,
                "params": [{
                    "event": ev.index,
                    "gain": t.gain,
                    "time_shift_ms": 1e3 * t.time_shift_s,
                } for ev, t in zip(session.preset.events,
                                   snapshot.translations)],
            })

    @app.get("/session/{session_id}/preview")
    def preview(session_id: str,
                src: str = Query(default="impulses"),
                seconds: float = Query(default=2.0, gt=0.0,
                                       le=_MAX_PREVIEW_S)):
        session = get_session(session_id)
        fs = session.preset.sample_rate
        try:
            dry = sources.render_source(src, fs, seconds)
        except ConfigError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

        stream = session.stream
        block = stream.config.block_size
        with session.lock:
            stream.reset()
            n_out = dry.size + stream.tail_samples
        n_blocks = -(-n_out // block)
        padded = np.zeros(n_blocks * block)
        padded[:dry.size] = dry

        def batches():
            yield _wav_header(n_blocks * block, 2, fs)
            per_batch = max(int(_PREVIEW_BATCH_S * fs) // block, 1)
            for start in range(0, n_blocks, per_batch):
                stop = min(start + per_batch, n_blocks)
                with session.lock:
                    hoa = np.concatenate(
                        [stream.process_block(padded[i * block:(i + 1) * block])
                         for i in range(start, stop)], axis=1)
                stereo = renderer.preview_decode(hoa)
                yield stereo.T.astype("<f4").tobytes()

        return StreamingResponse(batches(), media_type="audio/wav")

    return app
