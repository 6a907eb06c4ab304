"""HTTP inference service.

Endpoints (JSON in/out, PNG payloads as base64):
    GET  /api/health        liveness + whether a model is loaded
    GET  /api/attributes    attribute names, in canonical order
    GET  /api/fonts         source fonts available in the checkpoint
    POST /api/generate      one glyph set for an attribute configuration
    POST /api/interpolate   frames along the line between two configurations

Requests referencing unknown attribute names, out-of-range values, unknown
characters or fonts get a 400 whose detail lists the offending names; all
data endpoints return 503 until a checkpoint is loaded.
"""

import base64
import io
from typing import Dict, List, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from PIL import Image
from pydantic import BaseModel, Field

from .infer import InferenceSession


class GenerateRequest(BaseModel):
    attributes: Dict[str, float]
    text: Optional[str] = None          # characters to render; default whole charset
    source_font: Optional[str] = None   # fixed source; default nearest-attribute


class InterpolateRequest(BaseModel):
    attributes_a: Dict[str, float]
    attributes_b: Dict[str, float]
    steps: int = Field(default=11, ge=2, le=41)
    text: Optional[str] = None
    source_font: Optional[str] = None


def _png_b64(img: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(img).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _reject(message: str, offending: List[str]):
    raise HTTPException(status_code=400, detail={"message": message, "offending": offending})


def _attr_vector(session: InferenceSession, attrs: Dict[str, float]) -> np.ndarray:
    names = session.attribute_names
    unknown = sorted(k for k in attrs if k not in names)
    if unknown:
        _reject("unknown attribute names", unknown)
    missing = [n for n in names if n not in attrs]
    if missing:
        _reject("missing attribute names", missing)
    bad = sorted(k for k, v in attrs.items() if not 0.0 <= float(v) <= 1.0)
    if bad:
        _reject("attribute values must lie in [0, 1]", bad)
    return np.array([float(attrs[n]) for n in names], dtype=np.float64)


def _char_indices(session: InferenceSession, text: Optional[str]) -> List[int]:
    if text is None:
        return list(range(len(session.charset)))
    unknown = sorted({c for c in text if c not in session.charset})
    if unknown:
        _reject("characters outside the charset", unknown)
    return [session.charset.index(c) for c in text]


def _glyph_payload(session: InferenceSession, indices: List[int], stack: np.ndarray) -> List[Dict]:
    return [
        {"char": session.charset[k], "image": _png_b64(stack[pos])}
        for pos, k in enumerate(indices)
    ]


def create_app(session: Optional[InferenceSession] = None,
               checkpoint: Optional[str] = None) -> FastAPI:
    """Build the service; pass a session directly or a checkpoint path."""
    app = FastAPI(title="attribute font service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    state = {"session": session}
    if checkpoint:
        state["session"] = InferenceSession.from_checkpoint(checkpoint)

    def need_session() -> InferenceSession:
        if state["session"] is None:
            raise HTTPException(status_code=503, detail={"message": "no model loaded"})
        return state["session"]

    @app.get("/api/health")
    def health():
        return {"status": "ok", "model_loaded": state["session"] is not None}

    @app.get("/api/attributes")
    def attributes():
        session = need_session()
        return {"names": session.attribute_names, "count": len(session.attribute_names)}

    @app.get("/api/fonts")
    def fonts():
        session = need_session()
        return {"fonts": list(session.bank.font_ids)}

    @app.post("/api/generate")
    def generate(req: GenerateRequest):
        session = need_session()
        vector = _attr_vector(session, req.attributes)
        indices = _char_indices(session, req.text)
        try:
            stack, used = session.synthesize_charset(vector, source_font=req.source_font, chars=indices)
        except KeyError:
            _reject("unknown source font", [req.source_font])
        return {"source_font": used, "glyphs": _glyph_payload(session, indices, stack)}

    @app.post("/api/interpolate")
    def interpolate(req: InterpolateRequest):
        session = need_session()
        vec_a = _attr_vector(session, req.attributes_a)
        vec_b = _attr_vector(session, req.attributes_b)
        indices = _char_indices(session, req.text)
        try:
            steps = session.interpolate(vec_a, vec_b, lambdas=req.steps,
                                        source_font=req.source_font, chars=indices)
        except KeyError:
            _reject("unknown source font", [req.source_font])
        return {
            "frames": [
                {
                    "lam": s["lam"],
                    "source_font": s["source_font"],
                    "glyphs": _glyph_payload(session, indices, s["glyphs"]),
                }
                for s in steps
            ]
        }

    return app


def run_service(checkpoint: str, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    uvicorn.run(create_app(checkpoint=checkpoint), host=host, port=port)
