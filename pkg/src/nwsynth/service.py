"""HTTP facade over encode/decode/interpolate and the pre-rendered banks.

The loaded model and banks are immutable shared values; every endpoint is
read-only and idempotent, so identical requests return identical bodies.
Audio synthesis stays client-side: the service only ships tables. Responses
serialize floats at full round-trip precision (repr), so parse(serialize(x))
recovers x exactly for 64-bit reals.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from .autoencoder import AutoencoderModel, decode, encode, load_model
from .bank import WavetableBank, lerp_latent, load_bank
from .errors import ConstantInput
from .waveforms import CANONICAL_LENGTH, DEFAULT_RAMP_LEN, SHAPES, condition, gen_waveform, normalize


@dataclass(frozen=True)
class ServiceState:
    """Everything a running service needs; validated at startup, never mutated."""

    model: AutoencoderModel
    banks: dict[str, WavetableBank]
    presets: dict[str, np.ndarray]  # preset name -> latent vector


def load_state(model_path, bank_dir=None) -> ServiceState:
    """Load the model, scan ``bank_dir`` for .nwtb files, encode the presets."""
    model = load_model(model_path)
    banks: dict[str, WavetableBank] = {}
    if bank_dir:
        for name in sorted(os.listdir(bank_dir)):
            if name.endswith(".nwtb"):
                banks[name[: -len(".nwtb")]] = load_bank(os.path.join(bank_dir, name))
    presets = {
        shape: encode(model, normalize(gen_waveform(shape, CANONICAL_LENGTH, 0.0)))
        for shape in SHAPES
    }
    return ServiceState(model=model, banks=banks, presets=presets)


def default_static_dir() -> str | None:
    """Locate the built UI next to the working directory, if present."""
    for candidate in ("frontend/dist", os.path.join(os.path.dirname(__file__), "ui")):
        if os.path.isdir(candidate) and os.path.isfile(os.path.join(candidate, "index.html")):
            return candidate
    return None


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(state: ServiceState, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="nwsynth service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    # Framework-raised 4xx (unknown routes, path-parameter coercion) must
    # carry the same {"error": ...} body shape as handler-raised ones.
    @app.exception_handler(StarletteHTTPException)
    async def http_error(_request, exc):
        return _error(exc.status_code, str(exc.detail))

    @app.exception_handler(RequestValidationError)
    async def request_validation_error(_request, exc):
        first = exc.errors()[0] if exc.errors() else {}
        field = str(first.get("loc", ("request",))[-1])
        return _error(422, f"{field}: {first.get('msg', 'invalid value')}")

    @app.get("/api/presets")
    def presets():
        return {
            "presets": [
                {"name": name, "latent": latent.tolist()}
                for name, latent in state.presets.items()
            ]
        }

    def _validate_latent(value, field: str):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) for v in value):
            raise _Invalid(field, f"{field} must be an array of numbers")
        arr = np.asarray(value, dtype=np.float64)
        if arr.size != state.model.latent_dim:
            raise _Invalid(field, f"{field} must have length {state.model.latent_dim}, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise _Invalid(field, f"{field} contains non-finite values")
        return arr

    def _resolve_endpoint(value, field: str):
        if isinstance(value, str):
            if value not in state.presets:
                raise _Invalid(field, f"{field}: unknown preset {value!r}")
            return state.presets[value]
        return _validate_latent(value, field)

    def _conditioned(latent, ramp_len: int):
        return condition(decode(state.model, latent), ramp_len)

    def _ramp_len(body) -> int:
        raw = body.get("ramp_len", DEFAULT_RAMP_LEN)
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise _Invalid("ramp_len", "ramp_len must be an integer")
        if not 1 <= raw <= (CANONICAL_LENGTH + 2) // 4:
            raise _Invalid("ramp_len", f"ramp_len must be in [1, {(CANONICAL_LENGTH + 2) // 4}]")
        return raw

    async def _json_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception as e:
            raise _Malformed(f"body is not valid JSON: {e}") from e
        if not isinstance(body, dict):
            raise _Malformed("body must be a JSON object")
        return body

    @app.post("/api/decode")
    async def decode_endpoint(request: Request):
        try:
            body = await _json_body(request)
            latent = _validate_latent(body.get("latent"), "latent")
            ramp_len = _ramp_len(body)
            table = _conditioned(latent, ramp_len)
        except _Malformed as e:
            return _error(400, str(e))
        except _Invalid as e:
            return _error(422, str(e))
        except ConstantInput as e:
            return _error(409, f"latent decodes to a constant waveform: {e}")
        return {"samples": table.tolist(), "source": "decode"}

    @app.post("/api/interp")
    async def interp_endpoint(request: Request):
        try:
            body = await _json_body(request)
            z_a = _resolve_endpoint(body.get("a"), "a")
            z_b = _resolve_endpoint(body.get("b"), "b")
            t = body.get("t")
            if isinstance(t, bool) or not isinstance(t, (int, float)) or not 0.0 <= t <= 1.0:
                raise _Invalid("t", f"t must be a number in [0, 1], got {t!r}")
            ramp_len = _ramp_len(body)
            table = _conditioned(lerp_latent(z_a, z_b, float(t)), ramp_len)
        except _Malformed as e:
            return _error(400, str(e))
        except _Invalid as e:
            return _error(422, str(e))
        except ConstantInput as e:
            return _error(409, f"interpolated latent decodes to a constant waveform: {e}")
        return {"samples": table.tolist(), "source": "interp", "t": float(t)}

    @app.get("/api/banks")
    def banks_endpoint():
        return {
            "banks": [
                {"name": name, "step_count": b.step_count, "labels": list(b.labels)}
                for name, b in sorted(state.banks.items())
            ]
        }

    @app.get("/api/banks/{name}/tables/{index}")
    def bank_table(name: str, index: int):
        if name not in state.banks:
            return _error(404, f"unknown bank {name!r}")
        b = state.banks[name]
        if not 0 <= index < b.step_count:
            return _error(404, f"table index {index} out of range for bank {name!r} "
                               f"with {b.step_count} tables")
        return {"samples": b.tables[index].tolist()}

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


class _Invalid(Exception):
    """Request field violates its contract; maps to 422."""

    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


class _Malformed(Exception):
    """Request body is not parseable JSON; maps to 400."""
