"""Command-line surface for the whole pipeline.

Exit codes: 0 success, 1 usage error (bad flags or flag values), 2 data or
validation error (bad file contents, degenerate decodes), 3 I/O error. Every
error message names the offending flag or file.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import audio_io, bank as bank_mod, service
from .autoencoder import (
    TrainingConfig,
    corpus_split,
    decode,
    encode,
    evaluate_mse,
    gradient_check_suite,
    load_model,
    save_model,
    train,
)
from .engine import RenderConfig, WavetableBank, oscillate, render_score
from .errors import EmptyScore, ScoreError, TrainingDiverged
from .waveforms import (
    CANONICAL_LENGTH,
    DEFAULT_RAMP_LEN,
    SHAPES,
    condition,
    gen_waveform,
    normalize,
    spectral_flatness,
)

GRADCHECK_LIMIT = 1e-4
PREVIEW_FREQ_HZ = 440.0
PREVIEW_SECONDS = 1.0

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3


class UsageError(Exception):
    """Raised for bad flags or flag values; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _shape_flag(flag: str, value: str) -> str:
    if value not in SHAPES:
        raise UsageError(f"{flag} must be one of {', '.join(SHAPES)}, got {value!r}")
    return value


def _unit_flag(flag: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise UsageError(f"{flag} must be in [0, 1], got {value!r}")
    return value


def _preset_waveform(shape: str, phase: float = 0.0) -> np.ndarray:
    return normalize(gen_waveform(shape, CANONICAL_LENGTH, phase))


def _load_with_context(loader, path):
    """Run a file loader, prefixing validation errors with the file name."""
    try:
        return loader(path)
    except ValueError as e:
        raise type(e)(f"{path}: {e}") from e


def build_parser() -> _Parser:
    parser = _Parser(prog="nwsynth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the autoencoder and save the model")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=TrainingConfig.epochs)
    p.add_argument("--latent", type=int, default=TrainingConfig.latent_dim)
    p.add_argument("--out", required=True, help="destination model JSON file")

    sub.add_parser("gradcheck", help="verify analytic gradients against finite differences")

    p = sub.add_parser("encode", help="print the latent vector of a preset shape")
    p.add_argument("--model", required=True)
    p.add_argument("--shape", required=True)
    p.add_argument("--phase", type=float, default=0.0)

    p = sub.add_parser("decode", help="decode a latent to a loop preview or table file")
    p.add_argument("--model", required=True)
    p.add_argument("--latent", required=True, help="JSON array of latent values")
    p.add_argument("--out", required=True, help=".wav for a loop preview, else a bank-table file")

    p = sub.add_parser("interp", help="decode one interpolated table as a 1 s loop preview")
    p.add_argument("--model", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bank", help="pre-render one interpolation bank")
    p.add_argument("--model", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--steps", type=int, default=bank_mod.DEFAULT_BANK_STEPS)
    p.add_argument("--ramp", type=int, default=DEFAULT_RAMP_LEN)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bank-default", help="pre-render the three standard banks")
    p.add_argument("--model", required=True)
    p.add_argument("--outdir", required=True)

    p = sub.add_parser("render", help="render a JSON score through a bank to WAV")
    p.add_argument("--bank", required=True)
    p.add_argument("--score", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("edge-noise", help="report spectral flatness on and off the latent edge")
    p.add_argument("--model", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--offsets", required=True, help="JSON array of displacement magnitudes")

    p = sub.add_parser("serve", help="serve the HTTP API and UI")
    p.add_argument("--model", required=True)
    p.add_argument("--bankdir", default=None)
    p.add_argument("--port", type=int, default=8000)

    return parser


def _cmd_train(args) -> int:
    config = TrainingConfig(seed=args.seed, epochs=args.epochs, latent_dim=args.latent)
    model, history = train(config)
    _, holdout = corpus_split(config)
    save_model(model, args.out)
    print(f"saved model to {args.out}")
    if history:
        print(f"training loss: first epoch {history[0]:.6f}, last epoch {history[-1]:.6f}")
    if holdout.size:
        print(f"holdout reconstruction MSE: {evaluate_mse(model, holdout):.6f}")
    # Reconstruction polarity of the phase-0 sine: some models settle on an
    # inverted reconstruction, which leaves pitch and timbre unchanged.
    sine = _preset_waveform("sine")
    recon = decode(model, encode(model, sine))
    corr = float(np.dot(recon, sine))
    print(f"sine reconstruction polarity: {'inverted' if corr < 0 else 'upright'} "
          f"(correlation {corr:+.1f})")
    return EXIT_OK


def _cmd_gradcheck(_args) -> int:
    worst = gradient_check_suite()
    print(f"max relative gradient error: {worst:.3e} "
          f"(10 tiny models, central differences, step 1e-05)")
    return EXIT_OK if worst < GRADCHECK_LIMIT else EXIT_DATA


def _cmd_encode(args) -> int:
    shape = _shape_flag("--shape", args.shape)
    if not 0.0 <= args.phase < 1.0:
        raise UsageError(f"--phase must be in [0, 1), got {args.phase!r}")
    model = _load_with_context(load_model, args.model)
    latent = encode(model, _preset_waveform(shape, args.phase))
    print(json.dumps(latent.tolist()))
    return EXIT_OK


def _parse_json_flag(flag: str, text: str) -> list:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"{flag} is not valid JSON: {e.msg}") from e
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) for v in value):
        raise UsageError(f"{flag} must be a JSON array of numbers")
    return value


def _write_loop_preview(table: np.ndarray, destination) -> None:
    # Duplicate the single table so the bilinear reader has two slots.
    preview_bank = WavetableBank(
        np.stack([table, table]), labels=("preview", "preview"), ramp_len=DEFAULT_RAMP_LEN
    )
    config = RenderConfig()
    n = int(round(PREVIEW_SECONDS * config.sample_rate_hz))
    audio = oscillate(preview_bank, PREVIEW_FREQ_HZ, 0.0, config, n)
    audio_io.write_wav(audio, config.sample_rate_hz, destination)


def _cmd_decode(args) -> int:
    model = _load_with_context(load_model, args.model)
    latent = np.asarray(_parse_json_flag("--latent", args.latent), dtype=np.float64)
    if latent.size != model.latent_dim:
        raise UsageError(
            f"--latent must have {model.latent_dim} values for this model, got {latent.size}"
        )
    table = condition(decode(model, latent))
    if str(args.out).lower().endswith(".wav"):
        _write_loop_preview(table, args.out)
        print(f"wrote loop preview to {args.out}")
    else:
        single = WavetableBank(np.stack([table, table]), labels=("decode", "decode"),
                               ramp_len=DEFAULT_RAMP_LEN, model_seed=model.seed)
        bank_mod.save_bank(single, args.out)
        print(f"wrote decoded table to {args.out}")
    return EXIT_OK


def _cmd_interp(args) -> int:
    shape_a = _shape_flag("--a", args.a)
    shape_b = _shape_flag("--b", args.b)
    t = _unit_flag("--t", args.t)
    model = _load_with_context(load_model, args.model)
    z = bank_mod.lerp_latent(
        encode(model, _preset_waveform(shape_a)), encode(model, _preset_waveform(shape_b)), t
    )
    table = condition(decode(model, z))
    _write_loop_preview(table, args.out)
    print(f"wrote loop preview of {shape_a}->{shape_b} at t={t:g} to {args.out}")
    return EXIT_OK


def _cmd_bank(args) -> int:
    shape_a = _shape_flag("--a", args.a)
    shape_b = _shape_flag("--b", args.b)
    if args.steps < 2:
        raise UsageError(f"--steps must be >= 2, got {args.steps}")
    model = _load_with_context(load_model, args.model)
    built = bank_mod.build_bank(
        model, _preset_waveform(shape_a), _preset_waveform(shape_b),
        args.steps, args.ramp, labels=(shape_a, shape_b),
    )
    bank_mod.save_bank(built, args.out)
    print(f"wrote {built.step_count} tables of {built.table_len} samples to {args.out}")
    return EXIT_OK


def _cmd_bank_default(args) -> int:
    import os

    model = _load_with_context(load_model, args.model)
    os.makedirs(args.outdir, exist_ok=True)
    banks = bank_mod.build_default_banks(model)
    total = 0
    for built in banks:
        path = os.path.join(args.outdir, f"{built.labels[0]}-{built.labels[1]}.nwtb")
        bank_mod.save_bank(built, path)
        total += built.step_count
        print(f"wrote {path}: {built.step_count} tables of {built.table_len} samples")
    print(f"{len(banks)} banks, {total} wavetables total")
    return EXIT_OK


def _cmd_render(args) -> int:
    loaded = _load_with_context(bank_mod.load_bank, args.bank)
    score = _load_with_context(audio_io.parse_score, args.score)
    result = render_score(loaded, score.events, score.params, score.config)
    if result.peak_scale != 1.0:
        print(f"mix exceeded full scale; scaled by {result.peak_scale:.6f}")
    audio_io.write_wav(result.samples, score.config.sample_rate_hz, args.out)
    seconds = result.samples.size / score.config.sample_rate_hz
    print(f"wrote {seconds:.2f} s ({result.samples.size} samples) to {args.out}")
    return EXIT_OK


def _cmd_edge_noise(args) -> int:
    shape_a = _shape_flag("--a", args.a)
    shape_b = _shape_flag("--b", args.b)
    offsets = _parse_json_flag("--offsets", args.offsets)
    model = _load_with_context(load_model, args.model)
    z_a = encode(model, _preset_waveform(shape_a))
    z_b = encode(model, _preset_waveform(shape_b))
    mid = bank_mod.lerp_latent(z_a, z_b, 0.5)
    on_edge = spectral_flatness(decode(model, mid))
    # Fixed seed keeps the report deterministic for identical flags.
    rng = np.random.default_rng(0)
    direction = rng.standard_normal(model.latent_dim)
    direction /= np.linalg.norm(direction)
    print(f"on-edge spectral flatness at t=0.5: {on_edge:.6f}")
    print("offset  off-edge flatness")
    for offset in offsets:
        off = spectral_flatness(decode(model, mid + float(offset) * direction))
        print(f"{float(offset):6g}  {off:.6f}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    state = service.load_state(args.model, args.bankdir)
    app = service.create_app(state, static_dir=service.default_static_dir())
    uvicorn.run(app, host="127.0.0.1", port=args.port)
    return EXIT_OK


_COMMANDS = {
    "train": _cmd_train,
    "gradcheck": _cmd_gradcheck,
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "interp": _cmd_interp,
    "bank": _cmd_bank,
    "bank-default": _cmd_bank_default,
    "render": _cmd_render,
    "edge-noise": _cmd_edge_noise,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # argparse --help exits 0 after printing.
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ScoreError, EmptyScore, TrainingDiverged, ValueError) as e:
        # Covers model/bank/score format errors and numeric validation.
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
