"""Latent-edge interpolation and pre-rendered wavetable banks.

A bank is an ordered stack of conditioned 514-sample tables sampled along the
straight line between two latent vectors. Pre-rendering moves all neural
decode cost to build time so playback stays constant-cost per sample.

Bank file layout (little-endian throughout):
  bytes 0-3   ASCII "NWTB"
  bytes 4-7   u32 version = 1
  bytes 8-11  u32 table_count
  bytes 12-15 u32 table_len (514 for canonical banks)
  bytes 16-19 u32 metadata_len
  next        metadata_len bytes of UTF-8 JSON:
              {"labels": [a, b], "ramp_len": S, "model_seed": n}
  then        table_count * table_len IEEE-754 32-bit floats,
              tables in interpolation order, samples in index order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .autoencoder import AutoencoderModel, decode, encode
from .errors import BadMagic, BankFormatError, ConstantInput, Truncated, VersionMismatch
from .validation import as_samples, check_range, frozen_array
from .waveforms import CANONICAL_LENGTH, DEFAULT_RAMP_LEN, condition, gen_waveform, normalize

BANK_MAGIC = b"NWTB"
BANK_VERSION = 1
DEFAULT_BANK_STEPS = 100
DEFAULT_PAIRS = (("sine", "saw"), ("saw", "triangle"), ("triangle", "sine"))

_HEADER = struct.Struct("<4sIIII")


@dataclass(frozen=True)
class WavetableBank:
    """Immutable stack of same-length, zero-endpoint tables along one edge."""

    tables: np.ndarray  # (step_count, table_len) float64
    labels: tuple[str, str]
    ramp_len: int
    model_seed: int = 0

    def __post_init__(self):
        tables = frozen_array(self.tables)
        if tables.ndim != 2:
            raise ValueError(f"tables must be 2-D, got shape {tables.shape}")
        if tables.shape[0] < 2:
            raise ValueError(f"a bank needs at least 2 tables, got {tables.shape[0]}")
        if not np.all(np.isfinite(tables)):
            raise ValueError("bank tables contain non-finite values")
        if np.any(tables[:, 0] != 0.0) or np.any(tables[:, -1] != 0.0):
            raise ValueError("bank tables must start and end on exactly 0")
        if len(self.labels) != 2:
            raise ValueError(f"labels must be a pair, got {self.labels!r}")
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "labels", (str(self.labels[0]), str(self.labels[1])))

    @property
    def step_count(self) -> int:
        return self.tables.shape[0]

    @property
    def table_len(self) -> int:
        return self.tables.shape[1]


def lerp_latent(a, b, t: float) -> np.ndarray:
    """Element-wise ``(1 - t) * a + t * b``; exact endpoints at t = 0 and 1."""
    a = as_samples(a, "a")
    b = as_samples(b, "b")
    if a.size != b.size:
        raise ValueError(f"latent length mismatch: {a.size} vs {b.size}")
    t = check_range(t, 0.0, 1.0, "t")
    return (1.0 - t) * a + t * b


def build_bank(model: AutoencoderModel, wf_a, wf_b, steps: int,
               ramp_len: int = DEFAULT_RAMP_LEN,
               labels: tuple[str, str] = ("a", "b")) -> WavetableBank:
    """Decode and condition ``steps`` tables along the edge between two waveforms.

    Table i sits at ``t = i / (steps - 1)``, so the first and last tables are
    bit-identical to the conditioned decodes of the endpoint latents.
    """
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    z_a = encode(model, wf_a)
    z_b = encode(model, wf_b)
    tables = np.empty((steps, model.input_dim + 2))
    for i in range(steps):
        t = i / (steps - 1)
        try:
            tables[i] = condition(decode(model, lerp_latent(z_a, z_b, t)), ramp_len)
        except ConstantInput as e:
            raise ConstantInput(f"degenerate decode at interpolation step {i} (t={t:g}): {e}") from e
    return WavetableBank(tables, labels, ramp_len, model_seed=model.seed)


def build_default_banks(model: AutoencoderModel,
                        ramp_len: int = DEFAULT_RAMP_LEN) -> tuple[WavetableBank, ...]:
    """The three standard 100-step banks between phase-0 preset shapes."""
    banks = []
    for name_a, name_b in DEFAULT_PAIRS:
        wf_a = normalize(gen_waveform(name_a, CANONICAL_LENGTH, 0.0))
        wf_b = normalize(gen_waveform(name_b, CANONICAL_LENGTH, 0.0))
        banks.append(build_bank(model, wf_a, wf_b, DEFAULT_BANK_STEPS, ramp_len,
                                labels=(name_a, name_b)))
    return tuple(banks)


def save_bank(bank: WavetableBank, destination) -> None:
    """Write a bank in the binary container format (samples as float32)."""
    meta = json.dumps(
        {"labels": list(bank.labels), "ramp_len": bank.ramp_len, "model_seed": bank.model_seed}
    ).encode("utf-8")
    header = _HEADER.pack(BANK_MAGIC, BANK_VERSION, bank.step_count, bank.table_len, len(meta))
    payload = bank.tables.astype("<f4").tobytes()
    if hasattr(destination, "write"):
        destination.write(header + meta + payload)
    else:
        with open(destination, "wb") as f:
            f.write(header + meta + payload)


def load_bank(source) -> WavetableBank:
    """Read and validate a bank file written by :func:`save_bank`."""
    if hasattr(source, "read"):
        raw = source.read()
    else:
        with open(source, "rb") as f:
            raw = f.read()
    if len(raw) < 4:
        raise Truncated(f"bank file is only {len(raw)} bytes, too short for the magic")
    if raw[:4] != BANK_MAGIC:
        raise BadMagic(f"bad magic {raw[:4]!r}; expected {BANK_MAGIC!r}")
    if len(raw) < _HEADER.size:
        raise Truncated(f"bank file is only {len(raw)} bytes, too short for the header")
    _, version, table_count, table_len, meta_len = _HEADER.unpack_from(raw)
    if version != BANK_VERSION:
        raise VersionMismatch(f"unsupported bank version {version}; expected {BANK_VERSION}")
    offset = _HEADER.size
    if len(raw) < offset + meta_len:
        raise Truncated("bank file ends inside the metadata block")
    try:
        meta = json.loads(raw[offset : offset + meta_len].decode("utf-8"))
        labels = (str(meta["labels"][0]), str(meta["labels"][1]))
        ramp_len = int(meta["ramp_len"])
        model_seed = int(meta["model_seed"])
    except (ValueError, KeyError, IndexError, TypeError, UnicodeDecodeError) as e:
        raise BankFormatError(f"malformed bank metadata: {e!r}") from e
    offset += meta_len
    expected = table_count * table_len * 4
    if len(raw) - offset < expected:
        raise Truncated(
            f"bank payload has {len(raw) - offset} bytes; header declares "
            f"{table_count} x {table_len} samples = {expected} bytes"
        )
    if len(raw) - offset > expected:
        raise BankFormatError(f"{len(raw) - offset - expected} trailing bytes after payload")
    samples = np.frombuffer(raw, dtype="<f4", count=table_count * table_len, offset=offset)
    tables = samples.astype(np.float64).reshape(table_count, table_len)
    try:
        return WavetableBank(tables, labels, ramp_len, model_seed=model_seed)
    except ValueError as e:
        raise BankFormatError(str(e)) from e
