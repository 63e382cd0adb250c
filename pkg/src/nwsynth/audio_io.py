"""WAV output and score-file parsing.

WAV files are mono 16-bit PCM with symmetric scaling: sample values in
[-1, 1] map to round(s * 32767), so -1.0 becomes -32767 (never -32768) and
full-scale audio round-trips without asymmetric clipping.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, fields

import numpy as np

from .engine import NoteEvent, RenderConfig, SynthParams
from .errors import EmptyScore, ScoreError
from .validation import as_samples


@dataclass(frozen=True)
class Score:
    """Parsed score: events plus the default voice and render settings."""

    events: tuple[NoteEvent, ...]
    params: SynthParams
    config: RenderConfig

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if not self.events:
            raise EmptyScore("score contains no events")


def write_wav(samples, sample_rate: int, destination) -> None:
    """Write mono 16-bit little-endian PCM in standard RIFF layout."""
    samples = as_samples(samples, "samples")
    if np.any(np.abs(samples) > 1.0):
        raise ValueError("samples must lie in [-1, 1]")
    data = np.rint(samples * 32767.0).astype("<i2").tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(data), b"WAVE",
        b"fmt ", 16, 1, 1, int(sample_rate), 2 * int(sample_rate), 2, 16,
        b"data", len(data),
    )
    if hasattr(destination, "write"):
        destination.write(header + data)
    else:
        with open(destination, "wb") as f:
            f.write(header + data)


_EVENT_KEYS = {"midi_note", "start_s", "duration_s", "velocity", "bank_position"}
_PARAM_KEYS = {f.name for f in fields(SynthParams)}
_TOP_KEYS = {"sample_rate_hz", "params", "events"}


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ScoreError(f"{where}: missing required field \"{key}\"")
    return mapping[key]


def parse_score(source) -> Score:
    """Parse and validate a UTF-8 JSON score from a path or file-like object.

    Every failure raises :class:`ScoreError` (or a subclass) naming the
    offending field; syntax errors carry the line number.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as f:
            text = f.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScoreError(f"score syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ScoreError("score top level must be an object")
    for key in doc:
        if key not in _TOP_KEYS:
            raise ScoreError(f"unknown top-level field \"{key}\"")

    sample_rate = doc.get("sample_rate_hz", 44100)
    try:
        config = RenderConfig(sample_rate_hz=int(sample_rate))
    except (TypeError, ValueError) as e:
        raise ScoreError(f"sample_rate_hz: {e}") from e

    raw_params = doc.get("params", {})
    if not isinstance(raw_params, dict):
        raise ScoreError("params must be an object")
    for key in raw_params:
        if key not in _PARAM_KEYS:
            raise ScoreError(f"params: unknown field \"{key}\"")
    try:
        params = SynthParams(**{k: float(v) for k, v in raw_params.items()})
    except (TypeError, ValueError) as e:
        raise ScoreError(f"params: {e}") from e

    raw_events = _require(doc, "events", "score")
    if not isinstance(raw_events, list):
        raise ScoreError("events must be an array")
    if not raw_events:
        raise EmptyScore("events array is empty")
    events = []
    for i, raw in enumerate(raw_events):
        where = f"events[{i}]"
        if not isinstance(raw, dict):
            raise ScoreError(f"{where}: must be an object")
        for key in raw:
            if key not in _EVENT_KEYS:
                raise ScoreError(f"{where}: unknown field \"{key}\"")
        midi_note = _require(raw, "midi_note", where)
        duration = _require(raw, "duration_s", where)
        if isinstance(midi_note, bool) or not isinstance(midi_note, int):
            raise ScoreError(f"{where}: midi_note must be an integer, got {midi_note!r}")
        try:
            events.append(
                NoteEvent(
                    midi_note=midi_note,
                    start_s=float(raw.get("start_s", 0.0)),
                    duration_s=float(duration),
                    velocity=float(raw.get("velocity", 1.0)),
                    bank_position=(
                        None if raw.get("bank_position") is None
                        else float(raw["bank_position"])
                    ),
                )
            )
        except (TypeError, ValueError) as e:
            raise ScoreError(f"{where}: {e}") from e
    return Score(tuple(events), params, config)


def parse_score_text(text: str) -> Score:
    """Parse a score from an in-memory JSON string."""
    return parse_score(io.StringIO(text))
