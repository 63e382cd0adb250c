"""Wavetable playback: phase-accumulator oscillator with bilinear table
reads, linear ADSR envelope, one-pole low-pass filter, and offline note and
score rendering.

The oscillator treats a padded table as one full loop period, so a table of
length L played at frequency f advances the fractional table index by
``f * L / sample_rate`` per output sample and the rendered tone sits at f
exactly. Everything is pure with respect to its inputs; rendering here is
offline, but the per-sample oscillator work is constant-cost table reads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import lfilter

from .bank import WavetableBank
from .errors import EmptyScore
from .validation import as_samples, check_range


@dataclass(frozen=True)
class SynthParams:
    """Envelope, filter, and bank-position settings for a voice."""

    attack_s: float = 0.01
    decay_s: float = 0.1
    sustain_level: float = 0.8
    release_s: float = 0.2
    filter_cutoff_hz: float = 8000.0
    bank_position: float = 0.0

    def __post_init__(self):
        check_range(self.attack_s, 0.0, np.inf, "attack_s")
        check_range(self.decay_s, 0.0, np.inf, "decay_s")
        check_range(self.sustain_level, 0.0, 1.0, "sustain_level")
        check_range(self.release_s, 0.0, np.inf, "release_s")
        check_range(self.filter_cutoff_hz, 0.0, np.inf, "filter_cutoff_hz", lo_open=True)
        check_range(self.bank_position, 0.0, 1.0, "bank_position")


@dataclass(frozen=True)
class NoteEvent:
    """One note: MIDI pitch, onset, gate time, velocity, optional position."""

    midi_note: int
    start_s: float = 0.0
    duration_s: float = 1.0
    velocity: float = 1.0
    bank_position: float | None = None

    def __post_init__(self):
        if int(self.midi_note) != self.midi_note or not 0 <= self.midi_note <= 127:
            raise ValueError(f"midi_note must be an integer in [0, 127], got {self.midi_note!r}")
        check_range(self.start_s, 0.0, np.inf, "start_s")
        check_range(self.duration_s, 0.0, np.inf, "duration_s", lo_open=True)
        check_range(self.velocity, 0.0, 1.0, "velocity", lo_open=True)
        if self.bank_position is not None:
            check_range(self.bank_position, 0.0, 1.0, "bank_position")


@dataclass(frozen=True)
class RenderConfig:
    """Offline rendering settings; release tails always render to completion."""

    sample_rate_hz: int = 44100

    def __post_init__(self):
        if self.sample_rate_hz < 8000:
            raise ValueError(f"sample_rate_hz must be >= 8000, got {self.sample_rate_hz}")


class RenderResult(NamedTuple):
    """Rendered samples plus the peak-normalization factor that was applied."""

    samples: np.ndarray
    peak_scale: float


def read_table(table, index: float) -> float:
    """Read a table at a fractional index with linear interpolation.

    The read wraps from the last sample back to index 0; both are zero on a
    padded table, so the wrap is continuous.
    """
    table = as_samples(table, "table", min_len=2)
    length = table.size
    if not 0.0 <= index < length:
        raise ValueError(f"index must be in [0, {length}), got {index!r}")
    i0 = int(index)
    frac = index - i0
    i1 = (i0 + 1) % length
    return float((1.0 - frac) * table[i0] + frac * table[i1])


def _position_to_slot(position, step_count: int):
    """Map position in [0, 1] to (lower table index, blend fraction)."""
    q = position * (step_count - 1)
    j = np.minimum(np.floor(q), step_count - 2).astype(np.int64)
    j = np.maximum(j, 0)
    return j, q - j


def read_bilinear(bank: WavetableBank, index: float, position: float) -> float:
    """Interpolate along both axes: fractional table index and bank position.

    At position 0 or 1 this degenerates to a plain read of the first or last
    table, bit-exactly.
    """
    position = check_range(position, 0.0, 1.0, "position")
    j, f = _position_to_slot(position, bank.step_count)
    j, f = int(j), float(f)
    low = read_table(bank.tables[j], index)
    high = read_table(bank.tables[j + 1], index)
    return (1.0 - f) * low + f * high


def midi_to_hz(note: int) -> float:
    """Equal-temperament pitch with A4 = MIDI 69 = 440 Hz."""
    if int(note) != note or not 0 <= note <= 127:
        raise ValueError(f"midi note must be an integer in [0, 127], got {note!r}")
    return 440.0 * 2.0 ** ((note - 69) / 12.0)


def oscillate(bank: WavetableBank, freq_hz: float, position_curve, config: RenderConfig,
              n_samples: int) -> np.ndarray:
    """Run the phase accumulator over a bank and read it bilinearly.

    The phase advances by ``freq_hz * L / sample_rate`` table indices per
    output sample, modulo the full padded length L, and never leaves [0, L).
    ``position_curve`` holds one bank position per output sample (a scalar is
    broadcast).
    """
    sr = config.sample_rate_hz
    if not 0.0 < freq_hz < sr / 2:
        raise ValueError(f"freq_hz must be in (0, {sr / 2}), got {freq_hz!r}")
    if n_samples < 0:
        raise ValueError(f"n_samples must be >= 0, got {n_samples}")
    position = np.broadcast_to(np.asarray(position_curve, dtype=np.float64), (n_samples,))
    if np.any(position < 0.0) or np.any(position > 1.0):
        raise ValueError("position_curve values must be in [0, 1]")
    length = bank.table_len
    increment = freq_hz * length / sr
    phase = (np.arange(n_samples) * increment) % length
    i0 = phase.astype(np.int64)
    frac = phase - i0
    i1 = (i0 + 1) % length
    j, f = _position_to_slot(position, bank.step_count)
    tables = bank.tables
    low = (1.0 - frac) * tables[j, i0] + frac * tables[j, i1]
    high = (1.0 - frac) * tables[j + 1, i0] + frac * tables[j + 1, i1]
    return (1.0 - f) * low + f * high


def adsr(params: SynthParams, gate_s: float, t):
    """Linear ADSR gain at time ``t`` (scalar or array) for a gate of ``gate_s``.

    Rises 0 to 1 over the attack, falls to the sustain level over the decay,
    holds until the gate closes, then falls to 0 over the release. Zero-length
    segments jump instantly. An early gate releases from whatever level the
    pre-release curve had reached.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    gate_s = check_range(gate_s, 0.0, np.inf, "gate_s")

    def pre_gate(times):
        times = np.asarray(times, dtype=np.float64)
        a, d, s = params.attack_s, params.decay_s, params.sustain_level
        out = np.full(times.shape, s)
        if d > 0:
            in_decay = (times >= a) & (times < a + d)
            out[in_decay] = 1.0 + (times[in_decay] - a) / d * (s - 1.0)
        if a > 0:
            in_attack = times < a
            out[in_attack] = times[in_attack] / a
        return out

    release_level = pre_gate(np.asarray([gate_s]))[0]
    r = params.release_s
    out = pre_gate(t)
    released = t >= gate_s
    if r > 0:
        frac = np.clip((t - gate_s) / r, 0.0, 1.0)
        out = np.where(released, release_level * (1.0 - frac), out)
    else:
        out = np.where(released, 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def lowpass(audio, cutoff_hz: float, sample_rate: float) -> np.ndarray:
    """One-pole low-pass: ``y[k] = y[k-1] + alpha * (x[k] - y[k-1])``.

    ``alpha = 1 - exp(-2 pi cutoff / sample_rate)``; unity gain at DC, state
    starts at zero.
    """
    audio = np.asarray(audio, dtype=np.float64)
    if audio.ndim != 1:
        raise ValueError(f"audio must be one-dimensional, got shape {audio.shape}")
    if not np.all(np.isfinite(audio)):
        raise ValueError("audio contains non-finite values")
    if not 0.0 < cutoff_hz <= sample_rate / 2:
        raise ValueError(
            f"cutoff_hz must be in (0, {sample_rate / 2}], got {cutoff_hz!r}"
        )
    alpha = 1.0 - np.exp(-2.0 * np.pi * cutoff_hz / sample_rate)
    return lfilter([alpha], [1.0, alpha - 1.0], audio)


def render_note(bank: WavetableBank, note: NoteEvent, params: SynthParams,
                config: RenderConfig) -> np.ndarray:
    """Render one note: oscillator x envelope x velocity, then low-pass.

    Output length is ``round((duration + release) * sample_rate)`` so the
    release tail completes; samples stay within [-1, 1].
    """
    sr = config.sample_rate_hz
    n = int(round((note.duration_s + params.release_s) * sr))
    freq = midi_to_hz(note.midi_note)
    position = params.bank_position if note.bank_position is None else note.bank_position
    raw = oscillate(bank, freq, position, config, n)
    times = np.arange(n) / sr
    env = adsr(params, note.duration_s, times)
    shaped = raw * env * note.velocity
    return lowpass(shaped, params.filter_cutoff_hz, sr)


def render_score(bank: WavetableBank, events, params: SynthParams,
                 config: RenderConfig) -> RenderResult:
    """Mix every note at its onset; scale by 1/peak only if the mix clips.

    The applied scale factor is reported in the result so callers can log it.
    """
    events = list(events)
    if not events:
        raise EmptyScore("score contains no events")
    sr = config.sample_rate_hz
    rendered = [(int(round(e.start_s * sr)), render_note(bank, e, params, config)) for e in events]
    total = max(start + note.size for start, note in rendered)
    mix = np.zeros(total)
    for start, note in rendered:
        mix[start : start + note.size] += note
    peak = float(np.max(np.abs(mix))) if total else 0.0
    if peak > 1.0:
        return RenderResult(mix / peak, 1.0 / peak)
    return RenderResult(mix, 1.0)
