"""Waveform generation, signal conditioning, and spectral analysis.

Amplitudes are dimensionless floats, nominally in [-1, 1]. The canonical
single-cycle length is 512 samples; conditioning appends one zero sample at
each end, so a playable table is 514 samples long. Everything here is a pure
function computed in 64-bit arithmetic.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ConstantInput, NoPeak
from .validation import as_matrix, as_samples

SHAPES = ("sine", "triangle", "saw", "square")
CANONICAL_LENGTH = 512
PADDED_LENGTH = CANONICAL_LENGTH + 2
DEFAULT_RAMP_LEN = 8

# A waveform counts as constant when no sample strays further than this from
# its mean; normalizing such input would amplify numerical noise.
CONSTANT_EPS = 1e-12


def gen_waveform(shape: str, length: int, phase_offset: float = 0.0) -> np.ndarray:
    """Sample one full period of a named shape.

    The cycle starts at ``phase_offset`` (in cycles, [0, 1)) and spans
    ``length`` samples, so it is exactly periodic in ``length``. Shapes are
    naive rather than band-limited; aliasing from the sharp edges is handled
    downstream by the smoothing step and the playback filter.
    """
    if shape not in SHAPES:
        raise ValueError(f"unknown shape {shape!r}; expected one of {', '.join(SHAPES)}")
    if int(length) != length or length < 4:
        raise ValueError(f"length must be an integer >= 4, got {length!r}")
    if not 0.0 <= phase_offset < 1.0:
        raise ValueError(f"phase_offset must be in [0, 1) cycles, got {phase_offset!r}")
    frac = (np.arange(int(length)) / length + phase_offset) % 1.0
    if shape == "sine":
        return np.sin(2.0 * np.pi * frac)
    if shape == "triangle":
        # Starts at 0, peaks at +1 a quarter cycle in, mirroring the sine phase.
        return 1.0 - 4.0 * np.abs((frac + 0.25) % 1.0 - 0.5)
    if shape == "saw":
        return 2.0 * frac - 1.0
    return np.where(frac < 0.5, 1.0, -1.0)


def normalize(w) -> np.ndarray:
    """Remove the mean and scale so the largest absolute sample is 1."""
    w = as_samples(w, "waveform")
    centered = w - w.mean()
    peak = np.max(np.abs(centered))
    if peak <= CONSTANT_EPS:
        raise ConstantInput(
            f"waveform is constant within {CONSTANT_EPS:g} after mean removal"
        )
    return centered / peak


def pad(w) -> np.ndarray:
    """Zero-pad one sample on either side so loops start and end on zero."""
    w = as_samples(w, "waveform")
    out = np.zeros(w.size + 2)
    out[1:-1] = w
    return out


def smooth(t, ramp_len: int) -> np.ndarray:
    """Replace the first and last ``ramp_len`` samples with linear ramps to zero.

    The ramps run from the zero endpoints up to the first/last unmodified
    sample (``t[ramp_len]`` and ``t[len-1-ramp_len]``), taming the
    discontinuity a zero pad can introduce next to large table values. The
    audible effect resembles a gentle high-cut filter.
    """
    t = as_samples(t, "table", min_len=4)
    n = t.size
    ramp_len = int(ramp_len)
    # The two ramps must not overlap; canonical callers stay within n/4.
    if not 1 <= ramp_len <= (n - 2) // 2:
        raise ValueError(
            f"ramp_len must be in [1, {(n - 2) // 2}] for a table of {n} samples, got {ramp_len}"
        )
    out = t.copy()
    ramp = np.arange(ramp_len + 1) / ramp_len
    out[: ramp_len + 1] = t[ramp_len] * ramp
    out[n - 1 - ramp_len :] = t[n - 1 - ramp_len] * ramp[::-1]
    # Anchor multiplications can yield -0.0; keep the endpoints exactly 0.
    out[0] = 0.0
    out[n - 1] = 0.0
    return out


def condition(w, ramp_len: int = DEFAULT_RAMP_LEN) -> np.ndarray:
    """Full conditioning pipeline: normalize, then pad, then smooth."""
    return smooth(pad(normalize(w)), ramp_len)


def dft_magnitudes(x) -> np.ndarray:
    """Magnitude of the DFT at bins 0..floor(len/2)."""
    x = as_samples(x, "samples", min_len=2)
    return np.abs(np.fft.rfft(x))


def estimate_fundamental(audio, sample_rate: float) -> float:
    """Frequency of the strongest non-DC DFT bin, refined parabolically.

    The refinement fits a parabola through the peak bin and its two
    neighbours, which recovers sub-bin precision for tones that do not land
    exactly on a bin. Needs at least 50 ms of audio.
    """
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate!r}")
    audio = as_samples(audio, "audio", min_len=2)
    if audio.size < sample_rate / 20:
        raise ValueError(
            f"audio too short for pitch estimation: {audio.size} samples "
            f"< {sample_rate / 20:.0f} (50 ms at {sample_rate:g} Hz)"
        )
    mags = dft_magnitudes(audio)
    if np.max(mags[1:]) < 1e-12:
        raise NoPeak("all non-DC spectral bins are below 1e-12")
    k = int(np.argmax(mags[1:])) + 1
    delta = 0.0
    if k + 1 < mags.size:
        left, mid, right = mags[k - 1], mags[k], mags[k + 1]
        denom = left - 2.0 * mid + right
        if denom != 0.0:
            delta = float(np.clip(0.5 * (left - right) / denom, -0.5, 0.5))
    return (k + delta) * sample_rate / audio.size


def spectral_flatness(x) -> float:
    """Geometric over arithmetic mean of the non-DC magnitude spectrum.

    Near 1 for noise, near 0 for a pure tone.
    """
    mags = dft_magnitudes(x)[1:]
    eps = 1e-12
    geo = np.exp(np.mean(np.log(mags + eps)))
    return float(geo / (np.mean(mags) + eps))


def band_energy(mags, lo_frac: float, hi_frac: float) -> float:
    """Sum of squared magnitudes over a fractional band of the bin range."""
    mags = as_samples(mags, "magnitudes")
    lo = int(np.floor(lo_frac * mags.size))
    hi = int(np.ceil(hi_frac * mags.size))
    return float(np.sum(mags[lo:hi] ** 2))


class WavetableConditioner(TransformerMixin, BaseEstimator):
    """Stateless transformer applying the conditioning pipeline row-wise.

    Maps an (n, 512) array of waveforms to an (n, 514) array of playable
    tables, so the pipeline can sit inside standard estimator compositions.
    """

    def __init__(self, ramp_len: int = DEFAULT_RAMP_LEN):
        self.ramp_len = ramp_len

    def fit(self, X=None, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        X = as_matrix(X, "X")
        return np.stack([condition(row, self.ramp_len) for row in X])
