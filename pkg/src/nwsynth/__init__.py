"""Wavetable synthesizer with a neural latent space.

A small autoencoder learns a latent space of 512-sample wavetables;
interpolated latents decode into playable tables that are conditioned
(normalize, zero-pad, smooth), pre-rendered into banks, and played by a
phase-accumulator engine with bilinear reads, an ADSR envelope, and a
low-pass filter.
"""

from .audio_io import Score, parse_score, parse_score_text, write_wav
from .autoencoder import (
    AutoencoderModel,
    Gradients,
    Layer,
    TrainingConfig,
    WavetableAutoencoder,
    backprop,
    corpus_split,
    decode,
    encode,
    evaluate_mse,
    finite_difference_gradients,
    gen_corpus,
    gradient_check,
    gradient_check_suite,
    init_model,
    load_model,
    loss_mse,
    save_model,
    train,
    train_on,
    train_step,
)
from .bank import (
    DEFAULT_BANK_STEPS,
    WavetableBank,
    build_bank,
    build_default_banks,
    lerp_latent,
    load_bank,
    save_bank,
)
from .engine import (
    NoteEvent,
    RenderConfig,
    RenderResult,
    SynthParams,
    adsr,
    lowpass,
    midi_to_hz,
    oscillate,
    read_bilinear,
    read_table,
    render_note,
    render_score,
)
from .errors import (
    BadMagic,
    BankFormatError,
    ConstantInput,
    EmptyScore,
    ModelFormatError,
    NoPeak,
    ScoreError,
    TrainingDiverged,
    Truncated,
    VersionMismatch,
)
from .waveforms import (
    CANONICAL_LENGTH,
    DEFAULT_RAMP_LEN,
    PADDED_LENGTH,
    SHAPES,
    WavetableConditioner,
    condition,
    dft_magnitudes,
    estimate_fundamental,
    gen_waveform,
    normalize,
    pad,
    smooth,
    spectral_flatness,
)

__version__ = "0.1.0"
