"""Shared fixtures: a quickly trained model and artifacts derived from it."""

import numpy as np
import pytest

from nwsynth import (
    RenderConfig,
    TrainingConfig,
    WavetableBank,
    build_bank,
    condition,
    gen_waveform,
    normalize,
    train,
)

QUICK_CONFIG = TrainingConfig(
    epochs=60,
    batch_size=16,
    learning_rate=1.0,
    seed=1,
    latent_dim=8,
    hidden_dims=(64, 32),
    phases_per_shape=8,
)


@pytest.fixture(scope="session")
def quick_model():
    """Small model trained in seconds; adequate for format and wiring tests."""
    model, _ = train(QUICK_CONFIG)
    return model


@pytest.fixture(scope="session")
def quick_bank(quick_model):
    wf_a = normalize(gen_waveform("sine", 512, 0.0))
    wf_b = normalize(gen_waveform("saw", 512, 0.0))
    return build_bank(quick_model, wf_a, wf_b, steps=7, ramp_len=8, labels=("sine", "saw"))


@pytest.fixture(scope="session")
def sine_bank():
    """Bank whose every table is the conditioned phase-0 sine."""
    table = condition(gen_waveform("sine", 512, 0.0), 8)
    return WavetableBank(np.stack([table, table]), labels=("sine", "sine"), ramp_len=8)


@pytest.fixture(scope="session")
def render_config():
    return RenderConfig()
