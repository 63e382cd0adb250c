"""Oscillator, bilinear reads, envelope, filter, and rendering."""

import numpy as np
import pytest

from nwsynth import (
    EmptyScore,
    NoteEvent,
    RenderConfig,
    SynthParams,
    WavetableBank,
    adsr,
    condition,
    estimate_fundamental,
    gen_waveform,
    lowpass,
    midi_to_hz,
    oscillate,
    read_bilinear,
    read_table,
    render_note,
    render_score,
)


def constant_bank(values, table_len=8):
    """One constant-valued table per entry, with forced zero endpoints."""
    tables = np.stack([np.full(table_len, v) for v in values])
    tables[:, 0] = 0.0
    tables[:, -1] = 0.0
    return WavetableBank(tables, labels=("lo", "hi"), ramp_len=1)


class TestReadTable:
    def test_integer_index_identity(self):
        table = np.asarray([0.0, 0.25, -0.5, 0.75, 0.0])
        for k, v in enumerate(table):
            assert read_table(table, float(k)) == v

    def test_midpoint(self):
        assert read_table([0.0, 1.0, 0.0, 0.0], 0.5) == 0.5

    def test_wrap_at_end_is_zero(self, sine_bank):
        table = sine_bank.tables[0]
        length = table.size
        assert read_table(table, length - 0.5) == 0.0

    def test_out_of_range(self):
        with pytest.raises(ValueError, match="index"):
            read_table([0.0, 1.0, 0.0], 3.0)
        with pytest.raises(ValueError, match="index"):
            read_table([0.0, 1.0, 0.0], -0.1)


class TestReadBilinear:
    def test_position_zero_is_first_table(self, quick_bank):
        for idx in (0.0, 1.5, 513.25):
            assert read_bilinear(quick_bank, idx, 0.0) == read_table(quick_bank.tables[0], idx)

    def test_position_one_is_last_table(self, quick_bank):
        for idx in (0.0, 2.75, 500.5):
            assert read_bilinear(quick_bank, idx, 1.0) == read_table(quick_bank.tables[-1], idx)

    def test_constant_tables_blend(self):
        bank = constant_bank([0.2, 0.6])
        assert read_bilinear(bank, 3.0, 0.5) == pytest.approx(0.4, abs=1e-12)

    def test_three_point_collinearity(self, quick_bank):
        # Affine in position between adjacent tables.
        rng = np.random.default_rng(0)
        steps = quick_bank.step_count
        for _ in range(50):
            j = int(rng.integers(0, steps - 1))
            p0 = j / (steps - 1)
            p1 = (j + 1) / (steps - 1)
            pm = (p0 + p1) / 2
            idx = float(rng.uniform(0, quick_bank.table_len - 1))
            lo = read_bilinear(quick_bank, idx, p0)
            hi = read_bilinear(quick_bank, idx, p1)
            mid = read_bilinear(quick_bank, idx, pm)
            assert abs(mid - (lo + hi) / 2) < 1e-12

    def test_position_out_of_range(self, quick_bank):
        with pytest.raises(ValueError, match="position"):
            read_bilinear(quick_bank, 0.0, 1.5)


class TestMidiToHz:
    def test_reference_pitch(self):
        assert midi_to_hz(69) == 440.0

    def test_octave(self):
        assert midi_to_hz(81) == 880.0

    def test_middle_c(self):
        assert midi_to_hz(60) == pytest.approx(261.6256, abs=1e-4)

    @pytest.mark.parametrize("bad", [-1, 128, 60.5])
    def test_out_of_range(self, bad):
        with pytest.raises(ValueError):
            midi_to_hz(bad)


class TestOscillate:
    def test_phase_increment_formula(self, sine_bank, render_config):
        # Increment per sample is freq * L / sample_rate, phase wraps mod L.
        out = oscillate(sine_bank, 440.0, 0.0, render_config, 32)
        length = sine_bank.table_len
        increment = 440.0 * length / 44100
        assert increment == pytest.approx(5.128344671201814, abs=1e-12)
        for k in range(32):
            phase = (k * increment) % length
            assert out[k] == read_bilinear(sine_bank, phase, 0.0)

    def test_sine_bank_pitch(self, sine_bank, render_config):
        audio = oscillate(sine_bank, 440.0, 0.0, render_config, 44100)
        assert estimate_fundamental(audio, 44100) == pytest.approx(440.0, abs=1.0)

    def test_duplicated_table_degenerates(self, sine_bank, render_config):
        at_zero = oscillate(sine_bank, 220.0, 0.0, render_config, 1024)
        at_half = oscillate(sine_bank, 220.0, 0.5, render_config, 1024)
        assert np.array_equal(at_zero, at_half)

    def test_wraparound_is_continuous(self, sine_bank, render_config):
        audio = oscillate(sine_bank, 440.0, 0.0, render_config, 44100)
        increment = 440.0 * sine_bank.table_len / 44100
        max_gap = np.max(np.abs(np.diff(sine_bank.tables[0])))
        assert np.max(np.abs(np.diff(audio))) <= max_gap * (increment + 1.0)

    def test_position_curve_per_sample(self, render_config):
        bank = constant_bank([0.0, 0.8], table_len=16)
        curve = np.linspace(0.0, 1.0, 100)
        out = oscillate(bank, 1000.0, curve, render_config, 100)
        # Interior indices of a constant table scale linearly with position.
        assert out[0] == 0.0 or abs(out[0]) < 1e-12

    def test_frequency_out_of_range(self, sine_bank, render_config):
        with pytest.raises(ValueError, match="freq_hz"):
            oscillate(sine_bank, 0.0, 0.0, render_config, 10)
        with pytest.raises(ValueError, match="freq_hz"):
            oscillate(sine_bank, 44100.0, 0.0, render_config, 10)


class TestAdsr:
    PARAMS = SynthParams(attack_s=0.1, decay_s=0.1, sustain_level=0.5, release_s=0.2)

    def test_zero_at_start(self):
        assert adsr(self.PARAMS, 1.0, 0.0) == 0.0

    def test_one_at_attack_end(self):
        assert adsr(self.PARAMS, 1.0, 0.1) == 1.0

    def test_decay_midpoint(self):
        assert adsr(self.PARAMS, 1.0, 0.15) == pytest.approx(0.75, abs=1e-12)

    def test_sustain_hold(self):
        assert adsr(self.PARAMS, 1.0, 0.6) == 0.5

    def test_release_then_silence(self):
        assert adsr(self.PARAMS, 1.0, 1.1) == pytest.approx(0.25, abs=1e-12)
        assert adsr(self.PARAMS, 1.0, 1.3) == 0.0
        assert adsr(self.PARAMS, 1.0, 5.0) == 0.0

    def test_zero_length_segments_jump(self):
        instant = SynthParams(attack_s=0.0, decay_s=0.0, sustain_level=0.7, release_s=0.0)
        assert adsr(instant, 1.0, 0.0) == 0.7
        assert adsr(instant, 1.0, 1.0) == 0.0

    def test_early_gate_releases_from_current_level(self):
        # Gate closes mid-attack at level 0.5; release decays from there.
        assert adsr(self.PARAMS, 0.05, 0.05) == pytest.approx(0.5, abs=1e-12)
        assert adsr(self.PARAMS, 0.05, 0.15) == pytest.approx(0.25, abs=1e-12)

    def test_vectorized_matches_scalar(self):
        times = np.linspace(0.0, 1.5, 64)
        vec = adsr(self.PARAMS, 1.0, times)
        scalars = np.asarray([adsr(self.PARAMS, 1.0, float(t)) for t in times])
        assert np.array_equal(vec, scalars)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError, match="t"):
            adsr(self.PARAMS, 1.0, -0.1)


class TestLowpass:
    def test_dc_convergence(self):
        cutoff, sr = 100.0, 44100
        n = int(5 * sr / (2 * np.pi * cutoff)) + 1000
        out = lowpass(np.full(n, 0.6), cutoff, sr)
        assert abs(out[-1] - 0.6) < 1e-6

    def test_alpha_formula(self):
        # At cutoff = sr/2 the recursion uses alpha = 1 - exp(-pi).
        sr = 44100
        x = np.zeros(8)
        x[0] = 1.0
        out = lowpass(x, sr / 2, sr)
        alpha = 1.0 - np.exp(-np.pi)
        assert alpha == pytest.approx(0.9567860817362276, abs=1e-12)
        assert out[0] == pytest.approx(alpha, abs=1e-12)
        assert out[1] == pytest.approx(alpha * (1 - alpha), abs=1e-12)

    def test_matches_stated_recursion(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(-1, 1, 256)
        cutoff, sr = 2000.0, 44100
        out = lowpass(x, cutoff, sr)
        alpha = 1.0 - np.exp(-2.0 * np.pi * cutoff / sr)
        y = 0.0
        for k in range(x.size):
            y = y + alpha * (x[k] - y)
            assert out[k] == pytest.approx(y, abs=1e-12)

    def test_step_response_monotone(self):
        out = lowpass(np.ones(512), 500.0, 44100)
        assert np.all(np.diff(out) >= -1e-15)

    def test_cutoff_out_of_range(self):
        with pytest.raises(ValueError, match="cutoff"):
            lowpass(np.ones(4), 0.0, 44100)
        with pytest.raises(ValueError, match="cutoff"):
            lowpass(np.ones(4), 30000.0, 44100)


class TestRenderNote:
    def test_length_formula(self, sine_bank, render_config):
        note = NoteEvent(midi_note=69, start_s=0.0, duration_s=1.0)
        params = SynthParams(release_s=0.2)
        audio = render_note(sine_bank, note, params, render_config)
        assert audio.size == 52920

    def test_velocity_scales_linearly(self, sine_bank, render_config):
        params = SynthParams()
        loud = render_note(sine_bank, NoteEvent(60, 0.0, 0.25, velocity=1.0), params, render_config)
        soft = render_note(sine_bank, NoteEvent(60, 0.0, 0.25, velocity=0.5), params, render_config)
        assert np.allclose(soft, 0.5 * loud, atol=1e-9)

    def test_tail_reaches_silence(self, sine_bank, render_config):
        audio = render_note(sine_bank, NoteEvent(69, 0.0, 0.3), SynthParams(), render_config)
        assert abs(audio[-1]) < 1e-3

    def test_bounded_output(self, quick_bank, render_config):
        audio = render_note(
            quick_bank, NoteEvent(50, 0.0, 0.2, bank_position=0.7), SynthParams(), render_config
        )
        assert np.all(np.abs(audio) <= 1.0)
        assert np.all(np.isfinite(audio))


class TestRenderScore:
    def test_single_event_matches_render_note(self, sine_bank, render_config):
        params = SynthParams()
        event = NoteEvent(69, start_s=0.5, duration_s=0.25)
        result = render_score(sine_bank, [event], params, render_config)
        note = render_note(sine_bank, event, params, render_config)
        offset = int(round(0.5 * 44100))
        assert result.peak_scale == 1.0
        assert np.array_equal(result.samples[offset : offset + note.size], note)
        assert np.all(result.samples[:offset] == 0.0)

    def test_simultaneous_events_normalized(self, sine_bank, render_config):
        params = SynthParams(sustain_level=1.0, attack_s=0.01, decay_s=0.0)
        events = [NoteEvent(69, 0.0, 0.5), NoteEvent(69, 0.0, 0.5)]
        single = render_note(sine_bank, events[0], params, render_config)
        result = render_score(sine_bank, events, params, render_config)
        raw_peak = float(np.max(np.abs(2.0 * single)))
        assert raw_peak > 1.0
        assert result.peak_scale == pytest.approx(1.0 / raw_peak, abs=1e-12)
        assert np.max(np.abs(result.samples)) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint_events_leave_gaps_silent(self, sine_bank, render_config):
        params = SynthParams(release_s=0.1)
        events = [NoteEvent(60, 0.0, 0.1), NoteEvent(72, 1.0, 0.1)]
        result = render_score(sine_bank, events, params, render_config)
        gap = result.samples[int(0.3 * 44100) : int(0.9 * 44100)]
        assert np.all(gap == 0.0)

    def test_empty_score_rejected(self, sine_bank, render_config):
        with pytest.raises(EmptyScore):
            render_score(sine_bank, [], SynthParams(), render_config)


class TestPolarityInvariance:
    def test_negated_bank_same_pitch(self, sine_bank, render_config):
        flipped = WavetableBank(
            -sine_bank.tables, labels=sine_bank.labels, ramp_len=sine_bank.ramp_len
        )
        a = oscillate(sine_bank, 440.0, 0.0, render_config, 44100)
        b = oscillate(flipped, 440.0, 0.0, render_config, 44100)
        assert np.array_equal(b, -a)
        assert estimate_fundamental(a, 44100) == estimate_fundamental(b, 44100)


class TestParamValidation:
    def test_synth_params_ranges(self):
        with pytest.raises(ValueError, match="sustain_level"):
            SynthParams(sustain_level=1.5)
        with pytest.raises(ValueError, match="attack_s"):
            SynthParams(attack_s=-0.1)
        with pytest.raises(ValueError, match="filter_cutoff_hz"):
            SynthParams(filter_cutoff_hz=0.0)

    def test_note_event_ranges(self):
        with pytest.raises(ValueError, match="midi_note"):
            NoteEvent(midi_note=200, duration_s=1.0)
        with pytest.raises(ValueError, match="duration_s"):
            NoteEvent(midi_note=60, duration_s=0.0)
        with pytest.raises(ValueError, match="velocity"):
            NoteEvent(midi_note=60, duration_s=1.0, velocity=0.0)

    def test_render_config_rate(self):
        with pytest.raises(ValueError, match="sample_rate_hz"):
            RenderConfig(sample_rate_hz=4000)
