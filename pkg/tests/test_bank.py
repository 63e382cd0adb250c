"""Latent interpolation, bank building, and the bank container format."""

import io

import numpy as np
import pytest

from nwsynth import (
    BadMagic,
    BankFormatError,
    Truncated,
    VersionMismatch,
    WavetableBank,
    build_bank,
    build_default_banks,
    condition,
    decode,
    encode,
    gen_waveform,
    lerp_latent,
    load_bank,
    normalize,
    save_bank,
)
from nwsynth.bank import BANK_MAGIC


def random_bank(rng, step_count=None, table_len=None):
    """Bank with float32-representable samples (the file format's domain)."""
    steps = step_count or int(rng.integers(2, 8))
    length = table_len or int(rng.integers(6, 40))
    tables = rng.uniform(-1, 1, (steps, length)).astype(np.float32).astype(np.float64)
    tables[:, 0] = 0.0
    tables[:, -1] = 0.0
    return WavetableBank(tables, labels=("a", "b"), ramp_len=1, model_seed=int(rng.integers(100)))


class TestLerpLatent:
    def test_endpoints_bit_exact(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=16), rng.normal(size=16)
        assert np.array_equal(lerp_latent(a, b, 0.0), a)
        assert np.array_equal(lerp_latent(a, b, 1.0), b)

    def test_midpoint(self):
        assert lerp_latent([0.0, 2.0], [2.0, 0.0], 0.5).tolist() == [1.0, 1.0]

    def test_affine_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            a, b = rng.normal(size=8), rng.normal(size=8)
            t = rng.uniform()
            total = lerp_latent(a, b, t) + lerp_latent(b, a, t)
            assert np.allclose(total, a + b, atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            lerp_latent([1.0, 2.0], [1.0], 0.5)

    def test_t_out_of_range(self):
        with pytest.raises(ValueError, match="t"):
            lerp_latent([1.0], [2.0], 1.5)


class TestBuildBank:
    def test_two_steps_are_conditioned_endpoint_decodes(self, quick_model):
        wf_a = normalize(gen_waveform("sine", 512, 0.0))
        wf_b = normalize(gen_waveform("square", 512, 0.0))
        bank = build_bank(quick_model, wf_a, wf_b, steps=2, ramp_len=8)
        z_a, z_b = encode(quick_model, wf_a), encode(quick_model, wf_b)
        assert np.array_equal(bank.tables[0], condition(decode(quick_model, z_a), 8))
        assert np.array_equal(bank.tables[1], condition(decode(quick_model, z_b), 8))

    def test_endpoint_consistency(self, quick_bank, quick_model):
        wf_a = normalize(gen_waveform("sine", 512, 0.0))
        wf_b = normalize(gen_waveform("saw", 512, 0.0))
        first = condition(decode(quick_model, encode(quick_model, wf_a)), 8)
        last = condition(decode(quick_model, encode(quick_model, wf_b)), 8)
        assert np.array_equal(quick_bank.tables[0], first)
        assert np.array_equal(quick_bank.tables[-1], last)

    def test_tables_satisfy_invariants(self, quick_bank):
        assert quick_bank.table_len == 514
        assert np.all(np.isfinite(quick_bank.tables))
        assert np.all(quick_bank.tables[:, 0] == 0.0)
        assert np.all(quick_bank.tables[:, -1] == 0.0)

    def test_steps_below_two_rejected(self, quick_model):
        w = normalize(gen_waveform("sine", 512, 0.0))
        with pytest.raises(ValueError, match="steps"):
            build_bank(quick_model, w, w, steps=1)

    def test_deterministic(self, quick_model):
        wf_a = normalize(gen_waveform("triangle", 512, 0.0))
        wf_b = normalize(gen_waveform("saw", 512, 0.0))
        b1 = build_bank(quick_model, wf_a, wf_b, steps=5)
        b2 = build_bank(quick_model, wf_a, wf_b, steps=5)
        assert np.array_equal(b1.tables, b2.tables)


class TestDefaultBanks:
    def test_three_banks_of_hundred(self, quick_model):
        banks = build_default_banks(quick_model)
        assert len(banks) == 3
        assert sum(b.step_count for b in banks) == 300
        assert all(b.table_len == 514 for b in banks)

    def test_labels_match_pairs(self, quick_model):
        banks = build_default_banks(quick_model)
        assert [b.labels for b in banks] == [
            ("sine", "saw"), ("saw", "triangle"), ("triangle", "sine")
        ]


class TestBankFormat:
    def test_round_trip_bit_exact(self, quick_bank, tmp_path):
        path = tmp_path / "bank.nwtb"
        save_bank(quick_bank, path)
        loaded = load_bank(path)
        # In-memory tables are float64; the file stores float32.
        assert np.array_equal(loaded.tables, quick_bank.tables.astype(np.float32).astype(np.float64))
        assert loaded.labels == quick_bank.labels
        assert loaded.ramp_len == quick_bank.ramp_len
        assert loaded.model_seed == quick_bank.model_seed
        # Byte-level round trip is exact.
        buf = io.BytesIO()
        save_bank(loaded, buf)
        assert buf.getvalue() == path.read_bytes()

    def test_hundred_random_banks_round_trip(self, tmp_path):
        rng = np.random.default_rng(7)
        for i in range(100):
            bank = random_bank(rng)
            buf = io.BytesIO()
            save_bank(bank, buf)
            loaded = load_bank(io.BytesIO(buf.getvalue()))
            assert np.array_equal(loaded.tables, bank.tables)
            assert loaded.labels == bank.labels
            assert loaded.ramp_len == bank.ramp_len
            assert loaded.model_seed == bank.model_seed

    def test_header_fields(self, quick_bank):
        buf = io.BytesIO()
        save_bank(quick_bank, buf)
        raw = buf.getvalue()
        assert raw[:4] == BANK_MAGIC
        assert int.from_bytes(raw[4:8], "little") == 1
        assert int.from_bytes(raw[8:12], "little") == quick_bank.step_count
        assert int.from_bytes(raw[12:16], "little") == 514

    def test_bad_magic(self):
        with pytest.raises(BadMagic):
            load_bank(io.BytesIO(b"NOPE" + b"\x00" * 64))

    def test_version_mismatch(self, quick_bank):
        buf = io.BytesIO()
        save_bank(quick_bank, buf)
        raw = bytearray(buf.getvalue())
        raw[4:8] = (2).to_bytes(4, "little")
        with pytest.raises(VersionMismatch):
            load_bank(io.BytesIO(bytes(raw)))

    def test_truncated_payload(self, quick_bank):
        buf = io.BytesIO()
        save_bank(quick_bank, buf)
        raw = buf.getvalue()
        with pytest.raises(Truncated):
            load_bank(io.BytesIO(raw[:-10]))

    def test_declared_count_exceeding_payload(self, quick_bank):
        buf = io.BytesIO()
        save_bank(quick_bank, buf)
        raw = bytearray(buf.getvalue())
        raw[8:12] = (quick_bank.step_count + 5).to_bytes(4, "little")
        with pytest.raises(Truncated):
            load_bank(io.BytesIO(bytes(raw)))

    def test_trailing_bytes_rejected(self, quick_bank):
        buf = io.BytesIO()
        save_bank(quick_bank, buf)
        with pytest.raises(BankFormatError, match="trailing"):
            load_bank(io.BytesIO(buf.getvalue() + b"\x00\x00"))

    def test_malformed_metadata(self, quick_bank):
        buf = io.BytesIO()
        save_bank(quick_bank, buf)
        raw = bytearray(buf.getvalue())
        meta_len = int.from_bytes(raw[16:20], "little")
        raw[20 : 20 + meta_len] = b"x" * meta_len
        with pytest.raises(BankFormatError, match="metadata"):
            load_bank(io.BytesIO(bytes(raw)))


class TestBankInvariants:
    def test_minimum_step_count(self):
        with pytest.raises(ValueError, match="at least 2"):
            WavetableBank(np.zeros((1, 6)), labels=("a", "b"), ramp_len=1)

    def test_nonzero_endpoints_rejected(self):
        tables = np.zeros((2, 6))
        tables[0, 0] = 0.1
        with pytest.raises(ValueError, match="exactly 0"):
            WavetableBank(tables, labels=("a", "b"), ramp_len=1)

    def test_tables_frozen(self, quick_bank):
        with pytest.raises(ValueError):
            quick_bank.tables[0, 1] = 5.0
