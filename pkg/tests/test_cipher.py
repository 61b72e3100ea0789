import numpy as np
import pytest

from app.cipher import (
    RoundSchedule,
    StreamCipher,
    build_schedule,
    decrypt_image,
    decrypt_stream,
    derive_iv,
    encrypt_image,
    encrypt_stream,
    spn_decrypt_byte,
    spn_encrypt_byte,
    stream_units,
)
from app.chaos import PerturbedOrbit
from app.errors import ConfigError, DomainError, HeaderMismatchError, TruncatedDataError
from app.metrics import npcr
from app.models import CipherText, ImageBuffer
from app.propagation import PropagationBench
from app.schemas import CipherConfig, FixedPointValue, LfsrConfig, Mode, SecretKey, Variant
from app.security import derive_parameters, parse_key, seeded_lfsr

CHAINING = [Mode.CBC, Mode.OFB, Mode.CFB, Mode.CTR]
FLIPS = [(1, 1, 1), (20, 17, 2), (40, 9, 3)]


def _neutral_schedule(units=4):
    return RoundSchedule(
        rounds=4,
        subkeys=np.zeros(units, dtype=np.int64),
        tables=np.tile(np.arange(8), (units, 1)),
    )


def _reference_byte(b, i, schedule):
    """Rounds walked one at a time, starting from the unit's own slot in its run."""
    r = schedule.rounds
    base = (i // r) * r
    for j in range(r):
        idx = base + (i - base + j) % r
        k = int(schedule.subkeys[idx])
        b = b ^ k if j % 2 == 0 else (b + k) % 256
        b = sum(((b >> bit) & 1) << int(schedule.tables[idx][bit]) for bit in range(8))
    return b


class TestRoundPrimitive:
    def test_neutral_schedule_is_identity(self):
        sched = _neutral_schedule()
        assert all(spn_encrypt_byte(b, sched, 0) == b for b in range(256))

    @pytest.mark.parametrize("variant", [Variant.A, Variant.B])
    def test_inverse_for_every_byte(self, params, variant):
        sched = build_schedule(params, CipherConfig(variant=variant), 16)
        for i in (0, 3, 9, 15):
            assert all(spn_decrypt_byte(spn_encrypt_byte(b, sched, i), sched, i) == b for b in range(256))

    def test_primitive_is_a_bijection(self, params):
        sched = build_schedule(params, CipherConfig(), 8)
        assert sorted(spn_encrypt_byte(b, sched, 5) for b in range(256)) == list(range(256))

    @pytest.mark.parametrize("i", [0, 1, 2, 3, 6])
    def test_rounds_rotate_with_block_index(self, params, i):
        sched = build_schedule(params, CipherConfig(variant=Variant.B), 8)
        assert all(spn_encrypt_byte(b, sched, i) == _reference_byte(b, i, sched) for b in range(0, 256, 3))

    def test_rejects_non_byte_and_index(self):
        sched = _neutral_schedule()
        with pytest.raises(DomainError):
            spn_encrypt_byte(256, sched, 0)
        with pytest.raises(DomainError):
            spn_decrypt_byte(0, sched, 4)

    def test_partial_runs_rejected(self):
        with pytest.raises(ValueError):
            RoundSchedule(rounds=4, subkeys=np.zeros(6), tables=np.zeros((6, 8)))


class TestSchedule:
    def test_whole_runs(self, params):
        assert build_schedule(params, CipherConfig(), 5).units == 8
        assert build_schedule(params, CipherConfig(rounds=8), 5).units == 8

    def test_prefix_stable(self, params):
        cfg = CipherConfig(variant=Variant.C)
        short, long = build_schedule(params, cfg, 4), build_schedule(params, cfg, 12)
        assert np.array_equal(short.subkeys, long.subkeys[:4])
        assert np.array_equal(short.tables, long.tables[:4])

    def test_tables_are_permutations(self, params):
        for variant in (Variant.A, Variant.B):
            sched = build_schedule(params, CipherConfig(variant=variant), 64)
            assert np.array_equal(np.sort(sched.tables, axis=1), np.tile(np.arange(8), (64, 1)))

    def test_stream_units(self):
        assert stream_units(10, Mode.OFB) == 10
        assert stream_units(10, Mode.CFB, 3) == 27
        assert stream_units(10, Mode.CFB, 8) == 10

    def test_schedule_grows_on_demand(self, params):
        engine = StreamCipher(params, CipherConfig())
        assert engine.schedule(4).units == 4
        assert engine.schedule(9).units == 12
        assert engine.schedule(2).units == 12


class TestStreamModes:
    @pytest.mark.parametrize("mode", CHAINING + [Mode.ECB])
    def test_round_trip(self, params, rng, mode):
        data = rng.integers(0, 256, size=301, dtype=np.uint8)
        cfg = CipherConfig()
        ct = encrypt_stream(data, params, cfg, mode=mode)
        assert not np.array_equal(ct, data)
        assert np.array_equal(decrypt_stream(ct, params, cfg, mode=mode), data)

    @pytest.mark.parametrize("segment", range(1, 9))
    def test_cfb_segments(self, params, rng, segment):
        data = rng.integers(0, 256, size=37, dtype=np.uint8)
        cfg = CipherConfig(mode=Mode.CFB, cfb_segment_bits=segment)
        assert np.array_equal(decrypt_stream(encrypt_stream(data, params, cfg), params, cfg), data)

    @pytest.mark.parametrize("mode", [Mode.OFB, Mode.CTR])
    def test_keystream_modes_xor_a_fixed_stream(self, params, rng, mode):
        cfg = CipherConfig(mode=mode)
        data = rng.integers(0, 256, size=200, dtype=np.uint8)
        keystream = encrypt_stream(np.zeros(200, dtype=np.uint8), params, cfg)
        assert np.array_equal(encrypt_stream(data, params, cfg), data ^ keystream)

    def test_cbc_first_block(self, params):
        cfg = CipherConfig(mode=Mode.CBC)
        engine = StreamCipher(params, cfg)
        ct = engine.encrypt(np.array([0x42, 0x17], dtype=np.uint8))
        sched = engine.schedule(2)
        assert ct[0] == spn_encrypt_byte(0x42 ^ engine.iv, sched, 0)
        assert ct[1] == spn_encrypt_byte(0x17 ^ int(ct[0]), sched, 1)

    def test_empty_stream(self, params):
        assert encrypt_stream(np.zeros(0, dtype=np.uint8), params, CipherConfig()).size == 0

    def test_iv(self, params):
        iv = derive_iv(params)
        assert 0 <= iv <= 255
        assert derive_iv(params) == iv
        assert StreamCipher(params, CipherConfig()).iv == iv
        assert StreamCipher(params, CipherConfig(iv=7)).iv == 7

    def test_iv_comes_from_a_separate_run(self, params):
        lfsr = seeded_lfsr(LfsrConfig(), params)
        iv_run = PerturbedOrbit(params.alpha, FixedPointValue(raw=params.x0.raw ^ 1), lfsr).generate(17)
        subkey_run = PerturbedOrbit(params.alpha, params.x0, lfsr).generate(17)
        assert derive_iv(params) == int(iv_run[16]) >> 24
        assert not np.array_equal(iv_run, subkey_run)


class TestImageCipher:
    @pytest.mark.parametrize("variant", list(Variant))
    @pytest.mark.parametrize("mode", CHAINING)
    def test_round_trip(self, key, small_image, variant, mode):
        cfg = CipherConfig(variant=variant, mode=mode)
        ct = encrypt_image(small_image, key, cfg)
        assert ct.header.variant == variant
        assert len(ct.body) == 64 * 64 * 3
        assert decrypt_image(ct, key, cfg) == small_image

    @pytest.mark.parametrize("variant", [Variant.A, Variant.D])
    def test_non_square_is_padded_and_cropped(self, key, small_image, variant):
        img = ImageBuffer(data=small_image.data[:, :40, :].copy())
        cfg = CipherConfig(variant=variant, mode=Mode.CBC)
        ct = encrypt_image(img, key, cfg)
        assert (ct.header.width, ct.header.height) == (64, 64)
        assert (ct.header.orig_width, ct.header.orig_height) == (64, 40)
        assert decrypt_image(ct, key, cfg) == img

    def test_grayscale(self, key, small_image):
        img = ImageBuffer(data=small_image.data[:1].copy())
        cfg = CipherConfig(variant=Variant.B, mode=Mode.CFB, cfb_segment_bits=3)
        assert decrypt_image(encrypt_image(img, key, cfg), key, cfg) == img

    def test_more_rounds(self, key, small_image):
        cfg = CipherConfig(rounds=8, mode=Mode.CTR)
        assert decrypt_image(encrypt_image(small_image, key, cfg), key, cfg) == small_image

    def test_deterministic(self, key, small_image):
        cfg = CipherConfig(mode=Mode.CBC)
        assert encrypt_image(small_image, key, cfg) == encrypt_image(small_image, key, cfg)

    def test_wrong_key(self, key, small_image):
        cfg = CipherConfig()
        ct = encrypt_image(small_image, key, cfg)
        other = parse_key("000102030405060708090a0b0c0d0e0f")
        assert npcr(decrypt_image(ct, other, cfg), small_image) >= 99.0

    def test_truncated_body(self, key, small_image):
        cfg = CipherConfig()
        ct = encrypt_image(small_image, key, cfg)
        with pytest.raises(TruncatedDataError):
            decrypt_image(CipherText(header=ct.header, body=ct.body[:-1]), key, cfg)
        with pytest.raises(HeaderMismatchError):
            decrypt_image(CipherText(header=ct.header, body=ct.body + b"\0"), key, cfg)

    def test_header_mismatch(self, key, small_image):
        ct = encrypt_image(small_image, key, CipherConfig(mode=Mode.OFB))
        with pytest.raises(HeaderMismatchError) as exc_info:
            decrypt_image(ct, key, CipherConfig(mode=Mode.CBC, variant=Variant.C))
        assert "mode" in exc_info.value.detail
        assert "variant" in exc_info.value.detail

    def test_cross_stages_must_match_container(self, key, small_image):
        with pytest.raises(ConfigError):
            encrypt_image(small_image, key, CipherConfig(variant=Variant.D, cross_stages=(2, 4)))
        ct = encrypt_image(small_image, key, CipherConfig(variant=Variant.D))
        with pytest.raises(HeaderMismatchError) as exc_info:
            decrypt_image(ct, key, CipherConfig(variant=Variant.D, cross_stages=(2, 4)))
        assert "Cross stages" in exc_info.value.detail

    def test_socek_variants_ignore_cross_stages(self, key, small_image):
        cfg = CipherConfig(variant=Variant.C, cross_stages=(2, 4))
        assert decrypt_image(encrypt_image(small_image, key, cfg), key, CipherConfig(variant=Variant.C)) == small_image


class TestBlockErrors:
    @pytest.mark.parametrize("mode, expected", [(Mode.OFB, 1), (Mode.CTR, 1), (Mode.ECB, 1), (Mode.CBC, 2), (Mode.CFB, 2)])
    def test_single_flip(self, params, small_image, mode, expected):
        bench = PropagationBench(params, CipherConfig(), small_image, mode)
        assert [bench.forced_flip(*flip) for flip in FLIPS] == [expected] * len(FLIPS)

    @pytest.mark.parametrize("mask", [0x01, 0x10, 0x80])
    def test_cbc_next_block_carries_the_flipped_bit(self, params, small_image, mask):
        bench = PropagationBench(params, CipherConfig(mode=Mode.CBC), small_image)
        pos = bench.stream_position(20, 17, 1)
        corrupted = bench.cipher.copy()
        corrupted[pos] ^= mask
        decrypted = bench.engine.decrypt(corrupted, Mode.CBC)
        assert np.flatnonzero(decrypted != bench.plain).tolist() == [pos, pos + 1]
        assert decrypted[pos + 1] ^ bench.plain[pos + 1] == mask

    def test_flip_on_last_byte(self, params, small_image):
        bench = PropagationBench(params, CipherConfig(mode=Mode.CBC), small_image)
        assert bench.forced_flip(64, 64, 3) == 1

    def test_flip_outside_grid(self, params, small_image):
        bench = PropagationBench(params, CipherConfig(), small_image)
        with pytest.raises(DomainError):
            bench.forced_flip(65, 1, 1)


class TestKeyDerivation:
    def test_zero_key_is_clamped(self):
        params = derive_parameters(SecretKey(bits=bytes(16)))
        assert params.alpha.p == 2.0 ** -20
        assert params.x0.raw == 2 ** 12
        assert params.lfsr_seed == 1

    def test_words_map_to_parameters(self):
        params = derive_parameters(SecretKey(bits=bytes.fromhex("80000000" "40000000" "00000010" "00000011")))
        assert params.alpha.p == 0.25
        assert params.beta.p == 0.125
        assert params.x0.raw == 2 ** 12
        assert params.lfsr_seed == 0x01

    def test_top_clamp(self):
        params = derive_parameters(SecretKey(bits=b"\xff" * 16))
        assert params.alpha.raw() == 2 ** 32 - 2 ** 13
        assert params.y0.raw == 2 ** 32 - 2 ** 12
        assert params.lfsr_seed == 1
