import hashlib

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from memsha3 import keccak
from memsha3.keccak import KeccakState
from memsha3.vectors import load_rsp

HASHLIB = {"SHA3-256": hashlib.sha3_256, "SHA3-512": hashlib.sha3_512}


def states():
    return st.lists(st.integers(0, 2**64 - 1), min_size=25, max_size=25).map(
        lambda v: KeccakState.from_lanes([v[5 * x : 5 * x + 5] for x in range(5)])
    )


def test_known_constants():
    # FIPS 202 round constants and rotation offsets
    assert keccak.RC[0] == 0x0000000000000001
    assert keccak.RC[1] == 0x0000000000008082
    assert keccak.RC[23] == 0x8000000080008008
    assert keccak.RHO_OFFSETS[0][0] == 0
    assert keccak.RHO_OFFSETS[1][0] == 1
    assert keccak.RHO_OFFSETS[0][1] == 36
    assert keccak.RHO_OFFSETS[4][4] == 14
    assert sorted(o for row in keccak.RHO_OFFSETS for o in row) == sorted(
        [0, 1, 62, 28, 27, 36, 44, 6, 55, 20, 3, 10, 43, 25, 39, 41, 45, 15, 21, 8, 18, 2, 61, 56, 14]
    )


def test_permutation_of_zero_state():
    # first output lane of Keccak-f[1600] applied to the all-zero state
    assert keccak.keccak_f(KeccakState.zero()).lane(0, 0) == 0xF1258F7940E1DDE7


@pytest.mark.parametrize("variant", ["SHA3-256", "SHA3-512"])
@given(msg=st.binary(max_size=400))
def test_digest_matches_hashlib(variant, msg):
    assert keccak.sha3_digest(msg, variant) == HASHLIB[variant](msg).digest()


@pytest.mark.parametrize("name", ["SHA3_256ShortMsg.rsp", "SHA3_512ShortMsg.rsp"])
def test_nist_short_messages(vectors_dir, name):
    records, issues = load_rsp(vectors_dir / name)
    assert records and not issues
    for r in records:
        assert keccak.sha3_digest(r.message, r.variant) == r.digest


@given(a=states(), b=states())
def test_theta_is_linear(a, b):
    assert keccak.theta(a ^ b) == keccak.theta(a) ^ keccak.theta(b)


@given(s=states())
def test_pi_moves_lanes(s):
    out = keccak.pi(s)
    for x in range(5):
        for y in range(5):
            assert out.lane(*keccak.pi_destination(x, y)) == s.lane(x, y)


@given(s=states(), i=st.integers(1, 24))
def test_iota_is_an_involution(s, i):
    assert keccak.iota(keccak.iota(s, i), i) == s


@given(s=states())
def test_chi_matches_bitwise_formula(s):
    out = keccak.chi(s)
    m = keccak.MASK
    for x in range(5):
        for y in range(5):
            expect = s.lane(x, y) ^ ((~s.lane((x + 1) % 5, y) & m) & s.lane((x + 2) % 5, y))
            assert out.lane(x, y) == expect


@given(lane=st.integers(0, 2**64 - 1), n=st.integers(0, 63))
def test_rot_inverse(lane, n):
    assert keccak.rot(keccak.rot(lane, n), 64 - n) == lane


@given(msg=st.binary(max_size=600))
def test_padding_fills_whole_blocks(msg):
    for variant in ("SHA3-256", "SHA3-512"):
        rate, _ = keccak.variant_params(variant)
        blocks = keccak.pad(msg, rate)
        assert all(len(b) * 8 == rate for b in blocks)
        joined = b"".join(blocks)
        assert joined[: len(msg)] == msg
        assert joined[len(msg)] & 0x06 == 0x06 and joined[-1] & 0x80


@given(s=states())
def test_bit_views_roundtrip(s):
    assert KeccakState.from_bits(s.bits()) == s
    assert KeccakState.from_bytes(s.to_bytes()) == s
    assert s.bits()[1, 2, 5] == s.bit(1, 2, 5)


def test_rejections():
    with pytest.raises(ValueError):
        keccak.variant_params("SHA3-999")
    with pytest.raises(keccak.RoundOutOfRange):
        keccak.round_constant(25)
    rng = np.random.default_rng(1)
    s = KeccakState.random(rng)
    assert keccak.keccak_round(s, 1) == keccak.iota(keccak.chi(keccak.pi(keccak.rho(keccak.theta(s)))), 1)
