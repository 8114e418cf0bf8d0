"""Bit-exact Keccak-f[1600] and the SHA3 sponge (FIPS 202 conventions).

Lanes are 64-bit integers indexed ``[x][y]``; bit ``z`` of a lane is
integer bit ``z``. Round indices at this module's surface run 1..24.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK = (1 << 64) - 1
ROUNDS = 24
W = 64
B = 1600

VARIANTS = {
    # name: (rate bits, digest bits)
    "SHA3-256": (1088, 256),
    "SHA3-512": (576, 512),
}


class RoundOutOfRange(ValueError):
    pass


def rot(lane: int, n: int) -> int:
    """Circular shift towards higher bit indices (z -> z+n)."""
    n %= W
    return ((lane << n) | (lane >> (W - n))) & MASK if n else lane


def _rc_bit(t: int) -> int:
    if t % 255 == 0:
        return 1
    r = 0b10000000  # R[0]=1 stored MSB-first: bit 7 is R[0]
    for _ in range(t % 255):
        r0 = r & 1  # R[8] after prepend
        # R = 0 || R ; R[0]^=R[8]; R[4]^=R[8]; R[5]^=R[8]; R[6]^=R[8]; truncate to 8
        r >>= 1
        if r0:
            r ^= 0b10001110
    return (r >> 7) & 1


def _round_constants() -> tuple[int, ...]:
    out = []
    for ir in range(ROUNDS):
        rc = 0
        for j in range(7):
            if _rc_bit(j + 7 * ir):
                rc |= 1 << ((1 << j) - 1)
        out.append(rc)
    return tuple(out)


def _rho_offsets() -> tuple[tuple[int, ...], ...]:
    table = [[0] * 5 for _ in range(5)]
    x, y = 1, 0
    for t in range(24):
        table[x][y] = ((t + 1) * (t + 2) // 2) % W
        x, y = y, (2 * x + 3 * y) % 5
    return tuple(tuple(col) for col in table)


RC = _round_constants()  # RC[0] is the first round's constant
RHO_OFFSETS = _rho_offsets()  # RHO_OFFSETS[x][y]


def round_constant(i: int) -> int:
    """Constant of round ``i`` (1-based)."""
    if not 1 <= i <= ROUNDS:
        raise RoundOutOfRange(f"round index {i} outside 1..{ROUNDS}")
    return RC[i - 1]


def pi_destination(x: int, y: int) -> tuple[int, int]:
    return y % 5, (2 * x + 3 * y) % 5


@dataclass(frozen=True)
class KeccakState:
    """1600-bit state as 25 lanes; ``lanes[x][y]``."""

    lanes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.lanes) != 5 or any(len(col) != 5 for col in self.lanes):
            raise ValueError("state must be 5x5 lanes")
        if any(not 0 <= v <= MASK for col in self.lanes for v in col):
            raise ValueError("lane value outside 64 bits")

    @classmethod
    def zero(cls) -> "KeccakState":
        return cls(tuple((0,) * 5 for _ in range(5)))

    @classmethod
    def from_lanes(cls, lanes) -> "KeccakState":
        return cls(tuple(tuple(int(lanes[x][y]) for y in range(5)) for x in range(5)))

    @classmethod
    def from_bytes(cls, data: bytes) -> "KeccakState":
        if len(data) != B // 8:
            raise ValueError("state is 200 bytes")
        v = [int.from_bytes(data[8 * i : 8 * i + 8], "little") for i in range(25)]
        return cls(tuple(tuple(v[x + 5 * y] for y in range(5)) for x in range(5)))

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "KeccakState":
        """Inverse of :meth:`bits`; ``bits[x, y, z]``."""
        bits = np.asarray(bits, dtype=np.uint8).reshape(5, 5, W)
        weights = (np.uint64(1) << np.arange(W, dtype=np.uint64))
        lanes = (bits.astype(np.uint64) * weights).sum(axis=2, dtype=np.uint64)
        return cls.from_lanes(lanes.tolist())

    @classmethod
    def random(cls, rng: np.random.Generator) -> "KeccakState":
        v = rng.integers(0, 2**64, size=(5, 5), dtype=np.uint64)
        return cls.from_lanes(v.tolist())

    def to_bytes(self) -> bytes:
        return b"".join(self.lanes[i % 5][i // 5].to_bytes(8, "little") for i in range(25))

    def bits(self) -> np.ndarray:
        arr = np.array(self.lanes, dtype=np.uint64)
        return ((arr[:, :, None] >> np.arange(W, dtype=np.uint64)) & np.uint64(1)).astype(np.uint8)

    def lane(self, x: int, y: int) -> int:
        return self.lanes[x % 5][y % 5]

    def bit(self, x: int, y: int, z: int) -> int:
        return (self.lanes[x % 5][y % 5] >> (z % W)) & 1

    def slice(self, z: int) -> np.ndarray:
        return self.bits()[:, :, z % W]

    def plane(self, y: int) -> np.ndarray:
        return self.bits()[:, y % 5, :]

    def sheet(self, x: int) -> np.ndarray:
        return self.bits()[x % 5, :, :]

    def with_lane(self, x: int, y: int, value: int) -> "KeccakState":
        cols = [list(col) for col in self.lanes]
        cols[x][y] = value & MASK
        return KeccakState.from_lanes(cols)

    def __xor__(self, other: "KeccakState") -> "KeccakState":
        return KeccakState(tuple(tuple(a ^ b for a, b in zip(ca, cb)) for ca, cb in zip(self.lanes, other.lanes)))


def theta(s: KeccakState) -> KeccakState:
    A = s.lanes
    C = [A[x][0] ^ A[x][1] ^ A[x][2] ^ A[x][3] ^ A[x][4] for x in range(5)]
    D = [C[(x - 1) % 5] ^ rot(C[(x + 1) % 5], 1) for x in range(5)]
    return KeccakState(tuple(tuple(A[x][y] ^ D[x] for y in range(5)) for x in range(5)))


def rho(s: KeccakState) -> KeccakState:
    A = s.lanes
    return KeccakState(tuple(tuple(rot(A[x][y], RHO_OFFSETS[x][y]) for y in range(5)) for x in range(5)))


def pi(s: KeccakState) -> KeccakState:
    out = [[0] * 5 for _ in range(5)]
    for x in range(5):
        for y in range(5):
            X, Y = pi_destination(x, y)
            out[X][Y] = s.lanes[x][y]
    return KeccakState.from_lanes(out)


def rho_pi(s: KeccakState) -> KeccakState:
    return pi(rho(s))


def chi(s: KeccakState) -> KeccakState:
    A = s.lanes
    return KeccakState(
        tuple(tuple(A[x][y] ^ ((~A[(x + 1) % 5][y] & MASK) & A[(x + 2) % 5][y]) for y in range(5)) for x in range(5))
    )


def iota(s: KeccakState, i: int) -> KeccakState:
    return s.with_lane(0, 0, s.lanes[0][0] ^ round_constant(i))


def keccak_round(s: KeccakState, i: int) -> KeccakState:
    return iota(chi(rho_pi(theta(s))), i)


def keccak_f(s: KeccakState) -> KeccakState:
    for i in range(1, ROUNDS + 1):
        s = keccak_round(s, i)
    return s


def variant_params(variant: str) -> tuple[int, int]:
    try:
        return VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}; expected one of {sorted(VARIANTS)}") from None


def pad(message: bytes, rate_bits: int) -> list[bytes]:
    """pad10*1 with the SHA3 domain bits, split into rate-sized blocks."""
    rb = rate_bits // 8
    q = rb - (len(message) % rb)
    if q == 1:
        tail = b"\x86"
    else:
        tail = b"\x06" + b"\x00" * (q - 2) + b"\x80"
    padded = bytes(message) + tail
    return [padded[i : i + rb] for i in range(0, len(padded), rb)]


def block_state(block: bytes) -> KeccakState:
    """Embed a rate block into an otherwise-zero state."""
    return KeccakState.from_bytes(bytes(block) + bytes(B // 8 - len(block)))


def absorb(state: KeccakState, block: bytes) -> KeccakState:
    return keccak_f(state ^ block_state(block))


def squeeze(state: KeccakState, digest_bits: int) -> bytes:
    return state.to_bytes()[: digest_bits // 8]


def sha3_digest(message: bytes, variant: str = "SHA3-256") -> bytes:
    rate, out = variant_params(variant)
    s = KeccakState.zero()
    for block in pad(message, rate):
        s = absorb(s, block)
    return squeeze(s, out)
