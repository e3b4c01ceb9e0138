"""Protocol adapters: bind an instance to a field and define the wire format.

Every message has a fixed-width encoding so byte counts do not depend on
the values sent:

* field elements: ``ctx.byte_width`` bytes, big-endian;
* bit vectors (z, x): packed MSB-first into ``ceil(n / 8)`` bytes;
* per-clause values in {0, 1, 2} (rotations, f - 1): 2 bits each, packed;
* the challenge: one byte.

P2's opening is decoded with the challenge that V2 sent, so it carries no tag.
"""

from __future__ import annotations

import math
import random

from . import subset_sum as ss
from . import three_sat as sat
from .field import DecodeError, FieldCtx, FieldElement

__all__ = [
    "STEPS",
    "SubsetSumProtocol",
    "ThreeSatProtocol",
    "pack_bits",
    "pack_pairs",
    "unpack_bits",
    "unpack_pairs",
]

# Message steps of one round, in protocol order.
STEPS = ("a", "commit", "chall", "open")


def pack_bits(bits) -> bytes:
    out = bytearray((len(bits) + 7) // 8)
    for i, b in enumerate(bits):
        if b:
            out[i // 8] |= 0x80 >> (i % 8)
    return bytes(out)


def unpack_bits(data: bytes, count: int) -> tuple[int, ...]:
    if len(data) != (count + 7) // 8:
        raise DecodeError(f"expected {(count + 7) // 8} bytes for {count} bits")
    bits = tuple((data[i // 8] >> (7 - i % 8)) & 1 for i in range(count))
    if any(data[j // 8] >> (7 - j % 8) & 1 for j in range(count, 8 * len(data))):
        raise DecodeError("non-zero padding bits")
    return bits


def pack_pairs(values) -> bytes:
    bits = []
    for v in values:
        if not 0 <= v <= 3:
            raise ValueError(f"{v} does not fit in 2 bits")
        bits += [v >> 1, v & 1]
    return pack_bits(bits)


def unpack_pairs(data: bytes, count: int) -> tuple[int, ...]:
    bits = unpack_bits(data, 2 * count)
    return tuple(bits[2 * i] << 1 | bits[2 * i + 1] for i in range(count))


class _Codec:
    ctx: FieldCtx

    def _vec(self, values) -> bytes:
        return b"".join(self.ctx.encode(v % self.ctx.modulus) for v in values)

    def _unvec(self, data: bytes, count: int) -> tuple[int, ...]:
        bw = self.ctx.byte_width
        if len(data) != bw * count:
            raise DecodeError(f"expected {bw * count} bytes for {count} field elements")
        return tuple(self.ctx.decode(data[i * bw:(i + 1) * bw]) for i in range(count))

    def _split(self, data: bytes, *sizes: int) -> list[bytes]:
        if len(data) != sum(sizes):
            raise DecodeError(f"expected {sum(sizes)} bytes, got {len(data)}")
        parts, pos = [], 0
        for size in sizes:
            parts.append(data[pos:pos + size])
            pos += size
        return parts

    def encode(self, step: str, payload, chall: int | None = None) -> bytes:
        if step == "a":
            return self.ctx.encode(int(payload))
        if step == "chall":
            if payload not in (0, 1):
                raise ValueError(f"challenge must be a bit, got {payload!r}")
            return bytes([payload])
        if step == "commit":
            return self._encode_commit(payload)
        if step == "open":
            return self._encode_open(payload, chall)
        raise ValueError(f"unknown step {step!r}")

    def decode(self, step: str, data: bytes, chall: int | None = None):
        if step == "a":
            return FieldElement(self.ctx.decode(data), self.ctx)
        if step == "chall":
            if len(data) != 1 or data[0] > 1:
                raise DecodeError("challenge must be a single 0/1 byte")
            return data[0]
        if step == "commit":
            return self._decode_commit(data)
        if step == "open":
            return self._decode_open(data, chall)
        raise ValueError(f"unknown step {step!r}")

    @property
    def log_q(self) -> float:
        return math.log2(self.ctx.modulus)

    def wire_bytes_by_challenge(self) -> dict[int, int]:
        """Realised bytes of one round (all four messages) per challenge value."""
        raise NotImplementedError

    def expected_wire_bytes(self) -> float:
        b = self.wire_bytes_by_challenge()
        return (b[0] + b[1]) / 2


class SubsetSumProtocol(_Codec):
    name = "subset-sum"

    def __init__(self, inst: ss.SubsetSumInstance, ctx: FieldCtx):
        inst.check_field(ctx)
        self.inst = inst
        self.ctx = ctx

    @property
    def size(self) -> dict[str, int]:
        return {"n": self.inst.n}

    def check_witness(self, witness) -> None:
        if not ss.SubsetSumWitness(witness.v).satisfies(self.inst):
            raise ValueError("witness does not solve the instance")

    def shared_state(self, rng: random.Random) -> ss.ProverSharedState:
        return ss.sample_shared_state(self.ctx, self.inst.n, rng)

    def p1(self, a: FieldElement, st, witness=None) -> ss.P1Response:
        # P1's message does not depend on the witness.
        return ss.p1_respond(a, self.inst, st)

    def p2(self, chall: int, st, witness) -> object:
        return ss.p2_respond(chall, witness, st)

    def verify(self, a: FieldElement, resp1, chall: int, resp2):
        return ss.verify_round(a, self.inst, resp1, chall, resp2)

    def extract(self, r0, r1):
        return ss.extract_a(self.ctx, self.inst, r0, r1)

    def _encode_commit(self, r: ss.P1Response) -> bytes:
        return self._vec(r.w0) + self._vec(r.w1)

    def _decode_commit(self, data: bytes) -> ss.P1Response:
        n, bw = self.inst.n, self.ctx.byte_width
        w0, w1 = self._split(data, n * bw, n * bw)
        return ss.P1Response(self._unvec(w0, n), self._unvec(w1, n))

    def _encode_open(self, r, chall) -> bytes:
        if chall == 0:
            return pack_bits(r.z) + self._vec(r.c0) + self._vec(r.c1)
        return pack_bits(r.x) + self.ctx.encode(r.c_prime % self.ctx.modulus)

    def _decode_open(self, data: bytes, chall):
        n, bw, nb = self.inst.n, self.ctx.byte_width, (self.inst.n + 7) // 8
        if chall == 0:
            z, c0, c1 = self._split(data, nb, n * bw, n * bw)
            return ss.Chall0Response(unpack_bits(z, n), self._unvec(c0, n), self._unvec(c1, n))
        x, c = self._split(data, nb, bw)
        return ss.Chall1Response(unpack_bits(x, n), self.ctx.decode(c))

    def formula_bits_by_challenge(self) -> dict[int, float]:
        return ss.round_bits_by_challenge(self.inst.n, self.log_q)

    def formula_bits(self) -> float:
        return ss.round_bits(self.inst.n, self.log_q)

    def wire_bytes_by_challenge(self) -> dict[int, int]:
        n, bw, nb = self.inst.n, self.ctx.byte_width, (self.inst.n + 7) // 8
        common = bw + 2 * n * bw + 1
        return {0: common + nb + 2 * n * bw, 1: common + nb + bw}


class ThreeSatProtocol(_Codec):
    name = "3sat"

    def __init__(self, phi: sat.Cnf3, ctx: FieldCtx):
        self.phi = phi
        self.ctx = ctx

    @property
    def size(self) -> dict[str, int]:
        return {"n": self.phi.n, "m": self.phi.m}

    def check_witness(self, witness) -> None:
        if not sat.evaluate(self.phi, witness):
            raise ValueError("assignment does not satisfy the formula")

    def shared_state(self, rng: random.Random) -> sat.SatSharedState:
        return sat.sample_sat_shared_state(self.ctx, self.phi, rng)

    def p1(self, a: FieldElement, st: sat.SatSharedState, witness) -> sat.SatP1Response:
        p = sat.formula_bits(sat.apply_perm(st.perm, self.phi), witness)
        return sat.sat_p1_respond(a, st, witness, p)

    def p2(self, chall: int, st: sat.SatSharedState, witness):
        e = sat.witness_positions(self.phi, witness)
        return sat.sat_p2_respond(chall, st, self.phi, e)

    def verify(self, a: FieldElement, resp1, chall: int, resp2):
        return sat.sat_verify_round(a, self.phi, resp1, chall, resp2)

    def extract(self, r0, r1):
        return sat.sat_extract_a(self.ctx, self.phi, r0, r1)

    def _encode_commit(self, r: sat.SatP1Response) -> bytes:
        return self._vec(r.w_prime) + self._vec(r.w)

    def _decode_commit(self, data: bytes) -> sat.SatP1Response:
        n, m, bw = self.phi.n, self.phi.m, self.ctx.byte_width
        wp, w = self._split(data, n * bw, 3 * m * bw)
        return sat.SatP1Response(self._unvec(wp, n), self._unvec(w, 3 * m))

    def _encode_open(self, r, chall) -> bytes:
        if chall == 0:
            return pack_pairs(r.perm.rotations) + self._vec(r.delta)
        return pack_pairs([fi - 1 for fi in r.f]) + self._vec(r.gamma)

    def _decode_open(self, data: bytes, chall):
        m, bw, pb = self.phi.m, self.ctx.byte_width, (2 * self.phi.m + 7) // 8
        if chall == 0:
            perm, delta = self._split(data, pb, 3 * m * bw)
            rotations = unpack_pairs(perm, m)
            if 3 in rotations:
                raise DecodeError("rotation out of range")
            return sat.SatChall0Response(sat.CyclicPerm(rotations), self._unvec(delta, 3 * m))
        f, gamma = self._split(data, pb, m * bw)
        positions = unpack_pairs(f, m)
        if 3 in positions:
            raise DecodeError("clause position out of range")
        return sat.SatChall1Response(tuple(p + 1 for p in positions), self._unvec(gamma, m))

    def formula_bits_by_challenge(self) -> dict[int, float]:
        return sat.sat_round_bits_by_challenge(self.phi.n, self.phi.m, self.log_q)

    def formula_bits(self) -> float:
        return sat.sat_round_bits(self.phi.n, self.phi.m, self.log_q)

    def wire_bytes_by_challenge(self) -> dict[int, int]:
        n, m, bw = self.phi.n, self.phi.m, self.ctx.byte_width
        pb = (2 * m + 7) // 8
        common = bw + (n + 3 * m) * bw + 1
        return {0: common + pb + 3 * m * bw, 1: common + pb + m * bw}
