"""Prime-field arithmetic over F_Q and prime selection.

Protocol code mostly works on plain ``int`` residues for speed and goes
through a :class:`FieldCtx` for reduction; :class:`FieldElement` is the
checked scalar type used by the commitment layer and public APIs.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from functools import cached_property

__all__ = [
    "DecodeError",
    "DivisionByZero",
    "FieldCtx",
    "FieldElement",
    "FieldMismatchError",
    "choose_prime",
    "fe_add",
    "fe_deserialize",
    "fe_inv",
    "fe_mul",
    "fe_neg",
    "fe_random",
    "fe_serialize",
    "fe_sub",
    "is_probable_prime",
]


class FieldMismatchError(ValueError):
    """Operands belong to different fields."""


class DivisionByZero(ZeroDivisionError):
    pass


class DecodeError(ValueError):
    pass


_SMALL_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67,
    71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149,
    151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229,
    233, 239, 241, 251,
)
# Bases 2..41 are a proven deterministic witness set below this bound.
_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_MR_ROUNDS = 64  # 4**-64 = 2**-128


def _mr_bases(n: int):
    if n < _DETERMINISTIC_LIMIT:
        return _SMALL_PRIMES[:13]
    # Pseudo-random but reproducible: a function of n only.
    seed = n.to_bytes((n.bit_length() + 7) // 8, "big")
    bases = []
    for i in range(_MR_ROUNDS):
        digest = hashlib.sha256(seed + i.to_bytes(2, "big")).digest()
        bases.append(2 + int.from_bytes(digest, "big") % (n - 3))
    return bases


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin with a deterministic witness schedule.

    Exact below 3.3e24; above that the 64 hash-derived bases give an error
    bound of 2**-128.
    """
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for base in _mr_bases(n):
        x = pow(base, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldCtx:
    """The prime field F_Q. Immutable; equal moduli mean equal fields."""

    modulus: int

    def __post_init__(self):
        if not isinstance(self.modulus, int) or not is_probable_prime(self.modulus):
            raise ValueError(f"modulus must be prime, got {self.modulus!r}")

    @cached_property
    def bit_length(self) -> int:
        # ceil(log2 Q)
        return (self.modulus - 1).bit_length()

    @cached_property
    def byte_width(self) -> int:
        return (self.bit_length + 7) // 8

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(value % self.modulus, self)

    def __repr__(self):
        return f"FieldCtx(Q={self.modulus})"

    # int-level helpers used by the protocol modules
    def reduce(self, value: int) -> int:
        return value % self.modulus

    def inv(self, value: int) -> int:
        value %= self.modulus
        if value == 0:
            raise DivisionByZero("0 has no inverse in F_Q")
        return pow(value, -1, self.modulus)

    def random_int(self, rng: random.Random) -> int:
        # Rejection sampling from byte_width-sized draws, masked to bit_length.
        mask = (1 << self.bit_length) - 1
        nbytes = self.byte_width
        while True:
            draw = int.from_bytes(rng.randbytes(nbytes), "big") & mask
            if draw < self.modulus:
                return draw

    def random_vector(self, rng: random.Random, length: int) -> tuple[int, ...]:
        return tuple(self.random_int(rng) for _ in range(length))

    def encode(self, value: int) -> bytes:
        return value.to_bytes(self.byte_width, "big")

    def decode(self, data: bytes) -> int:
        if len(data) != self.byte_width:
            raise DecodeError(f"expected {self.byte_width} bytes, got {len(data)}")
        value = int.from_bytes(data, "big")
        if value >= self.modulus:
            raise DecodeError(f"encoded value {value} is not below Q={self.modulus}")
        return value


@dataclass(frozen=True)
class FieldElement:
    value: int
    ctx: FieldCtx = field(repr=False)

    def __post_init__(self):
        if not 0 <= self.value < self.ctx.modulus:
            raise ValueError(f"{self.value} is not a reduced residue mod {self.ctx.modulus}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.ctx != self.ctx:
                raise FieldMismatchError(f"{self.ctx} vs {other.ctx}")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return FieldElement((self.value + v) % self.ctx.modulus, self.ctx)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return FieldElement((self.value - v) % self.ctx.modulus, self.ctx)

    def __rsub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return FieldElement((v - self.value) % self.ctx.modulus, self.ctx)

    def __mul__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return FieldElement(self.value * v % self.ctx.modulus, self.ctx)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value % self.ctx.modulus, self.ctx)

    def __truediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self * self.ctx.inv(v)

    def inverse(self) -> FieldElement:
        return FieldElement(self.ctx.inv(self.value), self.ctx)

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __bool__(self):
        return self.value != 0


def _check(x: FieldElement, y: FieldElement) -> None:
    if x.ctx != y.ctx:
        raise FieldMismatchError(f"{x.ctx} vs {y.ctx}")


def fe_add(x: FieldElement, y: FieldElement) -> FieldElement:
    _check(x, y)
    return x + y


def fe_sub(x: FieldElement, y: FieldElement) -> FieldElement:
    _check(x, y)
    return x - y


def fe_mul(x: FieldElement, y: FieldElement) -> FieldElement:
    _check(x, y)
    return x * y


def fe_neg(x: FieldElement) -> FieldElement:
    return -x


def fe_inv(x: FieldElement) -> FieldElement:
    return x.inverse()


def fe_random(ctx: FieldCtx, rng: random.Random) -> FieldElement:
    """Uniform element of F_Q drawn from ``rng``."""
    return FieldElement(ctx.random_int(rng), ctx)


def fe_serialize(x: FieldElement) -> bytes:
    """Fixed-width big-endian encoding, ``ctx.byte_width`` bytes."""
    return x.ctx.encode(x.value)


def fe_deserialize(ctx: FieldCtx, data: bytes) -> FieldElement:
    return FieldElement(ctx.decode(data), ctx)


def choose_prime(min_bound: int) -> FieldCtx:
    """Smallest prime >= ``min_bound``, wrapped as a field."""
    if min_bound < 2:
        raise ValueError("min_bound must be at least 2")
    if min_bound <= 2:
        return FieldCtx(2)
    candidate = min_bound | 1
    while not is_probable_prime(candidate):
        candidate += 2
    return FieldCtx(candidate)
