"""Two-prover relativistic commitment ``w = a*b + c`` over F_Q.

V1 draws the challenge ``a`` and sends it to P1, who answers with ``w``.
P2 later opens with ``(b, c)``. Binding rests on P2 never seeing ``a``;
hiding is perfect because ``c`` is a one-time pad.

Commitments made under the same challenge combine linearly: the sum of
``w`` values is a commitment to the sum of messages under the sum of keys.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

from .field import FieldCtx, FieldElement, FieldMismatchError

__all__ = [
    "Opening",
    "combine_keys",
    "combine_linear",
    "commit",
    "commit_int",
    "double_open_attack",
    "verify_open",
]

# Challenge a, key c and commitment value w are all plain field elements.
CommitChallenge = FieldElement
CommitKey = FieldElement
CommitValue = FieldElement


class Opening(NamedTuple):
    b: FieldElement
    c: FieldElement


def _same_field(*elems: FieldElement) -> FieldCtx:
    ctx = elems[0].ctx
    for e in elems[1:]:
        if e.ctx != ctx:
            raise FieldMismatchError(f"{ctx} vs {e.ctx}")
    return ctx


def commit(a: CommitChallenge, b: FieldElement, c: CommitKey) -> CommitValue:
    _same_field(a, b, c)
    return a * b + c


def commit_int(ctx: FieldCtx, a: int, b: int, c: int) -> int:
    """Residue-level ``commit`` for the vectorised protocol code."""
    return (a * b + c) % ctx.modulus


def verify_open(a: CommitChallenge, w: CommitValue, opening: Opening) -> bool:
    _same_field(a, w, opening.b, opening.c)
    return w == a * opening.b + opening.c


def _weighted_sum(coeffs: Sequence[FieldElement], items: Sequence[FieldElement]) -> FieldElement:
    if len(coeffs) != len(items):
        raise ValueError(f"{len(coeffs)} coefficients for {len(items)} values")
    if not items:
        raise ValueError("cannot combine an empty list")
    _same_field(*coeffs, *items)
    total = coeffs[0] * items[0]
    for coeff, item in zip(coeffs[1:], items[1:]):
        total = total + coeff * item
    return total


def combine_linear(coeffs: Sequence[FieldElement], ws: Sequence[CommitValue]) -> CommitValue:
    """Verifier side: sum(coeff_i * w_i).

    Only meaningful when every ``w_i`` was made under the same challenge; the
    result then opens to ``sum(coeff_i * b_i)`` with key ``combine_keys``.
    """
    return _weighted_sum(coeffs, ws)


def combine_keys(coeffs: Sequence[FieldElement], keys: Sequence[CommitKey]) -> CommitKey:
    """Prover side mirror of :func:`combine_linear`."""
    return _weighted_sum(coeffs, keys)


def double_open_attack(
    w: CommitValue, b: FieldElement, b_alt: FieldElement, guess_a: FieldElement
) -> tuple[Opening, Opening]:
    """Openings of ``w`` to both ``b`` and ``b_alt`` built from a guess of ``a``.

    Both verify exactly when ``guess_a`` equals the real challenge, so a
    cheating P2 succeeds with the probability of guessing ``a``.
    """
    _same_field(w, b, b_alt, guess_a)
    if b == b_alt:
        raise ValueError("double opening needs two distinct messages")
    return Opening(b, w - guess_a * b), Opening(b_alt, w - guess_a * b_alt)
