"""Two-prover zero-knowledge proof for Subset Sum.

One round, with ``s * z`` entry-wise and ``zbar`` the complement of ``z``:

1. V1 -> P1: random ``a``.
2. P1 -> V1: ``w0 = a*(s*z) + c0`` and ``w1 = a*(s*zbar) + c1``.
3. V2 -> P2: ``chall`` in {0, 1}.
4. P2 -> V2: ``(z, c0, c1)`` for chall 0, or ``x = v xor z`` and
   ``c' = sum_i (c_{x_i})_i`` for chall 1.
5. Verifiers recompute the masked rows (chall 0) or check
   ``sum_i (w_{x_i})_i == a*k + c'`` (chall 1).

``(c_{x_i})_i`` means row ``x_i`` (c0 or c1) at coordinate ``i``.
Vectors are tuples of residues in ``[0, Q)``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from pathlib import Path

from .commitment import commit_int
from .field import FieldCtx, FieldElement, choose_prime
from .verdict import ACCEPT, Verdict

__all__ = [
    "Chall0Response",
    "Chall1Response",
    "P1Response",
    "ProverSharedState",
    "SubsetSumInstance",
    "SubsetSumWitness",
    "Verdict",
    "choose_params",
    "dump_instance",
    "extract_a",
    "find_witness",
    "generate_instance",
    "load_instance",
    "p1_respond",
    "p2_respond",
    "parse_instance",
    "round_bits",
    "round_bits_by_challenge",
    "rounds_needed",
    "sample_shared_state",
    "soundness_error",
    "verify_round",
]


@dataclass(frozen=True)
class SubsetSumInstance:
    s: tuple[int, ...]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(int(x) for x in self.s))
        if any(x < 1 for x in self.s):
            raise ValueError("set elements must be positive integers")
        if self.k < 0:
            raise ValueError("target must be non-negative")

    @property
    def n(self) -> int:
        return len(self.s)

    @property
    def total(self) -> int:
        return sum(self.s)

    def check_field(self, ctx: FieldCtx) -> None:
        # Sums must not wrap mod Q, otherwise F_Q and integer views disagree.
        if ctx.modulus <= max(self.total, self.k):
            raise ValueError(f"Q={ctx.modulus} must exceed the sum of the set ({self.total})")


@dataclass(frozen=True)
class SubsetSumWitness:
    v: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(int(b) for b in self.v))
        if set(self.v) - {0, 1}:
            raise ValueError("witness must be a binary vector")

    def satisfies(self, inst: SubsetSumInstance) -> bool:
        return len(self.v) == inst.n and sum(b * x for b, x in zip(self.v, inst.s)) == inst.k


@dataclass(frozen=True)
class ProverSharedState:
    """Per-round randomness both provers agree on before the round."""

    ctx: FieldCtx
    c0: tuple[int, ...]
    c1: tuple[int, ...]
    z: tuple[int, ...]


@dataclass(frozen=True)
class P1Response:
    w0: tuple[int, ...]
    w1: tuple[int, ...]


@dataclass(frozen=True)
class Chall0Response:
    z: tuple[int, ...]
    c0: tuple[int, ...]
    c1: tuple[int, ...]


@dataclass(frozen=True)
class Chall1Response:
    x: tuple[int, ...]
    c_prime: int


def sample_shared_state(ctx: FieldCtx, n: int, rng: random.Random) -> ProverSharedState:
    c0 = ctx.random_vector(rng, n)
    c1 = ctx.random_vector(rng, n)
    z = tuple(rng.getrandbits(1) for _ in range(n))
    return ProverSharedState(ctx, c0, c1, z)


def generate_instance(
    n: int, ctx: FieldCtx, rng: random.Random, nonempty: bool = False
) -> tuple[SubsetSumInstance, SubsetSumWitness]:
    """Positive instance: ``n`` numbers in ``[1, Q // n]`` and a random subset's sum.

    With ``nonempty`` the subset is resampled until it has at least one
    element, so the target is never 0.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    hi = ctx.modulus // n
    if hi < 1:
        raise ValueError(f"Q={ctx.modulus} is too small for n={n}")
    s = tuple(rng.randint(1, hi) for _ in range(n))
    while True:
        v = tuple(rng.getrandbits(1) for _ in range(n))
        if any(v) or not nonempty:
            break
    k = sum(b * x for b, x in zip(v, s))
    return SubsetSumInstance(s, k), SubsetSumWitness(v)


def _masked_rows(q: int, a: int, s, z, c0, c1) -> tuple[tuple[int, ...], tuple[int, ...]]:
    w0 = tuple((a * si * zi + ci) % q for si, zi, ci in zip(s, z, c0))
    w1 = tuple((a * si * (1 - zi) + ci) % q for si, zi, ci in zip(s, z, c1))
    return w0, w1


def p1_respond(a: FieldElement, inst: SubsetSumInstance, st: ProverSharedState) -> P1Response:
    n = inst.n
    if not len(st.c0) == len(st.c1) == len(st.z) == n:
        raise ValueError(f"shared state does not match n={n}")
    ctx = a.ctx
    w0 = tuple(commit_int(ctx, a.value, si * zi, ci) for si, zi, ci in zip(inst.s, st.z, st.c0))
    w1 = tuple(commit_int(ctx, a.value, si * (1 - zi), ci) for si, zi, ci in zip(inst.s, st.z, st.c1))
    return P1Response(w0, w1)


def _select(row0, row1, x) -> list[int]:
    return [r1 if xi else r0 for r0, r1, xi in zip(row0, row1, x)]


def p2_respond(chall: int, wit: SubsetSumWitness, st: ProverSharedState):
    if chall == 0:
        return Chall0Response(st.z, st.c0, st.c1)
    if chall != 1:
        raise ValueError(f"challenge must be 0 or 1, got {chall!r}")
    x = tuple(vi ^ zi for vi, zi in zip(wit.v, st.z))
    return Chall1Response(x, sum(_select(st.c0, st.c1, x)) % st.ctx.modulus)


def verify_round(
    a: FieldElement,
    inst: SubsetSumInstance,
    resp1: P1Response,
    chall: int,
    resp2,
) -> Verdict:
    q, n = a.ctx.modulus, inst.n
    if len(resp1.w0) != n or len(resp1.w1) != n:
        return Verdict(False, "P1 response has the wrong length")
    if chall == 0:
        if not isinstance(resp2, Chall0Response):
            return Verdict(False, "expected (z, c0, c1) for chall=0")
        if not len(resp2.z) == len(resp2.c0) == len(resp2.c1) == n or set(resp2.z) - {0, 1}:
            return Verdict(False, "malformed (z, c0, c1)")
        w0, w1 = _masked_rows(q, a.value, inst.s, resp2.z, resp2.c0, resp2.c1)
        for i in range(n):
            if w0[i] != resp1.w0[i] % q:
                return Verdict(False, f"w0[{i}] does not open to s*z")
            if w1[i] != resp1.w1[i] % q:
                return Verdict(False, f"w1[{i}] does not open to s*zbar")
        return ACCEPT
    if chall == 1:
        if not isinstance(resp2, Chall1Response):
            return Verdict(False, "expected (x, c') for chall=1")
        if len(resp2.x) != n or set(resp2.x) - {0, 1}:
            return Verdict(False, "malformed selector x")
        lhs = sum(_select(resp1.w0, resp1.w1, resp2.x)) % q
        rhs = (a.value * inst.k + resp2.c_prime) % q
        if lhs != rhs:
            return Verdict(False, "selected commitments do not sum to a*k + c'")
        return ACCEPT
    return Verdict(False, f"invalid challenge {chall!r}")


def extract_a(ctx: FieldCtx, inst: SubsetSumInstance, r0: Chall0Response, r1: Chall1Response) -> int | None:
    """Recover V1's ``a`` from P2's answers to both challenges in one round.

    If both answers verify against the same P1 message then
    ``a * (T - k) = c' - sum_i (c_{x_i})_i`` with ``T = sum_i s_i (x_i xor z_i)``.
    Returns ``None`` when ``T == k``: then ``x xor z`` is itself a witness
    and nothing can be extracted.
    """
    q = ctx.modulus
    t = sum(si for si, xi, zi in zip(inst.s, r1.x, r0.z) if xi ^ zi)
    if (t - inst.k) % q == 0:
        return None
    keys = sum(_select(r0.c0, r0.c1, r1.x))
    return (r1.c_prime - keys) * ctx.inv(t - inst.k) % q


def choose_params(n: int, K: int, inst_sum: int = 0) -> FieldCtx:
    """Field with ``Q >= 64 * 2**(n + 3K)`` and ``Q > inst_sum``.

    The first bound gives per-round soundness ``1/2 + 2**-K``.
    """
    if n < 1 or K < 1:
        raise ValueError("n and K must be positive")
    return choose_prime(max(64 * 2 ** (n + 3 * K), inst_sum + 1))


def round_bits_by_challenge(n: int, log_q: float) -> dict[int, float]:
    """Bits on the wire for one round, split by challenge value."""
    common = log_q + 1 + 2 * n * log_q  # a, chall, (w0, w1)
    return {0: common + n + 2 * n * log_q, 1: common + n + log_q}


def round_bits(n: int, log_q: float) -> float:
    """Expected bits per round under a uniform challenge, log2(Q) bits per element."""
    return log_q + 1 + 2 * n * log_q + (n + (2 * n * log_q + log_q) / 2)


def soundness_error(K: int) -> float:
    return 0.5 + 2.0**-K


def rounds_needed(K: int, target_exponent: int) -> int:
    """Rounds so that ``(1/2 + 2**-K) ** rounds <= 2**-target_exponent``."""
    eps = soundness_error(K)
    if eps >= 1:
        raise ValueError("per-round soundness error must be below 1")
    if target_exponent <= 0:
        return 0
    return math.ceil(target_exponent / -math.log2(eps))


def find_witness(inst: SubsetSumInstance) -> SubsetSumWitness | None:
    """Brute-force search over all 2**n subsets."""
    for v in itertools.product((0, 1), repeat=inst.n):
        if sum(b * x for b, x in zip(v, inst.s)) == inst.k:
            return SubsetSumWitness(v)
    return None


# -- instance files ----------------------------------------------------------
#
#   subset-sum
#   n <n>
#   s <s_1> ... <s_n>
#   k <k>
#   v <v_1> ... <v_n>        (optional witness)


def dump_instance(inst: SubsetSumInstance, wit: SubsetSumWitness | None = None) -> str:
    lines = ["subset-sum", f"n {inst.n}", "s " + " ".join(map(str, inst.s)), f"k {inst.k}"]
    if wit is not None:
        lines.append("v " + " ".join(map(str, wit.v)))
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> tuple[SubsetSumInstance, SubsetSumWitness | None]:
    fields: dict[str, list[str]] = {}
    header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not header:
            if line != "subset-sum":
                raise ValueError(f"line {lineno}: expected 'subset-sum' header")
            header = True
            continue
        key, *rest = line.split()
        if key not in ("n", "s", "k", "v") or key in fields:
            raise ValueError(f"line {lineno}: unexpected or repeated field {key!r}")
        fields[key] = rest
    missing = {"n", "s", "k"} - fields.keys()
    if not header or missing:
        raise ValueError(f"incomplete instance, missing {sorted(missing) or 'header'}")
    n = int(fields["n"][0])
    s = [int(t) for t in fields["s"]]
    if len(s) != n:
        raise ValueError(f"declared n={n} but found {len(s)} set elements")
    inst = SubsetSumInstance(tuple(s), int(fields["k"][0]))
    wit = None
    if "v" in fields:
        wit = SubsetSumWitness(tuple(int(t) for t in fields["v"]))
        if len(wit.v) != n:
            raise ValueError(f"witness has length {len(wit.v)}, expected {n}")
    return inst, wit


def load_instance(path: str | Path) -> tuple[SubsetSumInstance, SubsetSumWitness | None]:
    return parse_instance(Path(path).read_text())
