"""Two-prover zero-knowledge proof for 3SAT.

The provers commit to the assignment ``s'`` (as ``w' = a*s' + c'``) and to
the literal values ``p`` of a randomly rotated formula ``Pi(phi)`` (as
``w = a*p + c``). For chall 0 they reveal ``Pi`` and unveil, per position,
``p_i + s'_j`` (negated literal, must be 1) or ``p_i - s'_j`` (plain, must
be 0). For chall 1 they unveil a 1 in every clause.

Positions inside a clause are 1-based; the flat index of position ``j`` in
clause ``i`` (0-based) is ``3*i + j - 1``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .commitment import commit_int
from .field import FieldCtx, FieldElement, choose_prime
from .verdict import ACCEPT, Verdict

__all__ = [
    "Cnf3",
    "CyclicPerm",
    "Literal",
    "SatChall0Response",
    "SatChall1Response",
    "SatP1Response",
    "SatSharedState",
    "all_perms",
    "apply_perm",
    "apply_perm_positions",
    "dump_dimacs",
    "evaluate",
    "find_assignment",
    "formula_bits",
    "load_dimacs",
    "parse_dimacs",
    "phi_prime",
    "random_perm",
    "random_satisfiable",
    "reconstruct_assignment",
    "sample_sat_shared_state",
    "sat_choose_params",
    "sat_extract_a",
    "sat_p1_respond",
    "sat_p2_respond",
    "sat_round_bits",
    "sat_round_bits_by_challenge",
    "sat_verify_round",
    "witness_positions",
]


class Literal(NamedTuple):
    var: int  # 1-based
    negated: bool = False

    def value(self, assignment) -> int:
        return assignment[self.var - 1] ^ int(self.negated)

    def __str__(self):
        return f"-x{self.var}" if self.negated else f"x{self.var}"


@dataclass(frozen=True)
class Cnf3:
    n: int
    clauses: tuple[tuple[Literal, Literal, Literal], ...]

    def __post_init__(self):
        clauses = []
        for i, clause in enumerate(self.clauses):
            if len(clause) != 3:
                raise ValueError(f"clause {i + 1} has {len(clause)} literals, expected 3")
            lits = tuple(Literal(int(l[0]), bool(l[1])) for l in clause)
            for lit in lits:
                if not 1 <= lit.var <= self.n:
                    raise ValueError(f"clause {i + 1}: variable {lit.var} outside 1..{self.n}")
            clauses.append(lits)
        object.__setattr__(self, "clauses", tuple(clauses))

    @property
    def m(self) -> int:
        return len(self.clauses)

    def literal_at(self, flat: int) -> Literal:
        return self.clauses[flat // 3][flat % 3]

    def __str__(self):
        return " & ".join("(" + " | ".join(map(str, c)) + ")" for c in self.clauses)


@dataclass(frozen=True)
class CyclicPerm:
    """Independent right-rotation (0, 1 or 2 places) of every clause."""

    rotations: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rotations", tuple(int(r) for r in self.rotations))
        if set(self.rotations) - {0, 1, 2}:
            raise ValueError("rotations must be 0, 1 or 2")

    def __len__(self):
        return len(self.rotations)


def phi_prime() -> Cnf3:
    """Four-clause, five-variable running example; satisfied by (1, 0, 1, 0, 0)."""
    L = Literal
    return Cnf3(5, (
        (L(3), L(2, True), L(5)),
        (L(1, True), L(4, True), L(5, True)),
        (L(1), L(2, True), L(5)),
        (L(1), L(4), L(2)),
    ))


def evaluate(phi: Cnf3, assignment) -> bool:
    if len(assignment) != phi.n:
        raise ValueError(f"assignment has length {len(assignment)}, expected {phi.n}")
    return all(any(lit.value(assignment) for lit in clause) for clause in phi.clauses)


def witness_positions(phi: Cnf3, assignment) -> tuple[int, ...]:
    """Lowest true position (1..3) in every clause."""
    e = []
    for i, clause in enumerate(phi.clauses):
        for j, lit in enumerate(clause, 1):
            if lit.value(assignment):
                e.append(j)
                break
        else:
            raise ValueError(f"clause {i + 1} is not satisfied by the assignment")
    return tuple(e)


def random_perm(m: int, rng: random.Random) -> CyclicPerm:
    return CyclicPerm(tuple(rng.randrange(3) for _ in range(m)))


def all_perms(m: int):
    for rot in itertools.product(range(3), repeat=m):
        yield CyclicPerm(rot)


def apply_perm(perm: CyclicPerm, phi: Cnf3) -> Cnf3:
    if len(perm) != phi.m:
        raise ValueError("permutation and formula sizes differ")
    clauses = tuple(
        tuple(clause[(j - r) % 3] for j in range(3))
        for clause, r in zip(phi.clauses, perm.rotations)
    )
    return Cnf3(phi.n, clauses)


def apply_perm_positions(perm: CyclicPerm, e) -> tuple[int, ...]:
    if len(perm) != len(e):
        raise ValueError("permutation and position vector sizes differ")
    return tuple((ei - 1 + r) % 3 + 1 for ei, r in zip(e, perm.rotations))


def formula_bits(permuted: Cnf3, assignment) -> tuple[int, ...]:
    """Value of every literal of the (already permuted) formula, flattened."""
    return tuple(lit.value(assignment) for clause in permuted.clauses for lit in clause)


@dataclass(frozen=True)
class SatSharedState:
    ctx: FieldCtx
    perm: CyclicPerm
    c: tuple[int, ...]  # keys for p, length 3m
    c_prime: tuple[int, ...]  # keys for s', length n


@dataclass(frozen=True)
class SatP1Response:
    w_prime: tuple[int, ...]
    w: tuple[int, ...]


@dataclass(frozen=True)
class SatChall0Response:
    perm: CyclicPerm
    delta: tuple[int, ...]


@dataclass(frozen=True)
class SatChall1Response:
    f: tuple[int, ...]
    gamma: tuple[int, ...]


def sample_sat_shared_state(ctx: FieldCtx, phi: Cnf3, rng: random.Random) -> SatSharedState:
    perm = random_perm(phi.m, rng)
    c = ctx.random_vector(rng, 3 * phi.m)
    c_prime = ctx.random_vector(rng, phi.n)
    return SatSharedState(ctx, perm, c, c_prime)


def sat_p1_respond(a: FieldElement, st: SatSharedState, assignment, p) -> SatP1Response:
    if len(assignment) != len(st.c_prime) or len(p) != len(st.c):
        raise ValueError("assignment/bit vector sizes do not match the shared keys")
    ctx = a.ctx
    w_prime = tuple(commit_int(ctx, a.value, b, c) for b, c in zip(assignment, st.c_prime))
    w = tuple(commit_int(ctx, a.value, b, c) for b, c in zip(p, st.c))
    return SatP1Response(w_prime, w)


def sat_p2_respond(chall: int, st: SatSharedState, phi: Cnf3, e):
    q = st.ctx.modulus
    if chall == 0:
        permuted = apply_perm(st.perm, phi)
        delta = []
        for i in range(3 * phi.m):
            lit = permuted.literal_at(i)
            ck = st.c_prime[lit.var - 1]
            # Negated: unveil p_i + s'_j (= 1). Plain: unveil p_i - s'_j (= 0).
            delta.append((st.c[i] + ck) % q if lit.negated else (st.c[i] - ck) % q)
        return SatChall0Response(st.perm, tuple(delta))
    if chall != 1:
        raise ValueError(f"challenge must be 0 or 1, got {chall!r}")
    f = apply_perm_positions(st.perm, e)
    gamma = tuple(st.c[3 * i + fi - 1] for i, fi in enumerate(f))
    return SatChall1Response(f, gamma)


def sat_verify_round(a: FieldElement, phi: Cnf3, resp1: SatP1Response, chall: int, resp2) -> Verdict:
    q, av = a.ctx.modulus, a.value
    if len(resp1.w_prime) != phi.n or len(resp1.w) != 3 * phi.m:
        return Verdict(False, "P1 response has the wrong length")
    w, wp = resp1.w, resp1.w_prime
    if chall == 0:
        if not isinstance(resp2, SatChall0Response):
            return Verdict(False, "expected (Pi, delta) for chall=0")
        if len(resp2.perm) != phi.m or len(resp2.delta) != 3 * phi.m:
            return Verdict(False, "malformed (Pi, delta)")
        permuted = apply_perm(resp2.perm, phi)
        for i in range(3 * phi.m):
            lit = permuted.literal_at(i)
            j = lit.var - 1
            if lit.negated:
                ok = (w[i] + wp[j]) % q == (av + resp2.delta[i]) % q
            else:
                ok = (w[i] - wp[j]) % q == resp2.delta[i] % q
            if not ok:
                return Verdict(False, f"position {i + 1} ({lit}) is inconsistent with w'")
        return ACCEPT
    if chall == 1:
        if not isinstance(resp2, SatChall1Response):
            return Verdict(False, "expected (f, gamma) for chall=1")
        if len(resp2.f) != phi.m or len(resp2.gamma) != phi.m or set(resp2.f) - {1, 2, 3}:
            return Verdict(False, "malformed (f, gamma)")
        for i, (fi, gi) in enumerate(zip(resp2.f, resp2.gamma)):
            if w[3 * i + fi - 1] % q != (av + gi) % q:
                return Verdict(False, f"clause {i + 1}: position {fi} does not open to 1")
        return ACCEPT
    return Verdict(False, f"invalid challenge {chall!r}")


def _pointed(phi: Cnf3, r0: SatChall0Response, r1: SatChall1Response):
    permuted = apply_perm(r0.perm, phi)
    for i, fi in enumerate(r1.f):
        flat = 3 * i + fi - 1
        yield i, flat, permuted.literal_at(flat)


def reconstruct_assignment(phi: Cnf3, r0: SatChall0Response, r1: SatChall1Response):
    """Assignment read off the literals P2 unveiled as 1, or None on conflict.

    Unconstrained variables are set to 0.
    """
    values: dict[int, int] = {}
    for _, _, lit in _pointed(phi, r0, r1):
        bit = 0 if lit.negated else 1
        if values.setdefault(lit.var, bit) != bit:
            return None
    return tuple(values.get(j, 0) for j in range(1, phi.n + 1))


def sat_extract_a(ctx: FieldCtx, phi: Cnf3, r0: SatChall0Response, r1: SatChall1Response) -> int | None:
    """Recover ``a`` from answers to both challenges, or None if no conflict exists.

    A conflict is a variable unveiled as a true negated literal in clause
    ``i`` and as a true plain literal in clause ``i2``; then
    ``a = delta[p] + delta[p2] - gamma[i] - gamma[i2]`` for the two pointed
    positions ``p``, ``p2``.
    """
    negated_at: dict[int, tuple[int, int]] = {}
    plain_at: dict[int, tuple[int, int]] = {}
    for i, flat, lit in _pointed(phi, r0, r1):
        (negated_at if lit.negated else plain_at).setdefault(lit.var, (i, flat))
    for var, (i, p) in negated_at.items():
        if var in plain_at:
            i2, p2 = plain_at[var]
            return (r0.delta[p] + r0.delta[p2] - r1.gamma[i] - r1.gamma[i2]) % ctx.modulus
    return None


def sat_choose_params(m: int, k: int) -> FieldCtx:
    """Smallest prime ``Q >= 64 * 3**m * 2**(3k)``; soundness ``1/2 + 2**-k``.

    ``64 * 2**(log2(3) m + 3k)`` equals that integer bound exactly.
    """
    if m < 1 or k < 1:
        raise ValueError("m and k must be positive")
    return choose_prime(64 * 3**m * 2 ** (3 * k))


def sat_round_bits_by_challenge(n: int, m: int, log_q: float) -> dict[int, float]:
    common = log_q + (n + 3 * m) * log_q + 1  # a, (w', w), chall
    return {0: common + 2 * m + 3 * m * log_q, 1: common + m * (log_q + 2)}


def sat_round_bits(n: int, m: int, log_q: float) -> float:
    """Expected bits per round under a uniform challenge, log2(Q) bits per element."""
    branches = sat_round_bits_by_challenge(n, m, log_q)
    return (branches[0] + branches[1]) / 2


def find_assignment(phi: Cnf3, limit: int = 2**20):
    """Brute-force satisfying assignment, or None."""
    if 2**phi.n > limit:
        raise ValueError(f"2**{phi.n} assignments exceed the brute-force limit")
    for bits in itertools.product((0, 1), repeat=phi.n):
        if evaluate(phi, bits):
            return bits
    return None


def random_satisfiable(n: int, m: int, rng: random.Random):
    """Random 3-CNF with a planted assignment; returns (phi, assignment)."""
    assignment = tuple(rng.getrandbits(1) for _ in range(n))
    clauses = []
    for _ in range(m):
        vars_ = rng.sample(range(1, n + 1), 3) if n >= 3 else [rng.randint(1, n) for _ in range(3)]
        clause = [Literal(v, bool(rng.getrandbits(1))) for v in vars_]
        if not any(lit.value(assignment) for lit in clause):
            j = rng.randrange(3)
            clause[j] = Literal(clause[j].var, not clause[j].negated)
        clauses.append(tuple(clause))
    return Cnf3(n, tuple(clauses)), assignment


# -- DIMACS ------------------------------------------------------------------
#
#   c comment
#   p cnf <n> <m>
#   <lit> <lit> <lit> 0        (exactly three literals per clause)
#   v <lit> ... 0              (optional assignment, SAT-competition style)


def parse_dimacs(text: str):
    """Parse a 3-CNF; returns ``(phi, assignment or None)``."""
    n = m = None
    clauses = []
    pending: list[int] = []
    assignment = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf" or n is not None:
                raise ValueError(f"line {lineno}: invalid problem line {line!r}")
            n, m = int(parts[2]), int(parts[3])
            continue
        if n is None:
            raise ValueError(f"line {lineno}: clause before problem line")
        if line.startswith("v"):
            lits = [int(t) for t in line.split()[1:]]
            if assignment is None:
                assignment = [None] * n
            for lit in lits:
                if lit == 0:
                    continue
                if not 1 <= abs(lit) <= n:
                    raise ValueError(f"line {lineno}: assignment literal {lit} out of range")
                assignment[abs(lit) - 1] = int(lit > 0)
            continue
        for tok in line.split():
            lit = int(tok)
            if lit != 0:
                pending.append(lit)
                continue
            if len(pending) != 3:
                raise ValueError(f"line {lineno}: clause with {len(pending)} literals, only 3-CNF is supported")
            clauses.append(tuple(Literal(abs(l), l < 0) for l in pending))
            pending = []
    if n is None:
        raise ValueError("missing 'p cnf' problem line")
    if pending:
        raise ValueError("last clause is not terminated by 0")
    if len(clauses) != m:
        raise ValueError(f"problem line declares {m} clauses, found {len(clauses)}")
    if assignment is not None:
        if None in assignment:
            raise ValueError("assignment does not cover every variable")
        assignment = tuple(assignment)
    return Cnf3(n, tuple(clauses)), assignment


def dump_dimacs(phi: Cnf3, assignment=None) -> str:
    lines = [f"p cnf {phi.n} {phi.m}"]
    for clause in phi.clauses:
        lines.append(" ".join(str(-l.var if l.negated else l.var) for l in clause) + " 0")
    if assignment is not None:
        lits = [str(j if b else -j) for j, b in enumerate(assignment, 1)]
        lines.append("v " + " ".join(lits) + " 0")
    return "\n".join(lines) + "\n"


def load_dimacs(path: str | Path):
    return parse_dimacs(Path(path).read_text())
