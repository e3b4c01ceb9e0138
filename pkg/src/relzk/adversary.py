"""Cheating provers and exhaustive desk-scale soundness.

Cheating provers get no witness. They still share randomness and follow
channel discipline, so they plug into :func:`relzk.session.run_protocol`
like honest ones.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import subset_sum as ss
from . import three_sat as sat
from .protocols import SubsetSumProtocol, ThreeSatProtocol
from .session import P1, P2, V1, V2, HonestVerifier1, HonestVerifier2, Outgoing, Party, _Prover

__all__ = [
    "CheatStrategy",
    "StrategyTooLarge",
    "double_answers",
    "exhaustive_soundness",
    "strategy_answer_chall0",
    "strategy_guess_chall",
]

MAX_STRATEGIES = 2**24


class StrategyTooLarge(ValueError):
    pass


@dataclass
class CheatStrategy:
    label: str
    p1: Party
    p2: Party

    def parties(self, v1: Party | None = None, v2: Party | None = None) -> dict:
        return {V1: v1 or HonestVerifier1(), V2: v2 or HonestVerifier2(), P1: self.p1, P2: self.p2}


class _Cheater(_Prover):
    """Witnessless prover; per-round plan drawn from the shared seed."""

    def __init__(self, guess: int):
        super().__init__(witness=None)
        self.guess = guess

    def plan(self, rnd: int):
        rng = random.Random()
        rng.seed(self.shared_seed + b"plan" + rnd.to_bytes(8, "big"))
        proto = self.protocol
        if isinstance(proto, SubsetSumProtocol):
            st = proto.shared_state(rng)
            return st, tuple(rng.getrandbits(1) for _ in range(proto.inst.n))
        if isinstance(proto, ThreeSatProtocol):
            st = proto.shared_state(rng)
            fake = tuple(rng.getrandbits(1) for _ in range(proto.phi.n))
            return st, fake
        raise TypeError(f"unsupported protocol {type(proto).__name__}")


class _CheatP1(_Cheater):
    role = P1

    def receive(self, rnd, step, a):
        st, fake = self.plan(rnd)
        proto = self.protocol
        q = proto.ctx.modulus
        if isinstance(proto, SubsetSumProtocol):
            if self.guess == 0:
                return [Outgoing(V1, "commit", ss.p1_respond(a, proto.inst, st))]
            # Rows whose selected entries (row x_i at i) hold k, 0, 0, ...:
            # they open to a*k + c' for the planned x.
            x, n = fake, proto.inst.n
            b0, b1 = [0] * n, [0] * n
            (b1 if x[0] else b0)[0] = proto.inst.k
            w0 = tuple((a.value * b + c) % q for b, c in zip(b0, st.c0))
            w1 = tuple((a.value * b + c) % q for b, c in zip(b1, st.c1))
            return [Outgoing(V1, "commit", ss.P1Response(w0, w1))]
        phi = proto.phi
        if self.guess == 0:
            # Honest commitment to some assignment: every consistency check holds.
            p = sat.formula_bits(sat.apply_perm(st.perm, phi), fake)
        else:
            p = (1,) * (3 * phi.m)
        return [Outgoing(V1, "commit", sat.sat_p1_respond(a, st, fake, p))]


class _CheatP2(_Cheater):
    role = P2

    def receive(self, rnd, step, chall):
        st, fake = self.plan(rnd)
        proto = self.protocol
        if isinstance(proto, SubsetSumProtocol):
            if chall == 0:
                return [Outgoing(V2, "open", ss.Chall0Response(st.z, st.c0, st.c1))]
            # Keys of the planned selection; only right if P1 tailored for chall 1.
            c_prime = sum(c1 if xi else c0 for c0, c1, xi in zip(st.c0, st.c1, fake)) % proto.ctx.modulus
            return [Outgoing(V2, "open", ss.Chall1Response(fake, c_prime))]
        phi = proto.phi
        if chall == 0:
            return [Outgoing(V2, "open", sat.sat_p2_respond(0, st, phi, None))]
        if self.guess == 1:
            f = (1,) * phi.m
        else:
            # Point at a committed 1 where one exists; clauses falsified by
            # the fake assignment cannot be opened.
            permuted = sat.apply_perm(st.perm, phi)
            f = tuple(
                next((j for j, lit in enumerate(cl, 1) if lit.value(fake)), 1) for cl in permuted.clauses
            )
        gamma = tuple(st.c[3 * i + fi - 1] for i, fi in enumerate(f))
        return [Outgoing(V2, "open", sat.SatChall1Response(f, gamma))]


def strategy_answer_chall0(protocol=None) -> CheatStrategy:
    """Commit honestly to random data; answer chall 0 perfectly, guess on chall 1."""
    return CheatStrategy("answer-chall0", _CheatP1(0), _CheatP2(0))


def strategy_guess_chall(protocol=None, guess: int = 0) -> CheatStrategy:
    """Commit to data tailored to the guessed challenge.

    ``guess=1`` commits to values whose planned selection opens correctly
    for chall 1 (for 3SAT: every committed literal bit is 1), which the
    chall-0 audit then catches.
    """
    if guess not in (0, 1):
        raise ValueError("guess must be 0 or 1")
    return CheatStrategy(f"guess-chall{guess}", _CheatP1(guess), _CheatP2(guess))


def double_answers(protocol, a: int, rng: random.Random):
    """P1 message plus P2 answers to both challenges that all verify under ``a``.

    Built with knowledge of ``a``, which is what answering both challenges
    amounts to; on an unsatisfiable instance the extractor recovers ``a``
    from the two answers alone.
    """
    ctx = protocol.ctx
    q = ctx.modulus
    if isinstance(protocol, SubsetSumProtocol):
        inst = protocol.inst
        st = ss.sample_shared_state(ctx, inst.n, rng)
        resp1 = ss.p1_respond(ctx(a), inst, st)
        x = tuple(rng.getrandbits(1) for _ in range(inst.n))
        selected = sum(w1 if xi else w0 for w0, w1, xi in zip(resp1.w0, resp1.w1, x))
        r0 = ss.Chall0Response(st.z, st.c0, st.c1)
        r1 = ss.Chall1Response(x, (selected - a * inst.k) % q)
        return resp1, r0, r1
    if isinstance(protocol, ThreeSatProtocol):
        phi = protocol.phi
        w_prime = ctx.random_vector(rng, phi.n)
        w = ctx.random_vector(rng, 3 * phi.m)
        perm = sat.random_perm(phi.m, rng)
        r0 = sat.SatChall0Response(perm, _deltas(phi, perm, w, w_prime, a, q))
        f = tuple(rng.randint(1, 3) for _ in range(phi.m))
        r1 = sat.SatChall1Response(f, tuple((w[3 * i + fi - 1] - a) % q for i, fi in enumerate(f)))
        return sat.SatP1Response(w_prime, w), r0, r1
    raise TypeError(f"unsupported protocol {type(protocol).__name__}")


def _deltas(phi, perm, w, w_prime, a, q) -> tuple[int, ...]:
    permuted = sat.apply_perm(perm, phi)
    out = []
    for i in range(3 * phi.m):
        lit = permuted.literal_at(i)
        wj = w_prime[lit.var - 1]
        out.append((w[i] + wj - a) % q if lit.negated else (w[i] - wj) % q)
    return tuple(out)


def exhaustive_soundness(protocol) -> Fraction:
    """Exact best single-round acceptance probability of classical cheating provers.

    P1 sees ``a`` and picks its message to best respond to P2's fixed
    deterministic answers ``(r0, r1)``. The chall-0 answer pins down an
    affine set of accepted P1 messages and so does the chall-1 answer;
    both are non-empty, so for each ``a`` P1 wins both challenges if the
    sets meet and exactly one otherwise. The value of ``(r0, r1)`` is
    therefore ``(1/2Q) * sum_a (1 + [sets meet at a])``, maximised over
    all P2 strategies.
    """
    if isinstance(protocol, SubsetSumProtocol):
        return _exhaustive_subset_sum(protocol)
    if isinstance(protocol, ThreeSatProtocol):
        return _exhaustive_three_sat(protocol)
    raise TypeError(f"unsupported protocol {type(protocol).__name__}")


def _exhaustive_subset_sum(protocol: SubsetSumProtocol) -> Fraction:
    # Enumerates every P2 strategy (z, c0, c1) x (x, c'). For chall 0 the
    # accepted P1 message is the single point w* = a*(s*z) + c; it also
    # passes chall 1 iff a*T + C == a*k + c' with T = sum s_i (x_i ^ z_i)
    # and C = sum_i c_{x_i, i}.
    inst, q, n = protocol.inst, protocol.ctx.modulus, protocol.inst.n
    count = 4**n * q ** (2 * n + 1)
    if count > MAX_STRATEGIES:
        raise StrategyTooLarge(f"{count} P2 strategies exceed {MAX_STRATEGIES}")
    grid = np.array(list(itertools.product(range(q), repeat=2 * n)), dtype=np.int64)
    c0, c1 = grid[:, :n], grid[:, n:]
    c_prime = np.arange(q, dtype=np.int64)
    best = 0
    for z in itertools.product((0, 1), repeat=n):
        for x in itertools.product((0, 1), repeat=n):
            t = sum(si for si, xi, zi in zip(inst.s, x, z) if xi ^ zi)
            C = sum(c1[:, i] if x[i] else c0[:, i] for i in range(n))
            gap = (c_prime[None, :] - C[:, None]) % q  # c' - C
            hits = np.zeros(gap.shape, dtype=np.int64)
            for a in range(q):
                hits += (a * (t - inst.k) - gap) % q == 0
            best = max(best, int(hits.max()))
    return Fraction(q + best, 2 * q)


def _exhaustive_three_sat(protocol: ThreeSatProtocol) -> Fraction:
    # Only the unveiled literal of each clause (fixed by Pi and f) and
    # d_i = delta[p_i] - gamma_i matter: the sets meet at ``a`` iff some w'
    # has w'_j = d_i (literal negated) or w'_j = a - d_i (plain) for every
    # clause. Remaining delta entries never constrain P1.
    phi, q = protocol.phi, protocol.ctx.modulus
    m = phi.m
    count = 3**m * q**m
    if count > MAX_STRATEGIES:
        raise StrategyTooLarge(f"{count} reduced P2 strategies exceed {MAX_STRATEGIES}")
    best = 0
    for choice in itertools.product(range(3), repeat=m):
        lits = [phi.clauses[i][choice[i]] for i in range(m)]
        for d in itertools.product(range(q), repeat=m):
            hits = 0
            for a in range(q):
                need: dict[int, int] = {}
                ok = True
                for lit, di in zip(lits, d):
                    val = di if lit.negated else (a - di) % q
                    if need.setdefault(lit.var, val) != val:
                        ok = False
                        break
                hits += ok
            best = max(best, hits)
    return Fraction(q + best, 2 * q)
