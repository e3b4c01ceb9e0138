"""Witnessless simulators and view-distribution comparison.

A verifier strategy picks ``a`` first, then picks ``chall`` as a function
of ``a`` and P1's reply (verifier queries P1 before P2). The simulator
never sees the witness: P1's reply is uniform because the keys are
one-time pads, and P2's reply is solved backwards from it.

:func:`check_distribution` compares the honest and simulated view
distributions by total variation distance, either exactly (full
enumeration of all randomness, tiny parameters) or from samples.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

from . import subset_sum as ss
from . import three_sat as sat
from .field import FieldCtx
from .protocols import SubsetSumProtocol, ThreeSatProtocol

__all__ = [
    "DistributionCheck",
    "SpaceTooLarge",
    "VerifierStrategy",
    "ViewSample",
    "check_distribution",
    "complete_subset_sum_view",
    "complete_three_sat_view",
    "default_feature",
    "honest_view",
    "simulate",
    "simulate_subset_sum",
    "simulate_three_sat",
    "total_variation",
    "verifier_family",
    "view_distribution",
]

MAX_ATOMS = 10**7


class SpaceTooLarge(ValueError):
    pass


class ViewSample(NamedTuple):
    a: int
    resp1: object
    chall: int
    resp2: object


@dataclass(frozen=True)
class VerifierStrategy:
    """Deterministic, possibly adaptive, classical verifier.

    ``choose_chall`` sees ``a`` and P1's reply flattened to a tuple of
    residues (``w0 + w1`` or ``w' + w``).
    """

    name: str
    choose_a: Callable[[int], int]
    choose_chall: Callable[[int, tuple[int, ...]], int]

    def pick_a(self, q: int) -> int:
        return self.choose_a(q) % q

    def pick_chall(self, a: int, resp1) -> int:
        return self.choose_chall(a, _flat(resp1)) & 1


def _flat(resp1) -> tuple[int, ...]:
    if isinstance(resp1, ss.P1Response):
        return resp1.w0 + resp1.w1
    return resp1.w_prime + resp1.w


def _hash_bit(seed: int, a: int, values) -> int:
    data = repr((seed, a, tuple(values))).encode()
    return hashlib.sha256(data).digest()[0] & 1


def verifier_family(seed: int = 0) -> list[VerifierStrategy]:
    """Deterministic verifiers covering both challenges, several ``a``, and adaptivity."""
    return [
        VerifierStrategy("fixed-a1-chall0", lambda q: 1, lambda a, w: 0),
        VerifierStrategy("fixed-a2-chall1", lambda q: 2, lambda a, w: 1),
        VerifierStrategy("a0-parity-w0", lambda q: 0, lambda a, w: w[0] & 1),
        VerifierStrategy("a3-parity-sum", lambda q: 3, lambda a, w: (a + sum(w)) & 1),
        VerifierStrategy("last-a-hash", lambda q: q - 1, lambda a, w: _hash_bit(seed, a, w)),
    ]


def honest_view(protocol, witness, vstar: VerifierStrategy, rng: random.Random) -> ViewSample:
    st = protocol.shared_state(rng)
    return _honest_from_state(protocol, witness, vstar, st)


def _honest_from_state(protocol, witness, vstar, st) -> ViewSample:
    ctx = protocol.ctx
    a = vstar.pick_a(ctx.modulus)
    resp1 = protocol.p1(ctx(a), st, witness)
    chall = vstar.pick_chall(a, resp1)
    return ViewSample(a, resp1, chall, protocol.p2(chall, st, witness))


def complete_subset_sum_view(inst, q: int, a: int, resp1: ss.P1Response, chall: int, bits) -> ViewSample:
    """Simulated view from a chosen P1 reply and the simulator's coin ``bits`` (z or x)."""
    if chall == 0:
        z = bits
        c0 = tuple((w - a * si * zi) % q for w, si, zi in zip(resp1.w0, inst.s, z))
        c1 = tuple((w - a * si * (1 - zi)) % q for w, si, zi in zip(resp1.w1, inst.s, z))
        return ViewSample(a, resp1, 0, ss.Chall0Response(z, c0, c1))
    x = bits
    selected = sum(w1 if xi else w0 for w0, w1, xi in zip(resp1.w0, resp1.w1, x))
    return ViewSample(a, resp1, 1, ss.Chall1Response(x, (selected - inst.k * a) % q))


def simulate_subset_sum(
    inst: ss.SubsetSumInstance, ctx: FieldCtx, vstar: VerifierStrategy, rng: random.Random
) -> ViewSample:
    q, n = ctx.modulus, inst.n
    a = vstar.pick_a(q)
    resp1 = ss.P1Response(ctx.random_vector(rng, n), ctx.random_vector(rng, n))
    chall = vstar.pick_chall(a, resp1)
    bits = tuple(rng.getrandbits(1) for _ in range(n))
    return complete_subset_sum_view(inst, q, a, resp1, chall, bits)


def complete_three_sat_view(
    phi: sat.Cnf3, q: int, a: int, resp1: sat.SatP1Response, chall: int, choice
) -> ViewSample:
    """Simulated view; ``choice`` holds per-clause values in {0, 1, 2} (rotation or f - 1)."""
    w, wp = resp1.w, resp1.w_prime
    if chall == 0:
        perm = sat.CyclicPerm(choice)
        permuted = sat.apply_perm(perm, phi)
        delta = []
        for i in range(3 * phi.m):
            lit = permuted.literal_at(i)
            wj = wp[lit.var - 1]
            delta.append((w[i] + wj - a) % q if lit.negated else (w[i] - wj) % q)
        return ViewSample(a, resp1, 0, sat.SatChall0Response(perm, tuple(delta)))
    f = tuple(r + 1 for r in choice)
    gamma = tuple((w[3 * i + fi - 1] - a) % q for i, fi in enumerate(f))
    return ViewSample(a, resp1, 1, sat.SatChall1Response(f, gamma))


def simulate_three_sat(phi: sat.Cnf3, ctx: FieldCtx, vstar: VerifierStrategy, rng: random.Random) -> ViewSample:
    q = ctx.modulus
    a = vstar.pick_a(q)
    resp1 = sat.SatP1Response(ctx.random_vector(rng, phi.n), ctx.random_vector(rng, 3 * phi.m))
    chall = vstar.pick_chall(a, resp1)
    choice = tuple(rng.randrange(3) for _ in range(phi.m))
    return complete_three_sat_view(phi, q, a, resp1, chall, choice)


def simulate(protocol, vstar: VerifierStrategy, rng: random.Random) -> ViewSample:
    if isinstance(protocol, SubsetSumProtocol):
        return simulate_subset_sum(protocol.inst, protocol.ctx, vstar, rng)
    if isinstance(protocol, ThreeSatProtocol):
        return simulate_three_sat(protocol.phi, protocol.ctx, vstar, rng)
    raise TypeError(f"unsupported protocol {type(protocol).__name__}")


def _atoms(protocol) -> int:
    q = protocol.ctx.modulus
    if isinstance(protocol, SubsetSumProtocol):
        n = protocol.inst.n
        return q ** (2 * n) * 2**n
    phi = protocol.phi
    return q ** (phi.n + 3 * phi.m) * 3**phi.m


def view_distribution(protocol, witness, vstar: VerifierStrategy, simulated: bool) -> Counter:
    """Exact view distribution as unnormalised counts over equally likely atoms.

    Honest atoms are the provers' shared randomness; simulated atoms are
    P1's uniform reply together with the simulator's own coin. Both
    spaces have the same size, reported by the sum of the counts.
    """
    atoms = _atoms(protocol)
    if atoms > MAX_ATOMS:
        raise SpaceTooLarge(f"{atoms} atoms exceed the enumeration limit {MAX_ATOMS}")
    ctx = protocol.ctx
    q = ctx.modulus
    field_range = range(q)
    counts: Counter = Counter()
    if isinstance(protocol, SubsetSumProtocol):
        inst, n = protocol.inst, protocol.inst.n
        for vec in itertools.product(field_range, repeat=2 * n):
            for bits in itertools.product((0, 1), repeat=n):
                if simulated:
                    a = vstar.pick_a(q)
                    resp1 = ss.P1Response(vec[:n], vec[n:])
                    view = complete_subset_sum_view(inst, q, a, resp1, vstar.pick_chall(a, resp1), bits)
                else:
                    st = ss.ProverSharedState(ctx, vec[:n], vec[n:], bits)
                    view = _honest_from_state(protocol, witness, vstar, st)
                counts[view] += 1
        return counts
    phi = protocol.phi
    n, m = phi.n, phi.m
    for vec in itertools.product(field_range, repeat=n + 3 * m):
        for choice in itertools.product(range(3), repeat=m):
            if simulated:
                a = vstar.pick_a(q)
                resp1 = sat.SatP1Response(vec[:n], vec[n:])
                view = complete_three_sat_view(phi, q, a, resp1, vstar.pick_chall(a, resp1), choice)
            else:
                st = sat.SatSharedState(ctx, sat.CyclicPerm(choice), vec[n:], vec[:n])
                view = _honest_from_state(protocol, witness, vstar, st)
            counts[view] += 1
    return counts


def total_variation(p: Counter, q: Counter) -> Fraction:
    """TV distance between two count tables, each normalised by its own total."""
    np_, nq = sum(p.values()), sum(q.values())
    diff = sum(abs(Fraction(p.get(k, 0), np_) - Fraction(q.get(k, 0), nq)) for k in p.keys() | q.keys())
    return diff / 2


def default_feature(view: ViewSample):
    """Low-cardinality projection used in sampled mode."""
    r2 = view.resp2
    if isinstance(r2, ss.Chall0Response):
        discrete, first = r2.z, r2.c0[0]
    elif isinstance(r2, ss.Chall1Response):
        discrete, first = r2.x, r2.c_prime
    elif isinstance(r2, sat.SatChall0Response):
        discrete, first = r2.perm.rotations, r2.delta[0]
    else:
        discrete, first = r2.f, r2.gamma[0]
    return view.chall, discrete, _flat(view.resp1)[0], first


@dataclass(frozen=True)
class DistributionCheck:
    distance: Fraction | float
    mode: str
    size: int  # atoms enumerated (exact) or samples per side (sampled)
    noise_floor: float | None = None

    @property
    def passed(self) -> bool:
        if self.mode == "exact":
            return self.distance == 0
        return self.distance <= self.noise_floor


def check_distribution(
    protocol,
    witness,
    vstar: VerifierStrategy,
    mode: str = "exact",
    samples: int = 100_000,
    seed: int = 0,
    feature: Callable[[ViewSample], object] = default_feature,
) -> DistributionCheck:
    """TV distance between honest and simulated verifier views.

    ``exact`` enumerates every atom and returns a Fraction. ``sampled``
    draws ``samples`` views per side, compares ``feature(view)`` counts,
    and reports a noise floor: the expected TV of two samples from the
    pooled distribution plus three standard deviations (bounded by
    ``1/sqrt(samples)`` since one sample moves the estimate by at most
    ``1/samples``).
    """
    if mode == "exact":
        honest = view_distribution(protocol, witness, vstar, simulated=False)
        simulated = view_distribution(protocol, witness, vstar, simulated=True)
        return DistributionCheck(total_variation(honest, simulated), "exact", sum(honest.values()))
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    rng_h = random.Random(f"{seed}:honest")
    rng_s = random.Random(f"{seed}:simulated")
    honest = Counter(feature(honest_view(protocol, witness, vstar, rng_h)) for _ in range(samples))
    simulated = Counter(feature(simulate(protocol, vstar, rng_s)) for _ in range(samples))
    tv = float(total_variation(honest, simulated))
    pooled = honest + simulated
    total = 2 * samples
    expected = 0.5 * sum(
        math.sqrt(2 * (c / total) * (1 - c / total) / samples * 2 / math.pi) for c in pooled.values()
    )
    return DistributionCheck(tv, "sampled", samples, expected + 3 / math.sqrt(samples))
