import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relzk import three_sat as sat
from relzk.adversary import double_answers
from relzk.field import FieldCtx
from relzk.protocols import ThreeSatProtocol
from relzk.three_sat import Literal as L

F11 = FieldCtx(11)
S_PRIME = (1, 0, 1, 0, 0)
PI_EXAMPLE = sat.CyclicPerm((1, 2, 1, 0))


def unsat_pair():
    return sat.Cnf3(1, ((L(1),) * 3, (L(1, True),) * 3))


def test_evaluate():
    phi = sat.phi_prime()
    assert sat.evaluate(phi, S_PRIME)
    assert not sat.evaluate(phi, (0,) * 5)
    assert sat.evaluate(sat.Cnf3(3, ()), (0, 0, 0))
    with pytest.raises(ValueError):
        sat.evaluate(phi, (1, 0))


def test_witness_positions():
    assert sat.witness_positions(sat.phi_prime(), S_PRIME) == (1, 2, 1, 1)
    assert sat.witness_positions(sat.Cnf3(1, ((L(1),) * 3,)), (1,)) == (1,)
    with pytest.raises(ValueError):
        sat.witness_positions(sat.phi_prime(), (0,) * 5)


def test_permutation_example():
    permuted = sat.apply_perm(PI_EXAMPLE, sat.phi_prime())
    assert permuted.clauses == (
        (L(5), L(3), L(2, True)),
        (L(4, True), L(5, True), L(1, True)),
        (L(5), L(1), L(2, True)),
        (L(1), L(4), L(2)),
    )
    assert sat.apply_perm_positions(PI_EXAMPLE, (1, 2, 1, 1)) == (2, 1, 2, 1)
    assert sat.formula_bits(permuted, S_PRIME)[:3] == (0, 1, 1)


def test_identity_permutation():
    phi = sat.phi_prime()
    ident = sat.CyclicPerm((0,) * 4)
    assert sat.apply_perm(ident, phi) == phi
    assert sat.apply_perm_positions(ident, (1, 2, 3, 1)) == (1, 2, 3, 1)
    with pytest.raises(ValueError):
        sat.CyclicPerm((3,))
    with pytest.raises(ValueError):
        sat.apply_perm(sat.CyclicPerm((0,)), phi)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_permutations_exhaustive(m):
    rng = random.Random(m)
    phi, s = sat.random_satisfiable(6, m, rng)
    e = sat.witness_positions(phi, s)
    position_counts = [Counter() for _ in range(m)]
    for perm in sat.all_perms(m):
        permuted = sat.apply_perm(perm, phi)
        assert sat.evaluate(permuted, s)
        pe = sat.apply_perm_positions(perm, e)
        bits = sat.formula_bits(permuted, s)
        for i, f in enumerate(pe):
            assert permuted.clauses[i][f - 1] == phi.clauses[i][e[i] - 1]
            assert bits[3 * i + f - 1] == 1
            position_counts[i][f] += 1
    # Pi(e)_i is uniform on {1, 2, 3}
    for counts in position_counts:
        assert counts == Counter({1: 3 ** (m - 1), 2: 3 ** (m - 1), 3: 3 ** (m - 1)})


def test_formula_bits_all_true():
    phi = sat.Cnf3(2, ((L(1), L(2), L(1)), (L(2), L(2), L(1))))
    assert sat.formula_bits(phi, (1, 1)) == (1,) * 6


def test_p1_examples():
    st0 = sat.SatSharedState(F11, sat.CyclicPerm((0,)), c=(1, 2, 3), c_prime=(3, 4))
    resp = sat.sat_p1_respond(F11(2), st0, (1, 0), (0, 0, 0))
    assert resp.w_prime == (5, 4)
    assert resp.w == st0.c
    assert sat.sat_p1_respond(F11(0), st0, (1, 0), (1, 0, 1)) == sat.SatP1Response(st0.c_prime, st0.c)
    with pytest.raises(ValueError):
        sat.sat_p1_respond(F11(1), st0, (1,), (0, 0, 0))


def test_delta_examples():
    st0 = sat.SatSharedState(F11, sat.CyclicPerm((0,)), c=(5, 0, 0), c_prime=(0, 4))
    negated = sat.Cnf3(2, ((L(2, True), L(1), L(1)),))
    plain = sat.Cnf3(2, ((L(2), L(1), L(1)),))
    assert sat.sat_p2_respond(0, st0, negated, None).delta[0] == 9
    assert sat.sat_p2_respond(0, st0, plain, None).delta[0] == 1


def test_chall1_on_running_example():
    phi = sat.phi_prime()
    rng = random.Random(2)
    c = F11.random_vector(rng, 12)
    st0 = sat.SatSharedState(F11, PI_EXAMPLE, c=c, c_prime=F11.random_vector(rng, 5))
    resp = sat.sat_p2_respond(1, st0, phi, sat.witness_positions(phi, S_PRIME))
    assert resp.f == (2, 1, 2, 1)
    assert resp.gamma == tuple(c[3 * i + f - 1] for i, f in enumerate(resp.f))


def honest_round(phi, s, ctx, rng, chall):
    proto = ThreeSatProtocol(phi, ctx)
    st0 = proto.shared_state(rng)
    a = ctx(ctx.random_int(rng))
    resp1 = proto.p1(a, st0, s)
    return a, resp1, proto.p2(chall, st0, s), st0


def test_completeness_running_example():
    phi, ctx, rng = sat.phi_prime(), sat.sat_choose_params(4, 5), random.Random(0)
    for _ in range(100):
        for chall in (0, 1):
            a, resp1, resp2, _ = honest_round(phi, S_PRIME, ctx, rng, chall)
            assert sat.sat_verify_round(a, phi, resp1, chall, resp2)


@settings(max_examples=500, deadline=None)
@given(st.integers(1, 10), st.integers(1, 15), st.integers(0, 2**32), st.sampled_from([0, 1]))
def test_completeness_random(n, m, seed, chall):
    rng = random.Random(seed)
    phi, s = sat.random_satisfiable(n, m, rng)
    assert sat.evaluate(phi, s)
    ctx = FieldCtx(10007)
    a, resp1, resp2, st0 = honest_round(phi, s, ctx, rng, chall)
    assert sat.sat_verify_round(a, phi, resp1, chall, resp2)
    if chall == 0:
        # negated: w_i + w'_j = a + delta_i; plain: w_i - w'_j = delta_i
        permuted = sat.apply_perm(st0.perm, phi)
        q = ctx.modulus
        for i in range(3 * m):
            lit = permuted.literal_at(i)
            wi, wj = resp1.w[i], resp1.w_prime[lit.var - 1]
            if lit.negated:
                assert (wi + wj) % q == (a.value + resp2.delta[i]) % q
            else:
                assert (wi - wj) % q == resp2.delta[i]


def test_verify_rejections_name_the_position():
    phi, ctx, rng = sat.phi_prime(), FieldCtx(10007), random.Random(3)
    a, resp1, resp2, _ = honest_round(phi, S_PRIME, ctx, rng, 0)
    for i in range(12):
        delta = list(resp2.delta)
        delta[i] = (delta[i] + 1) % ctx.modulus
        verdict = sat.sat_verify_round(a, phi, resp1, 0, sat.SatChall0Response(resp2.perm, tuple(delta)))
        assert not verdict and verdict.reason.startswith(f"position {i + 1} ")


def test_chall1_pointing_at_zero_rejects():
    phi, ctx, rng = sat.phi_prime(), FieldCtx(10007), random.Random(4)
    rejected = 0
    for _ in range(200):
        a, resp1, resp2, st0 = honest_round(phi, S_PRIME, ctx, rng, 1)
        bits = sat.formula_bits(sat.apply_perm(st0.perm, phi), S_PRIME)
        i = rng.randrange(4)
        zeros = [j for j in (1, 2, 3) if bits[3 * i + j - 1] == 0]
        if not zeros:
            continue
        f = list(resp2.f)
        f[i] = zeros[0]
        gamma = list(resp2.gamma)
        gamma[i] = st0.c[3 * i + f[i] - 1]
        verdict = sat.sat_verify_round(a, phi, resp1, 1, sat.SatChall1Response(tuple(f), tuple(gamma)))
        assert not verdict and verdict.reason.startswith(f"clause {i + 1}")
        rejected += 1
    assert rejected > 50


def test_verify_malformed():
    phi = sat.phi_prime()
    resp1 = sat.SatP1Response((0,) * 5, (0,) * 12)
    assert not sat.sat_verify_round(F11(1), phi, resp1, 1, sat.SatChall1Response((4, 1, 1, 1), (0,) * 4))
    assert not sat.sat_verify_round(F11(1), phi, resp1, 0, sat.SatChall1Response((1,) * 4, (0,) * 4))
    assert not sat.sat_verify_round(F11(1), phi, sat.SatP1Response((0,), (0,) * 12), 1, None)
    assert not sat.sat_verify_round(F11(1), phi, resp1, 5, None)


def test_extract_hand_trace():
    phi = unsat_pair()
    # keys all zero, s' = (0), a = 7; clause 1 shows x1 at position 1, clause 2 shows -x1 at 1
    a = 7
    w_prime = (0,)
    w = (a, 0, 0, a, 0, 0)  # committed "ones" at the two pointed positions
    perm = sat.CyclicPerm((0, 0))
    delta = tuple((w[i] - w_prime[0]) % 11 if i < 3 else (w[i] + w_prime[0] - a) % 11 for i in range(6))
    r0 = sat.SatChall0Response(perm, delta)
    r1 = sat.SatChall1Response((1, 1), ((w[0] - a) % 11, (w[3] - a) % 11))
    resp1 = sat.SatP1Response(w_prime, w)
    assert sat.sat_verify_round(F11(a), phi, resp1, 0, r0)
    assert sat.sat_verify_round(F11(a), phi, resp1, 1, r1)
    assert sat.sat_extract_a(F11, phi, r0, r1) == a
    assert sat.reconstruct_assignment(phi, r0, r1) is None


def test_extract_no_conflict_for_honest_answers():
    phi, ctx, rng = sat.phi_prime(), FieldCtx(10007), random.Random(5)
    for _ in range(50):
        proto = ThreeSatProtocol(phi, ctx)
        st0 = proto.shared_state(rng)
        r0, r1 = proto.p2(0, st0, S_PRIME), proto.p2(1, st0, S_PRIME)
        assert sat.sat_extract_a(ctx, phi, r0, r1) is None
        assert sat.evaluate(phi, sat.reconstruct_assignment(phi, r0, r1))


def random_unsat(rng, n, m_extra):
    """Unsatisfiable 3-CNF: all 8 sign patterns over three variables plus random clauses."""
    clauses = [tuple(L(v, bool(bits >> k & 1)) for k, v in enumerate((1, 2, 3))) for bits in range(8)]
    for _ in range(m_extra):
        clauses.append(tuple(L(rng.randint(1, n), bool(rng.getrandbits(1))) for _ in range(3)))
    rng.shuffle(clauses)
    return sat.Cnf3(n, tuple(clauses))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), st.integers(3, 6), st.integers(0, 4))
def test_extraction_exact_on_unsatisfiable(seed, n, extra):
    rng = random.Random(seed)
    phi = random_unsat(rng, n, extra)
    assert sat.find_assignment(phi) is None
    ctx = FieldCtx(10007)
    proto = ThreeSatProtocol(phi, ctx)
    a = ctx.random_int(rng)
    resp1, r0, r1 = double_answers(proto, a, rng)
    assert sat.sat_verify_round(ctx(a), phi, resp1, 0, r0)
    assert sat.sat_verify_round(ctx(a), phi, resp1, 1, r1)
    assert sat.sat_extract_a(ctx, phi, r0, r1) == a


def test_choose_params():
    assert sat.sat_choose_params(4, 5).modulus >= 64 * 81 * 32768
    assert sat.sat_choose_params(1, 1).modulus == 1543
    assert sat.sat_choose_params(1, 1).modulus >= 1536
    with pytest.raises(ValueError):
        sat.sat_choose_params(0, 1)


def test_round_bits():
    split = sat.sat_round_bits_by_challenge(5, 4, 20.0)
    common = 20 + (5 + 12) * 20 + 1
    assert split == {0: common + 8 + 12 * 20, 1: common + 4 * 22}
    assert sat.sat_round_bits(5, 4, 20.0) == (split[0] + split[1]) / 2


def test_find_assignment():
    assert sat.find_assignment(unsat_pair()) is None
    assert sat.evaluate(sat.phi_prime(), sat.find_assignment(sat.phi_prime()))


def test_dimacs_round_trip():
    rng = random.Random(9)
    for _ in range(50):
        phi, s = sat.random_satisfiable(rng.randint(1, 8), rng.randint(1, 10), rng)
        assert sat.parse_dimacs(sat.dump_dimacs(phi, s)) == (phi, s)
        assert sat.parse_dimacs(sat.dump_dimacs(phi)) == (phi, None)


def test_dimacs_parse_with_comments(tmp_path):
    text = "c running example\np cnf 5 4\n3 -2 5 0\n-1 -4 -5 0\n1 -2 5 0 1 4 2 0\nv 1 -2 3 -4 -5 0\n"
    path = tmp_path / "phi.cnf"
    path.write_text(text)
    phi, s = sat.load_dimacs(path)
    assert phi == sat.phi_prime() and s == S_PRIME


@pytest.mark.parametrize(
    "text",
    [
        "1 2 3 0\n",
        "p cnf 3 1\n1 2 0\n",
        "p cnf 3 1\n1 2 3 1 0\n",
        "p cnf 3 1\n1 2 3\n",
        "p cnf 3 2\n1 2 3 0\n",
        "p cnf 3 1\n1 2 4 0\n",
        "p cnf 3 1\n1 2 3 0\nv 1 2 0\n",
        "p cnf 3 1\n1 2 3 0\nv 1 2 9 0\n",
        "",
    ],
)
def test_dimacs_errors(text):
    with pytest.raises(ValueError):
        sat.parse_dimacs(text)


def test_repeated_variable_in_clause():
    phi = sat.Cnf3(1, ((L(1), L(1, True), L(1)),))
    for s in itertools.product((0, 1), repeat=1):
        assert sat.evaluate(phi, s)
        assert sat.formula_bits(phi, s) == (s[0], 1 - s[0], s[0])
