import random
from collections import Counter
from fractions import Fraction

import pytest

from relzk import subset_sum as ss
from relzk import three_sat as sat
from relzk import zk_sim
from relzk.field import FieldCtx
from relzk.protocols import SubsetSumProtocol, ThreeSatProtocol
from relzk.zk_sim import (
    SpaceTooLarge,
    VerifierStrategy,
    check_distribution,
    complete_subset_sum_view,
    complete_three_sat_view,
    simulate,
    simulate_subset_sum,
    simulate_three_sat,
    total_variation,
    verifier_family,
    view_distribution,
)

L = sat.Literal
F5 = FieldCtx(5)


def tiny_ss():
    return SubsetSumProtocol(ss.SubsetSumInstance((1, 2), 3), F5), ss.SubsetSumWitness((1, 1))


def tiny_sat():
    return ThreeSatProtocol(sat.Cnf3(1, ((L(1),) * 3,)), F5), (1,)


def test_forced_example_matches_honest_trace():
    inst = ss.SubsetSumInstance((3, 4), 7)
    resp1 = ss.P1Response((7, 1), (2, 10))
    view = complete_subset_sum_view(inst, 11, 2, resp1, 1, (0, 1))
    assert view.resp2 == ss.Chall1Response((0, 1), 3)
    # chall 0 recovers the honest keys exactly
    view0 = complete_subset_sum_view(inst, 11, 2, resp1, 0, (1, 0))
    assert view0.resp2 == ss.Chall0Response((1, 0), (1, 1), (2, 2))


def test_family_is_diverse():
    fam = verifier_family()
    assert len({v.name for v in fam}) >= 4
    proto, _ = tiny_ss()
    resp1 = ss.P1Response((1, 0), (0, 0))
    challs = {v.pick_chall(v.pick_a(5), resp1) for v in fam}
    assert challs == {0, 1}
    assert len({v.pick_a(5) for v in fam}) >= 3


@pytest.mark.parametrize("which", ["ss", "sat"])
def test_simulated_views_always_verify(which):
    rng = random.Random(0)
    if which == "ss":
        ctx = FieldCtx(10007)
        inst, _ = ss.generate_instance(8, ctx, rng)
        proto = SubsetSumProtocol(inst, ctx)
    else:
        phi, _ = sat.random_satisfiable(6, 9, rng)
        proto = ThreeSatProtocol(phi, FieldCtx(10007))
    for vstar in verifier_family(seed=1):
        for _ in range(100):
            view = simulate(proto, vstar, rng)
            assert proto.verify(proto.ctx(view.a), view.resp1, view.chall, view.resp2)


def test_simulators_need_no_witness():
    rng = random.Random(1)
    inst = ss.SubsetSumInstance((5, 7), 1)  # no witness exists
    vstar = verifier_family()[2]
    view = simulate_subset_sum(inst, FieldCtx(13), vstar, rng)
    assert ss.verify_round(FieldCtx(13)(view.a), inst, view.resp1, view.chall, view.resp2)
    phi = sat.Cnf3(1, ((L(1),) * 3, (L(1, True),) * 3))
    view = simulate_three_sat(phi, FieldCtx(13), vstar, rng)
    assert sat.sat_verify_round(FieldCtx(13)(view.a), phi, view.resp1, view.chall, view.resp2)


def test_sat_delta_matches_honest_rewrite():
    # honest delta_i = c_i +- c'_j with c = w - a*p, c' = w' - a*s'
    phi = sat.phi_prime()
    ctx = FieldCtx(101)
    rng = random.Random(3)
    proto = ThreeSatProtocol(phi, ctx)
    s = (1, 0, 1, 0, 0)
    for _ in range(50):
        st = proto.shared_state(rng)
        a = ctx.random_int(rng)
        resp1 = proto.p1(ctx(a), st, s)
        honest = proto.p2(0, st, s)
        sim = complete_three_sat_view(phi, 101, a, resp1, 0, st.perm.rotations)
        assert sim.resp2 == honest
        honest1 = proto.p2(1, st, s)
        sim1 = complete_three_sat_view(phi, 101, a, resp1, 1, tuple(f - 1 for f in honest1.f))
        assert sim1.resp2 == honest1


@pytest.mark.parametrize("setup", [tiny_ss, tiny_sat], ids=["subset-sum", "3sat"])
@pytest.mark.parametrize("vstar", verifier_family(), ids=lambda v: v.name)
def test_exact_tv_zero(setup, vstar):
    proto, wit = setup()
    res = check_distribution(proto, wit, vstar, mode="exact")
    assert res.distance == 0 and isinstance(res.distance, Fraction) and res.passed
    assert res.size == (5**4 * 4 if proto.name == "subset-sum" else 5**4 * 3)


def test_adaptive_parity_verifier():
    proto, wit = tiny_ss()
    parity = VerifierStrategy("parity", lambda q: 2, lambda a, w: w[0] & 1)
    assert check_distribution(proto, wit, parity).distance == 0


@pytest.mark.parametrize("setup", [tiny_ss, tiny_sat], ids=["subset-sum", "3sat"])
def test_marginal_uniformity(setup):
    proto, wit = setup()
    vstar = verifier_family()[3]
    for simulated in (False, True):
        dist = view_distribution(proto, wit, vstar, simulated)
        marginal = Counter()
        for view, count in dist.items():
            marginal[view.resp1] += count
        n_vals = 2 * proto.inst.n if proto.name == "subset-sum" else proto.phi.n + 3 * proto.phi.m
        assert len(marginal) == 5**n_vals
        assert len(set(marginal.values())) == 1


def test_checker_detects_a_different_distribution():
    proto, wit = tiny_ss()
    other = SubsetSumProtocol(ss.SubsetSumInstance((1, 2), 1), F5)
    vstar = verifier_family()[1]
    honest = view_distribution(proto, wit, vstar, simulated=False)
    wrong = view_distribution(other, None, vstar, simulated=True)
    assert total_variation(honest, wrong) > 0


def test_exact_mode_size_guard():
    ctx = FieldCtx(17)
    inst, wit = ss.generate_instance(5, ctx, random.Random(0))
    with pytest.raises(SpaceTooLarge):
        check_distribution(SubsetSumProtocol(inst, ctx), wit, verifier_family()[0])
    with pytest.raises(ValueError):
        check_distribution(SubsetSumProtocol(inst, ctx), wit, verifier_family()[0], mode="bogus")


def test_total_variation_basics():
    assert total_variation(Counter("aab"), Counter("aab")) == 0
    assert total_variation(Counter("a"), Counter("b")) == 1
    assert total_variation(Counter("ab"), Counter("aa")) == Fraction(1, 2)


@pytest.mark.slow
def test_sampled_mode_n5():
    ctx = FieldCtx(17)
    inst = ss.SubsetSumInstance((1, 2, 3, 4, 5), 6)
    wit = ss.find_witness(inst)
    proto = SubsetSumProtocol(inst, ctx)
    res = check_distribution(proto, wit, verifier_family()[2], mode="sampled", samples=100_000, seed=1)
    assert res.size == 100_000
    assert res.distance <= res.noise_floor and res.passed


def test_sampled_mode_flags_a_broken_simulator(monkeypatch):
    proto, wit = tiny_ss()
    chall0 = verifier_family()[0]
    real = zk_sim.simulate
    monkeypatch.setattr(zk_sim, "simulate", lambda p, v, rng: real(p, chall0, rng))
    res = check_distribution(proto, wit, verifier_family()[1], mode="sampled", samples=2000)
    assert not res.passed and res.distance == 1.0
