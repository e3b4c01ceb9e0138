"""Command-line front end.

Subcommands: gen, prove, attack, bench, game-check, zk-check. Every
subcommand is deterministic in ``--seed`` (default ``$RELZK_SEED`` or 0);
``bench --throughput`` is the one opt-in timing measurement.

``--export PATH`` writes machine-readable results as ``key<TAB>value``
lines, one per result, in a fixed order.

Exit codes: 0 accept/pass, 1 reject/fail, 2 usage or configuration error.
For ``attack``, "pass" means the verifiers rejected the cheating provers.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

from . import adversary, games, session
from . import subset_sum as ss
from . import three_sat as sat
from . import zk_sim
from .field import FieldCtx
from .protocols import SubsetSumProtocol, ThreeSatProtocol

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PROTOCOLS = ("subset-sum", "3sat")


class ConfigError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("RELZK_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"RELZK_SEED must be an integer, got {raw!r}") from None


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


class Report:
    """Collects printed lines and exported key/value pairs."""

    def __init__(self, out):
        self.out = out
        self.pairs: list[tuple[str, object]] = []

    def line(self, text: str = "") -> None:
        print(text, file=self.out)

    def put(self, key: str, value) -> None:
        self.pairs.append((key, value))

    def export(self, path: str | None) -> None:
        if path:
            Path(path).write_text("".join(f"{k}\t{_fmt(v)}\n" for k, v in self.pairs))


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


# -- instances ---------------------------------------------------------------


def _field_for(args, protocol: str, size: dict, inst_sum: int = 0) -> FieldCtx:
    if args.Q is not None:
        return FieldCtx(args.Q)
    if protocol == "subset-sum":
        return ss.choose_params(size["n"], args.K, inst_sum)
    return sat.sat_choose_params(size["m"], args.K)


def _load(args, rng, unsat: bool = False):
    """Build (protocol, witness) from --instance or a seeded generator."""
    if args.protocol == "subset-sum":
        if args.instance:
            inst, wit = ss.load_instance(args.instance)
        else:
            n = args.n or 20
            gen_ctx = _field_for(args, "subset-sum", {"n": n})
            inst, wit = ss.generate_instance(n, gen_ctx, rng, nonempty=True)
            if unsat:
                # Larger than any subset sum, so no witness exists.
                inst, wit = ss.SubsetSumInstance(inst.s, inst.total + 1), None
        ctx = _field_for(args, "subset-sum", {"n": inst.n}, max(inst.total, inst.k))
        try:
            proto = SubsetSumProtocol(inst, ctx)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return proto, wit
    if args.instance:
        phi, assignment = sat.load_dimacs(args.instance)
    elif unsat:
        x = sat.Literal(1, False)
        phi, assignment = sat.Cnf3(1, ((x,) * 3, (sat.Literal(1, True),) * 3)), None
    elif args.n is None and args.m is None:
        phi = sat.phi_prime()
        assignment = sat.find_assignment(phi)
    else:
        phi, assignment = sat.random_satisfiable(args.n or 3, args.m or 2, rng)
    return ThreeSatProtocol(phi, _field_for(args, "3sat", {"m": phi.m})), assignment


# -- subcommands -------------------------------------------------------------


def cmd_gen(args, rep: Report) -> int:
    rng = session.derive_rng(args.seed, "gen")
    if args.protocol == "subset-sum":
        if args.instance:
            raise ConfigError("gen builds subset-sum instances from --n, not --instance")
        n = args.n or 20
        inst, wit = ss.generate_instance(n, _field_for(args, "subset-sum", {"n": n}), rng, nonempty=args.nonempty)
        text = ss.dump_instance(inst, wit)
        rep.put("n", inst.n)
        rep.put("k", inst.k)
    else:
        if args.instance:
            phi, assignment = sat.load_dimacs(args.instance)
            if assignment is None or not sat.evaluate(phi, assignment):
                rep.line("assignment missing or does not satisfy the formula")
                rep.put("valid", 0)
                return EXIT_FAIL
        else:
            phi, assignment = sat.random_satisfiable(args.n or 5, args.m or 10, rng)
        text = sat.dump_dimacs(phi, assignment)
        rep.put("n", phi.n)
        rep.put("m", phi.m)
    rep.put("valid", 1)
    if args.out:
        Path(args.out).write_text(text)
        rep.line(f"wrote {args.out}")
    else:
        rep.out.write(text)
    return EXIT_OK


def _soundness_exponent(K: int, rounds: int) -> float:
    return -rounds * math.log2(ss.soundness_error(K))


def cmd_prove(args, rep: Report) -> int:
    rng = session.derive_rng(args.seed, "instance")
    proto, witness = _load(args, rng)
    rounds = args.rounds or ss.rounds_needed(args.K, 100)
    if args.witnessless:
        parties = adversary.strategy_answer_chall0(proto).parties()
        label = "witnessless (answer-chall0)"
    else:
        if witness is None:
            raise ConfigError("instance has no witness; pass --witnessless to run without one")
        try:
            proto.check_witness(witness)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        parties = session.honest_parties(witness)
        label = "honest"
    t = session.run_protocol(proto, witness, rounds, parties=parties, seed=args.seed)
    acct = session.byte_accounting(t)
    if args.transcript_out:
        t.write(args.transcript_out)

    accepted_rounds = sum(map(bool, t.verdicts))
    rep.line(f"protocol        {proto.name} {' '.join(f'{k}={v}' for k, v in proto.size.items())}")
    rep.line(f"provers         {label}")
    rep.line(f"log2(Q)         {proto.log_q:.2f}")
    rep.line(f"rounds          {rounds}")
    rep.line("verdicts        " + "".join("1" if v else "0" for v in t.verdicts))
    rep.line(f"accepted rounds {accepted_rounds}/{rounds}")
    rep.line(f"bytes total     {acct.total_bytes}")
    for party, count in acct.by_party.items():
        rep.line(f"  {party:<13} {count}")
    rep.line(f"bytes/round     {acct.mean_bytes():.1f} (formula {acct.formula_bits_expected / 8:.1f})")
    rep.line(f"soundness       ({ss.soundness_error(args.K):.5f})^{rounds} = 2^-{_soundness_exponent(args.K, rounds):.1f}")
    rep.line(f"result          {'ACCEPT' if t.accepted else 'REJECT'}")

    rep.put("protocol", proto.name)
    rep.put("rounds", rounds)
    rep.put("accepted_rounds", accepted_rounds)
    rep.put("acceptance_rate", t.acceptance_rate())
    rep.put("bytes_total", acct.total_bytes)
    rep.put("soundness_exponent", _soundness_exponent(args.K, rounds))
    rep.put("accepted", int(t.accepted))
    return EXIT_OK if t.accepted else EXIT_FAIL


_STRATEGIES = {
    "answer-chall0": lambda p: adversary.strategy_answer_chall0(p),
    "guess-chall0": lambda p: adversary.strategy_guess_chall(p, 0),
    "guess-chall1": lambda p: adversary.strategy_guess_chall(p, 1),
}


def cmd_attack(args, rep: Report) -> int:
    rng = session.derive_rng(args.seed, "instance")
    proto, _ = _load(args, rng, unsat=not args.instance)
    rounds = args.rounds or 10_000
    rep.line(f"protocol {proto.name} {' '.join(f'{k}={v}' for k, v in proto.size.items())}  log2(Q)={proto.log_q:.2f}")
    rep.line(f"{'strategy':<15} {'rounds':>7} {'accepted':>9} {'rate':>8} {'chall0':>8} {'chall1':>8}")
    any_accept = False
    labels = _STRATEGIES if args.strategy == "all" else [args.strategy]
    for label in labels:
        strat = _STRATEGIES[label](proto)
        t = session.run_protocol(proto, None, rounds, parties=strat.parties(), seed=args.seed)
        per = {c: [bool(v) for v, ch in zip(t.verdicts, t.challenges) if ch == c] for c in (0, 1)}
        rates = {c: (sum(v) / len(v) if v else float("nan")) for c, v in per.items()}
        hits = sum(map(bool, t.verdicts))
        rep.line(f"{label:<15} {rounds:>7} {hits:>9} {t.acceptance_rate():>8.4f} {rates[0]:>8.4f} {rates[1]:>8.4f}")
        rep.put(f"{label}.accepted_rounds", hits)
        rep.put(f"{label}.rate", t.acceptance_rate())
        any_accept |= t.accepted
    if args.exhaustive:
        try:
            value = adversary.exhaustive_soundness(proto)
        except adversary.StrategyTooLarge as exc:
            raise ConfigError(str(exc)) from None
        rep.line(f"exhaustive single-round value {value} = {float(value):.6f}")
        rep.put("exhaustive", value)
    rep.line(f"result {'ACCEPTED (soundness broken)' if any_accept else 'rejected'}")
    return EXIT_FAIL if any_accept else EXIT_OK


def _throughput(ctx: FieldCtx, seconds: float = 0.5) -> float:
    rng = session.derive_rng("throughput")
    xs = [ctx.random_int(rng) for _ in range(1024)]
    q, ops, acc = ctx.modulus, 0, 1
    start = time.perf_counter()
    while time.perf_counter() - start < seconds:
        for x in xs:
            acc = acc * x % q
        ops += len(xs)
    return ops / (time.perf_counter() - start)


def cmd_bench(args, rep: Report) -> int:
    K = args.K
    if args.protocol == "subset-sum":
        n = args.n or 300
        ctx = ss.choose_params(n, K)
        proto = SubsetSumProtocol(ss.SubsetSumInstance((1,) * n, 0), ctx)
        size = f"n={n}"
    else:
        n, m = args.n or 3, args.m or 2
        ctx = sat.sat_choose_params(m, K)
        dummy = tuple((sat.Literal(1 + (i % n), False),) * 3 for i in range(m))
        proto = ThreeSatProtocol(sat.Cnf3(n, dummy), ctx)
        size = f"n={n} m={m}"
    bits = proto.formula_bits()
    split = proto.formula_bits_by_challenge()
    wire = proto.expected_wire_bytes()
    if ss.soundness_error(K) < 1:
        rounds = ss.rounds_needed(K, 100)
        total_mb = bits * rounds / 8 / 1e6
    else:
        # 1/2 + 2**-K = 1: repetition never drives the error down.
        rounds = total_mb = None
    rep.line(f"protocol            {proto.name} {size} K={K}")
    rep.line(f"log2(Q)             {proto.log_q:.4f} ({ctx.bit_length}-bit prime)")
    rep.line(f"bits/round          {bits:,.1f} (chall0 {split[0]:,.1f}, chall1 {split[1]:,.1f})")
    rep.line(f"KB/round (formula)  {bits / 8 / 1000:.1f}")
    rep.line(f"bytes/round (wire)  {wire:,.1f}")
    rep.line(f"rounds for 2^-100   {rounds if rounds is not None else 'unbounded'}")
    rep.line(f"total MB (formula)  {f'{total_mb:.2f}' if total_mb is not None else 'n/a'}")
    rep.put("protocol", proto.name)
    rep.put("log2_q", proto.log_q)
    rep.put("bit_length", ctx.bit_length)
    rep.put("bits_per_round", bits)
    rep.put("bits_chall0", split[0])
    rep.put("bits_chall1", split[1])
    rep.put("wire_bytes_per_round", wire)
    rep.put("rounds", rounds if rounds is not None else "inf")
    rep.put("total_mb", total_mb if total_mb is not None else "inf")
    if args.throughput:
        ops = _throughput(ctx)
        rep.line(f"field mul/s         {ops:,.0f}")
        rep.put("field_mul_per_s", ops)
    return EXIT_OK


def cmd_game_check(args, rep: Report) -> int:
    failures = 0
    if args.game:
        g = games.load_game(args.game)
        omega = games.omega_classical(g)
        coup = games.build_coup(g)
        omega_coup = games.omega_classical(coup.game)
        holds = 2 * omega - 1 <= omega_coup
        failures += not holds
        rep.line(f"game        {args.game} ({g.n_alice_inputs}x{g.n_bob_inputs} inputs, {g.n_alice_outputs}x{g.n_bob_outputs} outputs)")
        rep.line(f"omega       {omega}")
        rep.line(f"omega_coup  {omega_coup}")
        rep.line(f"S           {games.projectivity(g)}")
        rep.line(f"2w-1 <= w_coup: {'yes' if holds else 'NO'}")
        rep.put("omega", omega)
        rep.put("omega_coup", omega_coup)
        rep.put("coupling_bound_holds", int(holds))
    if args.random:
        rng = session.derive_rng(args.seed, "games")
        ok = 0
        for _ in range(args.random):
            ok += games.check_prop2(games.random_game(rng))
        failures += args.random - ok
        rep.line(f"{ok}/{args.random} random binary games satisfy 2w-1 <= w_coup")
        rep.put("random_games", args.random)
        rep.put("random_pass", ok)
    if not args.game and not args.random:
        raise ConfigError("game-check needs --game PATH or --random COUNT")
    return EXIT_FAIL if failures else EXIT_OK


def _zk_protocol(args, rng):
    ctx = FieldCtx(args.Q if args.Q is not None else 5)
    if args.protocol == "subset-sum":
        n = args.n or 2
        if args.instance:
            inst, wit = ss.load_instance(args.instance)
        elif n == 2 and ctx.modulus == 5:
            inst, wit = ss.SubsetSumInstance((1, 2), 3), ss.SubsetSumWitness((1, 1))
        else:
            inst, wit = ss.generate_instance(n, ctx, rng, nonempty=True)
        if wit is None:
            raise ConfigError("zk-check needs a witness for the honest view")
        return SubsetSumProtocol(inst, ctx), wit
    if args.instance:
        phi, assignment = sat.load_dimacs(args.instance)
    elif (args.n or 1) == 1 and (args.m or 1) == 1:
        phi, assignment = sat.Cnf3(1, ((sat.Literal(1, False),) * 3,)), (1,)
    else:
        phi, assignment = sat.random_satisfiable(args.n or 3, args.m or 1, rng)
    if assignment is None:
        raise ConfigError("zk-check needs a satisfying assignment for the honest view")
    return ThreeSatProtocol(phi, ctx), assignment


def cmd_zk_check(args, rep: Report) -> int:
    proto, witness = _zk_protocol(args, session.derive_rng(args.seed, "instance"))
    try:
        proto.check_witness(witness)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rep.line(f"protocol {proto.name} {' '.join(f'{k}={v}' for k, v in proto.size.items())} Q={proto.ctx.modulus} mode={args.mode}")
    failed = 0
    for vstar in zk_sim.verifier_family(args.seed):
        try:
            res = zk_sim.check_distribution(
                proto, witness, vstar, mode=args.mode, samples=args.samples, seed=args.seed
            )
        except zk_sim.SpaceTooLarge as exc:
            raise ConfigError(str(exc)) from None
        failed += not res.passed
        if res.mode == "exact":
            rep.line(f"{vstar.name:<18} TV = {res.distance} (exact, {res.size} atoms)")
        else:
            rep.line(
                f"{vstar.name:<18} TV = {res.distance:.5f} (sampled, {res.size} per side, floor {res.noise_floor:.5f})"
            )
        rep.put(f"{vstar.name}.tv", res.distance)
        rep.put(f"{vstar.name}.size", res.size)
    rep.line(f"result {'pass' if not failed else 'FAIL'}")
    return EXIT_FAIL if failed else EXIT_OK


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--protocol", choices=PROTOCOLS, default="subset-sum")
    common.add_argument("--n", type=_positive, help="set size (subset-sum) or variable count (3sat)")
    common.add_argument("--m", type=_positive, help="clause count (3sat)")
    common.add_argument("--K", type=_positive, default=5, help="security parameter (default 5)")
    common.add_argument("--Q", type=int, help="override the field modulus (prime)")
    common.add_argument("--rounds", type=_positive)
    common.add_argument("--seed", type=int, help="default: $RELZK_SEED or 0")
    common.add_argument("--instance", help="instance file (subset-sum format or DIMACS)")
    common.add_argument("--transcript-out", help="write the message log here")
    common.add_argument("--export", help="write key<TAB>value results here")

    parser = argparse.ArgumentParser(prog="relzk", description="Two-prover relativistic ZK proofs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a positive instance with witness")
    p.add_argument("-o", "--out", help="output path (default stdout)")
    p.add_argument("--nonempty", action="store_true", help="resample until the chosen subset is non-empty")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("prove", parents=[common], help="run the protocol end to end")
    p.add_argument("--witnessless", action="store_true", help="replace the provers with a cheating strategy")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("attack", parents=[common], help="run cheating strategies on a NO instance")
    p.add_argument("--strategy", choices=[*_STRATEGIES, "all"], default="all")
    p.add_argument("--exhaustive", action="store_true", help="also compute the exact best classical value")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("bench", parents=[common], help="communication cost table")
    p.add_argument("--throughput", action="store_true", help="also time field multiplications")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("game-check", parents=[common], help="check 2w(G)-1 <= w(G_coup)")
    p.add_argument("--game", help="game file")
    p.add_argument("--random", type=_positive, help="number of random binary games")
    p.set_defaults(func=cmd_game_check)

    p = sub.add_parser("zk-check", parents=[common], help="compare honest and simulated views")
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--samples", type=_positive, default=100_000)
    p.set_defaults(func=cmd_zk_check)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    rep = Report(out)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        code = args.func(args, rep)
    except (ConfigError, ValueError, OSError, games.GameTooLarge) as exc:
        print(f"relzk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rep.export(args.export)
    return code


if __name__ == "__main__":
    sys.exit(main())
