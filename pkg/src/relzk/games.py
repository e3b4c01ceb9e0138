"""Finite two-player games, exact classical values and the coupled game.

Alphabets are ``range(size)``. A valuation table ``V[x, y, a, b]`` holds
0/1 entries, and questions are drawn uniformly. Classical values are
computed exactly (as :class:`fractions.Fraction`) by enumerating the
deterministic strategies of one player and best-responding with the other;
shared randomness cannot beat the best deterministic strategy.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

import numpy as np

__all__ = [
    "CoupGame",
    "DetStrategy",
    "FiniteGame",
    "GameTooLarge",
    "build_coup",
    "check_prop2",
    "chsh",
    "dump_game",
    "load_game",
    "omega_classical",
    "optimal_strategy",
    "parse_game",
    "projectivity",
    "prop1_bound",
    "random_game",
    "rewind_strategy",
    "strategy_value",
]

MAX_STRATEGIES = 2**24
_CHUNK = 1 << 14


class GameTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteGame:
    """Game with uniform questions and valuation ``V`` of shape (IA, IB, OA, OB)."""

    V: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.V)
        if table.ndim != 4 or 0 in table.shape:
            raise ValueError(f"valuation must be a non-empty 4-d table, got shape {table.shape}")
        if not np.isin(table, (0, 1)).all():
            raise ValueError("valuation entries must be 0 or 1")
        table = table.astype(np.int64)
        table.setflags(write=False)
        object.__setattr__(self, "V", table)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.V.shape

    @property
    def n_alice_inputs(self) -> int:
        return self.V.shape[0]

    @property
    def n_bob_inputs(self) -> int:
        return self.V.shape[1]

    @property
    def n_alice_outputs(self) -> int:
        return self.V.shape[2]

    @property
    def n_bob_outputs(self) -> int:
        return self.V.shape[3]

    def strategy_count(self) -> int:
        ia, ib, oa, ob = self.shape
        return oa**ia * ob**ib


@dataclass(frozen=True, eq=False)
class CoupGame:
    """``G_coup``: Bob gets an ordered pair of distinct questions and answers both.

    ``game`` is the flattened two-player game: Bob's question index ``p``
    stands for ``pairs[p]`` and his answer ``b * OB + b2`` for ``(b, b2)``.
    """

    base: FiniteGame
    pairs: tuple[tuple[int, int], ...]
    game: FiniteGame


class DetStrategy(NamedTuple):
    alice: tuple[int, ...]
    bob: tuple[int, ...]


def chsh() -> FiniteGame:
    V = np.zeros((2, 2, 2, 2), dtype=np.int64)
    for x, y, a, b in itertools.product(range(2), repeat=4):
        V[x, y, a, b] = int(a ^ b == x & y)
    return FiniteGame(V)


def random_game(rng: random.Random, shape=(2, 2, 2, 2), density: float = 0.5) -> FiniteGame:
    cells = int(np.prod(shape))
    bits = [1 if rng.random() < density else 0 for _ in range(cells)]
    return FiniteGame(np.array(bits, dtype=np.int64).reshape(shape))


def strategy_value(g: FiniteGame, s: DetStrategy) -> Fraction:
    ia, ib, _, _ = g.shape
    wins = sum(int(g.V[x, y, s.alice[x], s.bob[y]]) for x in range(ia) for y in range(ib))
    return Fraction(wins, ia * ib)


def _best_against_bob(V: np.ndarray, bob_strats: np.ndarray):
    # M[s, x, a] = sum_y V[x, y, a, bob[s, y]]
    ib = V.shape[1]
    Vt = V.transpose(1, 3, 0, 2)  # (y, b, x, a)
    M = Vt[0, bob_strats[:, 0]]
    for y in range(1, ib):
        M = M + Vt[y, bob_strats[:, y]]
    return M.max(axis=2).sum(axis=1), M.argmax(axis=2)


def optimal_strategy(g: FiniteGame) -> tuple[Fraction, DetStrategy]:
    """Exact classical value together with a deterministic strategy achieving it."""
    if g.strategy_count() > MAX_STRATEGIES:
        raise GameTooLarge(f"{g.strategy_count()} deterministic strategies exceed {MAX_STRATEGIES}")
    ia, ib, oa, ob = g.shape
    swap = oa**ia < ob**ib
    # Enumerate whichever player has fewer strategies.
    V = g.V.transpose(1, 0, 3, 2) if swap else g.V
    n_in, n_out = V.shape[1], V.shape[3]
    best_total, best = -1, None
    strategies = itertools.product(range(n_out), repeat=n_in)
    while True:
        chunk = list(itertools.islice(strategies, _CHUNK))
        if not chunk:
            break
        enum = np.array(chunk, dtype=np.int64)
        totals, responses = _best_against_bob(V, enum)
        i = int(totals.argmax())
        if totals[i] > best_total:
            best_total = int(totals[i])
            best = (tuple(int(r) for r in responses[i]), tuple(int(b) for b in enum[i]))
    other, enumerated = best
    strategy = DetStrategy(alice=enumerated, bob=other) if swap else DetStrategy(alice=other, bob=enumerated)
    return Fraction(best_total, ia * ib), strategy


def omega_classical(g: FiniteGame) -> Fraction:
    """Maximum winning probability of classical players, as an exact fraction."""
    return optimal_strategy(g)[0]


def build_coup(g: FiniteGame) -> CoupGame:
    ia, ib, oa, ob = g.shape
    if ib < 2:
        raise ValueError("the coupled game needs at least two Bob inputs")
    pairs = tuple((y, y2) for y in range(ib) for y2 in range(ib) if y != y2)
    V = np.zeros((ia, len(pairs), oa, ob * ob), dtype=np.int64)
    for p, (y, y2) in enumerate(pairs):
        # win iff V(x,y,a,b) = V(x,y2,a,b2) = 1
        both = g.V[:, y, :, :, None] * g.V[:, y2, :, None, :]
        V[:, p] = both.reshape(ia, oa, ob * ob)
    return CoupGame(base=g, pairs=pairs, game=FiniteGame(V))


def projectivity(g: FiniteGame) -> int:
    """Largest number of winning Bob outputs for any fixed (x, y, a)."""
    return int(g.V.sum(axis=3).max())


def rewind_strategy(coup: CoupGame, s: DetStrategy) -> DetStrategy:
    """Run Bob on each question of the pair separately (classical rewinding)."""
    ob = coup.base.n_bob_outputs
    bob = tuple(s.bob[y] * ob + s.bob[y2] for y, y2 in coup.pairs)
    return DetStrategy(alice=s.alice, bob=bob)


def check_prop2(g: FiniteGame) -> bool:
    """``2*omega(G) - 1 <= omega(G_coup)``, compared exactly."""
    if g.n_bob_inputs != 2:
        raise ValueError("the coupling inequality is stated for two Bob inputs")
    return 2 * omega_classical(g) - 1 <= omega_classical(build_coup(g).game)


def _icbrt(n: int) -> int | None:
    if n < 0:
        return None
    if n < 2:
        return n
    # Integer Newton from an overestimate converges to floor(cbrt(n)).
    r = 1 << ((n.bit_length() + 2) // 3)
    while True:
        nxt = (2 * r + n // (r * r)) // 3
        if nxt >= r:
            break
        r = nxt
    return r if r**3 == n else None


def _cube_root(q: Fraction) -> Fraction | float:
    num, den = _icbrt(q.numerator), _icbrt(q.denominator)
    if num is not None and den is not None:
        return Fraction(num, den)
    return float(q) ** (1 / 3)


def prop1_bound(S: int, Q: int, bob_inputs: int, omega_coup_bound) -> Fraction | float:
    """Upper bound on omega*(G) implied by omega*(G_coup) <= ``omega_coup_bound``.

    Inverts ``omega*(G_coup) >= (omega*(G) - 1/|I_B|)**3 / (64 S)``. ``Q`` is
    accepted for call-site symmetry with the protocols, where the bound on
    the coupled game is ``1/Q``. Returns a Fraction when the cube root is
    exact, a float otherwise.
    """
    if S < 1:
        raise ValueError("S must be positive")
    omega_coup_bound = Fraction(omega_coup_bound)
    if not 0 <= omega_coup_bound <= 1:
        raise ValueError("omega_coup_bound must lie in [0, 1]")
    root = _cube_root(64 * S * omega_coup_bound)
    return Fraction(1, bob_inputs) + root


# -- text format -------------------------------------------------------------
#
#   # comment
#   game IA IB OA OB
#   x y <OA*OB digits, index a*OB + b>
#
# One row per (x, y); missing rows are all-zero.


def parse_game(text: str) -> FiniteGame:
    shape = None
    V = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "game":
            if shape is not None or len(tokens) != 5:
                raise ValueError(f"line {lineno}: expected one 'game IA IB OA OB' header")
            shape = tuple(int(t) for t in tokens[1:])
            if min(shape) < 1:
                raise ValueError(f"line {lineno}: alphabet sizes must be positive")
            V = np.zeros(shape, dtype=np.int64)
            continue
        if shape is None:
            raise ValueError(f"line {lineno}: row before 'game' header")
        x, y = int(tokens[0]), int(tokens[1])
        digits = "".join(tokens[2:])
        oa, ob = shape[2], shape[3]
        if not (0 <= x < shape[0] and 0 <= y < shape[1]):
            raise ValueError(f"line {lineno}: question ({x}, {y}) out of range")
        if len(digits) != oa * ob or set(digits) - {"0", "1"}:
            raise ValueError(f"line {lineno}: expected {oa * ob} binary digits")
        V[x, y] = np.array([int(d) for d in digits]).reshape(oa, ob)
    if V is None:
        raise ValueError("missing 'game' header")
    return FiniteGame(V)


def dump_game(g: FiniteGame) -> str:
    ia, ib, oa, ob = g.shape
    lines = [f"game {ia} {ib} {oa} {ob}"]
    for x in range(ia):
        for y in range(ib):
            lines.append(f"{x} {y} " + "".join(str(int(v)) for v in g.V[x, y].reshape(-1)))
    return "\n".join(lines) + "\n"


def load_game(path: str | Path) -> FiniteGame:
    return parse_game(Path(path).read_text())
