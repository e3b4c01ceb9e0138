import itertools
import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from relzk.commitment import (
    Opening,
    combine_keys,
    combine_linear,
    commit,
    commit_int,
    double_open_attack,
    verify_open,
)
from relzk.field import FieldCtx, FieldMismatchError

F11 = FieldCtx(11)


def test_commit_examples():
    assert commit(F11(3), F11(4), F11(5)) == F11(6)
    assert commit_int(F11, 3, 4, 5) == 6
    assert verify_open(F11(3), F11(6), Opening(F11(4), F11(5)))
    assert not verify_open(F11(3), F11(6), Opening(F11(4), F11(6)))


@given(st.integers(0, 10), st.integers(0, 10))
def test_zero_message_and_zero_challenge(a, c):
    assert commit(F11(a), F11(0), F11(c)) == F11(c)
    assert verify_open(F11(a), F11(c), Opening(F11(0), F11(c)))
    for b in range(11):
        assert commit(F11(0), F11(b), F11(c)) == F11(c)


def test_correctness_exhaustive_q11():
    for a, b, c in itertools.product(range(11), repeat=3):
        w = commit(F11(a), F11(b), F11(c))
        assert verify_open(F11(a), w, Opening(F11(b), F11(c)))


def test_perfect_hiding_exhaustive_q5():
    ctx = FieldCtx(5)
    for a in range(5):
        dists = {b: Counter(commit_int(ctx, a, b, c) for c in range(5)) for b in range(5)}
        if a:
            assert all(d == Counter(range(5)) for d in dists.values())
        assert len({frozenset(d.items()) for d in dists.values()}) == 1


def test_combine_examples():
    a = F11(3)
    w1 = commit(a, F11(4), F11(5))
    w2 = commit(a, F11(2), F11(1))
    assert (w1, w2) == (F11(6), F11(7))
    ones = (F11(1), F11(1))
    combined = combine_linear(ones, (w1, w2))
    assert combined == F11(2)
    key = combine_keys(ones, (F11(5), F11(1)))
    assert key == F11(6)
    assert verify_open(a, combined, Opening(F11(6), key))
    assert combine_linear((F11(1),), (w1,)) == w1
    assert combine_keys((F11(0), F11(0)), (F11(5), F11(1))) == F11(0)
    assert combine_keys((F11(1), F11(-1)), (F11(4), F11(4))) == F11(0)


def test_difference_of_equal_messages_opens_to_zero():
    rng = random.Random(5)
    for _ in range(100):
        a, b, c1, c2 = (F11.random_int(rng) for _ in range(4))
        w1, w2 = commit(F11(a), F11(b), F11(c1)), commit(F11(a), F11(b), F11(c2))
        coeffs = (F11(1), F11(-1))
        diff = combine_linear(coeffs, (w1, w2))
        assert verify_open(F11(a), diff, Opening(F11(0), combine_keys(coeffs, (F11(c1), F11(c2)))))


@given(st.integers(1, 6), st.data())
def test_homomorphic_combination(k, data):
    ctx = FieldCtx(101)
    vals = st.integers(0, 100).map(ctx)
    a = data.draw(vals)
    coeffs = [data.draw(vals) for _ in range(k)]
    bs = [data.draw(vals) for _ in range(k)]
    cs = [data.draw(vals) for _ in range(k)]
    ws = [commit(a, b, c) for b, c in zip(bs, cs)]
    b_total = ctx(sum(x.value * y.value for x, y in zip(coeffs, bs)))
    assert verify_open(a, combine_linear(coeffs, ws), Opening(b_total, combine_keys(coeffs, cs)))


def test_combine_errors():
    with pytest.raises(ValueError):
        combine_linear((F11(1),), (F11(1), F11(2)))
    with pytest.raises(ValueError):
        combine_keys((), ())
    with pytest.raises(FieldMismatchError):
        combine_linear((F11(1),), (FieldCtx(13)(1),))
    with pytest.raises(FieldMismatchError):
        commit(F11(1), F11(1), FieldCtx(13)(1))


def test_double_open_with_true_a_succeeds():
    rng = random.Random(0)
    for _ in range(200):
        a, b, c = (F11(F11.random_int(rng)) for _ in range(3))
        b_alt = b + 1 + rng.randrange(10)
        w = commit(a, b, c)
        o1, o2 = double_open_attack(w, b, b_alt, a)
        assert verify_open(a, w, o1) and verify_open(a, w, o2)


def test_double_open_with_wrong_guess_fails_once():
    for a, guess, b, d, c in itertools.product(range(11), range(11), range(11), range(1, 11), (0, 7)):
        if guess == a:
            continue
        w = commit(F11(a), F11(b), F11(c))
        o1, o2 = double_open_attack(w, F11(b), F11(b + d), F11(guess))
        assert verify_open(F11(a), w, o1) + verify_open(F11(a), w, o2) <= 1


def test_double_open_requires_distinct_messages():
    with pytest.raises(ValueError):
        double_open_attack(F11(1), F11(2), F11(2), F11(3))
