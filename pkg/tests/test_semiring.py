import math
import random

import pytest

from agparse.semiring import (
    BOOLEAN,
    INSIDE,
    LOG_INSIDE,
    LOG_VITERBI,
    VITERBI,
    LogProb,
    log_add,
    safe_log,
    semiring_plus,
    semiring_times,
)

ALL = [INSIDE, LOG_INSIDE, VITERBI, LOG_VITERBI, BOOLEAN]


def test_inside_plus_and_times():
    assert semiring_plus(INSIDE, 0.5, 0.25) == 0.75
    assert semiring_times(INSIDE, 0.5, 0.5) == 0.25


def test_viterbi_plus_is_max():
    assert semiring_plus(VITERBI, 0.5, 0.25) == 0.5
    assert semiring_plus(LOG_VITERBI, LogProb.from_prob(0.5), LogProb.from_prob(0.25)).prob == pytest.approx(0.5)


@pytest.mark.parametrize("sr", ALL, ids=lambda s: s.name)
def test_identities(sr):
    x = sr.from_prob(0.3)
    assert sr.plus(sr.zero, x) == x
    assert sr.times(sr.one, x) == x
    assert sr.times(sr.zero, x) == sr.zero


def test_log_times_adds_logs():
    e1 = LogProb(-1.0)
    assert (e1 * e1).value == -2.0
    assert math.isclose((e1 * e1).prob, math.exp(-2))


def test_log_add_accuracy_on_random_pairs():
    rng = random.Random(7)
    for _ in range(1000):
        p, q = rng.random(), rng.random()
        assert abs(math.exp(log_add(safe_log(p), safe_log(q))) - (p + q)) <= 1e-12


def test_log_add_extremes():
    assert log_add(-math.inf, -math.inf) == -math.inf
    assert log_add(-math.inf, -3.0) == -3.0
    assert log_add(-1000.0, -1000.0) == pytest.approx(-1000.0 + math.log(2))
    assert log_add(0.0, 0.0) == pytest.approx(math.log(2))


def test_zero_and_one_are_exact():
    assert LogProb.from_prob(0.0).value == -math.inf
    assert LogProb.from_prob(1.0).value == 0.0
    with pytest.raises(ValueError):
        LogProb.from_prob(-0.1)


@pytest.mark.parametrize("sr", [INSIDE, LOG_INSIDE, VITERBI, LOG_VITERBI], ids=lambda s: s.name)
def test_distributivity_sampled(sr):
    rng = random.Random(11)
    for _ in range(500):
        a, b, c = (sr.from_prob(rng.random()) for _ in range(3))
        lhs = sr.to_prob(sr.times(a, sr.plus(b, c)))
        rhs = sr.to_prob(sr.plus(sr.times(a, b), sr.times(a, c)))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@pytest.mark.parametrize("sr", [INSIDE, LOG_INSIDE, VITERBI, LOG_VITERBI], ids=lambda s: s.name)
def test_associativity_and_commutativity_sampled(sr):
    rng = random.Random(3)
    for _ in range(300):
        a, b, c = (sr.from_prob(rng.random()) for _ in range(3))
        assert sr.to_prob(sr.plus(a, b)) == pytest.approx(sr.to_prob(sr.plus(b, a)), abs=1e-15)
        assert sr.to_prob(sr.plus(sr.plus(a, b), c)) == pytest.approx(sr.to_prob(sr.plus(a, sr.plus(b, c))), rel=1e-12)
        assert sr.to_prob(sr.times(sr.times(a, b), c)) == pytest.approx(sr.to_prob(sr.times(a, sr.times(b, c))), rel=1e-12)


def test_boolean_laws_exhaustive():
    vals = (False, True)
    sr = BOOLEAN
    for a in vals:
        assert sr.plus(a, sr.zero) == a and sr.times(a, sr.one) == a
        assert sr.times(a, sr.zero) is False
        for b in vals:
            assert sr.plus(a, b) == sr.plus(b, a)
            assert sr.times(a, b) == sr.times(b, a)
            for c in vals:
                assert sr.plus(sr.plus(a, b), c) == sr.plus(a, sr.plus(b, c))
                assert sr.times(sr.times(a, b), c) == sr.times(a, sr.times(b, c))
                assert sr.times(a, sr.plus(b, c)) == sr.plus(sr.times(a, b), sr.times(a, c))


def test_to_log_order():
    assert LOG_INSIDE.better(LogProb.from_prob(0.5), LogProb.from_prob(0.4))
    assert BOOLEAN.to_log(True) == 0.0 and BOOLEAN.to_log(False) == -math.inf
