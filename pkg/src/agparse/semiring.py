"""Semiring scores for the chart parser.

A :class:`Semiring` bundles the two operations the deduction engine needs
(``plus`` to merge alternative derivations, ``times`` to combine the parts
of one derivation) with conversions to and from probabilities.  The parser
never inspects scores directly; it only goes through these callables, and
through :meth:`Semiring.to_log` when it checks whether an item's score has
stopped changing.

Five instances are provided::

    INSIDE        probabilities as floats, (+, *)
    LOG_INSIDE    probabilities as LogProb, (log-sum-exp, +)   <- default
    VITERBI       probabilities as floats, (max, *)
    LOG_VITERBI   probabilities as LogProb, (max, +)
    BOOLEAN       recognition only, (or, and)
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Any, Callable, Iterable

__all__ = [
    "BOOLEAN",
    "INSIDE",
    "LOG_INSIDE",
    "LOG_VITERBI",
    "SEMIRINGS",
    "VITERBI",
    "LogProb",
    "Semiring",
    "log_add",
    "safe_log",
    "semiring_plus",
    "semiring_times",
]


def safe_log(p: float) -> float:
    """Natural log that maps 0 to -inf instead of raising."""
    if p == 0:
        return -math.inf
    return math.log(p)


def log_add(a: float, b: float) -> float:
    """``log(exp(a) + exp(b))`` without overflow or needless underflow."""
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


@dataclass(frozen=True, order=True)
class LogProb:
    """A probability stored as its natural logarithm.

    Arithmetic follows the probabilities, not the logs: ``p * q`` adds the
    log values and ``p + q`` is a log-sum-exp.  ``LogProb(-inf)`` is exact
    zero and ``LogProb(0.0)`` is exact one.
    """

    value: float

    @classmethod
    def from_prob(cls, p: float) -> LogProb:
        if p < 0:
            raise ValueError(f"negative probability {p!r}")
        return cls(safe_log(p))

    @property
    def prob(self) -> float:
        return math.exp(self.value)

    def __mul__(self, other: LogProb) -> LogProb:
        return LogProb(self.value + other.value)

    def __add__(self, other: LogProb) -> LogProb:
        return LogProb(log_add(self.value, other.value))

    def __repr__(self) -> str:
        return f"LogProb({self.value!r})"


@dataclass(frozen=True)
class Semiring:
    name: str
    zero: Any
    one: Any
    plus: Callable[[Any, Any], Any]
    times: Callable[[Any, Any], Any]
    from_prob: Callable[[float], Any]
    to_log: Callable[[Any], float]

    def to_prob(self, score: Any) -> float:
        return math.exp(self.to_log(score))

    def sum(self, scores: Iterable[Any]) -> Any:
        return reduce(self.plus, scores, self.zero)

    def product(self, scores: Iterable[Any]) -> Any:
        return reduce(self.times, scores, self.one)

    def better(self, a: Any, b: Any) -> bool:
        """Total order used for best-derivation choices: is ``a`` strictly above ``b``?"""
        return self.to_log(a) > self.to_log(b)

    def __repr__(self) -> str:
        return f"Semiring({self.name!r})"


def _bool_to_log(x: bool) -> float:
    return 0.0 if x else -math.inf


INSIDE = Semiring(
    name="inside",
    zero=0.0,
    one=1.0,
    plus=lambda a, b: a + b,
    times=lambda a, b: a * b,
    from_prob=float,
    to_log=safe_log,
)

LOG_INSIDE = Semiring(
    name="log-inside",
    zero=LogProb(-math.inf),
    one=LogProb(0.0),
    plus=lambda a, b: a + b,
    times=lambda a, b: a * b,
    from_prob=LogProb.from_prob,
    to_log=lambda s: s.value,
)

VITERBI = Semiring(
    name="viterbi",
    zero=0.0,
    one=1.0,
    plus=max,
    times=lambda a, b: a * b,
    from_prob=float,
    to_log=safe_log,
)

LOG_VITERBI = Semiring(
    name="log-viterbi",
    zero=LogProb(-math.inf),
    one=LogProb(0.0),
    plus=max,
    times=lambda a, b: a * b,
    from_prob=LogProb.from_prob,
    to_log=lambda s: s.value,
)

BOOLEAN = Semiring(
    name="boolean",
    zero=False,
    one=True,
    plus=lambda a, b: a or b,
    times=lambda a, b: a and b,
    from_prob=lambda p: p > 0,
    to_log=_bool_to_log,
)

SEMIRINGS = {
    "inside": LOG_INSIDE,
    "viterbi": LOG_VITERBI,
    "bool": BOOLEAN,
    "inside-linear": INSIDE,
    "viterbi-linear": VITERBI,
}


def semiring_plus(semiring: Semiring, a: Any, b: Any) -> Any:
    return semiring.plus(a, b)


def semiring_times(semiring: Semiring, a: Any, b: Any) -> Any:
    return semiring.times(a, b)
