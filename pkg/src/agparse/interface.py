"""The five-function grammar interface the chart parser consumes.

A frontend subclasses :class:`GrammarContract` and supplies ``tran_possible``,
``tran``, ``comp``, ``comp_terminal``, ``startstates`` and
``startcategories``.  Transitions are single-category steps; a transition
over a sequence is a fold (:func:`tran_sequence`).

Three optional hooks tune how the parser combines ranges:

``contiguous``
    Edges carry one concatenated span instead of one range tuple per
    consumed category (context-free specialisation).
``range_compatible(edge_ranges, cons_range)``
    Positional side condition for the fundamental rule.
``empty_completions()``
    Completions for items with empty phonology, seeded at every position.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, NamedTuple, Optional, Sequence

from .algebra import TermFunction, ranges_overlap

__all__ = [
    "Completion",
    "GrammarContract",
    "Rule",
    "TokenRhs",
    "check_conformance",
    "tran_sequence",
]


@dataclass(frozen=True)
class Rule:
    """One rewrite ``lhs -> function[rhs...]`` identified by its rewrite-function name."""

    lhs: Hashable
    name: str
    function: Optional[TermFunction]
    rhs: tuple = ()

    def __str__(self) -> str:
        return self.name


class TokenRhs(NamedTuple):
    """Right-hand side of a lexical rewrite: a single input token."""

    token: Any


class Completion(NamedTuple):
    lhs: Hashable
    rule: Rule
    score: float


class GrammarContract:
    """Base class for parser frontends.  Instances must be immutable and pure."""

    contiguous: bool = False

    def tran_possible(self, state: Hashable, category: Hashable) -> bool:
        raise NotImplementedError

    def tran(self, state: Hashable, category: Hashable) -> Hashable:
        raise NotImplementedError

    def comp(self, state: Hashable) -> Sequence[Completion]:
        raise NotImplementedError

    def comp_terminal(self, token: Any) -> Sequence[Completion]:
        raise NotImplementedError

    def startstates(self) -> tuple:
        raise NotImplementedError

    def startcategories(self) -> tuple:
        raise NotImplementedError

    def empty_completions(self) -> Sequence[Completion]:
        return ()

    def range_compatible(self, edge_ranges: tuple, cons_range: tuple) -> bool:
        return True

    def state_diagnostics(self, state: Hashable) -> Sequence[str]:
        return ()


class NonOverlapping:
    """Mixin: the fundamental rule only adds ranges disjoint from the edge's ranges.

    Sound for non-copying grammars, where no token can be used twice.
    """

    def range_compatible(self, edge_ranges: tuple, cons_range: tuple) -> bool:
        return not any(ranges_overlap(rt, cons_range) for rt in edge_ranges)


def tran_sequence(grammar: GrammarContract, state: Hashable, categories: Iterable[Hashable]):
    """Fold ``tran`` over ``categories``; ``None`` as soon as a step is impossible."""
    for c in categories:
        if not grammar.tran_possible(state, c):
            return None
        state = grammar.tran(state, c)
    return state


def check_conformance(
    grammar: GrammarContract,
    states: Iterable[Hashable],
    categories: Iterable[Hashable],
    rewrites: Iterable[tuple],
    distributions: Optional[dict] = None,
    tol: float = 1e-9,
) -> list:
    """Run the interface property suite; returns a list of failure messages.

    ``states`` and ``categories`` are the enumeration to check ``tran`` and
    ``tran_possible`` against.  ``rewrites`` yields ``(lhs, rule_name, rhs)``
    triples the frontend declares; ``rhs`` is a category sequence, or a
    :class:`TokenRhs` for lexical rewrites.  ``distributions`` maps each nonterminal to its rule
    probabilities when the frontend is probabilistic.
    """
    failures = []
    categories = list(categories)

    for s in states:
        for rec in grammar.comp(s):
            if not 0.0 <= rec.score <= 1.0:
                failures.append(f"comp({s!r}) score {rec.score} outside [0, 1]")
            if rec.rule.lhs != rec.lhs:
                failures.append(f"comp({s!r}) record lhs {rec.lhs!r} != rule lhs {rec.rule.lhs!r}")
        for c in categories:
            possible = grammar.tran_possible(s, c)
            try:
                nxt = grammar.tran(s, c)
                defined = True
            except (ValueError, KeyError, TypeError):
                defined = False
                nxt = None
            if possible != defined:
                failures.append(f"tran_possible({s!r}, {c!r}) = {possible} but tran defined = {defined}")
            if defined and nxt != grammar.tran(s, c):
                failures.append(f"tran({s!r}, {c!r}) is not value-stable")

    for lhs, name, rhs in rewrites:
        if isinstance(rhs, TokenRhs):
            recs = grammar.comp_terminal(rhs.token)
            where = f"comp_terminal({rhs.token!r})"
        else:
            found = None
            for s0 in grammar.startstates():
                found = tran_sequence(grammar, s0, rhs)
                if found is not None:
                    break
            if found is None:
                failures.append(f"no transition path for rewrite {name}: {lhs!r} -> {rhs!r}")
                continue
            recs = grammar.comp(found)
            where = f"comp({found!r})"
        if not any(r.lhs == lhs and r.rule.name == name for r in recs):
            failures.append(f"{where} lacks ({lhs!r}, {name})")
        for r in recs:
            if not 0.0 <= r.score <= 1.0:
                failures.append(f"{where} score {r.score} outside [0, 1]")

    for lhs, dist in (distributions or {}).items():
        mass = math.fsum(dist.values())
        if abs(mass - 1.0) > tol:
            failures.append(f"mass at {lhs!r} is {mass}, not 1")
    return failures
