"""Agenda-driven, semiring-weighted chart parser over any :class:`GrammarContract`.

Items are *edges* ``[state, r1 ... rn]`` (a partially recognised rule with
one range tuple per consumed category) and *constituents* ``[A, r]``.  The
deduction rules are

* introduce edge: a constituent ``[A, r]`` starts an edge ``[tran(s0, A), r]``;
* complete edge: ``[s, r1 ... rn]`` yields ``[A, f(r1 ... rn)]`` for each
  completion ``(A, f)`` of ``s`` where the range action of ``f`` is defined;
* fundamental rule: ``[s, r1 ... rn]`` and ``[A, r]`` give
  ``[tran(s, A), r1 ... rn, r]``.

An item's score is the semiring sum over its backpointers.  A dequeued item
whose score moved since its previous dequeue fires its own inference rule
and goes back on the agenda; once the score is stable it enters the chart
and combines with chart partners.  Cyclic grammars converge this way.

Grammars with ``contiguous = True`` keep a single span per edge and only
combine adjacent items, which is ordinary context-free chart parsing.
"""
from __future__ import annotations

import heapq
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Hashable, NamedTuple, Optional, Sequence

from .algebra import covered_length
from .interface import GrammarContract
from .semiring import LOG_INSIDE, Semiring

__all__ = [
    "ChartParser",
    "DerivationTree",
    "EdgeCompletion",
    "Item",
    "NoParse",
    "ParseAborted",
    "ParseForest",
    "TerminalCompletion",
    "Traversal",
    "run_chartparser",
]

log = logging.getLogger(__name__)

EDGE, CONSTITUENT = 0, 1


class Traversal(NamedTuple):
    """One way to build an edge: extend ``edge`` by ``constituent`` (``edge`` is None for a seed)."""

    edge: Optional[int]
    constituent: int
    score: Any


class EdgeCompletion(NamedTuple):
    edge: int
    rule: Any
    rule_score: float
    score: Any


class TerminalCompletion(NamedTuple):
    """A lexical axiom; ``terminal`` is None for items with empty phonology."""

    terminal: Any
    rule: Any
    rule_score: float
    score: Any


@dataclass(eq=False)
class Item:
    id: int
    kind: int
    key: tuple
    length: int
    score: Any
    backpointers: dict = field(default_factory=dict)
    lastpopprob: Any = None
    in_agenda: bool = False
    in_chart: bool = False

    @property
    def is_edge(self) -> bool:
        return self.kind == EDGE

    def __repr__(self) -> str:
        kind = "Edge" if self.is_edge else "Constituent"
        return f"{kind}#{self.id}({self.key!r}, score={self.score!r})"


class NoParse(LookupError):
    """The input was not recognised, so there is no derivation to return."""


class ParseAborted(RuntimeError):
    """The item or pop budget ran out; ``forest`` holds what was built so far."""

    def __init__(self, message: str, forest: ParseForest):
        super().__init__(message)
        self.forest = forest


@dataclass(frozen=True)
class DerivationTree:
    category: Hashable
    rule: str
    range: tuple
    children: tuple = ()
    token: Any = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def to_bracketed(self) -> str:
        head = f"({self.category} [{self.rule}]"
        if self.is_leaf:
            tok = "<eps>" if self.token is None else str(self.token)
            return f"{head} {tok})"
        return head + " " + " ".join(c.to_bracketed() for c in self.children) + ")"

    def to_dict(self) -> dict:
        d = {
            "category": str(self.category),
            "rule": self.rule,
            "range": [list(r) for r in self.range],
        }
        if self.is_leaf:
            d["token"] = self.token
        else:
            d["children"] = [c.to_dict() for c in self.children]
        return d

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


class ParseForest:
    """The finished chart.  Read-only; every query is recomputed from the logbook."""

    def __init__(self, grammar, tokens, semiring, items, cons_ids, diagnostics, stats):
        self.grammar = grammar
        self.tokens = tuple(tokens)
        self.semiring = semiring
        self.items = items
        self._cons_ids = cons_ids
        self.diagnostics = tuple(diagnostics)
        self.stats = dict(stats)

    @property
    def goal_range(self) -> tuple:
        return ((1, len(self.tokens) + 1),)

    def goal_items(self) -> list:
        out = []
        for cat in self.grammar.startcategories():
            i = self._cons_ids.get((cat, self.goal_range))
            if i is not None:
                out.append(self.items[i])
        return out

    def constituent(self, category, range_tuple) -> Optional[Item]:
        i = self._cons_ids.get((category, tuple(range_tuple)))
        return None if i is None else self.items[i]

    @property
    def recognized(self) -> bool:
        sr = self.semiring
        return any(sr.to_log(it.score) > -math.inf for it in self.goal_items())

    def inside(self):
        return self.semiring.sum(it.score for it in self.goal_items())

    def inside_prob(self) -> float:
        return self.semiring.to_prob(self.inside())

    # -- best derivation ------------------------------------------------------
    def _best_hyperedges(self) -> dict:
        """Knuth's generalisation of Dijkstra over the backpointer hypergraph.

        Weights are log rule probabilities, so all are at most zero and the
        first time a node is settled its best derivation is final.  Returns
        ``item id -> (best log weight, chosen backpointer)``.
        """
        to_log = self.semiring.to_log
        hyperedges = []  # (head, tails, weight, backpointer)
        for it in self.items:
            for bp in it.backpointers.values():
                if isinstance(bp, Traversal):
                    tails = (bp.constituent,) if bp.edge is None else (bp.edge, bp.constituent)
                    hyperedges.append((it.id, tails, 0.0, bp))
                elif isinstance(bp, EdgeCompletion):
                    hyperedges.append((it.id, (bp.edge,), to_log(self.semiring.from_prob(bp.rule_score)), bp))
                else:
                    hyperedges.append((it.id, (), to_log(self.semiring.from_prob(bp.rule_score)), bp))
        waiting = [len(set(t)) for _, t, _, _ in hyperedges]
        uses: dict = {}
        for h, (_, tails, _, _) in enumerate(hyperedges):
            for t in set(tails):
                uses.setdefault(t, []).append(h)

        best: dict = {}
        settled: dict = {}
        heap = []

        def offer(h):
            head, tails, w, bp = hyperedges[h]
            value = w + sum(settled[t][0] for t in tails)
            if value == -math.inf:
                return
            if head not in best or value > best[head][0]:
                best[head] = (value, bp)
                heapq.heappush(heap, (-value, head))

        for h, (_, tails, _, _) in enumerate(hyperedges):
            if not tails:
                offer(h)
        while heap:
            neg, node = heapq.heappop(heap)
            if node in settled or -neg != best[node][0]:
                continue
            settled[node] = best[node]
            for h in uses.get(node, ()):
                waiting[h] -= 1
                if waiting[h] == 0 and hyperedges[h][0] not in settled:
                    offer(h)
        return settled

    def best(self) -> DerivationTree:
        """Highest-probability derivation of the whole input (ties: lowest item id)."""
        settled = self._best_hyperedges()
        goals = [it for it in self.goal_items() if it.id in settled]
        if not goals:
            raise NoParse(f"no derivation of {' '.join(map(str, self.tokens))!r}")
        goal = min(goals, key=lambda it: (-settled[it.id][0], it.id))
        return self._tree(goal.id, settled)

    def best_log_weight(self) -> float:
        settled = self._best_hyperedges()
        weights = [settled[it.id][0] for it in self.goal_items() if it.id in settled]
        return max(weights, default=-math.inf)

    def _tree(self, cons_id: int, settled: dict) -> DerivationTree:
        item = self.items[cons_id]
        category, rng = item.key
        bp = settled[cons_id][1]
        if isinstance(bp, TerminalCompletion):
            return DerivationTree(category, str(bp.rule), rng, (), bp.terminal)
        children = []
        edge_id = bp.edge
        while edge_id is not None:
            trav = settled[edge_id][1]
            children.append(self._tree(trav.constituent, settled))
            edge_id = trav.edge
        return DerivationTree(category, str(bp.rule), rng, tuple(reversed(children)))

    # -- output -----------------------------------------------------------
    def score_value(self):
        """The goal score as plain JSON data: a probability, or a bool for recognition."""
        score = self.inside()
        if isinstance(score, bool):
            return score
        return self.semiring.to_prob(score)

    def to_dict(self) -> dict:
        tree = self.best().to_dict() if self.recognized else None
        return {
            "recognized": self.recognized,
            "score": self.score_value(),
            "tree": tree,
            "diagnostics": list(self.diagnostics),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)


def _converged(sr: Semiring, new, old, tol: float) -> bool:
    if old is None:
        return False
    a, b = sr.to_log(new), sr.to_log(old)
    return a == b or abs(a - b) <= tol


class ChartParser:
    """Reusable parser configuration; :meth:`parse` runs one independent deduction."""

    def __init__(self, grammar: GrammarContract, semiring: Semiring = LOG_INSIDE, *,
                 tol: float = 1e-12, budget: int = 10**6, max_pops: Optional[int] = None):
        self.grammar = grammar
        self.semiring = semiring
        self.tol = tol
        self.budget = budget
        self.max_pops = max_pops if max_pops is not None else 100 * budget

    def parse(self, tokens: Sequence) -> ParseForest:
        return _Run(self, tuple(tokens)).run()


class _Run:
    """State of a single parse: logbook, agenda and chart."""

    def __init__(self, cfg: ChartParser, tokens: tuple):
        self.g = cfg.grammar
        self.sr = cfg.semiring
        self.tol = cfg.tol
        self.budget = cfg.budget
        self.max_pops = cfg.max_pops
        self.tokens = tokens
        self.contiguous = self.g.contiguous

        self.items: list = []
        self.edge_ids: dict = {}
        self.cons_ids: dict = {}
        self.agenda: list = []
        # chart indices, values are insertion-ordered id sets
        self.edges_at: dict = {}   # index -> state -> {id: None}
        self.cons_at: dict = {}    # index -> category -> {id: None}
        self.diagnostics: dict = {}
        self.stats = {"pops": 0, "requeues": 0, "items": 0}
        self._comp_cache: dict = {}
        self._tran_cache: dict = {}

    # -- logbook and agenda ---------------------------------------------------
    def _item(self, kind: int, key: tuple, length: int) -> Item:
        book = self.edge_ids if kind == EDGE else self.cons_ids
        i = book.get(key)
        if i is not None:
            return self.items[i]
        if len(self.items) >= self.budget:
            self._abort(f"item budget of {self.budget} exhausted")
        item = Item(len(self.items), kind, key, length, self.sr.zero)
        self.items.append(item)
        book[key] = item.id
        return item

    def _add(self, item: Item, bp_key, bp) -> None:
        old = item.backpointers.get(bp_key)
        if old is not None and old.score == bp.score:
            return
        item.backpointers[bp_key] = bp
        score = self.sr.sum(b.score for b in item.backpointers.values())
        if score == item.score and item.lastpopprob is not None:
            return
        item.score = score
        if item.in_chart:
            self._unchart(item)
        if not item.in_agenda:
            item.in_agenda = True
            heapq.heappush(self.agenda, (item.length, item.kind, item.id))

    def _abort(self, why: str):
        raise ParseAborted(why, self._forest())

    def _note(self, message: str) -> None:
        self.diagnostics.setdefault(message, None)

    # -- chart ---------------------------------------------------------------
    def _edge_index(self, item: Item):
        return item.key[1][0][0][1] if self.contiguous else None

    def _cons_index(self, item: Item):
        return item.key[1][0][0] if self.contiguous else None

    def _chart(self, item: Item) -> None:
        item.in_chart = True
        if item.is_edge:
            cell = self.edges_at.setdefault(self._edge_index(item), {})
            cell.setdefault(item.key[0], {})[item.id] = None
        else:
            cell = self.cons_at.setdefault(self._cons_index(item), {})
            cell.setdefault(item.key[0], {})[item.id] = None

    def _unchart(self, item: Item) -> None:
        item.in_chart = False
        if item.is_edge:
            del self.edges_at[self._edge_index(item)][item.key[0]][item.id]
        else:
            del self.cons_at[self._cons_index(item)][item.key[0]][item.id]

    # -- grammar access ------------------------------------------------------
    def _tran(self, state, cat):
        k = (state, cat)
        if k not in self._tran_cache:
            nxt = self.g.tran(state, cat) if self.g.tran_possible(state, cat) else None
            self._tran_cache[k] = nxt
        return self._tran_cache[k]

    def _comp(self, state):
        if state not in self._comp_cache:
            self._comp_cache[state] = tuple(self.g.comp(state))
            for msg in self.g.state_diagnostics(state):
                self._note(msg)
        return self._comp_cache[state]

    # -- deduction -------------------------------------------------------------
    def _axioms(self) -> None:
        unknown = []
        for i, tok in enumerate(self.tokens, 1):
            recs = self.g.comp_terminal(tok)
            if not recs:
                unknown.append(f"{tok!r} at {i}")
            for rec in recs:
                item = self._item(CONSTITUENT, (rec.lhs, ((i, i + 1),)), 1)
                self._add(item, (tok, rec.rule), TerminalCompletion(tok, rec.rule, rec.score, self.sr.from_prob(rec.score)))
        if unknown:
            self._note("unknown token " + ", ".join(unknown))
        for rec in self.g.empty_completions():
            for i in range(1, len(self.tokens) + 2):
                item = self._item(CONSTITUENT, (rec.lhs, ((i, i),)), 0)
                self._add(item, (None, rec.rule), TerminalCompletion(None, rec.rule, rec.score, self.sr.from_prob(rec.score)))

    def _introduce_edge(self, cons: Item) -> None:
        cat, rng = cons.key
        for s0 in self.g.startstates():
            s = self._tran(s0, cat)
            if s is None:
                continue
            edge = self._item(EDGE, (s, (rng,)), cons.length)
            self._add(edge, (None, cons.id), Traversal(None, cons.id, cons.score))

    def _complete_edge(self, edge: Item) -> None:
        state, ranges = edge.key
        for rec in self._comp(state):
            if self.contiguous:
                rng = ranges[0]
            else:
                rng = rec.rule.function.apply_ranges(ranges)
                if rng is None:
                    continue
            cons = self._item(CONSTITUENT, (rec.lhs, rng), covered_length(rng))
            score = self.sr.times(self.sr.from_prob(rec.score), edge.score)
            self._add(cons, (edge.id, rec.rule), EdgeCompletion(edge.id, rec.rule, rec.score, score))

    def _combine(self, edge: Item, cons: Item, nxt) -> None:
        ranges = edge.key[1]
        crng = cons.key[1]
        if self.contiguous:
            new_ranges = (((ranges[0][0][0], crng[0][1]),),)
        else:
            if not self.g.range_compatible(ranges, crng):
                return
            new_ranges = ranges + (crng,)
        succ = self._item(EDGE, (nxt, new_ranges), edge.length + cons.length)
        self._add(succ, (edge.id, cons.id), Traversal(edge.id, cons.id, self.sr.times(edge.score, cons.score)))

    def _fundamental_rule(self, item: Item) -> None:
        if item.is_edge:
            cell = self.cons_at.get(self._edge_index(item), {})
            state = item.key[0]
            for cat, ids in list(cell.items()):
                nxt = self._tran(state, cat)
                if nxt is None:
                    continue
                for cid in list(ids):
                    self._combine(item, self.items[cid], nxt)
        else:
            cell = self.edges_at.get(self._cons_index(item), {})
            cat = item.key[0]
            for state, ids in list(cell.items()):
                nxt = self._tran(state, cat)
                if nxt is None:
                    continue
                for eid in list(ids):
                    self._combine(self.items[eid], item, nxt)

    def _finish(self, item: Item) -> None:
        if _converged(self.sr, item.score, item.lastpopprob, self.tol):
            self._chart(item)
            self._fundamental_rule(item)
            return
        if item.is_edge:
            self._complete_edge(item)
        else:
            self._introduce_edge(item)
        if item.lastpopprob is not None:
            self.stats["requeues"] += 1
        item.lastpopprob = item.score
        if not item.in_agenda:
            item.in_agenda = True
            heapq.heappush(self.agenda, (item.length, item.kind, item.id))

    def run(self) -> ParseForest:
        self._axioms()
        while self.agenda:
            self.stats["pops"] += 1
            if self.stats["pops"] > self.max_pops:
                self._abort(f"pop budget of {self.max_pops} exhausted")
            _, _, i = heapq.heappop(self.agenda)
            item = self.items[i]
            item.in_agenda = False
            self._finish(item)
        forest = self._forest()
        log.info("parsed %d tokens: %d items, %d pops, %d requeues",
                 len(self.tokens), forest.stats["items"], forest.stats["pops"], forest.stats["requeues"])
        return forest

    def _forest(self) -> ParseForest:
        self.stats["items"] = len(self.items)
        return ParseForest(self.g, self.tokens, self.sr, self.items, self.cons_ids,
                           self.diagnostics, self.stats)


def run_chartparser(grammar: GrammarContract, tokens: Sequence, semiring: Semiring = LOG_INSIDE,
                    **options) -> ParseForest:
    """Parse ``tokens`` and return the forest.  Options go to :class:`ChartParser`."""
    return ChartParser(grammar, semiring, **options).parse(tokens)
