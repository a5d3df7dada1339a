"""Minimalist Grammars as a parser frontend.

Expressions are handled at the feature level only: a category is a tuple of
chains (feature sequences), the first being the head chain.  Strings live in
the tuple algebra; every structure-building step is paired with a term
function whose flow rearranges the string components the same way the
step rearranges chains.

Left and right selectors are distinct (``f=`` takes its complement on the
left, ``=f`` on the right).  Movers are placed to the left of the head.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Optional, Sequence

from .algebra import Ref, TermFunction
from .interface import Completion, GrammarContract, NonOverlapping, Rule, TokenRhs

__all__ = [
    "Feature",
    "LexicalItem",
    "MgCategory",
    "MgResult",
    "MgState",
    "MinimalistGrammar",
    "Polarity",
    "SMCViolation",
    "TupleOperations",
    "category",
    "feature_match",
    "is_viable",
    "mg_merge",
    "mg_move",
    "mg_tuple_operations",
    "parse_feature",
]

MERGE_R1, MERGE_L1, MERGE_R2, MERGE_L2 = "merge_R1", "merge_L1", "merge_R2", "merge_L2"
MOVE_1, MOVE_2 = "move_1", "move_2"
LEXICAL = "lex"


class Polarity(enum.Enum):
    SELECTEE = ""
    SELECT_RIGHT = "=f"
    SELECT_LEFT = "f="
    LICENSOR = "+"
    LICENSEE = "-"


class Feature(NamedTuple):
    polarity: Polarity
    name: str

    @property
    def is_selector(self) -> bool:
        return self.polarity in (Polarity.SELECT_RIGHT, Polarity.SELECT_LEFT)

    def __str__(self) -> str:
        p = self.polarity
        if p is Polarity.SELECT_RIGHT:
            return "=" + self.name
        if p is Polarity.SELECT_LEFT:
            return self.name + "="
        if p is Polarity.LICENSOR:
            return "+" + self.name
        if p is Polarity.LICENSEE:
            return "-" + self.name
        return self.name


_NAME = re.compile(r"[A-Za-z0-9_.']+\Z")


def parse_feature(text: str) -> Feature:
    """Parse ``=f``, ``f=``, ``+f``, ``-f`` or ``f``.  Accepts U+2212 as a minus sign."""
    text = text.replace("−", "-")
    if text.startswith("="):
        pol, name = Polarity.SELECT_RIGHT, text[1:]
    elif text.endswith("="):
        pol, name = Polarity.SELECT_LEFT, text[:-1]
    elif text.startswith("+"):
        pol, name = Polarity.LICENSOR, text[1:]
    elif text.startswith("-"):
        pol, name = Polarity.LICENSEE, text[1:]
    else:
        pol, name = Polarity.SELECTEE, text
    if not _NAME.match(name):
        raise ValueError(f"bad feature {text!r}")
    return Feature(pol, name)


class MgCategory(tuple):
    """A tuple of chains; prints like ``+wh c, -wh``."""

    def __str__(self) -> str:
        return ", ".join(" ".join(map(str, chain)) for chain in self)

    def __repr__(self) -> str:
        return f"MgCategory({str(self)!r})"

    @property
    def feature_count(self) -> int:
        return sum(len(chain) for chain in self)


def category(*chains: str) -> MgCategory:
    """``category("+wh c", "-wh")`` builds the two-chain category."""
    return MgCategory(tuple(parse_feature(f) for f in chain.split()) for chain in chains)


def feature_match(f: Feature, g: Feature) -> bool:
    if f.name != g.name:
        return False
    if f.is_selector:
        return g.polarity is Polarity.SELECTEE
    return f.polarity is Polarity.LICENSOR and g.polarity is Polarity.LICENSEE


class MgResult(NamedTuple):
    category: MgCategory
    tag: str
    target: Optional[int] = None  # index of the moved chain


class SMCViolation(ValueError):
    """More than one chain carries the licensee a licensor is looking for."""


def mg_merge(a: Sequence, b: Sequence) -> list:
    """Merge with ``a`` as selector and ``b`` as selectee; at most one result."""
    if not a or not b:
        return []
    s, t = a[0], b[0]
    f, g = s[0], t[0]
    if not f.is_selector or not feature_match(f, g):
        return []
    gamma, delta = s[1:], t[1:]
    if not gamma:
        return []
    right = f.polarity is Polarity.SELECT_RIGHT
    if not delta:
        tag = MERGE_R1 if right else MERGE_L1
        chains = (gamma,) + tuple(a[1:]) + tuple(b[1:])
    else:
        tag = MERGE_R2 if right else MERGE_L2
        chains = (gamma,) + tuple(a[1:]) + (delta,) + tuple(b[1:])
    return [MgResult(MgCategory(chains), tag)]


def mg_move(a: Sequence) -> list:
    """Move the unique chain whose licensee matches the head's licensor.

    Raises :class:`SMCViolation` when two or more chains match.
    """
    if not a:
        return []
    head = a[0]
    f = head[0]
    if f.polarity is not Polarity.LICENSOR:
        return []
    hits = [i for i in range(1, len(a)) if feature_match(f, a[i][0])]
    if not hits:
        return []
    if len(hits) > 1:
        raise SMCViolation(f"{len(hits)} chains start with -{f.name} in {MgCategory(a)}")
    i = hits[0]
    gamma, delta = head[1:], a[i][1:]
    if not gamma:
        return []
    rest_before, rest_after = tuple(a[1:i]), tuple(a[i + 1:])
    if not delta:
        return [MgResult(MgCategory((gamma,) + rest_before + rest_after), MOVE_1, i)]
    return [MgResult(MgCategory((gamma,) + rest_before + (delta,) + rest_after), MOVE_2, i)]


def is_viable(cat: Sequence) -> bool:
    """Can this category still become a single chain?

    Every non-head chain must start with a licensee, and no two of them with
    the same one; otherwise some chain can never be checked off.
    """
    leaders = []
    for chain in cat[1:]:
        if chain[0].polarity is not Polarity.LICENSEE:
            return False
        leaders.append(chain[0].name)
    return len(leaders) == len(set(leaders))


# -- tuple operations ---------------------------------------------------------

def merge_flow(tag: str, m: int, n: int) -> list:
    s = [Ref(0, j) for j in range(m)]
    t = [Ref(1, j) for j in range(n)]
    if tag == MERGE_R1:
        return [[s[0], t[0]]] + [[x] for x in s[1:]] + [[x] for x in t[1:]]
    if tag == MERGE_L1:
        return [[t[0], s[0]]] + [[x] for x in s[1:]] + [[x] for x in t[1:]]
    return [[x] for x in s] + [[x] for x in t]


def move_flow(tag: str, m: int, i: Optional[int] = None) -> list:
    s = [Ref(0, j) for j in range(m)]
    if tag == MOVE_1:
        return [[s[i], s[0]]] + [[x] for j, x in enumerate(s[1:], 1) if j != i]
    return [[x] for x in s]


@dataclass(frozen=True)
class LexicalItem:
    phon: tuple
    features: tuple
    score: float = 1.0

    @property
    def category(self) -> MgCategory:
        return MgCategory((tuple(self.features),))

    def __str__(self) -> str:
        phon = " ".join(self.phon) if self.phon else "<eps>"
        return f"{phon} :: {' '.join(map(str, self.features))}"


@dataclass(frozen=True)
class TupleOperations:
    constants: dict   # LexicalItem -> TermFunction
    structural: dict  # (tag, dims..., [target]) -> TermFunction
    pairing: dict     # function name -> structure-building operation

    def all(self) -> list:
        return list(self.constants.values()) + list(self.structural.values())


def chain_bound(lexicon: Iterable[LexicalItem]) -> int:
    names = {f.name for item in lexicon for f in item.features if f.polarity is Polarity.LICENSEE}
    return 1 + len(names)


def mg_tuple_operations(lexicon: Sequence[LexicalItem]) -> TupleOperations:
    """Constants for the lexicon plus every merge/move operation up to the chain bound."""
    k = chain_bound(lexicon)
    constants = {item: TermFunction.constant(str(item), (tuple(item.phon),)) for item in lexicon}
    structural: dict = {}
    pairing: dict = {}

    def add(key, fn):
        structural[key] = fn
        pairing[fn.name] = key[0]

    for m in range(1, k + 1):
        for n in range(1, k + 1):
            if m + n - 1 <= k:
                for tag in (MERGE_R1, MERGE_L1):
                    add((tag, m, n), TermFunction.from_flow(f"{tag}[{m},{n}]", (m, n), merge_flow(tag, m, n)))
            if m + n <= k:
                for tag in (MERGE_R2, MERGE_L2):
                    add((tag, m, n), TermFunction.from_flow(f"{tag}[{m},{n}]", (m, n), merge_flow(tag, m, n)))
        for i in range(1, m):
            add((MOVE_1, m, i), TermFunction.from_flow(f"{MOVE_1}[{m}:{i + 1}]", (m,), move_flow(MOVE_1, m, i)))
        if m > 1:
            add((MOVE_2, m), TermFunction.from_flow(f"{MOVE_2}[{m}]", (m,), move_flow(MOVE_2, m)))
    return TupleOperations(constants, structural, pairing)


# -- the frontend -------------------------------------------------------------

@dataclass(frozen=True)
class MgState:
    categories: tuple = ()
    isfinal: bool = False

    def __str__(self) -> str:
        return "<" + " | ".join(map(str, self.categories)) + (">!" if self.isfinal else ">")


class MinimalistGrammar(NonOverlapping, GrammarContract):
    """A probabilistic MG.  Scores sit on lexical items; merge and move score one."""

    def __init__(self, lexicon: Iterable[LexicalItem], start: Iterable = ("c",)):
        self.lexicon = tuple(lexicon)
        self.start = tuple(s if isinstance(s, MgCategory) else category(s) for s in start)

    def __eq__(self, other):
        return isinstance(other, MinimalistGrammar) and (self.lexicon, self.start) == (other.lexicon, other.start)

    def __hash__(self):
        return hash((self.lexicon, self.start))

    def validate(self) -> list:
        problems = []
        if not self.lexicon:
            problems.append("empty lexicon")
        seen = set()
        for item in self.lexicon:
            if not item.features:
                problems.append(f"{item}: no features")
            if not 0.0 <= item.score <= 1.0:
                problems.append(f"{item}: score {item.score} outside [0, 1]")
            if len(item.phon) > 1:
                problems.append(f"{item}: phonology must be a single token or empty")
            if (item.phon, item.features) in seen:
                problems.append(f"{item}: declared twice")
            seen.add((item.phon, item.features))
        return problems

    @cached_property
    def operations(self) -> TupleOperations:
        return mg_tuple_operations(self.lexicon)

    @cached_property
    def _lexical(self) -> dict:
        by_phon: dict = {}
        for item in self.lexicon:
            cat = item.category
            rule = Rule(cat, LEXICAL, self.operations.constants[item])
            by_phon.setdefault(item.phon, []).append(Completion(cat, rule, item.score))
        return {k: tuple(v) for k, v in by_phon.items()}

    # -- contract --
    def startstates(self) -> tuple:
        return (MgState(),)

    def startcategories(self) -> tuple:
        return self.start

    def tran_possible(self, state: MgState, cat) -> bool:
        if state.isfinal:
            return False
        if not state.categories:
            return True
        return bool(mg_merge(state.categories[0], cat))

    def tran(self, state: MgState, cat) -> MgState:
        if not self.tran_possible(state, cat):
            raise ValueError(f"no transition from {state} over {MgCategory(cat)}")
        cats = state.categories + (MgCategory(cat),)
        return MgState(cats, len(cats) == 2)

    def comp(self, state: MgState) -> tuple:
        out = []
        if len(state.categories) == 2:
            a, b = state.categories
            for res in mg_merge(a, b):
                fn = self.operations.structural.get((res.tag, len(a), len(b)))
                if fn is not None and is_viable(res.category):
                    out.append(Completion(res.category, Rule(res.category, res.tag, fn, (a, b)), 1.0))
        elif len(state.categories) == 1:
            (a,) = state.categories
            try:
                moved = mg_move(a)
            except SMCViolation:
                moved = []
            for res in moved:
                key = (MOVE_1, len(a), res.target) if res.tag == MOVE_1 else (MOVE_2, len(a))
                fn = self.operations.structural.get(key)
                if fn is not None and is_viable(res.category):
                    out.append(Completion(res.category, Rule(res.category, res.tag, fn, (a,)), 1.0))
        return tuple(out)

    def comp_terminal(self, token) -> tuple:
        return self._lexical.get((token,), ())

    def empty_completions(self) -> tuple:
        return self._lexical.get((), ())

    def state_diagnostics(self, state: MgState) -> list:
        notes = []
        if len(state.categories) == 2:
            for res in mg_merge(*state.categories):
                if not is_viable(res.category):
                    notes.append(f"smc: merge result {res.category} can never be checked off")
        elif len(state.categories) == 1:
            try:
                mg_move(state.categories[0])
            except SMCViolation as exc:
                notes.append(f"smc: {exc}")
        return notes

    # -- enumeration for property checks --
    def reachable_categories(self) -> list:
        """All viable categories derivable from the lexicon, in discovery order."""
        found = {item.category: None for item in self.lexicon}
        frontier = list(found)
        while frontier:
            new = []
            known = list(found)
            for a in frontier:
                try:
                    moved = mg_move(a)
                except SMCViolation:
                    moved = []
                cands = [r.category for r in moved]
                for b in known:
                    cands += [r.category for r in mg_merge(a, b)]
                    cands += [r.category for r in mg_merge(b, a)]
                for c in cands:
                    if is_viable(c) and c not in found:
                        found[c] = None
                        new.append(c)
            frontier = new
        return list(found)

    def rewrites(self, categories: Optional[Sequence] = None):
        categories = self.reachable_categories() if categories is None else categories
        for a in categories:
            for b in categories:
                for r in mg_merge(a, b):
                    if is_viable(r.category):
                        yield r.category, r.tag, (a, b)
            try:
                for r in mg_move(a):
                    if is_viable(r.category):
                        yield r.category, r.tag, (a,)
            except SMCViolation:
                pass
        for item in self.lexicon:
            if item.phon:
                yield item.category, LEXICAL, TokenRhs(item.phon[0])
