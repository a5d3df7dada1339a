"""Probabilistic abstract grammars: context-free and tuple-algebra frontends.

Rules are grouped into *rewrite functions*: every :class:`RewriteRule` names
the function it belongs to, and all rules sharing a name form one partial
function over nonterminals.  The probability attached to a rule is
``P(X_lhs = function)``, so a single function can carry mass at many
nonterminals.

:class:`ContextFreeGrammar` images are category sequences; terminals are
wrapped in :class:`Terminal`.  :class:`TupleGrammar` images are call
expressions over the tuple algebra.  Both implement the parser contract.

The module also holds the brute-force generation oracle
(:func:`oracle_generate`) used to check parser scores.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, NamedTuple, Optional, Sequence

from .algebra import (
    Call,
    CallExpression,
    TermFunction,
    Var,
    concat_function,
    count_tokens,
    evaluate_call_expression,
    first_variable,
    flow_is_linear,
    linearize,
    substitute_first,
    terminal_constant,
    variables,
)
from .interface import Completion, GrammarContract, NonOverlapping, Rule, TokenRhs

__all__ = [
    "ContextFreeGrammar",
    "GrammarError",
    "Leaf",
    "OracleError",
    "OracleResult",
    "RewriteFunction",
    "RewriteRule",
    "Terminal",
    "TupleGrammar",
    "ValidationReport",
    "Violation",
    "one_step",
    "oracle_generate",
    "splits",
    "cfg_tran",
    "validate_grammar",
]

LEXICAL = "lex"


@dataclass(frozen=True)
class Terminal:
    token: str

    def __str__(self) -> str:
        return repr(self.token)


@dataclass(frozen=True)
class Leaf:
    """Preterminal introduced when a tuple-grammar rule mentions a token inline."""

    token: str

    def __str__(self) -> str:
        return f"<{self.token}>"


def is_terminal(category) -> bool:
    return isinstance(category, Terminal)


class RewriteRule(NamedTuple):
    function: str
    lhs: Hashable
    image: object  # tuple of categories, or a CallExpression
    prob: float


@dataclass
class RewriteFunction:
    name: str
    mapping: dict = field(default_factory=dict)

    def __call__(self, category):
        return self.mapping[category]

    def defined_at(self, category) -> bool:
        return category in self.mapping


class Violation(NamedTuple):
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class ValidationReport(list):
    @property
    def ok(self) -> bool:
        return not self

    def __str__(self) -> str:
        return "\n".join(map(str, self)) if self else "ok"


class GrammarError(ValueError):
    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("invalid grammar:\n" + str(report))


class OracleError(RuntimeError):
    pass


def _fmt(category) -> str:
    return str(category)


class AbstractGrammar:
    """Rules, start categories and the derived functions and distributions."""

    def __init__(self, rules: Iterable[RewriteRule], start):
        self.rules = tuple(RewriteRule(*r) for r in rules)
        if isinstance(start, (list, tuple, frozenset, set)):
            self.start = tuple(start)
        else:
            self.start = (start,)

    @cached_property
    def functions(self) -> dict:
        funcs: dict = {}
        for r in self.rules:
            f = funcs.setdefault(r.function, RewriteFunction(r.function))
            f.mapping.setdefault(r.lhs, r.image)
        return funcs

    @cached_property
    def distributions(self) -> dict:
        dist: dict = {}
        for r in self.rules:
            dist.setdefault(r.lhs, {}).setdefault(r.function, r.prob)
        return dist

    @property
    def nonterminals(self) -> list:
        return list(self.distributions)

    def rhs_categories(self, image) -> list:
        raise NotImplementedError

    def startcategories(self) -> tuple:
        return self.start

    def __eq__(self, other):
        return type(self) is type(other) and self.rules == other.rules and self.start == other.start

    def __hash__(self):
        return hash((self.rules, self.start))


class ContextFreeGrammar(AbstractGrammar, GrammarContract):
    """Abstract context-free grammar; states are category sequences.

    With ``filter_transitions`` (default) a transition is only possible when it
    extends a prefix of some rule's right-hand side; without it, transitions
    are plain concatenation and total.
    """

    contiguous = True

    def __init__(self, rules: Iterable[RewriteRule], start, *, filter_transitions: bool = True):
        super().__init__(rules, start)
        self.filter_transitions = filter_transitions

    @classmethod
    def from_classical(cls, rules: Iterable[tuple], start, **kw) -> ContextFreeGrammar:
        """One rewrite function per classical rule ``(lhs, rhs, prob)``."""
        return cls([RewriteRule(f"r{i}", lhs, tuple(rhs), p) for i, (lhs, rhs, p) in enumerate(rules)], start, **kw)

    def classical_rules(self) -> set:
        return {(lhs, img) for f in self.functions.values() for lhs, img in f.mapping.items()}

    def rhs_categories(self, image) -> list:
        return list(image)

    @cached_property
    def _index(self):
        comp: dict = defaultdict(list)
        prefixes = {()}
        terminals = set()
        for name, f in self.functions.items():
            for lhs, image in f.mapping.items():
                image = tuple(image)
                fn = concat_function(len(image)) if image else None
                rule = Rule(lhs, name, fn, image)
                comp[image].append(Completion(lhs, rule, self.distributions[lhs][name]))
                for i in range(1, len(image) + 1):
                    prefixes.add(image[:i])
                terminals.update(c.token for c in image if is_terminal(c))
        lexical = {
            t: (Completion(Terminal(t), Rule(Terminal(t), LEXICAL, terminal_constant(t)), 1.0),)
            for t in terminals
        }
        return dict(comp), prefixes, lexical

    # -- contract --
    def startstates(self) -> tuple:
        return ((),)

    def tran_possible(self, state, category) -> bool:
        if not self.filter_transitions:
            return True
        return tuple(state) + (category,) in self._index[1]

    def tran(self, state, category):
        if not self.tran_possible(state, category):
            raise ValueError(f"no transition from {state!r} over {category!r}")
        return tuple(state) + (category,)

    def comp(self, state) -> tuple:
        return tuple(self._index[0].get(tuple(state), ()))

    def comp_terminal(self, token) -> tuple:
        return self._index[2].get(token, ())

    def rewrites(self):
        for name, f in self.functions.items():
            for lhs, image in f.mapping.items():
                yield lhs, name, tuple(image)
        for t in self._index[2]:
            yield Terminal(t), LEXICAL, TokenRhs(t)


def cfg_tran(state: Sequence, category) -> tuple:
    return tuple(state) + (category,)


class TupleGrammar(AbstractGrammar, NonOverlapping, GrammarContract):
    """Abstract grammar over the tuple algebra (an MCFG when every flow is linear).

    Rule images are call expressions.  For parsing, every image is composed
    into a single term function over its leaves; tokens written inline
    become :class:`Leaf` preterminals with a probability-one lexical rule, so
    the leaves the parser sees are always single tokens.
    """

    def rhs_categories(self, image) -> list:
        return [v.category for v in variables(image)]

    @cached_property
    def dims(self) -> dict:
        dims: dict = {}
        for r in self.rules:
            dims.setdefault(r.lhs, r.image.dim)
            for v in variables(r.image):
                dims.setdefault(v.category, v.dim)
        return dims

    @cached_property
    def _index(self):
        comp: dict = defaultdict(list)
        lexical: dict = defaultdict(list)
        prefixes = {()}
        leaves = set()
        for name, f in self.functions.items():
            for lhs, image in f.mapping.items():
                p = self.distributions[lhs][name]
                if (isinstance(image, Call) and image.function.is_constant and image.dim == 1
                        and len(image.function.evaluate()[0]) == 1):
                    token = image.function.evaluate()[0][0]
                    lexical[token].append(Completion(lhs, Rule(lhs, name, image.function), p))
                    continue
                flow, slots = linearize(image)
                rhs = tuple(s.category if isinstance(s, Var) else Leaf(s) for s in slots)
                arg_dims = tuple(s.dim if isinstance(s, Var) else 1 for s in slots)
                fn = TermFunction.from_flow(f"{name}@{lhs}", arg_dims, flow)
                comp[rhs].append(Completion(lhs, Rule(lhs, name, fn, rhs), p))
                for i in range(1, len(rhs) + 1):
                    prefixes.add(rhs[:i])
                leaves.update(s for s in slots if isinstance(s, str))
        for t in sorted(leaves):
            lexical[t].append(Completion(Leaf(t), Rule(Leaf(t), LEXICAL, terminal_constant(t)), 1.0))
        return dict(comp), prefixes, {t: tuple(v) for t, v in lexical.items()}

    def startstates(self) -> tuple:
        return ((),)

    def tran_possible(self, state, category) -> bool:
        return tuple(state) + (category,) in self._index[1]

    def tran(self, state, category):
        if not self.tran_possible(state, category):
            raise ValueError(f"no transition from {state!r} over {category!r}")
        return tuple(state) + (category,)

    def comp(self, state) -> tuple:
        return tuple(self._index[0].get(tuple(state), ()))

    def comp_terminal(self, token) -> tuple:
        return self._index[2].get(token, ())

    def rewrites(self):
        for rhs, recs in self._index[0].items():
            for r in recs:
                yield r.lhs, r.rule.name, rhs
        for t, recs in self._index[2].items():
            for r in recs:
                yield r.lhs, r.rule.name, TokenRhs(t)

    @property
    def parse_distributions(self) -> dict:
        """Distributions as the parser sees them, including preterminals."""
        dist = {lhs: dict(d) for lhs, d in self.distributions.items()}
        for recs in self._index[2].values():
            for r in recs:
                if isinstance(r.lhs, Leaf):
                    dist[r.lhs] = {LEXICAL: 1.0}
        return dist


# -- splits and the one-step relation ----------------------------------------

def splits(g: RewriteFunction, A, alpha: Sequence, beta: Sequence, *, leftmost: bool = False) -> int:
    """Number of ways ``alpha = a1 A a2`` with ``a1 g(A) a2 = beta``.

    With ``leftmost`` only the decomposition whose ``a1`` holds no
    nonterminal is admitted.
    """
    if not g.defined_at(A):
        return 0
    image = tuple(g(A))
    alpha, beta = tuple(alpha), tuple(beta)
    if len(beta) != len(alpha) - 1 + len(image):
        return 0
    count = 0
    for i, c in enumerate(alpha):
        if c == A and alpha[:i] + image + alpha[i + 1:] == beta:
            count += 1
        if leftmost and not is_terminal(c):
            break
    return count


def one_step(grammar: ContextFreeGrammar, alpha: Sequence, *, leftmost: bool = True) -> dict:
    """Distribution over sequences reachable from ``alpha`` in one rewrite.

    Sums ``splits(g, A, alpha, beta) * P(X_A = g)`` over functions and
    nonterminals by enumerating the rewritable positions directly.
    """
    alpha = tuple(alpha)
    out: dict = defaultdict(float)
    for i, A in enumerate(alpha):
        if is_terminal(A):
            continue
        for name, p in grammar.distributions.get(A, {}).items():
            image = tuple(grammar.functions[name](A))
            out[alpha[:i] + image + alpha[i + 1:]] += p
        if leftmost:
            break
    return dict(out)


@dataclass
class OracleResult:
    probabilities: dict
    residual: float
    steps: int

    def prob(self, tokens: Sequence[str]) -> float:
        return self.probabilities.get(tuple(tokens), 0.0)


def _cf_expand(grammar, form):
    for beta, p in one_step(grammar, form).items():
        if all(map(is_terminal, beta)):
            yield beta, p, tuple(c.token for c in beta)
        else:
            yield beta, p, None


def _tuple_expand(grammar, form):
    var = first_variable(form)
    for name, p in grammar.distributions.get(var.category, {}).items():
        image = grammar.functions[name](var.category)
        new, _ = substitute_first(form, image)
        if first_variable(new) is None:
            value = evaluate_call_expression(new)
            yield new, p, value[0] if len(value) == 1 else None
        else:
            yield new, p, None


def oracle_generate(grammar: AbstractGrammar, max_length: int, max_steps: int = 10_000,
                    tol: Optional[float] = None) -> OracleResult:
    """Exact string probabilities up to ``max_length`` by expanding sentential forms.

    Forms are rewritten leftmost-first so each derivation tree is counted
    once.  Forms whose minimum yield exceeds ``max_length`` are dropped,
    which is exact for non-erasing grammars.  Whatever mass is still in
    unfinished forms after ``max_steps`` is reported as ``residual``; it
    bounds the probability missing from any entry.
    """
    if isinstance(grammar, TupleGrammar):
        frontier = {Var(s, grammar.dims.get(s, 1)): 1.0 for s in grammar.start}
        expand, size = _tuple_expand, count_tokens
    else:
        frontier = {(s,): 1.0 for s in grammar.start}
        expand, size = _cf_expand, len
    if not grammar.rules:
        raise OracleError("grammar has no rules")
    results: dict = defaultdict(float)
    steps = 0
    while frontier and steps < max_steps:
        steps += 1
        nxt: dict = defaultdict(float)
        for form, mass in frontier.items():
            for beta, p, tokens in expand(grammar, form):
                if tokens is not None:
                    if len(tokens) <= max_length:
                        results[tuple(tokens)] += mass * p
                elif size(beta) <= max_length:
                    nxt[beta] += mass * p
        frontier = nxt
    residual = math.fsum(frontier.values())
    if tol is not None and residual > tol:
        raise OracleError(f"residual mass {residual:g} exceeds tolerance {tol:g} after {steps} steps")
    return OracleResult(dict(results), residual, steps)


# -- validation -------------------------------------------------------------

def validate_grammar(grammar: AbstractGrammar, tol: float = 1e-9) -> ValidationReport:
    """Collect every violation instead of stopping at the first."""
    report = ValidationReport()
    if not grammar.rules:
        report.append(Violation("empty", "grammar has no rules"))
        return report

    images: dict = {}
    probs: dict = {}
    for r in grammar.rules:
        key = (r.function, r.lhs)
        if is_terminal(r.lhs):
            report.append(Violation("terminal-lhs", f"{r.function} rewrites terminal {_fmt(r.lhs)}"))
        if not 0.0 <= r.prob <= 1.0 or math.isnan(r.prob):
            report.append(Violation("probability-range", f"P(X_{_fmt(r.lhs)} = {r.function}) = {r.prob} outside [0, 1]"))
        if key in images:
            if images[key] != r.image:
                report.append(Violation("not-a-function", f"{r.function} has two images at {_fmt(r.lhs)}"))
            elif probs[key] != r.prob:
                report.append(Violation("conflicting-probability",
                                        f"{r.function} at {_fmt(r.lhs)} given probabilities {probs[key]} and {r.prob}"))
            else:
                report.append(Violation("duplicate", f"{r.function} at {_fmt(r.lhs)} declared twice"))
            continue
        images[key] = r.image
        probs[key] = r.prob

    for lhs, dist in grammar.distributions.items():
        mass = math.fsum(dist.values())
        if abs(mass - 1.0) > tol:
            report.append(Violation("mass", f"mass {mass:g} ≠ 1 at {_fmt(lhs)}"))

    if isinstance(grammar, TupleGrammar):
        _validate_tuple(grammar, report)
    else:
        for r in grammar.rules:
            if len(r.image) == 0:
                report.append(Violation("erasing", f"{r.function} rewrites {_fmt(r.lhs)} to the empty sequence"))

    defined = set(grammar.distributions)
    for s in grammar.start:
        if s not in defined:
            report.append(Violation("no-start", f"start category {_fmt(s)} has no rules"))
    used = {c for r in grammar.rules for c in grammar.rhs_categories(r.image) if not is_terminal(c)}
    for c in sorted(used - defined, key=str):
        report.append(Violation("undefined-nonterminal", f"{_fmt(c)} is used but never rewritten"))

    productive: set = set()
    changed = True
    while changed:
        changed = False
        for r in grammar.rules:
            if r.lhs in productive:
                continue
            if all(is_terminal(c) or c in productive for c in grammar.rhs_categories(r.image)):
                productive.add(r.lhs)
                changed = True
    reachable = set(grammar.start)
    todo = list(grammar.start)
    while todo:
        a = todo.pop()
        for r in grammar.rules:
            if r.lhs == a:
                for c in grammar.rhs_categories(r.image):
                    if not is_terminal(c) and c not in reachable:
                        reachable.add(c)
                        todo.append(c)
    for c in sorted((reachable & defined) - productive, key=str):
        report.append(Violation("unproductive", f"{_fmt(c)} derives no terminal string"))
    return report


def _validate_tuple(grammar: TupleGrammar, report: ValidationReport) -> None:
    seen: dict = {}

    def note(cat, dim, where):
        if seen.setdefault(cat, dim) != dim:
            report.append(Violation("dimension", f"{_fmt(cat)} used with dims {seen[cat]} and {dim} ({where})"))

    def functions(expr):
        if isinstance(expr, Call):
            yield expr.function
            for a in expr.args:
                yield from functions(a)

    for r in grammar.rules:
        if not isinstance(r.image, (Var, Call)):
            report.append(Violation("image", f"{r.function} at {_fmt(r.lhs)} is not a call expression"))
            continue
        note(r.lhs, r.image.dim, f"image of {r.function}")
        for v in variables(r.image):
            note(v.category, v.dim, f"argument in {r.function}")
        missing = [fn.name for fn in functions(r.image) if fn.flow is None]
        if missing:
            report.append(Violation("flow", f"{', '.join(missing)} has no component flow"))
            continue
        try:
            flow, leaves = linearize(r.image)
        except ValueError as exc:
            report.append(Violation("erasing", f"{r.function} at {_fmt(r.lhs)}: {exc}"))
            continue
        dims = [v.dim if isinstance(v, Var) else 1 for v in leaves]
        if not flow_is_linear(flow, dims):
            report.append(Violation("erasing", f"{r.function} at {_fmt(r.lhs)} drops a component or yields an empty one"))
    for s in grammar.start:
        if grammar.dims.get(s, 1) != 1:
            report.append(Violation("start-dimension", f"start category {_fmt(s)} has dimension {grammar.dims[s]}"))

