"""Tuple algebra over words, its partial range algebra, and call expressions.

Words are tuples of tokens and a *word tuple* is a tuple of words.  A
*range* ``(i, j)`` is a 1-based half-open span of the input: it denotes the
tokens ``w[i-1:j-1]``.  A *range tuple* is a tuple of ranges and denotes a
word tuple through :func:`rho`.

Term functions are declared by a *component flow*: one entry per output
component, each a sequence of references ``Ref(arg, comp)`` into the
arguments (0-based) or literal tokens.  The same flow drives the word action
(concatenation) and the range action (:func:`range_concat`, which is
partial), so both carriers are always in step.  Functions may also be built
from hand-written evaluators; the parser only relies on
:meth:`TermFunction.apply_ranges`.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, NamedTuple, Optional, Sequence, Union

Word = tuple
WordTuple = tuple
Range = tuple  # (start, end), 1-based, start <= end
RangeTuple = tuple


class Ref(NamedTuple):
    """Component ``comp`` of argument ``arg`` (both 0-based) inside a flow."""

    arg: int
    comp: int

    def __str__(self) -> str:
        return f"x{self.arg + 1}.{self.comp + 1}"


FlowElement = Union[Ref, str]
Flow = tuple  # tuple[tuple[FlowElement, ...], ...]


class UndefinedApplication(ValueError):
    """A partial term function was applied outside its domain."""


class DimensionError(TypeError):
    """Arguments do not match a function's signature."""


class Signature(NamedTuple):
    argument_dims: tuple
    result_dim: int


# -- ranges -----------------------------------------------------------------

def range_concat(r1: Range, r2: Range) -> Optional[Range]:
    """Concatenate two ranges; ``None`` unless ``r1`` ends where ``r2`` starts."""
    if r1[1] != r2[0]:
        return None
    return (r1[0], r2[1])


def rho(rt: RangeTuple, tokens: Sequence[str]) -> WordTuple:
    """The word tuple a range tuple denotes over ``tokens``."""
    n = len(tokens)
    out = []
    for start, end in rt:
        if not 1 <= start <= end <= n + 1:
            raise IndexError(f"range {(start, end)} out of bounds for input of length {n}")
        out.append(tuple(tokens[start - 1:end - 1]))
    return tuple(out)


def covered_length(rt: RangeTuple) -> int:
    return sum(end - start for start, end in rt)


def ranges_overlap(a: RangeTuple, b: RangeTuple) -> bool:
    """True when some token is covered by both tuples.  Empty ranges overlap nothing."""
    for s1, e1 in a:
        for s2, e2 in b:
            if max(s1, s2) < min(e1, e2):
                return True
    return False


# -- term functions ---------------------------------------------------------

def _run_flow(flow: Flow, args: Sequence[Any], concat: Callable, lift: Callable, empty: Any):
    out = []
    for component in flow:
        acc = None
        for el in component:
            value = args[el.arg][el.comp] if isinstance(el, Ref) else lift(el)
            if value is None:
                return None
            acc = value if acc is None else concat(acc, value)
            if acc is None:
                return None
        if acc is None:
            acc = empty
            if acc is None:
                return None
        out.append(acc)
    return tuple(out)


def check_flow(flow: Flow, arg_dims: Sequence[int]) -> None:
    """Reject malformed references and copying (a component used twice)."""
    used = Counter()
    for component in flow:
        for el in component:
            if isinstance(el, Ref):
                if not (0 <= el.arg < len(arg_dims) and 0 <= el.comp < arg_dims[el.arg]):
                    raise ValueError(f"flow reference {el} outside arguments of dims {tuple(arg_dims)}")
                used[el] += 1
            elif not isinstance(el, str):
                raise ValueError(f"bad flow element {el!r}")
    copied = sorted(str(r) for r, k in used.items() if k > 1)
    if copied:
        raise ValueError(f"flow copies argument components {', '.join(copied)}")


def flow_is_linear(flow: Flow, arg_dims: Sequence[int]) -> bool:
    """Every argument component is used exactly once and no output component is empty."""
    used = [el for comp in flow for el in comp if isinstance(el, Ref)]
    wanted = {Ref(a, c) for a, d in enumerate(arg_dims) for c in range(d)}
    return len(used) == len(set(used)) and set(used) == wanted and all(flow)


def format_flow(flow: Flow) -> str:
    return " , ".join(" ".join(str(el) if isinstance(el, Ref) else repr(el) for el in comp) for comp in flow)


@dataclass(frozen=True)
class TermFunction:
    """A (partial) operation of the tuple algebra together with its range action."""

    name: str
    arg_dims: tuple
    result_dim: int
    evaluator: Callable = field(compare=False, repr=False)
    range_evaluator: Optional[Callable] = field(default=None, compare=False, repr=False)
    flow: Optional[Flow] = None

    @property
    def signature(self) -> Signature:
        return Signature(self.arg_dims, self.result_dim)

    @property
    def is_constant(self) -> bool:
        return not self.arg_dims

    def _check(self, args: Sequence[tuple]) -> None:
        dims = tuple(len(a) for a in args)
        if dims != self.arg_dims:
            raise DimensionError(f"{self.name} expects argument dims {self.arg_dims}, got {dims}")

    def evaluate(self, *args: WordTuple) -> WordTuple:
        self._check(args)
        result = self.evaluator(args)
        if result is None:
            raise UndefinedApplication(f"{self.name} is undefined on {args!r}")
        return result

    def apply_ranges(self, args: Sequence[RangeTuple]) -> Optional[RangeTuple]:
        """Range action; ``None`` where an embedded concatenation is undefined."""
        self._check(args)
        if self.range_evaluator is None:
            raise TypeError(f"{self.name} has no range action")
        return self.range_evaluator(tuple(args))

    @classmethod
    def from_flow(cls, name: str, arg_dims: Sequence[int], flow: Sequence[Sequence[FlowElement]]) -> TermFunction:
        arg_dims = tuple(arg_dims)
        flow = tuple(tuple(comp) for comp in flow)
        check_flow(flow, arg_dims)

        def words(args):
            return _run_flow(flow, args, lambda a, b: a + b, lambda tok: (tok,), ())

        has_tokens = any(isinstance(el, str) for comp in flow for el in comp)
        ranges = None
        if not has_tokens:
            def ranges(args):
                return _run_flow(flow, args, range_concat, lambda tok: None, None)

        return cls(name, arg_dims, len(flow), words, ranges, flow)

    @classmethod
    def constant(cls, name: str, value: WordTuple) -> TermFunction:
        return cls.from_flow(name, (), [tuple(word) for word in value])


def concat_function(n: int = 2) -> TermFunction:
    return TermFunction.from_flow(f"concat{n}" if n != 2 else "concat", (1,) * n, [[Ref(i, 0) for i in range(n)]])


def tuple_constructor(n: int) -> TermFunction:
    return TermFunction.from_flow(f"list{n}", (1,) * n, [[Ref(i, 0)] for i in range(n)])


def projection(k: int, n: int) -> TermFunction:
    """``pi_k`` on ``n``-tuples, ``k`` 1-based."""
    if not 1 <= k <= n:
        raise ValueError(f"projection index {k} outside 1..{n}")
    return TermFunction.from_flow(f"pi{k}/{n}", (n,), [[Ref(0, k - 1)]])


def terminal_constant(token: str) -> TermFunction:
    return TermFunction.constant(repr(token), ((token,),))


# -- call expressions -------------------------------------------------------

@dataclass(frozen=True)
class Var:
    """A nonterminal occurrence inside a call expression."""

    category: Hashable
    dim: int = 1

    def __str__(self) -> str:
        return str(self.category)


@dataclass(frozen=True)
class Call:
    function: TermFunction
    args: tuple = ()

    def __post_init__(self):
        dims = tuple(a.dim for a in self.args)
        if dims != self.function.arg_dims:
            raise DimensionError(
                f"{self.function.name} expects argument dims {self.function.arg_dims}, got {dims}")

    @property
    def dim(self) -> int:
        return self.function.result_dim

    def __str__(self) -> str:
        return f"{self.function.name}[{', '.join(str(a) for a in self.args)}]"


CallExpression = Union[Var, Call]


def variables(expr: CallExpression) -> list:
    """Variable occurrences in pre-order."""
    if isinstance(expr, Var):
        return [expr]
    out = []
    for a in expr.args:
        out.extend(variables(a))
    return out


def evaluate_call_expression(expr: CallExpression) -> WordTuple:
    if isinstance(expr, Var):
        raise ValueError(f"cannot evaluate expression containing variable {expr.category!r}")
    return expr.function.evaluate(*(evaluate_call_expression(a) for a in expr.args))


def substitute_first(expr: CallExpression, replacement: CallExpression) -> tuple:
    """Replace the first variable (pre-order); returns ``(new_expr, replaced_var)``."""
    if isinstance(expr, Var):
        return replacement, expr
    args = list(expr.args)
    for i, a in enumerate(args):
        new, hit = substitute_first(a, replacement)
        if hit is not None:
            args[i] = new
            return Call(expr.function, tuple(args)), hit
    return expr, None


def first_variable(expr: CallExpression) -> Optional[Var]:
    if isinstance(expr, Var):
        return expr
    for a in expr.args:
        v = first_variable(a)
        if v is not None:
            return v
    return None


def count_tokens(expr: CallExpression) -> int:
    """Tokens contributed by constants (plus each variable's dimension as a lower bound)."""
    if isinstance(expr, Var):
        return expr.dim
    own = 0
    if expr.function.flow is not None:
        own = sum(1 for comp in expr.function.flow for el in comp if isinstance(el, str))
    return own + sum(count_tokens(a) for a in expr.args)


def linearize(expr: CallExpression) -> tuple:
    """Compose an expression into one flow over its leaves.

    Returns ``(flow, leaves)``.  ``leaves`` lists, in order of first appearance
    in the composed flow, either a :class:`Var` or a terminal token string;
    references in ``flow`` index into ``leaves``.  Every function involved
    must carry a flow.
    """
    slots: list = []

    def walk(e):
        if isinstance(e, Var):
            j = len(slots)
            slots.append(e)
            return tuple((Ref(j, c),) for c in range(e.dim))
        if e.function.flow is None:
            raise ValueError(f"{e.function.name} has no component flow")
        args = tuple(walk(a) for a in e.args)
        return _run_flow(e.function.flow, args, lambda a, b: a + b, lambda tok: (tok,), ())

    raw = walk(expr)
    remap: dict = {}
    leaves: list = []
    flow = []
    for comp in raw:
        new_comp = []
        for el in comp:
            if isinstance(el, Ref):
                if el.arg not in remap:
                    remap[el.arg] = len(leaves)
                    leaves.append(slots[el.arg])
                new_comp.append(Ref(remap[el.arg], el.comp))
            else:
                new_comp.append(Ref(len(leaves), 0))
                leaves.append(el)
        flow.append(tuple(new_comp))
    missing = [v for j, v in enumerate(slots) if j not in remap]
    if missing:
        raise ValueError(f"expression {expr} erases variable(s) {', '.join(map(str, missing))}")
    return tuple(flow), leaves
