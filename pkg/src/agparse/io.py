"""Reading and writing grammar files.

Three line-oriented formats are supported.  All use ``#`` comments, an
optional ``format NAME`` directive and one or more ``start`` lines.

``acfg``::

    start S
    r0: S -> S S @ 0.4
    r1: S -> 'x' @ 0.6

Lines sharing a function name form one rewrite function.  Bare words are
categories; quoted words are terminals.

``mg``::

    start c
    what :: d -wh @ 1.0
    <eps> :: =v +wh c

``mcfg`` (tuple-algebra grammars)::

    dim A 2
    op g : 2 -> 2 = 'a' x1.1 , 'b' x1.2 'c'
    op base : -> 2 = 'a' , 'b' 'c'
    op join : 2 -> 1 = x1.1 x1.2
    rule base: A -> base @ 0.5
    rule g: A -> g[A] @ 0.5
    rule s: S -> join[A] @ 1
    start S

Operations are declared by their component flow: output components are
separated by commas; ``xI.J`` is component J of argument I (both 1-based)
and quoted words are tokens.  Images are prefix call expressions; besides
declared operations, ``concat[...]``, ``list[...]`` and ``piK[...]`` are
built in, and a quoted word is a one-token constant.
"""
from __future__ import annotations

import ast
import re
from pathlib import Path
from typing import NamedTuple, Optional

from .acfg import (
    AbstractGrammar,
    ContextFreeGrammar,
    GrammarError,
    RewriteRule,
    Terminal,
    TupleGrammar,
    ValidationReport,
    Violation,
    validate_grammar,
)
from .algebra import Call, Ref, TermFunction, Var, concat_function, projection, terminal_constant, tuple_constructor
from .minimalist import LexicalItem, MinimalistGrammar, parse_feature

__all__ = [
    "FORMATS",
    "GrammarSyntaxError",
    "detect_format",
    "dump_acfg",
    "dump_grammar",
    "dump_mcfg",
    "dump_mg",
    "load_acfg",
    "load_grammar",
    "load_grammar_file",
    "load_mcfg",
    "load_mg",
]

FORMATS = ("acfg", "mg", "mcfg")


class GrammarSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line, self.column = line, column
        super().__init__(f"line {line}, column {column}: {message}")


class Token(NamedTuple):
    kind: str  # "quoted", "punct" or "word"
    text: str
    column: int  # 1-based

    @property
    def value(self) -> str:
        return ast.literal_eval(self.text) if self.kind == "quoted" else self.text


_TOKEN = re.compile(r"""
    (?P<quoted>'(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*")
  | (?P<punct>->|::|[:@,\[\]]|=(?=\s|$))
  | (?P<word>(?:(?!->)[^\s'"@:,\[\]])+)
  | (?P<bad>\S)
""", re.VERBOSE)


def _tokenize(line: str, lineno: int) -> list:
    body = _strip_comment(line)
    out = []
    for m in _TOKEN.finditer(body):
        kind = m.lastgroup
        if kind == "bad":
            raise GrammarSyntaxError(f"unexpected character {m.group()!r}", lineno, m.start() + 1)
        out.append(Token(kind, m.group(), m.start() + 1))
    return out


def _strip_comment(line: str) -> str:
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote and line[i - 1] != "\\":
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch == "#":
            return line[:i]
    return line


class _Lines:
    """Tokenised non-blank lines with a small cursor API for the parsers."""

    def __init__(self, text: str):
        self.lines = []
        for n, raw in enumerate(text.splitlines(), 1):
            toks = _tokenize(raw, n)
            if toks:
                self.lines.append((n, toks, len(raw.rstrip()) + 1))


class _Cursor:
    def __init__(self, lineno: int, tokens: list, end_col: int):
        self.lineno, self.tokens, self.pos, self.end_col = lineno, tokens, 0, end_col

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        col = tok.column if tok else self.end_col
        raise GrammarSyntaxError(message, self.lineno, col)

    def next(self, what: str = "token") -> Token:
        tok = self.peek()
        if tok is None:
            self.error(f"expected {what}, found end of line")
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != "punct" or tok.text != text:
            self.error(f"expected {text!r}" + (f", found {tok.text!r}" if tok else ", found end of line"))
        self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.kind == "punct" and tok.text == text:
            self.pos += 1
            return True
        return False

    def word(self, what: str) -> Token:
        tok = self.next(what)
        if tok.kind != "word":
            self.error(f"expected {what}, found {tok.text!r}", tok)
        return tok

    def number(self, what: str = "probability") -> float:
        tok = self.word(what)
        try:
            return float(tok.text)
        except ValueError:
            self.error(f"expected {what}, found {tok.text!r}", tok)

    def rest(self) -> list:
        out = self.tokens[self.pos:]
        self.pos = len(self.tokens)
        return out

    def done(self) -> None:
        if self.peek() is not None:
            self.error(f"unexpected {self.peek().text!r}")


def _cursors(text: str):
    for lineno, toks, end in _Lines(text).lines:
        yield _Cursor(lineno, toks, end)


def _directive(cur: _Cursor, start: list) -> bool:
    """Handle ``format`` and ``start`` lines; True if the line was one."""
    first = cur.peek()
    if first.kind != "word" or first.text not in ("format", "start"):
        return False
    nxt = cur.tokens[1] if len(cur.tokens) > 1 else None
    if nxt is not None and nxt.kind == "punct":
        return False  # a rule that happens to be named "start" or "format"
    cur.next()
    if first.text == "start":
        names = cur.rest()
        if not names:
            cur.error("start needs at least one category")
        start.extend(names)
    else:
        tag = cur.word("format name")
        if tag.text not in FORMATS:
            cur.error(f"unknown format {tag.text!r}", tag)
        cur.done()
    return True


def _finish(grammar: AbstractGrammar, start_tokens: list, validate: bool) -> AbstractGrammar:
    if validate:
        report = validate_grammar(grammar)
        if not start_tokens:
            report.append(Violation("no-start", "no start declaration"))
        if not report.ok:
            raise GrammarError(report)
    return grammar


# -- acfg -------------------------------------------------------------------

def load_acfg(text: str, *, validate: bool = True, **options) -> ContextFreeGrammar:
    rules, start = [], []
    for cur in _cursors(text):
        if _directive(cur, start):
            continue
        name = cur.word("function name").text
        cur.expect(":")
        lhs = cur.word("left-hand side").text
        cur.expect("->")
        rhs = []
        while cur.peek() is not None and not (cur.peek().kind == "punct" and cur.peek().text == "@"):
            tok = cur.next()
            if tok.kind == "quoted":
                rhs.append(Terminal(tok.value))
            elif tok.kind == "word":
                rhs.append(tok.text)
            else:
                cur.error(f"unexpected {tok.text!r} in right-hand side", tok)
        if not rhs:
            cur.error("empty right-hand side")
        cur.expect("@")
        prob = cur.number()
        cur.done()
        rules.append(RewriteRule(name, lhs, tuple(rhs), prob))
    g = ContextFreeGrammar(rules, tuple(t.text for t in start), **options)
    return _finish(g, start, validate)


def _quote(token: str) -> str:
    return repr(token)


def dump_acfg(grammar: ContextFreeGrammar) -> str:
    lines = ["format acfg", "start " + " ".join(map(str, grammar.start))]
    for r in grammar.rules:
        rhs = " ".join(_quote(c.token) if isinstance(c, Terminal) else str(c) for c in r.image)
        lines.append(f"{r.function}: {r.lhs} -> {rhs} @ {r.prob!r}")
    return "\n".join(lines) + "\n"


# -- mg ---------------------------------------------------------------------

EPSILON = "<eps>"


def load_mg(text: str, *, validate: bool = True) -> MinimalistGrammar:
    items, start = [], []
    for cur in _cursors(text):
        if _directive(cur, start):
            continue
        phon_tok = cur.next("phonology")
        if phon_tok.kind == "punct":
            cur.error(f"expected phonology, found {phon_tok.text!r}", phon_tok)
        phon = () if phon_tok.text == EPSILON and phon_tok.kind == "word" else (phon_tok.value,)
        cur.expect("::")
        features = []
        while cur.peek() is not None and not (cur.peek().kind == "punct" and cur.peek().text == "@"):
            tok = cur.next()
            try:
                if tok.kind != "word":
                    raise ValueError
                features.append(parse_feature(tok.text))
            except ValueError:
                cur.error(f"bad feature {tok.text!r}", tok)
        if not features:
            cur.error("lexical item needs at least one feature")
        prob = cur.number() if cur.accept("@") else 1.0
        cur.done()
        items.append(LexicalItem(phon, tuple(features), prob))
    if not start:
        raise GrammarError(ValidationReport([Violation("no-start", "no start declaration")]))
    try:
        g = MinimalistGrammar(items, [t.text for t in start])
    except ValueError as exc:
        tok = start[0]
        raise GrammarSyntaxError(str(exc), 0, tok.column) from None
    if validate:
        problems = g.validate()
        if problems:
            raise GrammarError(ValidationReport(Violation("lexicon", p) for p in problems))
    return g


def _bare_or_quoted(token: str) -> str:
    m = _TOKEN.match(token)
    if m and m.lastgroup == "word" and m.end() == len(token) and token not in (EPSILON, "start", "format"):
        return token
    return _quote(token)


def dump_mg(grammar: MinimalistGrammar) -> str:
    lines = ["format mg", "start " + " ".join(str(s) for s in grammar.start)]
    for item in grammar.lexicon:
        phon = _bare_or_quoted(item.phon[0]) if item.phon else EPSILON
        lines.append(f"{phon} :: {' '.join(map(str, item.features))} @ {item.score!r}")
    return "\n".join(lines) + "\n"


# -- mcfg -------------------------------------------------------------------

_REF = re.compile(r"x(\d+)\.(\d+)\Z")
_PI = re.compile(r"pi(\d+)\Z")


def _parse_op(cur: _Cursor) -> TermFunction:
    name = cur.word("operation name").text
    cur.expect(":")
    dims = []
    while cur.peek() is not None and cur.peek().kind == "word":
        tok = cur.next()
        if not tok.text.isdigit() or int(tok.text) < 1:
            cur.error(f"expected a dimension, found {tok.text!r}", tok)
        dims.append(int(tok.text))
    cur.expect("->")
    result = cur.word("result dimension")
    cur.expect("=")
    flow, comp = [], []
    while cur.peek() is not None:
        tok = cur.next()
        if tok.kind == "punct" and tok.text == ",":
            flow.append(comp)
            comp = []
        elif tok.kind == "quoted":
            comp.append(tok.value)
        elif tok.kind == "word" and _REF.match(tok.text):
            i, j = map(int, _REF.match(tok.text).groups())
            comp.append(Ref(i - 1, j - 1))
        else:
            cur.error(f"bad flow element {tok.text!r}", tok)
    flow.append(comp)
    if not result.text.isdigit() or int(result.text) != len(flow):
        cur.error(f"{name} declares result dimension {result.text} but its flow has {len(flow)} component(s)", result)
    try:
        return TermFunction.from_flow(name, dims, flow)
    except ValueError as exc:
        cur.error(str(exc), result)


def _parse_expr(cur: _Cursor, ops: dict, dims: dict):
    tok = cur.next("call expression")
    if tok.kind == "quoted":
        return Call(terminal_constant(tok.value))
    if tok.kind != "word":
        cur.error(f"unexpected {tok.text!r} in call expression", tok)
    name = tok.text
    if not cur.accept("["):
        if name in ops and ops[name].is_constant:
            return Call(ops[name])
        return Var(name, dims.get(name, 1))
    args = []
    if not cur.accept("]"):
        while True:
            args.append(_parse_expr(cur, ops, dims))
            if cur.accept("]"):
                break
            cur.expect(",")
    arg_dims = tuple(a.dim for a in args)
    if name in ops:
        fn = ops[name]
    elif name == "concat":
        fn = concat_function(len(args))
    elif name == "list":
        fn = tuple_constructor(len(args))
    elif _PI.match(name) and len(args) == 1:
        try:
            fn = projection(int(_PI.match(name).group(1)), args[0].dim)
        except ValueError as exc:
            cur.error(str(exc), tok)
    else:
        cur.error(f"unknown operation {name!r}", tok)
    if fn.arg_dims != arg_dims:
        cur.error(f"{name} expects argument dims {fn.arg_dims}, got {arg_dims}", tok)
    return Call(fn, tuple(args))


def load_mcfg(text: str, *, validate: bool = True) -> TupleGrammar:
    cursors = list(_cursors(text))
    ops: dict = {}
    dims: dict = {}
    start: list = []
    pending = []
    for cur in cursors:
        if _directive(cur, start):
            continue
        head = cur.word("declaration")
        if head.text == "op":
            fn = _parse_op(cur)
            if fn.name in ops:
                cur.error(f"operation {fn.name} declared twice", head)
            ops[fn.name] = fn
        elif head.text == "dim":
            cat = cur.word("category").text
            d = cur.word("dimension")
            if not d.text.isdigit() or int(d.text) < 1:
                cur.error(f"bad dimension {d.text!r}", d)
            cur.done()
            dims[cat] = int(d.text)
        elif head.text == "rule":
            pending.append(cur)
        else:
            cur.error(f"unknown declaration {head.text!r}", head)
    rules = []
    for cur in pending:
        name = cur.word("function name").text
        cur.expect(":")
        lhs = cur.word("left-hand side").text
        cur.expect("->")
        image = _parse_expr(cur, ops, dims)
        cur.expect("@")
        prob = cur.number()
        cur.done()
        rules.append(RewriteRule(name, lhs, image, prob))
    g = TupleGrammar(rules, tuple(t.text for t in start))
    return _finish(g, start, validate)


def _is_builtin(fn: TermFunction) -> bool:
    if fn.name == "concat" or re.fullmatch(r"concat\d+", fn.name):
        return fn == concat_function(len(fn.arg_dims))
    if re.fullmatch(r"list\d+", fn.name):
        return fn == tuple_constructor(len(fn.arg_dims))
    m = re.fullmatch(r"pi(\d+)/(\d+)", fn.name)
    if m:
        return fn == projection(int(m.group(1)), int(m.group(2)))
    if fn.is_constant and fn.flow is not None and len(fn.flow) == 1 and len(fn.flow[0]) == 1:
        return fn == terminal_constant(fn.flow[0][0])
    return False


def _format_expr(expr) -> str:
    if isinstance(expr, Var):
        return str(expr.category)
    fn = expr.function
    if _is_builtin(fn):
        if fn.is_constant:
            return _quote(fn.flow[0][0])
        name = fn.name.split("/")[0]
        name = "concat" if name.startswith("concat") else "list" if name.startswith("list") else name
    else:
        name = fn.name
        if fn.is_constant:
            return name
    return f"{name}[{', '.join(_format_expr(a) for a in expr.args)}]"


def _format_op(fn: TermFunction) -> str:
    comps = []
    for comp in fn.flow:
        comps.append(" ".join(str(el) if isinstance(el, Ref) else _quote(el) for el in comp))
    return f"op {fn.name} : {' '.join(map(str, fn.arg_dims))} -> {fn.result_dim} = {' , '.join(comps)}".replace(":  ->", ": ->")


def dump_mcfg(grammar: TupleGrammar) -> str:
    ops: dict = {}

    def collect(expr):
        if isinstance(expr, Call):
            if not _is_builtin(expr.function):
                ops.setdefault(expr.function.name, expr.function)
            for a in expr.args:
                collect(a)

    for r in grammar.rules:
        collect(r.image)
    lines = ["format mcfg", "start " + " ".join(map(str, grammar.start))]
    lines += [f"dim {c} {d}" for c, d in grammar.dims.items() if d != 1]
    lines += [_format_op(fn) for fn in ops.values()]
    lines += [f"rule {r.function}: {r.lhs} -> {_format_expr(r.image)} @ {r.prob!r}" for r in grammar.rules]
    return "\n".join(lines) + "\n"


# -- dispatch -----------------------------------------------------------------

_LOADERS = {"acfg": load_acfg, "mg": load_mg, "mcfg": load_mcfg}


def detect_format(text: str, filename: Optional[str] = None) -> str:
    """Use a ``format`` directive, else the file suffix, else the shape of the lines."""
    for line in text.splitlines():
        words = _strip_comment(line).split()
        if len(words) == 2 and words[0] == "format" and words[1] in FORMATS:
            return words[1]
    if filename:
        suffix = Path(filename).suffix.lstrip(".")
        if suffix in FORMATS:
            return suffix
    for line in text.splitlines():
        words = _strip_comment(line).split()
        if not words or words[0] in ("start", "format"):
            continue
        if "::" in words:
            return "mg"
        if words[0] in ("op", "rule", "dim"):
            return "mcfg"
        return "acfg"
    return "acfg"


def load_grammar(text: str, fmt: Optional[str] = None, *, filename: Optional[str] = None, validate: bool = True):
    fmt = fmt or detect_format(text, filename)
    if fmt not in _LOADERS:
        raise ValueError(f"unknown grammar format {fmt!r}")
    return _LOADERS[fmt](text, validate=validate)


def load_grammar_file(path, fmt: Optional[str] = None, *, validate: bool = True):
    path = Path(path)
    return load_grammar(path.read_text(encoding="utf-8"), fmt, filename=path.name, validate=validate)


def dump_grammar(grammar) -> str:
    if isinstance(grammar, MinimalistGrammar):
        return dump_mg(grammar)
    if isinstance(grammar, TupleGrammar):
        return dump_mcfg(grammar)
    return dump_acfg(grammar)
