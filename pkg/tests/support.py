"""Test helpers that deliberately share no code with the package under test."""
import itertools
import random
from collections import Counter

from agparse.algebra import Ref, rho


# -- range sampling -----------------------------------------------------------

def defined_sample(fn, rng, max_len=8):
    """Random input and argument range tuples on which ``fn``'s range action is defined.

    The layout is built from the flow: output components are placed at random
    disjoint spots of the input, and each is cut into consecutive pieces, one
    per referenced argument component.  Pieces may be empty.
    """
    flow = fn.flow
    pieces = sum(len(c) for c in flow)
    n = rng.randint(0, max_len)
    cuts = sorted(rng.randint(1, n + 1) for _ in range(2 * len(flow) + pieces))
    tokens = [rng.choice("abc") for _ in range(n)]
    args = [[None] * d for d in fn.arg_dims]
    order = list(range(len(flow)))
    rng.shuffle(order)
    pos = iter(cuts)
    for ci in order:
        next(pos)  # leave a gap before the component
        start = next(pos)
        for el in flow[ci]:
            end = next(pos)
            args[el.arg][el.comp] = (start, end)
            start = end
    for i, a in enumerate(args):
        for j, r in enumerate(a):
            if r is None:
                s = rng.randint(1, n + 1)
                args[i][j] = (s, s)
    return tokens, tuple(tuple(a) for a in args)


def random_sample(fn, rng, max_len=8):
    n = rng.randint(0, max_len)
    tokens = [rng.choice("abc") for _ in range(n)]
    args = []
    for d in fn.arg_dims:
        comps = []
        for _ in range(d):
            s = rng.randint(1, n + 1)
            comps.append((s, rng.randint(s, n + 1)))
        args.append(tuple(comps))
    return tokens, tuple(args)


def check_homomorphism(fn, samples=500, seed=0):
    """Count defined samples on which rho(f_range(r)) == f(rho(r)); raises on a counterexample."""
    rng = random.Random(seed)
    checked = 0
    attempts = 0
    while checked < samples:
        attempts += 1
        if attempts > 20 * samples:
            raise AssertionError(f"{fn.name}: could not find {samples} defined samples")
        sampler = defined_sample if attempts % 4 else random_sample
        tokens, args = sampler(fn, rng)
        out = fn.apply_ranges(args)
        if out is None:
            continue
        expected = fn.evaluate(*(rho(a, tokens) for a in args))
        got = rho(out, tokens)
        if got != expected:
            raise AssertionError(f"{fn.name} on {args} over {tokens}: rho gives {got}, evaluator {expected}")
        checked += 1
    return checked


# -- an independent MG, working directly on strings -----------------------------

def _feat(text):
    if text.startswith("="):
        return ("R", text[1:])
    if text.endswith("="):
        return ("L", text[:-1])
    if text.startswith("+"):
        return ("+", text[1:])
    if text.startswith("-"):
        return ("-", text[1:])
    return ("c", text)


def mg_lexicon(entries):
    """``[("what", "d -wh"), ("", "=v +wh c"), ...]`` into string-level expressions."""
    return [((tuple(phon.split()), tuple(_feat(f) for f in feats.split())),) for phon, feats in entries]


def _merge(a, b):
    (s, fs), (t, gs) = a[0], b[0]
    if fs[0][0] not in "RL" or gs[0] != ("c", fs[0][1]) or len(fs) == 1:
        return None
    if len(gs) == 1:
        head = s + t if fs[0][0] == "R" else t + s
        return ((head, fs[1:]),) + a[1:] + b[1:]
    return ((s, fs[1:]),) + a[1:] + ((t, gs[1:]),) + b[1:]


def _move(a):
    s, fs = a[0]
    if fs[0][0] != "+" or len(fs) == 1:
        return None
    hits = [i for i, (_, gs) in enumerate(a) if i and gs[0] == ("-", fs[0][1])]
    if len(hits) != 1:
        return None
    i = hits[0]
    t, gs = a[i]
    rest = a[1:i] + a[i + 1:]
    if len(gs) == 1:
        return ((t + s, fs[1:]),) + rest
    return ((s, fs[1:]),) + a[1:i] + ((t, gs[1:]),) + a[i + 1:]


def mg_language(lexicon, start="c", depth=6):
    """Yields of all complete start-category expressions with derivation height <= depth."""
    by_height = {0: set(lexicon)}
    seen = set(lexicon)
    for h in range(1, depth + 1):
        new = set()
        old = [e for k in range(h) for e in by_height[k]]
        prev = by_height[h - 1]
        for a in old:
            for b in old:
                if a in prev or b in prev:
                    r = _merge(a, b)
                    if r is not None and r not in seen:
                        new.add(r)
        for a in prev:
            r = _move(a)
            if r is not None and r not in seen:
                new.add(r)
        seen |= new
        by_height[h] = new
    goal = ("c", start)
    return {e[0][0] for e in seen if len(e) == 1 and e[0][1] == (goal,)}


# -- a^n b^n c^n ----------------------------------------------------------------

def in_anbncn(word):
    n = len(word) // 3
    return n >= 1 and tuple(word) == ("a",) * n + ("b",) * n + ("c",) * n


def nearest_rejections(count=20, max_exponent=6):
    """Strings a^i b^j c^k outside the language, closest to it first.

    Distance is the spread of the exponents, ties broken by total length and
    then lexicographically, so the list is deterministic.
    """
    cands = []
    for i, j, k in itertools.product(range(0, max_exponent + 1), repeat=3):
        word = ("a",) * i + ("b",) * j + ("c",) * k
        if word and not in_anbncn(word):
            cands.append((max(i, j, k) - min(i, j, k), i + j + k, (i, j, k), word))
    cands.sort()
    return [c[3] for c in cands[:count]]


def token_multiset(word_tuple):
    return Counter(tok for word in word_tuple for tok in word)


__all__ = [
    "Ref",
    "check_homomorphism",
    "defined_sample",
    "in_anbncn",
    "mg_language",
    "mg_lexicon",
    "nearest_rejections",
    "random_sample",
    "token_multiset",
]
