import logging
import math

import pytest

from agparse.acfg import ContextFreeGrammar, RewriteRule, Terminal
from agparse.minimalist import LexicalItem, MinimalistGrammar, category, parse_feature
from agparse.parser import (
    ChartParser,
    EdgeCompletion,
    NoParse,
    ParseAborted,
    TerminalCompletion,
    Traversal,
    run_chartparser,
)
from agparse.semiring import BOOLEAN, INSIDE, LOG_INSIDE, LOG_VITERBI, VITERBI

X = Terminal("x")


def binary():
    return ContextFreeGrammar.from_classical([("S", ("S", "S"), 0.4), ("S", (X,), 0.6)], "S")


def test_binary_pcfg_values():
    g = binary()
    assert run_chartparser(g, ["x"]).inside_prob() == pytest.approx(0.6, abs=1e-12)
    assert run_chartparser(g, ["x", "x"]).inside_prob() == pytest.approx(0.144, abs=1e-12)
    assert run_chartparser(g, ["x"] * 3).inside_prob() == pytest.approx(0.06912, abs=1e-12)


@pytest.mark.parametrize("sr", [INSIDE, LOG_INSIDE, VITERBI, LOG_VITERBI, BOOLEAN], ids=lambda s: s.name)
def test_every_semiring_runs(sr):
    forest = run_chartparser(binary(), ["x"] * 4, sr)
    assert forest.recognized
    assert forest.to_dict()["tree"]["category"] == "S"


def test_viterbi_below_inside():
    g = binary()
    for n in range(1, 7):
        w = ["x"] * n
        assert run_chartparser(g, w, LOG_VITERBI).inside_prob() <= run_chartparser(g, w).inside_prob() + 1e-15
    assert run_chartparser(g, ["x"] * 3, LOG_VITERBI).inside_prob() == pytest.approx(0.4 ** 2 * 0.6 ** 3)


def test_logbook_keys_unique_and_backpointers_resolve():
    forest = run_chartparser(binary(), ["x"] * 5)
    keys = [(it.kind, it.key) for it in forest.items]
    assert len(keys) == len(set(keys))
    n = len(forest.items)
    for it in forest.items:
        assert it.in_chart and not it.in_agenda
        for bp in it.backpointers.values():
            ids = {Traversal: lambda b: [b.edge, b.constituent], EdgeCompletion: lambda b: [b.edge],
                   TerminalCompletion: lambda b: []}[type(bp)](bp)
            assert all(i is None or 0 <= i < n for i in ids)
        expected = forest.semiring.sum(b.score for b in it.backpointers.values())
        assert it.score == expected


def test_cf_edges_carry_one_contiguous_span():
    forest = run_chartparser(binary(), ["x"] * 4)
    for it in forest.items:
        if it.is_edge:
            (span,) = it.key[1]
            assert len(span) == 1


def test_axioms_and_introduced_edges():
    forest = run_chartparser(binary(), ["x", "x"])
    terminal = forest.constituent(X, ((1, 2),))
    assert isinstance(next(iter(terminal.backpointers.values())), TerminalCompletion)
    seeded = [it for it in forest.items if it.is_edge and it.key == (("S",), (((1, 3),),))]
    assert seeded and (None, forest.constituent("S", ((1, 3),)).id) in seeded[0].backpointers


def test_fundamental_rule_needs_adjacency():
    g = ContextFreeGrammar.from_classical([
        ("S", ("NP", "VP"), 1.0), ("NP", (Terminal("she"),), 1.0), ("VP", (Terminal("runs"),), 1.0)], "S")
    forest = run_chartparser(g, ["she", "runs"])
    assert forest.recognized
    edge_keys = {it.key for it in forest.items if it.is_edge}
    assert (("NP", "VP"), (((1, 3),),)) in edge_keys
    forest = run_chartparser(g, ["she", "she", "runs"])
    assert not forest.recognized


def test_acyclic_items_finish_on_second_pop():
    forest = run_chartparser(binary(), ["x", "x"])
    assert forest.stats["requeues"] == 0
    assert forest.stats["pops"] == 2 * len(forest.items)


def test_cyclic_grammar_converges(caplog):
    g = ContextFreeGrammar.from_classical([("S", ("S",), 0.3), ("S", (X,), 0.7)], "S")
    with caplog.at_level(logging.INFO, logger="agparse.parser"):
        forest = run_chartparser(g, ["x"], tol=1e-12)
    assert abs(forest.inside_prob() - 1.0) <= 1e-11
    assert 0 < forest.stats["requeues"] < 200
    assert "requeues" in caplog.text


def test_boolean_never_requeues_more_than_once_per_item():
    g = ContextFreeGrammar.from_classical([("S", ("S",), 0.3), ("S", (X,), 0.7)], "S")
    forest = run_chartparser(g, ["x"], BOOLEAN, tol=0.0)
    assert forest.recognized
    assert forest.stats["requeues"] <= len(forest.items)


def test_unknown_token_is_diagnosed():
    forest = run_chartparser(binary(), ["x", "y"])
    assert not forest.recognized
    assert forest.diagnostics == ("unknown token 'y' at 2",)
    with pytest.raises(NoParse):
        forest.best()
    assert forest.to_dict() == {"recognized": False, "score": 0.0, "tree": None,
                                "diagnostics": ["unknown token 'y' at 2"]}


def test_empty_input():
    assert not run_chartparser(binary(), []).recognized
    g = MinimalistGrammar([LexicalItem((), (parse_feature("c"),), 0.5)], ["c"])
    forest = run_chartparser(g, [])
    assert forest.recognized and forest.inside_prob() == pytest.approx(0.5)
    assert forest.best().to_bracketed() == "(c [lex] <eps>)"


def test_budget_abort_keeps_partial_forest():
    with pytest.raises(ParseAborted) as info:
        ChartParser(binary(), budget=10).parse(["x"] * 6)
    assert len(info.value.forest.items) == 10


def test_best_derivation_tree():
    g = ContextFreeGrammar([
        RewriteRule("pair", "S", ("S", "S"), 0.4), RewriteRule("leaf", "S", (X,), 0.6)], "S")
    tree = run_chartparser(g, ["x", "x"]).best()
    assert tree.to_bracketed() == "(S [pair] (S [leaf] ('x' [lex] x)) (S [leaf] ('x' [lex] x)))"
    assert tree.range == ((1, 3),)
    assert tree.to_dict()["children"][1]["range"] == [[2, 3]]
    assert tree.size() == 5


def test_best_derivation_ignores_cycles():
    g = ContextFreeGrammar.from_classical([("S", ("S",), 0.3), ("S", (X,), 0.7)], "S")
    forest = run_chartparser(g, ["x"], LOG_VITERBI)
    assert forest.best().to_bracketed() == "(S [r1] ('x' [lex] x))"
    assert math.isclose(math.exp(forest.best_log_weight()), 0.7)


def test_mg_edges_combine_discontinuous_ranges():
    lexicon = [LexicalItem(("cooked",), tuple(map(parse_feature, "=d d= v".split()))),
               LexicalItem(("what",), tuple(map(parse_feature, "d -wh".split())))]
    g = MinimalistGrammar(lexicon, ["v"])
    forest = run_chartparser(g, ["cooked", "what"])
    assert forest.constituent(category("d= v", "-wh"), ((1, 2), (2, 3))) is not None
    edge_keys = [it.key for it in forest.items if it.is_edge and len(it.key[1]) == 2]
    assert (edge_keys[0][1]) == (((1, 2),), ((2, 3),))


def test_parses_are_deterministic():
    g = binary()
    assert run_chartparser(g, ["x"] * 5).to_json() == run_chartparser(g, ["x"] * 5).to_json()
