"""Semiring-weighted chart parsing for abstract context-free, tuple-algebra and minimalist grammars."""
from .acfg import ContextFreeGrammar, RewriteRule, Terminal, TupleGrammar, oracle_generate, validate_grammar
from .interface import Completion, GrammarContract, Rule, check_conformance
from .io import dump_grammar, load_grammar, load_grammar_file
from .minimalist import LexicalItem, MinimalistGrammar, category, mg_merge, mg_move
from .parser import ChartParser, NoParse, ParseAborted, ParseForest, run_chartparser
from .semiring import BOOLEAN, INSIDE, LOG_INSIDE, LOG_VITERBI, VITERBI, LogProb

__all__ = [
    "BOOLEAN",
    "INSIDE",
    "LOG_INSIDE",
    "LOG_VITERBI",
    "VITERBI",
    "ChartParser",
    "Completion",
    "ContextFreeGrammar",
    "GrammarContract",
    "LexicalItem",
    "LogProb",
    "MinimalistGrammar",
    "NoParse",
    "ParseAborted",
    "ParseForest",
    "RewriteRule",
    "Rule",
    "Terminal",
    "TupleGrammar",
    "category",
    "check_conformance",
    "dump_grammar",
    "load_grammar",
    "load_grammar_file",
    "mg_merge",
    "mg_move",
    "oracle_generate",
    "run_chartparser",
    "validate_grammar",
]
