"""PEG parsing with native left recursion, associativity, precedence and expression clusters."""

from .expr import (Expression, Grammar, GrammarBuilder, GrammarError, Kind, ResolutionError,
                   break_cycles, build_expression, compute_nullable, detect_left_cycles,
                   isomorphic, prepare, resolve_references, transform)
from .engine import ABSENT, ParseOutcome, ParseState, invoke, parse_root, read_extension, write_extension
from .cluster import ClusterError, ClusterGroup, cluster_from_alternates, cluster_groups
from .memo import (BoundedMemo, ErrorReport, FarthestErrorHandler, MemoKey, MemoStrategy,
                   PrecedenceMemo, bounded_memo_strategy, farthest_error_handler)
from .tree import SyntaxNode, serialize_tree
from .dsl import DSLError, dump_grammar, load_grammar

__all__ = [
    "ABSENT", "BoundedMemo", "ClusterError", "ClusterGroup", "DSLError", "ErrorReport",
    "Expression", "FarthestErrorHandler", "Grammar", "GrammarBuilder", "GrammarError", "Kind",
    "MemoKey", "MemoStrategy", "ParseOutcome", "ParseState", "PrecedenceMemo", "ResolutionError",
    "SyntaxNode", "break_cycles", "bounded_memo_strategy", "build_expression", "cluster_from_alternates",
    "cluster_groups", "compute_nullable", "detect_left_cycles", "dump_grammar", "farthest_error_handler",
    "invoke", "isomorphic", "load_grammar", "parse_root", "prepare", "read_extension",
    "resolve_references", "serialize_tree", "transform", "write_extension",
]
