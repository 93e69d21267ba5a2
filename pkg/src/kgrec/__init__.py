"""Explainable movie recommendations over a knowledge graph.

Pipeline: Horn rules ground a like/dislike query into a proof graph,
Personalized PageRank scores the solutions, and consolidation turns the
scored (entity, movie) pairs into ranked recommendations whose reasons are
the contributing entities.
"""

from .grounding import GroundingError, Limits, ProofGraph, ground, solutions, to_dot
from .kg import (
    Entity,
    FeedbackFact,
    FeedbackStore,
    FormatError,
    KGError,
    KindMismatchError,
    KnowledgeGraph,
    UnknownEntityError,
    append_feedback_log,
    load_edges,
    load_entities,
    replay_feedback_log,
)
from .ppr import PPRParams, ScoreVector, TransitionView, ppr_power, ppr_push
from .recommend import (
    PairScore,
    Reason,
    Recommendation,
    SolverParams,
    consolidate,
    explain,
    rank_pairs,
    recommend,
    to_api,
)
from .rules import (
    ArityError,
    Constant,
    DEFAULT_RULES,
    Literal,
    Rule,
    RuleError,
    RuleSet,
    RuleSyntaxError,
    Variable,
    default_rules,
    format_program,
    format_rule,
    parse_query,
    parse_rules,
)

__version__ = "0.1.0"
