"""Recommendation pipeline: query grounding, PPR scoring, consolidation.

For a user, the willLike(U, E, M) query is grounded with E and M free and
the proof graph is scored with Personalized PageRank from the query node;
each solution's mass becomes the score of its (entity, movie) pair. The
dislike side runs the same way over willDislike. Consolidation groups pairs
by movie, netting like scores against dislike scores, and keeps the signed
per-entity contributions as the movie's reasons.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grounding import Limits, ground
from .kg import KindMismatchError, KnowledgeGraph, UnknownEntityError
from .ppr import PPRParams, TransitionView, solve
from .rules import Constant, Literal, RuleSet, Variable, default_rules

LIKE = "like"
DISLIKE = "dislike"

_QUERY_PREDICATE = {LIKE: "willLike", DISLIKE: "willDislike"}


@dataclass(frozen=True)
class PairScore:
    entity: str
    movie: str
    score: float
    polarity: str


@dataclass(frozen=True)
class Reason:
    entity: str
    contribution: float  # negative iff polarity is "dislike"

    @property
    def polarity(self) -> str:
        return DISLIKE if self.contribution < 0 else LIKE


@dataclass(frozen=True)
class Recommendation:
    movie: str
    net_score: float
    reasons: tuple[Reason, ...]  # sorted by |contribution| descending


@dataclass(frozen=True)
class SolverParams:
    limits: Limits = field(default_factory=Limits)
    ppr: PPRParams = field(default_factory=PPRParams)


def rank_pairs(
    user: str,
    polarity: str,
    kg: KnowledgeGraph,
    rules: RuleSet | None = None,
    ppr_params: PPRParams = PPRParams(),
    limits: Limits = Limits(),
) -> list[PairScore]:
    """Ground the like (or dislike) query for a user and score its solutions.

    Each solution's (E, M) binding receives the PPR mass of its solution
    state; masses of distinct solution states with the same binding add up.
    Pairs with zero mass are dropped. Order: score descending, then entity
    and movie ids.
    """
    if polarity not in _QUERY_PREDICATE:
        raise ValueError(f"polarity must be {LIKE!r} or {DISLIKE!r}")
    if user not in kg.entities:
        raise UnknownEntityError(user)
    rules = rules or default_rules()
    query = Literal(
        predicate=_QUERY_PREDICATE[polarity],
        args=(Constant(user), Variable("E"), Variable("M")),
    )
    pg = ground(query, rules, kg, limits)
    if not pg.solutions:
        return []
    view = TransitionView.from_edges(len(pg), ((s, d) for s, d, _ in pg.edges))
    scores = solve(view, pg.start, ppr_params)
    masses: dict[tuple[str, str], float] = {}
    for node, bindings in pg.solutions:
        if "E" not in bindings or "M" not in bindings:
            raise ValueError(f"solution leaves E or M unbound: {bindings}")
        key = (bindings["E"], bindings["M"])
        masses[key] = masses.get(key, 0.0) + scores[node]
    pairs = [
        PairScore(entity=e, movie=m, score=s, polarity=polarity)
        for (e, m), s in masses.items()
        if s > 0.0
    ]
    for pair in pairs:
        if not kg.entity(pair.movie).is_movie:
            raise ValueError(f"rules bound M to a non-movie: {pair.movie!r}")
    pairs.sort(key=lambda p: (-p.score, p.entity, p.movie))
    return pairs


def consolidate(
    likes: list[PairScore],
    dislikes: list[PairScore],
    exclusions: frozenset[str] | set[str] = frozenset(),
) -> list[Recommendation]:
    """Group pair scores by movie into net-scored, explained recommendations.

    Per movie, like contributions add and dislike contributions subtract;
    per (entity, movie) the two polarities net into a single reason. Movies
    in ``exclusions`` or with net <= 0 are dropped. Output is sorted by net
    score descending (ties by movie id); reasons by |contribution|
    descending (ties by entity id).
    """
    for pair in likes:
        if pair.polarity != LIKE:
            raise ValueError(f"non-like pair in likes: {pair}")
    for pair in dislikes:
        if pair.polarity != DISLIKE:
            raise ValueError(f"non-dislike pair in dislikes: {pair}")

    contributions: dict[str, dict[str, float]] = {}
    for sign, pairs in ((1.0, likes), (-1.0, dislikes)):
        for pair in pairs:
            if pair.movie in exclusions:
                continue
            per_movie = contributions.setdefault(pair.movie, {})
            per_movie[pair.entity] = per_movie.get(pair.entity, 0.0) + sign * pair.score

    out = []
    for movie, per_entity in contributions.items():
        reasons = tuple(
            Reason(entity=entity, contribution=value)
            for entity, value in sorted(
                per_entity.items(), key=lambda item: (-abs(item[1]), item[0])
            )
            if value != 0.0
        )
        net = 0.0
        for reason in reasons:
            net += reason.contribution
        if net <= 0.0 or not reasons:
            continue
        out.append(Recommendation(movie=movie, net_score=net, reasons=reasons))
    out.sort(key=lambda rec: (-rec.net_score, rec.movie))
    return out


def recommend(
    user: str,
    k: int,
    kg: KnowledgeGraph,
    rules: RuleSet | None = None,
    params: SolverParams = SolverParams(),
) -> list[Recommendation]:
    """Top-k explained recommendations for a user.

    Movies the user already gave movie-level feedback on (either polarity)
    are excluded; entity-level feedback never excludes anything.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    likes = rank_pairs(user, LIKE, kg, rules, params.ppr, params.limits)
    dislikes = rank_pairs(user, DISLIKE, kg, rules, params.ppr, params.limits)
    exclusions = kg.consumed_movies(user)
    return consolidate(likes, dislikes, exclusions)[:k]


def explain(
    user: str,
    movie: str,
    kg: KnowledgeGraph,
    rules: RuleSet | None = None,
    params: SolverParams = SolverParams(),
) -> list[Reason]:
    """The reasons the movie would carry in the user's recommendations.

    Empty when the movie is unreachable from the user's feedback (or is
    excluded / suppressed from the recommendation list).
    """
    target = kg.entity(movie)
    if not target.is_movie:
        raise KindMismatchError(f"{movie!r} has kind {target.kind!r}, not movie")
    likes = rank_pairs(user, LIKE, kg, rules, params.ppr, params.limits)
    dislikes = rank_pairs(user, DISLIKE, kg, rules, params.ppr, params.limits)
    exclusions = kg.consumed_movies(user)
    for rec in consolidate(likes, dislikes, exclusions):
        if rec.movie == movie:
            return list(rec.reasons)
    return []


def to_api(kg: KnowledgeGraph, recs: list[Recommendation]) -> list[dict]:
    """Serialize recommendations with display names resolved."""
    out = []
    for rec in recs:
        out.append(
            {
                "movie": rec.movie,
                "name": kg.entity(rec.movie).name,
                "net_score": rec.net_score,
                "reasons": [
                    {
                        "entity": r.entity,
                        "name": kg.entity(r.entity).name,
                        "contribution": r.contribution,
                        "polarity": r.polarity,
                    }
                    for r in rec.reasons
                ],
            }
        )
    return out
