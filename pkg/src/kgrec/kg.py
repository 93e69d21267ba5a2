"""Knowledge-graph store: typed entities, a symmetric link index, and per-user
feedback facts.

The graph is loaded from two TSV files (entities, edges) and is immutable
afterwards, except that new user entities may be registered on the fly
(interactive sessions create users on first feedback). Feedback facts live in
a separate store with a latest-polarity-wins replacement rule and can be
replayed from an append-only JSONL log.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass

CORE_KINDS = ("movie", "person", "genre", "user")

LIKE_PREDICATES = ("likesEntity", "likesMovie")
DISLIKE_PREDICATES = ("dislikesEntity", "dislikesMovie")
FEEDBACK_PREDICATES = LIKE_PREDICATES + DISLIKE_PREDICATES
MOVIE_PREDICATES = ("likesMovie", "dislikesMovie")


class KGError(Exception):
    """Base class for knowledge-graph errors."""


class FormatError(KGError):
    """Malformed input line; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownEntityError(KGError, LookupError):
    def __init__(self, entity_id: str):
        super().__init__(f"unknown entity: {entity_id!r}")
        self.entity_id = entity_id


class KindMismatchError(KGError):
    """A movie-level predicate targeted a non-movie entity."""


@dataclass(frozen=True)
class Entity:
    id: str
    name: str
    kind: str  # "movie", "person", "genre", "user", or a free-form tag

    @property
    def is_movie(self) -> bool:
        return self.kind == "movie"


@dataclass(frozen=True)
class FeedbackFact:
    user: str
    predicate: str
    target: str
    ts: float  # seconds since epoch; resolves replacement order


def _check_id(value: str, line: int, what: str) -> str:
    if not value:
        raise FormatError(f"empty {what}", line)
    if "\t" in value or "\n" in value or "\r" in value:
        raise FormatError(f"{what} contains tab/newline: {value!r}", line)
    return value


def load_entities(lines) -> dict[str, Entity]:
    """Parse ``id<TAB>kind<TAB>name`` lines into an entity table.

    Kinds outside the core set are kept verbatim as free-form tags; only
    "movie" carries semantics downstream. Duplicate ids and malformed lines
    raise FormatError with the offending line number.
    """
    entities: dict[str, Entity] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError(f"expected 3 tab-separated fields, got {len(parts)}", lineno)
        eid, kind, name = parts
        _check_id(eid, lineno, "entity id")
        if not kind:
            raise FormatError("empty kind", lineno)
        if eid in entities:
            raise FormatError(f"duplicate entity id {eid!r}", lineno)
        entities[eid] = Entity(id=eid, kind=kind, name=name)
    return entities


def load_edges(lines, entities: dict[str, Entity]):
    """Parse ``src<TAB>relation<TAB>dst`` lines into a symmetric adjacency index.

    Returns (adjacency, edge_count) where adjacency maps each entity id to a
    sorted tuple of (neighbor, relation, direction) and edge_count is the
    number of distinct (src, relation, dst) lines. Duplicate lines collapse.
    """
    edges: set[tuple[str, str, str]] = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError(f"expected 3 tab-separated fields, got {len(parts)}", lineno)
        src, relation, dst = parts
        _check_id(src, lineno, "source id")
        _check_id(dst, lineno, "target id")
        if not relation:
            raise FormatError("empty relation", lineno)
        for endpoint in (src, dst):
            if endpoint not in entities:
                raise FormatError(f"edge references unknown entity {endpoint!r}", lineno)
        edges.add((src, relation, dst))

    half: dict[str, set[tuple[str, str, str]]] = {eid: set() for eid in entities}
    for src, relation, dst in edges:
        half[src].add((dst, relation, "out"))
        half[dst].add((src, relation, "in"))
    adjacency = {eid: tuple(sorted(entries)) for eid, entries in half.items()}
    return adjacency, len(edges)


class FeedbackStore:
    """Per-user feedback facts with latest-polarity-wins replacement.

    A fact of one polarity (like vs dislike) evicts any stored fact of the
    opposite polarity for the same (user, target), provided it is not older;
    an incoming fact older than a stored opposite-polarity fact is dropped.
    """

    def __init__(self):
        # (user, predicate) -> {target: ts}
        self._facts: dict[tuple[str, str], dict[str, float]] = {}
        self._lock = threading.Lock()

    def record(self, fact: FeedbackFact) -> None:
        opposite = LIKE_PREDICATES if fact.predicate in DISLIKE_PREDICATES else DISLIKE_PREDICATES
        with self._lock:
            for pred in opposite:
                existing = self._facts.get((fact.user, pred), {})
                if fact.target in existing and existing[fact.target] > fact.ts:
                    return  # stale: a later opposite-polarity fact already wins
            for pred in opposite:
                self._facts.get((fact.user, pred), {}).pop(fact.target, None)
            bucket = self._facts.setdefault((fact.user, fact.predicate), {})
            bucket[fact.target] = max(fact.ts, bucket.get(fact.target, fact.ts))

    def targets(self, user: str, predicate: str) -> frozenset[str]:
        return frozenset(self._facts.get((user, predicate), ()))

    def facts(self, user: str) -> list[FeedbackFact]:
        out = []
        for (u, predicate), bucket in self._facts.items():
            if u != user:
                continue
            for target, ts in bucket.items():
                out.append(FeedbackFact(user=u, predicate=predicate, target=target, ts=ts))
        out.sort(key=lambda f: (f.ts, f.predicate, f.target))
        return out

    def pairs(self, predicate: str) -> list[tuple[str, str]]:
        """All (user, target) facts of one predicate, sorted."""
        out = [
            (user, target)
            for (user, pred), bucket in self._facts.items()
            if pred == predicate
            for target in bucket
        ]
        return sorted(out)

    def users(self) -> set[str]:
        return {user for (user, _), bucket in self._facts.items() if bucket}

    def has_feedback(self, user: str) -> bool:
        return any(u == user and bucket for (u, _), bucket in self._facts.items())


class KnowledgeGraph:
    """Entity table + symmetric adjacency + feedback store.

    The entity/edge structure is read-only after construction (safe for
    concurrent reads); registering users and recording feedback take the
    writer lock.
    """

    def __init__(self, entities: dict[str, Entity], adjacency, edge_count: int):
        self.entities = entities
        self.adjacency = adjacency
        self.edge_count = edge_count
        self.feedback = FeedbackStore()
        self._write_lock = threading.Lock()
        # distinct neighbor ids per entity, for the direction-agnostic link predicate
        self._links = {
            eid: tuple(sorted({nbr for nbr, _, _ in entries}))
            for eid, entries in adjacency.items()
        }
        self._movies = tuple(sorted(eid for eid, e in entities.items() if e.is_movie))

    @classmethod
    def load(cls, entities_path: str, edges_path: str) -> "KnowledgeGraph":
        with open(entities_path, encoding="utf-8") as f:
            entities = load_entities(f)
        with open(edges_path, encoding="utf-8") as f:
            adjacency, edge_count = load_edges(f, entities)
        return cls(entities, adjacency, edge_count)

    def entity(self, eid: str) -> Entity:
        try:
            return self.entities[eid]
        except KeyError:
            raise UnknownEntityError(eid) from None

    def __contains__(self, eid: str) -> bool:
        return eid in self.entities

    def is_movie(self, eid: str) -> bool:
        return self.entity(eid).is_movie

    def neighbors(self, eid: str) -> list[tuple[str, str]]:
        """Distinct (neighbor, relation) pairs, both edge directions, sorted."""
        if eid not in self.entities:
            raise UnknownEntityError(eid)
        seen = sorted({(nbr, rel) for nbr, rel, _ in self.adjacency[eid]})
        return seen

    def links(self, eid: str) -> tuple[str, ...]:
        """Distinct neighbor ids (the undirected link relation), sorted."""
        if eid not in self.entities:
            raise UnknownEntityError(eid)
        return self._links[eid]

    def link_targets(self, eid: str) -> tuple[str, ...]:
        """Like links(), but unknown ids simply have no neighbors."""
        return self._links.get(eid, ())

    def movies(self) -> tuple[str, ...]:
        return self._movies

    def ensure_user(self, uid: str, name: str | None = None) -> Entity:
        """Register a user entity if the id is unknown; no-op when it exists."""
        with self._write_lock:
            existing = self.entities.get(uid)
            if existing is not None:
                return existing
            entity = Entity(id=uid, name=name or uid, kind="user")
            # copy-on-write so concurrent readers keep a consistent snapshot
            self.entities = {**self.entities, uid: entity}
            self.adjacency = {**self.adjacency, uid: ()}
            self._links = {**self._links, uid: ()}
            return entity

    def record_feedback(self, fact: FeedbackFact) -> None:
        """Validate and store one feedback fact (replacement rule applies)."""
        if fact.predicate not in FEEDBACK_PREDICATES:
            raise KGError(f"unknown feedback predicate: {fact.predicate!r}")
        if fact.user not in self.entities:
            raise UnknownEntityError(fact.user)
        target = self.entity(fact.target)
        if fact.predicate in MOVIE_PREDICATES and not target.is_movie:
            raise KindMismatchError(
                f"{fact.predicate} requires a movie target, {fact.target!r} has kind {target.kind!r}"
            )
        self.feedback.record(fact)

    def feedback_targets(self, user: str, predicate: str) -> frozenset[str]:
        return self.feedback.targets(user, predicate)

    def consumed_movies(self, user: str) -> frozenset[str]:
        """Movies the user gave movie-level feedback on (either polarity)."""
        return self.feedback.targets(user, "likesMovie") | self.feedback.targets(
            user, "dislikesMovie"
        )


def replay_feedback_log(kg: KnowledgeGraph, path: str) -> int:
    """Apply a feedback.jsonl log to the graph; returns the fact count applied.

    Users referenced by the log are registered on the fly (sessions create
    users implicitly); unknown targets or malformed lines raise.
    """
    applied = 0
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON: {exc}", lineno) from None
            try:
                fact = FeedbackFact(
                    user=str(obj["user"]),
                    predicate=str(obj["predicate"]),
                    target=str(obj["target"]),
                    ts=float(obj["ts"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"bad feedback record: {exc}", lineno) from None
            kg.ensure_user(fact.user)
            kg.record_feedback(fact)
            applied += 1
    return applied


def append_feedback_log(path: str, fact: FeedbackFact) -> None:
    """Append one fact to the JSONL log and flush it to disk."""
    record = {"user": fact.user, "predicate": fact.predicate, "target": fact.target, "ts": fact.ts}
    with open(path, "a", encoding="utf-8") as f:
        f.write(json.dumps(record, separators=(",", ":")) + "\n")
        f.flush()
