"""Shared fixtures: the worked-example graph and random KG generation."""

from __future__ import annotations

import io
import random

import pytest

from kgrec.kg import FeedbackFact, KnowledgeGraph, load_edges, load_entities

ENTITIES_TSV = """\
alice\tuser\tAlice
bridge_of_spies\tmovie\tBridge of Spies
crime\tgenre\tCrime
da_vinci_code\tmovie\tThe Da Vinci Code
drama_thriller\tgenre\tDrama/Thriller
inferno\tmovie\tInferno
snowden\tmovie\tSnowden
tom_hanks\tperson\tTom Hanks
"""

EDGES_TSV = """\
da_vinci_code\tactedIn\ttom_hanks
da_vinci_code\thasGenre\tdrama_thriller
tom_hanks\tactedIn\tbridge_of_spies
tom_hanks\tactedIn\tinferno
drama_thriller\thasGenre\tbridge_of_spies
drama_thriller\thasGenre\tsnowden
crime\thasGenre\tinferno
"""

FEEDBACK_JSONL = """\
{"user": "alice", "predicate": "likesEntity", "target": "tom_hanks", "ts": 1}
{"user": "alice", "predicate": "likesMovie", "target": "da_vinci_code", "ts": 2}
{"user": "alice", "predicate": "dislikesEntity", "target": "crime", "ts": 3}
"""

# one-hop similarity budget: the 3 fixed rule steps plus one sim hop
ONE_HOP_DEPTH = 4


def make_movie_kg(with_feedback: bool = True) -> KnowledgeGraph:
    entities = load_entities(io.StringIO(ENTITIES_TSV))
    adjacency, edge_count = load_edges(io.StringIO(EDGES_TSV), entities)
    kg = KnowledgeGraph(entities, adjacency, edge_count)
    if with_feedback:
        kg.record_feedback(FeedbackFact("alice", "likesEntity", "tom_hanks", 1))
        kg.record_feedback(FeedbackFact("alice", "likesMovie", "da_vinci_code", 2))
        kg.record_feedback(FeedbackFact("alice", "dislikesEntity", "crime", 3))
    return kg


@pytest.fixture
def movie_kg() -> KnowledgeGraph:
    return make_movie_kg()


@pytest.fixture
def bare_movie_kg() -> KnowledgeGraph:
    return make_movie_kg(with_feedback=False)


@pytest.fixture
def kg_files(tmp_path):
    entities = tmp_path / "entities.tsv"
    edges = tmp_path / "edges.tsv"
    feedback = tmp_path / "feedback.jsonl"
    entities.write_text(ENTITIES_TSV, encoding="utf-8")
    edges.write_text(EDGES_TSV, encoding="utf-8")
    feedback.write_text(FEEDBACK_JSONL, encoding="utf-8")
    return {"entities": str(entities), "edges": str(edges), "feedback": str(feedback)}


def random_kg(rng: random.Random, n_entities: int = 10, n_edges: int = 12,
              n_feedback: int = 4) -> tuple[KnowledgeGraph, str]:
    """A small random graph with one user and random feedback; returns (kg, user)."""
    kinds = ["movie", "movie", "movie", "person", "person", "genre"]
    ids = [f"e{i}" for i in range(n_entities - 1)]
    lines = ["u\tuser\tThe User"]
    for i, eid in enumerate(ids):
        lines.append(f"{eid}\t{kinds[i % len(kinds)]}\tEntity {i}")
    entities = load_entities(io.StringIO("\n".join(lines) + "\n"))
    edge_lines = set()
    for _ in range(n_edges):
        a, b = rng.sample(ids, 2)
        edge_lines.add(f"{a}\trel\t{b}")
    adjacency, edge_count = load_edges(io.StringIO("\n".join(sorted(edge_lines)) + "\n"),
                                       entities)
    kg = KnowledgeGraph(entities, adjacency, edge_count)
    movies = [eid for eid in ids if entities[eid].kind == "movie"]
    ts = 0
    for _ in range(n_feedback):
        ts += 1
        if rng.random() < 0.5:
            pred = rng.choice(["likesEntity", "dislikesEntity"])
            target = rng.choice(ids)
        else:
            pred = rng.choice(["likesMovie", "dislikesMovie"])
            target = rng.choice(movies)
        kg.record_feedback(FeedbackFact("u", pred, target, ts))
    return kg, "u"
