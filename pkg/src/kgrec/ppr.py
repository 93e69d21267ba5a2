"""Personalized PageRank over a directed graph view.

Two solvers share one model: a random walk that, at every step, teleports
back to the start node with probability ``alpha`` and otherwise follows a
uniformly random out-edge. Parallel edges count once each, and dangling
nodes (no out-edges) send all their mass back to the start node, which keeps
the walk personalized on truncated graphs.

``ppr_power`` iterates the full fixed-point equation to an L1 tolerance;
``ppr_push`` propagates residual mass locally until every node's residual is
below ``eps`` times its out-degree, trading accuracy (bounded by the leftover
residuals) for touching only the relevant neighborhood.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import sparse


@dataclass(frozen=True)
class PPRParams:
    """Solver configuration shared by the recommender, CLI and service."""

    alpha: float = 0.2
    method: str = "power"  # "power" or "push"
    tol: float = 1e-8
    max_iter: int = 1000
    eps: float = 1e-6


class TransitionView:
    """Out-edges per node with uniform transition weights.

    Edges may repeat (each occurrence carries transition weight); node ids
    are 0..n-1.
    """

    def __init__(self, n: int, targets: list[list[int]]):
        if len(targets) != n:
            raise ValueError("targets must have one entry per node")
        self.n = n
        self.targets = targets

    @classmethod
    def from_edges(cls, n: int, edges) -> "TransitionView":
        targets: list[list[int]] = [[] for _ in range(n)]
        for src, dst in edges:
            targets[src].append(dst)
        return cls(n, targets)

    def out_degree(self, node: int) -> int:
        return len(self.targets[node])


@dataclass
class ScoreVector:
    """Per-node probability mass from one solve."""

    scores: np.ndarray
    converged: bool
    iterations: int

    def __getitem__(self, node: int) -> float:
        return float(self.scores[node])

    def as_dict(self) -> dict[int, float]:
        return {i: float(s) for i, s in enumerate(self.scores)}


def _check_common(g: TransitionView, start: int, alpha: float) -> None:
    if not 0 <= start < g.n:
        raise ValueError(f"start node {start} out of range")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")


def ppr_power(
    g: TransitionView,
    start: int,
    alpha: float = 0.2,
    tol: float = 1e-8,
    max_iter: int = 1000,
) -> ScoreVector:
    """Power iteration for p = alpha*e_start + (1-alpha) * P^T p.

    Stops when successive iterates are within ``tol`` in L1, or flags
    non-convergence after ``max_iter`` iterations.
    """
    _check_common(g, start, alpha)
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = g.n
    src = np.fromiter(
        (u for u, ts in enumerate(g.targets) for _ in ts), dtype=np.int64
    )
    dst = np.fromiter((v for ts in g.targets for v in ts), dtype=np.int64)
    degrees = np.array([len(ts) for ts in g.targets], dtype=np.float64)
    dangling = degrees == 0
    weights = np.ones(len(src), dtype=np.float64)
    if len(src):
        weights /= degrees[src]
    # rows = destination so that matrix @ p accumulates incoming mass
    matrix = sparse.csr_matrix((weights, (dst, src)), shape=(n, n))

    p = np.zeros(n, dtype=np.float64)
    p[start] = 1.0
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        incoming = matrix @ p
        incoming[start] += float(p[dangling].sum())
        p_next = (1.0 - alpha) * incoming
        p_next[start] += alpha
        delta = float(np.abs(p_next - p).sum())
        p = p_next
        if delta <= tol:
            converged = True
            break
    assert float(p.min()) >= 0.0
    assert abs(float(p.sum()) - 1.0) < 1e-9 + tol
    return ScoreVector(scores=p, converged=converged, iterations=iterations)


def ppr_push(
    g: TransitionView,
    start: int,
    alpha: float = 0.2,
    eps: float = 1e-6,
) -> ScoreVector:
    """Local push approximation of Personalized PageRank.

    Maintains estimates p and residuals r (r starts as the unit mass at the
    start node); the exact vector always equals p plus the residuals pushed
    through exact PPR, so leftover residual bounds the error. Two phases:

    1. queue-driven local push while some node holds residual
       >= eps * out-degree (dangling nodes count as one edge to start);
    2. if the total residual still exceeds eps, full sweeps over the
       remaining residuals until it does not, so the per-node error against
       the exact solution is at most eps.

    Returned mass is <= 1; the deficit is the unpushed residual.
    """
    _check_common(g, start, alpha)
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = g.n
    degrees = [max(1, len(ts)) for ts in g.targets]
    p = [0.0] * n
    r = [0.0] * n
    r[start] = 1.0
    total_residual = 1.0
    pushes = 0
    start_targets = [start]

    def push(u: int) -> None:
        nonlocal total_residual, pushes
        residual = r[u]
        pushes += 1
        r[u] = 0.0
        p[u] += alpha * residual
        total_residual -= alpha * residual
        targets = g.targets[u] or start_targets
        share = (1.0 - alpha) * residual / len(targets)
        for v in targets:
            r[v] += share

    queue: deque[int] = deque()
    queued = [False] * n
    if r[start] >= eps * degrees[start]:
        queue.append(start)
        queued[start] = True
    while queue:
        u = queue.popleft()
        queued[u] = False
        if r[u] < eps * degrees[u]:
            continue
        targets = g.targets[u] or start_targets
        push(u)
        for v in targets:
            if not queued[v] and r[v] >= eps * degrees[v]:
                queue.append(v)
                queued[v] = True

    # each full sweep scales the outstanding residual by at most (1 - alpha)
    while total_residual > eps:
        for u in range(n):
            if r[u] > 0.0:
                push(u)
        total_residual = sum(r)  # re-sum to keep termination drift-free

    scores = np.array(p, dtype=np.float64)
    assert float(scores.min()) >= 0.0
    assert float(scores.sum()) <= 1.0 + 1e-12
    return ScoreVector(scores=scores, converged=True, iterations=pushes)


def solve(g: TransitionView, start: int, params: PPRParams) -> ScoreVector:
    """Dispatch to the configured solver."""
    if params.method == "power":
        return ppr_power(g, start, alpha=params.alpha, tol=params.tol, max_iter=params.max_iter)
    if params.method == "push":
        return ppr_push(g, start, alpha=params.alpha, eps=params.eps)
    raise ValueError(f"unknown PPR method: {params.method!r}")
