"""Ranking: distributional shortlist, then combined re-scoring.

A query carries one entity's known sense ids.  Candidates are scored in two
steps: first every pool member gets a distributional score (sum of bilinear
scores against the query names) and the top ``pool_size`` survive; then the
survivors get the pattern vote added and are re-sorted.  Ties break toward
the smaller sense id at both steps, so rankings are fully deterministic.

Scoring never mutates the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Vocabulary
from .patterns import PairIndex, vote_score
from .train import Model


class InferError(ValueError):
    pass


@dataclass(frozen=True)
class Query:
    """Sense ids the ranker may match against, plus ids it must never return."""

    names: tuple[int, ...]
    exclude: frozenset[int] = field(default_factory=frozenset)
    entity: str | None = None

    def __post_init__(self):
        if not self.names:
            raise InferError("query has no names")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "exclude", frozenset(self.exclude))

    @property
    def hidden(self) -> frozenset[int]:
        return frozenset(self.names) | self.exclude


@dataclass(frozen=True)
class Candidate:
    sense: int
    score: float
    dist: float
    vote: float


def candidate_pool(model: Model, query: Query,
                   restrict=None) -> np.ndarray:
    """Sorted candidate ids: every sense (or ``restrict``) minus the hidden set."""
    n = model.table.n_senses
    for q in query.names:
        if not 0 <= q < n:
            raise InferError(f"query name {q} is not a sense id (vocabulary has {n})")
    if restrict is None:
        ids = np.arange(n, dtype=np.int64)
    else:
        ids = np.asarray(sorted(set(int(i) for i in restrict)), dtype=np.int64)
        if ids.size and (ids[0] < 0 or ids[-1] >= n):
            raise InferError("candidate pool contains ids outside the vocabulary")
    hidden = query.hidden
    if hidden:
        ids = ids[~np.isin(ids, np.fromiter(hidden, dtype=np.int64))]
    return ids


def distributional_scores(model: Model, ids: np.ndarray, names) -> np.ndarray:
    """Sum of bilinear scores against each query name, one float per id.

    Accumulated name by name, so a multi-name score is exactly the sum of the
    single-name scores computed over the same id array.
    """
    x = model.table.x
    out = np.zeros(len(ids))
    for q in names:
        out += x[ids] @ (model.weights.w * x[q])
    return out


def shortlist(model: Model, query: Query, pool: np.ndarray | None = None,
              size: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Top ``size`` pool ids by distributional score, ties to smaller id.

    Returns the surviving ids and their scores, ranked best first.
    """
    if size is None:
        size = model.config.shortlist_size
    ids = candidate_pool(model, query, restrict=pool)
    scores = distributional_scores(model, ids, query.names)
    order = np.lexsort((ids, -scores))[:size]
    return ids[order], scores[order]


def rank(
    model: Model,
    query: Query,
    vocab: Vocabulary | None = None,
    index: PairIndex | None = None,
    top_k: int = 10,
    pool: np.ndarray | None = None,
    pool_size: int | None = None,
    pattern_weight: float | None = None,
) -> list[Candidate]:
    """Rank candidates for a query; returns at most ``top_k`` best first.

    combined = distributional + pattern_weight * vote, where vote sums the
    per-name mean pattern probabilities and a never-co-mentioned pair
    contributes zero.  With ``index`` (or ``vocab``) absent, or weight zero,
    the vote term is dropped and the result is the pure distributional
    ranking.
    """
    if top_k < 0:
        raise InferError("top_k must be >= 0")
    if pattern_weight is None:
        pattern_weight = model.config.pattern_weight
    ids, dist = shortlist(model, query, pool=pool, size=pool_size)
    use_votes = pattern_weight != 0.0 and index is not None and vocab is not None
    votes = np.zeros(len(ids))
    if use_votes:
        for i, u in enumerate(ids):
            acc = 0.0
            for q in query.names:
                p = vote_score(model.classifier, model.table, vocab, index, int(u), q)
                if p is not None:
                    acc += p
            votes[i] = acc
    combined = dist + pattern_weight * votes
    order = np.lexsort((ids, -combined))[:top_k]
    return [Candidate(int(ids[i]), float(combined[i]), float(dist[i]), float(votes[i]))
            for i in order]
