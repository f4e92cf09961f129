"""Ranking evaluation against held-out synonym senses.

Each evaluation entity becomes one query: its given senses are the names, the
rest of its senses are the relevant set, and the candidate pool is every
unlinkable sense plus the entity's own held-out senses.  Metrics are macro
averages over entities; precision at k always divides by k, and an entity with
no hits scores zero across the board rather than dividing zero by zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .corpus import Vocabulary
from .infer import Query, candidate_pool, rank
from .patterns import PairIndex
from .seeds import SeedSet
from .train import Model

log = logging.getLogger("syndisc.evaluate")


class EvalError(ValueError):
    pass


def precision_recall_f1(retrieved, relevant, k: int) -> tuple[float, float, float]:
    if k <= 0:
        raise EvalError("k must be positive")
    hits = sum(1 for u in retrieved[:k] if u in relevant)
    p = hits / k
    r = hits / len(relevant) if relevant else 0.0
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f1


@dataclass(frozen=True)
class EntityResult:
    entity: str
    precision: float
    recall: float
    f1: float
    retrieved: tuple[int, ...]
    relevant: frozenset[int]


@dataclass
class EvalReport:
    k: int
    per_entity: list[EntityResult]
    skipped: tuple[str, ...]

    @property
    def precision(self) -> float:
        return _mean([e.precision for e in self.per_entity])

    @property
    def recall(self) -> float:
        return _mean([e.recall for e in self.per_entity])

    @property
    def f1(self) -> float:
        return _mean([e.f1 for e in self.per_entity])

    def summary(self) -> dict:
        return {
            "k": self.k,
            "entities": len(self.per_entity),
            "skipped": len(self.skipped),
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def _mean(xs) -> float:
    return sum(xs) / len(xs) if xs else 0.0


def entity_query(seeds: SeedSet, entity: str) -> Query:
    """Names are the entity's given senses; everything known stays hidden."""
    given = seeds.given.get(entity)
    if not given:
        raise EvalError(
            f"entity {entity!r} has no given senses; evaluate on a warm or cold split")
    return Query(names=tuple(sorted(given)), entity=entity)


def evaluate(
    model: Model,
    seeds: SeedSet,
    vocab: Vocabulary,
    index: PairIndex | None = None,
    ks: tuple[int, ...] = (1, 5),
    pattern_weight: float | None = None,
    pool_size: int | None = None,
) -> dict[int, EvalReport]:
    """Rank each entity's pool and score the top-k lists at every k in ks.

    Entities whose senses are all given have nothing to find; they are skipped
    with a warning and excluded from the macro averages.
    """
    if not ks or any(k <= 0 for k in ks):
        raise EvalError("ks must be positive cutoffs")
    unlinkable = vocab.unlinkable_ids()
    results: dict[int, list[EntityResult]] = {k: [] for k in ks}
    skipped: list[str] = []
    depth = max(ks)
    for entity in sorted(seeds.per_entity):
        held = seeds.held_out(entity)
        if not held:
            log.warning("entity %s has no held-out senses; skipping", entity)
            skipped.append(entity)
            continue
        query = entity_query(seeds, entity)
        pool = candidate_pool(model, query, restrict=set(unlinkable) | held)
        ranked = rank(model, query, vocab=vocab, index=index, top_k=depth,
                      pool=pool, pool_size=pool_size,
                      pattern_weight=pattern_weight)
        retrieved = tuple(c.sense for c in ranked)
        for k in ks:
            p, r, f1 = precision_recall_f1(retrieved, held, k)
            results[k].append(
                EntityResult(entity, p, r, f1, retrieved, frozenset(held)))
    return {k: EvalReport(k, results[k], tuple(skipped)) for k in ks}
