"""Knowledge-base synonym lists and the seed pairs distilled from a corpus.

Entity links in the corpus are distant supervision: a mention whose surface
does not appear in the KB's synonym list for the linked entity is treated as
a bad link and demoted to plain tokens.  Seed pairs are all unordered pairs
of observed synonym senses of the same entity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

import numpy as np

from .corpus import Mention, Sentence, Vocabulary, normalize


class KbError(ValueError):
    """Raised for malformed knowledge-base synonym files."""


class SplitError(ValueError):
    """Raised when an evaluation split cannot be populated."""


class KbSynonyms:
    """Entity -> ordered synonym strings; the first string is the canonical name."""

    def __init__(self, entries: dict[str, list[str]]):
        self._entries = entries
        self._normalized = {e: {normalize(s) for s in syns} for e, syns in entries.items()}

    def __contains__(self, entity: str) -> bool:
        return entity in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def entities(self) -> list[str]:
        return sorted(self._entries)

    def synonyms(self, entity: str) -> list[str]:
        return list(self._entries[entity])

    def canonical(self, entity: str) -> str:
        return self._entries[entity][0]

    def has_surface(self, entity: str, surface: str) -> bool:
        syns = self._normalized.get(entity)
        return syns is not None and normalize(surface) in syns

    @classmethod
    def load(cls, path: str) -> "KbSynonyms":
        entries: dict[str, list[str]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) < 2 or not parts[0]:
                    raise KbError(f"line {lineno}: expected 'entity<TAB>synonym...' with at least one synonym")
                entity, syns = parts[0], [p for p in parts[1:] if p]
                if not syns:
                    raise KbError(f"line {lineno}: entity {entity!r} has no synonyms")
                if entity in entries:
                    raise KbError(f"line {lineno}: duplicate entity id {entity!r}")
                entries[entity] = syns
        return cls(entries)


def validate_links(sentences: Iterable[Sentence], kb: KbSynonyms) -> tuple[list[Sentence], int]:
    """Drop mention links the KB does not back; returns (sentences, dropped count).

    A dropped span is demoted to plain tokens.  Mentions without an entity
    link are passed through untouched.
    """
    out: list[Sentence] = []
    dropped = 0
    for sent in sentences:
        kept: list[Mention] = []
        for m in sent.mentions:
            if m.entity is None or kb.has_surface(m.entity, m.surface_of(sent.tokens)):
                kept.append(m)
            else:
                dropped += 1
        if len(kept) == len(sent.mentions):
            out.append(sent)
        else:
            out.append(Sentence(sent.doc_id, sent.sent_id, sent.tokens, kept))
    return out, dropped


def _pairs_of(per_entity: dict[str, frozenset[int]]) -> frozenset[tuple[int, int]]:
    pairs = set()
    for senses in per_entity.values():
        for a, b in combinations(sorted(senses), 2):
            pairs.add((a, b))
    return frozenset(pairs)


@dataclass(frozen=True)
class SeedSet:
    """Observed synonym senses grouped by entity, plus derived training pairs.

    ``given`` is only populated for evaluation splits: it marks the senses a
    query may use, the rest of ``per_entity`` being the held-out ground truth.
    """

    per_entity: dict[str, frozenset[int]]
    pairs: frozenset[tuple[int, int]]
    canonical: dict[str, int | None] = field(default_factory=dict)
    given: dict[str, frozenset[int]] = field(default_factory=dict)

    @classmethod
    def build(cls, per_entity, canonical=None, given=None) -> "SeedSet":
        pe = {e: frozenset(s) for e, s in per_entity.items() if s}
        return cls(pe, _pairs_of(pe), dict(canonical or {}), dict(given or {}))

    def held_out(self, entity: str) -> frozenset[int]:
        return self.per_entity[entity] - self.given.get(entity, frozenset())

    def partner_map(self) -> dict[int, frozenset[int]]:
        """Sense -> senses sharing an entity with it (used to filter negatives)."""
        acc: dict[int, set[int]] = {}
        for senses in self.per_entity.values():
            for s in senses:
                acc.setdefault(s, set()).update(senses - {s})
        return {s: frozenset(v) for s, v in acc.items()}

    def pair_list(self) -> list[tuple[int, int]]:
        return sorted(self.pairs)


def collect_seeds(sentences: Iterable[Sentence], vocab: Vocabulary, kb: KbSynonyms) -> SeedSet:
    """Gather the synonym senses observed for each entity in the corpus."""
    per_entity: dict[str, set[int]] = {}
    for sent in sentences:
        for u in sent.units():
            if u.entity is None:
                continue
            sid = vocab.lookup(u.surface, u.entity)
            if sid is not None:
                per_entity.setdefault(u.entity, set()).add(sid)
    canonical = {}
    for e in per_entity:
        canonical[e] = vocab.lookup(normalize(kb.canonical(e)), e) if e in kb else None
    return SeedSet.build(per_entity, canonical)


def split_entities(
    seeds: SeedSet,
    warm_frac: float,
    cold_frac: float,
    rng_seed: int,
) -> tuple[SeedSet, SeedSet, SeedSet]:
    """Carve disjoint warm/cold test entity sets out of the seeds.

    Warm test entities reveal half their synonyms as query names; cold ones
    reveal only the canonical name.  Everything else stays in the training
    set, so no test entity contributes a training pair.
    """
    rng = np.random.default_rng(rng_seed)
    entities = sorted(seeds.per_entity)
    n = len(entities)

    def quota(frac: float) -> int:
        if frac <= 0:
            return 0
        return max(1, round(frac * n))

    n_warm, n_cold = quota(warm_frac), quota(cold_frac)
    perm = [entities[i] for i in rng.permutation(n)]

    warm_ok = lambda e: len(seeds.per_entity[e]) >= 2
    cold_ok = lambda e: warm_ok(e) and seeds.canonical.get(e) is not None

    cold_sel: list[str] = []
    for e in perm:
        if len(cold_sel) < n_cold and cold_ok(e):
            cold_sel.append(e)
    if len(cold_sel) < n_cold:
        raise SplitError(
            f"too few entities with a canonical name and >=2 observed synonyms: "
            f"need {n_cold} cold-start entities, found {len(cold_sel)}")

    taken = set(cold_sel)
    warm_sel: list[str] = []
    for e in perm:
        if e not in taken and len(warm_sel) < n_warm and warm_ok(e):
            warm_sel.append(e)
    if len(warm_sel) < n_warm:
        raise SplitError(
            f"too few entities with >=2 observed synonyms: "
            f"need {n_warm} warm-start entities, found {len(warm_sel)}")
    taken |= set(warm_sel)

    train_pe = {e: seeds.per_entity[e] for e in entities if e not in taken}
    train = SeedSet.build(train_pe, {e: seeds.canonical.get(e) for e in train_pe})

    warm_given: dict[str, frozenset[int]] = {}
    for e in sorted(warm_sel):
        senses = sorted(seeds.per_entity[e])
        k = len(senses) // 2
        idx = rng.permutation(len(senses))[:k]
        warm_given[e] = frozenset(senses[i] for i in idx)
    warm = SeedSet.build(
        {e: seeds.per_entity[e] for e in warm_sel},
        {e: seeds.canonical.get(e) for e in warm_sel},
        warm_given,
    )

    cold = SeedSet.build(
        {e: seeds.per_entity[e] for e in cold_sel},
        {e: seeds.canonical.get(e) for e in cold_sel},
        {e: frozenset([seeds.canonical[e]]) for e in cold_sel},
    )
    return train, warm, cold


def save_seeds(path: str, train: SeedSet, warm: SeedSet, cold: SeedSet) -> None:
    def enc(ss: SeedSet) -> dict:
        return {
            "per_entity": {e: sorted(s) for e, s in sorted(ss.per_entity.items())},
            "canonical": {e: ss.canonical.get(e) for e in sorted(ss.per_entity)},
            "given": {e: sorted(s) for e, s in sorted(ss.given.items())},
        }

    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"version": 1, "train": enc(train), "warm": enc(warm), "cold": enc(cold)},
                  fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_seeds(path: str) -> tuple[SeedSet, SeedSet, SeedSet]:
    with open(path, encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("version") != 1:
        raise KbError(f"{path}: unsupported seeds version")

    def dec(d: dict) -> SeedSet:
        return SeedSet.build(
            {e: frozenset(s) for e, s in d["per_entity"].items()},
            d.get("canonical", {}),
            {e: frozenset(s) for e, s in d.get("given", {}).items()},
        )

    return dec(blob["train"]), dec(blob["warm"]), dec(blob["cold"])
