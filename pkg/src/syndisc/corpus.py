"""Corpus data model: annotated sentences, mention-collapsed units, vocabulary.

The on-disk corpus is line-delimited JSON, one sentence per line; the exact
schema is documented in docs/formats.md.  Strings are normalized (lowercased,
whitespace collapsed) before they enter the vocabulary, and a string linked to
an entity is a different vocabulary sense than the same string unlinked.
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

FORMAT_VERSION = 1
ROOT_HEAD = -1

_WS = re.compile(r"\s+")


class CorpusError(ValueError):
    """Raised for malformed corpus files or structurally invalid sentences."""


def normalize(surface: str) -> str:
    """Lowercase and collapse internal whitespace; strip the ends."""
    return _WS.sub(" ", surface.strip()).lower()


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str
    head: int  # 0-based index of the head token, ROOT_HEAD for the root
    deprel: str


@dataclass(frozen=True)
class Mention:
    start: int  # token span [start, end)
    end: int
    entity: str | None  # None = phrase emitted by preprocessing without a link

    def surface_of(self, tokens: list[Token]) -> str:
        return normalize(" ".join(t.surface for t in tokens[self.start:self.end]))


@dataclass(frozen=True)
class Unit:
    """One position of a sentence after mention collapsing.

    A mention spanning several tokens is a single unit; every token outside
    any mention span is its own unit.
    """

    surface: str
    entity: str | None
    start: int
    end: int


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    sent_id: int
    tokens: list[Token]
    mentions: list[Mention]

    def units(self) -> list[Unit]:
        out: list[Unit] = []
        spans = sorted(self.mentions, key=lambda m: m.start)
        pos = 0
        si = 0
        n = len(self.tokens)
        while pos < n:
            if si < len(spans) and spans[si].start == pos:
                m = spans[si]
                out.append(Unit(m.surface_of(self.tokens), m.entity, m.start, m.end))
                pos = m.end
                si += 1
            else:
                out.append(Unit(normalize(self.tokens[pos].surface), None, pos, pos + 1))
                pos += 1
        return out

    def text(self) -> str:
        return " ".join(t.surface for t in self.tokens)


def _check_tree(tokens: list[Token], where: str) -> None:
    n = len(tokens)
    roots = [i for i, t in enumerate(tokens) if t.head == ROOT_HEAD]
    if len(roots) != 1:
        raise CorpusError(f"{where}: expected exactly one root token, found {len(roots)}")
    for i, t in enumerate(tokens):
        if t.head == ROOT_HEAD:
            continue
        if not 0 <= t.head < n:
            raise CorpusError(f"{where}: token {i} head {t.head} out of range")
        if t.head == i:
            raise CorpusError(f"{where}: token {i} is its own head")
    # every token must reach the root; a chain longer than n means a cycle
    for i in range(n):
        j, steps = i, 0
        while tokens[j].head != ROOT_HEAD:
            j = tokens[j].head
            steps += 1
            if steps > n:
                raise CorpusError(f"{where}: dependency cycle involving token {i}")


def _check_mentions(ms: list[Mention], n_tokens: int, where: str) -> None:
    spans = sorted(ms, key=lambda m: (m.start, m.end))
    prev_end = 0
    for m in spans:
        if not (0 <= m.start < m.end <= n_tokens):
            raise CorpusError(f"{where}: mention span [{m.start},{m.end}) out of bounds")
        if m.start < prev_end:
            raise CorpusError(f"{where}: overlapping mention spans at token {m.start}")
        prev_end = m.end


def _parse_sentence(rec: dict, lineno: int) -> Sentence:
    def need(field: str):
        if field not in rec:
            raise CorpusError(f"line {lineno}: missing field '{field}'")
        return rec[field]

    version = need("version")
    if version != FORMAT_VERSION:
        raise CorpusError(f"line {lineno}: unsupported format version {version!r}")
    doc_id = need("doc_id")
    sent_id = need("sent_id")
    if not isinstance(doc_id, str) or not isinstance(sent_id, int):
        raise CorpusError(f"line {lineno}: field 'doc_id' must be a string and 'sent_id' an integer")

    tokens: list[Token] = []
    for i, row in enumerate(need("tokens")):
        if not (isinstance(row, list) and len(row) == 4):
            raise CorpusError(f"line {lineno}: field 'tokens'[{i}] must be [surface, pos, head, deprel]")
        surface, pos, head, deprel = row
        if not (isinstance(surface, str) and isinstance(pos, str)
                and isinstance(head, int) and isinstance(deprel, str)):
            raise CorpusError(f"line {lineno}: field 'tokens'[{i}] has a wrong-typed entry")
        tokens.append(Token(surface, pos, head, deprel))
    if not tokens:
        raise CorpusError(f"line {lineno}: field 'tokens' is empty")

    mentions: list[Mention] = []
    for i, row in enumerate(need("mentions")):
        if not (isinstance(row, list) and len(row) == 3):
            raise CorpusError(f"line {lineno}: field 'mentions'[{i}] must be [start, end, entity]")
        start, end, entity = row
        if not (isinstance(start, int) and isinstance(end, int)
                and (entity is None or isinstance(entity, str))):
            raise CorpusError(f"line {lineno}: field 'mentions'[{i}] has a wrong-typed entry")
        mentions.append(Mention(start, end, entity))

    where = f"line {lineno} (doc {doc_id!r} sent {sent_id})"
    _check_tree(tokens, where)
    _check_mentions(mentions, len(tokens), where)
    return Sentence(doc_id, sent_id, tokens, mentions)


def load_corpus(path: str) -> list[Sentence]:
    """Read a line-delimited corpus file.  Empty files yield an empty corpus."""
    out: list[Sentence] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"line {lineno}: invalid JSON ({e.msg})") from None
            if not isinstance(rec, dict):
                raise CorpusError(f"line {lineno}: record must be a JSON object")
            out.append(_parse_sentence(rec, lineno))
    return out


def write_corpus(path: str, sentences: Iterable[Sentence]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in sentences:
            rec = {
                "version": FORMAT_VERSION,
                "doc_id": s.doc_id,
                "sent_id": s.sent_id,
                "tokens": [[t.surface, t.pos, t.head, t.deprel] for t in s.tokens],
                "mentions": [[m.start, m.end, m.entity] for m in s.mentions],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class StringSense:
    """A vocabulary entry: a normalized surface plus an optional entity link."""

    surface: str
    entity: str | None
    sense_id: int
    count: int


class Vocabulary:
    """Dense-id sense inventory with O(1) lookup by (surface, entity)."""

    def __init__(self, senses: list[StringSense]):
        for i, s in enumerate(senses):
            if s.sense_id != i:
                raise ValueError(f"sense ids must be dense, got {s.sense_id} at position {i}")
        self.senses = senses
        self._index = {(s.surface, s.entity): s.sense_id for s in senses}

    def __len__(self) -> int:
        return len(self.senses)

    def __iter__(self) -> Iterator[StringSense]:
        return iter(self.senses)

    def lookup(self, surface: str, entity: str | None = None) -> int | None:
        return self._index.get((surface, entity))

    def lookup_unit(self, unit: Unit) -> int | None:
        return self._index.get((unit.surface, unit.entity))

    def sense(self, sense_id: int) -> StringSense:
        return self.senses[sense_id]

    def unlinkable_ids(self) -> list[int]:
        return [s.sense_id for s in self.senses if s.entity is None]

    def content_hash(self) -> str:
        h = hashlib.blake2b(digest_size=16)
        for s in self.senses:
            h.update(f"{s.surface}\x1f{s.entity or ''}\x1f{s.sense_id}\x1f{s.count}\x00".encode())
        return h.hexdigest()

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"version": FORMAT_VERSION, "size": len(self.senses)}) + "\n")
            for s in self.senses:
                fh.write(json.dumps([s.surface, s.entity, s.sense_id, s.count],
                                    ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            head = json.loads(fh.readline())
            if head.get("version") != FORMAT_VERSION:
                raise CorpusError(f"{path}: unsupported vocabulary version")
            senses = []
            for line in fh:
                surface, entity, sense_id, count = json.loads(line)
                senses.append(StringSense(surface, entity, sense_id, count))
        if len(senses) != head.get("size"):
            raise CorpusError(f"{path}: vocabulary truncated ({len(senses)} of {head.get('size')} entries)")
        return cls(senses)


def build_vocabulary(sentences: Iterable[Sentence], min_count: int = 10) -> Vocabulary:
    """Tally mention-collapsed units and assign dense sense ids.

    A multi-token mention counts once as a phrase; its component tokens are
    not tallied separately.  Ids are assigned by descending count, ties broken
    lexicographically by (surface, entity) with unlinked senses first.
    """
    counts: Counter[tuple[str, str | None]] = Counter()
    for sent in sentences:
        for u in sent.units():
            counts[(u.surface, u.entity)] += 1
    kept = [(surface, entity, c) for (surface, entity), c in counts.items() if c >= min_count]
    kept.sort(key=lambda t: (-t[2], t[0], t[1] or ""))
    senses = [StringSense(surface, entity, i, c) for i, (surface, entity, c) in enumerate(kept)]
    return Vocabulary(senses)
