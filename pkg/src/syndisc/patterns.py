"""Dependency-path patterns between co-mentioned strings, and their classifier.

A pattern is the token sequence on the tree path between two units' head
tokens, rendered as (lexeme, pos, deprel) triples with the two endpoint
lexemes masked to "-".  Patterns are featurized as a dense lexical part (mean
embedding of the unmasked path lexemes) plus hashed indicator n-grams over
the POS and deprel sequences, and scored by a logistic classifier whose
gradient also flows into the lexeme embeddings.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .corpus import Sentence, Unit, Vocabulary, normalize
from .embedding import EmbeddingTable

MASK = "-"
DEFAULT_HASH_DIMS = 1 << 20
DEFAULT_MAX_PATH_LEN = 8

Triple = tuple[str, str, str]


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class Pattern:
    triples: tuple[Triple, ...]
    pair: tuple[int, int]  # unordered sense-id pair, smaller id first
    doc_id: str
    sent_id: int

    def render(self) -> str:
        return " ".join(f"({l},{p},{r})" for l, p, r in self.triples)


def head_token(sentence: Sentence, unit: Unit) -> int:
    """Token index representing a unit in the tree.

    Multi-token units use the unique token whose head lies outside the span
    (or is the sentence root); if that token is not unique, the last token of
    the span stands in.
    """
    if unit.end - unit.start == 1:
        return unit.start
    exits = [i for i in range(unit.start, unit.end)
             if not (unit.start <= sentence.tokens[i].head < unit.end)]
    if len(exits) == 1:
        return exits[0]
    return unit.end - 1


def _path_tokens(sentence: Sentence, a: int, b: int) -> list[int]:
    """Tree path from token a to token b, inclusive, via the lowest common ancestor."""
    heads = [t.head for t in sentence.tokens]

    def chain(i: int) -> list[int]:
        out = [i]
        while heads[out[-1]] >= 0:
            out.append(heads[out[-1]])
        return out

    up_a = chain(a)
    depth_a = {tok: i for i, tok in enumerate(up_a)}
    up_b = []
    cur = b
    while cur not in depth_a:
        up_b.append(cur)
        cur = heads[cur]
    lca = cur
    return up_a[: depth_a[lca] + 1] + list(reversed(up_b))


def extract_pattern(
    sentence: Sentence,
    a: Unit,
    b: Unit,
    max_path_len: int = DEFAULT_MAX_PATH_LEN,
) -> tuple[Triple, ...] | None:
    """Triples along the path between two units, endpoints masked.

    Returns None when the path exceeds max_path_len tokens.  Each token
    contributes its own deprel (the label of the arc to its head).
    """
    ha, hb = head_token(sentence, a), head_token(sentence, b)
    if ha == hb:
        return None
    path = _path_tokens(sentence, ha, hb)
    if len(path) > max_path_len:
        return None
    triples = []
    for tok_i in path:
        t = sentence.tokens[tok_i]
        lex = MASK if tok_i in (ha, hb) else normalize(t.surface)
        triples.append((lex, t.pos, t.deprel))
    return tuple(triples)


# ---------------------------------------------------------------- featurizing

def hash64(key: str) -> int:
    """Stable 64-bit hash (blake2b); never the interpreter's builtin hash."""
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "big")


def ngram_keys(triples: Sequence[Triple], ngram_max: int) -> list[str]:
    """String keys for every POS n-gram and deprel n-gram, n = 1..ngram_max.

    A pattern of length L yields L-n+1 keys per n per sequence, counted with
    multiplicity here; hashing dedupes repeats into binary indicators.
    """
    pos_seq = [p for _, p, _ in triples]
    dep_seq = [r for _, _, r in triples]
    keys = []
    for tag, seq in (("pos", pos_seq), ("dep", dep_seq)):
        for n in range(1, ngram_max + 1):
            for i in range(len(seq) - n + 1):
                keys.append(f"{tag}:{n}:" + " ".join(seq[i:i + n]))
    return keys


@dataclass(frozen=True)
class PatternFeatures:
    """Precomputed feature handles: embedding rows and hashed indices.

    syn_idx values are absolute positions in the classifier weight vector
    (dim + hash bucket), sorted and unique.  lex_rows keeps multiplicity and
    path order.
    """

    lex_rows: np.ndarray  # int64, sense ids of unmasked in-vocab lexemes
    syn_idx: np.ndarray  # int64, absolute classifier indices

    def lexical(self, table: EmbeddingTable) -> np.ndarray:
        if self.lex_rows.size == 0:
            return np.zeros(table.dim)
        return table.x[self.lex_rows].mean(axis=0)


def featurize(
    triples: Sequence[Triple],
    vocab: Vocabulary,
    dim: int,
    ngram_max: int = 3,
    hash_dims: int = DEFAULT_HASH_DIMS,
) -> PatternFeatures:
    rows = []
    for lex, _, _ in triples:
        if lex == MASK:
            continue
        sid = vocab.lookup(lex, None)
        if sid is not None:
            rows.append(sid)
    idx = sorted({dim + (hash64(k) % hash_dims) for k in ngram_keys(triples, ngram_max)})
    return PatternFeatures(
        lex_rows=np.asarray(rows, dtype=np.int64),
        syn_idx=np.asarray(idx, dtype=np.int64),
    )


# ---------------------------------------------------------------- classifier

@dataclass
class PatternClassifier:
    """Logistic scorer over pattern features; weights start at zero."""

    w: np.ndarray  # (dim + hash_dims + 1,), last entry is the bias
    dim: int
    hash_dims: int
    ngram_max: int

    @classmethod
    def init(cls, dim: int, hash_dims: int = DEFAULT_HASH_DIMS, ngram_max: int = 3) -> "PatternClassifier":
        return cls(np.zeros(dim + hash_dims + 1), dim, hash_dims, ngram_max)

    def copy(self) -> "PatternClassifier":
        return PatternClassifier(self.w.copy(), self.dim, self.hash_dims, self.ngram_max)

    def logit(self, table: EmbeddingTable, feats: PatternFeatures) -> float:
        z = float(self.w[: self.dim] @ feats.lexical(table)) + float(self.w[-1])
        if feats.syn_idx.size:
            z += float(self.w[feats.syn_idx].sum())
        return z

    def classify(self, table: EmbeddingTable, feats: PatternFeatures) -> float:
        return float(_kernels.sigmoid(self.logit(table, feats)))


def pattern_objective(clf: PatternClassifier, table: EmbeddingTable,
                      feats: PatternFeatures, label: int) -> float:
    from .embedding import log_sigmoid

    z = clf.logit(table, feats)
    return log_sigmoid(z) if label == 1 else log_sigmoid(-z)


def pattern_apply(clf: PatternClassifier, table: EmbeddingTable,
                  feats: PatternFeatures, label: int, lr: float) -> float:
    """Ascend the classification log-likelihood for one labeled pattern."""
    return _kernels.pattern_update(clf.w, table.x, feats.lex_rows, feats.syn_idx,
                                   int(label), lr)


# ---------------------------------------------------------------- pair index

class PairIndex:
    """All extracted patterns, addressable by unordered sense-id pair."""

    def __init__(self, patterns: list[Pattern]):
        self.patterns = patterns
        self.by_pair: dict[tuple[int, int], list[int]] = {}
        for i, p in enumerate(patterns):
            self.by_pair.setdefault(p.pair, []).append(i)

    def __len__(self) -> int:
        return len(self.patterns)

    def for_pair(self, u: int, v: int) -> list[Pattern]:
        key = (u, v) if u < v else (v, u)
        return [self.patterns[i] for i in self.by_pair.get(key, ())]

    @classmethod
    def build(
        cls,
        sentences: Iterable[Sentence],
        vocab: Vocabulary,
        max_path_len: int = DEFAULT_MAX_PATH_LEN,
    ) -> "PairIndex":
        out: list[Pattern] = []
        for sent in sentences:
            units = sent.units()
            ids = [vocab.lookup_unit(u) for u in units]
            for i in range(len(units)):
                if ids[i] is None:
                    continue
                for j in range(i + 1, len(units)):
                    if ids[j] is None or ids[j] == ids[i]:
                        continue
                    triples = extract_pattern(sent, units[i], units[j], max_path_len)
                    if triples is None:
                        continue
                    pair = (ids[i], ids[j]) if ids[i] < ids[j] else (ids[j], ids[i])
                    out.append(Pattern(triples, pair, sent.doc_id, sent.sent_id))
        return cls(out)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"version": 1, "count": len(self.patterns)}) + "\n")
            for p in self.patterns:
                fh.write(json.dumps({"p": list(p.pair), "t": [list(t) for t in p.triples],
                                     "d": p.doc_id, "s": p.sent_id}, ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path: str) -> "PairIndex":
        with open(path, encoding="utf-8") as fh:
            head = json.loads(fh.readline())
            if head.get("version") != 1:
                raise PatternError(f"{path}: unsupported pattern index version")
            pats = []
            for line in fh:
                rec = json.loads(line)
                pats.append(Pattern(tuple(tuple(t) for t in rec["t"]),
                                    tuple(rec["p"]), rec["d"], rec["s"]))
        if len(pats) != head.get("count"):
            raise PatternError(f"{path}: pattern index truncated")
        return cls(pats)


# ------------------------------------------------------------- training set

@dataclass(frozen=True)
class LabeledPattern:
    pattern_row: int  # index into the PairIndex pattern list
    label: int
    feats: PatternFeatures


@dataclass
class TrainingPatterns:
    entries: list[LabeledPattern]
    n_positive: int
    n_negative: int
    dim: int
    ngram_max: int
    hash_dims: int

    def __len__(self) -> int:
        return len(self.entries)


def collect_training_patterns(
    index: PairIndex,
    seeds,
    vocab: Vocabulary,
    dim: int,
    rng: np.random.Generator,
    ngram_max: int = 3,
    hash_dims: int = DEFAULT_HASH_DIMS,
) -> TrainingPatterns:
    """Label seed-pair patterns positive and sample ~1:1 negatives.

    Negatives come only from pairs co-mentioned in at least one sentence that
    are not seed pairs; pairs are drawn in shuffled order and their patterns
    taken until the negative count reaches the positive count.
    """
    pos_rows = [i for i, p in enumerate(index.patterns) if p.pair in seeds.pairs]
    if not pos_rows:
        raise PatternError("no positive patterns: no seed pair is co-mentioned in the corpus")

    candidates = sorted(pair for pair in index.by_pair if pair not in seeds.pairs)
    neg_rows: list[int] = []
    order = rng.permutation(len(candidates))
    for oi in order:
        if len(neg_rows) >= len(pos_rows):
            break
        neg_rows.extend(index.by_pair[candidates[int(oi)]])
    neg_rows = neg_rows[: len(pos_rows)]

    entries = []
    for rows, label in ((pos_rows, 1), (neg_rows, 0)):
        for r in rows:
            feats = featurize(index.patterns[r].triples, vocab, dim, ngram_max, hash_dims)
            entries.append(LabeledPattern(r, label, feats))
    return TrainingPatterns(entries, len(pos_rows), len(neg_rows), dim, ngram_max, hash_dims)


def save_training_patterns(path: str, tp: TrainingPatterns) -> None:
    blob = {
        "version": 1,
        "dim": tp.dim,
        "ngram_max": tp.ngram_max,
        "hash_dims": tp.hash_dims,
        "entries": [[e.pattern_row, e.label] for e in tp.entries],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh)
        fh.write("\n")


def load_training_patterns(path: str, index: PairIndex, vocab: Vocabulary) -> TrainingPatterns:
    with open(path, encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("version") != 1:
        raise PatternError(f"{path}: unsupported training-pattern version")
    entries = []
    npos = nneg = 0
    for row, label in blob["entries"]:
        feats = featurize(index.patterns[row].triples, vocab, blob["dim"],
                          blob["ngram_max"], blob["hash_dims"])
        entries.append(LabeledPattern(row, label, feats))
        npos += label == 1
        nneg += label == 0
    return TrainingPatterns(entries, npos, nneg, blob["dim"], blob["ngram_max"], blob["hash_dims"])


# ------------------------------------------------------------------- scoring

def vote_score(
    clf: PatternClassifier,
    table: EmbeddingTable,
    vocab: Vocabulary,
    index: PairIndex,
    u: int,
    v: int,
) -> float | None:
    """Mean classifier probability over the patterns indexed for (u, v).

    None when the pair was never co-mentioned; callers treat that as a zero
    contribution rather than a zero probability.
    """
    pats = index.for_pair(u, v)
    if not pats:
        return None
    acc = 0.0
    for p in pats:
        feats = featurize(p.triples, vocab, clf.dim, clf.ngram_max, clf.hash_dims)
        acc += clf.classify(table, feats)
    return acc / len(pats)
