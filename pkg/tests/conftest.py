"""Shared builders for hand-sized corpora used across the test modules."""

import json

import pytest

from syndisc.corpus import Mention, Sentence, Token


def chain_sentence(words, mentions=(), doc="d0", sent=0, pos=None, deprels=None):
    """Sentence whose tree is a left chain: token 0 is the root, i heads to i-1.

    Always a valid single tree, which keeps structural noise out of tests that
    only care about units, counting, or windows.
    """
    n = len(words)
    pos = pos or ["NN"] * n
    deprels = deprels or (["root"] + ["dep"] * (n - 1))
    toks = [Token(w, pos[i], i - 1, deprels[i]) for i, w in enumerate(words)]
    ms = [Mention(a, b, e) for a, b, e in mentions]
    return Sentence(doc, sent, toks, ms)


def star_sentence(words, root, mentions=(), doc="d0", sent=0, pos=None, deprels=None):
    """Sentence where every token attaches directly to one root token."""
    n = len(words)
    pos = pos or ["NN"] * n
    deprels = deprels or ["dep"] * n
    toks = []
    for i, w in enumerate(words):
        head = -1 if i == root else root
        rel = "root" if i == root else deprels[i]
        toks.append(Token(w, pos[i], head, rel))
    ms = [Mention(a, b, e) for a, b, e in mentions]
    return Sentence(doc, sent, toks, ms)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def corpus_record(doc="d0", sent=0, tokens=(("a", "NN", -1, "root"),), mentions=(), version=1):
    return {
        "version": version,
        "doc_id": doc,
        "sent_id": sent,
        "tokens": [list(t) for t in tokens],
        "mentions": [list(m) for m in mentions],
    }


@pytest.fixture
def tmp_corpus(tmp_path):
    def _write(records):
        p = tmp_path / "corpus.jsonl"
        write_jsonl(p, records)
        return str(p)

    return _write
