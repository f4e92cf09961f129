"""Planted synonym corpus for end-to-end tests.

Geometry of the plant:

* every synonym group draws its context pool from a shared global context
  vocabulary, so each context word serves several groups and also shows up
  in filler sentences -- its distribution is a mixture, which keeps it from
  aligning too tightly with any one group;
* group members and the group's one unlinkable decoy word draw contexts from
  the same pool at the same rate, leaving them distributionally near-tied;
* synonym pairs appear in "A , also known as B ." sentences and decoy-member
  pairs in "X met Y ." sentences with the same direct co-occurrence budget,
  so only the dependency-path shape tells them apart.

A ranker that adds the pattern vote can break the member/decoy ties; one
that ignores it is left guessing.
"""

from dataclasses import dataclass, field

import numpy as np

from syndisc.corpus import Mention, Sentence, Token, write_corpus


@dataclass
class PlantedSpec:
    n_groups: int = 20
    sizes: tuple[int, ...] = (2, 3, 4)  # group sizes, cycled
    reps_context: int = 40  # context sentences per member and per decoy
    reps_known: int = 14  # "also known as" sentences per covered pair
    reps_met: int = 12  # "met" sentences per decoy-member pair
    known_frac: float = 1.0  # fraction of synonym pairs given known-as sentences
    n_ctx: int = 64  # shared context vocabulary
    pool: int = 8  # context words per group, drawn from the shared vocabulary
    slots: int = 4  # context words per context sentence
    n_noise: int = 40  # words that only ever appear in filler
    n_filler: int = 2000  # filler sentences diluting the context words
    n_fn_filler: int = 1200  # fillers re-using the template function words
    reps_cross_met: int = 200  # met sentences between members of different groups
    seed: int = 0

    def group_size(self, g: int) -> int:
        return self.sizes[g % len(self.sizes)]

    def members(self, g: int) -> list[str]:
        return [f"syn{g}_{j}" for j in range(self.group_size(g))]

    def entity(self, g: int) -> str:
        return f"E{g}"

    def kb_text(self) -> str:
        lines = []
        for g in range(self.n_groups):
            lines.append("\t".join([self.entity(g)] + self.members(g)))
        return "\n".join(lines) + "\n"


def _star(words, pos, doc, sent, mentions=()):
    toks = [Token(w, pos[i], -1 if i == 0 else 0, "root" if i == 0 else "dep")
            for i, w in enumerate(words)]
    return Sentence(doc, sent, toks, [Mention(a, b, e) for a, b, e in mentions])


def _known_as(a, b, entity, doc, sent):
    words = [a, ",", "also", "known", "as", b, "."]
    pos = ["NN", ",", "RB", "VBN", "IN", "NN", "."]
    heads = [-1, 0, 3, 0, 5, 3, 0]
    rels = ["root", "punct", "advmod", "acl", "case", "nmod", "punct"]
    toks = [Token(words[i], pos[i], heads[i], rels[i]) for i in range(7)]
    ms = [Mention(0, 1, entity), Mention(5, 6, entity)]
    return Sentence(doc, sent, toks, ms)


def _met(x, y, fill, doc, sent, x_entity=None, y_entity=None):
    # padded to seven tokens so one met appearance contributes about as many
    # graph edges as one known-as appearance (keeps decoy degrees honest)
    words = [x, "met", y, "near", fill[0], fill[1], "."]
    pos = ["NN", "VBD", "NN", "IN", "NN", "NN", "."]
    heads = [1, -1, 1, 4, 1, 4, 1]
    rels = ["nsubj", "root", "dobj", "case", "nmod", "dep", "punct"]
    toks = [Token(words[i], pos[i], heads[i], rels[i]) for i in range(7)]
    ms = []
    if x_entity:
        ms.append(Mention(0, 1, x_entity))
    if y_entity:
        ms.append(Mention(2, 3, y_entity))
    return Sentence(doc, sent, toks, ms)


@dataclass
class Planted:
    spec: PlantedSpec
    sentences: list[Sentence]
    known_pairs: dict[str, list[tuple[str, str]]] = field(default_factory=dict)


def planted(seed: int = 0, **overrides) -> Planted:
    spec = PlantedSpec(seed=seed, **overrides)
    rng = np.random.default_rng(spec.seed)
    ctx_words = [f"ctx{i}" for i in range(spec.n_ctx)]
    noise = [f"w{i}" for i in range(spec.n_noise)]
    filler_vocab = ctx_words + noise
    pools = [[ctx_words[int(i)] for i in rng.choice(spec.n_ctx, size=spec.pool,
                                                    replace=False)]
             for _ in range(spec.n_groups)]
    sentences: list[Sentence] = []
    known_pairs: dict[str, list[tuple[str, str]]] = {}
    sid = 0

    def context_sentence(word, entity, g):
        nonlocal sid
        picks = [pools[g][int(i)] for i in rng.choice(spec.pool, size=spec.slots,
                                                      replace=False)]
        ms = [(0, 1, entity)] if entity else ()
        s = _star([word] + picks, ["NN"] * (1 + spec.slots), f"doc{g}", sid, ms)
        sid += 1
        sentences.append(s)

    for g in range(spec.n_groups):
        entity = spec.entity(g)
        members = spec.members(g)
        decoy = f"dec{g}"
        for _ in range(spec.reps_context):
            for m in members:
                context_sentence(m, entity, g)
            context_sentence(decoy, None, g)

        pairs = [(a, b) for i, a in enumerate(members) for b in members[i + 1:]]
        covered = [p for p in pairs if rng.random() < spec.known_frac]
        known_pairs[entity] = covered
        for a, b in covered:
            for _ in range(spec.reps_known):
                x, y = (a, b) if rng.random() < 0.5 else (b, a)
                sentences.append(_known_as(x, y, entity, f"doc{g}", sid))
                sid += 1

        # the decoy gets the same direct co-occurrence budget, different path
        for m in members:
            for _ in range(spec.reps_met):
                fill = [noise[int(i)] for i in rng.choice(spec.n_noise, size=2,
                                                          replace=False)]
                if rng.random() < 0.5:
                    sentences.append(_met(decoy, m, fill, f"doc{g}", sid,
                                          y_entity=entity))
                else:
                    sentences.append(_met(m, decoy, fill, f"doc{g}", sid,
                                          x_entity=entity))
                sid += 1

    for _ in range(spec.reps_cross_met):
        ga, gb = rng.choice(spec.n_groups, size=2, replace=False)
        a = spec.members(int(ga))[int(rng.integers(spec.group_size(int(ga))))]
        b = spec.members(int(gb))[int(rng.integers(spec.group_size(int(gb))))]
        fill = [noise[int(i)] for i in rng.choice(spec.n_noise, size=2,
                                                  replace=False)]
        sentences.append(_met(a, b, fill, "docx", sid,
                              x_entity=spec.entity(int(ga)),
                              y_entity=spec.entity(int(gb))))
        sid += 1

    for _ in range(spec.n_filler):
        picks = [filler_vocab[int(i)]
                 for i in rng.choice(len(filler_vocab), size=5, replace=False)]
        sentences.append(_star(picks, ["NN"] * 5, "docf", sid))
        sid += 1

    # template function words also live ordinary lives as star leaves, so
    # their vectors settle at a global position instead of inside any group;
    # as leaves they are always masked pattern endpoints, never path lexemes
    fn_words = [(",", ","), (".", "."), ("also", "RB"), ("known", "VBN"),
                ("as", "IN"), ("met", "VBD"), ("near", "IN")]
    for _ in range(spec.n_fn_filler):
        ws = [filler_vocab[int(i)]
              for i in rng.choice(len(filler_vocab), size=3, replace=False)]
        f1, f2 = (fn_words[int(i)] for i in rng.choice(len(fn_words), size=2,
                                                       replace=False))
        words = [ws[0], f1[0], ws[1], f2[0], ws[2]]
        pos = ["NN", f1[1], "NN", f2[1], "NN"]
        sentences.append(_star(words, pos, "docf", sid))
        sid += 1

    return Planted(spec, sentences, known_pairs)


def write_planted(dirpath, seed: int = 0, **overrides):
    """Write corpus.jsonl and kb.tsv under dirpath; returns their paths."""
    import os

    p = planted(seed=seed, **overrides)
    corpus_path = os.path.join(str(dirpath), "corpus.jsonl")
    kb_path = os.path.join(str(dirpath), "kb.tsv")
    write_corpus(corpus_path, p.sentences)
    with open(kb_path, "w", encoding="utf-8") as fh:
        fh.write(p.spec.kb_text())
    return corpus_path, kb_path
