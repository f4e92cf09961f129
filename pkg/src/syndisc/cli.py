"""Command-line front end: validate, build, train, discover, evaluate,
inspect-patterns.

Exit codes: 0 success; 2 bad input or configuration; 3 unknown query entity;
4 pattern features requested but unavailable.
"""

from __future__ import annotations

import argparse
import difflib
import json
import logging
import os
import sys
from dataclasses import fields

import numpy as np

from .artifacts import (
    ArtifactError,
    Artifacts,
    load_artifacts,
    write_build_info,
    write_manifest,
)
from .corpus import CorpusError, build_vocabulary, load_corpus
from .evaluate import EvalError, evaluate
from .graph import GraphError, build_graph
from .infer import InferError, Query, rank
from .patterns import (
    PairIndex,
    PatternError,
    TrainingPatterns,
    collect_training_patterns,
    featurize,
    save_training_patterns,
    vote_score,
)
from .seeds import (
    KbError,
    KbSynonyms,
    SeedSet,
    SplitError,
    collect_seeds,
    save_seeds,
    split_entities,
    validate_links,
)
from .train import (
    CheckpointError,
    Model,
    TrainConfig,
    TrainDivergedError,
    TrainerError,
    load_model,
    save_model,
    train,
)

log = logging.getLogger("syndisc.cli")

OK = 0
ERR_INPUT = 2
ERR_ENTITY = 3
ERR_PATTERNS = 4

_INPUT_ERRORS = (
    CorpusError, KbError, SplitError, GraphError, PatternError, TrainerError,
    TrainDivergedError, CheckpointError, ArtifactError, InferError, EvalError,
    OSError, json.JSONDecodeError, ValueError,
)


class UnknownEntityError(Exception):
    pass


class PatternsUnavailableError(Exception):
    pass


_CONFIG_KEYS = {f.name for f in fields(TrainConfig)}
_BUILD_KEYS = _CONFIG_KEYS | {"warm_frac", "cold_frac", "collapse_positions"}
# structural knobs are fixed at build time; training may not silently change them
_TRAIN_LOCKED = {"dim", "ngram_max", "hash_dims", "window", "min_count",
                 "max_path_len"}


def _read_config_file(path: str | None, allowed: set[str]) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config file must hold a JSON object")
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ValueError(f"{path}: unknown config keys: {', '.join(unknown)}")
    return raw


def _overrides(args, keys) -> dict:
    out = {}
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


# ------------------------------------------------------------------ commands

def cmd_validate(args) -> int:
    sentences = load_corpus(args.corpus)
    report = {
        "sentences": len(sentences),
        "documents": len({s.doc_id for s in sentences}),
        "tokens": sum(len(s.tokens) for s in sentences),
        "mentions": sum(len(s.mentions) for s in sentences),
        "linked_mentions": sum(1 for s in sentences
                               for m in s.mentions if m.entity),
    }
    if args.kb:
        kb = KbSynonyms.load(args.kb)
        kept, dropped = validate_links(sentences, kb)
        per_entity: dict[str, int] = {}
        for s in kept:
            for m in s.mentions:
                if m.entity:
                    per_entity[m.entity] = per_entity.get(m.entity, 0) + 1
        report["dropped_links"] = dropped
        report["entities_mentioned"] = len(per_entity)
        if args.json:
            report["per_entity_mentions"] = dict(sorted(per_entity.items()))
    if args.json:
        print(json.dumps(report, indent=1, sort_keys=True))
    else:
        print(" ".join(f"{k}={report[k]}" for k in sorted(report)))
    return OK


def cmd_build(args) -> int:
    file_cfg = _read_config_file(args.config, _BUILD_KEYS)
    warm_frac = args.warm_frac if args.warm_frac is not None \
        else file_cfg.pop("warm_frac", 0.1)
    cold_frac = args.cold_frac if args.cold_frac is not None \
        else file_cfg.pop("cold_frac", 0.1)
    collapse = file_cfg.pop("collapse_positions", True)
    if args.token_positions:
        collapse = False
    cfg = TrainConfig(**(file_cfg | _overrides(args, _CONFIG_KEYS)))

    sentences = load_corpus(args.corpus)
    kb = KbSynonyms.load(args.kb)
    sentences, dropped = validate_links(sentences, kb)
    if dropped:
        log.warning("dropped %d mention links not backed by the synonym lists",
                    dropped)
    vocab = build_vocabulary(sentences, min_count=cfg.min_count)
    if len(vocab) == 0:
        raise CorpusError("vocabulary is empty; corpus too small for min_count="
                          f"{cfg.min_count}")
    graph = build_graph(sentences, vocab, window=cfg.window,
                        collapse_positions=collapse)
    seeds_all = collect_seeds(sentences, vocab, kb)
    if not seeds_all.per_entity:
        log.warning("corpus holds no valid linked mentions; seed sets are empty")
        seeds_train, seeds_warm, seeds_cold = (SeedSet.build({}) for _ in range(3))
    else:
        seeds_train, seeds_warm, seeds_cold = split_entities(
            seeds_all, warm_frac, cold_frac, rng_seed=cfg.seed)
    index = PairIndex.build(sentences, vocab, max_path_len=cfg.max_path_len)
    try:
        tp = collect_training_patterns(index, seeds_train, vocab, cfg.dim,
                                       np.random.default_rng(cfg.seed),
                                       cfg.ngram_max, cfg.hash_dims)
    except PatternError as e:
        log.warning("%s; writing an empty training-pattern set "
                    "(training will fall back to the distributional parts)", e)
        tp = TrainingPatterns([], 0, 0, cfg.dim, cfg.ngram_max, cfg.hash_dims)

    os.makedirs(args.out, exist_ok=True)
    jp = os.path.join
    vocab.save(jp(args.out, "vocab.jsonl"))
    graph.save(jp(args.out, "graph.txt"))
    save_seeds(jp(args.out, "seeds.json"), seeds_train, seeds_warm, seeds_cold)
    index.save(jp(args.out, "patterns.jsonl"))
    save_training_patterns(jp(args.out, "train_patterns.json"), tp)
    counts = {
        "sentences": len(sentences),
        "senses": len(vocab),
        "edges": graph.n_edges,
        "entities": len(seeds_all.per_entity),
        "train_entities": len(seeds_train.per_entity),
        "warm_entities": len(seeds_warm.per_entity),
        "cold_entities": len(seeds_cold.per_entity),
        "patterns": len(index),
        "training_patterns": len(tp),
        "dropped_links": dropped,
    }
    write_build_info(args.out, cfg, counts, collapse, warm_frac, cold_frac)
    write_manifest(args.out)
    print(json.dumps({"out": args.out, "vocab_hash": vocab.content_hash(),
                      "counts": counts}, indent=1, sort_keys=True))
    return OK


def cmd_train(args) -> int:
    arts = load_artifacts(args.artifacts)
    file_cfg = _read_config_file(args.config, _CONFIG_KEYS)
    merged = arts.config.__dict__ | {"part_rates": arts.config.part_rates}
    merged |= file_cfg | _overrides(args, _CONFIG_KEYS)
    cfg = TrainConfig(**merged)
    for key in _TRAIN_LOCKED:
        if getattr(cfg, key) != getattr(arts.config, key):
            raise TrainerError(
                f"{key} is fixed at build time ({getattr(arts.config, key)}); "
                "rebuild the artifacts to change it")
    use_patterns = cfg.use_patterns
    if use_patterns and len(arts.train_patterns) == 0:
        log.warning("bundle has no training patterns; "
                    "training the distributional parts only")
        cfg.use_patterns = False
    model = train(arts.graph, arts.seeds_train, arts.train_patterns, cfg,
                  vocab_hash=arts.vocab_hash)
    save_model(args.out, model)
    print(json.dumps({"out": args.out, "iterations": cfg.iterations,
                      "seed": cfg.seed, "use_patterns": cfg.use_patterns,
                      "vocab_hash": model.vocab_hash}, indent=1, sort_keys=True))
    return OK


def _load_model_for(arts: Artifacts, path: str) -> Model:
    return load_model(path, expected_vocab_hash=arts.vocab_hash)


def _resolve_pattern_weight(args_weight, model: Model, index_len: int) -> float:
    """Pick the vote weight, refusing explicit requests that cannot be served."""
    available = model.config.use_patterns and index_len > 0
    if args_weight is not None:
        if args_weight != 0.0 and not available:
            raise PatternsUnavailableError(
                "pattern vote requested but the model was trained without the "
                "pattern part (or the bundle has no patterns)")
        return args_weight
    if not available:
        return 0.0
    return model.config.pattern_weight


def _query_names(arts: Artifacts, entity: str) -> tuple[int, ...]:
    for seeds in (arts.seeds_train, arts.seeds_warm, arts.seeds_cold):
        if entity in seeds.per_entity:
            given = seeds.given.get(entity)
            return tuple(sorted(given if given else seeds.per_entity[entity]))
    known = sorted(set(arts.seeds_train.per_entity)
                   | set(arts.seeds_warm.per_entity)
                   | set(arts.seeds_cold.per_entity))
    close = difflib.get_close_matches(entity, known, n=5, cutoff=0.0)
    raise UnknownEntityError(
        f"entity {entity!r} has no observed senses; closest known entities: "
        + ", ".join(close))


def cmd_discover(args) -> int:
    arts = load_artifacts(args.artifacts)
    model = _load_model_for(arts, args.model)
    weight = _resolve_pattern_weight(args.pattern_weight, model, len(arts.index))
    names = _query_names(arts, args.entity)
    query = Query(names=names, entity=args.entity)
    ranked = rank(model, query, vocab=arts.vocab, index=arts.index,
                  top_k=args.top_k, pool_size=args.pool_size,
                  pattern_weight=weight)
    rows = []
    for i, c in enumerate(ranked, start=1):
        sense = arts.vocab.sense(c.sense)
        rows.append({"rank": i, "sense": c.sense, "surface": sense.surface,
                     "entity": sense.entity, "score": round(c.score, 6),
                     "dist": round(c.dist, 6), "vote": round(c.vote, 6)})
    if args.json:
        print(json.dumps({"entity": args.entity, "names": list(names),
                          "pattern_weight": weight, "results": rows}, indent=1))
    else:
        for r in rows:
            ent = r["entity"] or "-"
            print(f"{r['rank']:3d}  {r['surface']}  [{ent}]  "
                  f"score={r['score']:.6f} dist={r['dist']:.6f} vote={r['vote']:.6f}")
    return OK


def cmd_evaluate(args) -> int:
    arts = load_artifacts(args.artifacts)
    model = _load_model_for(arts, args.model)
    weight = _resolve_pattern_weight(args.pattern_weight, model, len(arts.index))
    seeds = {"warm": arts.seeds_warm, "cold": arts.seeds_cold}[args.split]
    if not seeds.per_entity:
        raise EvalError(f"the {args.split} split holds no entities")
    ks = tuple(int(k) for k in args.k.split(","))
    reports = evaluate(model, seeds, arts.vocab,
                       index=arts.index if weight != 0.0 else None,
                       ks=ks, pattern_weight=weight)
    if args.json:
        out = {str(k): reports[k].summary() for k in ks}
        for k in ks:
            out[str(k)]["per_entity"] = [
                {"entity": e.entity, "precision": e.precision, "recall": e.recall,
                 "f1": e.f1, "retrieved": list(e.retrieved)}
                for e in reports[k].per_entity]
        print(json.dumps({"split": args.split, "pattern_weight": weight,
                          "reports": out}, indent=1, sort_keys=True))
    else:
        for k in ks:
            s = reports[k].summary()
            print(f"split={args.split} k={k} entities={s['entities']} "
                  f"skipped={s['skipped']} precision={s['precision']:.4f} "
                  f"recall={s['recall']:.4f} f1={s['f1']:.4f}")
    return OK


def _top_training_patterns(arts: Artifacts, model: Model, top_n: int) -> list[dict]:
    """Distinct training patterns, best classifier probability first.

    Identical rendered paths share features and therefore a probability;
    each keeps its support count and one exemplar sentence.
    """
    groups: dict[str, dict] = {}
    for entry in arts.train_patterns.entries:
        pat = arts.index.patterns[entry.pattern_row]
        key = pat.render()
        row = groups.get(key)
        if row is None:
            prob = model.classifier.classify(model.table, entry.feats)
            groups[key] = {"pattern": key, "probability": round(prob, 6),
                           "support": 1, "positive": int(entry.label == 1),
                           "doc_id": pat.doc_id, "sent_id": pat.sent_id}
        else:
            row["support"] += 1
            row["positive"] += int(entry.label == 1)
    ranked = sorted(groups.values(),
                    key=lambda r: (-r["probability"], r["pattern"]))
    return ranked[: max(top_n, 0)]


def cmd_inspect_patterns(args) -> int:
    arts = load_artifacts(args.artifacts)
    model = _load_model_for(arts, args.model)
    if not model.config.use_patterns or len(arts.index) == 0:
        raise PatternsUnavailableError(
            "this model was trained without the pattern part "
            "(or the bundle holds no patterns); nothing to inspect")

    if args.pair is None:
        if len(arts.train_patterns) == 0:
            raise PatternsUnavailableError(
                "the bundle holds no labeled training patterns to rank; "
                "inspect a specific pair with --pair instead")
        rows = _top_training_patterns(arts, model, args.top)
        if args.json:
            print(json.dumps({"count": len(rows), "patterns": rows}, indent=1))
        else:
            for r in rows:
                print(f"p={r['probability']:.6f}  x{r['support']}  "
                      f"{r['pattern']}  ({r['doc_id']}#{r['sent_id']})")
        return OK

    u, v = args.pair
    n = len(arts.vocab)
    for s in (u, v):
        if not 0 <= s < n:
            raise InferError(f"sense id {s} outside the vocabulary (size {n})")
    pats = arts.index.for_pair(u, v)
    rows = []
    for p in pats:
        feats = featurize(p.triples, arts.vocab, model.classifier.dim,
                          model.classifier.ngram_max, model.classifier.hash_dims)
        prob = model.classifier.classify(model.table, feats)
        rows.append({"pattern": p.render(), "doc_id": p.doc_id,
                     "sent_id": p.sent_id, "probability": round(prob, 6)})
    mean = vote_score(model.classifier, model.table, arts.vocab, arts.index, u, v)
    blob = {"pair": [u, v],
            "surfaces": [arts.vocab.sense(u).surface, arts.vocab.sense(v).surface],
            "count": len(rows),
            "mean_probability": None if mean is None else round(mean, 6),
            "patterns": rows}
    if args.json:
        print(json.dumps(blob, indent=1))
    else:
        print(f"pair ({u}, {v}) = ({blob['surfaces'][0]}, {blob['surfaces'][1]}): "
              f"{len(rows)} patterns, mean probability "
              + ("n/a" if mean is None else f"{mean:.6f}"))
        for r in rows:
            print(f"  p={r['probability']:.6f}  {r['pattern']}  "
                  f"({r['doc_id']}#{r['sent_id']})")
    return OK


# ------------------------------------------------------------------- parsing

def _add_config_flags(p: argparse.ArgumentParser, *, training: bool) -> None:
    p.add_argument("--config", help="JSON file of configuration overrides")
    p.add_argument("--seed", type=int)
    if training:
        p.add_argument("--iterations", type=int)
        p.add_argument("--learning-rate", dest="learning_rate", type=float)
        p.add_argument("--negatives", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--no-patterns", dest="use_patterns", action="store_const",
                       const=False)
        p.add_argument("--log-every", dest="log_every", type=int)
    else:
        p.add_argument("--dim", type=int)
        p.add_argument("--window", type=int)
        p.add_argument("--min-count", dest="min_count", type=int)
        p.add_argument("--max-path-len", dest="max_path_len", type=int)
        p.add_argument("--ngram-max", dest="ngram_max", type=int)
        p.add_argument("--hash-dims", dest="hash_dims", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="syndisc",
        description="Discover synonyms by joint embedding and "
                    "dependency-pattern training.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="derive the artifact bundle from a corpus")
    b.add_argument("--corpus", required=True)
    b.add_argument("--kb", required=True, help="entity<TAB>synonym... lines")
    b.add_argument("--out", required=True, help="bundle directory to create")
    b.add_argument("--warm-frac", dest="warm_frac", type=float)
    b.add_argument("--cold-frac", dest="cold_frac", type=float)
    b.add_argument("--token-positions", action="store_true",
                   help="measure the window over token offsets instead of "
                        "collapsed unit positions")
    _add_config_flags(b, training=False)
    b.set_defaults(fn=cmd_build)

    t = sub.add_parser("train", help="train a model from a bundle")
    t.add_argument("--artifacts", required=True)
    t.add_argument("--out", required=True, help="checkpoint file to write")
    _add_config_flags(t, training=True)
    t.set_defaults(fn=cmd_train)

    d = sub.add_parser("discover", help="rank synonym candidates for an entity")
    d.add_argument("--artifacts", required=True)
    d.add_argument("--model", required=True)
    d.add_argument("--entity", required=True)
    d.add_argument("--top-k", dest="top_k", type=int, default=10)
    d.add_argument("--pool-size", dest="pool_size", type=int)
    d.add_argument("--pattern-weight", dest="pattern_weight", type=float)
    d.add_argument("--json", action="store_true")
    d.set_defaults(fn=cmd_discover)

    e = sub.add_parser("evaluate", help="score a model on a held-out split")
    e.add_argument("--artifacts", required=True)
    e.add_argument("--model", required=True)
    e.add_argument("--split", choices=("warm", "cold"), default="warm")
    e.add_argument("--k", default="1,5", help="comma-separated cutoffs")
    e.add_argument("--pattern-weight", dest="pattern_weight", type=float)
    e.add_argument("--json", action="store_true")
    e.set_defaults(fn=cmd_evaluate)

    i = sub.add_parser("inspect-patterns",
                       help="rank training patterns by classifier probability, "
                            "or show the indexed patterns behind one pair")
    i.add_argument("--artifacts", required=True)
    i.add_argument("--model", required=True)
    i.add_argument("--pair", nargs=2, type=int,
                   metavar=("SENSE_U", "SENSE_V"))
    i.add_argument("--top", type=int, default=20,
                   help="patterns to list when no --pair is given")
    i.add_argument("--json", action="store_true")
    i.set_defaults(fn=cmd_inspect_patterns)

    v = sub.add_parser("validate",
                       help="check a corpus file (and optionally a KB) and "
                            "report counts")
    v.add_argument("--corpus", required=True)
    v.add_argument("--kb")
    v.add_argument("--json", action="store_true")
    v.set_defaults(fn=cmd_validate)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UnknownEntityError as e:
        print(f"error: {e}", file=sys.stderr)
        return ERR_ENTITY
    except PatternsUnavailableError as e:
        print(f"error: {e}", file=sys.stderr)
        return ERR_PATTERNS
    except _INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return ERR_INPUT


if __name__ == "__main__":
    sys.exit(main())
