"""Joint trainer alternating co-occurrence, ranking, and pattern steps.

Every iteration performs one step of each part, in that order.  All sampling
flows through one generator in single-threaded mode, with a fixed draw
discipline so a run is exactly replayable from its seed:

  1. edge draw       three uniforms (alias bucket, alias coin, orientation)
  2. noise draws     two uniforms per negative, negatives drawn left to right
  3. seed pair       one uniform for the index, one for the orientation
  4. ranking negative  one uniform per rejection-sampling attempt
  5. pattern         one uniform for the training-pattern index

Multi-threaded mode shards iterations across workers with independent
generator streams; updates are applied without locks, so only the
single-threaded mode promises bit-identical results.
"""

from __future__ import annotations

import json
import logging
import threading
import zipfile
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .embedding import (
    BilinearWeights,
    EmbeddingTable,
    cooc_objective,
    cooc_step,
    draw_excluding,
    margin_objective,
    margin_step,
)
from .graph import CoocGraph, NoiseDistribution
from .patterns import (
    DEFAULT_HASH_DIMS,
    DEFAULT_MAX_PATH_LEN,
    PatternClassifier,
    TrainingPatterns,
    pattern_apply,
    pattern_objective,
)

log = logging.getLogger("syndisc.train")


class TrainerError(ValueError):
    pass


class TrainDivergedError(RuntimeError):
    pass


class CheckpointError(ValueError):
    pass


@dataclass
class TrainConfig:
    iterations: int = 1_000_000
    dim: int = 100
    learning_rate: float = 0.01
    negatives: int = 5
    window: int = 5
    ngram_max: int = 3
    min_count: int = 10
    max_path_len: int = DEFAULT_MAX_PATH_LEN
    hash_dims: int = DEFAULT_HASH_DIMS
    pattern_weight: float = 0.1  # weight of the pattern vote at ranking time
    shortlist_size: int = 100
    seed: int = 1
    threads: int = 1
    use_patterns: bool = True
    part_rates: tuple[int, int, int] = (1, 1, 1)  # steps per iteration per part
    nan_check_every: int = 10_000
    log_every: int = 0  # 0 disables progress lines
    collect_objectives: bool = False

    def __post_init__(self):
        self.part_rates = tuple(self.part_rates)
        if self.iterations < 0:
            raise TrainerError("iterations must be >= 0")
        if self.threads < 1:
            raise TrainerError("threads must be >= 1")


@dataclass
class Model:
    table: EmbeddingTable
    weights: BilinearWeights
    classifier: PatternClassifier
    vocab_hash: str
    config: TrainConfig
    objective_trace: np.ndarray | None = field(default=None, repr=False)

    def copy(self) -> "Model":
        return Model(self.table.copy(), self.weights.copy(), self.classifier.copy(),
                     self.vocab_hash, self.config, self.objective_trace)


def init_model(n_senses: int, vocab_hash: str, cfg: TrainConfig,
               rng: np.random.Generator) -> Model:
    table = EmbeddingTable.init(n_senses, cfg.dim, rng)
    weights = BilinearWeights.init(cfg.dim)
    clf = PatternClassifier.init(cfg.dim, cfg.hash_dims, cfg.ngram_max)
    return Model(table, weights, clf, vocab_hash, cfg)


def draw_index(rng: np.random.Generator, n: int) -> int:
    """Index draw used for seed pairs and patterns: one uniform, scaled."""
    i = int(rng.random() * n)
    return n - 1 if i >= n else i


def _check_nan(model: Model, step: int) -> None:
    for name, arr in (("x", model.table.x), ("c", model.table.c),
                      ("bilinear", model.weights.w), ("classifier", model.classifier.w)):
        if np.isnan(arr).any():
            raise TrainDivergedError(f"NaN detected in {name} at step {step}")


def _forbidden_sets(seeds) -> dict[int, frozenset[int]]:
    partners = seeds.partner_map()
    return {u: frozenset({u}) | p for u, p in partners.items()}


def train(
    graph: CoocGraph,
    seeds,
    pats: TrainingPatterns | None,
    cfg: TrainConfig,
    vocab_hash: str = "",
    progress: Callable[[int, dict], None] | None = None,
) -> Model:
    """Run cfg.iterations alternating steps and return the trained model.

    With iterations == 0 the returned model is exactly the seeded
    initialization.  Raises TrainDivergedError naming the step index if any
    parameter turns NaN.
    """
    if graph.n_edges == 0:
        raise TrainerError("co-occurrence graph has no edges")
    pairs = seeds.pair_list()
    if not pairs:
        raise TrainerError("seed set has no synonym pairs")
    if cfg.use_patterns and (pats is None or len(pats) == 0):
        raise TrainerError("no training patterns; disable the pattern part to train without them")
    if cfg.use_patterns and pats.dim != cfg.dim:
        raise TrainerError(f"training patterns were featurized for dim={pats.dim}, config has dim={cfg.dim}")

    rng = np.random.default_rng(cfg.seed)
    model = init_model(graph.n_senses, vocab_hash, cfg, rng)
    noise = NoiseDistribution.from_graph(graph)
    forbidden = _forbidden_sets(seeds)
    entries = pats.entries if cfg.use_patterns else []

    trace = None
    if cfg.collect_objectives:
        if cfg.threads > 1:
            raise TrainerError("objective traces require single-threaded training")
        trace = np.zeros((cfg.iterations, 3))

    if cfg.threads == 1:
        _run_span(model, graph, noise, pairs, forbidden, entries, cfg, rng,
                  0, cfg.iterations, trace, progress)
    else:
        streams = [np.random.default_rng(s)
                   for s in np.random.SeedSequence(cfg.seed).spawn(cfg.threads)]
        bounds = np.linspace(0, cfg.iterations, cfg.threads + 1).astype(int)
        workers = []
        errors: list[BaseException] = []

        def work(t):
            try:
                _run_span(model, graph, noise, pairs, forbidden, entries, cfg,
                          streams[t], bounds[t], bounds[t + 1], None,
                          progress if t == 0 else None)
            except BaseException as e:  # surfaced after join
                errors.append(e)

        for t in range(cfg.threads):
            th = threading.Thread(target=work, args=(t,))
            th.start()
            workers.append(th)
        for th in workers:
            th.join()
        if errors:
            raise errors[0]

    _check_nan(model, cfg.iterations)
    model.objective_trace = trace
    return model


def _run_span(model, graph, noise, pairs, forbidden, entries, cfg, rng,
              start, stop, trace, progress):
    table, weights, clf = model.table, model.weights, model.classifier
    lr = cfg.learning_rate
    r_cooc, r_margin, r_pattern = cfg.part_rates
    n_pairs = len(pairs)
    n_entries = len(entries)
    acc = np.zeros(3)
    acc_n = 0
    for step in range(start, stop):
        o_cooc = o_margin = o_pat = 0.0
        for _ in range(r_cooc):
            edge = graph.sample_edge(rng)
            o_cooc = cooc_step(table, edge, noise, cfg.negatives, lr, rng)
        for _ in range(r_margin):
            a, b = pairs[draw_index(rng, n_pairs)]
            if rng.random() < 0.5:
                u, v = a, b
            else:
                u, v = b, a
            o_margin = margin_step(table, weights, u, v, forbidden[u], lr, rng)
        if n_entries:
            for _ in range(r_pattern):
                e = entries[draw_index(rng, n_entries)]
                o_pat = pattern_apply(clf, table, e.feats, e.label, lr)
        if trace is not None:
            trace[step, 0] = o_cooc
            trace[step, 1] = o_margin
            trace[step, 2] = o_pat
        if cfg.nan_check_every and (step + 1) % cfg.nan_check_every == 0:
            _check_nan(model, step)
        if cfg.log_every or progress:
            acc += (o_cooc, o_margin, o_pat)
            acc_n += 1
            if cfg.log_every and (step + 1) % cfg.log_every == 0:
                means = acc / max(acc_n, 1)
                log.info(
                    "step=%d cooc=%.5f margin=%.5f pattern=%.5f "
                    "norm_x=%.4f norm_c=%.4f norm_w=%.4f norm_clf=%.4f nan=ok",
                    step + 1, means[0], means[1], means[2],
                    np.linalg.norm(table.x), np.linalg.norm(table.c),
                    np.linalg.norm(weights.w), np.linalg.norm(clf.w))
                if progress:
                    progress(step + 1, {"cooc": means[0], "margin": means[1], "pattern": means[2]})
                acc[:] = 0
                acc_n = 0


def estimate_objectives(
    model: Model,
    graph: CoocGraph,
    seeds,
    pats: TrainingPatterns | None,
    n_samples: int = 256,
    seed: int = 12345,
) -> dict[str, float]:
    """Mean per-part objectives on a frozen sample set; mutates nothing.

    The same seed draws the same evaluation set, so values are comparable
    across checkpoints of one run.
    """
    rng = np.random.default_rng(seed)
    noise = NoiseDistribution.from_graph(graph)
    pairs = seeds.pair_list()
    forbidden = _forbidden_sets(seeds)
    cfg = model.config

    cooc_total = 0.0
    for _ in range(n_samples):
        u, v = graph.sample_edge(rng)
        negs = np.array([noise.sample(rng) for _ in range(cfg.negatives)], dtype=np.int64)
        cooc_total += cooc_objective(model.table, u, v, negs)

    margin_total = 0.0
    for _ in range(n_samples):
        a, b = pairs[draw_index(rng, len(pairs))]
        u, v = (a, b) if rng.random() < 0.5 else (b, a)
        vneg = draw_excluding(model.table.n_senses, forbidden[u], rng)
        margin_total += margin_objective(model.table, model.weights, u, v, vneg)

    pat_total = 0.0
    have_pats = cfg.use_patterns and pats is not None and len(pats) > 0
    if have_pats:
        for _ in range(n_samples):
            e = pats.entries[draw_index(rng, len(pats.entries))]
            pat_total += pattern_objective(model.classifier, model.table, e.feats, e.label)

    out = {
        "cooc": cooc_total / n_samples,
        "margin": margin_total / n_samples,
        "pattern": pat_total / n_samples if have_pats else 0.0,
    }
    out["total"] = out["cooc"] + out["margin"] + out["pattern"]
    return out


# ---------------------------------------------------------------- checkpoints

CHECKPOINT_VERSION = 1


def save_model(path: str, model: Model) -> None:
    cfg = asdict(model.config)
    with open(path, "wb") as fh:
        _write_checkpoint(fh, model, cfg)


def _write_checkpoint(fh, model: Model, cfg: dict) -> None:
    np.savez(
        fh,
        version=np.array([CHECKPOINT_VERSION]),
        vocab_hash=np.array(model.vocab_hash),
        x=model.table.x,
        c=model.table.c,
        bilinear=model.weights.w,
        classifier=model.classifier.w,
        clf_meta=np.array([model.classifier.dim, model.classifier.hash_dims,
                           model.classifier.ngram_max]),
        config=np.array(json.dumps(cfg)),
    )


def load_model(path: str, expected_vocab_hash: str | None = None) -> Model:
    try:
        blob = np.load(path, allow_pickle=False)
    except (zipfile.BadZipFile, OSError, ValueError) as e:
        raise CheckpointError(f"{path}: unreadable checkpoint ({e})") from None
    try:
        required = ["version", "vocab_hash", "x", "c", "bilinear", "classifier",
                    "clf_meta", "config"]
        missing = [k for k in required if k not in blob]
        if missing:
            raise CheckpointError(f"{path}: checkpoint missing fields {missing}")
        if int(blob["version"][0]) != CHECKPOINT_VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version")
        vocab_hash = str(blob["vocab_hash"])
        if expected_vocab_hash is not None and vocab_hash != expected_vocab_hash:
            raise CheckpointError(
                f"{path}: checkpoint was trained on a different vocabulary "
                f"(hash {vocab_hash}, expected {expected_vocab_hash})")
        cfg_dict = json.loads(str(blob["config"]))
        cfg = TrainConfig(**cfg_dict)
        dim, hash_dims, ngram_max = (int(i) for i in blob["clf_meta"])
        table = EmbeddingTable(blob["x"].copy(), blob["c"].copy())
        weights = BilinearWeights(blob["bilinear"].copy())
        clf = PatternClassifier(blob["classifier"].copy(), dim, hash_dims, ngram_max)
        return Model(table, weights, clf, vocab_hash, cfg)
    finally:
        blob.close()
