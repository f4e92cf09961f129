"""Trainer tests: replay oracle, determinism, divergence sentinel, checkpoints.

The fixtures fabricate the graph / seed / pattern inputs directly instead of
going through a corpus, so each test isolates the training loop itself.
"""

import json

import numpy as np
import pytest

from syndisc.embedding import (
    BilinearWeights,
    EmbeddingTable,
    cooc_step,
    margin_step,
)
from syndisc.graph import CoocGraph, NoiseDistribution
from syndisc.patterns import (
    LabeledPattern,
    PatternClassifier,
    PatternFeatures,
    TrainingPatterns,
    pattern_apply,
)
from syndisc.seeds import SeedSet
from syndisc.train import (
    CheckpointError,
    Model,
    TrainConfig,
    TrainDivergedError,
    TrainerError,
    draw_index,
    estimate_objectives,
    init_model,
    load_model,
    save_model,
    train,
)

DIM = 8
HASH_DIMS = 1 << 10  # tiny hashed space keeps fabricated features readable


def tiny_world(n_senses=30, rng_seed=7, n_entries=12):
    rng = np.random.default_rng(rng_seed)
    weights = {}
    for u in range(n_senses):
        for v in range(u + 1, n_senses):
            if rng.random() < 0.3:
                weights[(u, v)] = float(rng.integers(1, 5))
    graph = CoocGraph(n_senses, window=5, weights=weights)
    seeds = SeedSet.build({"E1": {0, 1, 2}, "E2": {3, 4}, "E3": {5, 6}})
    entries = []
    for i in range(n_entries):
        lex = rng.integers(0, n_senses, size=int(rng.integers(0, 3))).astype(np.int64)
        n_syn = int(rng.integers(1, 5))
        syn = rng.choice(np.arange(DIM, DIM + HASH_DIMS, dtype=np.int64),
                         size=n_syn, replace=False)
        entries.append(LabeledPattern(i, i % 2, PatternFeatures(lex, np.sort(syn))))
    pats = TrainingPatterns(entries, n_entries // 2, n_entries - n_entries // 2,
                            DIM, 3, HASH_DIMS)
    return graph, seeds, pats


def config(**kw):
    base = dict(iterations=1, dim=DIM, hash_dims=HASH_DIMS, negatives=3, seed=41)
    base.update(kw)
    return TrainConfig(**base)


def assert_models_equal(a: Model, b: Model):
    assert np.array_equal(a.table.x, b.table.x)
    assert np.array_equal(a.table.c, b.table.c)
    assert np.array_equal(a.weights.w, b.weights.w)
    assert np.array_equal(a.classifier.w, b.classifier.w)


def test_zero_iterations_returns_seeded_init():
    graph, seeds, pats = tiny_world()
    model = train(graph, seeds, pats, config(iterations=0), vocab_hash="vh")
    expected = init_model(graph.n_senses, "vh", config(iterations=0),
                          np.random.default_rng(41))
    assert_models_equal(model, expected)
    assert model.vocab_hash == "vh"


def test_single_iteration_matches_manual_replay():
    graph, seeds, pats = tiny_world()
    cfg = config(iterations=1)
    model = train(graph, seeds, pats, cfg, vocab_hash="vh")

    # replay the documented draw order with the public step functions
    rng = np.random.default_rng(cfg.seed)
    table = EmbeddingTable.init(graph.n_senses, DIM, rng)
    weights = BilinearWeights.init(DIM)
    clf = PatternClassifier.init(DIM, HASH_DIMS, cfg.ngram_max)
    noise = NoiseDistribution.from_graph(graph)

    edge = graph.sample_edge(rng)
    cooc_step(table, edge, noise, cfg.negatives, cfg.learning_rate, rng)

    pairs = seeds.pair_list()
    partners = seeds.partner_map()
    a, b = pairs[draw_index(rng, len(pairs))]
    u, v = (a, b) if rng.random() < 0.5 else (b, a)
    margin_step(table, weights, u, v, frozenset({u}) | partners[u],
                cfg.learning_rate, rng)

    e = pats.entries[draw_index(rng, len(pats.entries))]
    pattern_apply(clf, table, e.feats, e.label, cfg.learning_rate)

    assert np.array_equal(model.table.x, table.x)
    assert np.array_equal(model.table.c, table.c)
    assert np.array_equal(model.weights.w, weights.w)
    assert np.array_equal(model.classifier.w, clf.w)


def test_training_is_deterministic_per_seed():
    graph, seeds, pats = tiny_world()
    m1 = train(graph, seeds, pats, config(iterations=400), vocab_hash="vh")
    m2 = train(graph, seeds, pats, config(iterations=400), vocab_hash="vh")
    assert_models_equal(m1, m2)
    m3 = train(graph, seeds, pats, config(iterations=400, seed=42), vocab_hash="vh")
    assert not np.array_equal(m1.table.x, m3.table.x)


def test_training_leaves_inputs_untouched():
    graph, seeds, pats = tiny_world()
    edge_w_before = graph.edge_w.copy()
    feats_before = [(e.feats.lex_rows.copy(), e.feats.syn_idx.copy())
                    for e in pats.entries]
    pairs_before = seeds.pair_list()
    train(graph, seeds, pats, config(iterations=300), vocab_hash="vh")
    assert np.array_equal(graph.edge_w, edge_w_before)
    assert seeds.pair_list() == pairs_before
    for e, (lex, syn) in zip(pats.entries, feats_before):
        assert np.array_equal(e.feats.lex_rows, lex)
        assert np.array_equal(e.feats.syn_idx, syn)


def test_pattern_part_disabled_leaves_classifier_at_zero():
    graph, seeds, _ = tiny_world()
    model = train(graph, seeds, None, config(iterations=300, use_patterns=False),
                  vocab_hash="vh")
    assert not model.classifier.w.any()
    init = init_model(graph.n_senses, "vh", config(), np.random.default_rng(41))
    assert not np.array_equal(model.table.x, init.table.x)
    assert not np.array_equal(model.weights.w, init.weights.w)


def test_part_rate_zero_skips_that_part():
    graph, seeds, pats = tiny_world()
    model = train(graph, seeds, pats,
                  config(iterations=300, part_rates=(1, 1, 0)), vocab_hash="vh")
    assert not model.classifier.w.any()


def test_nan_aborts_and_names_the_step():
    graph, seeds, pats = tiny_world()
    cfg = config(iterations=500, learning_rate=1e160, nan_check_every=1)
    with pytest.raises(TrainDivergedError, match=r"at step \d+"):
        train(graph, seeds, pats, cfg, vocab_hash="vh")


def test_objective_trace_shape_and_margin_cap():
    graph, seeds, pats = tiny_world()
    model = train(graph, seeds, pats,
                  config(iterations=250, collect_objectives=True), vocab_hash="vh")
    trace = model.objective_trace
    assert trace.shape == (250, 3)
    assert np.isfinite(trace).all()
    assert (trace[:, 1] <= 1.0 + 1e-12).all()  # ranking objective is capped
    assert (trace[:, 0] < 0).all()  # log-likelihood terms are negative


def test_frozen_estimate_improves_with_training():
    graph, seeds, pats = tiny_world()
    before_model = train(graph, seeds, pats, config(iterations=0), vocab_hash="vh")
    after_model = train(graph, seeds, pats,
                        config(iterations=4000, learning_rate=0.05), vocab_hash="vh")
    before = estimate_objectives(before_model, graph, seeds, pats)
    after = estimate_objectives(after_model, graph, seeds, pats)
    assert after["total"] > before["total"] + 0.1
    assert after["cooc"] > before["cooc"]
    assert after["margin"] > before["margin"]
    assert after["pattern"] > before["pattern"]


def test_estimate_is_frozen_and_does_not_mutate():
    graph, seeds, pats = tiny_world()
    model = train(graph, seeds, pats, config(iterations=100), vocab_hash="vh")
    x = model.table.x.copy()
    w = model.weights.w.copy()
    e1 = estimate_objectives(model, graph, seeds, pats, n_samples=64, seed=5)
    e2 = estimate_objectives(model, graph, seeds, pats, n_samples=64, seed=5)
    assert e1 == e2
    assert np.array_equal(model.table.x, x)
    assert np.array_equal(model.weights.w, w)


def test_threaded_run_finishes_finite():
    graph, seeds, pats = tiny_world()
    model = train(graph, seeds, pats, config(iterations=2000, threads=2),
                  vocab_hash="vh")
    for arr in (model.table.x, model.table.c, model.weights.w, model.classifier.w):
        assert np.isfinite(arr).all()
    assert model.classifier.w.any()
    with pytest.raises(TrainerError, match="single-threaded"):
        train(graph, seeds, pats,
              config(iterations=10, threads=2, collect_objectives=True),
              vocab_hash="vh")


def test_preconditions_are_checked():
    graph, seeds, pats = tiny_world()
    empty_graph = CoocGraph(graph.n_senses, window=5, weights={})
    with pytest.raises(TrainerError, match="no edges"):
        train(empty_graph, seeds, pats, config(), vocab_hash="vh")
    lonely = SeedSet.build({"E1": {0}, "E2": {3}})
    with pytest.raises(TrainerError, match="no synonym pairs"):
        train(graph, lonely, pats, config(), vocab_hash="vh")
    with pytest.raises(TrainerError, match="disable the pattern part"):
        train(graph, seeds, None, config(), vocab_hash="vh")
    with pytest.raises(TrainerError, match="dim"):
        bad = TrainingPatterns(pats.entries, pats.n_positive, pats.n_negative,
                               DIM + 1, 3, HASH_DIMS)
        train(graph, seeds, bad, config(), vocab_hash="vh")


def test_progress_log_lines(caplog):
    graph, seeds, pats = tiny_world()
    with caplog.at_level("INFO", logger="syndisc.train"):
        train(graph, seeds, pats, config(iterations=100, log_every=50),
              vocab_hash="vh")
    assert "step=100" in caplog.text
    assert "nan=ok" in caplog.text


def test_checkpoint_roundtrip(tmp_path):
    graph, seeds, pats = tiny_world()
    model = train(graph, seeds, pats, config(iterations=120), vocab_hash="vh-1")
    path = tmp_path / "model.ckpt"
    save_model(path, model)
    loaded = load_model(path, expected_vocab_hash="vh-1")
    assert_models_equal(model, loaded)
    assert loaded.vocab_hash == "vh-1"
    assert loaded.config == model.config
    assert loaded.classifier.hash_dims == HASH_DIMS


def test_checkpoint_rejects_other_vocabulary(tmp_path):
    graph, seeds, pats = tiny_world()
    model = train(graph, seeds, pats, config(iterations=10), vocab_hash="vh-1")
    path = tmp_path / "model.ckpt"
    save_model(path, model)
    with pytest.raises(CheckpointError) as err:
        load_model(path, expected_vocab_hash="vh-2")
    assert "vh-1" in str(err.value) and "vh-2" in str(err.value)
    # no expectation given -> loads fine
    assert load_model(path).vocab_hash == "vh-1"


def test_checkpoint_truncation_and_missing_fields(tmp_path):
    graph, seeds, pats = tiny_world()
    model = train(graph, seeds, pats, config(iterations=10), vocab_hash="vh")
    path = tmp_path / "model.ckpt"
    save_model(path, model)
    raw = path.read_bytes()
    clipped = tmp_path / "clipped.ckpt"
    clipped.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(CheckpointError, match="unreadable"):
        load_model(clipped)
    sparse = tmp_path / "sparse.npz"
    np.savez(sparse, version=np.array([1]), x=model.table.x)
    with pytest.raises(CheckpointError, match="missing"):
        load_model(sparse)
    wrongver = tmp_path / "wrongver.ckpt"
    save_model(wrongver, model)
    # rewrite with a bumped version stamp
    blob = dict(np.load(wrongver))
    blob["version"] = np.array([99])
    with open(wrongver, "wb") as fh:
        np.savez(fh, **blob)
    with pytest.raises(CheckpointError, match="version"):
        load_model(wrongver)


def test_config_roundtrips_through_json():
    cfg = config(iterations=77, part_rates=[2, 1, 1])
    again = TrainConfig(**json.loads(json.dumps(cfg.__dict__)))
    assert again == cfg
    assert again.part_rates == (2, 1, 1)
