"""On-disk bundle tying together everything the build step derives.

A bundle directory holds the vocabulary, co-occurrence graph, seed splits,
pattern index, labeled training patterns, and a build.json describing the
configuration that produced them.  manifest.json lists the sha256 of every
file so later stages can refuse silently-edited inputs.  Nothing in the
bundle carries a timestamp: byte-identical inputs give byte-identical
bundles.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

from .corpus import Vocabulary
from .graph import CoocGraph
from .patterns import PairIndex, TrainingPatterns, load_training_patterns
from .seeds import SeedSet, load_seeds
from .train import TrainConfig

BUILD_FILE = "build.json"
MANIFEST_FILE = "manifest.json"
ARTIFACT_FILES = (
    "vocab.jsonl",
    "graph.txt",
    "seeds.json",
    "patterns.jsonl",
    "train_patterns.json",
    BUILD_FILE,
)


class ArtifactError(ValueError):
    pass


def sha256_of(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(dirpath: str) -> None:
    files = {name: sha256_of(os.path.join(dirpath, name)) for name in ARTIFACT_FILES}
    with open(os.path.join(dirpath, MANIFEST_FILE), "w", encoding="utf-8") as fh:
        json.dump({"version": 1, "files": files}, fh, indent=1, sort_keys=True)
        fh.write("\n")


def verify_manifest(dirpath: str) -> None:
    """Raise naming every artifact file that is missing or was modified."""
    mpath = os.path.join(dirpath, MANIFEST_FILE)
    if not os.path.exists(mpath):
        raise ArtifactError(f"{dirpath}: no {MANIFEST_FILE}; not a bundle directory?")
    with open(mpath, encoding="utf-8") as fh:
        manifest = json.load(fh)
    bad = []
    for name, digest in sorted(manifest.get("files", {}).items()):
        fpath = os.path.join(dirpath, name)
        if not os.path.exists(fpath):
            bad.append(f"{name} (missing)")
        elif sha256_of(fpath) != digest:
            bad.append(f"{name} (checksum mismatch)")
    if bad:
        raise ArtifactError(f"{dirpath}: artifact files changed since build: "
                            + ", ".join(bad))


@dataclass
class Artifacts:
    vocab: Vocabulary
    graph: CoocGraph
    seeds_train: SeedSet
    seeds_warm: SeedSet
    seeds_cold: SeedSet
    index: PairIndex
    train_patterns: TrainingPatterns
    config: TrainConfig
    build_info: dict

    @property
    def vocab_hash(self) -> str:
        return self.vocab.content_hash()


def write_build_info(dirpath: str, config: TrainConfig, counts: dict,
                     collapse_positions: bool, warm_frac: float,
                     cold_frac: float) -> None:
    blob = {
        "version": 1,
        "config": config.__dict__ | {"part_rates": list(config.part_rates)},
        "collapse_positions": collapse_positions,
        "warm_frac": warm_frac,
        "cold_frac": cold_frac,
        "counts": counts,
    }
    with open(os.path.join(dirpath, BUILD_FILE), "w", encoding="utf-8") as fh:
        json.dump(blob, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_artifacts(dirpath: str, verify: bool = True) -> Artifacts:
    if verify:
        verify_manifest(dirpath)
    jp = os.path.join
    with open(jp(dirpath, BUILD_FILE), encoding="utf-8") as fh:
        build_info = json.load(fh)
    if build_info.get("version") != 1:
        raise ArtifactError(f"{dirpath}: unsupported bundle version")
    config = TrainConfig(**build_info["config"])
    vocab = Vocabulary.load(jp(dirpath, "vocab.jsonl"))
    graph = CoocGraph.load(jp(dirpath, "graph.txt"))
    seeds_train, seeds_warm, seeds_cold = load_seeds(jp(dirpath, "seeds.json"))
    index = PairIndex.load(jp(dirpath, "patterns.jsonl"))
    train_patterns = load_training_patterns(jp(dirpath, "train_patterns.json"),
                                            index, vocab)
    return Artifacts(vocab, graph, seeds_train, seeds_warm, seeds_cold, index,
                     train_patterns, config, build_info)
