"""String co-occurrence graph built from sliding windows over sentence units.

Window distance is measured over mention-collapsed unit positions by default,
so a long mention and its neighbor are adjacent.  Out-of-vocabulary units are
dropped before windowing and occupy no position.  Edges are undirected with
raw co-occurrence counts as weights; sampling uses alias tables, one table
for edges and one for the degree-based noise distribution.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .corpus import Sentence, Vocabulary


class GraphError(ValueError):
    pass


class AliasTable:
    """O(1) sampling from a fixed discrete distribution (Vose's method).

    Each draw consumes exactly two uniforms from the generator: one to pick a
    bucket, one to choose between the bucket's resident and its alias.
    """

    def __init__(self, weights: np.ndarray):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise GraphError("alias table needs a non-empty 1-d weight array")
        if np.any(w < 0):
            raise GraphError("alias table weights must be non-negative")
        total = w.sum()
        if total <= 0:
            raise GraphError("alias table weights sum to zero")
        n = w.size
        self.n = n
        self.prob = np.zeros(n)
        self.alias = np.zeros(n, dtype=np.int64)
        scaled = w * (n / total)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            l = large.pop()
            self.prob[s] = scaled[s]
            self.alias[s] = l
            scaled[l] = (scaled[l] + scaled[s]) - 1.0
            if scaled[l] < 1.0:
                small.append(l)
            else:
                large.append(l)
        for i in large:
            self.prob[i] = 1.0
        for i in small:
            self.prob[i] = 1.0  # numerical leftovers

    def sample(self, rng: np.random.Generator) -> int:
        bucket = int(rng.random() * self.n)
        if bucket >= self.n:  # guard the half-open interval edge
            bucket = self.n - 1
        if rng.random() < self.prob[bucket]:
            return bucket
        return int(self.alias[bucket])


class CoocGraph:
    """Symmetric co-occurrence edges with per-sense degrees."""

    def __init__(self, n_senses: int, window: int, weights: dict[tuple[int, int], float]):
        self.n_senses = n_senses
        self.window = window
        self._weights = dict(weights)
        items = sorted(self._weights.items())
        self.edge_u = np.array([u for (u, _), _ in items], dtype=np.int64)
        self.edge_v = np.array([v for (_, v), _ in items], dtype=np.int64)
        self.edge_w = np.array([w for _, w in items], dtype=np.float64)
        self.degrees = np.zeros(n_senses)
        for (u, v), w in items:
            self.degrees[u] += w
            self.degrees[v] += w
        self._alias: AliasTable | None = None

    @property
    def n_edges(self) -> int:
        return self.edge_w.size

    def weight(self, u: int, v: int) -> float:
        if u > v:
            u, v = v, u
        return self._weights.get((u, v), 0.0)

    def edge_dict(self) -> dict[tuple[int, int], float]:
        return dict(self._weights)

    def sample_edge(self, rng: np.random.Generator) -> tuple[int, int]:
        """Draw an edge with probability proportional to its weight.

        Orientation is uniform: three uniforms per draw (two for the alias
        table, one coin for the direction).
        """
        if self.n_edges == 0:
            raise GraphError("cannot sample from a graph with no edges")
        if self._alias is None:
            self._alias = AliasTable(self.edge_w)
        i = self._alias.sample(rng)
        u, v = int(self.edge_u[i]), int(self.edge_v[i])
        if rng.random() < 0.5:
            return u, v
        return v, u

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# coocgraph 1 senses={self.n_senses} window={self.window}\n")
            for (u, v), w in sorted(self._weights.items()):
                fh.write(f"{u} {v} {w:g}\n")

    @classmethod
    def load(cls, path: str) -> "CoocGraph":
        with open(path, encoding="utf-8") as fh:
            head = fh.readline().split()
            if head[:2] != ["#", "coocgraph"] or head[2] != "1":
                raise GraphError(f"{path}: not a coocgraph file")
            meta = dict(kv.split("=") for kv in head[3:])
            weights = {}
            for line in fh:
                u, v, w = line.split()
                weights[(int(u), int(v))] = float(w)
        return cls(int(meta["senses"]), int(meta["window"]), weights)


def build_graph(
    sentences: Iterable[Sentence],
    vocab: Vocabulary,
    window: int = 5,
    collapse_positions: bool = True,
) -> CoocGraph:
    """Count co-occurrences of in-vocabulary units within the window.

    With ``collapse_positions`` (the default) distance is the number of unit
    positions apart after dropping out-of-vocabulary units; otherwise distance
    is measured between the original start-token offsets.
    """
    if window < 1:
        raise GraphError(f"window must be >= 1, got {window}")
    weights: dict[tuple[int, int], float] = {}

    def bump(a: int, b: int) -> None:
        if a == b:
            return  # no self-edges
        key = (a, b) if a < b else (b, a)
        weights[key] = weights.get(key, 0.0) + 1.0

    for sent in sentences:
        if collapse_positions:
            ids = [sid for sid in (vocab.lookup_unit(u) for u in sent.units()) if sid is not None]
            for i in range(len(ids)):
                for j in range(i + 1, min(i + window + 1, len(ids))):
                    bump(ids[i], ids[j])
        else:
            placed = [(sid, u.start) for sid, u in
                      ((vocab.lookup_unit(u), u) for u in sent.units()) if sid is not None]
            for i in range(len(placed)):
                for j in range(i + 1, len(placed)):
                    if placed[j][1] - placed[i][1] <= window:
                        bump(placed[i][0], placed[j][0])
    return CoocGraph(len(vocab), window, weights)


class NoiseDistribution:
    """Negative-sampling distribution: mass proportional to degree^(3/4)."""

    def __init__(self, degrees: np.ndarray):
        d = np.asarray(degrees, dtype=np.float64)
        if d.size == 0 or not np.any(d > 0):
            raise GraphError("noise distribution needs at least one nonzero degree")
        self.mass = d ** 0.75
        self.probs = self.mass / self.mass.sum()
        self._alias = AliasTable(self.mass)

    @classmethod
    def from_graph(cls, graph: CoocGraph) -> "NoiseDistribution":
        return cls(graph.degrees)

    def sample(self, rng: np.random.Generator) -> int:
        return self._alias.sample(rng)
