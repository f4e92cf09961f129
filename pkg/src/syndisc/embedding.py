"""Distributional module: string embeddings and the bilinear synonym scorer.

Each sense owns a target vector x and a context vector c.  Co-occurrence
likelihood uses the asymmetric logit x_u . x_v + x_u . c_v, so two senses can
agree because they look alike (x . x) or because one habitually appears in
the other's context (x . c).  The synonym score is a diagonal bilinear form
over target vectors, trained with a margin-capped ranking objective against
sampled non-synonyms.

The *_objective functions are slow plain-numpy twins of the jitted update
kernels; they exist for finite-difference checks and progress estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import NoiseDistribution

LOGIT_CLAMP = _kernels.LOGIT_CLAMP


class SamplingError(RuntimeError):
    pass


def log_sigmoid(z: float) -> float:
    z = float(np.clip(z, -LOGIT_CLAMP, LOGIT_CLAMP))
    if z >= 0:
        return -np.log1p(np.exp(-z))
    return z - np.log1p(np.exp(z))


@dataclass
class EmbeddingTable:
    x: np.ndarray  # (n_senses, dim) target vectors
    c: np.ndarray  # (n_senses, dim) context vectors

    @property
    def n_senses(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @classmethod
    def init(cls, n_senses: int, dim: int, rng: np.random.Generator) -> "EmbeddingTable":
        # x uniform in [-0.5/dim, 0.5/dim), c at the origin
        x = (rng.random((n_senses, dim)) - 0.5) / dim
        return cls(x=x, c=np.zeros((n_senses, dim)))

    def copy(self) -> "EmbeddingTable":
        return EmbeddingTable(self.x.copy(), self.c.copy())


@dataclass
class BilinearWeights:
    w: np.ndarray  # (dim,) diagonal of the bilinear form

    @classmethod
    def init(cls, dim: int) -> "BilinearWeights":
        return cls(np.ones(dim))

    def copy(self) -> "BilinearWeights":
        return BilinearWeights(self.w.copy())


def softmax_prob(table: EmbeddingTable, v: int) -> np.ndarray:
    """p(u | v) over the whole vocabulary, max-shifted for stability.

    Reference implementation; training never materializes this.
    """
    scores = table.x @ (table.x[v] + table.c[v])
    scores -= scores.max()
    e = np.exp(scores)
    return e / e.sum()


# ---------------------------------------------------------------- co-occurrence

def cooc_objective(table: EmbeddingTable, u: int, v: int, negs: np.ndarray) -> float:
    sv = table.x[v] + table.c[v]
    obj = log_sigmoid(float(table.x[u] @ sv))
    for n in negs:
        obj += log_sigmoid(-float(table.x[n] @ sv))
    return obj


def cooc_apply(table: EmbeddingTable, u: int, v: int, negs: np.ndarray, lr: float) -> float:
    """Ascend the sampled co-occurrence objective; returns its value."""
    return _kernels.cooc_update(table.x, table.c, u, v,
                                np.asarray(negs, dtype=np.int64), lr)


def cooc_step(
    table: EmbeddingTable,
    edge: tuple[int, int],
    noise: NoiseDistribution,
    n_negatives: int,
    lr: float,
    rng: np.random.Generator,
) -> float:
    """Draw n_negatives noise senses and apply one co-occurrence update.

    Draw order: the noise samples are taken left to right, two uniforms each.
    """
    u, v = edge
    negs = np.empty(n_negatives, dtype=np.int64)
    for i in range(n_negatives):
        negs[i] = noise.sample(rng)
    return _kernels.cooc_update(table.x, table.c, u, v, negs, lr)


# ------------------------------------------------------------------- bilinear

def bilinear_score(table: EmbeddingTable, weights: BilinearWeights, u: int, v: int) -> float:
    """sum_k x_u[k] * x_v[k] * w[k]; exactly symmetric in u and v."""
    return float((table.x[u] * table.x[v]) @ weights.w)


def margin_objective(table: EmbeddingTable, weights: BilinearWeights,
                     u: int, v: int, vneg: int) -> float:
    diff = bilinear_score(table, weights, u, v) - bilinear_score(table, weights, u, vneg)
    return min(1.0, diff)


def margin_apply(table: EmbeddingTable, weights: BilinearWeights,
                 u: int, v: int, vneg: int, lr: float) -> float:
    return _kernels.margin_update(table.x, weights.w, u, v, vneg, lr)


def draw_excluding(n_senses: int, forbidden, rng: np.random.Generator,
                   max_tries: int = 10_000) -> int:
    """Uniform sense draw rejecting forbidden ids; one uniform per attempt."""
    for _ in range(max_tries):
        cand = int(rng.random() * n_senses)
        if cand >= n_senses:
            cand = n_senses - 1
        if cand not in forbidden:
            return cand
    raise SamplingError(f"could not draw a negative outside {len(forbidden)} forbidden senses")


def margin_step(
    table: EmbeddingTable,
    weights: BilinearWeights,
    u: int,
    v: int,
    forbidden,
    lr: float,
    rng: np.random.Generator,
) -> float:
    """Sample a non-synonym v' for u and apply one ranking update.

    forbidden must contain u itself and every known synonym of u, so the
    drawn v' can never be a seed partner (v included).
    """
    vneg = draw_excluding(table.n_senses, forbidden, rng)
    return _kernels.margin_update(table.x, weights.w, u, v, vneg, lr)
