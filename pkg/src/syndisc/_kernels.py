"""Jitted inner-loop updates shared by the step functions and the trainer.

All kernels mutate parameter arrays in place by +lr * gradient and return the
sampled objective value.  Gradient contributions are computed from snapshots
taken before any write, so repeated row indices (a noise draw hitting u or v)
still produce the exact gradient of the sampled objective at the original
point.  Logits are clamped to +-30 before the sigmoid; no exp overflow, no
NaN.
"""

import math

import numpy as np
from numba import njit

LOGIT_CLAMP = 30.0


@njit(cache=True, nogil=True, inline="always")
def _clamp(z):
    if z > LOGIT_CLAMP:
        return LOGIT_CLAMP
    if z < -LOGIT_CLAMP:
        return -LOGIT_CLAMP
    return z


@njit(cache=True, nogil=True, inline="always")
def sigmoid(z):
    return 1.0 / (1.0 + math.exp(-_clamp(z)))


@njit(cache=True, nogil=True, inline="always")
def log_sigmoid(z):
    z = _clamp(z)
    if z >= 0.0:
        return -math.log1p(math.exp(-z))
    return z - math.log1p(math.exp(z))


@njit(cache=True, nogil=True)
def cooc_update(x, c, u, v, negs, lr):
    """One co-occurrence step for the sampled edge (u, v) plus noise rows.

    Ascends log sig(x_u . (x_v + c_v)) + sum_n log sig(-x_n . (x_v + c_v)).
    Touches x[u], x[v], c[v], and x[n] for each noise row n.
    """
    d = x.shape[1]
    sv = np.empty(d)
    xu = np.empty(d)
    for k in range(d):
        sv[k] = x[v, k] + c[v, k]
        xu[k] = x[u, k]
    s = 0.0
    for k in range(d):
        s += xu[k] * sv[k]
    obj = log_sigmoid(s)
    gpos = 1.0 - sigmoid(s)

    nneg = negs.shape[0]
    xn = np.empty((nneg, d))
    gneg = np.empty(nneg)
    for n in range(nneg):
        row = negs[n]
        sn = 0.0
        for k in range(d):
            xn[n, k] = x[row, k]
            sn += xn[n, k] * sv[k]
        obj += log_sigmoid(-sn)
        gneg[n] = -sigmoid(sn)

    for k in range(d):
        x[u, k] += lr * gpos * sv[k]
        x[v, k] += lr * gpos * xu[k]
        c[v, k] += lr * gpos * xu[k]
    for n in range(nneg):
        row = negs[n]
        g = gneg[n]
        for k in range(d):
            x[row, k] += lr * g * sv[k]
            x[v, k] += lr * g * xn[n, k]
            c[v, k] += lr * g * xn[n, k]
    return obj


@njit(cache=True, nogil=True)
def margin_update(x, w, u, v, vneg, lr):
    """One ranking step: ascend min(1, score(u,v) - score(u,vneg)).

    The margin cap treats the boundary as capped: no update when the score
    difference is >= 1.  Touches x[u], x[v], x[vneg], and w otherwise.
    """
    d = x.shape[1]
    s_pos = 0.0
    s_neg = 0.0
    for k in range(d):
        s_pos += (x[u, k] * x[v, k]) * w[k]
        s_neg += (x[u, k] * x[vneg, k]) * w[k]
    diff = s_pos - s_neg
    if diff >= 1.0:
        return 1.0

    xu = np.empty(d)
    dv = np.empty(d)  # x[v] - x[vneg]
    ws = np.empty(d)
    for k in range(d):
        xu[k] = x[u, k]
        dv[k] = x[v, k] - x[vneg, k]
        ws[k] = w[k]
    for k in range(d):
        x[u, k] += lr * ws[k] * dv[k]
        x[v, k] += lr * ws[k] * xu[k]
        x[vneg, k] -= lr * ws[k] * xu[k]
        w[k] += lr * xu[k] * dv[k]
    return diff


@njit(cache=True, nogil=True)
def pattern_update(wp, x, lex_rows, syn_idx, label, lr):
    """One classifier step on a featurized pattern.

    wp layout: [0, d) lexical weights, [d, size-1) hashed syntactic weights,
    last entry bias.  syn_idx holds unique absolute indices into the hashed
    region.  The lexical feature is the mean of x rows in lex_rows, so each
    listed row receives wp_lex * g / len(lex_rows); a row listed twice gets a
    double share.
    """
    d = x.shape[1]
    size = wp.shape[0]
    n_lex = lex_rows.shape[0]
    lex = np.zeros(d)
    if n_lex > 0:
        for i in range(n_lex):
            r = lex_rows[i]
            for k in range(d):
                lex[k] += x[r, k]
        for k in range(d):
            lex[k] /= n_lex

    z = wp[size - 1]
    for k in range(d):
        z += wp[k] * lex[k]
    for i in range(syn_idx.shape[0]):
        z += wp[syn_idx[i]]

    p = sigmoid(z)
    if label == 1:
        obj = log_sigmoid(z)
        g = 1.0 - p
    else:
        obj = log_sigmoid(-z)
        g = -p

    wlex = np.empty(d)
    for k in range(d):
        wlex[k] = wp[k]
    for k in range(d):
        wp[k] += lr * g * lex[k]
    for i in range(syn_idx.shape[0]):
        wp[syn_idx[i]] += lr * g
    wp[size - 1] += lr * g
    if n_lex > 0:
        coef = lr * g / n_lex
        for i in range(n_lex):
            r = lex_rows[i]
            for k in range(d):
                x[r, k] += coef * wlex[k]
    return obj
