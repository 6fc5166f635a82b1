"""NumPy implementations of the reduction kernels.

Used when the compiled extension is unavailable, and as the reference the
compiled kernels are tested against.
"""

from __future__ import annotations

import numpy as np


def pairwise_distances(X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    diff = X[:, None, :] - X[None, :, :]
    D = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(D, 0.0)
    return D


def backward_reduce(D: np.ndarray, probs: np.ndarray, target: int):
    """Greedy removal down to ``target`` survivors.

    Returns ``(alive, probs, removed, absorbed, pd)``; ties in both the
    neighbour search and the removal choice go to the lowest index.
    """
    n = D.shape[0]
    p = np.array(probs, dtype=np.float64)
    alive = np.ones(n, dtype=bool)
    masked = np.array(D, dtype=np.float64)
    np.fill_diagonal(masked, np.inf)
    n_iter = n - target
    removed = np.empty(n_iter, dtype=np.int64)
    absorbed = np.empty(n_iter, dtype=np.int64)
    pd = np.empty(n_iter, dtype=np.float64)
    idx = np.arange(n)
    for it in range(n_iter):
        live = idx[alive]
        sub = masked[np.ix_(live, live)]
        nn_local = np.argmin(sub, axis=1)
        dist = sub[np.arange(live.size), nn_local]
        score = p[live] * dist
        k = int(np.argmin(score))
        i, j = int(live[k]), int(live[nn_local[k]])
        removed[it], absorbed[it], pd[it] = i, j, score[k]
        p[j] += p[i]
        p[i] = 0.0
        alive[i] = False
    return alive, p, removed, absorbed, pd


def kmeans_assign(X: np.ndarray, C: np.ndarray):
    """Nearest-centroid labels (lowest index on ties) and the WCSS."""
    d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels.astype(np.int64), float(d2[np.arange(X.shape[0]), labels].sum())
