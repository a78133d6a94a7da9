"""Shared helpers for the test suite: oracles and data generators."""

import numpy as np
import scipy.sparse as sp

from projforest.tree import variance_sum


def pattern_label_matrix(n, d, n_patterns, labels_per_row, rng):
    """Binary label rows drawn from a small pool of sparse patterns.

    Mimics real multi-label data, where a handful of label combinations
    repeats across samples.
    """
    gen = rng.generator
    pats = np.zeros((n_patterns, d))
    for c in range(n_patterns):
        pats[c, gen.choice(d, size=labels_per_row, replace=False)] = 1.0
    rows = pats[gen.integers(0, n_patterns, size=n)]
    return sp.csr_matrix(rows)


def brute_force_best_split(X, Y, samples, features):
    """Enumerate every feature and midpoint; score via impurity recomputation.

    Independent of the incremental scan: each candidate's gain comes from
    three full variance computations.  Returns (gain, feature, threshold),
    ties broken toward the lowest feature then threshold, or None.
    """
    samples = np.asarray(samples)
    q = samples.size
    parent = variance_sum(Y[samples])
    best = None
    for f in features:
        v = X[samples, f]
        vs = np.unique(v)
        for a, b in zip(vs[:-1], vs[1:]):
            thr = (a + b) / 2.0
            left = samples[v <= thr]
            right = samples[v > thr]
            gain = (
                parent
                - left.size / q * variance_sum(Y[left])
                - right.size / q * variance_sum(Y[right])
            )
            if best is None or gain > best[0]:
                best = (gain, int(f), float(thr))
    if best is None or best[0] <= 0:
        return None
    return best


def node_memberships(tree, X):
    """Map node id -> sorted row indices routed through it."""
    members = {i: [] for i in range(tree.n_nodes)}
    Xd = np.asarray(X, dtype=np.float64)
    for row in range(Xd.shape[0]):
        node = 0
        members[node].append(row)
        while tree.feature[node] >= 0:
            if Xd[row, tree.feature[node]] <= tree.threshold[node]:
                node = tree.children_left[node]
            else:
                node = tree.children_right[node]
            members[node].append(row)
    return {k: np.asarray(v) for k, v in members.items()}
