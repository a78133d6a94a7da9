"""Multi-output regression trees grown on (possibly projected) output vectors.

The tree structure is chosen by variance reduction computed on a compressed
output matrix Z, while leaf predictions are always component-wise means of the
original outputs, so no decoding step is ever needed at prediction time.  The
split scan is vectorized over thresholds with running per-dimension sums, so
its cost per node is O(q * m) for q samples and m output dimensions: shrinking
m shrinks training time proportionally.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .data import to_dense
from .projection import project

SPLITTERS = ("exhaustive", "random_threshold")

# A node whose projected variance falls at or below this is treated as pure.
PURE_NODE_TOL = 1e-12


@dataclass(frozen=True)
class TreeConfig:
    """Growth parameters.

    ``k`` features are examined per split (drawn without replacement, fresh at
    every node).  A split is attempted at nodes holding at least ``n_min``
    samples (and never below 2).  The ``exhaustive`` splitter tries every
    midpoint between consecutive distinct sorted values; ``random_threshold``
    draws one uniform cut per candidate feature.  ``bootstrap`` resamples the
    training rows with replacement before growing.
    """

    k: int
    n_min: int = 1
    splitter: str = "exhaustive"
    bootstrap: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n_min < 1:
            raise ValueError("n_min must be >= 1")
        if self.splitter not in SPLITTERS:
            raise ValueError("unknown splitter: {!r}".format(self.splitter))


@dataclass(frozen=True)
class SplitRecord:
    feature: int
    threshold: float
    impurity_reduction: float


def variance_sum(Y_rows):
    """Sum over output dimensions of the per-dimension (population) variance.

    Computed in centered form: mean over rows of the squared distance to the
    row mean.  Equals the mean pairwise squared distance divided by two (see
    :func:`variance_sum_pairwise`).
    """
    Y = to_dense(Y_rows)
    if Y.ndim == 1:
        Y = Y[None, :]
    q = Y.shape[0]
    if q == 0:
        raise ValueError("variance of an empty sample is undefined")
    centered = Y - Y.mean(axis=0)
    return float(np.einsum("ij,ij->", centered, centered) / q)


def variance_sum_pairwise(Y_rows):
    """Same quantity as :func:`variance_sum` via literal pairwise enumeration:
    (1 / 2 q^2) * sum_ij |y_i - y_j|^2.  Quadratic; used as a cross-check.
    """
    Y = to_dense(Y_rows)
    if Y.ndim == 1:
        Y = Y[None, :]
    q = Y.shape[0]
    if q == 0:
        raise ValueError("variance of an empty sample is undefined")
    diffs = Y[:, None, :] - Y[None, :, :]
    return float(np.einsum("ijk,ijk->", diffs, diffs) / (2.0 * q * q))


def _scan_exhaustive(cols, Zs, M, M2, samples, features):
    """Best midpoint split over the given features; None when no gain > 0.

    For each feature the samples are sorted once and every boundary between
    distinct consecutive values is scored from prefix sums of Z, so the work
    per feature is O(q log q + q m).  Ties are broken toward the lowest
    feature index, then the lowest threshold.
    """
    q = samples.size
    best_gain = 0.0
    best = None
    for f in features:
        v = cols(f)[samples]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        if vs[0] == vs[-1]:
            continue
        cut = np.nonzero(vs[1:] > vs[:-1])[0]
        C = np.cumsum(Zs[order], axis=0)
        c2 = np.einsum("ij,ij->i", C, C)
        cm = C @ M
        c2c = c2[cut]
        nl = (cut + 1).astype(np.float64)
        score = c2c / nl + (M2 - 2.0 * cm[cut] + c2c) / (q - nl)
        j = int(np.argmax(score))
        gain = (float(score[j]) - M2 / q) / q
        if gain > best_gain:
            i = int(cut[j])
            thr = 0.5 * (vs[i] + vs[i + 1])
            if not (vs[i] < thr < vs[i + 1]):
                # adjacent floats leave no strictly-between midpoint
                thr = float(vs[i])
            best_gain = gain
            best = (int(f), float(thr), order, i)
    if best is None:
        return None
    f, thr, order, i = best
    return (
        SplitRecord(f, thr, best_gain),
        samples[order[: i + 1]],
        samples[order[i + 1 :]],
    )


def _scan_random_threshold(cols, Zs, M, M2, samples, features, gen):
    """One uniform cut in (min, max) per feature; keep the best-scoring one."""
    q = samples.size
    best_gain = 0.0
    best = None
    for f in features:
        v = cols(f)[samples]
        lo = float(v.min())
        hi = float(v.max())
        if lo == hi:
            continue
        thr = float(gen.uniform(lo, hi))
        mask = v <= thr
        nl = int(np.count_nonzero(mask))
        if nl == 0 or nl == q:
            continue
        ML = Zs[mask].sum(axis=0)
        MR = M - ML
        gain = (
            float(ML @ ML) / nl + float(MR @ MR) / (q - nl) - M2 / q
        ) / q
        if gain > best_gain:
            best_gain = gain
            best = (int(f), thr, mask)
    if best is None:
        return None
    f, thr, mask = best
    return SplitRecord(f, thr, best_gain), samples[mask], samples[~mask]


def _dense_column_accessor(X, rows, subset):
    if subset:
        Xt = X[rows]
        return lambda f: Xt[:, f]
    return lambda f: X[:, f]


def _sparse_column_accessor(X, rows, subset):
    Xc = X.tocsc()
    cache = {}

    def cols(f):
        col = cache.get(f)
        if col is None:
            col = np.asarray(Xc[:, [f]].todense()).ravel()
            if subset:
                col = col[rows]
            cache[f] = col
        return col

    return cols


def best_split_exhaustive(X, Z, samples, features):
    """Public one-shot exhaustive split search over a node (dense X)."""
    samples = np.asarray(samples, dtype=np.int64)
    features = np.sort(np.asarray(features, dtype=np.int64))
    if samples.size < 2:
        raise ValueError("need at least two samples to split")
    if features.size == 0:
        raise ValueError("feature subset must be non-empty")
    Zs = np.asarray(Z, dtype=np.float64)[samples]
    M = Zs.sum(axis=0)
    M2 = float(M @ M)
    cols = _dense_column_accessor(np.asarray(X, dtype=np.float64), None, False)
    found = _scan_exhaustive(cols, Zs, M, M2, samples, features)
    return None if found is None else found[0]


def best_split_random_threshold(X, Z, samples, features, rng):
    """Public one-shot random-threshold split search over a node (dense X)."""
    samples = np.asarray(samples, dtype=np.int64)
    features = np.sort(np.asarray(features, dtype=np.int64))
    if samples.size < 2:
        raise ValueError("need at least two samples to split")
    if features.size == 0:
        raise ValueError("feature subset must be non-empty")
    Zs = np.asarray(Z, dtype=np.float64)[samples]
    M = Zs.sum(axis=0)
    M2 = float(M @ M)
    cols = _dense_column_accessor(np.asarray(X, dtype=np.float64), None, False)
    found = _scan_random_threshold(cols, Zs, M, M2, samples, features, rng.generator)
    return None if found is None else found[0]


class Tree:
    """Array-encoded binary tree with leaf vectors in the original label space.

    Internal nodes store (feature, threshold, impurity_reduction, children);
    leaves index into ``leaf_values`` (leaf_count x d) and ``leaf_counts``.
    Routing sends a sample left iff its feature value is <= the threshold.
    """

    FORMAT = "projforest-tree"
    VERSION = 1

    def __init__(
        self,
        feature,
        threshold,
        children_left,
        children_right,
        impurity_reduction,
        leaf_id,
        leaf_values,
        leaf_counts,
        n_features,
    ):
        self.feature = feature
        self.threshold = threshold
        self.children_left = children_left
        self.children_right = children_right
        self.impurity_reduction = impurity_reduction
        self.leaf_id = leaf_id
        self.leaf_values = leaf_values
        self.leaf_counts = leaf_counts
        self.n_features = int(n_features)

    @property
    def n_nodes(self):
        return self.feature.size

    @property
    def n_leaves(self):
        return self.leaf_values.shape[0]

    @property
    def n_outputs(self):
        return self.leaf_values.shape[1]

    def _route_dense(self, Xd):
        node = np.zeros(Xd.shape[0], dtype=np.int64)
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                return node
            idx = np.nonzero(active)[0]
            nd = node[idx]
            go_left = Xd[idx, f[idx]] <= self.threshold[nd]
            node[idx] = np.where(
                go_left, self.children_left[nd], self.children_right[nd]
            )

    def apply(self, X):
        """Leaf index reached by every row of X."""
        if X.shape[1] != self.n_features:
            raise ValueError(
                "X has {} features, tree expects {}".format(
                    X.shape[1], self.n_features
                )
            )
        if sp.issparse(X):
            out = np.empty(X.shape[0], dtype=np.int64)
            for start in range(0, X.shape[0], 512):
                stop = min(start + 512, X.shape[0])
                chunk = np.asarray(X[start:stop].todense())
                out[start:stop] = self.leaf_id[self._route_dense(chunk)]
            return out
        return self.leaf_id[self._route_dense(np.asarray(X, dtype=np.float64))]

    def predict(self, X):
        """Leaf vector (length d) for every row of X, as an (n, d) array."""
        return self.leaf_values[self.apply(X)]

    def predict_one(self, x):
        """Leaf vector for a single input row."""
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.size != self.n_features:
            raise ValueError(
                "input has {} features, tree expects {}".format(
                    x.size, self.n_features
                )
            )
        node = 0
        while self.feature[node] >= 0:
            if x[self.feature[node]] <= self.threshold[node]:
                node = self.children_left[node]
            else:
                node = self.children_right[node]
        return self.leaf_values[self.leaf_id[node]]

    def to_dict(self):
        """Plain-serializable document; see README for the schema."""
        return {
            "format": self.FORMAT,
            "version": self.VERSION,
            "n_features": self.n_features,
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "children_left": self.children_left.tolist(),
            "children_right": self.children_right.tolist(),
            "impurity_reduction": self.impurity_reduction.tolist(),
            "leaf_id": self.leaf_id.tolist(),
            "leaf_values": self.leaf_values.tolist(),
            "leaf_counts": self.leaf_counts.tolist(),
        }

    @classmethod
    def from_dict(cls, doc):
        if doc.get("format") != cls.FORMAT:
            raise ValueError("not a serialized tree document")
        if doc.get("version") != cls.VERSION:
            raise ValueError(
                "unsupported tree document version: {!r}".format(doc.get("version"))
            )
        return cls(
            feature=np.asarray(doc["feature"], dtype=np.int64),
            threshold=np.asarray(doc["threshold"], dtype=np.float64),
            children_left=np.asarray(doc["children_left"], dtype=np.int64),
            children_right=np.asarray(doc["children_right"], dtype=np.int64),
            impurity_reduction=np.asarray(doc["impurity_reduction"], dtype=np.float64),
            leaf_id=np.asarray(doc["leaf_id"], dtype=np.int64),
            leaf_values=np.asarray(doc["leaf_values"], dtype=np.float64).reshape(
                len(doc["leaf_counts"]), -1
            ),
            leaf_counts=np.asarray(doc["leaf_counts"], dtype=np.int64),
            n_features=doc["n_features"],
        )


def trees_equal(a, b):
    """Exact structural and numerical equality of two trees."""
    return (
        a.n_features == b.n_features
        and np.array_equal(a.feature, b.feature)
        and np.array_equal(a.threshold, b.threshold)
        and np.array_equal(a.children_left, b.children_left)
        and np.array_equal(a.children_right, b.children_right)
        and np.array_equal(a.impurity_reduction, b.impurity_reduction)
        and np.array_equal(a.leaf_id, b.leaf_id)
        and np.array_equal(a.leaf_values, b.leaf_values)
        and np.array_equal(a.leaf_counts, b.leaf_counts)
    )


def grow(ds, phi, cfg, rng):
    """Grow one tree on a dataset view.

    The structure is fitted on Z = project(phi, Y) (or on Y itself when
    ``phi`` is None); leaves are labeled with means of the original Y rows
    reaching them, bootstrap multiplicities included.
    """
    return grow_arrays(ds.X_rows(), ds.Y_rows(), phi, cfg, rng)


def grow_arrays(X, Y, phi, cfg, rng, Z=None):
    """Grow one tree from raw matrices.

    ``X`` is (n, p) dense or CSR, ``Y`` is (n, d) dense or CSR.  ``Z`` may
    carry a precomputed projection of Y (used to time projection separately
    from growth); otherwise it is computed here.
    """
    n, p = X.shape
    d = Y.shape[1]
    if Y.shape[0] != n:
        raise ValueError("X and Y row counts differ")
    if phi is not None and phi.d != d:
        raise ValueError(
            "projection expects {} label columns, Y has {}".format(phi.d, d)
        )
    if cfg.k > p:
        raise ValueError("k={} exceeds the {} available features".format(cfg.k, p))
    if n == 0:
        raise ValueError("cannot grow a tree on an empty sample")

    if Z is None:
        Z = project(phi, Y) if phi is not None else to_dense(Y)
    gen = rng.generator

    if cfg.bootstrap:
        rows = gen.integers(0, n, size=n)
        Zt = Z[rows]
        subset = True
    else:
        rows = np.arange(n, dtype=np.int64)
        Zt = Z
        subset = False

    if sp.issparse(X):
        cols = _sparse_column_accessor(X, rows, subset)
    else:
        cols = _dense_column_accessor(X, rows, subset)

    znorm2 = np.einsum("ij,ij->i", Zt, Zt)
    n_t = rows.size
    min_split = max(2, cfg.n_min)
    random_splitter = cfg.splitter == "random_threshold"

    feature = []
    threshold = []
    children_left = []
    children_right = []
    gains = []
    leaf_of = []
    leaf_members = []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        children_left.append(-1)
        children_right.append(-1)
        gains.append(0.0)
        leaf_of.append(-1)
        return len(feature) - 1

    root_samples = np.arange(n_t, dtype=np.int64)
    stack = [(root_samples, new_node())]
    while stack:
        samples, node = stack.pop()
        q = samples.size
        found = None
        if q >= min_split:
            Zs = Zt[samples]
            M = Zs.sum(axis=0)
            M2 = float(M @ M)
            impurity = float(znorm2[samples].sum()) / q - M2 / (q * q)
            if impurity > PURE_NODE_TOL:
                chosen = gen.choice(p, size=cfg.k, replace=False)
                chosen.sort()
                if random_splitter:
                    found = _scan_random_threshold(
                        cols, Zs, M, M2, samples, chosen, gen
                    )
                else:
                    found = _scan_exhaustive(cols, Zs, M, M2, samples, chosen)
        if found is None:
            leaf_of[node] = len(leaf_members)
            leaf_members.append(samples)
            continue
        rec, left_samples, right_samples = found
        feature[node] = rec.feature
        threshold[node] = rec.threshold
        gains[node] = rec.impurity_reduction
        left_id = new_node()
        right_id = new_node()
        children_left[node] = left_id
        children_right[node] = right_id
        stack.append((right_samples, right_id))
        stack.append((left_samples, left_id))

    # Leaf labeling happens in the original output space: one aggregation
    # matmul computes every leaf's component-wise mean over its members.
    n_leaves = len(leaf_members)
    counts = np.array([m.size for m in leaf_members], dtype=np.int64)
    member_leaf = np.empty(n_t, dtype=np.int64)
    for leaf, members in enumerate(leaf_members):
        member_leaf[members] = leaf
    agg = sp.csr_matrix(
        (np.ones(n_t), (member_leaf, rows)), shape=(n_leaves, n), dtype=np.float64
    )
    leaf_values = to_dense(agg @ Y) / counts[:, None]

    return Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        children_left=np.asarray(children_left, dtype=np.int64),
        children_right=np.asarray(children_right, dtype=np.int64),
        impurity_reduction=np.asarray(gains, dtype=np.float64),
        leaf_id=np.asarray(leaf_of, dtype=np.int64),
        leaf_values=leaf_values,
        leaf_counts=counts,
        n_features=p,
    )
