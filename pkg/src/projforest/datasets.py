"""Multi-label dataset loading, writing, splitting, and synthetic generators.

On-disk format (one sample per line)::

    <labels> <idx>:<value> <idx>:<value> ...

where ``<labels>`` is a comma-separated list of 0-based label indices (empty
for unlabeled samples, conventionally written with a leading space) and the
feature indices are 1-based and strictly increasing.  An optional comment
line such as ``#d=6 #p=72`` pins the label and feature counts; otherwise both
are inferred as one past the largest index seen.  Files ending in ``.gz`` are
transparently decompressed.
"""

import gzip
import re
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .data import DataSet

SPLIT_MODES = ("fixed_holdout", "shuffled_repeats", "kfold")

_DIM_TOKEN = re.compile(r"\b([dp])=(\d+)")


def _open_text(path, mode="rt"):
    if str(path).endswith(".gz"):
        return gzip.open(path, mode)
    return open(path, mode)


def load_svmlight_multilabel(path):
    """Parse a multi-label svmlight-style file into a :class:`DataSet`."""
    pinned_d = None
    pinned_p = None
    label_rows = []
    feature_rows = []
    max_label = -1
    max_feature = -1

    with _open_text(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if line.startswith("#"):
                for key, value in _DIM_TOKEN.findall(line):
                    if key == "d":
                        pinned_d = int(value)
                    else:
                        pinned_p = int(value)
                continue
            if not line.strip():
                continue
            if line[0].isspace():
                label_part, feature_part = "", line.strip()
            else:
                parts = line.split(maxsplit=1)
                if ":" in parts[0]:
                    label_part, feature_part = "", line.strip()
                else:
                    label_part = parts[0]
                    feature_part = parts[1].strip() if len(parts) > 1 else ""

            labels = []
            if label_part:
                for tok in label_part.split(","):
                    try:
                        lab = int(tok)
                    except ValueError:
                        raise ValueError(
                            "line {}: bad label index {!r}".format(lineno, tok)
                        ) from None
                    if lab < 0:
                        raise ValueError(
                            "line {}: negative label index {}".format(lineno, lab)
                        )
                    if pinned_d is not None and lab >= pinned_d:
                        raise ValueError(
                            "line {}: label index {} >= pinned d={}".format(
                                lineno, lab, pinned_d
                            )
                        )
                    labels.append(lab)
            labels = sorted(set(labels))
            if labels:
                max_label = max(max_label, labels[-1])

            feats = []
            prev_idx = 0
            if feature_part:
                for tok in feature_part.split():
                    idx_str, sep, val_str = tok.partition(":")
                    if not sep:
                        raise ValueError(
                            "line {}: bad feature token {!r}".format(lineno, tok)
                        )
                    try:
                        idx = int(idx_str)
                        val = float(val_str)
                    except ValueError:
                        raise ValueError(
                            "line {}: bad feature token {!r}".format(lineno, tok)
                        ) from None
                    if idx < 1:
                        raise ValueError(
                            "line {}: feature indices are 1-based, got {}".format(
                                lineno, idx
                            )
                        )
                    if idx <= prev_idx:
                        raise ValueError(
                            "line {}: feature indices must be strictly increasing"
                            " ({} after {})".format(lineno, idx, prev_idx)
                        )
                    if not np.isfinite(val):
                        raise ValueError(
                            "line {}: non-finite feature value {!r}".format(
                                lineno, val_str
                            )
                        )
                    prev_idx = idx
                    if val != 0.0:
                        feats.append((idx - 1, val))
                if pinned_p is not None and prev_idx > pinned_p:
                    raise ValueError(
                        "line {}: feature index {} > pinned p={}".format(
                            lineno, prev_idx, pinned_p
                        )
                    )
                max_feature = max(max_feature, prev_idx - 1)
            label_rows.append(labels)
            feature_rows.append(feats)

    n = len(label_rows)
    if n == 0:
        raise ValueError("file contains no samples: {}".format(path))
    d = pinned_d if pinned_d is not None else max_label + 1
    p = pinned_p if pinned_p is not None else max_feature + 1
    if d < 1:
        raise ValueError(
            "cannot infer the label count (no labels present); add a '#d=...' header"
        )
    if p < 1:
        raise ValueError(
            "cannot infer the feature count (no features present); add a '#p=...' header"
        )

    xi = np.fromiter(
        (i for i, feats in enumerate(feature_rows) for _ in feats), dtype=np.int64
    )
    xj = np.fromiter(
        (j for feats in feature_rows for j, _ in feats), dtype=np.int64
    )
    xv = np.fromiter(
        (v for feats in feature_rows for _, v in feats), dtype=np.float64
    )
    X = sp.csr_matrix((xv, (xi, xj)), shape=(n, p))
    yi = np.fromiter(
        (i for i, labels in enumerate(label_rows) for _ in labels), dtype=np.int64
    )
    yj = np.fromiter(
        (lab for labels in label_rows for lab in labels), dtype=np.int64
    )
    Y = sp.csr_matrix((np.ones(yj.size), (yi, yj)), shape=(n, d))
    return DataSet(X, Y)


def dump_svmlight_multilabel(ds, path, header=True):
    """Write a :class:`DataSet` in the format read by the loader.

    Float values use shortest round-trip formatting, so write-then-read
    reproduces the matrices exactly.  A dimension-pinning header is emitted
    by default (recommended: it keeps empty trailing labels/features).
    """
    X = sp.csr_matrix(ds.X_rows())
    Y = ds.Y_rows().tocsr()
    n = ds.n_samples
    with _open_text(path, "wt") as fh:
        if header:
            fh.write("#d={} #p={}\n".format(ds.n_labels, ds.n_features))
        for i in range(n):
            labels = Y.indices[Y.indptr[i] : Y.indptr[i + 1]]
            cols = X.indices[X.indptr[i] : X.indptr[i + 1]]
            vals = X.data[X.indptr[i] : X.indptr[i + 1]]
            order = np.argsort(cols)
            feats = " ".join(
                "{}:{}".format(int(cols[j]) + 1, repr(float(vals[j])))
                for j in order
                if vals[j] != 0.0
            )
            fh.write("{} {}\n".format(",".join(str(int(l)) for l in sorted(labels)), feats))


@dataclass(frozen=True)
class SplitPlan:
    """How to carve a dataset into train/test views.

    ``fixed_holdout`` makes one shuffled split of the given sizes;
    ``shuffled_repeats`` repeats that ``count`` times with fresh shuffles;
    ``kfold`` partitions the samples into ``folds`` folds, each serving as
    the test set once.
    """

    mode: str
    n_train: int = None
    n_test: int = None
    count: int = 10
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.mode not in SPLIT_MODES:
            raise ValueError("unknown split mode: {!r}".format(self.mode))
        if self.mode == "kfold" and self.folds < 2:
            raise ValueError("kfold needs at least 2 folds")
        if self.mode == "shuffled_repeats" and self.count < 1:
            raise ValueError("shuffled_repeats needs count >= 1")


def make_splits(ds, plan):
    """List of (train view, test view) pairs, deterministic under the seed."""
    n = ds.n_samples
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(plan.seed)))

    if plan.mode in ("fixed_holdout", "shuffled_repeats"):
        if plan.n_train is None:
            raise ValueError("{} needs n_train".format(plan.mode))
        n_train = int(plan.n_train)
        n_test = int(plan.n_test) if plan.n_test is not None else n - n_train
        if n_train < 1 or n_test < 1 or n_train + n_test > n:
            raise ValueError(
                "split sizes {}+{} are inconsistent with n={}".format(
                    n_train, n_test, n
                )
            )
        repeats = 1 if plan.mode == "fixed_holdout" else plan.count
        out = []
        for _ in range(repeats):
            perm = gen.permutation(n)
            train = np.sort(perm[:n_train])
            test = np.sort(perm[n_train : n_train + n_test])
            out.append((ds.row_slice(train), ds.row_slice(test)))
        return out

    if plan.folds > n:
        raise ValueError("more folds than samples")
    perm = gen.permutation(n)
    fold_sizes = np.full(plan.folds, n // plan.folds, dtype=np.int64)
    fold_sizes[: n % plan.folds] += 1
    out = []
    stop = 0
    for size in fold_sizes:
        start, stop = stop, stop + int(size)
        test = np.sort(perm[start:stop])
        train = np.sort(np.concatenate([perm[:start], perm[stop:]]))
        out.append((ds.row_slice(train), ds.row_slice(test)))
    return out


def make_synthetic_multilabel(
    n, p, d, n_clusters=8, labels_per_cluster=3, noise=0.5, flip=0.01, seed=0
):
    """Clustered multi-label data with learnable input/label structure.

    Each cluster owns a feature centroid and a sparse label pattern; rows get
    gaussian feature noise around their centroid and rare label flips.  Useful
    for end-to-end tests and benchmarks when no real dataset is at hand.
    """
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    centroids = gen.standard_normal((n_clusters, p)) * 2.0
    patterns = np.zeros((n_clusters, d))
    for c in range(n_clusters):
        cols = gen.choice(d, size=min(labels_per_cluster, d), replace=False)
        patterns[c, cols] = 1.0
    assign = gen.integers(0, n_clusters, size=n)
    X = centroids[assign] + gen.standard_normal((n, p)) * noise
    Y = patterns[assign].copy()
    if flip > 0:
        flips = gen.random((n, d)) < flip
        Y = np.where(flips, 1.0 - Y, Y)
    # Keep every row non-empty so ranking metrics retain all samples.
    empty = Y.sum(axis=1) == 0
    if empty.any():
        Y[np.nonzero(empty)[0], gen.integers(0, d, size=int(empty.sum()))] = 1.0
    return DataSet(X, sp.csr_matrix(Y))
