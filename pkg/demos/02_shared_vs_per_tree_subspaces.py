"""Ranking accuracy vs projection size for the two ensemble policies.

Grows forests on a synthetic multi-label problem while sweeping the projected
dimension m, averaging each configuration over a few seeds.  The per-tree
policy (a fresh map per tree) reaches the unprojected baseline at much smaller
m than the shared-subspace policy, because averaging over trees also averages
out the projection randomness; the shared policy carries one distorted view of
the labels through the whole forest.
"""

import numpy as np

from projforest import (
    EnsembleConfig,
    ProjectionSpec,
    SplitPlan,
    TreeConfig,
    fit,
    lrap,
    make_splits,
    make_synthetic_multilabel,
)

ds = make_synthetic_multilabel(
    600, 12, 300, n_clusters=40, labels_per_cluster=4, noise=1.5, flip=0.01, seed=3
)
train, test = make_splits(ds, SplitPlan("fixed_holdout", n_train=420, seed=1))[0]
print(f"dataset: {ds.n_samples} samples, p={ds.n_features}, d={ds.n_labels}")
print(f"split: {train.n_samples} train / {test.n_samples} test\n")

tree_cfg = TreeConfig(k=3, n_min=1, splitter="exhaustive", bootstrap=True)
T, REPS = 40, 3


def score(policy, m):
    values = []
    for rep in range(REPS):
        projection = None if policy == "no_projection" else ProjectionSpec("gaussian", m)
        cfg = EnsembleConfig(
            t=T, tree=tree_cfg, projection=projection, policy=policy,
            master_seed=100 + rep,
        )
        ensemble = fit(train, cfg)
        values.append(lrap(ensemble.predict(test.X_rows()), test.Y_rows()))
    return float(np.mean(values)), float(np.std(values))


baseline, baseline_std = score("no_projection", 0)
print(f"baseline (no projection, t={T}): LRAP = {baseline:.4f} +- {baseline_std:.4f}\n")

print(f"{'m':>5} {'shared subspace':>20} {'per-tree subspaces':>21}")
for m in (1, 5, 15, 50, 300):
    shared, shared_std = score("shared_subspace", m)
    per_tree, per_std = score("per_tree_subspace", m)
    print(
        f"{m:>5} {shared:>12.4f} +- {shared_std:.4f}"
        f" {per_tree:>13.4f} +- {per_std:.4f}"
    )

print(
    f"\nThe per-tree policy matches the baseline ({baseline:.3f}) with a handful"
    f"\nof components and never trails the shared policy, which needs an order"
    f"\nof magnitude more of them to recover.  Compression this aggressive makes"
    f"\neach split scan tens of times cheaper (see demo 04)."
)
