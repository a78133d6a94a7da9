"""Tree ensembles whose output subspace is shared or redrawn per tree.

Two policies mirror the two ways of combining output-space compression with
an ensemble: ``shared_subspace`` realizes one projection and grows every tree
on it; ``per_tree_subspace`` draws a fresh projection for each tree, turning
the projection itself into an extra source of ensemble diversity.
``no_projection`` is the plain baseline.  Predictions are always the average
of leaf vectors in the original label space.

Seed discipline: from ``master_seed``, projection streams take ids [0, t) and
tree-randomness streams take ids [t, 2t); the shared policy uses projection
stream 0.  This alignment makes single-tree ensembles of both policies, and
identity-projection vs no-projection runs, reproduce each other exactly.
"""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .data import to_dense
from .projection import ProjectionSpec, generate, pca_projection, project
from .rng import RngStream
from .tree import Tree, TreeConfig, grow_arrays

POLICIES = ("shared_subspace", "per_tree_subspace", "no_projection")


@dataclass(frozen=True)
class EnsembleConfig:
    t: int
    tree: TreeConfig
    projection: ProjectionSpec = None
    policy: str = "per_tree_subspace"
    master_seed: int = 0

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("ensemble size t must be >= 1")
        if self.policy not in POLICIES:
            raise ValueError("unknown policy: {!r}".format(self.policy))
        if self.policy != "no_projection" and self.projection is None:
            raise ValueError("policy {!r} needs a projection spec".format(self.policy))


@dataclass
class FitTiming:
    """Wall-clock split between projection work and tree growth."""

    generate_project_seconds: float
    grow_seconds: float


class Ensemble:
    """A fitted forest plus the projection policy that grew it."""

    FORMAT = "projforest-ensemble"
    VERSION = 1

    def __init__(self, trees, config, projections):
        self.trees = trees
        self.config = config
        self.projections = projections  # realized matrices: 0, 1 or t of them

    @property
    def t(self):
        return len(self.trees)

    @property
    def n_features(self):
        return self.trees[0].n_features

    @property
    def n_outputs(self):
        return self.trees[0].n_outputs

    def predict(self, X):
        """Average of the per-tree leaf vectors, an (n, d) array in [0, 1]
        for binary labels (entries are averaged label frequencies)."""
        if X.shape[1] != self.n_features:
            raise ValueError(
                "X has {} features, ensemble expects {}".format(
                    X.shape[1], self.n_features
                )
            )
        acc = self.trees[0].predict(X).copy()
        for tree in self.trees[1:]:
            acc += tree.predict(X)
        return acc / self.t

    def save(self, path):
        """Write a JSON document: manifest (policy, spec, seeds) plus trees.

        Realized projection matrices are not stored; generated kinds are
        reproducible from the recorded seeds and predictions never need them.
        """
        spec = self.config.projection
        doc = {
            "format": self.FORMAT,
            "version": self.VERSION,
            "policy": self.config.policy,
            "master_seed": self.config.master_seed,
            "t": self.config.t,
            "tree": {
                "k": self.config.tree.k,
                "n_min": self.config.tree.n_min,
                "splitter": self.config.tree.splitter,
                "bootstrap": self.config.tree.bootstrap,
            },
            "projection": None
            if spec is None
            else {"kind": spec.kind, "m": spec.m, "s": spec.s},
            "trees": [tree.to_dict() for tree in self.trees],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("format") != cls.FORMAT:
            raise ValueError("not a serialized ensemble document")
        if doc.get("version") != cls.VERSION:
            raise ValueError(
                "unsupported ensemble document version: {!r}".format(doc.get("version"))
            )
        spec = doc["projection"]
        config = EnsembleConfig(
            t=doc["t"],
            tree=TreeConfig(**doc["tree"]),
            projection=None if spec is None else ProjectionSpec(**spec),
            policy=doc["policy"],
            master_seed=doc["master_seed"],
        )
        trees = [Tree.from_dict(td) for td in doc["trees"]]
        return cls(trees, config, [])


def fit(ds, cfg, n_jobs=1):
    """Fit an ensemble on a dataset view.  Deterministic given the config."""
    ensemble, _ = _fit_arrays(
        ds.X_rows(), ds.Y_rows(), cfg, cfg.master_seed, cfg.master_seed, n_jobs
    )
    return ensemble


def fit_timed(ds, cfg, n_jobs=1):
    """Like :func:`fit` but also reports projection vs growth wall time.

    Timing attribution is only meaningful with ``n_jobs=1`` (phases overlap
    under a thread pool).
    """
    return _fit_arrays(
        ds.X_rows(), ds.Y_rows(), cfg, cfg.master_seed, cfg.master_seed, n_jobs
    )


def _fit_arrays(X, Y, cfg, phi_seed, eps_seed, n_jobs=1):
    """Fitting core on raw matrices, with independently seedable projection
    and tree-randomness streams (the nested Monte Carlo harnesses vary one
    while holding the other)."""
    d = Y.shape[1]
    t = cfg.t
    proj_time = 0.0
    grow_time = 0.0

    shared_phi = None
    shared_z = None
    tic = time.perf_counter()
    if cfg.policy == "no_projection":
        shared_z = to_dense(Y)
    elif cfg.projection.kind == "pca":
        # Data-dependent and deterministic, so both policies share one map.
        shared_phi = pca_projection(Y, cfg.projection.m)
        shared_z = project(shared_phi, Y)
    elif cfg.policy == "shared_subspace":
        shared_phi = generate(cfg.projection, d, RngStream(phi_seed, 0))
        shared_z = project(shared_phi, Y)
    proj_time += time.perf_counter() - tic

    per_tree = shared_z is None
    phis = [None] * t

    def build_tree(j):
        gen_seconds = 0.0
        if per_tree:
            tic = time.perf_counter()
            phi = generate(cfg.projection, d, RngStream(phi_seed, j))
            z = project(phi, Y)
            gen_seconds = time.perf_counter() - tic
        else:
            phi = shared_phi
            z = shared_z
        tic = time.perf_counter()
        tree = grow_arrays(X, Y, phi, cfg.tree, RngStream(eps_seed, t + j), Z=z)
        return tree, phi, gen_seconds, time.perf_counter() - tic

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(build_tree, range(t)))
    else:
        results = [build_tree(j) for j in range(t)]

    trees = []
    for j, (tree, phi, gen_seconds, grow_seconds) in enumerate(results):
        trees.append(tree)
        phis[j] = phi
        proj_time += gen_seconds
        grow_time += grow_seconds

    if cfg.policy == "no_projection":
        projections = []
    elif per_tree:
        projections = phis
    else:
        projections = [shared_phi]
    return Ensemble(trees, cfg, projections), FitTiming(proj_time, grow_time)
