"""scikit-learn style front end for the cycle finder."""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import InvalidInput, WrongArity
from .hypergraph import Hypergraph
from .pipeline import PipelineConfig, find_disjoint_tight_cycles, find_tight_hamilton_cycle


def check_hypergraph(G, r: int | None = None, n: int | None = None) -> Hypergraph:
    """A Hypergraph from ``G`` (a Hypergraph or an iterable of edges)."""
    if isinstance(G, Hypergraph):
        if r is not None and G.r != r:
            raise WrongArity(f"hypergraph is {G.r}-uniform, expected r={r}")
        return G
    edges = [tuple(int(x) for x in e) for e in G]
    if r is None:
        if not edges:
            raise InvalidInput("cannot infer r from an empty edge list")
        r = len(edges[0])
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    return Hypergraph(n, r, edges)


class TightCycleFinder(BaseEstimator):
    """Find a tight Hamilton cycle (or disjoint cycles of given lengths).

    ``p`` defaults to the edge density of the fitted hypergraph.
    """

    def __init__(self, r: int = 3, p: float | None = None, eps: float | None = None,
                 mode: str = "practical", seed: int = 0, reservoir_count: int | None = None,
                 gadget_ell: int | None = None, greedy_stop: int | None = None,
                 lengths: Iterable[int] | None = None):
        self.r = r
        self.p = p
        self.eps = eps
        self.mode = mode
        self.seed = seed
        self.reservoir_count = reservoir_count
        self.gadget_ell = gadget_ell
        self.greedy_stop = greedy_stop
        self.lengths = lengths

    def _config(self, g: Hypergraph) -> PipelineConfig:
        p = self.p
        if p is None:
            total = math.comb(g.n, g.r)
            p = g.num_edges() / total if total else 0.0
        return PipelineConfig(n=g.n, r=g.r, p=p, eps=self.eps, mode=self.mode, seed=self.seed,
                              reservoir_count=self.reservoir_count, gadget_ell=self.gadget_ell,
                              greedy_stop=self.greedy_stop)

    def fit(self, G, y=None):
        g = check_hypergraph(G, self.r)
        cfg = self._config(g)
        if self.lengths is None:
            report = find_tight_hamilton_cycle(cfg, g)
            self.cycle_ = report.cycle
            self.cycles_ = None if report.cycle is None else [report.cycle]
        else:
            report = find_disjoint_tight_cycles(cfg, list(self.lengths), g)
            self.cycles_ = report.cycles
            self.cycle_ = None if report.cycles is None else report.cycles[0]
        self.report_ = report.as_dict()
        self.success_ = report.success
        self.n_vertices_ = g.n
        return self

    def predict(self, X) -> np.ndarray:
        """Index of the cycle containing each vertex (-1 when uncovered or on failure)."""
        check_is_fitted(self, "report_")
        X = np.asarray(X, dtype=np.int64).reshape(-1)
        which = np.full(self.n_vertices_, -1, dtype=np.int64)
        for i, c in enumerate(self.cycles_ or []):
            which[c] = i
        if X.size and (X.min() < 0 or X.max() >= self.n_vertices_):
            raise InvalidInput("vertex outside the fitted hypergraph")
        return which[X]

    def fit_predict(self, G, y=None) -> np.ndarray:
        self.fit(G)
        return self.predict(np.arange(self.n_vertices_))
