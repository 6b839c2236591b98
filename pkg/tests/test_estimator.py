import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tightham import TightCycleFinder, check_hypergraph
from tightham.errors import InvalidInput, WrongArity
from tightham.hypergraph import Hypergraph, complete
from tightham.oracle import verify_tight_cycle


def test_check_hypergraph():
    g = check_hypergraph([(0, 1, 2), (1, 2, 3)])
    assert g.r == 3 and g.n == 4 and g.num_edges() == 2
    assert check_hypergraph(g, r=3) is g
    with pytest.raises(WrongArity):
        check_hypergraph(g, r=4)
    with pytest.raises(InvalidInput):
        check_hypergraph([])
    assert check_hypergraph([(0, 1, 2)], n=10).n == 10


def test_params_round_trip():
    est = TightCycleFinder(seed=3, eps=0.5)
    assert clone(est).get_params() == est.get_params()
    with pytest.raises(NotFittedError):
        est.predict([0])


def test_fit_predict_complete():
    g = complete(60, 3)
    est = TightCycleFinder(seed=1).fit(g)
    assert est.success_ and verify_tight_cycle(g, est.cycle_)
    assert est.report_["success"]
    assert (est.predict(np.arange(60)) == 0).all()
    with pytest.raises(InvalidInput):
        est.predict([60])


def test_failure_predicts_minus_one():
    est = TightCycleFinder(seed=1, p=1.0)
    labels = est.fit_predict(Hypergraph(60, 3, [(0, 1, 2)]))
    assert not est.success_ and est.cycle_ is None
    assert (labels == -1).all()


def test_lengths():
    est = TightCycleFinder(p=1.0, seed=1, lengths=[100, 25, 25])
    est.fit(complete(150, 3))
    assert est.success_ and [len(c) for c in est.cycles_] == [100, 25, 25]
    labels = est.predict(np.arange(150))
    assert np.bincount(labels).tolist() == [100, 25, 25]
