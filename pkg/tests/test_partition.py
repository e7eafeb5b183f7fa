import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hgx import ValidationError, build_hypergraph, cut_objective, cut_sweep
from hgx import fixtures as F

import oracles


@settings(max_examples=40)
@given(st.integers(0, 10_000), st.data())
def test_reduces_to_zhou_ncut(seed, data):
    h = F.random_plain(seed, n_max=10, sigma=-1.0)
    n = h.n_vertices
    S = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n - 1, unique=True))
    mask = np.zeros(n, dtype=bool)
    mask[S] = True
    rep = cut_objective(h, S)
    assert rep.c == pytest.approx(oracles.zhou_ncut(h.H.toarray(), h.w, mask), rel=1e-12, abs=1e-15)
    assert rep.vol_S + rep.vol_Sc == pytest.approx(1.0, abs=1e-12)


def test_symmetric_in_complement():
    h = F.r5()
    a = cut_objective(h, ["v0", "v1"])
    b = cut_objective(h, ["v2", "v3", "v4"])
    assert a.c == pytest.approx(b.c, rel=1e-14)
    assert set(a.boundary_edges) == set(b.boundary_edges)


def test_disconnected_cut_is_zero():
    rep = cut_objective(F.two_disjoint_edges(), ["a", "b"])
    assert rep.c == 0 and rep.boundary_edges == ()


def test_subset_validation():
    with pytest.raises(ValidationError):
        cut_objective(F.t1(), [])
    with pytest.raises(ValidationError):
        cut_objective(F.t1(), ["a", "b"])
    with pytest.raises(ValidationError):
        cut_objective(F.t1(), ["zz"])


def test_non_equivalent_needs_power_iteration():
    h = F.non_equivalent()
    with pytest.raises(ValidationError, match="use_power_iteration"):
        cut_objective(h, ["1", "2"])
    rep = cut_objective(h, ["1", "2"], use_power_iteration=True)
    assert rep.c > 0


def test_sweep_finds_planted_cut():
    recs = []
    for e, mem in {"a1": "abc", "a2": "bcd", "b1": "efg", "b2": "fgh", "x": "dh"}.items():
        recs += [(v, e, 1, 1) for v in mem]
    h = build_hypergraph(recs)
    best, scores = cut_sweep(h)
    assert set(best.S) in ({"a", "b", "c", "d"}, {"e", "f", "g", "h"})
    assert best.boundary_edges == ("x",)
    assert best.c == pytest.approx(np.nanmin(scores))
    assert scores.shape == (7,)
