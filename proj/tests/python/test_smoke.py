import pytest

import matchforge as mf


def test_two_by_two_swap():
    edges = [(0, 0, 5), (0, 1, 1), (1, 0, 2), (1, 1, 4)]
    r = mf.match_graph(["T1", "T2"], ["C1", "C2"], edges)
    assert r["cardinality"] == 2
    assert r["total_cost"] == 3
    assert r["optimality_gap_bound"] == 0
    assert sorted(r["pairs"]) == [("T1", "C2", 1.0), ("T2", "C1", 2.0)]


def test_greedy_witness_and_oracle():
    edges = [(0, 0, 1), (0, 1, 2), (1, 0, 10), (1, 1, 100)]
    greedy = mf.match_graph(["T1", "T2"], ["C1", "C2"], edges, method="greedy")
    optimal = mf.match_graph(["T1", "T2"], ["C1", "C2"], edges, method="hungarian")
    assert greedy["total_cost"] == 101
    assert greedy["optimality_gap_bound"] is None
    assert optimal["total_cost"] == 12
    assert mf.oracle(["T1", "T2"], ["C1", "C2"], edges)["total_cost"] == 12


def test_units_and_caliper():
    ids = ["t1", "t2", "c1", "c2", "c3"]
    treat = [1, 1, 0, 0, 0]
    x = [[1.0], [2.0], [1.0], [2.5], [9.0]]
    r = mf.match_units(ids, treat, x, metric="euclidean", caliper=0.2)
    assert r["pairs"] == [("t1", "c1", 0.0)]
    assert r["unmatched_treated"] == ["t2"]
    assert r["balance"][0]["name"] == "x1"


def test_errors():
    with pytest.raises(ValueError):
        mf.match_graph(["T1"], ["C1"], [(0, 0, -1.0)])
    with pytest.raises(ValueError):
        mf.match_graph(["T1"], ["C1"], [(0, 0, 1.0)], method="simplex")
    with pytest.raises(ValueError):
        mf.match_graph(["T1"], ["C1"], [(0, 0, 1.0)], k=2)
    with pytest.raises(mf.Infeasible):
        mf.oracle(["T1"], ["C1"], [], m=1)
