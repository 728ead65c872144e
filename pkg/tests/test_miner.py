import json
import math

import pytest

from dsspan.dfscode import DfsEdge, code_key, contains, is_canonical, iter_graph_codes
from dsspan.graph import make_dataset
from dsspan.miner import (MinerConfig, complete_coverage, load_result, mine, mine_baseline,
                          recount_support, result_to_dict, save_result)
from dsspan.oracle import brute_frequent, code_form

from conftest import random_corpus

A, B, C, D = 0, 1, 2, 3
X = 0


def test_config_validation():
    with pytest.raises(ValueError):
        MinerConfig(delta=0)
    with pytest.raises(ValueError):
        MinerConfig(delta=1.5)
    with pytest.raises(ValueError):
        MinerConfig(min_cov=0)
    with pytest.raises(ValueError):
        MinerConfig(gamma=0.5)
    assert MinerConfig(gamma=None).cap is None
    assert MinerConfig(min_cov=3, gamma=2).cap == 6


@pytest.mark.parametrize("delta,n,expected", [(0.1, 30, 3), (0.1, 188, 19), (1.0, 7, 7),
                                              (2 / 7, 7, 2), (5 / 9, 9, 5), (0.01, 5, 1)])
def test_min_support_is_exact_ceiling(delta, n, expected):
    assert MinerConfig(delta=delta).min_support(n) == expected


def test_empty_dataset_rejected():
    ds = make_dataset([], [], class_count=1)
    with pytest.raises(ValueError):
        mine(ds, MinerConfig())


def test_identical_single_edges():
    ds = make_dataset([([A, B], [(0, 1, X)])] * 4, [0, 1, 0, 1])
    res = mine(ds, MinerConfig(delta=1.0))
    assert len(res.candidates) == 1
    assert res.candidates[0].code == (DfsEdge(0, 1, A, B, X),)
    assert res.candidates[0].support == 4


def test_unreachable_threshold_gives_empty_output():
    ds = make_dataset([([A, B], [(0, 1, X)]), ([C, C], [(0, 1, X)])], [0, 1])
    assert mine(ds, MinerConfig(delta=1.0)).candidates == []


@pytest.mark.parametrize("seed", range(8))
def test_baseline_matches_brute_force(seed):
    ds = random_corpus(seed)
    for ms in (1, 2, math.ceil(ds.n / 2)):
        res = mine_baseline(ds, MinerConfig(delta=ms / ds.n, max_edges=4))
        forms = [code_form(c) for c in res.codes()]
        assert len(forms) == len(set(forms))
        assert set(forms) == brute_frequent(ds, ms, 4)


def test_single_graph_baseline_enumerates_everything():
    ds = random_corpus(2).subset([0])
    res = mine_baseline(ds, MinerConfig(delta=1.0, max_edges=3))
    assert sorted(res.codes(), key=code_key) == sorted(iter_graph_codes(ds.graphs[0], 3), key=code_key)


@pytest.mark.parametrize("seed", range(6))
def test_candidate_invariants(seed):
    ds = random_corpus(seed)
    cfg = MinerConfig(delta=0.3, min_cov=2, gamma=2, max_edges=5)
    res = mine(ds, cfg, trace=True)
    minsup = cfg.min_support(ds.n)
    codes = res.codes()
    assert len(codes) == len(set(codes))
    for rec in res.candidates:
        assert is_canonical(rec.code)
        assert rec.support >= minsup
        assert recount_support(ds, rec.code) == rec.graphs
    # eligibility only shrinks
    trace = res.eligibility_trace
    assert all(a >= b for a, b in zip(trace, trace[1:]))
    # coverage equals a recount over the pool
    assert res.final_coverage == [sum(i in r.graphs for r in res.candidates) for i in range(ds.n)]


@pytest.mark.parametrize("seed", range(6))
def test_cap_subset_and_work(seed):
    ds = random_corpus(seed)
    base = mine_baseline(ds, MinerConfig(delta=0.2, max_edges=5))
    for gamma in (1, 2, 4):
        for min_cov in (1, 3):
            capped = mine(ds, MinerConfig(delta=0.2, max_edges=5, gamma=gamma, min_cov=min_cov))
            assert set(capped.codes()) <= set(base.codes())
            assert capped.stats.extensions_generated <= base.stats.extensions_generated


def test_determinism():
    ds = random_corpus(4)
    cfg = MinerConfig(delta=0.2, gamma=2, min_cov=2)
    assert mine(ds, cfg).codes() == mine(ds, cfg).codes()


def test_ineligible_graphs_stop_generating():
    # after the shared edge is accepted with cap 1, nothing may grow further
    ds = make_dataset([([A, A, A], [(0, 1, X), (1, 2, X)])] * 3, [0, 1, 0])
    capped = mine(ds, MinerConfig(delta=1.0, min_cov=1, gamma=1))
    assert len(capped.codes()) == 1
    assert len(mine_baseline(ds, MinerConfig(delta=1.0)).codes()) == 2


def test_completion_noop_when_covered():
    ds = make_dataset([([A, A, A], [(0, 1, X), (1, 2, X)])] * 3, [0, 1, 0])
    res = mine(ds, MinerConfig(delta=1.0, min_cov=1, gamma=1))
    done = complete_coverage(ds, res)
    assert done.codes() == res.codes() and not any(done.filler_flags)
    assert done.uncoverable == []


def test_completion_outlier_gets_one_filler():
    shared = ([A, A, A], [(0, 1, X), (1, 2, X)])
    outlier = ([C, D, C], [(0, 1, X), (1, 2, X)])
    ds = make_dataset([shared, shared, shared, outlier], [0, 1, 0, 1])
    res = mine(ds, MinerConfig(delta=0.5, min_cov=1, gamma=2))
    assert res.final_coverage[3] == 0
    done = complete_coverage(ds, res)
    assert done.filler_flags.count(True) == 1
    filler = done.candidates[done.filler_flags.index(True)]
    assert filler.code == (DfsEdge(0, 1, C, D, X),)
    assert filler.graphs == {3}
    assert done.final_coverage[3] == 1


def test_completion_reports_edgeless_graph():
    ds = make_dataset([([A, A], [(0, 1, X)]), ([A, B, C], [])], [0, 1])
    res = complete_coverage(ds, mine(ds, MinerConfig(delta=0.5, min_cov=1)))
    assert res.uncoverable == [1]
    assert not any(res.filler_flags)


def test_completion_reports_exhausted_graph():
    # a single-edge graph has one subgraph, so min_cov=2 cannot be met
    ds = make_dataset([([A, A], [(0, 1, X)]), ([A, A, A], [(0, 1, X), (1, 2, X)])], [0, 1])
    res = complete_coverage(ds, mine(ds, MinerConfig(delta=0.5, min_cov=2)))
    assert res.uncoverable == [0]
    assert res.final_coverage == [1, 2]


def test_fillers_ordered_small_first():
    outlier = ([C, D, C, D], [(0, 1, X), (1, 2, X), (2, 3, X)])
    ds = make_dataset([([A, A], [(0, 1, X)])] * 3 + [outlier], [0, 1, 0, 1])
    res = complete_coverage(ds, mine(ds, MinerConfig(delta=0.5, min_cov=3)))
    fillers = [c.code for c, f in zip(res.candidates, res.filler_flags) if f]
    assert [len(c) for c in fillers] == sorted(len(c) for c in fillers)
    assert res.final_coverage[3] >= 3


@pytest.mark.parametrize("seed", range(6))
def test_completion_covers_random_corpora(seed):
    ds = random_corpus(seed, edgeless=True)
    for min_cov in (1, 3):
        res = complete_coverage(ds, mine(ds, MinerConfig(delta=0.5, min_cov=min_cov, gamma=2)))
        edgeless = {g.graph_id for g in ds.graphs if g.num_edges == 0}
        assert set(res.uncoverable) == edgeless
        for g in ds.graphs:
            if g.num_edges:
                assert res.final_coverage[g.graph_id] >= min_cov
        for rec in res.candidates:
            assert rec.graphs == recount_support(ds, rec.code)


def test_json_round_trip(tmp_path):
    ds = random_corpus(1)
    res = complete_coverage(ds, mine(ds, MinerConfig(delta=0.3, min_cov=2)))
    path = tmp_path / "mine.json"
    save_result(res, str(path), ds.name)
    doc = json.loads(path.read_text())
    assert set(doc) >= {"config", "candidates", "coverage", "stats"}
    assert set(doc["candidates"][0]) == {"code", "support", "graphs", "filler"}
    back = load_result(str(path))
    assert back.codes() == res.codes()
    assert [c.graphs for c in back.candidates] == [c.graphs for c in res.candidates]
    assert back.filler_flags == res.filler_flags
    assert result_to_dict(back, ds.name)["candidates"] == doc["candidates"]


def test_mutag_capped_is_fast_and_sound(mutag):
    res = mine(mutag, MinerConfig())
    assert res.stats.wall_seconds < 60
    for rec in res.candidates[:20]:
        assert recount_support(mutag, rec.code) == rec.graphs
