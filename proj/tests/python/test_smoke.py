import math

import numpy as np
import pytest

import simplexlab as sl


def test_simplex_vertices():
    v = sl.build_simplex(3, 2, 1.0)
    assert v.shape == (3, 2)
    assert np.allclose(v.sum(axis=0), 0.0, atol=1e-12)
    assert np.allclose(np.linalg.norm(v, axis=1), 1.0)
    assert np.allclose(v[0] @ v[1], -0.5)
    assert sl.verify_simplex(v, 1.0)["pass"]
    with pytest.raises(ValueError, match="K <= h\\+1"):
        sl.build_simplex(5, 3, 1.0)


def test_counts_are_exact_python_ints():
    assert sl.multichoose(12, 9) == 167960
    assert sl.multichoose(100, 30) == math.comb(129, 30)
    seqs = sl.batches(3, 2)
    assert seqs == [[0, 0], [0, 1], [0, 2], [1, 1], [1, 2], [2, 2]]
    for rank, seq in enumerate(seqs):
        assert sl.rank_batch(3, seq) == rank
        assert sl.unrank_batch(3, 2, rank) == seq


def test_toy_bound_and_collapsed_loss():
    labels = [c for c in range(3) for _ in range(4)]
    bound = sl.sc_bound(9, 1.0, labels)
    assert bound["mean"] == pytest.approx(12.12015, abs=1e-4)
    small = [0, 0, 1, 1]
    z = sl.collapsed_config(2, 2, 1.0, small)
    total, mean = sl.sc_total_loss(z, small, 3)
    assert total == pytest.approx(sl.sc_bound(3, 1.0, small)["total"], rel=1e-9)
    assert mean == pytest.approx(total / sl.multichoose(4, 3))


def test_ce_bound_matches_collapsed_configuration():
    labels = [0, 0, 1, 1, 2, 2]
    z = sl.collapsed_config(3, 2, 1.0, labels)
    w = 2.0 * sl.build_simplex(3, 2, 1.0)
    loss = sl.ce_loss(z, w, labels)
    assert loss == pytest.approx(sl.ce_bound_rw(3, 1.0, 2.0)["value"], rel=1e-12)
    assert sl.equality_report_ce(z, w, labels)["pass"]
    r = sl.solve_r_w(3, 1.0, 0.01)
    assert r > 0


def test_optimizers_run():
    labels = [0, 0, 1, 1]
    z0 = sl.random_sphere_config(4, 2, 1.0, 3)
    traj = sl.optimize_sc(z0, labels, 3, steps=200, lr=0.5, log_every=50)
    assert traj["records"][-1]["loss"] <= traj["records"][0]["loss"]
    assert traj["final_loss"] >= sl.sc_bound(3, 1.0, labels)["mean"] - 1e-9

    points, slot_labels, loss = sl.optimize_single_batch([9], 2, steps=2000, lr=0.5)
    assert points.shape == (9, 2)
    assert slot_labels == [0] * 9
    assert loss == pytest.approx(9 * math.log(8), rel=1e-8)


def test_geometry_stats_and_budget_error():
    labels = [0, 0, 1, 1, 2, 2]
    z = sl.collapsed_config(3, 2, 1.0, labels)
    stats = sl.geometry_stats(z, labels)
    assert stats["across_means_summary"]["min"] == pytest.approx(1 / 3)
    assert stats["across_means_summary"]["min"] == pytest.approx(stats["separation_target"])
    big = sl.random_sphere_config(30, 2, 1.0, 0)
    with pytest.raises(sl.BudgetExceeded):
        sl.sc_total_loss(big, [i % 3 for i in range(30)], 9, budget=1000)
