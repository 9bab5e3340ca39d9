import numpy as np
import pytest

import centriprune as cp
from centriprune.oracle import objective_literal, objective_novelty, reference_prune

from conftest import random_instance


def test_equivalence_on_randomized_instances():
    for seed in range(40):
        features, grid, cfg = random_instance(seed, n_lo=4, n_hi=64)
        opt = cp.prune(features, grid, cfg)
        ref = reference_prune(features, grid, cfg)
        assert opt.trace == ref.trace
        assert opt.clusters == ref.clusters
        assert np.abs(opt.updated_hidden - ref.updated_hidden).max() <= 1e-6


def test_noop_when_budget_covers_everything():
    rng = np.random.Generator(np.random.PCG64(3))
    grid = cp.TokenGrid(3, 4)
    features = cp.FeatureSet(hidden=rng.standard_normal((12, 5)),
                             keys=rng.standard_normal((12, 3)))
    cfg = cp.PrunerConfig(retain=12)
    opt = cp.prune(features, grid, cfg)
    ref = reference_prune(features, grid, cfg)
    assert opt.trace == ref.trace
    assert sorted(opt.trace.indices) == list(range(12))
    assert all(v == () for v in opt.clusters.values())
    reordered = features.hidden[opt.trace.indices]
    np.testing.assert_array_equal(opt.updated_hidden, reordered)


def test_single_pivot_single_token():
    rng = np.random.Generator(np.random.PCG64(5))
    grid = cp.TokenGrid(2, 3)
    keys = rng.standard_normal((6, 4))
    features = cp.FeatureSet(hidden=rng.standard_normal((6, 5)), keys=keys)
    cfg = cp.PrunerConfig(retain=1, pivots=1)
    ref = reference_prune(features, grid, cfg)
    assert ref.trace.indices == [int(np.argmax(np.abs(keys).sum(axis=1)))]
    opt = cp.prune(features, grid, cfg)
    assert opt.trace == ref.trace


def _tiny_greedy(m, coords, dmax, first, retain, tau0, dtau, lam=0.0):
    """Independent transcription of the annealed selection contract, kept
    deliberately small; batch size 1, no caches."""
    import math
    n = m.shape[0]
    selected = [first]
    tau = tau0
    while len(selected) < retain:
        cand = [i for i in range(n) if i not in selected]
        dist = lambda i: min(math.dist(coords[i], coords[j]) for j in selected)
        score = {i: 1.0 - max(m[i, j] * (1.0 + lam * (dist(i) / dmax)) for j in selected)
                 for i in cand}
        for i in sorted(cand, key=lambda i: (-score[i], i)):
            if len(selected) == retain:
                break
            worst = max(m[i, j] * (1.0 + lam * (dist(i) / dmax)) for j in selected)
            if worst < tau:
                selected.append(i)
        tau = tau + dtau
    return selected


@pytest.mark.parametrize("tau0", [0.7, 1.0])
def test_reference_matches_independent_tiny_greedy(tau0):
    rng = np.random.Generator(np.random.PCG64(23))
    for _ in range(6):
        h = int(rng.integers(2, 5))
        w = int(rng.integers(2, 5))
        grid = cp.TokenGrid(h, w)
        n = grid.token_count
        if n > 16:
            continue
        features = cp.FeatureSet(hidden=rng.standard_normal((n, 8)),
                                 keys=rng.standard_normal((n, 4)))
        retain = int(rng.integers(1, n))
        cfg = cp.PrunerConfig(retain=retain, pivots=1, bss_strength=0.0,
                              tau0=tau0, batch=1, channels=8)
        ref = reference_prune(features, grid, cfg)
        m = cp.cosine_matrix(cp.screen_channels(features.hidden, 8)).values
        coords = [cp.coords_of(i, grid) for i in range(n)]
        first = int(np.argmax(np.abs(features.keys).sum(axis=1)))
        tiny = _tiny_greedy(m, coords, cp.d_max(grid), first, retain,
                            tau0, cfg.dtau)
        assert ref.trace.indices == tiny
        assert cp.prune(features, grid, cfg).trace.indices == tiny


def _final_state_inputs(seed=29, n=8):
    rng = np.random.Generator(np.random.PCG64(seed))
    grid = cp.TokenGrid(2, n // 2)
    features = cp.FeatureSet(hidden=rng.standard_normal((n, 6)),
                             keys=rng.standard_normal((n, 3)))
    cfg = cp.PrunerConfig(retain=3, pivots=2, channels=6)
    res = cp.prune(features, grid, cfg)
    m = cp.cosine_matrix(cp.screen_channels(features.hidden, 6))
    d = cp.distance_matrix(grid)
    return res.trace, m, d


def test_objectives_zero_when_everything_selected():
    rng = np.random.Generator(np.random.PCG64(31))
    grid = cp.TokenGrid(2, 2)
    features = cp.FeatureSet(hidden=rng.standard_normal((4, 3)),
                             keys=rng.standard_normal((4, 2)))
    res = cp.prune(features, grid, cp.PrunerConfig(retain=4))
    m = cp.cosine_matrix(cp.screen_channels(features.hidden, 3))
    d = cp.distance_matrix(grid)
    assert objective_novelty(res.trace, m, d, 0.5) == 0.0
    assert objective_literal(res.trace, m, d, 0.5) == 0.0


def test_objective_novelty_zero_for_identical_tokens():
    hidden = np.tile([1.0, 2.0, -1.0], (6, 1))
    keys = np.tile([0.5, 0.5], (6, 1))
    features = cp.FeatureSet(hidden=hidden, keys=keys)
    grid = cp.TokenGrid(2, 3)
    res = cp.prune(features, grid, cp.PrunerConfig(retain=2, pivots=1,
                                                   bss_strength=0.0, tau0=1.0))
    m = cp.cosine_matrix(cp.screen_channels(hidden, 3))
    d = cp.distance_matrix(grid)
    assert abs(objective_novelty(res.trace, m, d, 0.0)) < 1e-9


def test_objective_literal_single_selected():
    trace, m, d = _final_state_inputs()
    single = cp.SelectionTrace(entries=(trace.entries[0],))
    j0 = single.indices[0]
    expected = 0.0
    for i in range(m.values.shape[0]):
        if i == j0:
            continue
        f = 1.0 + 0.5 * (d.values[i, j0] / d.dmax)
        expected += m.values[i, j0] * f
    assert objective_literal(single, m, d, 0.5) == pytest.approx(expected, abs=1e-12)


def test_objectives_match_hand_recomputation():
    trace, m, d = _final_state_inputs()
    selected = trace.indices
    lam = 0.5
    novelty = 0.0
    literal = 0.0
    for i in range(m.values.shape[0]):
        if i in selected:
            continue
        delta = min(d.values[i, j] for j in selected)
        tilde = [m.values[i, j] * (1.0 + lam * (delta / d.dmax)) for j in selected]
        novelty += 1.0 - max(tilde)
        literal += min(tilde)
    assert objective_novelty(trace, m, d, lam) == pytest.approx(novelty, abs=1e-12)
    assert objective_literal(trace, m, d, lam) == pytest.approx(literal, abs=1e-12)
