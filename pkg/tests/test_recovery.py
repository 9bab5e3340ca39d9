import numpy as np

import centriprune as cp
from centriprune.recovery import ClusterAssignment
from centriprune.similarity import SimilarityMatrix

from conftest import random_instance


def _trace(indices):
    entries = []
    for rank, i in enumerate(indices, start=1):
        stage = "pivot" if rank == 1 else "greedy"
        tau = None if rank == 1 else 0.8
        loop = -1 if rank == 1 else 0
        entries.append(cp.TraceEntry(index=i, order=rank, stage=stage,
                                     loop=loop, tau_at_accept=tau))
    return cp.SelectionTrace(entries=tuple(entries))


def test_assign_nothing_discarded():
    m = SimilarityMatrix(values=np.eye(3))
    trace = _trace([2, 0, 1])
    a = cp.assign_clusters(trace, m)
    assert a.owner == {}
    assert all(v == () for v in a.members.values())
    assert set(a.members) == {0, 1, 2}


def test_assign_duplicate_goes_to_twin():
    rng = np.random.Generator(np.random.PCG64(4))
    x = rng.standard_normal((4, 6))
    x[3] = x[1]  # token 3 duplicates retained token 1
    m = cp.cosine_matrix(cp.ReducedFeatures(matrix=x, channel_ids=tuple(range(6))))
    a = cp.assign_clusters(_trace([0, 1, 2]), m)
    assert a.owner[3] == 1


def test_assign_matches_bruteforce_argmax():
    rng = np.random.Generator(np.random.PCG64(6))
    x = rng.standard_normal((16, 8))
    m = cp.cosine_matrix(cp.ReducedFeatures(matrix=x, channel_ids=tuple(range(8))))
    retained = [5, 0, 11, 9]
    a = cp.assign_clusters(_trace(retained), m)
    for u in range(16):
        if u in retained:
            continue
        best = max(sorted(retained), key=lambda j: (m.values[u, j], -j))
        assert a.owner[u] == best
    # members is the exact inverse of owner
    for j, mem in a.members.items():
        assert all(a.owner[u] == j for u in mem)
    assert sorted(sum((list(v) for v in a.members.values()), [])) == sorted(a.owner)


def test_assign_tie_breaks_lowest_retained_index():
    values = np.array([
        [1.0, 0.0, 0.0, 0.5],
        [0.0, 1.0, 0.0, 0.5],
        [0.0, 0.0, 1.0, 0.1],
        [0.5, 0.5, 0.1, 1.0],
    ])
    m = SimilarityMatrix(values=values)
    # retained 2 and 1 and 0; token 3 ties between owners 0 and 1
    a = cp.assign_clusters(_trace([2, 1, 0]), m)
    assert a.owner[3] == 0


def test_swa_empty_cluster_bit_unchanged():
    rng = np.random.Generator(np.random.PCG64(8))
    hidden = rng.standard_normal((3, 5))
    m = SimilarityMatrix(values=np.eye(3))
    a = ClusterAssignment(owner={2: 0}, members={0: (2,), 1: ()},
                          retained_order=(0, 1))
    out = cp.swa_update(hidden, a, m, beta=0.3, eps=1e-8)
    assert out[1].tobytes() == hidden[1].tobytes()


def test_swa_single_member_70_percent():
    hidden = np.array([[2.0, 0.0], [10.0, 4.0]])
    m = SimilarityMatrix(values=np.array([[1.0, 1.0], [1.0, 1.0]]))
    a = ClusterAssignment(owner={1: 0}, members={0: (1,)}, retained_order=(0,))
    out = cp.swa_update(hidden, a, m, beta=0.3, eps=1e-12)
    expected = 0.3 * hidden[0] + 0.7 * hidden[1]
    np.testing.assert_allclose(out[0], expected, atol=1e-9)


def test_swa_two_equal_members_scaled_midpoint():
    s, eps = 0.4, 1e-8
    hidden = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
    values = np.array([
        [1.0, s, s],
        [s, 1.0, 0.0],
        [s, 0.0, 1.0],
    ])
    m = SimilarityMatrix(values=values)
    a = ClusterAssignment(owner={1: 0, 2: 0}, members={0: (1, 2)},
                          retained_order=(0,))
    out = cp.swa_update(hidden, a, m, beta=0.3, eps=eps)
    midpoint = (hidden[1] + hidden[2]) / 2.0
    expected = 0.3 * hidden[0] + 0.7 * (2 * s / (2 * s + eps)) * midpoint
    np.testing.assert_allclose(out[0], expected, atol=1e-12)


def test_swa_weight_sums_near_one():
    rng = np.random.Generator(np.random.PCG64(10))
    for _ in range(20):
        k = int(rng.integers(1, 8))
        w = rng.uniform(0.01, 1.0, size=k)
        total = w.sum()
        alpha = w / (total + 1e-8)
        s = alpha.sum()
        if total >= 1e-2:
            assert 1 - 1e-6 < s < 1
        assert (alpha >= 0).all()


def test_swa_negative_weights_clamped():
    hidden = np.array([[1.0, 1.0], [100.0, -100.0], [3.0, 3.0]])
    values = np.array([
        [1.0, -0.9, 0.5],
        [-0.9, 1.0, 0.0],
        [0.5, 0.0, 1.0],
    ])
    m = SimilarityMatrix(values=values)
    a = ClusterAssignment(owner={1: 0, 2: 0}, members={0: (1, 2)},
                          retained_order=(0,))
    out = cp.swa_update(hidden, a, m, beta=0.3, eps=1e-8)
    # token 1's negative similarity contributes no mass
    expected = 0.3 * hidden[0] + 0.7 * (0.5 / (0.5 + 1e-8)) * hidden[2]
    np.testing.assert_allclose(out[0], expected, atol=1e-9)
    # raw-signed mode keeps it
    out_raw = cp.swa_update(hidden, a, m, beta=0.3, eps=1e-8, raw_weights=True)
    assert abs(out_raw[0][0] - expected[0]) > 1.0


def test_swa_duplicate_idempotence():
    rng = np.random.Generator(np.random.PCG64(12))
    base = rng.standard_normal((3, 6))
    hidden = np.vstack([base, base[0], base[2], base[2]])
    m = cp.cosine_matrix(cp.ReducedFeatures(matrix=hidden, channel_ids=tuple(range(6))))
    trace = _trace([0, 1, 2])
    a = cp.assign_clusters(trace, m)
    out = cp.swa_update(hidden, a, m, beta=0.3, eps=1e-8)
    np.testing.assert_allclose(out, base, atol=1e-6)


def test_swa_blend_bound_componentwise():
    # out = beta*H_j + (1-beta)*E_j where E_j is a subconvex combination of
    # the cluster rows (weights >= 0, sum <= 1), so componentwise:
    # beta*Hj + (1-beta)*min(0, cluster.min()) <= out <= beta*Hj + (1-beta)*max(0, cluster.max())
    rng = np.random.Generator(np.random.PCG64(14))
    beta = 0.3
    hidden = rng.standard_normal((6, 4))
    m = cp.cosine_matrix(cp.ReducedFeatures(matrix=hidden, channel_ids=tuple(range(4))))
    trace = _trace([1, 4])
    a = cp.assign_clusters(trace, m)
    out = cp.swa_update(hidden, a, m, beta=beta, eps=1e-8)
    for row, j in enumerate(a.retained_order):
        cluster = list(a.members[j])
        if not cluster:
            continue
        pts = hidden[cluster]
        lo = beta * hidden[j] + (1 - beta) * np.minimum(0.0, pts.min(axis=0)) - 1e-9
        hi = beta * hidden[j] + (1 - beta) * np.maximum(0.0, pts.max(axis=0)) + 1e-9
        assert (out[row] >= lo).all() and (out[row] <= hi).all()


def test_full_pipeline_partition_property():
    for seed in (0, 5, 9):
        features, grid, cfg = random_instance(seed)
        res = cp.prune(features, grid, cfg)
        seen = set(res.trace.indices)
        for members in res.clusters.values():
            seen.update(members)
        assert seen == set(range(grid.token_count))
