"""Numpy implementations of the selection kernels.

These are the fallback for the compiled extension. Both backends must
produce bit-identical outputs: every floating-point expression here is
written as a sequence of elementwise IEEE operations that the compiled
kernel replays in the same order (division before the lambda product,
no fused multiply-add, min/max as pure selections).
"""

from __future__ import annotations

import numpy as np


def maxmin_pivots(keys: np.ndarray, kappa: int) -> np.ndarray:
    """Max-min pivot seeding in key space.

    The first pivot is the row with the largest L1 norm; each subsequent
    pivot maximizes its minimum distance to the pivots chosen so far.
    Comparisons use squared Euclidean distances (same ranking, no sqrt);
    argmax ties break toward the lower index.
    """
    k = np.ascontiguousarray(keys, dtype=np.float64)
    n = k.shape[0]
    kappa = min(kappa, n)
    out = np.empty(kappa, dtype=np.int64)
    out[0] = int(np.argmax(np.abs(k).sum(axis=1)))
    if kappa == 1:
        return out
    diff = k - k[out[0]]
    min_sq = (diff * diff).sum(axis=1)
    min_sq[out[0]] = -np.inf
    for t in range(1, kappa):
        j = int(np.argmax(min_sq))
        out[t] = j
        diff = k - k[j]
        sq = (diff * diff).sum(axis=1)
        np.minimum(min_sq, sq, out=min_sq)
        min_sq[j] = -np.inf
    return out


def greedy_loop(
    M: np.ndarray,
    D: np.ndarray,
    dmax: float,
    pivots: np.ndarray,
    retain: int,
    lam: float,
    tau0: float,
    dtau: float,
    batch: int,
):
    """Threshold-annealed batched greedy selection.

    Per annealing loop: score every candidate by non-duplication
    ``r_i = 1 - max_j M_ij * (1 + lam * min_dist_i / dmax)``, sort descending
    (ties toward lower index), then walk batches of ``batch`` candidates.
    Each batch is tested against a snapshot of the selected set taken at
    batch start: accepted candidates within a batch do not see each other,
    and the distance cache is refreshed only between batches. The threshold
    rises by ``dtau`` after every full pass until ``retain`` tokens are held.

    Returns (indices, loops, taus) covering pivots (loop -1, tau NaN) and
    greedy acceptances in selection order.
    """
    n = M.shape[0]
    pivots = np.asarray(pivots, dtype=np.int64)
    selected = list(int(p) for p in pivots)
    sel_loops = [-1] * len(selected)
    sel_taus = [np.nan] * len(selected)

    is_cand = np.ones(n, dtype=bool)
    is_cand[pivots] = False
    min_d = D[:, pivots].min(axis=1)

    tau = float(tau0)
    t = 0
    while len(selected) < retain:
        cand = np.flatnonzero(is_cand)
        factor = 1.0 + lam * (min_d[cand] / dmax)
        m_sel = M[np.ix_(cand, np.asarray(selected, dtype=np.int64))]
        r = 1.0 - (m_sel * factor[:, None]).max(axis=1)
        ranked = cand[np.lexsort((cand, -r))]

        for start in range(0, len(ranked), batch):
            chunk = ranked[start:start + batch]
            n_snap = len(selected)
            snap = np.asarray(selected[:n_snap], dtype=np.int64)
            accepted = []
            for i in chunk:
                if len(selected) == retain:
                    break
                f = 1.0 + lam * (min_d[i] / dmax)
                worst = (M[i, snap] * f).max()
                if worst < tau:
                    selected.append(int(i))
                    sel_loops.append(t)
                    sel_taus.append(tau)
                    accepted.append(int(i))
            if accepted:
                is_cand[accepted] = False
                np.minimum(min_d, D[:, accepted].min(axis=1), out=min_d)
            if len(selected) == retain:
                break
        if len(selected) == retain:
            break
        tau = tau + dtau
        t += 1

    return (
        np.asarray(selected, dtype=np.int64),
        np.asarray(sel_loops, dtype=np.int64),
        np.asarray(sel_taus, dtype=np.float64),
    )
