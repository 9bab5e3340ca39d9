"""Brute-force reference pipeline.

Every stage is recoded from scratch against the same contracts as the
optimized path: no distance cache (nearest-selected distances recomputed
from coordinates per batch), modulated similarities rebuilt per batch, the
similarity table rebuilt per stage, per-row reductions instead of one big
matrix product. Shares only the core types, so trace agreement between the
two paths is a meaningful check rather than a tautology.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    FeatureSet,
    GREEDY_STAGE,
    PIVOT_STAGE,
    PruneResult,
    PrunerConfig,
    SelectionTrace,
    TokenGrid,
    TraceEntry,
    validate_config,
)
from .similarity import ZERO_NORM_EPS


def _ref_coords(grid: TokenGrid):
    coords = []
    per_frame = grid.height * grid.width
    for i in range(grid.token_count):
        t, rem = divmod(i, per_frame)
        if grid.frames == 1:
            coords.append((rem % grid.width, rem // grid.width))
        else:
            coords.append((rem % grid.width, rem // grid.width, t))
    return coords


def _ref_dist(a, b) -> float:
    return math.sqrt(sum((p - q) ** 2 for p, q in zip(a, b)))


def _ref_dmax(grid: TokenGrid) -> float:
    s = grid.height**2 + grid.width**2
    if grid.frames > 1:
        s += grid.frames**2
    return math.sqrt(s)


def _ref_reduced(hidden: np.ndarray, q: int) -> np.ndarray:
    d = hidden.shape[1]
    variances = []
    for c in range(d):
        col = hidden[:, c]
        mu = col.mean()
        variances.append(float(((col - mu) ** 2).mean()))
    ranked = sorted(range(d), key=lambda c: (-variances[c], c))
    ids = sorted(ranked[: min(q, d)])
    return hidden[:, ids]


def _ref_cosine(reduced: np.ndarray) -> np.ndarray:
    n = reduced.shape[0]
    norms = np.linalg.norm(reduced, axis=1)
    m = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        if norms[i] < ZERO_NORM_EPS:
            m[i, :] = 0.0
            m[i, i] = 1.0
            continue
        row = (reduced @ reduced[i]) / (norms * norms[i])
        row[norms < ZERO_NORM_EPS] = 0.0
        m[i, :] = row
    return m


def _ref_pivots(keys: np.ndarray, kappa: int) -> list:
    n = keys.shape[0]
    best_l1, first = -math.inf, 0
    for j in range(n):
        l1 = float(np.abs(keys[j]).sum())
        if l1 > best_l1:
            best_l1, first = l1, j
    chosen = [first]
    while len(chosen) < kappa:
        best_d2, pick = -math.inf, None
        for j in range(n):
            if j in chosen:
                continue
            d2 = min(float(np.dot(keys[j] - keys[p], keys[j] - keys[p])) for p in chosen)
            if d2 > best_d2:
                best_d2, pick = d2, j
        chosen.append(pick)
    return chosen


def _ref_min_dist(i, selected, coords) -> float:
    return min(_ref_dist(coords[i], coords[j]) for j in selected)


def _ref_modulated_max(i, selected, m, delta, lam, dmax) -> float:
    f = 1.0 + lam * (delta / dmax)
    return max(m[i, j] * f for j in selected)


def _ref_greedy(m, coords, dmax, pivots, cfg: PrunerConfig):
    """Returns a list of (index, loop, tau) with loop -1 / tau None for pivots."""
    n = m.shape[0]
    entries = [(p, -1, None) for p in pivots]
    selected = list(pivots)
    if cfg.retain >= n:
        for i in sorted(set(range(n)) - set(selected)):
            entries.append((i, 0, cfg.tau0))
        return entries

    tau = float(cfg.tau0)
    t = 0
    lam = cfg.bss_strength
    while len(selected) < cfg.retain:
        candidates = [i for i in range(n) if i not in selected]
        scores = {}
        for i in candidates:
            delta = _ref_min_dist(i, selected, coords)
            scores[i] = 1.0 - _ref_modulated_max(i, selected, m, delta, lam, dmax)
        ranked = sorted(candidates, key=lambda i: (-scores[i], i))
        for start in range(0, len(ranked), cfg.batch):
            chunk = ranked[start:start + cfg.batch]
            snapshot = list(selected)
            for i in chunk:
                if len(selected) == cfg.retain:
                    break
                delta = _ref_min_dist(i, snapshot, coords)
                worst = _ref_modulated_max(i, snapshot, m, delta, lam, dmax)
                if worst < tau:
                    selected.append(i)
                    entries.append((i, t, tau))
            if len(selected) == cfg.retain:
                break
        if len(selected) == cfg.retain:
            break
        tau = tau + cfg.dtau
        t += 1
    return entries


def _ref_clusters(retained, m):
    n = m.shape[0]
    members = {j: [] for j in retained}
    owner = {}
    by_index = sorted(retained)
    for u in range(n):
        if u in members:
            continue
        best, pick = -math.inf, None
        for j in by_index:
            if m[u, j] > best:
                best, pick = m[u, j], j
        owner[u] = pick
        members[pick].append(u)
    return owner, members


def _ref_swa(hidden, retained, members, m, beta, eps, raw_weights):
    rows = []
    for j in retained:
        cluster = members[j]
        if not cluster:
            rows.append(hidden[j].copy())
            continue
        weights = [m[u, j] if raw_weights else max(m[u, j], 0.0) for u in cluster]
        total = sum(weights) + eps
        agg = np.zeros(hidden.shape[1], dtype=np.float64)
        for u, w in zip(cluster, weights):
            agg += (w / total) * hidden[u]
        rows.append(beta * hidden[j] + (1.0 - beta) * agg)
    return np.stack(rows, axis=0)


def reference_prune(features: FeatureSet, grid: TokenGrid, cfg: PrunerConfig) -> PruneResult:
    """Naive full-recomputation pipeline; the equivalence target for the
    optimized path."""
    features.check_grid(grid)
    cfg = validate_config(cfg, grid, features)
    coords = _ref_coords(grid)
    dmax = _ref_dmax(grid)

    m_select = _ref_cosine(_ref_reduced(features.hidden, cfg.channels))
    pivots = _ref_pivots(features.keys, cfg.pivots)
    raw_entries = _ref_greedy(m_select, coords, dmax, pivots, cfg)

    entries = []
    for rank, (idx, loop, tau) in enumerate(raw_entries, start=1):
        if loop < 0:
            entries.append(TraceEntry(index=idx, order=rank, stage=PIVOT_STAGE))
        else:
            entries.append(TraceEntry(index=idx, order=rank, stage=GREEDY_STAGE,
                                      loop=loop, tau_at_accept=tau))
    trace = SelectionTrace(entries=tuple(entries))
    retained = trace.indices

    m_recover = _ref_cosine(_ref_reduced(features.hidden, cfg.channels))
    _, members = _ref_clusters(retained, m_recover)
    updated = _ref_swa(features.hidden, retained, members, m_recover,
                       cfg.blend, cfg.eps, cfg.raw_swa_weights)

    return PruneResult(
        trace=trace,
        clusters={j: tuple(members[j]) for j in retained},
        updated_hidden=updated,
        config_echo=cfg,
        token_count=grid.token_count,
    )


def _modulated_rows(trace: SelectionTrace, M, D, lam: float):
    """Yield (candidate, modulated similarities to the final selected set)."""
    m = M.values
    d = D.values
    selected = trace.indices
    retained = set(selected)
    for i in range(m.shape[0]):
        if i in retained:
            continue
        delta = min(d[i, j] for j in selected)
        f = 1.0 + lam * (delta / D.dmax)
        yield i, [m[i, j] * f for j in selected]


def objective_novelty(trace: SelectionTrace, M, D, lam: float) -> float:
    """Sum of final-state non-duplication scores over the discarded set."""
    return sum(1.0 - max(row) for _, row in _modulated_rows(trace, M, D, lam))


def objective_literal(trace: SelectionTrace, M, D, lam: float) -> float:
    """Sum over candidates of the minimum modulated similarity to the
    selected set. Diagnostic reading of the selection objective; never
    asserted against."""
    return sum(min(row) for _, row in _modulated_rows(trace, M, D, lam))
