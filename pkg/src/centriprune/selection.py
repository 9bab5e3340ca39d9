"""Stages 1-2: max-min pivot seeding in key space, then threshold-annealed
greedy growth with spatially buffered similarity.

The buffering idea: a candidate's similarity to each selected token is
scaled by ``1 + lam * (nearest-selected distance / dmax)``, so far-away
candidates look more redundant than they are and get deferred. Selection
therefore densifies neighborhoods before expanding outward.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._kernels import ACTIVE, Backend
from .core import (
    GREEDY_STAGE,
    PIVOT_STAGE,
    PrunerConfig,
    SelectionTrace,
    TraceEntry,
)
from .similarity import DistanceMatrix, SimilarityMatrix


@dataclass(frozen=True)
class BssState:
    """Greedy-loop state: the selected set, candidate mask, nearest-selected
    distance cache, loop counter, and current acceptance threshold."""

    selected: tuple
    candidate_mask: np.ndarray
    min_dist: np.ndarray
    loop: int
    tau: float

    @property
    def candidates(self) -> np.ndarray:
        return np.flatnonzero(self.candidate_mask)


def initial_state(pivots, D: DistanceMatrix, tau0: float) -> BssState:
    """State after pivot seeding, with the distance cache primed."""
    pivots = [int(p) for p in pivots]
    n = D.values.shape[0]
    mask = np.ones(n, dtype=bool)
    mask[pivots] = False
    min_dist = D.values[:, pivots].min(axis=1)
    return BssState(
        selected=tuple(pivots),
        candidate_mask=mask,
        min_dist=min_dist,
        loop=0,
        tau=float(tau0),
    )


def init_pivots(keys: np.ndarray, kappa: int) -> list:
    """Seed ``kappa`` pivots: largest-L1 row first, then max-min in key space.

    Ties break toward the lower index. Distance comparisons are done on
    squared Euclidean distances (identical ranking, no sqrt rounding).
    """
    keys = np.asarray(keys, dtype=np.float64)
    kappa = min(kappa, keys.shape[0])
    return [int(i) for i in ACTIVE.maxmin_pivots(keys, kappa)]


def bss_modulated_row(i: int, M: SimilarityMatrix, state: BssState,
                      D: DistanceMatrix, lam: float) -> np.ndarray:
    """Modulated similarities of candidate ``i`` to the selected set:
    ``M_ij * (1 + lam * min_dist_i / dmax)`` for each selected j, in
    selection order."""
    sel = np.asarray(state.selected, dtype=np.int64)
    factor = 1.0 + lam * (state.min_dist[i] / D.dmax)
    return M.values[i, sel] * factor


def non_duplication_scores(M: SimilarityMatrix, state: BssState,
                           D: DistanceMatrix, lam: float) -> np.ndarray:
    """``r_i = 1 - max_j M~_ij`` for every candidate, aligned with
    ``state.candidates``. High r means novel."""
    cand = state.candidates
    sel = np.asarray(state.selected, dtype=np.int64)
    factor = 1.0 + lam * (state.min_dist[cand] / D.dmax)
    m_sel = M.values[np.ix_(cand, sel)]
    return 1.0 - (m_sel * factor[:, None]).max(axis=1)


def update_min_dist(state: BssState, newly_selected: int, D: DistanceMatrix) -> BssState:
    """Fold one acceptance into the distance cache and candidate mask."""
    if not state.candidate_mask[newly_selected]:
        raise ValueError(f"token {newly_selected} is not a candidate")
    mask = state.candidate_mask.copy()
    mask[newly_selected] = False
    min_dist = np.minimum(state.min_dist, D.values[:, newly_selected])
    return replace(
        state,
        selected=state.selected + (int(newly_selected),),
        candidate_mask=mask,
        min_dist=min_dist,
    )


def greedy_select(M: SimilarityMatrix, D: DistanceMatrix, pivots,
                  cfg: PrunerConfig, backend: Backend = None) -> SelectionTrace:
    """Run the annealed batched greedy until ``cfg.retain`` tokens are held.

    ``cfg`` must already be clamped (retain <= N, len(pivots) <= retain).
    When the budget covers every token the loop is skipped and the
    non-pivot tokens are appended in index order (recorded as loop 0 at
    the initial threshold).
    """
    backend = backend or ACTIVE
    n = M.values.shape[0]
    pivots = [int(p) for p in pivots]
    if cfg.retain >= n:
        entries = _pivot_entries(pivots)
        order = len(pivots)
        rest = sorted(set(range(n)) - set(pivots))
        for i in rest:
            order += 1
            entries.append(TraceEntry(index=i, order=order, stage=GREEDY_STAGE,
                                      loop=0, tau_at_accept=cfg.tau0))
        return SelectionTrace(entries=tuple(entries))

    sel, loops, taus = backend.greedy_loop(
        M.values, D.values, D.dmax,
        np.asarray(pivots, dtype=np.int64),
        cfg.retain, cfg.bss_strength, cfg.tau0, cfg.dtau, cfg.batch,
    )
    entries = []
    for rank, (idx, loop, tau) in enumerate(zip(sel, loops, taus), start=1):
        if loop < 0:
            entries.append(TraceEntry(index=int(idx), order=rank, stage=PIVOT_STAGE))
        else:
            entries.append(TraceEntry(index=int(idx), order=rank, stage=GREEDY_STAGE,
                                      loop=int(loop), tau_at_accept=float(tau)))
    return SelectionTrace(entries=tuple(entries))


def _pivot_entries(pivots) -> list:
    return [
        TraceEntry(index=int(p), order=rank, stage=PIVOT_STAGE)
        for rank, p in enumerate(pivots, start=1)
    ]
