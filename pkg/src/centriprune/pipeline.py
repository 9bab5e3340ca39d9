"""End-to-end pruning: screen channels, build similarity and distance tables,
seed pivots, grow the selection, recover discarded information."""

from __future__ import annotations

import time

from ._kernels import Backend
from .core import FeatureSet, PruneResult, PrunerConfig, TokenGrid, validate_config
from .recovery import assign_clusters, swa_update
from .selection import greedy_select, init_pivots
from .similarity import cosine_matrix, distance_matrix, screen_channels

STAGES = ("screening", "similarity", "selection", "recovery")


class StageTimer:
    """Wall-clock per stage, for the bench command."""

    def __init__(self):
        self.seconds = {}

    def measure(self, stage):
        timer = self

        class _Ctx:
            def __enter__(self):
                self._t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.seconds[stage] = timer.seconds.get(stage, 0.0) + (
                    time.perf_counter() - self._t0
                )
                return False

        return _Ctx()


def prune(features: FeatureSet, grid: TokenGrid, cfg: PrunerConfig,
          timer: StageTimer = None, backend: Backend = None) -> PruneResult:
    """Run the full pipeline and return the trace, clusters, and updated
    hidden states. ``cfg`` is validated and clamped here; the clamped config
    is echoed in the result."""
    features.check_grid(grid)
    cfg = validate_config(cfg, grid, features)
    timer = timer or StageTimer()

    with timer.measure("screening"):
        reduced = screen_channels(features.hidden, cfg.channels)
    with timer.measure("similarity"):
        M = cosine_matrix(reduced)
        D = distance_matrix(grid)
    with timer.measure("selection"):
        pivots = init_pivots(features.keys, cfg.pivots)
        trace = greedy_select(M, D, pivots, cfg, backend=backend)
    with timer.measure("recovery"):
        assignment = assign_clusters(trace, M)
        updated = swa_update(features.hidden, assignment, M, cfg.blend, cfg.eps,
                             raw_weights=cfg.raw_swa_weights)

    clusters = {j: assignment.members[j] for j in trace.indices}
    return PruneResult(
        trace=trace,
        clusters=clusters,
        updated_hidden=updated,
        config_echo=cfg,
        token_count=grid.token_count,
    )
