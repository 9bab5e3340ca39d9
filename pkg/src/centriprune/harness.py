"""Synthetic token fields, proxy baselines, and spatial/redundancy metrics.

Scenes plant compact high-similarity "object" blobs on a noisier shared
background, emulating the foreground/background structure the pruner is
designed around. Generation constants are fixed so scenes are reproducible
byte-for-byte from (grid, n_objects, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import FeatureSet, PruneResult, PrunerConfig, SelectionTrace, TokenGrid, TraceEntry, validate_config
from .pipeline import prune
from .recovery import assign_clusters, swa_update
from .render import render_selection  # noqa: F401  (harness surface)
from .similarity import cosine_matrix, grid_coordinates, screen_channels

# Scene generation constants. Feature rows are centroid + sigma * N(0, I):
# objects get tight noise (intra-object cosine ~0.93), the background a
# shared centroid with much looser noise.
FEATURE_DIM = 64
KEY_DIM = 16
OBJECT_RADIUS = 2
CENTROID_NORM = 10.0
OBJECT_NOISE = 0.35
BACKGROUND_NOISE = 1.2
PLACEMENT_RETRIES = 100

STRATEGIES = ("bss", "redundancy_only", "random")


class SceneGenerationError(RuntimeError):
    """Could not place the requested objects on the grid."""


@dataclass(frozen=True)
class SyntheticScene:
    grid: TokenGrid
    features: FeatureSet
    object_masks: tuple
    background_ids: tuple
    seed: int


@dataclass(frozen=True)
class MetricsReport:
    strategy: str
    seed: int
    edge_token_count: int
    dispersion: float
    redundancy: float
    object_recall: float


def gen_scene(grid: TokenGrid, n_objects: int, seed: int) -> SyntheticScene:
    """Deterministic synthetic scene with ``n_objects`` disjoint blobs."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n = grid.token_count

    bg_hidden = _unit(rng.standard_normal(FEATURE_DIM)) * CENTROID_NORM
    bg_keys = _unit(rng.standard_normal(KEY_DIM)) * CENTROID_NORM
    hidden = bg_hidden + BACKGROUND_NOISE * rng.standard_normal((n, FEATURE_DIM))
    keys = bg_keys + BACKGROUND_NOISE * rng.standard_normal((n, KEY_DIM))

    masks = []
    taken = set()
    for _ in range(n_objects):
        mask = _place_blob(grid, rng, taken)
        taken.update(mask)
        masks.append(mask)
        c_hidden = _unit(rng.standard_normal(FEATURE_DIM)) * CENTROID_NORM
        c_keys = _unit(rng.standard_normal(KEY_DIM)) * CENTROID_NORM
        for i in mask:
            hidden[i] = c_hidden + OBJECT_NOISE * rng.standard_normal(FEATURE_DIM)
            keys[i] = c_keys + OBJECT_NOISE * rng.standard_normal(KEY_DIM)

    background = tuple(i for i in range(n) if i not in taken)
    # round-trip through float32 so in-memory scenes match file-loaded ones
    features = FeatureSet(hidden=hidden.astype(np.float32),
                          keys=keys.astype(np.float32))
    return SyntheticScene(
        grid=grid,
        features=features,
        object_masks=tuple(masks),
        background_ids=background,
        seed=seed,
    )


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _place_blob(grid: TokenGrid, rng, taken) -> tuple:
    r = OBJECT_RADIUS
    if grid.width < 2 * r + 1 or grid.height < 2 * r + 1:
        raise SceneGenerationError(
            f"grid {grid.height}x{grid.width} too small for radius-{r} objects"
        )
    per_frame = grid.height * grid.width
    for _ in range(PLACEMENT_RETRIES):
        t = int(rng.integers(0, grid.frames))
        cx = int(rng.integers(r, grid.width - r))
        cy = int(rng.integers(r, grid.height - r))
        mask = []
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                if dx * dx + dy * dy <= r * r:
                    mask.append(t * per_frame + (cy + dy) * grid.width + (cx + dx))
        if not taken.intersection(mask):
            return tuple(mask)
    raise SceneGenerationError(
        f"could not place a disjoint object after {PLACEMENT_RETRIES} attempts"
    )


def run_strategy(scene: SyntheticScene, strategy: str, cfg: PrunerConfig,
                 seed: int) -> PruneResult:
    """Run one selection strategy on a scene.

    ``bss`` is the full pipeline, ``redundancy_only`` forces the spatial
    buffering strength to zero, ``random`` keeps a uniform sample (recovery
    is still applied so results stay comparable).
    """
    if strategy == "bss":
        return prune(scene.features, scene.grid, cfg)
    if strategy == "redundancy_only":
        return prune(scene.features, scene.grid, replace(cfg, bss_strength=0.0))
    if strategy == "random":
        return _random_prune(scene, cfg, seed)
    raise ValueError(f"unknown strategy {strategy!r} (expected one of {STRATEGIES})")


def _random_prune(scene: SyntheticScene, cfg: PrunerConfig, seed: int) -> PruneResult:
    cfg = validate_config(cfg, scene.grid, scene.features)
    rng = np.random.Generator(np.random.PCG64(seed))
    n = scene.grid.token_count
    picks = rng.choice(n, size=cfg.retain, replace=False)
    # provenance fields are vacuous for the random baseline
    entries = tuple(
        TraceEntry(index=int(i), order=rank, stage="greedy", loop=0,
                   tau_at_accept=None)
        for rank, i in enumerate(picks, start=1)
    )
    trace = SelectionTrace(entries=entries)
    m = cosine_matrix(screen_channels(scene.features.hidden, cfg.channels))
    assignment = assign_clusters(trace, m)
    updated = swa_update(scene.features.hidden, assignment, m, cfg.blend, cfg.eps,
                         raw_weights=cfg.raw_swa_weights)
    return PruneResult(
        trace=trace,
        clusters={j: assignment.members[j] for j in trace.indices},
        updated_hidden=updated,
        config_echo=cfg,
        token_count=n,
    )


def compute_metrics(result: PruneResult, scene: SyntheticScene, strategy: str = "",
                    chebyshev_radius: int = 1) -> MetricsReport:
    """Spatial and redundancy statistics of one selection."""
    grid = scene.grid
    coords = grid_coordinates(grid)
    selected = np.asarray(result.trace.indices, dtype=np.int64)

    x = coords[selected, 0]
    y = coords[selected, 1]
    edge = (x == 0) | (x == grid.width - 1) | (y == 0) | (y == grid.height - 1)
    edge_count = int(edge.sum())

    if len(selected) < 2:
        dispersion = 0.0
        redundancy = 0.0
    else:
        pts = coords[selected]
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        dispersion = float(dist.min(axis=1).mean())
        m = cosine_matrix(
            screen_channels(scene.features.hidden, result.config_echo.channels)
        ).values
        sub = m[np.ix_(selected, selected)].copy()
        np.fill_diagonal(sub, -np.inf)
        redundancy = float(sub.max(axis=1).mean())

    object_tokens = sorted(set().union(*scene.object_masks)) if scene.object_masks else []
    if object_tokens:
        obj = coords[np.asarray(object_tokens, dtype=np.int64)]
        cheb = np.abs(obj[:, None, :] - coords[selected][None, :, :]).max(axis=2)
        covered = (cheb.min(axis=1) <= chebyshev_radius).sum()
        recall = float(covered / len(object_tokens))
    else:
        recall = 1.0

    return MetricsReport(
        strategy=strategy,
        seed=scene.seed,
        edge_token_count=edge_count,
        dispersion=dispersion,
        redundancy=redundancy,
        object_recall=recall,
    )


def corpus_experiment(n_seeds: int, grid: TokenGrid, cfg: PrunerConfig,
                      strategies=STRATEGIES, n_objects: int = 3,
                      first_seed: int = 0):
    """Run every strategy over seeds first_seed..first_seed+n_seeds-1.

    Returns (records, aggregates): per-run metric reports in deterministic
    order, and per-strategy median/mean of each metric.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    scenes = [gen_scene(grid, n_objects, seed)
              for seed in range(first_seed, first_seed + n_seeds)]
    records = []
    for strategy in strategies:
        for scene in scenes:
            result = run_strategy(scene, strategy, cfg, scene.seed)
            records.append(compute_metrics(result, scene, strategy=strategy))

    aggregates = {}
    for strategy in strategies:
        rows = [r for r in records if r.strategy == strategy]
        aggregates[strategy] = {
            name: {
                "median": float(np.median([getattr(r, name) for r in rows])),
                "mean": float(np.mean([getattr(r, name) for r in rows])),
            }
            for name in ("edge_token_count", "dispersion", "redundancy", "object_recall")
        }
    return records, aggregates


CSV_HEADER = "strategy,seed,edge_tokens,dispersion,redundancy,object_recall"


def metrics_to_csv(records) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.strategy},{r.seed},{r.edge_token_count},"
            f"{r.dispersion!r},{r.redundancy!r},{r.object_recall!r}"
        )
    return "\n".join(lines) + "\n"
