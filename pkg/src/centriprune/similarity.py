"""O(N^2) preprocessing: variance-based channel screening, cosine similarity,
and the all-pairs spatial distance table."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ResourceLimitError, TokenGrid, d_max

# Dense N x N tables; cap keeps a runaway token count from exhausting memory
# (8192^2 float64 ~= 512 MB per table).
DEFAULT_TOKEN_CAP = 8192

# Rows with L2 norm below this are treated as degenerate: similarity 0 to
# everything else, 1 on their own diagonal.
ZERO_NORM_EPS = 1e-12


@dataclass(frozen=True)
class ReducedFeatures:
    """Hidden states restricted to the highest-variance channels.

    ``channel_ids`` holds the original column indices, sorted ascending.
    """

    matrix: np.ndarray
    channel_ids: tuple


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric N x N cosine similarity table."""

    values: np.ndarray


@dataclass(frozen=True)
class DistanceMatrix:
    """All-pairs grid distances plus the normalization constant ``dmax``."""

    values: np.ndarray
    dmax: float


def channel_variances(hidden: np.ndarray) -> np.ndarray:
    """Per-channel variance across tokens (population variance, divisor N)."""
    h = np.asarray(hidden, dtype=np.float64)
    return h.var(axis=0)


def screen_channels(hidden: np.ndarray, q: int) -> ReducedFeatures:
    """Keep the ``q`` highest-variance channels of ``hidden``.

    Variance ties break toward the lower column index; the kept columns are
    returned in ascending original order so the output is deterministic.
    """
    h = np.asarray(hidden, dtype=np.float64)
    d = h.shape[1]
    q_eff = min(q, d)
    var = h.var(axis=0)
    # lexsort: primary key -var ascending (variance descending), ties by index
    ranked = np.lexsort((np.arange(d), -var))
    ids = np.sort(ranked[:q_eff])
    return ReducedFeatures(
        matrix=np.ascontiguousarray(h[:, ids]),
        channel_ids=tuple(int(c) for c in ids),
    )


def cosine_matrix(reduced: ReducedFeatures) -> SimilarityMatrix:
    """Cosine similarity of all row pairs of the reduced features.

    Zero-norm rows get similarity 0 to every other row and 1 on the diagonal.
    """
    x = np.asarray(reduced.matrix, dtype=np.float64)
    norms = np.sqrt((x * x).sum(axis=1))
    degenerate = norms < ZERO_NORM_EPS
    safe = np.where(degenerate, 1.0, norms)
    xn = x / safe[:, None]
    m = xn @ xn.T
    if degenerate.any():
        m[degenerate, :] = 0.0
        m[:, degenerate] = 0.0
        m[degenerate, degenerate] = 1.0
    return SimilarityMatrix(values=m)


def distance_matrix(grid: TokenGrid, max_tokens: int = DEFAULT_TOKEN_CAP) -> DistanceMatrix:
    """All-pairs Euclidean grid distances.

    Raises :class:`ResourceLimitError` when the grid exceeds ``max_tokens``.
    """
    n = grid.token_count
    if n > max_tokens:
        raise ResourceLimitError(
            f"grid has {n} tokens, above the dense-matrix cap of {max_tokens}"
        )
    coords = grid_coordinates(grid)
    diff = coords[:, None, :] - coords[None, :, :]
    values = np.sqrt((diff * diff).sum(axis=2))
    return DistanceMatrix(values=values, dmax=d_max(grid))


def grid_coordinates(grid: TokenGrid) -> np.ndarray:
    """Integer coordinate array, one row per flat token index."""
    n = grid.token_count
    i = np.arange(n)
    per_frame = grid.height * grid.width
    rem = i % per_frame
    x = rem % grid.width
    y = rem // grid.width
    if grid.frames == 1:
        return np.stack([x, y], axis=1).astype(np.float64)
    t = i // per_frame
    return np.stack([x, y, t], axis=1).astype(np.float64)
