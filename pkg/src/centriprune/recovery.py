"""Stage 3: fold discarded tokens back into their most similar retained token
via similarity-weighted aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SelectionTrace
from .similarity import SimilarityMatrix


@dataclass(frozen=True)
class ClusterAssignment:
    """Discarded-to-retained ownership.

    ``owner`` maps each discarded index to its retained owner; ``members``
    is the exact inverse (owner -> ascending discarded indices), keyed for
    every retained token including those with empty clusters.
    ``retained_order`` preserves trace order for output row layout.
    """

    owner: dict
    members: dict
    retained_order: tuple


def assign_clusters(trace: SelectionTrace, M: SimilarityMatrix) -> ClusterAssignment:
    """Assign each discarded token to the retained token with the highest raw
    similarity; ties break toward the lowest retained index."""
    retained = trace.indices
    n = M.values.shape[0]
    discarded = sorted(set(range(n)) - set(retained))
    members = {j: [] for j in retained}
    owner = {}
    # argmax scans retained in ascending index order so first-max = lowest index
    retained_sorted = np.asarray(sorted(retained), dtype=np.int64)
    for u in discarded:
        j = int(retained_sorted[np.argmax(M.values[u, retained_sorted])])
        owner[u] = j
        members[j].append(u)
    return ClusterAssignment(
        owner=owner,
        members={j: tuple(v) for j, v in members.items()},
        retained_order=tuple(retained),
    )


def swa_update(hidden: np.ndarray, assignment: ClusterAssignment,
               M: SimilarityMatrix, beta: float, eps: float,
               raw_weights: bool = False) -> np.ndarray:
    """Blend each retained token with the similarity-weighted mean of its
    cluster: ``beta * H_j + (1 - beta) * E_j``.

    Weights are the raw similarities clamped at zero (negative cosine carries
    no aggregation mass), normalized by their sum plus ``eps``. Retained
    tokens with empty clusters pass through bit-unchanged. ``raw_weights``
    skips the clamp for fidelity experiments.
    """
    h = np.asarray(hidden, dtype=np.float64)
    out = np.empty((len(assignment.retained_order), h.shape[1]), dtype=np.float64)
    for row, j in enumerate(assignment.retained_order):
        cluster = assignment.members.get(j, ())
        if not cluster:
            out[row] = h[j]
            continue
        u = np.asarray(cluster, dtype=np.int64)
        w = M.values[u, j]
        if not raw_weights:
            w = np.maximum(w, 0.0)
        alpha = w / (w.sum() + eps)
        agg = alpha @ h[u]
        out[row] = beta * h[j] + (1.0 - beta) * agg
    return out
