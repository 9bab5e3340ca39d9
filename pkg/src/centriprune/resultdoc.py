"""Machine-readable result documents.

Ordered-key JSON so golden files diff cleanly; floats use shortest
round-trip formatting, so parse -> serialize is byte-identical. The
updated hidden states live in a separate tensor file, not here.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict

from .core import (
    PruneResult,
    PrunerConfig,
    SelectionTrace,
    TokenGrid,
    TraceEntry,
)

FORMAT_NAME = "centriprune/result"
FORMAT_VERSION = 1


def serialize_result(result: PruneResult, grid: TokenGrid, metrics: dict = None,
                     engine_version: str = None) -> str:
    from . import __version__

    doc = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "engine_version": engine_version or __version__,
        "grid": {"height": grid.height, "width": grid.width, "frames": grid.frames},
        "config": _config_dict(result.config_echo),
        "trace": [_entry_dict(e) for e in result.trace.entries],
        "clusters": {
            str(j): list(result.clusters[j]) for j in sorted(result.clusters)
        },
        "metrics": metrics,
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_result_document(text: str):
    """Parse a result document back into (PruneResult, TokenGrid, metrics).

    The returned result carries no updated hidden states (they live in a
    tensor file).
    """
    doc = json.loads(text)
    if doc.get("format") != FORMAT_NAME:
        raise ValueError(f"not a result document (format={doc.get('format')!r})")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
    grid = TokenGrid(**doc["grid"])
    cfg = PrunerConfig(**doc["config"])
    entries = []
    for e in doc["trace"]:
        tau = e["tau_at_accept"]
        entries.append(TraceEntry(
            index=e["index"], order=e["order"], stage=e["stage"],
            loop=e["loop"], tau_at_accept=tau,
        ))
    trace = SelectionTrace(entries=tuple(entries))
    clusters = {int(j): tuple(v) for j, v in doc["clusters"].items()}
    result = PruneResult(
        trace=trace,
        clusters=clusters,
        updated_hidden=None,
        config_echo=cfg,
        token_count=grid.token_count,
    )
    return result, grid, doc.get("metrics")


def _config_dict(cfg: PrunerConfig) -> dict:
    return asdict(cfg)


def _entry_dict(e: TraceEntry) -> dict:
    tau = e.tau_at_accept
    if tau is not None and math.isnan(tau):
        tau = None
    return {
        "index": e.index,
        "order": e.order,
        "stage": e.stage,
        "loop": e.loop,
        "tau_at_accept": tau,
    }
