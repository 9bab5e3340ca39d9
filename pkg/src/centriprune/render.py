"""SVG rendering of a selection on its grid: selected cells are colored by
stage and labeled with selection order; discarded cells can be tinted by
their cluster owner. Video grids render one panel per frame."""

from __future__ import annotations

from .core import PIVOT_STAGE, PruneResult, TokenGrid

CELL = 24
GAP = 12
PIVOT_FILL = "#f28e2b"
GREEDY_FILL = "#4e79a7"
EMPTY_FILL = "#f2f2f2"
GRID_STROKE = "#c8c8c8"

# pale tints for cluster ownership, cycled by owner rank
TINTS = ("#fde2cd", "#d4e2f0", "#d9ead3", "#f3d1dc", "#e6dff0",
         "#fff2c7", "#d7ecec", "#ece0d3")


def render_selection(result: PruneResult, grid: TokenGrid,
                     tint_clusters: bool = False) -> str:
    """Vector-graphics document for a pruning result."""
    frame_w = grid.width * CELL
    frame_h = grid.height * CELL
    width = frame_w + 2 * GAP
    height = grid.frames * (frame_h + GAP) + GAP + (14 if grid.frames > 1 else 0) * grid.frames

    order_of = {e.index: e.order for e in result.trace.entries}
    stage_of = {e.index: e.stage for e in result.trace.entries}
    tint_of = {}
    if tint_clusters:
        for rank, e in enumerate(result.trace.entries):
            for u in result.clusters.get(e.index, ()):
                tint_of[u] = TINTS[rank % len(TINTS)]

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace">',
    ]
    per_frame = grid.height * grid.width
    y_off = GAP
    for t in range(grid.frames):
        if grid.frames > 1:
            parts.append(
                f'<text x="{GAP}" y="{y_off + 10}" font-size="12">frame {t}</text>'
            )
            y_off += 14
        parts.append(f'<g transform="translate({GAP},{y_off})">')
        for row in range(grid.height):
            for col in range(grid.width):
                i = t * per_frame + row * grid.width + col
                fill = tint_of.get(i, EMPTY_FILL)
                if i in order_of:
                    fill = PIVOT_FILL if stage_of[i] == PIVOT_STAGE else GREEDY_FILL
                parts.append(
                    f'<rect x="{col * CELL}" y="{row * CELL}" width="{CELL}" '
                    f'height="{CELL}" fill="{fill}" stroke="{GRID_STROKE}"/>'
                )
                if i in order_of:
                    parts.append(
                        f'<text x="{col * CELL + CELL // 2}" y="{row * CELL + CELL // 2 + 4}" '
                        f'font-size="10" fill="#ffffff" text-anchor="middle">'
                        f'{order_of[i]}</text>'
                    )
        parts.append("</g>")
        y_off += frame_h + GAP
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
