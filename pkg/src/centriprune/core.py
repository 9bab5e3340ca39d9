"""Shared domain types, grid geometry, and configuration validation.

Token layouts are rectangular grids: 2D ``height x width`` for images, or
3D ``height x width x frames`` for video. Flat token indices are frame-major
(frame index varies slowest), and within a frame row-major:

    x = i mod W,  y = floor(i / W)          (2D)
    t = floor(i / (H*W)), then 2D on rest   (3D)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np


class ConfigError(ValueError):
    """One or more configuration fields violate their constraints.

    ``field_errors`` maps field name -> human-readable violation.
    """

    def __init__(self, field_errors: dict):
        self.field_errors = dict(field_errors)
        msgs = "; ".join(f"{k}: {v}" for k, v in sorted(self.field_errors.items()))
        super().__init__(f"invalid configuration: {msgs}")


class ShapeMismatchError(ValueError):
    """Input matrices do not match the declared grid, or contain bad values."""


class ResourceLimitError(RuntimeError):
    """A dense precomputation would exceed the configured token cap."""


@dataclass(frozen=True)
class TokenGrid:
    """Spatial layout of tokens: ``height`` rows, ``width`` cols, ``frames`` deep."""

    height: int
    width: int
    frames: int = 1

    def __post_init__(self):
        for name in ("height", "width", "frames"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"grid {name} must be a positive integer, got {v!r}")

    @property
    def token_count(self) -> int:
        return self.height * self.width * self.frames

    @property
    def is_3d(self) -> bool:
        return self.frames > 1


def coords_of(i: int, grid: TokenGrid) -> tuple:
    """Coordinate of flat index ``i``: (x, y) for 2D grids, (x, y, t) for 3D."""
    n = grid.token_count
    if not 0 <= i < n:
        raise IndexError(f"token index {i} out of range [0, {n})")
    if grid.frames == 1:
        return (i % grid.width, i // grid.width)
    per_frame = grid.height * grid.width
    t, rem = divmod(i, per_frame)
    return (rem % grid.width, rem // grid.width, t)


def index_of(coord: tuple, grid: TokenGrid) -> int:
    """Inverse of :func:`coords_of`."""
    if grid.frames == 1:
        x, y = coord
        t = 0
    else:
        x, y, t = coord
    if not (0 <= x < grid.width and 0 <= y < grid.height and 0 <= t < grid.frames):
        raise IndexError(f"coordinate {coord} outside grid {grid}")
    return t * grid.height * grid.width + y * grid.width + x


def spatial_distance(i: int, j: int, grid: TokenGrid) -> float:
    """Euclidean distance between the grid coordinates of tokens ``i`` and ``j``."""
    a = coords_of(i, grid)
    b = coords_of(j, grid)
    return math.sqrt(sum((p - q) ** 2 for p, q in zip(a, b)))


def d_max(grid: TokenGrid) -> float:
    """Normalization constant: sqrt(H^2+W^2), plus T^2 for video grids."""
    s = grid.height**2 + grid.width**2
    if grid.frames > 1:
        s += grid.frames**2
    return math.sqrt(s)


@dataclass(frozen=True)
class FeatureSet:
    """One pruning instance: hidden states (N x d) and token keys (N x d_k)."""

    hidden: np.ndarray
    keys: np.ndarray

    def __post_init__(self):
        hidden = np.asarray(self.hidden, dtype=np.float64)
        keys = np.asarray(self.keys, dtype=np.float64)
        if hidden.ndim != 2 or keys.ndim != 2:
            raise ShapeMismatchError(
                f"hidden and keys must be 2-D, got shapes {hidden.shape} and {keys.shape}"
            )
        if hidden.shape[0] != keys.shape[0]:
            raise ShapeMismatchError(
                f"hidden has {hidden.shape[0]} rows but keys has {keys.shape[0]}"
            )
        if not np.isfinite(hidden).all():
            raise ShapeMismatchError("hidden contains non-finite values")
        if not np.isfinite(keys).all():
            raise ShapeMismatchError("keys contains non-finite values")
        object.__setattr__(self, "hidden", np.ascontiguousarray(hidden))
        object.__setattr__(self, "keys", np.ascontiguousarray(keys))

    @property
    def token_count(self) -> int:
        return self.hidden.shape[0]

    def check_grid(self, grid: TokenGrid) -> None:
        if self.token_count != grid.token_count:
            raise ShapeMismatchError(
                f"grid declares {grid.token_count} tokens but matrices have "
                f"{self.token_count} rows"
            )


@dataclass(frozen=True)
class PrunerConfig:
    """All pruning tunables. ``retain`` is caller-supplied; the rest default
    to the engine's standard operating point."""

    retain: int
    pivots: int = 4
    channels: int = 256
    bss_strength: float = 0.5
    tau0: float = 0.8
    dtau: float = 0.1
    batch: int = 16
    blend: float = 0.3
    eps: float = 1e-8
    raw_swa_weights: bool = False


def validate_config(cfg: PrunerConfig, grid: TokenGrid, features: FeatureSet) -> PrunerConfig:
    """Validate ``cfg`` against an instance and return the clamped config.

    Clamping is silent: ``retain``/``pivots``/``channels`` are reduced to fit
    the instance (N tokens, d channels) and the clamped values are what the
    result echoes. Range violations raise :class:`ConfigError` naming every
    bad field.
    """
    errors = {}

    def check_pos_int(name):
        v = getattr(cfg, name)
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
            errors[name] = f"must be a positive integer, got {v!r}"
            return False
        return True

    def check_real(name, lo=None, hi=None, lo_open=False, hi_open=False):
        v = getattr(cfg, name)
        if not isinstance(v, (int, float, np.floating)) or isinstance(v, bool) \
                or not math.isfinite(v):
            errors[name] = f"must be a finite real, got {v!r}"
            return False
        if lo is not None and (v < lo or (lo_open and v == lo)):
            errors[name] = f"must be {'>' if lo_open else '>='} {lo}, got {v!r}"
            return False
        if hi is not None and (v > hi or (hi_open and v == hi)):
            errors[name] = f"must be {'<' if hi_open else '<='} {hi}, got {v!r}"
            return False
        return True

    check_pos_int("retain")
    check_pos_int("pivots")
    check_pos_int("channels")
    check_pos_int("batch")
    lam_ok = check_real("bss_strength", lo=0.0)
    if lam_ok:
        check_real("tau0", lo=0.0, lo_open=True, hi=1.0 + cfg.bss_strength)
    check_real("dtau", lo=0.0, lo_open=True)
    check_real("blend", lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    check_real("eps", lo=0.0, lo_open=True)
    if not isinstance(cfg.raw_swa_weights, bool):
        errors["raw_swa_weights"] = f"must be a bool, got {cfg.raw_swa_weights!r}"

    if errors:
        raise ConfigError(errors)

    n = grid.token_count
    d = features.hidden.shape[1]
    retain = min(cfg.retain, n)
    return replace(
        cfg,
        retain=retain,
        pivots=min(cfg.pivots, retain, n),
        channels=min(cfg.channels, d),
    )


PIVOT_STAGE = "pivot"
GREEDY_STAGE = "greedy"


@dataclass(frozen=True)
class TraceEntry:
    """One retained token: where it came from and when it was accepted.

    ``loop`` is the annealing loop counter at acceptance (-1 for pivots);
    ``tau_at_accept`` is the threshold in force (None for pivots).
    """

    index: int
    order: int
    stage: str
    loop: int = -1
    tau_at_accept: Optional[float] = None


@dataclass(frozen=True)
class SelectionTrace:
    """Ordered record of retained tokens."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        idx = [e.index for e in self.entries]
        if len(set(idx)) != len(idx):
            raise ValueError("trace indices must be pairwise distinct")
        orders = [e.order for e in self.entries]
        if orders != list(range(1, len(orders) + 1)):
            raise ValueError("trace order values must be 1..n with no gaps")

    def __len__(self):
        return len(self.entries)

    @property
    def indices(self) -> list:
        """Retained token ids in selection order."""
        return [e.index for e in self.entries]


@dataclass(frozen=True)
class PruneResult:
    """Full pruning outcome: trace, discarded-to-retained clusters, and the
    blended hidden states for the retained tokens (trace order)."""

    trace: SelectionTrace
    clusters: dict
    updated_hidden: Optional[np.ndarray]
    config_echo: PrunerConfig
    token_count: int = field(default=0)

    def __post_init__(self):
        retained = set(self.trace.indices)
        seen = set(retained)
        for owner, members in self.clusters.items():
            if owner not in retained:
                raise ValueError(f"cluster owner {owner} is not a retained token")
            for u in members:
                if u in seen:
                    raise ValueError(f"token {u} assigned to more than one place")
                seen.add(u)
        n = self.token_count or (max(seen) + 1 if seen else 0)
        if seen != set(range(n)):
            raise ValueError("trace and clusters must partition all token indices")
        object.__setattr__(self, "token_count", n)
        if self.updated_hidden is not None and self.updated_hidden.shape[0] != len(self.trace):
            raise ValueError(
                f"updated_hidden has {self.updated_hidden.shape[0]} rows, "
                f"expected {len(self.trace)}"
            )
