"""Command-line surface.

Exit codes are part of the contract:
  0  success
  2  input validation failed (grid/matrix shape mismatch, bad values, caps)
  3  unreadable or malformed tensor file
  4  invalid configuration
  64 usage error (bad flags)
  1  unexpected failure
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import available_backends, get_backend
from .core import (
    ConfigError,
    FeatureSet,
    PrunerConfig,
    ResourceLimitError,
    ShapeMismatchError,
    TokenGrid,
)
from .harness import (
    STRATEGIES,
    SceneGenerationError,
    corpus_experiment,
    gen_scene,
    metrics_to_csv,
)
from .pipeline import STAGES, StageTimer, prune
from .render import render_selection
from .resultdoc import parse_result_document, serialize_result
from .tensorio import TensorFormatError, read_tensor, write_tensor

EXIT_OK = 0
EXIT_SHAPE = 2
EXIT_TENSOR = 3
EXIT_CONFIG = 4
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def parse_grid(text: str) -> TokenGrid:
    parts = text.lower().split("x")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(
            f"grid must look like HxW or HxWxT, got {text!r}"
        )
    try:
        dims = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid dims must be integers, got {text!r}")
    if any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"grid dims must be positive, got {text!r}")
    if len(dims) == 2:
        return TokenGrid(height=dims[0], width=dims[1])
    return TokenGrid(height=dims[0], width=dims[1], frames=dims[2])


def _add_config_flags(p, retain_required=True):
    p.add_argument("--retain", type=int, required=retain_required, default=64,
                   help="token budget R")
    p.add_argument("--pivots", type=int, default=4, help="pivot count")
    p.add_argument("--q", type=int, default=256, dest="channels",
                   help="kept highest-variance channels")
    p.add_argument("--lambda", type=float, default=0.5, dest="bss_strength",
                   help="spatial buffering strength")
    p.add_argument("--tau0", type=float, default=0.8, help="initial threshold")
    p.add_argument("--dtau", type=float, default=0.1, help="threshold increment")
    p.add_argument("--batch", type=int, default=16, help="greedy batch size")
    p.add_argument("--beta", type=float, default=0.3, dest="blend",
                   help="retained-state blend weight")
    p.add_argument("--eps", type=float, default=1e-8, help="aggregation stabilizer")
    p.add_argument("--raw-swa-weights", action="store_true",
                   help="skip the nonnegative clamp on aggregation weights")


def _config_from_args(args) -> PrunerConfig:
    return PrunerConfig(
        retain=args.retain,
        pivots=args.pivots,
        channels=args.channels,
        bss_strength=args.bss_strength,
        tau0=args.tau0,
        dtau=args.dtau,
        batch=args.batch,
        blend=args.blend,
        eps=args.eps,
        raw_swa_weights=args.raw_swa_weights,
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="centriprune",
                     description="Centrifugal token pruning engine")
    parser.add_argument("--version", action="version",
                        version=f"centriprune {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prune", help="prune a token feature dump")
    p.add_argument("--hidden", required=True, help="hidden-state tensor (N x d)")
    p.add_argument("--keys", required=True, help="key tensor (N x d_k)")
    p.add_argument("--grid", type=parse_grid, required=True, help="HxW or HxWxT")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="result document path")
    p.add_argument("--updated-hidden", help="write blended hidden states here")

    p = sub.add_parser("synth", help="generate a synthetic scene")
    p.add_argument("--grid", type=parse_grid, required=True)
    p.add_argument("--objects", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("compare", help="run strategies over a seed corpus")
    p.add_argument("--grid", type=parse_grid, required=True)
    p.add_argument("--runs", type=int, default=100, help="number of seeds")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--strategies", default=",".join(STRATEGIES),
                   help="comma-separated strategy list")
    p.add_argument("--objects", type=int, default=3)
    _add_config_flags(p, retain_required=False)
    p.add_argument("--out", help="metrics CSV path (default stdout)")
    p.add_argument("--aggregates", help="per-strategy aggregate JSON path")

    p = sub.add_parser("render", help="render a result document to SVG")
    p.add_argument("--result", required=True, help="result document path")
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("--tint-clusters", action="store_true")

    p = sub.add_parser("bench", help="time the pipeline stages")
    p.add_argument("--grid", type=parse_grid, default=parse_grid("24x24"))
    p.add_argument("--d", type=int, default=4096, help="hidden width")
    p.add_argument("--dk", type=int, default=128, help="key width")
    p.add_argument("--seed", type=int, default=0)
    _add_config_flags(p, retain_required=False)

    return parser


def cmd_prune(args) -> int:
    hidden = read_tensor(args.hidden)
    keys = read_tensor(args.keys)
    if hidden.ndim != 2 or keys.ndim != 2:
        raise ShapeMismatchError(
            f"hidden and keys must be 2-D, got {hidden.shape} and {keys.shape}"
        )
    features = FeatureSet(hidden=hidden, keys=keys)
    features.check_grid(args.grid)
    result = prune(features, args.grid, _config_from_args(args))
    Path(args.out).write_text(serialize_result(result, args.grid))
    if args.updated_hidden:
        write_tensor(args.updated_hidden,
                     result.updated_hidden.astype(hidden.dtype))
    return EXIT_OK


def cmd_synth(args) -> int:
    scene = gen_scene(args.grid, args.objects, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_tensor(out / "hidden.ctp",
                 scene.features.hidden.astype(np.float32))
    write_tensor(out / "keys.ctp", scene.features.keys.astype(np.float32))
    doc = {
        "format": "centriprune/scene",
        "seed": scene.seed,
        "grid": {"height": scene.grid.height, "width": scene.grid.width,
                 "frames": scene.grid.frames},
        "object_masks": [list(m) for m in scene.object_masks],
        "background_ids": list(scene.background_ids),
    }
    (out / "scene.json").write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    strategies = tuple(s.strip() for s in args.strategies.split(",") if s.strip())
    for s in strategies:
        if s not in STRATEGIES:
            raise ConfigError({"strategies": f"unknown strategy {s!r}"})
    cfg = _config_from_args(args)
    records, aggregates = corpus_experiment(
        args.runs, args.grid, cfg, strategies=strategies,
        n_objects=args.objects, first_seed=args.seed,
    )
    csv_text = metrics_to_csv(records)
    if args.out:
        Path(args.out).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    if args.aggregates:
        Path(args.aggregates).write_text(json.dumps(aggregates, indent=2) + "\n")
    return EXIT_OK


def cmd_render(args) -> int:
    result, grid, _ = parse_result_document(Path(args.result).read_text())
    svg = render_selection(result, grid, tint_clusters=args.tint_clusters)
    Path(args.out).write_text(svg)
    return EXIT_OK


def cmd_bench(args) -> int:
    rng = np.random.Generator(np.random.PCG64(args.seed))
    n = args.grid.token_count
    features = FeatureSet(
        hidden=rng.standard_normal((n, args.d)),
        keys=rng.standard_normal((n, args.dk)),
    )
    cfg = _config_from_args(args)
    timer = StageTimer()
    prune(features, args.grid, cfg, timer=timer)
    total = 0.0
    for stage in STAGES:
        seconds = timer.seconds.get(stage, 0.0)
        total += seconds
        print(f"{stage:11s} {seconds * 1e3:9.3f} ms")
    print(f"{'total':11s} {total * 1e3:9.3f} ms")

    backends = available_backends()
    if len(backends) > 1:
        print("selection backend comparison:")
        for name in sorted(backends):
            t = StageTimer()
            prune(features, args.grid, cfg, timer=t, backend=get_backend(name))
            print(f"  {name:4s} {t.seconds['selection'] * 1e3:9.3f} ms")
    return EXIT_OK


_COMMANDS = {
    "prune": cmd_prune,
    "synth": cmd_synth,
    "compare": cmd_compare,
    "render": cmd_render,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except TensorFormatError as exc:
        print(f"centriprune: tensor error: {exc}", file=sys.stderr)
        return EXIT_TENSOR
    except ConfigError as exc:
        print(f"centriprune: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ShapeMismatchError, ResourceLimitError, SceneGenerationError) as exc:
        print(f"centriprune: input error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except Exception as exc:  # pragma: no cover - unexpected
        print(f"centriprune: unexpected error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
