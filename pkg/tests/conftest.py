from pathlib import Path

import numpy as np
import pytest

import centriprune as cp

FIXTURES = Path(__file__).parent / "fixtures"


def random_instance(seed, n_lo=4, n_hi=100):
    """Randomized (features, grid, config) covering valid config ranges,
    clamp paths, 3D grids, and the R=N short-circuit."""
    rng = np.random.Generator(np.random.PCG64(seed))
    while True:
        h = int(rng.integers(1, 11))
        w = int(rng.integers(1, 11))
        t = int(rng.choice([1, 1, 1, 2, 3]))
        n = h * w * t
        if n_lo <= n <= n_hi:
            break
    grid = cp.TokenGrid(h, w, t)
    d = int(rng.integers(2, 65))
    dk = int(rng.integers(2, 33))
    features = cp.FeatureSet(
        hidden=rng.standard_normal((n, d)),
        keys=rng.standard_normal((n, dk)),
    )
    lam = 0.0 if rng.random() < 0.2 else float(rng.uniform(0.0, 2.0))
    cfg = cp.PrunerConfig(
        retain=int(rng.integers(1, n + 1)),
        pivots=int(rng.integers(1, 9)),
        channels=int(rng.integers(1, d + 8)),
        bss_strength=lam,
        tau0=float(rng.uniform(0.05, 1.0 + lam)),
        dtau=float(rng.uniform(0.03, 0.5)),
        batch=int(rng.integers(1, 25)),
        blend=float(rng.uniform(0.1, 0.9)),
        raw_swa_weights=bool(rng.random() < 0.15),
    )
    return features, grid, cfg


def run_cli(*argv):
    """Invoke the CLI in-process; returns (exit_code, stdout, stderr)."""
    import io
    from contextlib import redirect_stderr, redirect_stdout

    from centriprune.cli import main

    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))
