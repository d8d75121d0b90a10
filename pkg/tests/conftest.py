import json

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.special import logsumexp

from tscore import cli


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def run_cli(capsys):
    """Invoke the CLI in-process; returns (exit_code, stdout, stderr)."""

    def invoke(*args):
        code = cli.main([str(a) for a in args])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return invoke


@pytest.fixture
def synth_run(run_cli, tmp_path):
    """Generate a small synthetic run directory; returns its path."""

    def make(name="run", **flags):
        out = tmp_path / name
        args = ["synth", out]
        defaults = {"epochs": 6, "n": 60}
        defaults.update(flags)
        for key, value in defaults.items():
            args += [f"--{key.replace('_', '-')}", value]
        code, stdout, stderr = run_cli(*args)
        assert code == 0, stderr
        return out

    return make


def read_jsonl(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def _soft_max_cosine(flat, k, d, beta):
    v = flat.reshape(k, d)
    u = v / np.linalg.norm(v, axis=1, keepdims=True)
    cos = (u @ u.T)[np.triu_indices(k, 1)]
    return logsumexp(beta * cos) / beta


def max_min_angle_config(k, d, restarts=5, seed=0):
    """Maximize the minimum pairwise angle of k unit vectors in R^d by
    annealed soft-max relaxation with random restarts; returns all pairwise
    angles of the best configuration. Test-side oracle only."""
    rng = np.random.default_rng(seed)
    best_angles, best_min = None, -1.0
    for _ in range(restarts):
        x = rng.standard_normal(k * d)
        for beta in (30.0, 300.0, 3000.0, 30000.0):
            x = minimize(_soft_max_cosine, x, args=(k, d, beta), method="L-BFGS-B").x
        u = x.reshape(k, d)
        u = u / np.linalg.norm(u, axis=1, keepdims=True)
        cos = np.clip(u @ u.T, -1.0, 1.0)
        angles = np.arccos(cos[np.triu_indices(k, 1)])
        if angles.min() > best_min:
            best_min, best_angles = angles.min(), angles
    return best_angles
