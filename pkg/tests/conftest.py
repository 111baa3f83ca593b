import json
import os

import numpy as np
import pytest

from pathcalc.generators import GenSpec, dirichlet_sum, generate
from pathcalc.paths import CadlagPath, PathPair

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
_RESULTS = pytest.StashKey[list]()


def load_fixture(name):
    with open(os.path.join(FIXTURES, name)) as fh:
        return json.load(fh)


def step_path(a=1.0, t0=0.5, n=16, T=1.0):
    """a * 1_[t0, T] on an n-interval grid."""
    k0 = int(round(t0 / (T / n)))
    vals = np.zeros(n + 1)
    vals[k0:] = a
    return CadlagPath.from_values(vals, T / n, jump_indices={k0: a})


def linear_path(n=16, T=1.0, slope=1.0):
    t = np.arange(n + 1) * (T / n)
    return CadlagPath.from_values(slope * t, T / n)


def corpus(depth=14, seed=42):
    """Named scalar paths used throughout the acceptance checks."""
    lin, _ = generate(GenSpec(kind="deterministic", name="linear", depth=depth, amplitude=1.0))
    jump, _ = generate(GenSpec(kind="compound_poisson", rate=5.0, depth=depth, seed=seed))
    bm, bm_truth = generate(GenSpec(kind="brownian", depth=depth, seed=seed))
    jd, _ = generate(GenSpec(kind="jump_diffusion", rate=5.0, depth=depth, seed=seed))
    b, _ = generate(GenSpec(kind="zero_qv", depth=depth, seed=seed))
    dirichlet, _ = dirichlet_sum(bm, b, bm_truth)
    return {"linear": lin, "pure_jump": jump, "brownian": bm, "jump_diffusion": jd, "dirichlet": dirichlet}


@pytest.fixture(scope="session")
def corpus_paths():
    return corpus()


@pytest.fixture(scope="session")
def corpus_pairs(corpus_paths):
    return {k: PathPair.with_constant_v(x, 1.0) for k, x in corpus_paths.items()}


@pytest.fixture
def record(request):
    """Log one acceptance line; all lines are repeated in the terminal summary."""

    def _record(criterion, ok, detail=""):
        line = f"{criterion}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        print(line)
        request.config.stash.setdefault(_RESULTS, []).append(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_RESULTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
