"""Seeded sample paths with ground-truth metadata.

Randomness comes from Philox, a counter-based generator, keyed by
``(seed, stream)``.  Each path component owns fixed stream ids, so adding a
component never changes the draws of another.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .paths import MASTER_DEPTH, CadlagPath

KINDS = ("brownian", "compound_poisson", "jump_diffusion", "zero_qv", "deterministic")
DETERMINISTIC = ("linear", "step", "sine")
JUMP_LAWS = ("uniform", "constant")

STREAM_BROWNIAN = 1
STREAM_JUMP_TIMES = 2
STREAM_JUMP_MARKS = 3
STREAM_PHASES = 4
_COMPONENT_STRIDE = 256


def rng_for(seed: int, stream: int, component: int = 0) -> np.random.Generator:
    """Philox generator keyed by (seed, stream id, component)."""
    sid = stream + _COMPONENT_STRIDE * component
    key = (int(sid) << 64) | (int(seed) & (2**64 - 1))
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class GenSpec:
    """What to generate.

    Parameters
    ----------
    kind : str
        One of :data:`KINDS`.
    T, depth : float, int
        Horizon and grid depth (``2**depth`` intervals).
    seed : int
        64-bit seed.
    sigma : float
        Brownian volatility.
    rate : float
        Jump intensity (expected jumps per unit time).
    jump_law : str
        ``uniform`` on [jump_low, jump_high] or ``constant`` (= jump_high).
    alpha : float
        Holder exponent of the zero-QV series, in (0.5, 1).
    amplitude : float
        Scale of the zero-QV series; for deterministic paths, the size a.
    name : str
        Deterministic path: ``linear`` (a t), ``step`` (a 1_[t0, T]) or
        ``sine`` (a sin(2 pi freq t / T)).
    """

    kind: str = "brownian"
    T: float = 1.0
    depth: int = 14
    seed: int = 42
    sigma: float = 1.0
    rate: float = 0.0
    jump_law: str = "uniform"
    jump_low: float = -0.5
    jump_high: float = 0.5
    alpha: float = 0.75
    amplitude: float = 0.1
    name: str = "linear"
    t0: float = 0.5
    freq: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; choose from {KINDS}")
        if not (0 <= self.depth <= MASTER_DEPTH) or int(self.depth) != self.depth:
            raise ConfigError(f"depth must be an integer in [0, {MASTER_DEPTH}]")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if self.sigma < 0 or self.rate < 0:
            raise ConfigError("sigma and rate must be nonnegative")
        if not 0.5 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0.5, 1)")
        if self.jump_law not in JUMP_LAWS:
            raise ConfigError(f"unknown jump law {self.jump_law!r}; choose from {JUMP_LAWS}")
        if self.jump_law == "uniform" and self.jump_low > self.jump_high:
            raise ConfigError("jump_low must not exceed jump_high")
        if self.kind == "deterministic" and self.name not in DETERMINISTIC:
            raise ConfigError(f"unknown deterministic path {self.name!r}; choose from {DETERMINISTIC}")
        if self.dim < 1:
            raise ConfigError("dim must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @property
    def n(self) -> int:
        return 2**self.depth

    @property
    def dt(self) -> float:
        return self.T / 2**self.depth

    @classmethod
    def from_dict(cls, data: dict) -> "GenSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown generator settings {sorted(unknown)}")
        return cls(**data)


@dataclass
class GroundTruth:
    """What the generator knows about the path it emitted."""

    kind: str
    sigma2: float = 0.0
    jumps_planted: list = field(default_factory=list)
    components: tuple | None = None

    def qv_continuous_expected(self, t: float) -> float:
        """Expected continuous quadratic variation ``sigma^2 t`` per component."""
        return self.sigma2 * t

    @property
    def jump_qv(self) -> float:
        return float(sum(float(np.dot(d, d)) for _, d in self.jumps_planted))


def _brownian(spec: GenSpec) -> np.ndarray:
    out = np.zeros((spec.n + 1, spec.dim))
    scale = spec.sigma * math.sqrt(spec.dt)
    for c in range(spec.dim):
        z = rng_for(spec.seed, STREAM_BROWNIAN, c).standard_normal(spec.n)
        np.cumsum(scale * z, out=out[1:, c])
    return out


def _poisson(spec: GenSpec) -> dict[int, np.ndarray]:
    """Jump registry by grid index; times snapped up to the grid, merged per cell."""
    if spec.rate == 0:
        return {}
    trng = rng_for(spec.seed, STREAM_JUMP_TIMES)
    count = int(trng.poisson(spec.rate * spec.T))
    times = trng.uniform(0.0, spec.T, count)
    if spec.jump_law == "uniform":
        marks = rng_for(spec.seed, STREAM_JUMP_MARKS).uniform(spec.jump_low, spec.jump_high, (count, spec.dim))
    else:
        marks = np.full((count, spec.dim), spec.jump_high)
    ks = np.clip(np.ceil(times / spec.dt).astype(np.int64), 1, spec.n)
    merged: dict[int, np.ndarray] = {}
    for k, m in sorted(zip(ks.tolist(), marks), key=lambda km: km[0]):
        merged[k] = merged[k] + m if k in merged else m.copy()
    return {k: m for k, m in merged.items() if np.any(m != 0)}


def _jump_values(spec: GenSpec, reg: dict[int, np.ndarray]) -> np.ndarray:
    incr = np.zeros((spec.n + 1, spec.dim))
    for k, m in reg.items():
        incr[k] = m
    return np.cumsum(incr, axis=0)


def weierstrass(spec: GenSpec) -> np.ndarray:
    """``a sum_{j=1..depth} 2^{-alpha j} cos(2^j pi t / T + phi_j)``, shifted to start at 0."""
    n = spec.n
    k = np.arange(n + 1, dtype=np.int64)
    out = np.zeros((n + 1, spec.dim))
    for c in range(spec.dim):
        phases = rng_for(spec.seed, STREAM_PHASES, c).uniform(0.0, 2 * math.pi, spec.depth)
        acc = np.zeros(n + 1)
        for j in range(1, spec.depth + 1):
            # 2^j pi k / n reduced exactly modulo 2 pi
            turns = (k * 2**j) % (2 * n)
            acc += 2.0 ** (-spec.alpha * j) * np.cos(np.pi * turns / n + phases[j - 1])
        out[:, c] = spec.amplitude * (acc - acc[0])
    return out


def _deterministic(spec: GenSpec) -> tuple[np.ndarray, dict[int, np.ndarray]]:
    t = np.arange(spec.n + 1) * spec.dt
    a = spec.amplitude
    if spec.name == "linear":
        return np.tile((a * t)[:, None], (1, spec.dim)), {}
    if spec.name == "sine":
        return np.tile((a * np.sin(2 * math.pi * spec.freq * t / spec.T))[:, None], (1, spec.dim)), {}
    k0 = min(max(int(math.ceil(spec.t0 / spec.dt - 1e-9)), 1), spec.n)
    vals = np.zeros((spec.n + 1, spec.dim))
    vals[k0:] = a
    return vals, {k0: np.full(spec.dim, a)}


def generate(spec: GenSpec) -> tuple[CadlagPath, GroundTruth]:
    """Emit the path described by ``spec`` with its ground truth."""
    reg: dict[int, np.ndarray] = {}
    sigma2 = 0.0
    if spec.kind == "brownian":
        vals, sigma2 = _brownian(spec), spec.sigma**2
    elif spec.kind == "compound_poisson":
        reg = _poisson(spec)
        vals = _jump_values(spec, reg)
    elif spec.kind == "jump_diffusion":
        reg = _poisson(spec)
        vals, sigma2 = _brownian(spec) + _jump_values(spec, reg), spec.sigma**2
    elif spec.kind == "zero_qv":
        vals = weierstrass(spec)
    else:
        vals, reg = _deterministic(spec)
    path = CadlagPath.from_values(vals, spec.dt, jump_indices=reg, master_horizon=spec.T)
    truth = GroundTruth(spec.kind, sigma2, [(k * spec.dt, reg[k]) for k in sorted(reg)])
    return path, truth


def dirichlet_sum(x: CadlagPath, b: CadlagPath, x_truth: GroundTruth | None = None) -> tuple[CadlagPath, GroundTruth]:
    """``x + b`` for a continuous zero-QV path b; the QV expected is that of x."""
    if not b.is_continuous():
        raise DomainError("the zero-QV component must be continuous (empty registry)")
    if x.n != b.n or x.dt != b.dt or x.dim != b.dim:
        raise DomainError("components must share grid and dimension")
    reg = dict(zip(x.registry_indices().tolist(), x.registry_deltas()))
    path = CadlagPath.from_values(x.values + b.values, x.dt, jump_indices=reg,
                                  master_horizon=x.master_horizon)
    truth = GroundTruth("dirichlet", x_truth.sigma2 if x_truth else 0.0,
                        list(x.registry), (x, b))
    return path, truth


# ----------------------------------------------------------------------
# metadata sidecar
# ----------------------------------------------------------------------
def meta_path(path_file: str) -> str:
    base = path_file[:-4] if path_file.endswith(".csv") else path_file
    return base + ".meta.csv"


def write_meta(fh, spec: GenSpec, truth: GroundTruth, comments: Sequence[str] = ()) -> None:
    """``key,value`` rows for the spec and truth, then ``jump,t,d1..dd`` rows."""
    for line in comments:
        fh.write(f"# {line}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in asdict(spec).items():
        w.writerow([k, "%.17g" % v if isinstance(v, float) else v])
    w.writerow(["sigma2", "%.17g" % truth.sigma2])
    for t, d in truth.jumps_planted:
        w.writerow(["jump", "%.17g" % t] + ["%.17g" % c for c in d])


def read_meta(fh) -> tuple[dict, list[tuple[float, np.ndarray]]]:
    """Inverse of :func:`write_meta`: (settings dict of strings, planted jumps)."""
    settings: dict[str, str] = {}
    jumps = []
    rows = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    for row in list(csv.reader(rows))[1:]:
        if row[0] == "jump":
            jumps.append((float(row[1]), np.array([float(c) for c in row[2:]])))
        else:
            settings[row[0]] = row[1]
    return settings, jumps
