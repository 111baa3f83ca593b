"""Subdivisions, discrete quadratic variation and its jump decomposition."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConsistencyError, DomainError
from .paths import MASTER_DEPTH, CadlagPath, PathPair

SCHEMES = ("dyadic", "jump", "stopping")
PSD_SLACK = 1e-12
POLARIZATION_SLACK = 1e-12


@dataclass(frozen=True)
class Subdivision:
    """Sorted times ``0 = t_0 < ... < t_k = T`` at refinement level n."""

    times: np.ndarray
    level: int
    scheme: str = "dyadic"

    def __post_init__(self):
        t = np.unique(np.asarray(self.times, dtype=np.float64))
        if len(t) < 2 or t[0] != 0.0:
            raise DomainError("a subdivision needs at least the points 0 and T")
        t.flags.writeable = False
        object.__setattr__(self, "times", t)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.times)

    def __len__(self) -> int:
        return len(self.times)

    def indices(self, path: CadlagPath) -> np.ndarray:
        """Grid indices of the subdivision points on ``path``'s grid."""
        k = np.rint(self.times / path.dt).astype(np.int64)
        if np.any(np.abs(self.times - k * path.dt) > 1e-9 * path.dt):
            raise DomainError("subdivision times are not on the path grid")
        if k[-1] != path.n:
            raise DomainError(f"subdivision ends at {self.horizon!r}, path at {path.horizon!r}")
        return k


def dyadic_subdivision(T: float, n: int, grid_depth: int = MASTER_DEPTH) -> Subdivision:
    """``{i T 2^-n : i = 0..2^n}``."""
    if n < 0:
        raise DomainError("level must be nonnegative")
    if n > grid_depth:
        raise DomainError(f"level exceeds grid depth ({n} > {grid_depth})")
    return Subdivision(np.arange(2**n + 1) * (T / 2**n), n, "dyadic")


def _jump_times(p: PathPair, keep) -> np.ndarray:
    """Grid times where max(|dx|, |dv|) passes ``keep(magnitude)``."""
    size: dict[int, float] = {}
    for path in (p.x, p.v):
        idx = path.registry_indices()
        if len(idx):
            mags = np.sqrt((path.registry_deltas() ** 2).sum(axis=1))
            for k, m in zip(idx.tolist(), mags.tolist()):
                size[k] = max(size.get(k, 0.0), m)
    ks = sorted(k for k, m in size.items() if keep(m))
    return np.array(ks, dtype=np.int64) * p.x.dt


def jump_augmented_subdivision(base: Subdivision, p: PathPair, n: int) -> Subdivision:
    """Add every jump time of x or v of size at least 1/n (none when n <= 0)."""
    if n <= 0:
        return Subdivision(base.times, base.level, "jump")
    extra = _jump_times(p, lambda m: m >= 1.0 / n)
    times = np.union1d(base.times, _snap(extra, base.times))
    return Subdivision(times, base.level, "jump")


def _snap(extra: np.ndarray, ref: np.ndarray) -> np.ndarray:
    # reuse the exact float of a coinciding base time so union1d dedups
    if not len(extra):
        return extra
    pos = np.clip(np.searchsorted(ref, extra), 0, len(ref) - 1)
    close = np.abs(ref[pos] - extra) <= 1e-12 * max(1.0, float(ref[-1]))
    return np.where(close, ref[pos], extra)


def stopping_time_subdivision(p: PathPair, N: int, grid_depth: int | None = None) -> Subdivision:
    """Times ``tau_k = inf{u > tau_{k-1} : 2^N u / T integer or |dv| v |dx| > 1/N} ^ T``.

    Built by running the recursion literally, then checked against the
    sorted union of dyadic and jump times.
    """
    T = p.horizon
    depth = p.x.grid_depth if grid_depth is None else grid_depth
    dyadic = dyadic_subdivision(T, N, depth)
    jt = _jump_times(p, lambda m: m > 1.0 / N) if N > 0 else np.empty(0)
    jt = _snap(jt, dyadic.times)
    step = T / 2**N
    taus = [0.0]
    tau = 0.0
    while tau < T:
        i = math.floor(tau / step + 1e-9) + 1
        nxt = min(i * step, T)
        j = np.searchsorted(jt, tau, side="right")
        if j < len(jt) and jt[j] < nxt:
            nxt = float(jt[j])
        tau = nxt
        taus.append(tau)
    union = np.union1d(dyadic.times, jt)
    if len(union) != len(taus) or np.any(np.asarray(taus) != union):
        raise ConsistencyError("stopping-time recursion disagrees with the sorted union")
    return Subdivision(np.asarray(taus), N, "stopping")


def subdivision_for(p: PathPair, n: int, scheme: str = "dyadic") -> Subdivision:
    """Level-n subdivision of ``p`` under a named scheme."""
    depth = p.x.grid_depth
    if scheme == "dyadic":
        return dyadic_subdivision(p.horizon, n, depth)
    if scheme == "jump":
        return jump_augmented_subdivision(dyadic_subdivision(p.horizon, n, depth), p, n)
    if scheme == "stopping":
        return stopping_time_subdivision(p, n, depth)
    raise ConfigError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


@dataclass(frozen=True)
class QVMeasure:
    """Discrete quadratic variation of one component at one level.

    ``curve[j]`` is the sum of squared increments over intervals ending at or
    before ``times[j]`` (so ``curve[0] = 0``); atoms are the registry
    ``delta**2`` at subdivision times.
    """

    level: int
    times: np.ndarray
    curve: np.ndarray
    atom_times: np.ndarray
    atom_weights: np.ndarray

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.atom_times.tolist(), self.atom_weights.tolist()))

    @property
    def atomic(self) -> np.ndarray:
        """Accumulated atoms ``sum_{s <= t} delta(s)^2`` at each subdivision time."""
        acc = np.zeros(len(self.times))
        if len(self.atom_times):
            pos = np.searchsorted(self.times, self.atom_times)
            np.add.at(acc, pos, self.atom_weights)
        return np.cumsum(acc)

    @property
    def continuous_part(self) -> np.ndarray:
        return self.curve - self.atomic

    @property
    def total(self) -> float:
        return float(self.curve[-1])


def discrete_qv(path: CadlagPath, sub: Subdivision, component: int = 0) -> QVMeasure:
    """Sum of squared increments of one component along ``sub``."""
    idx = sub.indices(path)
    vals = path.values[idx, component]
    sq = np.diff(vals) ** 2
    curve = np.concatenate([[0.0], np.cumsum(sq)])
    reg = path.registry_indices()
    on_sub = np.isin(reg, idx)
    atom_idx = reg[on_sub]
    weights = path.registry_deltas()[on_sub, component] ** 2 if len(reg) else np.empty(0)
    return QVMeasure(sub.level, sub.times, curve, atom_idx * path.dt if len(atom_idx) else np.empty(0),
                     np.asarray(weights, dtype=np.float64))


def qv_decompose(q: QVMeasure) -> tuple[np.ndarray, list[tuple[float, float]]]:
    """Split a QV curve into its continuous part and its atoms.

    Raises ConsistencyError when the continuous part dips below zero, which
    signals a registry/subdivision mismatch (or a finite-level cross term
    between a jump and the diffusion increment sharing its interval).
    """
    cont = q.continuous_part
    slack = PSD_SLACK * max(1.0, float(q.curve[-1]))
    if len(cont) and cont.min() < -slack:
        j = int(np.argmin(cont))
        raise ConsistencyError(
            f"negative continuous part {cont[j]!r} at t={q.times[j]!r} (level {q.level})")
    return cont, q.atoms


@dataclass(frozen=True)
class CrossVariation:
    """Matrix QV curves ``curves[j] = sum_{i<j} dx_i dx_i^T``."""

    level: int
    times: np.ndarray
    curves: np.ndarray  # (k+1, d, d)
    polarization_gap: float

    def increment(self, a: int, b: int) -> np.ndarray:
        """Cross-variation over ``[times[a], times[b]]``."""
        return self.curves[b] - self.curves[a]


def cross_variation(path: CadlagPath, sub: Subdivision) -> CrossVariation:
    """Outer-product cross-variation, checked against scalar polarization."""
    idx = sub.indices(path)
    vals = path.values[idx]
    inc = np.diff(vals, axis=0)
    outer = inc[:, :, None] * inc[:, None, :]
    curves = np.concatenate([np.zeros((1,) + outer.shape[1:]), np.cumsum(outer, axis=0)])
    d = path.dim
    gap = 0.0
    for i in range(d):
        qi = np.concatenate([[0.0], np.cumsum(inc[:, i] ** 2)])
        for j in range(i + 1, d):
            qj = np.concatenate([[0.0], np.cumsum(inc[:, j] ** 2)])
            qs = np.concatenate([[0.0], np.cumsum((inc[:, i] + inc[:, j]) ** 2)])
            polar = 0.5 * (qs - qi - qj)
            gap = max(gap, float(np.abs(polar - curves[:, i, j]).max()))
    if gap > POLARIZATION_SLACK:
        raise ConsistencyError(f"polarization differs from the outer-product sum by {gap!r}")
    return CrossVariation(sub.level, sub.times, curves, gap)


def min_increment_eigenvalue(cv: CrossVariation, pairs: int = 2000, seed: int = 0) -> float:
    """Smallest eigenvalue over interval increments: all consecutive ones plus random (s, t)."""
    k = len(cv.times)
    a = np.arange(k - 1)
    b = a + 1
    if k * (k - 1) // 2 <= pairs:
        a, b = np.triu_indices(k, 1)
    else:
        rng = np.random.default_rng(seed)
        ra = rng.integers(0, k - 1, pairs)
        rb = rng.integers(ra + 1, k)
        a, b = np.concatenate([a, ra, [0]]), np.concatenate([b, rb, [k - 1]])
    inc = cv.curves[b] - cv.curves[a]
    return float(np.linalg.eigvalsh(inc).min())


def qv_table(path: CadlagPath, p: PathPair, levels, scheme: str = "dyadic", component: int = 0):
    """``(level, curve(T), continuous(T), atomic(T))`` per level."""
    rows = []
    for n in levels:
        q = discrete_qv(path, subdivision_for(p, n, scheme), component)
        rows.append((n, q.total, float(q.continuous_part[-1]), float(q.atomic[-1])))
    return rows
