"""Cadlag paths on a uniform grid with an explicit jump registry.

A path is stored as its samples on the grid ``0, dt, 2 dt, ..., n dt``.
Every sample is the right-continuous value at that time.  Discontinuities
are *only* the entries of the jump registry: at a registered grid time the
left limit is ``value - delta``; at any other grid time the path is treated
as continuous there (left limit equals the value), the sample-to-sample
change being continuous variation.  Off the grid the path is piecewise
constant.

The last sample ("tip") and its registry entry are kept apart from the
other samples ("body") so that restriction, stopping before ``t`` and
vertical perturbation are O(1): they share the body arrays with their
input.  Arrays are never written to after construction.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import InitVar, dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, PrecisionError

MASTER_DEPTH = 16
_SNAP = 1e-9  # snapping tolerance, in units of dt


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def row_norms(a: np.ndarray) -> np.ndarray:
    """Euclidean norm of each row, scaled so tiny entries do not underflow."""
    if a.shape[1] == 1:
        return np.abs(a[:, 0])
    m = np.abs(a).max(axis=1)
    s = np.where(m > 0, m, 1.0)
    return m * np.sqrt(((a / s[:, None]) ** 2).sum(axis=1))


def _norm(v) -> float:
    return float(row_norms(np.asarray(v, dtype=np.float64).reshape(1, -1))[0])


class CadlagPath:
    """A d-dimensional cadlag path on ``[0, n*dt]``.

    Use :meth:`from_values` to build one; the plain constructor is the
    unchecked fast path used internally.
    """

    __slots__ = (
        "dt",
        "body",
        "tip",
        "jump_index",
        "jump_delta",
        "tip_jump",
        "master_horizon",
        "_prefix",
    )

    def __init__(self, dt, body, tip, jump_index, jump_delta, tip_jump=None,
                 master_horizon=None, prefix=None):
        self.dt = float(dt)
        self.body = body
        self.tip = tip
        self.jump_index = jump_index
        self.jump_delta = jump_delta
        self.tip_jump = tip_jump
        if master_horizon is None:
            master_horizon = len(body) * self.dt
        self.master_horizon = float(master_horizon)
        self._prefix = prefix

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------
    @classmethod
    def from_values(
        cls,
        values,
        dt: float | None = None,
        *,
        horizon: float | None = None,
        jumps: Mapping[float, object] | Iterable[tuple[float, object]] | None = None,
        jump_indices: Mapping[int, object] | None = None,
        master_horizon: float | None = None,
    ) -> "CadlagPath":
        """Build a path from its grid samples.

        Parameters
        ----------
        values : array_like, shape (n+1,) or (n+1, d)
            Right-continuous values at the grid times ``k*dt``.
        dt, horizon : float
            Grid step, or the horizon ``n*dt`` (exactly one is required
            unless ``n == 0``).
        jumps : mapping or iterable of (time, delta)
            Registry entries; times must lie on the grid.
        jump_indices : mapping of grid index -> delta
            Registry entries addressed by index.
        master_horizon : float
            Horizon of the grid scheme the path lives on (defaults to its
            own horizon).  Horizontal extensions may not go past it.
        """
        vals = np.array(values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] < 1:
            raise DomainError(f"values must have shape (n+1,) or (n+1, d), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("path values must be finite")
        n, d = vals.shape[0] - 1, vals.shape[1]
        if dt is None:
            if horizon is None:
                if n > 0:
                    raise DomainError("give dt or horizon")
                dt = 1.0
            else:
                if n == 0:
                    raise DomainError("a single-sample path needs dt, not horizon")
                dt = float(horizon) / n
        if not dt > 0:
            raise DomainError("dt must be positive")

        entries: dict[int, np.ndarray] = {}

        def _add(k: int, delta) -> None:
            delta = np.broadcast_to(np.asarray(delta, dtype=np.float64), (d,)).copy()
            if k < 0 or k > n:
                raise DomainError(f"jump index {k} outside grid 0..{n}")
            if k == 0 and n > 0:
                raise DomainError("no jump can be registered at time 0")
            if np.any(delta != 0):
                entries[k] = entries.get(k, np.zeros(d)) + delta

        if jumps is not None:
            items = jumps.items() if isinstance(jumps, Mapping) else jumps
            for t, delta in items:
                _add(_exact_index(float(t), dt, n), delta)
        if jump_indices is not None:
            for k, delta in jump_indices.items():
                _add(int(k), delta)

        keys = sorted(k for k in entries if k < n)
        jidx = np.array(keys, dtype=np.int64)
        jdel = np.array([entries[k] for k in keys], dtype=np.float64).reshape(len(keys), d)
        tip_jump = _readonly(entries[n].copy()) if n in entries else None
        return cls(
            dt,
            _readonly(vals[:n].copy()),
            _readonly(vals[n].copy()),
            _readonly(jidx),
            _readonly(jdel),
            tip_jump,
            master_horizon,
        )

    @classmethod
    def constant(cls, value, horizon: float, n: int, **kw) -> "CadlagPath":
        value = np.atleast_1d(np.asarray(value, dtype=np.float64))
        return cls.from_values(np.tile(value, (n + 1, 1)), horizon / n if n else 1.0, **kw)

    # ------------------------------------------------------------------
    # basic properties
    # ------------------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.body)

    @property
    def dim(self) -> int:
        return self.tip.shape[0]

    @property
    def horizon(self) -> float:
        return self.n * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.dt

    @property
    def values(self) -> np.ndarray:
        """All samples, shape (n+1, d).  Allocates."""
        return np.vstack([self.body, self.tip[None, :]])

    @property
    def grid_depth(self) -> int:
        """log2 of the number of master-grid intervals."""
        m = self.master_horizon / self.dt
        k = int(round(math.log2(m))) if m >= 1 else 0
        if abs(2**k - m) > 1e-6 * m:
            raise DomainError(f"grid with {m} intervals is not dyadic")
        return k

    @property
    def registry(self) -> list[tuple[float, np.ndarray]]:
        """Registry as time-sorted (time, delta) pairs."""
        out = [(int(k) * self.dt, self.jump_delta[i]) for i, k in enumerate(self.jump_index)]
        if self.tip_jump is not None:
            out.append((self.horizon, self.tip_jump))
        return out

    def registry_indices(self) -> np.ndarray:
        idx = self.jump_index
        if self.tip_jump is not None:
            idx = np.append(idx, self.n)
        return idx

    def registry_deltas(self) -> np.ndarray:
        if self.tip_jump is not None:
            return np.vstack([self.jump_delta, self.tip_jump[None, :]])
        return self.jump_delta

    def is_continuous(self) -> bool:
        return len(self.jump_index) == 0 and self.tip_jump is None

    def __repr__(self) -> str:
        return (f"CadlagPath(dim={self.dim}, horizon={self.horizon:g}, n={self.n}, "
                f"jumps={len(self.jump_index) + (self.tip_jump is not None)})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, CadlagPath):
            return NotImplemented
        if self.n != other.n or self.dim != other.dim or self.dt != other.dt:
            return False
        if not (np.array_equal(self.body, other.body) and np.array_equal(self.tip, other.tip)):
            return False
        if not (np.array_equal(self.jump_index, other.jump_index)
                and np.array_equal(self.jump_delta, other.jump_delta)):
            return False
        if (self.tip_jump is None) != (other.tip_jump is None):
            return False
        return self.tip_jump is None or np.array_equal(self.tip_jump, other.tip_jump)

    __hash__ = None

    # ------------------------------------------------------------------
    # grid lookup
    # ------------------------------------------------------------------
    def index_floor(self, t: float) -> int:
        """Largest grid index whose time is <= t."""
        tol = _SNAP * self.dt
        if t < -tol or t > self.horizon + tol:
            raise DomainError(f"t={t!r} outside [0, {self.horizon!r}]")
        return min(int(math.floor(t / self.dt + _SNAP)), self.n)

    def index_of(self, t: float) -> int:
        """Grid index of ``t``; PrecisionError if t is not a grid time."""
        k = _exact_index(t, self.dt, self.n)
        return k

    def value(self, k: int) -> np.ndarray:
        return self.tip if k == self.n else self.body[k]

    def jump_at(self, k: int) -> np.ndarray | None:
        if k == self.n:
            return self.tip_jump
        i = int(np.searchsorted(self.jump_index, k))
        if i < len(self.jump_index) and self.jump_index[i] == k:
            return self.jump_delta[i]
        return None

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def eval(self, t: float) -> np.ndarray:
        """Right-continuous value at ``t``."""
        return self.value(self.index_floor(t))

    __call__ = eval

    def left_limit(self, t: float) -> np.ndarray:
        """``x(t-)``.  At t = 0 this is ``x(0)``."""
        k = self.index_floor(t)
        if abs(t - k * self.dt) > _SNAP * self.dt:
            return self.value(k)  # strictly inside a constant stretch
        delta = self.jump_at(k)
        v = self.value(k)
        return v if delta is None else v - delta

    def values_at(self, ts) -> np.ndarray:
        """Vectorized right-continuous evaluation, shape (len(ts), d)."""
        ts = np.asarray(ts, dtype=np.float64)
        tol = _SNAP * self.dt
        if ts.size and (ts.min() < -tol or ts.max() > self.horizon + tol):
            raise DomainError("evaluation times outside the path horizon")
        k = np.minimum(np.floor(ts / self.dt + _SNAP).astype(np.int64), self.n)
        out = np.empty((len(ts), self.dim))
        inner = k < self.n
        out[inner] = self.body[k[inner]]
        out[~inner] = self.tip
        return out

    # ------------------------------------------------------------------
    # path operations
    # ------------------------------------------------------------------
    def restrict(self, t: float) -> "CadlagPath":
        """The restriction ``x_t`` to ``[0, t]``; t must be a grid time."""
        k = self.index_of(t)
        if k == self.n:
            return self
        cut = int(np.searchsorted(self.jump_index, k))
        tip_jump = None
        if cut < len(self.jump_index) and self.jump_index[cut] == k:
            tip_jump = self.jump_delta[cut]
        prefix = None if self._prefix is None else self._prefix[: k + 1]
        return CadlagPath(self.dt, self.body[:k], self.body[k], self.jump_index[:cut],
                          self.jump_delta[:cut], tip_jump, self.master_horizon, prefix)

    def stopped_before(self, t: float) -> "CadlagPath":
        """The path ``x_{t-}``: restriction with the value at t replaced by x(t-)."""
        r = self.restrict(t)
        if r.tip_jump is None:
            return r
        return CadlagPath(r.dt, r.body, _readonly(r.tip - r.tip_jump), r.jump_index,
                          r.jump_delta, None, r.master_horizon, r._prefix)

    def horizontal_extend(self, h: float) -> "CadlagPath":
        """``x_{t,h}``: freeze the final value for a further duration h."""
        if h < -_SNAP * self.dt:
            raise DomainError(f"negative extension h={h!r}")
        steps = h / self.dt
        K = int(round(steps))
        if abs(steps - K) > 1e-7 * max(1.0, steps):
            raise PrecisionError(f"h={h!r} is not a multiple of the grid step {self.dt!r}")
        if K == 0:
            return self
        if (self.n + K) * self.dt > self.master_horizon * (1 + 1e-12) + _SNAP * self.dt:
            raise DomainError(
                f"extension to {(self.n + K) * self.dt!r} passes the master horizon {self.master_horizon!r}")
        body = _readonly(np.vstack([self.body, np.tile(self.tip, (K, 1))]))
        jidx, jdel = self.jump_index, self.jump_delta
        if self.tip_jump is not None:
            jidx = _readonly(np.append(jidx, self.n))
            jdel = _readonly(np.vstack([jdel, self.tip_jump[None, :]]))
        return CadlagPath(self.dt, body, self.tip, jidx, jdel, None, self.master_horizon)

    def vertical_perturb(self, e) -> "CadlagPath":
        """``x^e_t``: shift the final value by e, recording it as a jump at t."""
        e = np.broadcast_to(np.asarray(e, dtype=np.float64), (self.dim,))
        if not np.any(e):
            return self
        tip_jump = e.copy() if self.tip_jump is None else self.tip_jump + e
        if not np.any(tip_jump):
            tip_jump = None
        return CadlagPath(self.dt, self.body, _readonly(self.tip + e), self.jump_index,
                          self.jump_delta,
                          None if tip_jump is None else _readonly(tip_jump),
                          self.master_horizon, self._prefix)

    # ------------------------------------------------------------------
    # integrals
    # ------------------------------------------------------------------
    def prefix_integral(self) -> np.ndarray:
        """Left-endpoint Riemann sums ``S[k] = sum_{j<k} x(j dt) dt``, shape (n+1, d).

        Cached, and shared with restrictions taken afterwards.
        """
        if self._prefix is None:
            cum = np.zeros((self.n + 1, self.dim))
            np.cumsum(self.body * self.dt, axis=0, out=cum[1:])
            self._prefix = _readonly(cum)
        return self._prefix

    def integral(self) -> np.ndarray:
        """Left-endpoint Riemann sum of the path over [0, horizon]."""
        if self._prefix is not None:
            return self._prefix[self.n]
        return np.cumsum(self.body * self.dt, axis=0)[-1] if self.n else np.zeros(self.dim)


def _exact_index(t: float, dt: float, n: int) -> int:
    s = t / dt
    k = int(round(s))
    if abs(s - k) > _SNAP * max(1.0, abs(s)) or k < 0 or k > n:
        if 0 <= k <= n:
            raise PrecisionError(f"t={t!r} is not on the grid of step {dt!r}")
        raise DomainError(f"t={t!r} outside [0, {n * dt!r}]")
    return k


# ----------------------------------------------------------------------
# symmetric-matrix packing for the second argument v
# ----------------------------------------------------------------------
def sym_size(d: int) -> int:
    return d * (d + 1) // 2


def sym_dim(m: int) -> int:
    d = int(round((math.sqrt(8 * m + 1) - 1) / 2))
    if sym_size(d) != m:
        raise DomainError(f"{m} components do not pack a symmetric matrix")
    return d


def unpack_sym(packed) -> np.ndarray:
    """Packed upper triangle (row-major) to full matrices; works on stacks."""
    packed = np.asarray(packed, dtype=np.float64)
    d = sym_dim(packed.shape[-1])
    out = np.zeros(packed.shape[:-1] + (d, d))
    iu = np.triu_indices(d)
    out[..., iu[0], iu[1]] = packed
    out[..., iu[1], iu[0]] = packed
    return out


def pack_sym(mat) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    iu = np.triu_indices(mat.shape[-1])
    return mat[..., iu[0], iu[1]]


@dataclass(frozen=True)
class PathPair:
    """A point (x, v) of the path bundle: x in R^d, v symmetric PSD (packed)."""

    x: CadlagPath
    v: CadlagPath
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        if self.x.n != self.v.n or abs(self.x.horizon - self.v.horizon) > _SNAP * self.x.dt:
            raise DomainError(
                f"x and v horizons differ ({self.x.horizon!r} vs {self.v.horizon!r})")
        if self.v.dim != sym_size(self.x.dim):
            raise DomainError(f"v must have {sym_size(self.x.dim)} components for d={self.x.dim}")
        if validate:
            vals = self.v.values
            if self.x.dim == 1:
                bad = vals[:, 0] < -1e-12
            else:
                bad = np.linalg.eigvalsh(unpack_sym(vals)).min(axis=1) < -1e-12
            if np.any(bad):
                raise DomainError("v must be positive semidefinite at every grid time")

    @classmethod
    def with_constant_v(cls, x: CadlagPath, v_value=1.0) -> "PathPair":
        """Pair x with v constant in time (a scalar c means c * identity)."""
        v_value = np.asarray(v_value, dtype=np.float64)
        if v_value.ndim == 0:
            v_value = pack_sym(float(v_value) * np.eye(x.dim))
        v = CadlagPath.from_values(np.tile(v_value, (x.n + 1, 1)), x.dt,
                                   master_horizon=x.master_horizon)
        return cls(x, v)

    @property
    def horizon(self) -> float:
        return self.x.horizon

    @property
    def dim(self) -> int:
        return self.x.dim

    def restrict(self, t: float) -> "PathPair":
        return PathPair(self.x.restrict(t), self.v.restrict(t), False)

    def stopped_before(self, t: float) -> "PathPair":
        return PathPair(self.x.stopped_before(t), self.v.stopped_before(t), False)

    def horizontal_extend(self, h: float) -> "PathPair":
        return PathPair(self.x.horizontal_extend(h), self.v.horizontal_extend(h), False)

    def vertical_perturb(self, e) -> "PathPair":
        """Bump the endpoint of x only; v is never perturbed."""
        return PathPair(self.x.vertical_perturb(e), self.v, False)


# ----------------------------------------------------------------------
# metric, jumps, step approximation
# ----------------------------------------------------------------------
def _sup_ext(a: CadlagPath, b: CadlagPath) -> float:
    """sup over the union grid of |a extended horizontally - b|."""
    ts = np.union1d(a.times, b.times)
    ts = ts[ts <= b.horizon + _SNAP * b.dt]
    av = a.values_at(np.minimum(ts, a.horizon))
    bv = b.values_at(ts)
    return float(row_norms(av - bv).max())


def d_infty(p: PathPair, q: PathPair) -> float:
    """Distance between p on [0,t] and q on [0,t+h], h >= 0.

    ``sup|x_{t,h} - x'| + sup|v_{t,h} - v'| + h``; argument order matters.
    """
    h = q.horizon - p.horizon
    if h < -_SNAP * min(p.x.dt, q.x.dt):
        raise DomainError("d_infty needs horizon(q) >= horizon(p)")
    h = max(h, 0.0)
    return _sup_ext(p.x, q.x) + _sup_ext(p.v, q.v) + h


def jumps(path: CadlagPath, threshold: float = 0.0) -> list[tuple[float, np.ndarray]]:
    """Registry entries with |delta| >= threshold, in time order."""
    return [(t, d) for t, d in path.registry if _norm(d) >= threshold]


def step_approximation(path: CadlagPath, sub) -> tuple[CadlagPath, float]:
    """Step function ``sum h(t_i) 1_[t_i, t_i+1) + h(t_k) 1_{t_k}`` and its sup error.

    ``sub`` is a Subdivision or an array of grid times containing 0 and the
    horizon.  Every step change of the result is registered as a jump.
    """
    times = np.asarray(getattr(sub, "times", sub), dtype=np.float64)
    idx = np.array([path.index_of(float(t)) for t in times], dtype=np.int64)
    idx = np.unique(idx)
    if idx[0] != 0 or idx[-1] != path.n:
        raise DomainError("subdivision must start at 0 and end at the path horizon")
    vals = path.values
    owner = np.searchsorted(idx, np.arange(path.n + 1), side="right") - 1
    step_vals = vals[idx[owner]]
    changes = {int(k): step_vals[k] - step_vals[k - 1] for k in idx[1:]}
    step = CadlagPath.from_values(step_vals, path.dt, jump_indices=changes,
                                  master_horizon=path.master_horizon)
    return step, float(row_norms(vals - step_vals).max())


def step_oscillation_bound(path: CadlagPath, sub) -> float:
    """Largest oscillation ``sup |x(s) - x(u)|`` over s, u in one cell [t_i, t_{i+1}).

    Bounds the step-approximation error from above and, unlike that error,
    never increases when the subdivision is refined.
    """
    times = np.asarray(getattr(sub, "times", sub), dtype=np.float64)
    idx = np.unique([path.index_of(float(t)) for t in times])
    vals = path.values
    worst = 0.0
    for a, b in zip(idx[:-1], idx[1:]):
        cell = vals[a:b]
        if len(cell) > 1:
            # the diameter of a point cloud, via distances to every point
            if path.dim == 1:
                worst = max(worst, float(cell.max() - cell.min()))
            else:
                for j in range(len(cell)):
                    worst = max(worst, float(row_norms(cell - cell[j]).max()))
    return worst


def oscillation_excess(path: CadlagPath, max_steps: int) -> np.ndarray:
    """For w = 1..max_steps, the largest value over the grid of

        |x(s) - x(u)| - max{|delta(r)| : r registered in [s, u]},   u - s = w*dt.

    Non-positive entries up to w mean the uniform cadlag modulus holds with
    epsilon = 0 at scale w*dt; see :func:`uniform_scale`.
    """
    vals = path.values
    jm = np.zeros(path.n + 1)
    idx = path.registry_indices()
    if len(idx):
        jm[idx] = row_norms(path.registry_deltas())
    out = np.full(max_steps, -np.inf)
    wmax = jm.copy()
    for w in range(1, min(max_steps, path.n) + 1):
        wmax = np.maximum(wmax[:-1], jm[w:])
        out[w - 1] = float((row_norms(vals[w:] - vals[:-w]) - wmax).max())
    return out


def uniform_scale(path: CadlagPath, eps: float, max_steps: int = 256) -> int:
    """Largest w (in grid steps) with excess <= eps for every window up to w."""
    ex = oscillation_excess(path, max_steps)
    ok = ex <= eps
    return int(np.argmin(ok)) if not ok.all() else len(ok)


# ----------------------------------------------------------------------
# CSV format
# ----------------------------------------------------------------------
def _fmt(x: float) -> str:
    return "%.17g" % x


def write_path_csv(path: CadlagPath, fh, comments: Sequence[str] = ()) -> None:
    """Write ``t,x1..xd`` rows; a jump is a duplicated time (left limit first)."""
    for line in comments:
        fh.write(f"# {line}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t"] + [f"x{i + 1}" for i in range(path.dim)])
    vals = path.values
    jump_rows = dict(zip(path.registry_indices().tolist(), path.registry_deltas()))
    for k in range(path.n + 1):
        t = _fmt(k * path.dt)
        if k in jump_rows:
            w.writerow([t] + [_fmt(c) for c in vals[k] - jump_rows[k]])
        w.writerow([t] + [_fmt(c) for c in vals[k]])


def read_path_csv(fh, depth: int | None = None) -> CadlagPath:
    """Read the CSV format back onto a uniform dyadic grid.

    Times are snapped to the grid of step ``T / 2**depth`` (inferred from the
    smallest time increment when depth is None); gaps are filled with the
    last value (right-continuous, piecewise constant).
    """
    if isinstance(fh, (str, bytes)) and not hasattr(fh, "read"):
        fh = io.StringIO(fh)
    rows = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(rows)
    header = next(reader)
    if not header or header[0].strip() != "t":
        raise DomainError("path CSV must start with a 't,x1,...' header")
    data = np.array([[float(c) for c in r] for r in reader], dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != len(header):
        raise DomainError("ragged path CSV")
    ts, xs = data[:, 0], data[:, 1:]
    if np.any(np.diff(ts) < 0):
        raise DomainError("path CSV rows must be time-sorted")
    T = ts[-1]
    if ts[0] != 0 or T <= 0:
        raise DomainError("path CSV must cover [0, T] with T > 0")
    if depth is None:
        gaps = np.diff(np.unique(ts))
        m = T / gaps.min()
        depth = int(round(math.log2(m)))
    n = 2**depth
    dt = T / n
    k = np.rint(ts / dt).astype(np.int64)
    if np.any(np.abs(ts / dt - k) > 1e-6):
        raise PrecisionError("path CSV times do not lie on a dyadic grid; pass depth")
    vals = np.empty((n + 1, xs.shape[1]))
    jumps_ = {}
    # last row at each index is the value; an earlier row at the same index is the left limit
    last = {}
    first = {}
    for r, kk in enumerate(k):
        first.setdefault(int(kk), r)
        last[int(kk)] = r
    cur = None
    for g in range(n + 1):
        if g in last:
            cur = xs[last[g]]
            if first[g] != last[g]:
                jumps_[g] = xs[last[g]] - xs[first[g]]
        vals[g] = cur
    return CadlagPath.from_values(vals, dt, jump_indices=jumps_)
