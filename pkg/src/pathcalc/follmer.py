"""Piecewise-constant approximants, Follmer sums and change-of-variable reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .derivatives import DEFAULT_SCHEME, FDScheme, horizontal_derivative, vertical_gradient, vertical_hessian
from .errors import ConfigError, DomainError, PathCalcError
from .functionals import Functional, evaluate
from .paths import CadlagPath, PathPair, _readonly
from .qv import Subdivision, subdivision_for

MODES = ("continuous", "cadlag", "right")
SUMMATIONS = ("fsum", "sequential", "pairwise")


def _sum(terms, how: str) -> float:
    if how == "fsum":
        return math.fsum(terms)
    if how == "sequential":
        total = 0.0
        for x in terms:
            total += x
        return total
    if how == "pairwise":
        return float(np.sum(np.asarray(terms, dtype=np.float64)))
    raise ConfigError(f"unknown summation {how!r}; choose from {SUMMATIONS}")


@dataclass(frozen=True)
class ApproximantPair:
    """Step approximants ``(x^n, v^n)`` of a pair along a subdivision.

    Attributes
    ----------
    x_n, v_n : CadlagPath
        The step paths on the master grid.  Their registries hold the jumps
        of the source at subdivision times.
    mode : str
        ``continuous`` (x(t_{i+1}) on [t_i, t_{i+1})), ``cadlag``
        (x(t_{i+1}-)) or ``right`` (x(t_i)).
    sub : Subdivision
    idx : ndarray
        Grid indices of the subdivision times.
    """

    x_n: CadlagPath
    v_n: CadlagPath
    mode: str
    sub: Subdivision
    idx: np.ndarray
    source: PathPair = field(repr=False)

    def _slice(self, path: CadlagPath, k: int, tip, tip_jump=None, upto: int | None = None) -> CadlagPath:
        upto = k if upto is None else upto
        cut = int(np.searchsorted(path.jump_index, upto, side="left"))
        return CadlagPath(path.dt, path.body[:upto], _readonly(np.array(tip, dtype=np.float64)),
                          path.jump_index[:cut], path.jump_delta[:cut],
                          None if tip_jump is None else _readonly(np.array(tip_jump, dtype=np.float64)),
                          path.master_horizon)

    def snapshot(self, i: int) -> tuple[float, PathPair]:
        """Time and pair at which the i-th integrand ``nabla_x F`` is taken."""
        k = int(self.idx[i])
        x, v = self.source.x, self.source.v
        t = k * x.dt
        if self.mode == "right":
            # x^n restricted at t_i, extended to t_{i+1}: on a step path this is
            # x^n up to t_{i+1} with its endpoint frozen at x(t_i)
            k1 = int(self.idx[i + 1])
            xs = self._slice(self.x_n, k1, x.value(k), upto=k1)
            vs = self._slice(self.v_n, k1, v.value(k), upto=k1)
            return k1 * x.dt, PathPair(xs, vs, False)
        # endpoint of x^n_{t_i-}; at t_0 there is no earlier interval
        if i == 0:
            x_left, v_left = x.value(0), v.value(0)
        else:
            x_left = self.x_n.body[k - 1]
            v_left = self.v_n.body[k - 1]
        tip_jump = None
        if self.mode == "cadlag":
            delta = x.jump_at(k) if k > 0 else None
            if delta is not None:
                x_left = x_left + delta
                tip_jump = delta
        xs = self._slice(self.x_n, k, x_left, tip_jump)
        vs = self._slice(self.v_n, k, v_left)
        return t, PathPair(xs, vs, False)


def _step_path(source: CadlagPath, idx: np.ndarray, step_vals: np.ndarray) -> CadlagPath:
    """Grid path equal to step_vals[i] on [t_i, t_{i+1}) and source(T) at T."""
    counts = np.diff(idx)
    body = _readonly(np.repeat(step_vals, counts, axis=0))
    reg = source.registry_indices()
    keep = np.isin(reg, idx[1:]) & (reg < source.n)
    jidx = _readonly(reg[keep].astype(np.int64))
    jdel = _readonly(source.registry_deltas()[keep].copy()) if len(reg) else source.jump_delta
    return CadlagPath(source.dt, body, source.tip, jidx, jdel, source.tip_jump, source.master_horizon)


def build_approximants(p: PathPair, sub: Subdivision, mode: str = "continuous") -> ApproximantPair:
    """Step approximants of p along sub in the given mode.

    The cadlag mode needs a subdivision that collects the jumps (scheme
    ``jump`` or ``stopping``).
    """
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; choose from {MODES}")
    if mode == "cadlag" and sub.scheme not in ("jump", "stopping"):
        raise ConfigError("cadlag mode needs a jump-augmented or stopping-time subdivision")
    x, v = p.x, p.v
    idx = sub.indices(x)
    xv, vv = x.values, v.values
    if mode == "continuous":
        xs = xv[idx[1:]]
    elif mode == "cadlag":
        xs = np.array([x.left_limit(k * x.dt) for k in idx[1:]]).reshape(-1, x.dim)
    else:
        xs = xv[idx[:-1]]
    vs = vv[idx[:-1]]
    return ApproximantPair(_step_path(x, idx, xs), _step_path(v, idx, vs), mode, sub, idx, p)


def _gradient(F: Functional, t: float, q: PathPair, use_analytic: bool, scheme: FDScheme) -> np.ndarray:
    if use_analytic and F.analytic_vertical is not None:
        return np.asarray(F.analytic_vertical(t, q), dtype=np.float64)
    return vertical_gradient(F, q, t, scheme)


def follmer_terms(F: Functional, p: PathPair, sub: Subdivision, mode: str = "continuous",
                  use_analytic: bool = True, scheme: FDScheme = DEFAULT_SCHEME) -> np.ndarray:
    """The individual Riemann-sum terms ``<nabla_x F(snapshot_i), x(t_{i+1}) - x(t_i)>``."""
    approx = build_approximants(p, sub, mode)
    xv = p.x.values[approx.idx]
    inc = np.diff(xv, axis=0)
    out = np.empty(len(inc))
    for i in range(len(inc)):
        s, snap = approx.snapshot(i)
        try:
            g = _gradient(F, s, snap, use_analytic, scheme)
        except PathCalcError as exc:
            raise type(exc)(f"{exc} (snapshot i={i}, t={s!r})") from exc
        out[i] = float(np.dot(g, inc[i]))
    return out


def follmer_sum(F: Functional, p: PathPair, sub: Subdivision, mode: str = "continuous",
                use_analytic: bool = True, scheme: FDScheme = DEFAULT_SCHEME,
                summation: str = "fsum") -> float:
    """Non-anticipative Riemann sum approximating the Follmer integral."""
    return _sum(follmer_terms(F, p, sub, mode, use_analytic, scheme).tolist(), summation)


def _jump_times(p: PathPair) -> np.ndarray:
    idx = np.union1d(p.x.registry_indices(), p.v.registry_indices())
    return idx[idx > 0].astype(np.int64)


def jump_compensation(F: Functional, p: PathPair, threshold: float = 0.0, times=None,
                      use_analytic: bool = True, scheme: FDScheme = DEFAULT_SCHEME,
                      summation: str = "fsum") -> float:
    """Sum over jump times u in ]0, T] of
    ``F_u(x_u, v_u) - F_u(x_{u-}, v_{u-}) - nabla_x F_u(x_{u-}, v_{u-}) . dx(u)``.

    Jumps with ``max(|dx|, |dv|) < threshold`` are skipped; ``times``, when
    given, restricts the sum to those grid times.
    """
    return _sum(_compensation_terms(F, p, threshold, times, use_analytic, scheme), summation)


def _compensation_terms(F, p, threshold, times, use_analytic, scheme) -> list[float]:
    ks = _jump_times(p)
    if times is not None:
        wanted = np.rint(np.asarray(times, dtype=np.float64) / p.x.dt).astype(np.int64)
        ks = ks[np.isin(ks, wanted)]
    terms = []
    zero = np.zeros(p.dim)
    for k in ks.tolist():
        dx = p.x.jump_at(k)
        dv = p.v.jump_at(k)
        size = max(0.0 if dx is None else float(np.linalg.norm(dx)),
                   0.0 if dv is None else float(np.linalg.norm(dv)))
        if size < threshold:
            continue
        u = k * p.x.dt
        after = p.restrict(u)
        before = p.stopped_before(u)
        dx = zero if dx is None else dx
        g = _gradient(F, u, before, use_analytic, scheme)
        terms.append(evaluate(F, u, after) - evaluate(F, u, before) - float(np.dot(g, dx)))
    return terms


@dataclass(frozen=True)
class CovReport:
    """All terms of the change-of-variable formula at one level.

    The residual is recomputed from the stored terms on every access.
    """

    level: int
    lhs: float
    term_horizontal: float
    term_trace: float
    term_follmer: float
    term_jumps: float
    mode: str = "continuous"
    scheme: str = "dyadic"
    error: str | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return self.lhs - (self.term_horizontal + self.term_trace + self.term_follmer + self.term_jumps)

    @property
    def ok(self) -> bool:
        return self.error is None


def _horizontal(F, t, q, use_analytic, scheme) -> float:
    if use_analytic and F.analytic_horizontal is not None:
        return float(F.analytic_horizontal(t, q))
    room = int(round((q.x.master_horizon - t) / q.x.dt))
    if room < 1:
        raise DomainError(f"no forward room for the horizontal derivative at t={t!r}")
    steps = min(scheme.horizontal_steps, room.bit_length())
    return horizontal_derivative(F, q, t, replace(scheme, horizontal_steps=steps), force_fd=True)


def _hessian(F, t, q, use_analytic, scheme) -> np.ndarray:
    if use_analytic and F.analytic_vertical2 is not None:
        return np.asarray(F.analytic_vertical2(t, q), dtype=np.float64)
    return vertical_hessian(F, q, t, scheme)


def level_report(F: Functional, p: PathPair, sub: Subdivision, mode: str = "continuous",
                 use_analytic: bool = True, scheme: FDScheme = DEFAULT_SCHEME,
                 summation: str = "fsum") -> CovReport:
    """Change-of-variable terms along one subdivision (errors propagate)."""
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; choose from {MODES}")
    x = p.x
    idx = sub.indices(x)
    xv = x.values[idx]
    inc = np.diff(xv, axis=0)
    times = idx * x.dt
    h = np.diff(times)
    jumpy = mode == "cadlag"
    horiz, trace = [], []
    hess_sup = 0.0
    for i in range(len(inc)):
        t = float(times[i])
        q = p.stopped_before(t) if jumpy else p.restrict(t)
        horiz.append(_horizontal(F, t, q, use_analytic, scheme) * float(h[i]))
        H = _hessian(F, t, q, use_analytic, scheme)
        hess_sup = max(hess_sup, float(np.abs(H).max()))
        dq = np.outer(inc[i], inc[i])
        if jumpy:
            delta = x.jump_at(int(idx[i + 1]))
            if delta is not None:
                dq = dq - np.outer(delta, delta)
        trace.append(0.5 * float(np.sum(H * dq)))
    follmer = follmer_sum(F, p, sub, mode, use_analytic, scheme, summation)
    jumps = 0.0
    diagnostics: dict = {}
    if jumpy:
        jumps = _sum(_compensation_terms(F, p, 0.0, times[1:], use_analytic, scheme), summation)
        reg = x.registry_indices()
        missed = ~np.isin(reg, idx)
        small = float((x.registry_deltas()[missed] ** 2).sum()) if len(reg) else 0.0
        diagnostics["small_jump_bound"] = small * hess_sup
    lhs = evaluate(F, x.horizon, p) - evaluate(F, 0.0, p.restrict(0.0))
    return CovReport(sub.level, lhs, _sum(horiz, summation), _sum(trace, summation), follmer, jumps,
                     mode, sub.scheme, None, diagnostics)


def change_of_variable_report(F: Functional, p: PathPair, levels, scheme: str = "dyadic",
                              mode: str = "continuous", use_analytic: bool = True,
                              fd: FDScheme = DEFAULT_SCHEME, summation: str = "fsum") -> list[CovReport]:
    """Per-level change-of-variable reports.

    A level whose computation fails is reported with NaN terms and the error
    message; the remaining levels are still computed.
    """
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; choose from {MODES}")
    if mode == "cadlag" and scheme == "dyadic":
        raise ConfigError("cadlag mode needs the jump or stopping scheme")
    if summation not in SUMMATIONS:
        raise ConfigError(f"unknown summation {summation!r}; choose from {SUMMATIONS}")
    depth = p.x.grid_depth
    out = []
    for n in levels:
        if n > depth:
            raise DomainError(f"level exceeds grid depth ({n} > {depth})")
        try:
            sub = subdivision_for(p, n, scheme)
            out.append(level_report(F, p, sub, mode, use_analytic, fd, summation))
        except (PathCalcError, ArithmeticError) as exc:
            nan = math.nan
            out.append(CovReport(n, nan, nan, nan, nan, nan, mode, scheme, f"{type(exc).__name__}: {exc}"))
    return out
