"""Horizontal and vertical derivatives by finite differences on path perturbations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, EvaluationError
from .functionals import Functional, evaluate, random_pair
from .paths import CadlagPath, PathPair

_FLOOR = 2.0**-40


@dataclass(frozen=True)
class FDScheme:
    """Finite-difference step sizes.

    Parameters
    ----------
    vertical_eps : float
        Relative step of the central gradient stencil.
    hessian_eps : float
        Relative step of the second-difference stencil.
    horizontal_steps : int
        Number of step sizes ``dt, 2 dt, 4 dt, ...`` combined by Richardson
        extrapolation for the horizontal derivative.
    """

    vertical_eps: float = 1e-5
    hessian_eps: float = 1e-3
    horizontal_steps: int = 2

    def __post_init__(self):
        if not (self.vertical_eps > 0 and self.hessian_eps > 0):
            raise ConfigError("finite-difference steps must be positive")
        if int(self.horizontal_steps) != self.horizontal_steps or self.horizontal_steps < 1:
            raise ConfigError("horizontal_steps must be a positive integer")


DEFAULT_SCHEME = FDScheme()


def _step(eps: float, x: np.ndarray) -> float:
    return max(eps * max(1.0, float(np.linalg.norm(x))), _FLOOR)


def _bumped(F: Functional, t: float, q: PathPair, e: np.ndarray, label: str) -> float:
    try:
        return evaluate(F, t, q.vertical_perturb(e))
    except EvaluationError as exc:
        raise EvaluationError(f"{exc} (vertical perturbation {label})") from exc


def richardson(values, ratio: float = 2.0) -> float:
    """Extrapolate first-order estimates taken at steps h, ratio*h, ratio^2*h, ..."""
    table = [float(v) for v in values]
    for j in range(1, len(table)):
        f = ratio**j
        table = [(f * table[k] - table[k + 1]) / (f - 1.0) for k in range(len(table) - 1)]
    return table[0]


def horizontal_derivative(F: Functional, p: PathPair, t: float, scheme: FDScheme = DEFAULT_SCHEME,
                          force_fd: bool = False) -> float:
    """``D_t F`` at the restriction of p to [0, t].

    Forward differences over horizontal extensions of both x and v at steps
    ``dt * 2**k``, k < horizontal_steps, Richardson-extrapolated.  The
    analytic derivative is used when the functional carries one, unless
    ``force_fd``.
    """
    q = p.restrict(t)
    if F.analytic_horizontal is not None and not force_fd:
        return float(F.analytic_horizontal(t, q))
    dt = p.x.dt
    h_max = dt * 2 ** (scheme.horizontal_steps - 1)
    if t + h_max > q.x.master_horizon * (1 + 1e-12) + 1e-12:
        raise DomainError(f"no forward room for a horizontal step {h_max!r} at t={t!r}")
    f0 = evaluate(F, t, q)
    quotients = []
    for k in range(scheme.horizontal_steps):
        h = dt * 2**k
        quotients.append((evaluate(F, t + h, q.horizontal_extend(h)) - f0) / h)
    return richardson(quotients)


def vertical_gradient(F: Functional, p: PathPair, t: float, scheme: FDScheme = DEFAULT_SCHEME,
                      force_fd: bool = True) -> np.ndarray:
    """Central-difference ``nabla_x F`` under endpoint bumps of x (v untouched).

    With ``force_fd=False`` the analytic gradient is returned when present.
    """
    q = p.restrict(t)
    if F.analytic_vertical is not None and not force_fd:
        return np.asarray(F.analytic_vertical(t, q), dtype=np.float64)
    x = q.x.tip
    d = q.dim
    h = _step(scheme.vertical_eps, x)
    grad = np.empty(d)
    for i in range(d):
        hp = (x[i] + h) - x[i]
        hm = x[i] - (x[i] - h)
        e = np.zeros(d)
        e[i] = hp
        fp = _bumped(F, t, q, e, f"+h e{i + 1}")
        e[i] = -hm
        fm = _bumped(F, t, q, e, f"-h e{i + 1}")
        grad[i] = (fp - fm) / (hp + hm)
    return grad


def vertical_hessian(F: Functional, p: PathPair, t: float, scheme: FDScheme = DEFAULT_SCHEME,
                     force_fd: bool = True) -> np.ndarray:
    """Second-difference ``nabla^2_x F``, symmetrized so that ``H == H.T`` exactly."""
    q = p.restrict(t)
    if F.analytic_vertical2 is not None and not force_fd:
        H = np.asarray(F.analytic_vertical2(t, q), dtype=np.float64)
        return (H + H.T) / 2
    x = q.x.tip
    d = q.dim
    h = _step(scheme.hessian_eps, x)
    f0 = evaluate(F, t, q)
    H = np.empty((d, d))

    def at(signs: dict[int, float]) -> float:
        e = np.zeros(d)
        for i, s in signs.items():
            e[i] += s * h
        label = " ".join(f"{'+' if s > 0 else '-'}h e{i + 1}" for i, s in signs.items())
        return _bumped(F, t, q, e, label)

    for i in range(d):
        H[i, i] = (at({i: 1}) - 2 * f0 + at({i: -1})) / (h * h)
        for j in range(i + 1, d):
            H[i, j] = (at({i: 1, j: 1}) - at({i: 1, j: -1}) - at({i: -1, j: 1})
                       + at({i: -1, j: -1})) / (4 * h * h)
            H[j, i] = H[i, j]
    return (H + H.T) / 2


def v_gradient(F: Functional, p: PathPair, t: float, scheme: FDScheme = DEFAULT_SCHEME) -> np.ndarray:
    """Central differences under bumps of v's endpoint; zero for functionals predictable in v."""
    q = p.restrict(t)
    m = q.v.dim
    h = _step(scheme.vertical_eps, q.v.tip)
    out = np.empty(m)
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        fp = evaluate(F, t, PathPair(q.x, q.v.vertical_perturb(e), False))
        fm = evaluate(F, t, PathPair(q.x, q.v.vertical_perturb(-e), False))
        out[i] = (fp - fm) / (2 * h)
    return out


def horizontal_lipschitz_probe(F: Functional, p: PathPair, window: tuple[float, float],
                               perturbations: int = 16, seed: int = 0, radius: float = 0.1) -> float:
    """Largest ``|F_t2(x'_{t1, t2-t1}) - F_t1(x')| / (t2 - t1)`` over seeded pairs x' near p."""
    t1, t2 = window
    if not t1 < t2 or t2 > p.x.master_horizon + 1e-12:
        raise DomainError("window must satisfy t1 < t2 <= master horizon")
    base = p.restrict(t1)
    worst = 0.0
    for k in range(max(1, perturbations)):
        q = base
        if k:
            rng = np.random.default_rng([seed, k])
            q = probe_pair(q, rng, radius)
        num = evaluate(F, t2, q.horizontal_extend(t2 - t1)) - evaluate(F, t1, q)
        worst = max(worst, abs(num) / (t2 - t1))
    return worst


def probe_pair(q: PathPair, rng: np.random.Generator, radius: float) -> PathPair:
    """A pair within sup-distance ~radius of q: uniform shift plus an endpoint bump."""
    d = q.dim
    shift = rng.uniform(-radius, radius, d) / 2
    x = q.x
    x2 = CadlagPath(x.dt, x.body + shift, x.tip + shift, x.jump_index, x.jump_delta,
                    x.tip_jump, x.master_horizon)
    return PathPair(x2, q.v, False).vertical_perturb(rng.uniform(-radius, radius, d) / 2)


def validation_corpus(count: int, seed: int, dim: int = 1, n: int = 256, n_jumps: int = 2,
                      room: int = 8) -> list[tuple[PathPair, float]]:
    """Seeded (pair, t) cases with t a continuity point of x that leaves forward room."""
    out = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        p = random_pair(rng, dim, n, 1.0, 1.0, 1.0, n_jumps=n_jumps)
        blocked = set(p.x.registry_indices().tolist())
        choices = [k for k in range(1, n - room) if k not in blocked]
        k = int(rng.choice(choices))
        out.append((p, k * p.x.dt))
    return out


def compare(F: Functional, p: PathPair, t: float, scheme: FDScheme = DEFAULT_SCHEME) -> list[tuple]:
    """Analytic versus finite-difference derivatives at one point.

    Returns rows ``(quantity, component, analytic, fd)``; analytic is NaN
    where the functional has no closed form.
    """
    rows = []
    nan = math.nan
    fd_h = horizontal_derivative(F, p, t, scheme, force_fd=True)
    an_h = horizontal_derivative(F, p, t, scheme) if F.analytic_horizontal else nan
    rows.append(("horizontal", "", an_h, fd_h))
    fd_g = vertical_gradient(F, p, t, scheme)
    an_g = vertical_gradient(F, p, t, scheme, force_fd=False) if F.analytic_vertical else None
    for i in range(p.dim):
        rows.append(("vertical", str(i + 1), nan if an_g is None else float(an_g[i]), float(fd_g[i])))
    fd_H = vertical_hessian(F, p, t, scheme)
    an_H = vertical_hessian(F, p, t, scheme, force_fd=False) if F.analytic_vertical2 else None
    for i in range(p.dim):
        for j in range(p.dim):
            rows.append(("hessian", f"{i + 1}{j + 1}", nan if an_H is None else float(an_H[i, j]),
                         float(fd_H[i, j])))
    return rows


def relative_error(analytic: float, fd: float) -> float:
    """``|fd - analytic| / (1 + |analytic|)``."""
    return abs(fd - analytic) / (1.0 + abs(analytic))
