"""Non-anticipative functionals ``F_t(x_t, v_t)`` and regularity probes.

A functional only ever receives the restriction of a :class:`PathPair` to
``[0, t]``, so non-anticipation holds by construction.  Built-ins carry
analytic derivatives; the probes in this module give falsifiable evidence
for continuity and boundedness properties, never proofs.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from . import expr
from .errors import ConfigError, DomainError, EvaluationError, PathCalcError
from .paths import CadlagPath, PathPair, d_infty, pack_sym, sym_size

CLAIMS = frozenset(
    {"predictable_in_v", "left_continuous", "right_continuous",
     "boundedness_preserving", "horizontal_lipschitz"}
)
_HORIZON_TOL = 1e-9


@dataclass(frozen=True)
class Functional:
    """A non-anticipative functional with optional analytic derivatives.

    Attributes
    ----------
    evaluate : callable (t, PathPair) -> float
        The functional itself; the pair always has horizon t.
    analytic_horizontal : callable (t, PathPair) -> float, optional
    analytic_vertical : callable (t, PathPair) -> ndarray (d,), optional
    analytic_vertical2 : callable (t, PathPair) -> ndarray (d, d), optional
    claims : frozenset of str
        Declared regularity flags, a subset of :data:`CLAIMS`.
    """

    evaluate: Callable[[float, PathPair], float]
    analytic_horizontal: Callable[[float, PathPair], float] | None = None
    analytic_vertical: Callable[[float, PathPair], np.ndarray] | None = None
    analytic_vertical2: Callable[[float, PathPair], np.ndarray] | None = None
    claims: frozenset = frozenset()
    name: str = "functional"

    def __post_init__(self):
        unknown = set(self.claims) - CLAIMS
        if unknown:
            raise ConfigError(f"unknown claims {sorted(unknown)}")

    def __call__(self, t: float, p: PathPair) -> float:
        return evaluate(self, t, p)


def evaluate(F: Functional, t: float, p: PathPair) -> float:
    """``F_t(x_t, v_t)``; the pair must have horizon t."""
    if abs(p.horizon - t) > _HORIZON_TOL * max(1.0, abs(t)):
        raise DomainError(f"pair horizon {p.horizon!r} does not match t={t!r}")
    try:
        value = float(F.evaluate(t, p))
    except PathCalcError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise EvaluationError(f"{F.name} failed at t={t!r}: {exc}") from exc
    if not math.isfinite(value):
        raise EvaluationError(f"{F.name} evaluated to {value!r} at t={t!r}")
    return value


def constant(c: float) -> Functional:
    c = float(c)
    return Functional(
        lambda t, p: c,
        analytic_horizontal=lambda t, p: 0.0,
        analytic_vertical=lambda t, p: np.zeros(p.dim),
        analytic_vertical2=lambda t, p: np.zeros((p.dim, p.dim)),
        claims=CLAIMS,
        name=f"constant({c:g})",
    )


def linear_combination(alpha: float, F: Functional, beta: float, G: Functional) -> Functional:
    """``alpha*F + beta*G``; analytic derivatives combine when both have them."""

    def comb(a, b):
        if a is None or b is None:
            return None
        return lambda t, p: alpha * a(t, p) + beta * b(t, p)

    return Functional(
        lambda t, p: alpha * F.evaluate(t, p) + beta * G.evaluate(t, p),
        comb(F.analytic_horizontal, G.analytic_horizontal),
        comb(F.analytic_vertical, G.analytic_vertical),
        comb(F.analytic_vertical2, G.analytic_vertical2),
        F.claims & G.claims,
        f"{alpha:g}*{F.name}+{beta:g}*{G.name}",
    )


# ----------------------------------------------------------------------
# prefix caches: restrictions share the sample array of their source, so
# an O(n) running quantity is computed once per source array
# ----------------------------------------------------------------------
class _PrefixCache:
    def __init__(self, rows: Callable[[np.ndarray, float], np.ndarray], kind: str = "sum",
                 size: int = 32):
        self.rows = rows
        self.kind = kind
        self.size = size
        self._store: OrderedDict[int, tuple[np.ndarray, float, np.ndarray]] = OrderedDict()

    def _scan(self, body: np.ndarray, dt: float) -> np.ndarray:
        r = self.rows(body, dt)
        if self.kind == "sum":
            return np.concatenate([[0.0], np.cumsum(r)])
        return np.maximum.accumulate(r)

    def __call__(self, path: CadlagPath) -> float:
        """Sum of the first n rows ("sum"), or the max of the first n rows ("max")."""
        body, n = path.body, path.n
        if n == 0:
            return 0.0 if self.kind == "sum" else -math.inf
        root = body if body.base is None else body.base
        shared = (isinstance(root, np.ndarray) and root.ndim == 2 and root.shape[1] == body.shape[1]
                  and root.strides == body.strides and root.ctypes.data == body.ctypes.data)
        if not shared:
            scan = self._scan(body, path.dt)
        else:
            hit = self._store.get(id(root))
            if hit is None or hit[0] is not root or hit[1] != path.dt:
                hit = (root, path.dt, self._scan(root, path.dt))
                self._store[id(root)] = hit
                if len(self._store) > self.size:
                    self._store.popitem(last=False)
            else:
                self._store.move_to_end(id(root))
            scan = hit[2]
        return float(scan[n] if self.kind == "sum" else scan[n - 1])


# ----------------------------------------------------------------------
# built-ins
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class BuiltinSpec:
    """Name of a built-in functional plus its parameters."""

    name: str
    params: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "BuiltinSpec":
        """Parse ``name`` or ``name:key=val,key2=val2`` (values stay strings)."""
        name, _, rest = text.strip().partition(":")
        params: dict[str, str] = {}
        if rest.strip():
            for item in _split_params(rest):
                key, eq, val = item.partition("=")
                if not eq or not key.strip():
                    raise ConfigError(f"malformed functional parameter {item!r}; use key=value")
                params[key.strip()] = val.strip()
        return cls(name.strip(), params)


def _split_params(text: str) -> list[str]:
    # commas inside parentheses belong to the expression
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    out.append("".join(cur))
    return [s for s in out if s.strip()]


class _Cylinder:
    """Compiled f(t, x) with symbolic derivatives, compiled lazily per dimension."""

    def __init__(self, node: expr.Node):
        self.node = node
        self.f = node.compile()
        self.ft = node.diff("t").compile()
        self._by_dim: dict[int, tuple[list, list]] = {}

    def derivs(self, d: int):
        if d not in self._by_dim:
            if expr.max_index(self.node) > d:
                raise EvaluationError(f"expression uses x{expr.max_index(self.node)} on a {d}-dimensional path")
            first = [self.node.diff(f"x{i + 1}") for i in range(d)]
            grad = [g.compile() for g in first]
            hess = [[first[i].diff(f"x{j + 1}").compile() for j in range(d)] for i in range(d)]
            self._by_dim[d] = (grad, hess)
        return self._by_dim[d]


def _expression(value, key: str) -> expr.Node:
    if isinstance(value, expr.Node):
        return value
    if isinstance(value, str):
        return expr.parse(value)
    if isinstance(value, (int, float)):
        return expr.Num(float(value))
    raise ConfigError(f"parameter {key!r} must be an expression string")


def _cylinder(params) -> Functional:
    if "f" not in params:
        raise ConfigError("cylinder needs parameter f, e.g. cylinder:f=t*x^2")
    f = params["f"]
    if callable(f) and not isinstance(f, expr.Node):
        # opaque closure: value only, derivatives by finite differences
        return Functional(lambda t, p: f(t, p.x.tip), claims=frozenset({"predictable_in_v"}),
                          name="cylinder(<closure>)")
    cyl = _Cylinder(_expression(f, "f"))

    def value(t, p):
        return cyl.f(t, p.x.tip)

    def horizontal(t, p):
        return cyl.ft(t, p.x.tip)

    def vertical(t, p):
        grad, _ = cyl.derivs(p.dim)
        x = p.x.tip
        return np.array([g(t, x) for g in grad])

    def vertical2(t, p):
        _, hess = cyl.derivs(p.dim)
        x = p.x.tip
        return np.array([[h(t, x) for h in row] for row in hess])

    return Functional(value, horizontal, vertical, vertical2, CLAIMS, f"cylinder({cyl.node})")


def _quadratic_cylinder(params) -> Functional:
    if params:
        raise ConfigError("quadratic_cylinder takes no parameters")

    def value(t, p):
        x = p.x.tip
        return float(np.dot(x, x))

    return Functional(
        value,
        lambda t, p: 0.0,
        lambda t, p: 2.0 * p.x.tip,
        lambda t, p: 2.0 * np.eye(p.dim),
        CLAIMS,
        "quadratic_cylinder",
    )


def _running_integral(params) -> Functional:
    cyl = _Cylinder(_expression(params.get("g", "1"), "g"))
    unknown = set(params) - {"g"}
    if unknown:
        raise ConfigError(f"running_integral: unknown parameters {sorted(unknown)}")
    g = cyl.f
    # x is constant on each grid cell, s is not: Gauss-Legendre in s per cell
    nodes, weights = np.polynomial.legendre.leggauss(3)
    nodes, weights = (nodes + 1.0) / 2.0, weights / 2.0

    def rows(body, dt):
        return np.array([dt * sum(w * g((j + u) * dt, body[j]) for u, w in zip(nodes, weights))
                         for j in range(len(body))])

    cache = _PrefixCache(rows)

    return Functional(
        lambda t, p: cache(p.x),
        lambda t, p: g(t, p.x.tip),
        lambda t, p: np.zeros(p.dim),
        lambda t, p: np.zeros((p.dim, p.dim)),
        CLAIMS,
        f"running_integral({cyl.node})",
    )


def _running_max(params) -> Functional:
    if params:
        raise ConfigError("running_max takes no parameters")
    cache = _PrefixCache(lambda body, dt: body[:, 0], kind="max")

    def value(t, p):
        return max(cache(p.x), float(p.x.tip[0]))

    return Functional(value, claims=frozenset({"predictable_in_v", "right_continuous",
                                               "left_continuous", "boundedness_preserving"}),
                      name="running_max")


def _doleans(params) -> Functional:
    if params:
        raise ConfigError("doleans takes no parameters")
    v_integral = _PrefixCache(lambda body, dt: body[:, 0] * dt)

    def value(t, p):
        if p.dim != 1:
            raise DomainError("doleans is defined for scalar paths only")
        x = p.x
        log_prod = 0.0
        deltas = x.jump_delta[:, 0]
        if x.tip_jump is not None:
            deltas = np.append(deltas, x.tip_jump[0])
        if len(deltas):
            if np.any(1.0 + deltas <= 0.0):
                raise EvaluationError("doleans: a jump with 1 + dx <= 0")
            log_prod = float(np.sum(np.log1p(deltas) - deltas))
        expo = float(x.tip[0]) - 0.5 * v_integral(p.v) + log_prod
        if expo > 700:
            raise EvaluationError("doleans: exponent overflow")
        return math.exp(expo)

    return Functional(
        value,
        lambda t, p: -0.5 * float(p.v.tip[0]) * value(t, p),
        lambda t, p: np.array([value(t, p)]),
        lambda t, p: np.array([[value(t, p)]]),
        frozenset({"predictable_in_v", "left_continuous", "right_continuous",
                   "boundedness_preserving", "horizontal_lipschitz"}),
        "doleans",
    )


BUILTINS: dict[str, Callable[[Mapping[str, Any]], Functional]] = {
    "cylinder": _cylinder,
    "quadratic_cylinder": _quadratic_cylinder,
    "running_integral": _running_integral,
    "running_max": _running_max,
    "doleans": _doleans,
}


def builtin(spec: BuiltinSpec | str) -> Functional:
    """Instantiate a built-in functional by name.

    Examples
    --------
    >>> F = builtin("cylinder:f=t*x")
    """
    if isinstance(spec, str):
        spec = BuiltinSpec.parse(spec)
    try:
        factory = BUILTINS[spec.name]
    except KeyError:
        raise ConfigError(f"unknown functional {spec.name!r}; choose from {sorted(BUILTINS)}") from None
    return factory(dict(spec.params))


# ----------------------------------------------------------------------
# probes
# ----------------------------------------------------------------------
def check_predictable_in_v(F: Functional, p: PathPair, t: float, tol: float = 0.0) -> bool:
    """Whether ``F_t(x_t, v_t)`` and ``F_t(x_t, v_{t-})`` agree within tol."""
    q = p.restrict(t)
    q_minus = PathPair(q.x, q.v.stopped_before(t), False)
    return abs(evaluate(F, t, q) - evaluate(F, t, q_minus)) <= tol


@dataclass(frozen=True)
class ModulusTable:
    """Observed continuity moduli, one row per radius."""

    direction: str
    probe_family: str
    rows: tuple[tuple[float, float, int], ...]  # (radius, modulus, probes used)

    @property
    def moduli(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])


PROBE_FAMILY = "endpoint bumps +-eta/2, uniform x and v shifts eta/2, horizon shifts dt*2^k <= eta"


def _shift(path: CadlagPath, c) -> CadlagPath:
    return CadlagPath(path.dt, path.body + c, path.tip + c, path.jump_index, path.jump_delta,
                      path.tip_jump, path.master_horizon)


def _local_probes(q: PathPair, eta: float) -> list[PathPair]:
    d = q.dim
    out = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 0.5 * eta
        out.append(q.vertical_perturb(e))
        out.append(q.vertical_perturb(-e))
        out.append(PathPair(_shift(q.x, e), q.v, False))
        out.append(PathPair(_shift(q.x, -e), q.v, False))
    bump = pack_sym(np.eye(d)) * (0.5 * eta / math.sqrt(d))
    out.append(PathPair(q.x, _shift(q.v, bump), False))
    return out


def continuity_probe(F: Functional, p: PathPair, t: float, radii, direction: str = "fixed_time") -> ModulusTable:
    """Largest observed ``|F_t(p) - F_s(p')|`` over probes with d_infty <= eta.

    ``direction`` is ``fixed_time`` (s = t), ``left`` (s = t - h, the probe
    being the earlier argument of d_infty) or ``right`` (s = t + h).
    """
    if direction not in ("left", "right", "fixed_time"):
        raise ConfigError(f"unknown probe direction {direction!r}")
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii) or any(a < b for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must be positive and decreasing")
    q = p.restrict(t)
    base = evaluate(F, t, q)
    dt = p.x.dt
    rows = []
    for eta in radii:
        cands: list[tuple[float, PathPair, float]] = []  # (time, pair, distance)
        if direction == "fixed_time":
            for r in _local_probes(q, eta):
                cands.append((t, r, d_infty(q, r)))
        else:
            h = dt
            while h <= eta + 1e-15:
                if direction == "left" and t - h >= -1e-12:
                    s = max(t - h, 0.0)
                    r0 = p.restrict(s)
                    for r in [r0] + _local_probes(r0, eta - h):
                        cands.append((s, r, d_infty(r, q)))
                if direction == "right":
                    s = t + h
                    shifted = []
                    if s <= p.horizon + 1e-12:
                        shifted.append(p.restrict(s))
                    if s <= q.x.master_horizon + 1e-12:
                        shifted.append(q.horizontal_extend(h))
                    for r0 in shifted:
                        for r in [r0] + _local_probes(r0, eta - h):
                            cands.append((s, r, d_infty(q, r)))
                h *= 2
        used = [(s, r) for s, r, dist in cands if dist <= eta * (1 + 1e-12)]
        mod = max((abs(evaluate(F, s, r) - base) for s, r in used), default=math.nan)
        rows.append((eta, mod, len(used)))
    return ModulusTable(direction, PROBE_FAMILY, tuple(rows))


def random_pair(rng: np.random.Generator, dim: int = 1, n: int = 256, horizon: float = 1.0,
                bound_x: float = 1.0, bound_v: float = 1.0, n_jumps: int = 0) -> PathPair:
    """A random pair with sup|x| <= bound_x and v in [0, bound_v] (times identity)."""
    steps = rng.standard_normal((n, dim)) / math.sqrt(n)
    walk = np.vstack([np.zeros((1, dim)), np.cumsum(steps, axis=0)])
    walk += rng.uniform(-1, 1, dim)
    jump_at = {}
    if n_jumps:
        for k in rng.choice(np.arange(1, n + 1), size=min(n_jumps, n), replace=False):
            jump = rng.uniform(-0.5, 0.5, dim)
            walk[k:] += jump
            jump_at[int(k)] = jump
    scale = bound_x * rng.uniform(0.2, 1.0) / max(1e-12, float(np.abs(np.linalg.norm(walk, axis=1)).max()))
    x = CadlagPath.from_values(walk * scale, horizon / n,
                               jump_indices={k: j * scale for k, j in jump_at.items()})
    lev = rng.uniform(0.0, bound_v, n + 1)
    v = CadlagPath.from_values(lev[:, None] * pack_sym(np.eye(dim))[None, :], horizon / n)
    return PathPair(x, v)


def boundedness_probe(F: Functional, bound_x: float, bound_v: float, sample_count: int, seed: int,
                      dim: int = 1, n: int = 256, jumps: bool = False, times_per_path: int = 8) -> float:
    """Largest ``|F|`` seen over seeded random pairs inside the given bounds."""
    if bound_x <= 0 or bound_v <= 0:
        raise DomainError("bounds must be positive")
    worst = 0.0
    for i in range(sample_count):
        rng = np.random.default_rng([seed, i])
        p = random_pair(rng, dim, n, 1.0, bound_x, bound_v, n_jumps=3 if jumps else 0)
        for k in np.linspace(0, n, times_per_path).astype(int):
            t = k * p.x.dt
            try:
                val = evaluate(F, t, p.restrict(t))
            except EvaluationError as exc:
                raise EvaluationError(f"{exc} (seed={seed}, sample={i}, t={t!r})") from exc
            worst = max(worst, abs(val))
    return worst


def left_right_trajectories(F: Functional, p: PathPair, stride: int = 1):
    """Sample ``s -> F_s(x_{s-}, v_{s-})`` and ``s -> F_s(x_s, v_s)`` on the grid."""
    ks = np.arange(0, p.x.n + 1, stride)
    times = ks * p.x.dt
    left = np.array([evaluate(F, t, p.stopped_before(t)) for t in times])
    right = np.array([evaluate(F, t, p.restrict(t)) for t in times])
    return times, left, right
