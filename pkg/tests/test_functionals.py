import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathcalc.errors import ConfigError, DomainError, EvaluationError
from pathcalc.functionals import (CLAIMS, BuiltinSpec, Functional, boundedness_probe, builtin,
                                  check_predictable_in_v, constant, continuity_probe, evaluate,
                                  left_right_trajectories, linear_combination, random_pair)
from pathcalc.paths import CadlagPath, PathPair

from conftest import linear_path, step_path

BUILTIN_NAMES = ["cylinder:f=t*x^2", "quadratic_cylinder", "running_integral:g=x^2", "running_max",
                 "doleans"]


def doleans_oracle(x: CadlagPath, v: CadlagPath) -> float:
    """Direct product form, written independently of the library's log-sum."""
    integral = sum(float(v.body[j, 0]) * v.dt for j in range(v.n))
    prod = 1.0
    for _, d in x.registry:
        d = float(d[0])
        prod *= (1.0 + d) * math.exp(-d)
    return math.exp(float(x.tip[0]) - 0.5 * integral) * prod


def test_builtin_spec_parse():
    s = BuiltinSpec.parse("cylinder:f=exp(t, x)")
    assert s.name == "cylinder" and s.params == {"f": "exp(t, x)"}
    s = BuiltinSpec.parse("running_integral:g=x^2")
    assert s.params == {"g": "x^2"}
    assert BuiltinSpec.parse("doleans").params == {}
    with pytest.raises(ConfigError):
        BuiltinSpec.parse("cylinder:f")


@pytest.mark.parametrize("text", ["nope", "cylinder", "cylinder:f=x+", "doleans:a=1",
                                  "quadratic_cylinder:k=2", "running_integral:h=1"])
def test_bad_builtins(text):
    with pytest.raises(ConfigError):
        builtin(text)


def test_cylinder_and_quadratic_values():
    x = linear_path(16, 1.0, 3.0)
    p = PathPair.with_constant_v(x)
    assert builtin("cylinder:f=t*x^2")(1.0, p) == pytest.approx(9.0)
    assert builtin("quadratic_cylinder")(1.0, p) == pytest.approx(9.0)
    q = p.restrict(0.5)
    assert builtin("cylinder:f=t*x^2")(0.5, q) == pytest.approx(0.5 * 1.5**2)


def test_running_integral_of_step_path():
    x = linear_path(16, 1.0, 1.0)
    p = PathPair.with_constant_v(x)
    F = builtin("running_integral:g=x")
    want = sum(k / 16 * (1 / 16) for k in range(16))
    # x is held constant per cell, so an s-dependent integrand integrates exactly
    assert builtin("running_integral:g=t")(1.0, p) == pytest.approx(0.5, rel=1e-15)
    assert builtin("running_integral:g=t^5*x")(1.0, p) == pytest.approx(
        sum(k / 16 * ((k + 1) ** 6 - k**6) / 6 / 16**6 for k in range(16)), rel=1e-13)
    assert F(1.0, p) == pytest.approx(want, rel=1e-14)
    assert F(0.0, p.restrict(0.0)) == 0.0
    # restrictions share one prefix scan and still agree with a fresh evaluation
    for k in range(0, 17, 3):
        t = k / 16
        fresh = PathPair.with_constant_v(CadlagPath.from_values(x.values[:k + 1], 1 / 16))
        assert F(t, p.restrict(t)) == pytest.approx(F(t, fresh), rel=1e-15, abs=0)


def test_running_max():
    x = CadlagPath.from_values([0.0, 2.0, -1.0, 1.0], 0.25)
    p = PathPair.with_constant_v(x)
    F = builtin("running_max")
    assert [F(k / 4, p.restrict(k / 4)) for k in range(4)] == [0.0, 2.0, 2.0, 2.0]


def test_doleans_continuous_closed_form():
    x = linear_path(8, 1.0, 2.0)
    p = PathPair.with_constant_v(x, 0.5)
    assert builtin("doleans")(1.0, p) == pytest.approx(math.exp(2.0 - 0.25), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), jumps=st.integers(0, 4))
def test_doleans_matches_direct_product(seed, jumps):
    p = random_pair(np.random.default_rng(seed), 1, 64, 1.0, 1.0, 2.0, n_jumps=jumps)
    F = builtin("doleans")
    for k in (0, 17, 64):
        t = k * p.x.dt
        q = p.restrict(t)
        assert F(t, q) == pytest.approx(doleans_oracle(q.x, q.v), rel=1e-12)


def test_doleans_rejects_bad_jump_and_dimension():
    F = builtin("doleans")
    with pytest.raises(EvaluationError):
        F(1.0, PathPair.with_constant_v(step_path(-1.0)))
    x2 = CadlagPath.from_values(np.zeros((3, 2)), 0.5)
    with pytest.raises(DomainError):
        F(1.0, PathPair.with_constant_v(x2))


def test_evaluate_checks_horizon_and_finiteness():
    p = PathPair.with_constant_v(linear_path())
    with pytest.raises(DomainError):
        evaluate(constant(1.0), 0.5, p)
    with pytest.raises(EvaluationError):
        evaluate(Functional(lambda t, p: math.inf), 1.0, p)
    with pytest.raises(ConfigError):
        Functional(lambda t, p: 0.0, claims=frozenset({"smooth"}))


def test_linear_combination():
    p = PathPair.with_constant_v(linear_path(16, 1.0, 2.0))
    F, G = builtin("quadratic_cylinder"), builtin("cylinder:f=t*x")
    H = linear_combination(2.0, F, -1.0, G)
    assert H(1.0, p) == pytest.approx(2 * 4.0 - 2.0)
    assert H.analytic_vertical(1.0, p)[0] == pytest.approx(2 * 4.0 - 1.0)
    assert H.claims == F.claims & G.claims
    assert linear_combination(1.0, builtin("running_max"), 1.0, F).analytic_vertical is None


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_non_anticipative(name):
    # changing the path after t never changes F_t
    rng = np.random.default_rng(5)
    p = random_pair(rng, 1, 64, 1.0, 1.0, 1.0, n_jumps=2)
    vals = p.x.values.copy()
    vals[33:] += 0.3
    other = PathPair(CadlagPath.from_values(vals, p.x.dt, jump_indices=dict(
        zip(p.x.registry_indices().tolist(), p.x.registry_deltas()))), p.v)
    F = builtin(name)
    for k in (0, 10, 32):
        t = k * p.x.dt
        assert F(t, p.restrict(t)) == F(t, other.restrict(t))


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_predictable_in_v(name):
    rng = np.random.default_rng(11)
    p = random_pair(rng, 1, 64, 1.0, 1.0, 1.0, n_jumps=1)
    F = builtin(name)
    assert "predictable_in_v" in F.claims
    for k in (1, 20, 64):
        assert check_predictable_in_v(F, p, k * p.x.dt, tol=1e-14)


def test_predictability_probe_catches_endpoint_dependence():
    F = Functional(lambda t, p: float(p.v.tip[0]))
    v = CadlagPath.from_values([1.0, 1.0, 3.0], 0.5, jump_indices={2: 2.0})
    p = PathPair(CadlagPath.from_values([0.0, 0.0, 0.0], 0.5), v)
    assert not check_predictable_in_v(F, p, 1.0)


def test_continuity_probe_fixed_time_modulus_shrinks():
    rng = np.random.default_rng(3)
    p = random_pair(rng, 1, 128, 1.0, 1.0, 1.0)
    tab = continuity_probe(builtin("cylinder:f=t*x^2"), p, 0.5, [0.1, 0.01, 0.001])
    m = tab.moduli
    assert np.all(np.diff(m) < 0) and m[-1] < 1e-2
    assert all(r[2] > 0 for r in tab.rows)
    assert tab.probe_family


@pytest.mark.parametrize("direction", ["left", "right"])
def test_continuity_probe_directions_doleans(direction):
    rng = np.random.default_rng(4)
    p = random_pair(rng, 1, 256, 1.0, 1.0, 1.0)
    tab = continuity_probe(builtin("doleans"), p, 0.5, [0.1, 0.02])
    assert tab.moduli[-1] < tab.moduli[0]


def test_continuity_probe_rejects_bad_radii():
    p = PathPair.with_constant_v(linear_path())
    with pytest.raises(DomainError):
        continuity_probe(constant(0.0), p, 0.5, [0.01, 0.1])
    with pytest.raises(ConfigError):
        continuity_probe(constant(0.0), p, 0.5, [0.1], direction="up")


def test_boundedness_probe():
    worst = boundedness_probe(builtin("quadratic_cylinder"), 2.0, 1.0, 20, seed=1)
    assert 0 < worst <= 4.0 + 1e-12
    d = boundedness_probe(builtin("doleans"), 1.0, 1.0, 10, seed=2, jumps=True)
    assert d <= math.exp(1.0)
    with pytest.raises(DomainError):
        boundedness_probe(constant(0.0), 0.0, 1.0, 1, seed=0)


def test_boundedness_probe_reports_seed():
    F = Functional(lambda t, p: math.inf if t > 0.5 else 0.0)
    with pytest.raises(EvaluationError, match="seed=7"):
        boundedness_probe(F, 1.0, 1.0, 1, seed=7)


def test_left_right_trajectories_on_step():
    p = PathPair.with_constant_v(step_path(2.0, 0.5, 8))
    times, left, right = left_right_trajectories(builtin("quadratic_cylinder"), p)
    k = int(np.flatnonzero(times == 0.5)[0])
    assert left[k] == 0.0 and right[k] == 4.0
    assert np.all(left[k + 1:] == 4.0) and np.all(right[:k] == 0.0)


def test_claims_vocabulary():
    for name in BUILTIN_NAMES:
        assert builtin(name).claims <= CLAIMS
