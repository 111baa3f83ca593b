import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathcalc.errors import ConfigError, ConsistencyError, DomainError
from pathcalc.functionals import random_pair
from pathcalc.paths import CadlagPath, PathPair
from pathcalc.qv import (PSD_SLACK, Subdivision, cross_variation, discrete_qv, dyadic_subdivision,
                         jump_augmented_subdivision, min_increment_eigenvalue, qv_decompose, qv_table,
                         stopping_time_subdivision, subdivision_for)

from conftest import linear_path, step_path


def test_dyadic_subdivision():
    s = dyadic_subdivision(2.0, 3, 14)
    assert np.array_equal(s.times, np.arange(9) * 0.25)
    assert s.level == 3 and s.horizon == 2.0 and len(s) == 9
    with pytest.raises(DomainError, match="level exceeds grid depth"):
        dyadic_subdivision(1.0, 15, 14)
    with pytest.raises(DomainError):
        dyadic_subdivision(1.0, -1)


def test_subdivision_validation():
    with pytest.raises(DomainError):
        Subdivision(np.array([0.0]), 0)
    with pytest.raises(DomainError):
        Subdivision(np.array([0.1, 1.0]), 0)
    path = linear_path(16)
    with pytest.raises(DomainError):
        Subdivision(np.array([0.0, 0.03, 1.0]), 0).indices(path)
    with pytest.raises(DomainError):
        Subdivision(np.array([0.0, 0.5]), 0).indices(path)


def test_jump_augmented_threshold():
    # jumps of size 0.3 at 3/16 and 0.05 at 5/16
    vals = np.zeros(17)
    vals[3:] += 0.3
    vals[5:] += 0.05
    x = CadlagPath.from_values(vals, 1 / 16, jump_indices={3: 0.3, 5: 0.05})
    p = PathPair.with_constant_v(x)
    base = dyadic_subdivision(1.0, 1, 4)
    assert list(jump_augmented_subdivision(base, p, 0).times) == [0, 0.5, 1]
    assert list(jump_augmented_subdivision(base, p, 1).times) == [0, 0.5, 1]
    assert list(jump_augmented_subdivision(base, p, 4).times) == [0, 3 / 16, 0.5, 1]
    assert list(jump_augmented_subdivision(base, p, 20).times) == [0, 3 / 16, 5 / 16, 0.5, 1]


def test_jump_augmented_sees_v_jumps():
    x = linear_path(16)
    v = CadlagPath.from_values(np.r_[np.ones(9), 3 * np.ones(8)], 1 / 16, jump_indices={9: 2.0})
    p = PathPair(x, v)
    assert 9 / 16 in jump_augmented_subdivision(dyadic_subdivision(1.0, 1, 4), p, 1).times


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), N=st.integers(0, 6), jumps=st.integers(0, 5))
def test_stopping_time_equals_union(seed, N, jumps):
    p = random_pair(np.random.default_rng(seed), 1, 64, 1.0, 1.0, 1.0, n_jumps=jumps)
    s = stopping_time_subdivision(p, N)
    want = dyadic_subdivision(1.0, N, 6).times
    if N > 0:
        ks = [k for k, d in zip(p.x.registry_indices().tolist(), p.x.registry_deltas())
              if abs(float(d[0])) > 1.0 / N]
        want = np.union1d(want, np.array(ks) * p.x.dt)
    assert np.allclose(s.times, want, rtol=0, atol=1e-15) and len(s.times) == len(want)
    assert s.scheme == "stopping"


def test_subdivision_for_names():
    p = PathPair.with_constant_v(step_path(1.0, 3 / 16, 16))
    assert subdivision_for(p, 2, "dyadic").scheme == "dyadic"
    assert 3 / 16 in subdivision_for(p, 2, "jump").times
    assert 3 / 16 in subdivision_for(p, 2, "stopping").times
    with pytest.raises(ConfigError):
        subdivision_for(p, 2, "random")


def test_step_path_qv_is_one_atom():
    a = 0.7
    x = step_path(a, 3 / 16, 16)
    p = PathPair.with_constant_v(x)
    for scheme in ("dyadic", "jump"):
        q = discrete_qv(x, subdivision_for(p, 2, scheme))
        assert q.total == pytest.approx(a * a, rel=1e-15)
    q = discrete_qv(x, subdivision_for(p, 2, "jump"))
    cont, atoms = qv_decompose(q)
    assert atoms == [(3 / 16, pytest.approx(a * a))]
    assert np.allclose(cont, 0.0, atol=1e-15)
    assert q.curve[0] == 0.0
    # the jump sits inside a dyadic cell at level 2, so no atom is registered
    assert discrete_qv(x, dyadic_subdivision(1.0, 2, 4)).atoms == []


def test_decompose_rejects_negative_continuous_part():
    # registry claims a jump larger than the increment carrying it
    x = CadlagPath.from_values([0.0, 0.0, 0.5, 0.5, 0.5], 0.25, jump_indices={2: 1.0})
    with pytest.raises(ConsistencyError, match="negative continuous part"):
        qv_decompose(discrete_qv(x, dyadic_subdivision(1.0, 2, 2)))


def test_identity_qv_levels():
    x = linear_path(2**10)
    for n in range(11):
        assert discrete_qv(x, dyadic_subdivision(1.0, n, 10)).total == pytest.approx(2.0**-n, rel=1e-14)


def test_cross_variation_examples():
    t = np.arange(17) / 16
    x = CadlagPath.from_values(np.stack([t, -2 * t], axis=1), 1 / 16)
    cv = cross_variation(x, dyadic_subdivision(1.0, 4, 4))
    assert cv.curves[-1] == pytest.approx(np.array([[1, -2], [-2, 4]]) / 16)
    assert cv.polarization_gap <= 1e-15
    assert cv.increment(0, 16) == pytest.approx(cv.curves[-1])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 4), level=st.integers(0, 6))
def test_cross_variation_psd_and_polarization(seed, dim, level):
    p = random_pair(np.random.default_rng(seed), dim, 64, 1.0, 1.0, 1.0, n_jumps=2)
    cv = cross_variation(p.x, dyadic_subdivision(1.0, level, 6))
    assert cv.polarization_gap <= 1e-12
    scale = max(1.0, float(np.abs(cv.curves[-1]).max()))
    assert min_increment_eigenvalue(cv) >= -PSD_SLACK * scale
    assert np.allclose(cv.curves, np.transpose(cv.curves, (0, 2, 1)), rtol=0, atol=0)


def test_qv_table():
    x = linear_path(16)
    rows = qv_table(x, PathPair.with_constant_v(x), range(3))
    assert [r[0] for r in rows] == [0, 1, 2]
    assert rows[2][1] == pytest.approx(0.25) and rows[2][3] == 0.0
