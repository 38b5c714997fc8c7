#!/usr/bin/env python3
"""
Tests for symbolic control signals, their statistics and the adversary catalogs.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

# Add the project root to sys.path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.errors import FamilyTooLarge, InvalidSignal
from src.signals import (
    AdversaryFamily, ConstantSignal, PiecewiseConstantSignal, SinusoidSignal,
    admissible, adversary_family, build_catalog, signal_stats,
)


def test_constant_stats():
    """Constant (0.5, -0.5) over t_f = 10: mean (0.5, -0.5), energy 5"""
    stats = signal_stats(ConstantSignal(value_vector=[0.5, -0.5], horizon=10.0))
    np.testing.assert_allclose(stats.mean, [0.5, -0.5])
    assert stats.l2_energy == pytest.approx(5.0, rel=1e-15)


def test_full_period_sinusoid_stats():
    """Unit sinusoid over one full period: mean 0, energy t_f / 2"""
    u = SinusoidSignal(amplitude=[1.0], omega=2.0 * math.pi, phase=0.0, horizon=1.0)
    stats = signal_stats(u)
    np.testing.assert_allclose(stats.mean, [0.0], atol=1e-15)
    assert stats.l2_energy == pytest.approx(0.5, rel=1e-14)


def test_piecewise_stats():
    """{[0,1): 1, [1,2]: -1}: mean 0, energy 2"""
    u = PiecewiseConstantSignal(breakpoints=[0.0, 1.0, 2.0], values_table=[[1.0], [-1.0]], horizon=2.0)
    stats = signal_stats(u)
    np.testing.assert_allclose(stats.mean, [0.0], atol=1e-15)
    assert stats.l2_energy == pytest.approx(2.0)


@given(value=st.lists(st.floats(-3.0, 3.0), min_size=1, max_size=4), horizon=st.floats(0.01, 100.0))
def test_constant_energy_is_exact(value, horizon):
    """l2_energy of a constant is t_f ||v||^2"""
    v = np.array(value)
    stats = signal_stats(ConstantSignal(value_vector=v, horizon=horizon))
    assert stats.l2_energy == pytest.approx(horizon * float(v @ v), rel=1e-14, abs=1e-300)


@given(seed=st.integers(0, 2**32 - 1))
def test_sinusoid_quadrature_matches_closed_form(seed):
    """Adaptive quadrature agrees with the closed form within 1e-9 relative"""
    rng = np.random.default_rng(seed)
    horizon = float(rng.uniform(0.5, 20.0))
    u = SinusoidSignal(amplitude=rng.uniform(-1.0, 1.0, size=2),
                       omega=float(rng.uniform(0.1, 10.0)) * 2.0 * math.pi / horizon,
                       phase=float(rng.uniform(0.0, 2.0 * math.pi)), horizon=horizon)
    closed = signal_stats(u)
    quad = signal_stats(u, method="quadrature")
    assert quad.l2_energy == pytest.approx(closed.l2_energy, rel=1e-9)
    np.testing.assert_allclose(quad.mean, closed.mean, rtol=1e-9, atol=1e-10)


def test_cumulative_matches_mean():
    """cumulative(t_f) / t_f is the mean for every kind"""
    signals = [
        ConstantSignal(value_vector=[0.3, -0.7], horizon=4.0),
        SinusoidSignal(amplitude=[1.0, 0.5], omega=1.3, phase=0.4, horizon=4.0),
        PiecewiseConstantSignal(breakpoints=[0.0, 0.5, 3.0, 4.0],
                                values_table=[[1.0, 0.0], [-1.0, 0.5], [0.2, 1.0]], horizon=4.0),
    ]
    for u in signals:
        np.testing.assert_allclose(u.cumulative(4.0) / 4.0, signal_stats(u).mean, rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(u.cumulative(0.0), np.zeros(2), atol=1e-15)


def test_admissible_examples():
    assert admissible(ConstantSignal(value_vector=[1.0, -1.0], horizon=1.0))
    assert not admissible(SinusoidSignal(amplitude=[1.2], omega=1.0, phase=0.0, horizon=10.0))
    assert admissible(PiecewiseConstantSignal(breakpoints=[0.0, 1.0, 2.0],
                                              values_table=[[0.9], [-1.0]], horizon=2.0))


def test_admissible_sinusoid_short_window():
    """Amplitude above 1 can still be admissible when the window never reaches the peak"""
    u = SinusoidSignal(amplitude=[1.5], omega=1.0, phase=0.0, horizon=0.5)
    assert admissible(u)  # sin(0.5) * 1.5 < 1
    assert not admissible(SinusoidSignal(amplitude=[1.5], omega=1.0, phase=0.0, horizon=1.0))


def test_invalid_piecewise_rejected():
    with pytest.raises(InvalidSignal):
        PiecewiseConstantSignal(breakpoints=[0.0, 2.0, 1.0], values_table=[[1.0], [1.0]], horizon=1.0)
    with pytest.raises(InvalidSignal):
        PiecewiseConstantSignal(breakpoints=[0.0, 1.0], values_table=[[1.0]], horizon=2.0)
    with pytest.raises(InvalidSignal):
        PiecewiseConstantSignal(breakpoints=[0.0, 1.0, 2.0], values_table=[[1.0]], horizon=2.0)


def test_constant_family_p1():
    """p = 1 constant family is {+1, -1}"""
    family = adversary_family("constant", 1, 10.0)
    assert [float(u.value_vector[0]) for u in family] == [1.0, -1.0]


def test_sinusoid_family_size():
    family = adversary_family(AdversaryFamily.SINUSOID, 1, 10.0)
    assert len(family) == 6
    assert all(admissible(u) for u in family)


def test_bangbang_family_is_deterministic():
    first = adversary_family("bangbang", 2, 10.0, seed=7)
    second = adversary_family("bangbang", 2, 10.0, seed=7)
    assert len(first) == len(second) == 8
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.breakpoints, b.breakpoints)
        np.testing.assert_array_equal(a.values_table, b.values_table)
        assert set(np.unique(a.values_table)) <= {-1.0, 1.0}


def test_constant_family_cap():
    with pytest.raises(FamilyTooLarge):
        adversary_family("constant", 5, 1.0, vertex_cap=4)


def test_catalog_means_are_bounded():
    """Every admissible catalog signal has ||mean||_inf <= 1 and energy <= t_f * p"""
    for p in (1, 2, 3):
        for entry in build_catalog(p, 7.0):
            stats = signal_stats(entry.signal)
            assert admissible(entry.signal)
            assert np.max(np.abs(stats.mean)) <= 1.0 + 1e-12
            assert stats.l2_energy <= 7.0 * p * (1.0 + 1e-12)


def test_catalog_labels_unique():
    labels = [entry.label for entry in build_catalog(2, 10.0)]
    assert len(labels) == len(set(labels))
    assert labels[:4] == ['const_pp', 'const_pm', 'const_mp', 'const_mm']


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
