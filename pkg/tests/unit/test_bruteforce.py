#!/usr/bin/env python3
"""
Tests for the brute-force oracles, the adversary search and the oracle suite.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to sys.path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

import src.bruteforce as bruteforce
from src.bruteforce import (
    DiscretizedProgram, adversary_search, min_energy_fixed_mean, oracle_malfunctioning_energy,
    oracle_nominal_energy, random_adversary, random_system, run_oracle_suite,
)
from src.energy import malfunctioning_energy, malfunctioning_optimal, nominal_energy
from src.models import SearchSpec, VerifySpec
from src.signals import ConstantSignal, PiecewiseConstantSignal, admissible, build_catalog, signal_stats
from src.sysmodel import build_system, build_task
from src.worstcase import worst_case_exact_p1

ROBOT_B = [[2.0, 1.0, 1.0], [0.2, -1.0, 1.0]]
SIMPLE_B = [[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]

SMALL_VERIFY = VerifySpec(fixed_mean_instances=10, random_systems=4, p1_systems=5,
                          adversaries_per_system=3, pieces=[1, 4], seed=5)


def _robot():
    return build_system(ROBOT_B, [2])


def test_fixed_mean_single_piece():
    """k = 1, mean (2), t_f = 1: z = (2), energy 4"""
    table, energy = min_energy_fixed_mean(DiscretizedProgram(pieces=1, horizon=1.0, mean_constraint=[2.0]))
    np.testing.assert_allclose(table, [[2.0]], rtol=1e-12)
    assert energy == pytest.approx(4.0, rel=1e-12)


def test_fixed_mean_many_pieces_are_constant():
    """k = 10, mean (1, -1), t_f = 2: every piece is (1, -1), energy 4"""
    table, energy = min_energy_fixed_mean(DiscretizedProgram(pieces=10, horizon=2.0, mean_constraint=[1.0, -1.0]))
    assert table.shape == (10, 2)
    np.testing.assert_allclose(table, np.tile([1.0, -1.0], (10, 1)), atol=1e-10)
    assert energy == pytest.approx(4.0, rel=1e-10)


def test_fixed_mean_random_programs():
    """The minimizer is the constant mean for every k and mean"""
    rng = np.random.default_rng(1)
    for _ in range(100):
        k = int(rng.integers(1, 51))
        zbar = rng.normal(size=int(rng.integers(1, 5)))
        t_f = float(rng.uniform(0.1, 10.0))
        table, energy = min_energy_fixed_mean(DiscretizedProgram(pieces=k, horizon=t_f, mean_constraint=zbar))
        assert np.max(np.abs(table - zbar)) <= 1e-10 * max(1.0, np.max(np.abs(zbar)))
        assert energy == pytest.approx(t_f * float(zbar @ zbar), rel=1e-8)


def test_discretized_program_validation():
    prog = DiscretizedProgram(pieces=4, horizon=2.0, mean_constraint=[1.0, 2.0, 3.0])
    assert prog.dimension == 3
    assert prog.width == 0.5
    np.testing.assert_allclose(prog.breakpoints(), [0.0, 0.5, 1.0, 1.5, 2.0])
    with pytest.raises(ValueError):
        DiscretizedProgram(pieces=0, horizon=1.0, mean_constraint=[1.0])


def test_oracle_zero_adversary_identity():
    """u_uc = 0, B_c = I, x0 = (1, 0), t_f = 1, k = 4 gives 1.0"""
    sys_ = build_system(SIMPLE_B, [2])
    task = build_task([1.0, 0.0], 1.0)
    energy = oracle_malfunctioning_energy(sys_, task, ConstantSignal(value_vector=[0.0], horizon=1.0), 4)
    assert energy == pytest.approx(1.0, rel=1e-10)


def test_oracle_hand_example():
    """u_uc = +1, x0 = (1, 1), t_f = 1, k = 8 gives 5.0"""
    sys_ = build_system(SIMPLE_B, [2])
    task = build_task([1.0, 1.0], 1.0)
    energy = oracle_malfunctioning_energy(sys_, task, ConstantSignal(value_vector=[1.0], horizon=1.0), 8)
    assert energy == pytest.approx(5.0, rel=1e-10)


def test_oracle_matches_closed_form_on_robot_catalog():
    sys_ = _robot()
    task = build_task([10.0, 0.0], 10.0)
    for entry in build_catalog(1, 10.0):
        closed = malfunctioning_optimal(sys_, task, entry.signal).malfunctioning_energy
        for k in (1, 7, 50):
            assert oracle_malfunctioning_energy(sys_, task, entry.signal, k) == pytest.approx(closed, rel=1e-8)


def test_oracle_nominal_matches_closed_form():
    sys_ = _robot()
    task = build_task([10.0, 0.0], 10.0)
    closed = nominal_energy(sys_, task.x0, task.t_f)
    for k in (1, 50):
        assert oracle_nominal_energy(sys_, task, k) == pytest.approx(closed, rel=1e-8)


def test_oracle_matches_closed_form_on_random_systems():
    """20 random systems x 5 random adversaries, within 1e-8 relative"""
    rng = np.random.default_rng(2024)
    for s in range(20):
        p = 1 + s % 2
        sys_ = random_system(rng, 3, 5, p)
        task = build_task(rng.normal(size=3), float(rng.uniform(0.5, 10.0)), system=sys_)
        for _ in range(5):
            u = random_adversary(rng, p, task.t_f)
            assert admissible(u)
            closed = malfunctioning_energy(sys_, task.x0, task.t_f, signal_stats(u).mean)
            oracle = oracle_malfunctioning_energy(sys_, task, u, 16)
            assert oracle == pytest.approx(closed, rel=1e-8)


def test_oracle_independent_of_refinement():
    sys_ = _robot()
    task = build_task([3.0, -1.0], 4.0)
    u = PiecewiseConstantSignal(breakpoints=[0.0, 1.0, 4.0], values_table=[[1.0], [-0.5]], horizon=4.0)
    values = [oracle_malfunctioning_energy(sys_, task, u, k) for k in (1, 2, 5, 16, 40)]
    assert max(values) - min(values) <= 1e-10 * max(1.0, max(values))


def test_random_system_keeps_controlled_rank():
    rng = np.random.default_rng(3)
    for _ in range(10):
        sys_ = random_system(rng, 3, 5, 2)
        assert sys_.p == 2
        assert np.linalg.matrix_rank(sys_.B_c) == 3


def test_search_zero_budget_returns_catalog_best():
    """With no iterations the best admissible catalog signal comes back"""
    sys_ = _robot()
    task = build_task([10.0, 0.0], 10.0)
    catalog = build_catalog(1, 10.0)
    signal, value = adversary_search(sys_, task, budget=0, catalog=catalog)
    totals = [malfunctioning_optimal(sys_, task, e.signal).total_energy for e in catalog if admissible(e.signal)]
    assert value == pytest.approx(max(totals), rel=1e-14)
    assert isinstance(signal, ConstantSignal)
    assert signal.value_vector.tolist() == [1.0]


def test_search_monotone_in_budget_and_below_exact():
    """Best value never decreases with budget and never exceeds the exact worst case"""
    sys_ = _robot()
    task = build_task([10.0, 0.0], 10.0)
    exact = worst_case_exact_p1(sys_, task).exact_p1
    weak = build_catalog(1, 10.0, families=["sinusoid"])
    values = [adversary_search(sys_, task, budget=b, seed=3, catalog=weak)[1] for b in (0, 10, 64, 200, 500)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] > values[0]
    assert values[-1] <= exact + 1e-9


def test_search_is_deterministic():
    sys_ = _robot()
    task = build_task([10.0, 0.0], 10.0)
    weak = build_catalog(1, 10.0, families=["sinusoid"])
    first = adversary_search(sys_, task, budget=100, seed=9, catalog=weak)
    second = adversary_search(sys_, task, budget=100, seed=9, catalog=weak)
    assert first[1] == second[1]
    assert signal_stats(first[0]).l2_energy == signal_stats(second[0]).l2_energy


def test_search_reaches_exact_within_one_percent():
    """Budget 500 from sinusoid starts alone gets within 1% of the exact worst case"""
    sys_ = _robot()
    task = build_task([10.0, 0.0], 10.0)
    exact = worst_case_exact_p1(sys_, task)
    assert not exact.degenerate
    weak = build_catalog(1, 10.0, families=["sinusoid"])
    start = adversary_search(sys_, task, budget=0, catalog=weak)[1]
    assert (exact.exact_p1 - start) / exact.exact_p1 > 0.01
    _, found = adversary_search(sys_, task, budget=500, seed=11, pieces=16, catalog=weak)
    assert found <= exact.exact_p1 + 1e-9
    assert (exact.exact_p1 - found) / exact.exact_p1 <= 0.01


def test_oracle_suite_search_gap_without_constant_starts(monkeypatch):
    """The suite hands the search only non-constant catalog signals"""
    seen = []
    real_search = bruteforce.adversary_search

    def recording_search(*args, catalog=None, **kwargs):
        seen.append(list(catalog))
        return real_search(*args, catalog=catalog, **kwargs)

    monkeypatch.setattr(bruteforce, "adversary_search", recording_search)
    audit = run_oracle_suite(_robot(), build_task([10.0, 0.0], 10.0), SMALL_VERIFY, SearchSpec())
    assert audit.passed
    assert len(seen) == 1 and seen[0]
    assert not any(isinstance(u, ConstantSignal) for u in seen[0])
    assert audit.count_by_group()["search"] == 2


def test_oracle_suite_passes():
    audit = run_oracle_suite(_robot(), build_task([10.0, 0.0], 10.0), SMALL_VERIFY, SearchSpec())
    summary = audit.summary()
    assert summary.passed, [f"{f.group}/{f.name}" for f in summary.failures]
    groups = audit.count_by_group()
    for group in ('fixed_mean', 'nominal', 'malfunction', 'refinement', 'collapse',
                  'attainment', 'dominance', 'search', 'regulation'):
        assert groups.get(group, 0) > 0, group
    assert summary.seeds == {'verify': 5, 'search': 11}


def test_oracle_suite_without_task():
    """Random systems only when no initial state is configured"""
    audit = run_oracle_suite(_robot(), None, SMALL_VERIFY)
    assert audit.passed
    assert 'nominal' not in audit.count_by_group()


def test_oracle_suite_catches_corrupted_energy():
    """A 1% error in the malfunctioning energy fails the suite"""
    def corrupted(sys_, x0, t_f, mean_uc):
        return 1.01 * malfunctioning_energy(sys_, x0, t_f, mean_uc)

    audit = run_oracle_suite(_robot(), build_task([10.0, 0.0], 10.0), SMALL_VERIFY, SearchSpec(budget=0),
                             energy_fn=corrupted)
    assert not audit.passed
    assert {f.group for f in audit.failures()} >= {'malfunction'}


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
