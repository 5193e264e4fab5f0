"""Exact rational simplex and the weighted-cover relaxation."""

from fractions import Fraction

import pytest

from qlab.boolfn import IteratedMajority, TruthTable, fmaj
from qlab.lpbound import (
    LPSolution,
    RationalLP,
    build_prt_lp,
    check_feasible,
    partition_to_assignment,
    pprt_zero_report,
    prt_report,
    solve_exact,
)
from qlab.subcube import canonical_fmaj_partition, search_min_weight

F = Fraction


def lp(objective, rows, senses, rhs, names=None):
    names = names or tuple(f"x{k}" for k in range(len(objective)))
    return RationalLP(
        tuple(F(c) for c in objective),
        tuple(tuple(F(a) for a in row) for row in rows),
        tuple(senses),
        tuple(F(b) for b in rhs),
        tuple(names),
    )


def test_simplex_single_variable():
    sol = solve_exact(lp([1], [[1]], [">="], [3]))
    assert sol.status == "optimal"
    assert sol.value == 3
    assert sol.assignment == (F(3),)


def test_simplex_small_mix():
    # min x + 2y with x + y >= 4, x <= 3: best is x = 3, y = 1
    sol = solve_exact(lp([1, 2], [[1, 1], [1, 0]], [">=", "<="], [4, 3]))
    assert sol.status == "optimal"
    assert sol.value == 5
    assert sol.assignment == (F(3), F(1))
    assert sol.verify(lp([1, 2], [[1, 1], [1, 0]], [">=", "<="], [4, 3]))


def test_simplex_equality_row():
    # min 3x + y with x + y == 2, x >= 1/2
    problem = lp([3, 1], [[1, 1], [1, 0]], ["==", ">="], [2, F(1, 2)])
    sol = solve_exact(problem)
    assert sol.status == "optimal"
    assert sol.value == F(3, 2) + F(3, 2)  # x = 1/2, y = 3/2
    assert sol.assignment == (F(1, 2), F(3, 2))


def test_simplex_exact_fractions():
    # exactness shows in the optimum being a clean rational
    problem = lp([F(1, 3), F(1, 7)], [[2, 5]], [">="], [1])
    sol = solve_exact(problem)
    assert sol.status == "optimal"
    assert sol.value == F(1, 35)
    assert sol.assignment == (F(0), F(1, 5))


def test_simplex_detects_infeasible():
    sol = solve_exact(lp([1], [[1], [1]], ["<=", ">="], [1, 2]))
    assert sol.status == "infeasible"
    assert sol.value is None


def test_simplex_detects_unbounded():
    sol = solve_exact(lp([-1], [[1]], [">="], [0]))
    assert sol.status == "unbounded"


def test_simplex_degenerate_cycle_guard():
    # classic degeneracy: several tight rows at the origin
    problem = lp(
        [-F(3, 4), 150, -F(1, 50), 6],
        [
            [F(1, 4), -60, -F(1, 25), 9],
            [F(1, 2), -90, -F(1, 50), 3],
            [0, 0, 1, 0],
        ],
        ["<=", "<=", "<="],
        [0, 0, 1],
    )
    sol = solve_exact(problem)
    assert sol.status == "optimal"
    assert sol.value == -F(1, 20)
    assert sol.verify(problem)


def test_solution_verify_rejects_bad_assignment():
    problem = lp([1], [[1]], [">="], [3])
    bad = LPSolution("optimal", F(2), (F(2),), 0)
    assert not bad.verify(problem)


def test_check_feasible():
    problem = lp([1, 1], [[1, 1]], [">="], [1])
    assert check_feasible(problem, [F(1), F(0)])
    assert not check_feasible(problem, [F(1, 4), F(1, 4)])
    assert not check_feasible(problem, [F(-1), F(3)])


def test_relaxation_shape():
    problem = build_prt_lp(fmaj(), F(0))
    assert problem.num_vars == 162
    assert len(problem.rows) == 32
    assert len(set(problem.var_names)) == 162
    # one cover row and one total row per input
    assert problem.senses.count(">=") == 16
    assert problem.senses.count("==") == 16


def test_relaxation_rejects_bad_inputs():
    with pytest.raises(ValueError):
        build_prt_lp(IteratedMajority(2).truth_table(), F(0))
    with pytest.raises(ValueError):
        build_prt_lp(fmaj(), F(1, 2))
    with pytest.raises(ValueError):
        build_prt_lp(fmaj(), F(-1, 10))


def test_canonical_partition_is_feasible_at_zero_error():
    problem = build_prt_lp(fmaj(), F(0))
    x = partition_to_assignment(problem, canonical_fmaj_partition())
    assert check_feasible(problem, x)
    value = sum((c * v for c, v in zip(problem.objective, x)), F(0))
    assert value == 64


def test_zero_error_relaxation_value():
    rep = prt_report(fmaj(), F(0))
    assert rep.num_vars == 162
    assert rep.num_constraints == 32
    # a feasible partition with weight 64 exists, so 64 is an upper bound;
    # the simplex optimum matching it pins the value
    assert rep.value == 64
    assert rep.half_log2 == 3.0


def test_relaxation_value_drops_with_error():
    rep0 = prt_report(fmaj(), F(0))
    rep3 = prt_report(fmaj(), F(1, 3))
    assert rep3.value <= rep0.value
    assert rep3.value == 14  # regression, certificate-checked by the solver
    rep6 = prt_report(fmaj(), F(1, 6))
    assert rep3.value <= rep6.value <= rep0.value


def test_public_coin_report_matches_search():
    rep = pprt_zero_report(fmaj())
    assert rep.weight == 64
    assert rep.half_log2 == 3.0
    assert rep.weight == search_min_weight(fmaj()).weight
    # relaxing to fractional weights cannot increase the optimum
    assert prt_report(fmaj(), F(0)).value <= rep.weight


def test_relaxation_on_tiny_functions():
    # constant: the free pattern alone is feasible, value 1
    const = TruthTable.constant(2, 1)
    rep = prt_report(const, F(0))
    assert rep.value == 1
    # single-variable projection f(x1, x2) = x1 needs both halves
    proj = TruthTable.from_values(2, [0, 0, 1, 1])
    rep = prt_report(proj, F(0))
    assert rep.value == 4
