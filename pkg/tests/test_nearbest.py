"""Near-best functional derivation: constraint systems and exact l1
minimization against the reference norm table."""

from fractions import Fraction

import numpy as np
import pytest

from boxqi import nearbest, stencils


F = Fraction


def test_constraint_system_structure(grid11):
    sys_ = nearbest.constraint_system((0, 0, -1), 4, grid11)
    # x <-> y symmetry of the class leaves 13 of the 20 cubic monomials
    assert len(sys_.rows) == 13
    assert len(sys_.points) == 25
    assert len(sys_.orbits) == 16
    assert len(sys_.V) == 13
    assert all(len(row) == len(sys_.orbits) for row in sys_.V)
    assert all(isinstance(v, Fraction) for v in sys_.b)
    # points sorted lexicographically and unique
    as_tuples = [tuple(int(v) for v in p) for p in sys_.points]
    assert as_tuples == sorted(set(as_tuples))


def test_constraint_system_untied(grid11):
    sys_ = nearbest.constraint_system((0, 0, -1), 4, grid11,
                                      tie_symmetry=False)
    assert len(sys_.rows) == 20  # all monomials of P3 up to even symmetry
    assert len(sys_.orbits) == len(sys_.points)


def test_rhs_is_differential_target():
    # nu = (0,0,0): 1 ; nu = x^2: -5/12 h^2 factor from the expansion
    assert nearbest.constraint_rhs((0, 0, 0)) == 1
    assert nearbest.constraint_rhs((1, 0, 0)) == 0
    assert nearbest.constraint_rhs((2, 0, 0)) == F(-5, 12)
    assert nearbest.constraint_rhs((1, 1, 0)) == 0


def test_minimize_l1_small_classes(grid11):
    for key, n, expected in [((3, 3, 3), 2, F(13, 8)),
                             ((2, 2, 2), 1, F(7, 2)),
                             ((1, 1, 1), 2, F(9, 2))]:
        sol = nearbest.minimize_l1(nearbest.constraint_system(key, n, grid11))
        assert sol.status == "optimal"
        assert sol.norm == expected
        assert isinstance(sol.norm, Fraction)


def test_corner_infeasible_until_n4(grid11):
    for n in (1, 2, 3):
        sol = nearbest.minimize_l1(
            nearbest.constraint_system((0, 0, -1), n, grid11))
        assert sol.status == "infeasible"
    sol = nearbest.minimize_l1(
        nearbest.constraint_system((0, 0, -1), 4, grid11))
    assert sol.status == "optimal"
    assert stencils.rounded_up(sol.norm) == F("127.1")
    assert abs(sol.norm_float - 127.08148148148148) < 1e-10


def test_solution_weights_verify_exactly(grid11):
    sys_ = nearbest.constraint_system((1, 1, 1), 2, grid11)
    sol = nearbest.minimize_l1(sys_)
    norm = nearbest.verify_weights(sys_, sol.weights)
    assert norm == sol.norm


def test_tie_symmetry_does_not_change_optimum(grid11):
    tied = nearbest.minimize_l1(
        nearbest.constraint_system((3, 3, 3), 2, grid11))
    untied = nearbest.minimize_l1(
        nearbest.constraint_system((3, 3, 3), 2, grid11,
                                   tie_symmetry=False))
    assert tied.norm == untied.norm == F(13, 8)


def test_norm_table_rows(grid11):
    rows = nearbest.norm_table([(3, 3, 3)], [1, 2], grid11)
    assert [r["n"] for r in rows] == [1, 2]
    assert [r["status"] for r in rows] == ["optimal", "optimal"]
    assert rows[0]["norm"] == F(7, 2)
    assert rows[1]["norm"] == F(13, 8)
    assert rows[0]["key"] == (3, 3, 3)


def test_canonical_grid():
    g = nearbest.canonical_grid()
    assert g.m == (11, 11, 11)
    assert g.h == 1.0
