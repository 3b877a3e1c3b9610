"""Exact rational simplex: standard-form LPs and the weighted l1
minimization wrapper."""

from fractions import Fraction

from boxqi import simplex


F = Fraction


def test_solve_lp_known_optimum():
    # min x1 + x2 : x1 + 2 x2 = 4, x >= 0  ->  x = (0, 2), objective 2
    res = simplex.solve_lp([[F(1), F(2)]], [F(4)], [F(1), F(1)])
    assert res.status == "optimal"
    assert res.objective == 2
    assert res.x == [F(0), F(2)]
    assert all(isinstance(v, Fraction) for v in res.x)


def test_solve_lp_degenerate_vertex():
    # two constraints meeting at (1, 0, 0); exact pivoting must terminate
    A = [[F(1), F(1), F(0)], [F(1), F(0), F(1)]]
    res = simplex.solve_lp(A, [F(1), F(1)], [F(1), F(3), F(3)])
    assert res.status == "optimal"
    assert res.objective == 1
    assert res.x == [F(1), F(0), F(0)]


def test_solve_lp_infeasible():
    # x1 + x2 = -1 with x >= 0 has no solution
    res = simplex.solve_lp([[F(1), F(1)]], [F(-1)], [F(1), F(1)])
    assert res.status == "infeasible"
    assert res.x is None


def test_solve_lp_unbounded():
    # min -x1 : x1 - x2 = 0 lets x1 grow without limit
    res = simplex.solve_lp([[F(1), F(-1)]], [F(0)], [F(-1), F(0)])
    assert res.status == "unbounded"


def test_solve_lp_exact_fractions_survive():
    # optimum with awkward rationals: x1/3 + x2 = 1/7, minimize x1 + 5 x2
    res = simplex.solve_lp([[F(1, 3), F(1)]], [F(1, 7)], [F(1), F(5)])
    assert res.status == "optimal"
    assert res.objective == F(3, 7)
    assert res.x == [F(3, 7), F(0)]


def test_minimize_l1_signed_solution():
    # s1 - s2 = 1, s1 + s2 = -3  ->  s = (-1, -2), |s|_1 = 3
    V = [[F(1), F(-1)], [F(1), F(1)]]
    status, s, norm = simplex.minimize_l1_exact(V, [F(1), F(-3)])
    assert status == "optimal"
    assert s == [F(-1), F(-2)]
    assert norm == 3


def test_minimize_l1_prefers_sparse_combination():
    # one equation, three unknowns: s1 + 2 s2 + 4 s3 = 4
    # cheapest l1 solution puts everything on the largest coefficient
    V = [[F(1), F(2), F(4)]]
    status, s, norm = simplex.minimize_l1_exact(V, [F(4)])
    assert status == "optimal"
    assert norm == 1
    assert s == [F(0), F(0), F(1)]


def test_minimize_l1_objective_weights():
    # same system, but make the third variable expensive
    V = [[F(1), F(2), F(4)]]
    status, s, norm = simplex.minimize_l1_exact(
        V, [F(4)], weights=[F(1), F(1), F(100)])
    assert status == "optimal"
    assert norm == 2  # now 2 s2 = 4 wins
    assert s == [F(0), F(2), F(0)]


def test_minimize_l1_infeasible():
    status, s, norm = simplex.minimize_l1_exact([[F(0), F(0)]], [F(1)])
    assert status == "infeasible"
    assert s is None and norm is None
