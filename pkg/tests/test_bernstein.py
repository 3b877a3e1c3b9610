"""Quartic Bernstein basis, de Casteljau evaluation, derivative reduction."""

import math
from fractions import Fraction

import numpy as np
import pytest

from boxqi import bernstein as bb


def _random_bary(rng, n):
    return rng.dirichlet(np.ones(4), n)


def test_multi_indices_enumeration():
    for degree, count in bb.DIMENSION.items():
        mi = np.asarray(bb.multi_indices(degree))
        assert mi.shape == (count, 4)
        assert (mi.sum(axis=1) == degree).all()
        assert (mi >= 0).all()
        # lexicographic and duplicate-free
        as_tuples = [tuple(row) for row in mi]
        assert len(set(as_tuples)) == count
    assert bb.DIMENSION[4] == 35


def test_basis_partition_of_unity_and_positivity(rng):
    bary = _random_bary(rng, 200)
    basis = bb.bernstein_basis(bary)
    assert basis.shape == (200, 35)
    assert (basis >= 0).all()
    np.testing.assert_allclose(basis.sum(axis=1), 1.0, rtol=0, atol=1e-13)


def test_basis_matches_multinomial_formula(rng):
    bary = _random_bary(rng, 20)
    basis = bb.bernstein_basis(bary)
    mi = np.asarray(bb.multi_indices(4))
    for col, xi in enumerate(mi):
        coeff = math.factorial(4) // math.prod(math.factorial(int(v))
                                               for v in xi)
        explicit = coeff * np.prod(bary ** xi, axis=1)
        np.testing.assert_allclose(basis[:, col], explicit, rtol=1e-13)


def test_basis_exact_agrees_with_float():
    bary = (Fraction(1, 3), Fraction(1, 4), Fraction(1, 4), Fraction(1, 6))
    exact = bb.bernstein_basis_exact(bary)
    assert all(isinstance(v, Fraction) for v in exact)
    assert sum(exact) == 1
    floats = bb.bernstein_basis(np.array([[float(v) for v in bary]]))[0]
    np.testing.assert_allclose([float(v) for v in exact], floats, rtol=1e-14)


def test_collocation_matrix_is_invertible_interpolation():
    dp = bb.domain_point_barycentrics()
    matrix = bb.collocation_matrix(np.asarray(dp, float))
    assert matrix.shape == (35, 35)
    rng = np.random.default_rng(7)
    coeffs = rng.normal(size=35)
    values = matrix @ coeffs
    recovered = np.linalg.solve(matrix, values)
    np.testing.assert_allclose(recovered, coeffs, rtol=0, atol=1e-10)


def test_eval_bb_equals_basis_dot(rng):
    bary = _random_bary(rng, 50)
    coeffs = rng.normal(size=35)
    direct = bb.bernstein_basis(bary) @ coeffs
    np.testing.assert_allclose(bb.eval_bb(coeffs, bary), direct, rtol=1e-13)


def test_derivative_reduce_matches_difference_quotient(rng):
    coeffs = rng.normal(size=35)
    direction = np.array([1.0, -0.25, -0.5, -0.25])  # sums to zero
    reduced = bb.derivative_reduce(coeffs, direction)
    assert reduced.shape == (20,)
    bary = _random_bary(rng, 10)
    step = 1e-6
    forward = bb.eval_bb(coeffs, bary + step * direction)
    backward = bb.eval_bb(coeffs, bary - step * direction)
    fd = (forward - backward) / (2 * step)
    analytic = bb.eval_bb(reduced, bary, degree=3)
    np.testing.assert_allclose(analytic, fd, rtol=1e-7, atol=1e-7)


def test_derivative_reduce_exact_on_linear_field():
    # p(lambda) = lambda_0 in BB form: coeffs = xi_0 / 4
    mi = np.asarray(bb.multi_indices(4))
    coeffs = mi[:, 0] / 4.0
    direction = np.array([1.0, -1.0, 0.0, 0.0])
    reduced = bb.derivative_reduce(coeffs, direction)
    # derivative of lambda_0 along direction == 1 everywhere
    bary = np.random.default_rng(3).dirichlet(np.ones(4), 8)
    np.testing.assert_allclose(bb.eval_bb(reduced, bary, degree=3), 1.0,
                               rtol=0, atol=1e-12)


def test_second_reduce_reaches_degree_two(rng):
    coeffs = rng.normal(size=35)
    direction = np.array([0.5, 0.5, -0.5, -0.5])
    second = bb.derivative_reduce(
        bb.derivative_reduce(coeffs, direction), direction, degree=3)
    assert second.shape == (10,)
