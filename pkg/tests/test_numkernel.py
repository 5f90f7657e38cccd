"""Exact scalars and the small dense symmetric kernel."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbpkit.numkernel import Rational, lsq_solve, project_nsd, sym_eig


class TestRational:
    def test_parse_fraction_string(self):
        r = Rational.parse("2128/720")
        assert r == Fraction(2128, 720)
        assert r.denominator == 45  # lowest terms

    def test_parse_decimal_string(self):
        assert Rational.parse("0.335279") == Fraction(335279, 10 ** 6)

    def test_serialize_roundtrip(self):
        for text in ("-3/7", "0", "5", "1/3"):
            r = Rational.parse(text)
            assert Rational.parse(r.serialize()) == r

    def test_integer_serializes_without_slash(self):
        assert Rational(4).serialize() == "4"

    def test_arithmetic_is_exact(self):
        acc = sum((Rational(1, k) for k in range(1, 12)), Rational(0))
        assert acc == Fraction(83711, 27720)

    @given(st.integers(-10 ** 6, 10 ** 6), st.integers(1, 10 ** 6))
    @settings(max_examples=50, deadline=None)
    def test_serialize_parse_identity(self, p, q):
        r = Rational(p, q)
        assert Rational.parse(r.serialize()) == r


class TestSymEig:
    def test_known_two_by_two(self):
        dec = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert np.allclose(dec.eigenvalues, [1.0, 3.0])

    def test_eigenvalues_sorted(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((8, 8))
        A = A + A.T
        dec = sym_eig(A)
        assert np.all(np.diff(dec.eigenvalues) >= 0)

    def test_reconstruction(self):
        rng = np.random.default_rng(4)
        A = rng.standard_normal((7, 7))
        A = A + A.T
        dec = sym_eig(A)
        R = dec.eigenvectors @ np.diag(dec.eigenvalues) @ dec.eigenvectors.T
        assert np.abs(R - A).max() < 1e-12

    def test_orthonormal_basis(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((6, 6))
        A = A + A.T
        V = sym_eig(A).eigenvectors
        assert np.abs(V.T @ V - np.eye(6)).max() < 1e-12


class TestLsqSolve:
    def test_consistent_square_system(self):
        A = np.array([[2.0, 0.0], [0.0, 4.0]])
        x = lsq_solve(A, np.array([2.0, 8.0]))
        assert np.allclose(x, [1.0, 2.0])

    def test_least_squares_residual_orthogonality(self):
        rng = np.random.default_rng(6)
        A = rng.standard_normal((9, 4))
        b = rng.standard_normal(9)
        x = lsq_solve(A, b)
        assert np.abs(A.T @ (A @ x - b)).max() < 1e-10

    def test_ridge_shrinks_solution(self):
        rng = np.random.default_rng(7)
        A = rng.standard_normal((6, 6)) * 1e-3  # ill-scaled
        b = rng.standard_normal(6)
        x0 = lsq_solve(A, b)
        x1 = lsq_solve(A, b, ridge=1.0)
        assert np.linalg.norm(x1) < np.linalg.norm(x0)


class TestProjectNsd:
    def test_nsd_input_fixed_point(self):
        M = np.diag([-3.0, -1.0, 0.0])
        assert np.abs(project_nsd(M) - M).max() < 1e-14

    def test_clips_positive_part(self):
        M = np.diag([2.0, -1.0])
        P = project_nsd(M)
        assert np.allclose(P, np.diag([0.0, -1.0]))

    def test_result_is_nsd(self):
        rng = np.random.default_rng(8)
        A = rng.standard_normal((10, 10))
        A = A + A.T
        P = project_nsd(A)
        assert sym_eig(P).eigenvalues[-1] <= 1e-12

    def test_eps1_margin(self):
        A = np.diag([1.0, -0.1, -5.0])
        P = project_nsd(A, eps1=0.5)
        assert sym_eig(P).eigenvalues[-1] <= -0.5 + 1e-14

    def test_negative_eps1_rejected(self):
        with pytest.raises(ValueError):
            project_nsd(np.eye(2), eps1=-1.0)

    @given(st.integers(2, 7), st.integers(0, 10 ** 6))
    @settings(max_examples=40, deadline=None)
    def test_projection_never_farther_than_zero(self, n, seed):
        """The nearest NSD point beats the trivial candidate 0."""
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((n, n))
        A = A + A.T
        P = project_nsd(A)
        assert (np.linalg.norm(A - P) <=
                np.linalg.norm(A - np.zeros_like(A)) + 1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(9)
        A = rng.standard_normal((5, 5))
        A = A + A.T
        P = project_nsd(A)
        assert np.abs(project_nsd(P) - P).max() < 1e-12
