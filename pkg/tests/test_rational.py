from fractions import Fraction

import numpy as np
import pytest

from exceptions import DomainError, InvalidInputError
from experiments.counterexample import constants
from linalg import RationalMatrix, pinv_exact


def test_from_rows_applies_scale():
    m = RationalMatrix.from_rows([[2, 4], [6, 8]], Fraction(1, 2))
    assert m == RationalMatrix.from_rows([[1, 2], [3, 4]])
    assert m.to_strings() == [["1/1", "2/1"], ["3/1", "4/1"]]


def test_ragged_rows_are_rejected():
    with pytest.raises(InvalidInputError):
        RationalMatrix([[1, 2], [3]])
    with pytest.raises(InvalidInputError):
        RationalMatrix([["one"]])


def test_rref_and_rank():
    m = RationalMatrix.from_rows([[2, 4, 2], [1, 2, 3], [3, 6, 5]])
    reduced, pivots = m.rref()
    assert pivots == [0, 2]
    assert reduced == RationalMatrix.from_rows([[1, 2, 0], [0, 0, 1]])
    assert m.rank() == 2
    assert RationalMatrix.zeros(2, 3).rref() == (None, [])


def test_inverse():
    m = RationalMatrix.from_rows([[2, 1], [7, 4]])
    assert m.inverse() == RationalMatrix.from_rows([[4, -1], [-7, 2]])
    assert m @ m.inverse() == RationalMatrix.identity(2)
    with pytest.raises(DomainError):
        RationalMatrix.from_rows([[1, 2], [2, 4]]).inverse()
    with pytest.raises(DomainError):
        RationalMatrix.from_rows([[1, 2, 3]]).inverse()


def test_pinv_of_a_column():
    v = RationalMatrix.column([1, 2, 2])
    assert pinv_exact(v) == RationalMatrix.from_rows([[1, 2, 2]], Fraction(1, 9))


def test_pinv_of_zero_matrix():
    assert pinv_exact(RationalMatrix.zeros(2, 3)) == RationalMatrix.zeros(3, 2)


def test_pinv_of_the_counterexample_matrix():
    t = RationalMatrix.from_rows(constants.T_ROWS, constants.T_SCALE)
    printed = RationalMatrix.from_rows(constants.T_PINV_ROWS, constants.T_PINV_SCALE)
    assert pinv_exact(t) == printed
    assert t.pinv()[0, 0] == Fraction(7, 4)


def test_arithmetic():
    a = RationalMatrix.from_rows([[1, 2], [3, 4]])
    b = RationalMatrix.identity(2)
    assert a + b - b == a
    assert -a + a == RationalMatrix.zeros(2, 2)
    assert (Fraction(1, 2) * a)[1, 1] == 2
    assert a.T[0, 1] == 3
    assert a.trace() == 5
    with pytest.raises(InvalidInputError):
        a @ RationalMatrix.column([1, 2, 3])


def test_to_numpy():
    m = RationalMatrix.from_rows([[1, Fraction(1, 4)]])
    np.testing.assert_array_equal(m.to_numpy(), np.array([[1.0, 0.25]]))
