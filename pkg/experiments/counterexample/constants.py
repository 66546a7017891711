from fractions import Fraction

# T = (1/48)·T_ROWS, printed T⁺ = (1/4)·T_PINV_ROWS
T_SCALE = Fraction(1, 48)
T_ROWS = (
    (7, 7, 1, 1),
    (7, 7, 1, 1),
    (1, 1, 7, 7),
    (1, 1, 7, 7),
)
T_PINV_SCALE = Fraction(1, 4)
T_PINV_ROWS = (
    (7, 7, -1, -1),
    (7, 7, -1, -1),
    (-1, -1, 7, 7),
    (-1, -1, 7, 7),
)
X_VECTOR = (1, 0, 0, 0)

# every projector product printed in the counter-example equals this block matrix
HALF_BLOCKS_SCALE = Fraction(1, 2)
HALF_BLOCKS = (
    (1, 1, 0, 0),
    (1, 1, 0, 0),
    (0, 0, 1, 1),
    (0, 0, 1, 1),
)

EXPECTED_LHS = Fraction(1, 2)
EXPECTED_RHS = Fraction(1, 4)

# random cases of the scan: spectra drawn from U(EIGEN_LOW, EIGEN_HIGH)
EIGEN_LOW = 0.1
EIGEN_HIGH = 2.0

COUNTEREXAMPLE_HEADER = ("lhs", "rhs", "holds")
SCAN_HEADER = ("trial", "rank_t", "lhs", "rhs", "holds")
