# shrinkage certificates are checked on [0, CERTIFY_T_MAX]
CERTIFY_T_MAX = 1e6
CERTIFY_LINEAR_POINTS = 2001
CERTIFY_LOG_POINTS = 2001
DERIV_TOL = 1e-6

# bound chain preconditions: P(rank(S) > 2) = 1 needs min(n, p) >= 3
MIN_CHAIN_RANK = 3
MIN_CHAIN_REPS = 100
FIRST_SUMMED_BLOCK = 3  # the final bound sums tr(A^-2(j)) for j = 3..p

MAX_RESAMPLES = 1000

DIVERGENCE_HEADER = ("rep", "f_value", "rank_s", "coeff", "closed_form", "finite_diff", "rel_err")
LEDGER_HEADER = (
    "rep",
    "rank_s",
    "inv_f",
    "lambda_max",
    "inv_u_norm",
    "trace_ss_pinv",
    "spectral_ok",
    "rayleigh_ok",
    "inv_f_bound",
    "inv_f_ok",
)
SANDWICH_HEADER = (
    "rep",
    "rank_s",
    "f_value",
    "spectral_low",
    "spectral_high",
    "spectral_ok",
    "rayleigh_low",
    "rayleigh_mid",
    "rayleigh_high",
    "rayleigh_ok",
    "inv_f_bound",
    "inv_f_ok",
)
