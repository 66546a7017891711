# the rank-one model: X ~ N_2((1, 1), I), Y ~ N_{1x2}(0, I)
DEMO_N = 1
DEMO_P = 2
DEMO_THETA = (1.0, 1.0)

# the contrast model, where rank(S) = 3 almost surely
CONTRAST_N = 3
CONTRAST_P = 5

MIN_REPS = 10_000
RANK_ONE_TOL = 1e-10

VERDICT_INFINITE = "infinite-mean-consistent"
VERDICT_FINITE = "finite-mean-consistent"
VERDICT_INCONCLUSIVE = "inconclusive"
VERDICT_POLICY = (
    "infinite-mean-consistent if hill_alpha + {se} SE < 1 and the running mean at the largest N is not within "
    "{stable} SE of the mean at the first N; finite-mean-consistent if hill_alpha + {se} SE > 1 and it is; "
    "otherwise inconclusive"
)

TAIL_HEADER = ("rep", "inv_f", "rank_s")
