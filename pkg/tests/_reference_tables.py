"""Printed reference values for the four VaR / ES tables.

Cells are ordered n = 10 then n = 30, each with 1 - p = 1e-2, 1e-3, 1e-5.
``approx`` holds the printed asymptotic approximations (VaR tables only),
kept as strings so every printed digit is compared.
"""

TAIL_LEVELS = (1e-2, 1e-3, 1e-5)
NS = (10, 30)

TABLES = {
    1: {
        "true": [40.141, 108.49, 1007.4, 84.622, 202.41, 1759.5],
        "approx": ["30.623", "99.000", "999.00", "53.772", "172.21", "1731.1"],
        "sm_std": [0.246, 0.847, 18.5, 0.3950, 1.530, 41.12],
        "dlw_std": [0.459, 1.081, 1.51, 1.237, 2.400, 1.487],
        "mc_std": [1.780, 47.23, 1594.0, 2.739, 71.26, 443.5],
    },
    2: {
        "true": [14.190, 25.656, 103.42, 29.951, 46.072, 157.65],
        "approx": ["9.0000", "20.544", "99.000", "13.422", "30.072", "143.22"],
        "sm_std": [0.090, 0.171, 0.799, 0.287, 0.286, 1.080],
        "dlw_std": [0.154, 0.412, 0.553, 0.519, 1.041, 0.273],
    },
    3: {
        "true": [71.795, 208.84, 2008.4, 139.22, 376.29, 3494.4],
        "sm_std": [1.06, 3.60, 37.1, 2.22, 5.00, 65.2],
        "dlw_std": [1.22, 4.99, 30.9, 3.09, 11.49, 59.8],
    },
    4: {
        "true": [19.260, 36.658, 154.74, 37.277, 62.090, 232.01],
        "sm_std": [0.167, 0.327, 1.326, 0.902, 0.416, 1.92],
        "dlw_std": [0.395, 0.776, 2.705, 1.169, 1.814, 1.47],
    },
}


def cells():
    return [(n, t) for n in NS for t in TAIL_LEVELS]
