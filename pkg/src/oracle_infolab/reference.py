"""Published reference values for the built-in problems.

Values are printed to 4 decimals at the source, so comparisons use an
absolute tolerance of 5e-4 unless the values are exact.  Column names
follow ``MetricsRow``.
"""

from __future__ import annotations

COLUMNS = ("H_Y", "S_rhoY", "C", "H_Y_given_J", "chi", "I_JY", "D_Y")
PRINTED_TOL = 5e-4

# Deutsch-Jozsa, keyed by (k, stage)
DJ = {
    (1, "pre_query"): (1, 0, 1, 1, 0, 0, 0),
    (2, "pre_query"): (2, 0, 2, 2, 0, 0, 0),
    (3, "pre_query"): (3, 0, 3, 3, 0, 0, 0),
    (4, "pre_query"): (4, 0, 4, 4, 0, 0, 0),
    (1, "post_query"): (1, 1, 0, 1, 1, 0, 1),
    (2, "post_query"): (2, 1.7925, 0.2075, 2, 1, 0, 1),
    (3, "post_query"): (3, 2.4037, 0.5963, 3, 1, 0, 1),
    (4, "post_query"): (4, 2.9534, 1.0466, 4, 1, 0, 1),
    (1, "final"): (1, 1, 0, 0, 1, 1, 0),
    (2, "final"): (1.7925, 1.7925, 0, 0.7925, 1, 1, 0),
    (3, "final"): (2.4037, 2.4037, 0, 1.4037, 1, 1, 0),
    (4, "final"): (2.9534, 2.9534, 0, 1.9534, 1, 1, 0),
}


def bv(n: int) -> dict:
    """Closed-form Bernstein-Vazirani values, keyed by stage.

    No χ is published; the pure class states make it equal to S(ρ_Y).
    """
    return {
        "pre_query": {"H_Y": n, "S_rhoY": 0, "C": n, "H_Y_given_J": n, "I_JY": 0, "D_Y": 0},
        "post_query": {"H_Y": n, "S_rhoY": n, "C": n, "H_Y_given_J": n, "I_JY": 0, "D_Y": n},
        "final": {"H_Y": n, "S_rhoY": n, "C": 0, "H_Y_given_J": 0, "I_JY": n, "D_Y": 0},
    }


def simon(n: int) -> dict:
    """Leading-order single-query Simon values, exact up to O(2^-n)."""
    return {
        "pre_query": dict(zip(COLUMNS, (n, 0, n, n, 0, 0, 0))),
        "post_query": dict(zip(COLUMNS, (n, n, 0, n, 1, 0, 1))),
        "final": dict(zip(COLUMNS, (n, n, 0, n - 1, 1, 1, 0))),
    }


# Simon with t non-adaptive queries, final stage: (n, t) -> (H_Y, H_Y_given_J, chi, I_JY)
SIMON_T = {
    (2, 1): (1.8802, 1.25, 0.6302), (2, 2): (3.6157, 2.5, 1.1157),
    (2, 3): (5.2062, 3.75, 1.4562), (2, 4): (6.6777, 5, 1.6777),
    (2, 5): (8.0641, 6.25, 1.8141), (2, 6): (9.3949, 7.5, 1.8949),
    (2, 7): (10.6914, 8.75, 1.9414), (2, 8): (11.9678, 10, 1.9678),
    (2, 9): (13.2324, 11.25, 1.9824), (2, 10): (14.4905, 12.5, 1.9905),
    (2, 11): (15.7449, 13.75, 1.9949), (2, 12): (16.9972, 15, 1.9972),
    (3, 1): (2.9349, 2.125, 0.8099), (3, 2): (5.7994, 4.25, 1.5494),
    (3, 3): (8.4822, 6.375, 2.1072), (3, 4): (10.9777, 8.5, 2.4777),
    (3, 5): (13.3294, 10.625, 2.7044), (3, 6): (15.5863, 12.75, 2.8363),
    (3, 7): (17.7857, 14.875, 2.9107), (3, 8): (19.9517, 17, 2.9517),
    (4, 1): (3.9663, 3.0625, 0.9038), (4, 2): (7.8975, 6.125, 1.7725),
    (4, 3): (11.7534, 9.1875, 2.5659), (4, 4): (15.3994, 12.25, 3.1494),
    (4, 5): (18.8334, 15.3125, 3.5209), (4, 6): (22.1133, 18.375, 3.7383),
}
SIMON_T = {k: {"H_Y": v[0], "H_Y_given_J": v[1], "chi": v[2], "I_JY": v[2], "C": 0.0, "D_Y": 0.0}
           for k, v in SIMON_T.items()}

# Phase estimation, final stage: (n, t) -> (H(Y|J), chi, I, D); H = S = t and C = 0
_PHASE = {
    (2, 2): (1.3864, 1.2090, 0.6136, 0.5954), (2, 3): (1.9096, 1.5250, 1.0904, 0.4346),
    (2, 4): (2.5802, 1.7220, 1.4198, 0.3022), (2, 5): (3.3615, 1.8405, 1.6385, 0.2019),
    (2, 6): (4.2208, 1.9099, 1.7792, 0.1306), (2, 7): (5.1326, 1.9498, 1.8674, 0.0823),
    (2, 8): (6.0785, 1.9723, 1.9215, 0.0507), (2, 9): (7.0459, 1.9848, 1.9541, 0.0307),
    (2, 10): (8.0265, 1.9918, 1.9735, 0.0183),
    (3, 3): (1.5718, 2.1865, 1.4282, 0.7583), (3, 4): (2.0077, 2.5146, 1.9923, 0.5223),
    (3, 5): (2.6317, 2.7170, 2.3683, 0.3487), (3, 6): (3.3883, 2.8380, 2.6117, 0.2263),
    (3, 7): (4.2347, 2.9087, 2.7653, 0.1434), (3, 8): (5.1398, 2.9492, 2.8602, 0.0890),
    (3, 9): (6.0822, 2.9720, 2.9178, 0.0542), (3, 10): (7.0478, 2.9847, 2.9522, 0.0325),
    (4, 4): (1.6631, 3.1810, 2.3369, 0.8441), (4, 5): (2.0548, 3.5120, 2.9452, 0.5668),
    (4, 6): (2.6558, 3.7157, 3.3442, 0.3716), (4, 7): (3.4007, 3.8374, 3.5993, 0.2381),
    (4, 8): (4.2410, 3.9084, 3.7590, 0.1494), (4, 9): (5.1430, 3.9490, 3.8570, 0.0920),
    (4, 10): (6.0838, 3.9719, 3.9162, 0.0558),
    (5, 5): (1.7085, 4.1797, 3.2915, 0.8881), (5, 6): (2.0778, 4.5114, 3.9222, 0.5892),
    (5, 7): (2.6675, 4.7154, 4.3325, 0.3829), (5, 8): (3.4066, 4.8373, 4.5934, 0.2438),
    (5, 9): (4.2440, 4.9083, 4.7560, 0.1523), (5, 10): (5.1445, 4.9490, 4.8555, 0.0935),
    (6, 6): (1.7311, 5.1793, 4.2689, 0.9104), (6, 7): (2.0892, 5.5112, 4.9108, 0.6004),
    (6, 8): (2.6732, 5.7154, 5.3268, 0.3886), (6, 9): (3.4094, 5.8372, 5.5906, 0.2467),
    (6, 10): (4.2454, 5.9083, 5.7546, 0.1537),
    (7, 7): (1.7424, 6.1793, 5.2576, 0.9216), (7, 8): (2.0948, 6.5112, 5.9052, 0.6060),
    (7, 9): (2.6760, 6.7153, 6.3240, 0.3914), (7, 10): (3.4109, 6.8372, 6.5891, 0.2481),
    (8, 8): (1.7480, 7.1792, 6.2520, 0.9272), (8, 9): (2.0977, 7.5112, 6.9023, 0.6088),
    (8, 10): (2.6775, 7.7153, 7.3225, 0.3928),
}
PHASE = {(n, t): dict(zip(COLUMNS, (t, t, 0.0) + v)) for (n, t), v in _PHASE.items()}

DESK_PHASE_LIMITS = (4, 8)
FULL_PHASE_LIMITS = (8, 10)


def phase_rows(scale: str = "desk") -> list:
    n_max, t_max = DESK_PHASE_LIMITS if scale == "desk" else FULL_PHASE_LIMITS
    return sorted(k for k in PHASE if k[0] <= n_max and k[1] <= t_max)


def simon_t_rows() -> list:
    return sorted(SIMON_T)
