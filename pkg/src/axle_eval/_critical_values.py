"""Critical values of the Mann-Whitney U statistic.

Generated by tools/make_critical_table.py; do not edit by hand.
CRITICAL_VALUES[(alpha, tails)][n1 - 1][n2 - 1] is the largest U whose exact
tail probability (doubled when two-tailed) does not exceed alpha, or None
when the sample sizes are too small to reach significance.
"""

TABLE_MAX_N = 20
TABLE_ALPHAS = (0.05, 0.01)

CRITICAL_VALUES = {
    (0.05, 'one'): (
        (None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, 0, 0),
        (None, None, None, None, 0, 0, 0, 1, 1, 1, 1, 2, 2, 3, 3, 3, 3, 4, 4, 4),
        (None, None, 0, 0, 1, 2, 2, 3, 4, 4, 5, 5, 6, 7, 7, 8, 9, 9, 10, 11),
        (None, None, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 14, 15, 16, 17, 18),
        (None, 0, 1, 2, 4, 5, 6, 8, 9, 11, 12, 13, 15, 16, 18, 19, 20, 22, 23, 25),
        (None, 0, 2, 3, 5, 7, 8, 10, 12, 14, 16, 17, 19, 21, 23, 25, 26, 28, 30, 32),
        (None, 0, 2, 4, 6, 8, 11, 13, 15, 17, 19, 21, 24, 26, 28, 30, 33, 35, 37, 39),
        (None, 1, 3, 5, 8, 10, 13, 15, 18, 20, 23, 26, 28, 31, 33, 36, 39, 41, 44, 47),
        (None, 1, 4, 6, 9, 12, 15, 18, 21, 24, 27, 30, 33, 36, 39, 42, 45, 48, 51, 54),
        (None, 1, 4, 7, 11, 14, 17, 20, 24, 27, 31, 34, 37, 41, 44, 48, 51, 55, 58, 62),
        (None, 1, 5, 8, 12, 16, 19, 23, 27, 31, 34, 38, 42, 46, 50, 54, 57, 61, 65, 69),
        (None, 2, 5, 9, 13, 17, 21, 26, 30, 34, 38, 42, 47, 51, 55, 60, 64, 68, 72, 77),
        (None, 2, 6, 10, 15, 19, 24, 28, 33, 37, 42, 47, 51, 56, 61, 65, 70, 75, 80, 84),
        (None, 3, 7, 11, 16, 21, 26, 31, 36, 41, 46, 51, 56, 61, 66, 71, 77, 82, 87, 92),
        (None, 3, 7, 12, 18, 23, 28, 33, 39, 44, 50, 55, 61, 66, 72, 77, 83, 88, 94, 100),
        (None, 3, 8, 14, 19, 25, 30, 36, 42, 48, 54, 60, 65, 71, 77, 83, 89, 95, 101, 107),
        (None, 3, 9, 15, 20, 26, 33, 39, 45, 51, 57, 64, 70, 77, 83, 89, 96, 102, 109, 115),
        (None, 4, 9, 16, 22, 28, 35, 41, 48, 55, 61, 68, 75, 82, 88, 95, 102, 109, 116, 123),
        (0, 4, 10, 17, 23, 30, 37, 44, 51, 58, 65, 72, 80, 87, 94, 101, 109, 116, 123, 130),
        (0, 4, 11, 18, 25, 32, 39, 47, 54, 62, 69, 77, 84, 92, 100, 107, 115, 123, 130, 138),
    ),
    (0.05, 'two'): (
        (None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None),
        (None, None, None, None, None, None, None, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2),
        (None, None, None, None, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8),
        (None, None, None, 0, 1, 2, 3, 4, 4, 5, 6, 7, 8, 9, 10, 11, 11, 12, 13, 14),
        (None, None, 0, 1, 2, 3, 5, 6, 7, 8, 9, 11, 12, 13, 14, 15, 17, 18, 19, 20),
        (None, None, 1, 2, 3, 5, 6, 8, 10, 11, 13, 14, 16, 17, 19, 21, 22, 24, 25, 27),
        (None, None, 1, 3, 5, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 32, 34),
        (None, 0, 2, 4, 6, 8, 10, 13, 15, 17, 19, 22, 24, 26, 29, 31, 34, 36, 38, 41),
        (None, 0, 2, 4, 7, 10, 12, 15, 17, 20, 23, 26, 28, 31, 34, 37, 39, 42, 45, 48),
        (None, 0, 3, 5, 8, 11, 14, 17, 20, 23, 26, 29, 33, 36, 39, 42, 45, 48, 52, 55),
        (None, 0, 3, 6, 9, 13, 16, 19, 23, 26, 30, 33, 37, 40, 44, 47, 51, 55, 58, 62),
        (None, 1, 4, 7, 11, 14, 18, 22, 26, 29, 33, 37, 41, 45, 49, 53, 57, 61, 65, 69),
        (None, 1, 4, 8, 12, 16, 20, 24, 28, 33, 37, 41, 45, 50, 54, 59, 63, 67, 72, 76),
        (None, 1, 5, 9, 13, 17, 22, 26, 31, 36, 40, 45, 50, 55, 59, 64, 69, 74, 78, 83),
        (None, 1, 5, 10, 14, 19, 24, 29, 34, 39, 44, 49, 54, 59, 64, 70, 75, 80, 85, 90),
        (None, 1, 6, 11, 15, 21, 26, 31, 37, 42, 47, 53, 59, 64, 70, 75, 81, 86, 92, 98),
        (None, 2, 6, 11, 17, 22, 28, 34, 39, 45, 51, 57, 63, 69, 75, 81, 87, 93, 99, 105),
        (None, 2, 7, 12, 18, 24, 30, 36, 42, 48, 55, 61, 67, 74, 80, 86, 93, 99, 106, 112),
        (None, 2, 7, 13, 19, 25, 32, 38, 45, 52, 58, 65, 72, 78, 85, 92, 99, 106, 113, 119),
        (None, 2, 8, 14, 20, 27, 34, 41, 48, 55, 62, 69, 76, 83, 90, 98, 105, 112, 119, 127),
    ),
    (0.01, 'one'): (
        (None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None),
        (None, None, None, None, None, None, None, None, None, None, None, None, 0, 0, 0, 0, 0, 0, 1, 1),
        (None, None, None, None, None, None, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 4, 4, 4, 5),
        (None, None, None, None, 0, 1, 1, 2, 3, 3, 4, 5, 5, 6, 7, 7, 8, 9, 9, 10),
        (None, None, None, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16),
        (None, None, None, 1, 2, 3, 4, 6, 7, 8, 9, 11, 12, 13, 15, 16, 18, 19, 20, 22),
        (None, None, 0, 1, 3, 4, 6, 7, 9, 11, 12, 14, 16, 17, 19, 21, 23, 24, 26, 28),
        (None, None, 0, 2, 4, 6, 7, 9, 11, 13, 15, 17, 20, 22, 24, 26, 28, 30, 32, 34),
        (None, None, 1, 3, 5, 7, 9, 11, 14, 16, 18, 21, 23, 26, 28, 31, 33, 36, 38, 40),
        (None, None, 1, 3, 6, 8, 11, 13, 16, 19, 22, 24, 27, 30, 33, 36, 38, 41, 44, 47),
        (None, None, 1, 4, 7, 9, 12, 15, 18, 22, 25, 28, 31, 34, 37, 41, 44, 47, 50, 53),
        (None, None, 2, 5, 8, 11, 14, 17, 21, 24, 28, 31, 35, 38, 42, 46, 49, 53, 56, 60),
        (None, 0, 2, 5, 9, 12, 16, 20, 23, 27, 31, 35, 39, 43, 47, 51, 55, 59, 63, 67),
        (None, 0, 2, 6, 10, 13, 17, 22, 26, 30, 34, 38, 43, 47, 51, 56, 60, 65, 69, 73),
        (None, 0, 3, 7, 11, 15, 19, 24, 28, 33, 37, 42, 47, 51, 56, 61, 66, 70, 75, 80),
        (None, 0, 3, 7, 12, 16, 21, 26, 31, 36, 41, 46, 51, 56, 61, 66, 71, 76, 82, 87),
        (None, 0, 4, 8, 13, 18, 23, 28, 33, 38, 44, 49, 55, 60, 66, 71, 77, 82, 88, 93),
        (None, 0, 4, 9, 14, 19, 24, 30, 36, 41, 47, 53, 59, 65, 70, 76, 82, 88, 94, 100),
        (None, 1, 4, 9, 15, 20, 26, 32, 38, 44, 50, 56, 63, 69, 75, 82, 88, 94, 101, 107),
        (None, 1, 5, 10, 16, 22, 28, 34, 40, 47, 53, 60, 67, 73, 80, 87, 93, 100, 107, 114),
    ),
    (0.01, 'two'): (
        (None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None),
        (None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, None, 0, 0),
        (None, None, None, None, None, None, None, None, 0, 0, 0, 1, 1, 1, 2, 2, 2, 2, 3, 3),
        (None, None, None, None, None, 0, 0, 1, 1, 2, 2, 3, 3, 4, 5, 5, 6, 6, 7, 8),
        (None, None, None, None, 0, 1, 1, 2, 3, 4, 5, 6, 7, 7, 8, 9, 10, 11, 12, 13),
        (None, None, None, 0, 1, 2, 3, 4, 5, 6, 7, 9, 10, 11, 12, 13, 15, 16, 17, 18),
        (None, None, None, 0, 1, 3, 4, 6, 7, 9, 10, 12, 13, 15, 16, 18, 19, 21, 22, 24),
        (None, None, None, 1, 2, 4, 6, 7, 9, 11, 13, 15, 17, 18, 20, 22, 24, 26, 28, 30),
        (None, None, 0, 1, 3, 5, 7, 9, 11, 13, 16, 18, 20, 22, 24, 27, 29, 31, 33, 36),
        (None, None, 0, 2, 4, 6, 9, 11, 13, 16, 18, 21, 24, 26, 29, 31, 34, 37, 39, 42),
        (None, None, 0, 2, 5, 7, 10, 13, 16, 18, 21, 24, 27, 30, 33, 36, 39, 42, 45, 48),
        (None, None, 1, 3, 6, 9, 12, 15, 18, 21, 24, 27, 31, 34, 37, 41, 44, 47, 51, 54),
        (None, None, 1, 3, 7, 10, 13, 17, 20, 24, 27, 31, 34, 38, 42, 45, 49, 53, 57, 60),
        (None, None, 1, 4, 7, 11, 15, 18, 22, 26, 30, 34, 38, 42, 46, 50, 54, 58, 63, 67),
        (None, None, 2, 5, 8, 12, 16, 20, 24, 29, 33, 37, 42, 46, 51, 55, 60, 64, 69, 73),
        (None, None, 2, 5, 9, 13, 18, 22, 27, 31, 36, 41, 45, 50, 55, 60, 65, 70, 74, 79),
        (None, None, 2, 6, 10, 15, 19, 24, 29, 34, 39, 44, 49, 54, 60, 65, 70, 75, 81, 86),
        (None, None, 2, 6, 11, 16, 21, 26, 31, 37, 42, 47, 53, 58, 64, 70, 75, 81, 87, 92),
        (None, 0, 3, 7, 12, 17, 22, 28, 33, 39, 45, 51, 57, 63, 69, 74, 81, 87, 93, 99),
        (None, 0, 3, 8, 13, 18, 24, 30, 36, 42, 48, 54, 60, 67, 73, 79, 86, 92, 99, 105),
    ),
}
