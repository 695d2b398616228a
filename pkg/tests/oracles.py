"""Slow, direct reference implementations used only by the tests.

Written straight from the filter formulas with explicit loops so they share
no code with the vectorized library paths.
"""
from math import sqrt

_R3 = sqrt(3.0)
_DEN = 4.0 * sqrt(2.0)

H = {0: (1 + _R3) / _DEN, 1: (3 + _R3) / _DEN, 2: (3 - _R3) / _DEN, 3: (1 - _R3) / _DEN}
G = {-2: (1 - _R3) / _DEN, -1: -(3 - _R3) / _DEN, 0: (3 + _R3) / _DEN, 1: -(1 + _R3) / _DEN}


def lowpass(s):
    n = len(s)
    return [sum(H[i] * s[(2 * k + i) % n] for i in range(4)) for k in range(n // 2)]


def highpass(s):
    n = len(s)
    return [sum(G[i] * s[(2 * k + i) % n] for i in range(-2, 2)) for k in range(n // 2)]


def block_means(m):
    rows, cols = len(m), len(m[0])
    return [[(m[2 * i][2 * j] + m[2 * i][2 * j + 1] + m[2 * i + 1][2 * j] + m[2 * i + 1][2 * j + 1]) / 4
             for j in range(cols // 2)] for i in range(rows // 2)]


def edge_census(facets):
    """{undirected edge: [directed uses]} by plain enumeration."""
    census = {}
    for a, b, c in facets:
        for u, v in ((a, b), (b, c), (c, a)):
            census.setdefault(frozenset((u, v)), []).append((u, v))
    return census
