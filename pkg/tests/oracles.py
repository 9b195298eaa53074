"""Independent reference implementations used by the test suite.

These are deliberately written with different algorithms than the
package so agreement between the two is meaningful.
"""

from __future__ import annotations

import mpmath


def max_bipartite_matching(caption: list[str], source: list[str]) -> int:
    """Classic augmenting-path maximum matching on token equality."""
    match_of_source: dict[int, int] = {}

    def try_assign(ci: int, visited: set[int]) -> bool:
        for si in range(len(source)):
            if caption[ci] == source[si] and si not in visited:
                visited.add(si)
                if si not in match_of_source or try_assign(match_of_source[si], visited):
                    match_of_source[si] = ci
                    return True
        return False

    size = 0
    for ci in range(len(caption)):
        if try_assign(ci, set()):
            size += 1
    return size


def student_t_two_sided_p(t: float, df: float) -> float:
    """Two-sided p-value from the Student t distribution.

    Uses the regularized incomplete beta function: for T ~ t(df),
    P(|T| >= |t|) = I_x(df/2, 1/2) with x = df / (df + t^2).
    """
    if df <= 0:
        raise ValueError("df must be positive")
    x = df / (df + t * t)
    return float(mpmath.betainc(df / 2.0, 0.5, 0, x, regularized=True))
