from math import comb

import numpy as np


def bernstein(i, n, t):
    """
    Compute the i-th Bernstein basis polynomial of degree n at t.

    ``t`` may be a scalar or an array; the result has the same shape.
    """
    if not 0 <= i <= n:
        raise IndexError(f"Bernstein index {i} outside 0..{n}")
    t = np.asarray(t, dtype=float)
    return comb(n, i) * t ** i * (1.0 - t) ** (n - i)


def bernstein_matrix(n, t):
    """(len(t), n + 1) matrix of all degree-n basis polynomials evaluated at t."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.column_stack([bernstein(i, n, t) for i in range(n + 1)])


def de_casteljau(control_points, t):
    """Evaluate a Bezier curve by repeated linear interpolation of its control polygon."""
    pts = np.asarray(control_points, dtype=float)
    out = []
    for tk in np.atleast_1d(np.asarray(t, dtype=float)):
        work = pts.copy()
        while len(work) > 1:
            work = (1.0 - tk) * work[:-1] + tk * work[1:]
        out.append(work[0])
    return np.array(out)
