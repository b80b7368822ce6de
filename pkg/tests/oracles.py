"""Independent oracles the tests check the library against.

Everything here is deliberately primitive: finite differences instead of the
library's analytic gradients, exact characteristic polynomials instead of
LAPACK, dense grid search instead of solver output. Slow and dumb on purpose.
"""

from __future__ import annotations

import numpy as np
import sympy as sp


def central_diff(f, x: np.ndarray, i: int, h: float = 1e-5) -> float:
    """Two-sided difference quotient of f along coordinate i."""
    xp = np.array(x, dtype=float)
    xm = np.array(x, dtype=float)
    xp[i] += h
    xm[i] -= h
    return (f(xp) - f(xm)) / (2.0 * h)


def second_diff(f, x: np.ndarray, i: int, h: float = 1e-4) -> float:
    """Second difference along coordinate i; >= 0 (up to noise) for convex f."""
    xp = np.array(x, dtype=float)
    xm = np.array(x, dtype=float)
    xp[i] += h
    xm[i] -= h
    return (f(xp) + f(xm) - 2.0 * f(np.array(x, dtype=float))) / h**2


def grid_best_response(game, i: int, profile: np.ndarray, points: int = 2001) -> float:
    """Argmin of J_i over a uniform grid on player i's interval, others fixed."""
    lo = game.action_box.lower[i]
    hi = game.action_box.upper[i]
    grid = np.linspace(lo, hi, points)
    x = np.array(profile, dtype=float)
    best_t, best_v = grid[0], np.inf
    for t in grid:
        x[i] = t
        v = game.cost(i, x)
        if v < best_v:
            best_t, best_v = t, v
    return float(best_t)


def charpoly_eigs(M) -> np.ndarray:
    """Eigenvalues via the exact characteristic polynomial (sympy, no LAPACK).

    M must have entries representable exactly (ints or Fractions/Rationals).
    Returns the ascending real parts; intended for symmetric M where all roots
    are real.
    """
    S = sp.Matrix([[sp.nsimplify(v, rational=True) for v in row] for row in M])
    lam = sp.Symbol("lam")
    poly = sp.Poly(S.charpoly(lam).as_expr(), lam)
    roots = poly.real_roots()  # exact isolation, multiplicities repeated
    return np.array(sorted(float(r.evalf(25)) for r in roots))


def normalized_laplacian_eigs_exact(graph) -> np.ndarray:
    """Spectrum of L_N via the similar rational matrix D^{-1} L.

    D^{-1/2} L D^{-1/2} and D^{-1} L are similar, so they share eigenvalues,
    and the latter has rational entries amenable to exact charpoly work.
    """
    deg = graph.degrees()
    L = graph.laplacian()
    M = [[sp.Rational(int(L[i][j]), int(deg[i])) for j in range(graph.n)]
         for i in range(graph.n)]
    return charpoly_eigs(M)
