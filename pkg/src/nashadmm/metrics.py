"""Convergence metrics shared by the solver, the baseline, and diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import GameModel
from .graph import CommGraph

__all__ = [
    "IterationRecord",
    "consensus_error",
    "ne_residual",
    "m2_seminorm_distance",
]


@dataclass(frozen=True)
class IterationRecord:
    """One sampled iteration: actions plus the two stopping metrics.

    `guard_activations` counts clamped congestion terms summed over players
    (always 0 for games without guards). `elapsed` is wall-clock seconds spent
    in the solver up to and including this iteration.
    """

    k: int
    actions: np.ndarray
    consensus_error: float
    ne_residual: float
    guard_activations: int
    elapsed: float


def consensus_error(X: np.ndarray, graph: CommGraph) -> float:
    """max over communication edges (i, j) of ||x^i - x^j||_inf.

    X holds one local profile estimate per row. Zero for n = 1 or an edgeless
    graph (vacuous maximum).
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] != graph.n:
        raise ValueError("row count disagrees with graph size")
    best = 0.0
    for i, j in graph.edges:
        diff = float(np.max(np.abs(X[i] - X[j])))
        if diff > best:
            best = diff
    return best


def ne_residual(x: np.ndarray, game: GameModel) -> float:
    """||x - Proj_box(x - F(x))||_inf, a fixed-point gap at profile x.

    Zero exactly at an equilibrium: the projection absorbs the pseudo-gradient
    at active bounds, while interior coordinates need F_i(x) = 0.
    """
    x = np.asarray(x, dtype=float)
    step = game.action_box.project(x - game.pseudo_gradient(x))
    return float(np.max(np.abs(x - step)))


def m2_seminorm_distance(X: np.ndarray, x_star: np.ndarray, cfg, graph: CommGraph) -> float:
    """Squared seminorm distance of the estimate matrix from consensus at x_star.

    With E = X - 1 x_star^T and per-player proximal weights beta_i and penalty
    c taken from cfg,

        (1/2) [ sum_i beta_i E_ii^2  +  c * sum_ij (D + A)_ij <E_i, E_j> ]

    where D + A is the degree-plus-adjacency matrix of the communication
    graph, applied blockwise (the n^2 x n^2 form is never materialized).
    Nonnegative whenever the graph is connected.
    """
    X = np.asarray(X, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    if X.shape != (graph.n, graph.n):
        raise ValueError("X must be n-by-n")
    beta = np.broadcast_to(np.asarray(cfg.beta, dtype=float), (graph.n,))
    E = X - x_star[None, :]
    diag_part = float(np.sum(beta * np.diagonal(E) ** 2))
    mixing = graph.d_plus_a()
    graph_part = float(cfg.c * np.sum(mixing * (E @ E.T)))
    return 0.5 * (diag_part + graph_part)
