"""Front-quality metrics for the normalized linear front.

All suite problems share the front connecting (0, 1) and (1, 0) and the
reference point (10, 10), so the best achievable hypervolume is known in
closed form and the distance to it (the hypervolume gap) serves as the
convergence measure.
"""

from __future__ import annotations

import numpy as np

from .moea import hypervolume_2d

REFERENCE_POINT = (10.0, 10.0)
FRONT_ENDPOINTS = ((0.0, 1.0), (1.0, 0.0))
# area of the reference box minus the triangle above the front
OPTIMAL_FRONT_HYPERVOLUME = 99.5


def optimal_mu_distribution(mu: int) -> np.ndarray:
    """Best placement of mu points on the linear front.

    Both endpoints are attained and the remaining mu - 2 points are equally
    spaced in between: row i is ((i-1)/(mu-1), 1 - (i-1)/(mu-1)).
    """
    if mu < 2:
        raise ValueError("mu must be at least 2")
    t = np.arange(mu) / (mu - 1)
    return np.column_stack((t, 1.0 - t))


def optimal_hypervolume(mu: int) -> float:
    """Hypervolume of the optimal mu-point set: 100 - 1/2 - 1/(2(mu-1))."""
    if mu < 2:
        raise ValueError("mu must be at least 2")
    return OPTIMAL_FRONT_HYPERVOLUME - 0.5 / (mu - 1)


def hypervolume_gap(points, mu: int, reference=REFERENCE_POINT) -> float:
    """Optimal mu-point hypervolume minus the hypervolume of ``points``.

    Nonnegative for any feasible population up to floating-point noise;
    loggers clamp at zero.
    """
    return optimal_hypervolume(mu) - hypervolume_2d(points, reference)
