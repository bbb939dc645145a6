"""
Euclidean projection onto probability simplices and a projected-gradient
ascent loop with backtracking.
"""

import logging

import numpy as np

logger = logging.getLogger(__name__)


def project_rows(m):
    """
    Project every row of `m` onto the probability simplex.

    Sort-based method: for each row find the largest rho with
    u_rho - (sum_{i<=rho} u_i - 1)/rho > 0 and shift by that threshold.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    k = m.shape[1]
    u = -np.sort(-m, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    ind = np.arange(1, k + 1)
    cond = u - css / ind > 0
    rho = k - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(m.shape[0]), rho] / (rho + 1)
    return np.maximum(m - theta[:, None], 0.0)


def project_simplex(v):
    return project_rows(np.asarray(v, dtype=float)[None, :])[0]


def ascend(objective, gradient, start, project, max_iter, step=1.0, xtol=1e-12):
    """
    Maximise `objective` over the feasible set described by `project`.

    Args:
        objective: callable returning a float.
        gradient: callable returning an array shaped like the point.
        start: feasible starting point.
        project: Euclidean projection onto the feasible set.
        max_iter: iteration cap.
        step: initial step; halved until the objective does not decrease.

    Returns:
        (point, value)
    """
    point = project(start)
    value = objective(point)
    for iteration in range(max_iter):
        grad = gradient(point)
        trial_step = step
        while True:
            candidate = project(point + trial_step * grad)
            candidate_value = objective(candidate)
            if candidate_value >= value or trial_step < 1e-14:
                break
            trial_step *= 0.5
        if candidate_value < value:
            break
        moved = np.max(np.abs(candidate - point))
        point, value = candidate, candidate_value
        step = min(trial_step * 2.0, 1e3)
        if moved < xtol:
            logger.debug(f"ascent converged after {iteration + 1} iterations")
            break
    return point, value
