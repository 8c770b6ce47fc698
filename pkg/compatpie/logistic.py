"""Grouped-binomial logistic regression by iteratively reweighted least squares."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import expit

from compatpie.config import IRLS_MAX_HALVINGS, IRLS_MAX_ITER, IRLS_TOL
from compatpie.errors import InvalidSpecError, NonConvergenceError, SeparatedDataError

logger = logging.getLogger(__name__)

SEPARATION_EPS = 1e-10


@dataclass(frozen=True)
class GroupedFit:
    coefficients: NDArray[np.float64]
    covariance: NDArray[np.float64]
    log_likelihood: float
    iterations: int
    converged: bool
    score_norm: float = 0.0

    def se(self, index: int) -> float:
        return math.sqrt(self.covariance[index, index])


def _log_likelihood(
    eta: NDArray[np.float64], cases: NDArray[np.float64], trials: NDArray[np.float64]
) -> float:
    return float(np.sum(cases * eta - trials * np.logaddexp(0.0, eta)))


def fit_grouped(
    design: ArrayLike,
    cases: ArrayLike,
    trials: ArrayLike,
    offset: ArrayLike | None = None,
    tol: float = IRLS_TOL,
    max_iter: int = IRLS_MAX_ITER,
) -> GroupedFit:
    """Maximise sum(y eta - n log(1 + exp(eta))) with eta = X b + offset.

    Rows are binomial groups; ``cases`` and ``trials`` may be fractional.
    Newton steps start from b = 0 and are halved while they lower the
    likelihood; iteration stops once the score vector has norm below ``tol``.
    """
    x = np.atleast_2d(np.asarray(design, dtype=np.float64))
    y = np.asarray(cases, dtype=np.float64)
    n = np.asarray(trials, dtype=np.float64)
    off = np.zeros(len(y)) if offset is None else np.asarray(offset, dtype=np.float64)
    if not (x.shape[0] == len(y) == len(n) == len(off)):
        raise InvalidSpecError("design, cases, trials and offset must have matching rows")
    if np.any(y < 0) or np.any(n < y):
        raise InvalidSpecError("cases must lie between 0 and trials")

    beta = np.zeros(x.shape[1])
    eta = x @ beta + off
    current = _log_likelihood(eta, y, n)
    on_edge = (y == 0) | (y == n)
    iteration = 0
    while True:
        p = expit(eta)
        mu = n * p
        score = x.T @ (y - mu)
        gradient = float(np.linalg.norm(score))
        if np.any(on_edge & ((p < SEPARATION_EPS) | (p > 1 - SEPARATION_EPS))):
            raise SeparatedDataError("fitted probabilities reached 0 or 1: the data are separated")
        if gradient < tol:
            break
        if iteration == max_iter:
            raise NonConvergenceError(
                f"IRLS did not converge in {max_iter} iterations (score norm {gradient:.3g})"
            )
        iteration += 1
        information = x.T @ ((mu * (1 - p))[:, None] * x)
        try:
            step = np.linalg.solve(information, score)
        except np.linalg.LinAlgError:
            raise SeparatedDataError("information matrix is singular")

        for _ in range(IRLS_MAX_HALVINGS):
            candidate = beta + step
            candidate_eta = x @ candidate + off
            value = _log_likelihood(candidate_eta, y, n)
            if value >= current - 1e-12 * abs(current):
                break
            step = step / 2
        if np.array_equal(candidate, beta):
            # rounding floor: the score cannot get any smaller
            logger.debug("IRLS stalled at score norm %.3g", gradient)
            break
        beta, eta, current = candidate, candidate_eta, value
        logger.debug(
            "IRLS iteration %d: loglik %.12g, score norm %.3g", iteration, current, gradient
        )

    p = expit(eta)
    information = x.T @ ((n * p * (1 - p))[:, None] * x)
    covariance = np.linalg.inv(information)
    return GroupedFit(beta, covariance, current, iteration, True, gradient)
