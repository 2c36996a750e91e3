"""Least-squares recovery of the P_N component and non-uniqueness from samples."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from relevant_sampling.core.blfunc import BandlimitedFunction, values
from relevant_sampling.core.bounds import kappa
from relevant_sampling.core.exceptions import InvalidArgumentError
from relevant_sampling.core.prolate import TensorBasis, phi_matrix
from relevant_sampling.core.sampling import SampleSet, covering_index

RANK_TOL = 1e-10
NULL_TOL = 1e-8
RESIDUAL_SLACK = 1e-12


def least_squares(tb: TensorBasis, samples: SampleSet, sampled_values, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Coefficients p_opt in P_N minimizing sum_j (value_j - p(x_j))^2.

    Solved through a column-pivoted QR factorization of the design matrix
    Phi[j, k] = phi_k(x_j). When the numerical rank falls below N (relative
    tolerance ``rank_tol``) the minimum-norm minimizer from an SVD solve is
    returned instead.

    Raises:
        InvalidArgumentError: if the sample and value counts differ
    """
    y = np.asarray(sampled_values, dtype=float).ravel()
    if samples.r < 1:
        raise InvalidArgumentError("At least one sample is required")
    if len(y) != samples.r:
        raise InvalidArgumentError(f"Got {len(y)} values for {samples.r} samples")

    phi = phi_matrix(tb, samples.points, tb.N)
    if samples.r >= tb.N:
        q, r_factor, perm = scipy.linalg.qr(phi, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r_factor))
        if diag[0] == 0.0:
            return np.zeros(tb.N)
        if int(np.sum(diag > rank_tol * diag[0])) == tb.N:
            z = scipy.linalg.solve_triangular(r_factor, q.T @ y)
            coeffs = np.empty(tb.N)
            coeffs[perm] = z
            return coeffs

    coeffs, *_ = scipy.linalg.lstsq(phi, y, cond=rank_tol)
    return coeffs


@dataclass(frozen=True, eq=False)
class ApproxrecReport:
    """Sampled residual of the least-squares fit against N0 kappa delta/(1-alpha) ||f||^2."""
    residual: float
    bound: float
    ok: bool
    N0: int
    coeffs: np.ndarray
    vacuous: bool


def approxrec_check(
    f: BandlimitedFunction,
    samples: SampleSet,
    sampled: Optional[np.ndarray] = None,
    rank_tol: float = RANK_TOL,
) -> ApproxrecReport:
    """Fit p_opt to f's samples and compare the residual with its deterministic bound."""
    tb = f.tb
    if sampled is None:
        sampled = values(f, samples.points)
    sampled = np.asarray(sampled, dtype=float)
    coeffs = least_squares(tb, samples, sampled, rank_tol=rank_tol)
    fitted = phi_matrix(tb, samples.points, tb.N) @ coeffs
    residual = float(np.sum((sampled - fitted) ** 2))

    n0 = covering_index(samples)
    alpha = tb.alpha
    delta = f.delta
    bound = n0 * kappa(tb.dim) * delta / (1.0 - alpha) * f.norm2 if alpha < 1.0 else math.inf
    slack = RESIDUAL_SLACK * max(float(np.sum(sampled**2)), f.norm2, 1e-300)
    return ApproxrecReport(
        residual=residual,
        bound=bound,
        ok=residual <= bound + slack,
        N0=n0,
        coeffs=coeffs,
        vacuous=delta >= 1.0 - alpha,
    )


def null_perturbation(tb: TensorBasis, M: int, samples: SampleSet, tol: float = RANK_TOL) -> Optional[BandlimitedFunction]:
    """Non-zero g in the span of the first M eigenfunctions vanishing at every sample.

    Returns None when the sampled evaluation map is numerically injective.
    """
    if not tb.N <= M <= tb.count:
        raise InvalidArgumentError(f"M={M} outside [N={tb.N}, {tb.count}]")
    phi = phi_matrix(tb, samples.points, M)
    null = scipy.linalg.null_space(phi, rcond=tol)
    if null.shape[1] == 0:
        return None

    g = null[:, -1]
    pivot = int(np.argmax(np.abs(g) >= (1.0 - 1e-8) * np.max(np.abs(g))))
    if g[pivot] < 0:
        g = -g
    if np.max(np.abs(phi @ g)) > NULL_TOL * np.linalg.norm(g):
        return None
    return BandlimitedFunction(tb=tb, coeffs=g)


def perturbation_budget(f: BandlimitedFunction, g: BandlimitedFunction, delta_target: float) -> float:
    """Largest eps >= 0 with delta_{f + t g} <= delta_target for all t in [0, eps].

    The concentration condition is a quadratic in eps, so the budget is its
    smallest positive root (inf when there is none).

    Raises:
        InvalidArgumentError: if f itself misses the target
    """
    m = max(f.M, g.M)
    lam = np.asarray(f.tb.lam[:m])
    c = np.zeros(m)
    c[: f.M] = f.coeffs
    h = np.zeros(m)
    h[: g.M] = g.coeffs
    keep = 1.0 - delta_target

    a0 = float(np.dot(lam, c * c)) - keep * float(np.dot(c, c))
    a1 = float(np.dot(lam, c * h)) - keep * float(np.dot(c, h))
    a2 = float(np.dot(lam, h * h)) - keep * float(np.dot(h, h))
    if a0 < 0:
        raise InvalidArgumentError(f"delta_f={f.delta:g} already exceeds the target {delta_target:g}")

    if a2 >= 0 and a1 >= 0:
        return math.inf
    if a2 == 0:
        return -a0 / (2.0 * a1) * (1.0 - 1e-9)
    disc = a1 * a1 - a0 * a2
    if disc < 0:
        return math.inf
    return (-a1 - math.sqrt(disc)) / a2 * (1.0 - 1e-9)
