"""Band-limited functions as finite coefficient vectors over the prolate eigenbasis."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from relevant_sampling.core.exceptions import InfeasibleTargetError, InvalidArgumentError
from relevant_sampling.core.prolate import TensorBasis, as_points, phi_matrix

# Relative slack for comparisons that are exact in real arithmetic.
ROUNDING_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class BandlimitedFunction:
    """f = sum_j c_j phi_j over the first M tensor eigenfunctions.

    Norms and concentration are exact functions of the coefficients: the
    eigenfunctions are orthonormal on R^d and sum_j lambda_j c_j^2 is the
    energy inside C_R.
    """
    tb: TensorBasis
    coeffs: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim != 1:
            raise InvalidArgumentError("Coefficients must be a flat vector")
        if not self.tb.N <= len(coeffs) <= self.tb.count:
            raise InvalidArgumentError(
                f"Coefficient count {len(coeffs)} outside [N={self.tb.N}, {self.tb.count}]"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def M(self) -> int:
        return len(self.coeffs)

    @property
    def norm2(self) -> float:
        """||f||_2^2."""
        return float(np.dot(self.coeffs, self.coeffs))

    @property
    def local_norm2(self) -> float:
        """Energy inside C_R, sum_j lambda_j c_j^2."""
        return float(np.dot(self.tb.lam[: self.M], self.coeffs**2))

    @property
    def concentration(self) -> float:
        norm2 = self.norm2
        return self.local_norm2 / norm2 if norm2 > 0 else 1.0

    @property
    def delta(self) -> float:
        """delta_f = 1 - concentration; 0 for the zero function."""
        return 1.0 - self.concentration


def default_m(tb: TensorBasis) -> int:
    """Coefficient count used when none is given: min(2N, retained products)."""
    return min(2 * tb.N, tb.count)


def _delta_of(coeffs: np.ndarray, lam: np.ndarray) -> float:
    norm2 = float(np.dot(coeffs, coeffs))
    return 1.0 - float(np.dot(lam, coeffs**2)) / norm2 if norm2 > 0 else 0.0


def _largest_scale(fixed, lam_fixed, scaled, lam_scaled, target: float) -> float:
    """Largest s with delta(fixed + s * scaled) <= target; 1 when any s works."""
    if len(scaled) == 0:
        return 1.0
    keep = 1.0 - target
    p = float(np.dot(lam_fixed, fixed**2)) - keep * float(np.dot(fixed, fixed))
    q = keep * float(np.dot(scaled, scaled)) - float(np.dot(lam_scaled, scaled**2))
    if q <= 0.0:
        return 1.0
    return math.sqrt(max(p, 0.0) / q) * (1.0 - 1e-9)


def synth_random(tb: TensorBasis, M: Optional[int], delta_target: float, seed: int) -> BandlimitedFunction:
    """Random member of B(R, delta_target) inside the span of the first M eigenfunctions.

    Head (j < N) and tail (N <= j < M) coefficients are standard normal draws
    from a PCG64 generator seeded with ``seed``. If the head alone is less
    concentrated than the target, its non-leading part is shrunk until its
    deficit sits midway between the minimum (1 - lambda_1) and the target.
    The tail is then scaled by the largest factor keeping delta_f <= target.

    Raises:
        InfeasibleTargetError: if delta_target < 1 - lambda_1
    """
    M = default_m(tb) if M is None else M
    if not tb.N <= M <= tb.count:
        raise InvalidArgumentError(f"M={M} outside [N={tb.N}, {tb.count}]")
    if not 0.0 < delta_target < 1.0:
        raise InvalidArgumentError(f"delta_target must lie in (0, 1), got {delta_target}")

    lam = np.asarray(tb.lam[:M])
    min_delta = 1.0 - float(lam[0])
    if delta_target < min_delta:
        raise InfeasibleTargetError(
            f"delta_target={delta_target:g} is below the minimum achievable {min_delta:.6g}",
            min_delta=min_delta,
        )

    rng = np.random.Generator(np.random.PCG64(seed))
    head = rng.standard_normal(tb.N)
    tail = rng.standard_normal(M - tb.N)
    if head[0] == 0.0:
        head[0] = 1.0

    if _delta_of(head, lam[: tb.N]) > delta_target:
        goal = 0.5 * (min_delta + delta_target)
        head[1:] *= _largest_scale(head[:1], lam[:1], head[1:], lam[1: tb.N], goal)

    scale = _largest_scale(head, lam[: tb.N], tail, lam[tb.N:], delta_target)
    coeffs = np.concatenate([head, scale * tail])
    while _delta_of(coeffs, lam) > delta_target and scale > 0.0:
        scale *= 0.5
        coeffs = np.concatenate([head, scale * tail])

    # at delta_target == 1 - lambda_1 only multiples of phi_1 qualify; rounding can push the mix above
    if _delta_of(coeffs, lam) > delta_target:
        coeffs = np.zeros(M)
        coeffs[0] = math.copysign(1.0, head[0])

    return BandlimitedFunction(tb=tb, coeffs=coeffs, seed=seed)


def values(f: BandlimitedFunction, points) -> np.ndarray:
    """f evaluated at every point, shape (n_points,)."""
    return phi_matrix(f.tb, points, f.M) @ f.coeffs


def evaluate(f: BandlimitedFunction, x) -> float:
    """f(x) at a single point."""
    return float(values(f, as_points(x, f.tb.dim)[:1])[0])


def project_E(f: BandlimitedFunction) -> BandlimitedFunction:
    """Orthogonal projection onto P_N."""
    coeffs = np.array(f.coeffs)
    coeffs[f.tb.N:] = 0.0
    return BandlimitedFunction(tb=f.tb, coeffs=coeffs, seed=f.seed)


def project_F(f: BandlimitedFunction) -> BandlimitedFunction:
    """Complementary projection I - E."""
    coeffs = np.array(f.coeffs)
    coeffs[: f.tb.N] = 0.0
    return BandlimitedFunction(tb=f.tb, coeffs=coeffs, seed=f.seed)


def inner(f: BandlimitedFunction, g: BandlimitedFunction) -> float:
    """<f, g> over the common span."""
    n = min(f.M, g.M)
    return float(np.dot(f.coeffs[:n], g.coeffs[:n]))


@dataclass(frozen=True)
class QestimReport:
    """Both sides of the three projection estimates for one f."""
    delta: float
    alpha: float
    vacuous: bool
    ef_norm2: float
    ef_lower: float
    ef_local_norm2: float
    ef_local_lower: float
    ff_norm2: float
    ff_upper: float
    ef_ok: bool
    ef_local_ok: bool
    ff_ok: bool

    @property
    def ok(self) -> bool:
        return self.ef_ok and self.ef_local_ok and self.ff_ok


def qestim_check(f: BandlimitedFunction) -> QestimReport:
    """Evaluate ||Ef||^2 >= (1 - delta/(1-alpha))||f||^2, its C_R analogue and ||Ff||^2 bound.

    When delta_f >= 1 - alpha the bounds are vacuous; the report says so and
    the booleans still hold.
    """
    delta = f.delta
    alpha = f.tb.alpha
    norm2 = f.norm2
    vacuous = delta >= 1.0 - alpha
    ratio = delta / (1.0 - alpha) if alpha < 1.0 else math.inf
    ef, ff = project_E(f), project_F(f)
    slack = ROUNDING_SLACK * max(norm2, 1.0)

    ef_lower = (1.0 - ratio) * norm2
    ef_local_lower = alpha * (1.0 - ratio) * norm2
    ff_upper = ratio * norm2

    return QestimReport(
        delta=delta,
        alpha=alpha,
        vacuous=vacuous,
        ef_norm2=ef.norm2,
        ef_lower=ef_lower,
        ef_local_norm2=ef.local_norm2,
        ef_local_lower=ef_local_lower,
        ff_norm2=ff.norm2,
        ff_upper=ff_upper,
        ef_ok=ef.norm2 >= ef_lower - slack,
        ef_local_ok=ef.local_norm2 >= ef_local_lower - slack,
        ff_ok=ff.norm2 <= ff_upper + slack,
    )


def sinc_kernel(x, y) -> float:
    """Reproducing kernel of B: prod_i sin(pi (x_i - y_i)) / (pi (x_i - y_i))."""
    diff = np.atleast_1d(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return float(np.prod(np.sinc(diff)))


def argmax_abs(f: BandlimitedFunction, points) -> np.ndarray:
    """The point among ``points`` where |f| is largest."""
    points = as_points(points, f.tb.dim)
    return points[int(np.argmax(np.abs(values(f, points))))].copy()
