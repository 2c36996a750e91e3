"""Random samples in C_R, covering indices and the random frame matrix."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from relevant_sampling.core.blfunc import BandlimitedFunction, argmax_abs, values
from relevant_sampling.core.bounds import kappa
from relevant_sampling.core.exceptions import InvalidArgumentError
from relevant_sampling.core.prolate import TensorBasis, as_points, phi_matrix

# Above this many samples the Gram sum is accumulated in extended precision.
EXTENDED_PRECISION_THRESHOLD = 10_000
FRAME_CHUNK = 4096
PP_RELATIVE_SLACK = 1e-9
SEARCH_POINTS_1D = 401
SEARCH_POINTS_PER_AXIS = 41


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Points x_1..x_r in C_R = [-R/2, R/2]^d, one row per point.

    Points drawn by ``draw_uniform`` come from numpy's PCG64 generator seeded
    with ``seed``; any other construction records the seed it was given.
    """
    R: float
    d: int
    points: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        points = np.array(as_points(self.points, self.d), dtype=float)
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def r(self) -> int:
        return len(self.points)


@dataclass(frozen=True, eq=False)
class FrameMatrix:
    """G = (1/r) sum_j T_j, an N x N symmetric positive semidefinite matrix."""
    G: np.ndarray
    r: int
    tb: TensorBasis


def draw_uniform(R: float, d: int, r: int, seed: int) -> SampleSet:
    """r i.i.d. points uniform on C_R from a PCG64 generator seeded with ``seed``."""
    if r < 1:
        raise InvalidArgumentError(f"Sample count must be at least 1, got {r}")
    if R <= 0 or d < 1:
        raise InvalidArgumentError(f"Invalid cube C_R with R={R}, d={d}")
    rng = np.random.Generator(np.random.PCG64(seed))
    points = rng.uniform(-R / 2.0, R / 2.0, size=(r, d))
    return SampleSet(R=float(R), d=int(d), points=points, seed=seed)


def rank_one_T(tb: TensorBasis, x) -> np.ndarray:
    """T[k, l] = phi_k(x) phi_l(x) over the first N eigenfunctions."""
    v = phi_matrix(tb, as_points(x, tb.dim)[:1], tb.N)[0]
    return np.outer(v, v)


def frame_matrix(tb: TensorBasis, samples: SampleSet) -> FrameMatrix:
    """Average of the rank-one sample matrices, assembled as Phi^T Phi / r in chunks."""
    if samples.r == 0:
        raise InvalidArgumentError("Frame matrix needs at least one sample")
    dtype = np.longdouble if samples.r > EXTENDED_PRECISION_THRESHOLD else float
    total = np.zeros((tb.N, tb.N), dtype=dtype)
    for start in range(0, samples.r, FRAME_CHUNK):
        phi = phi_matrix(tb, samples.points[start:start + FRAME_CHUNK], tb.N).astype(dtype)
        total += phi.T @ phi
    G = np.asarray(total / samples.r, dtype=float)
    G = 0.5 * (G + G.T)
    G.setflags(write=False)
    return FrameMatrix(G=G, r=samples.r, tb=tb)


def deviation_lambda_min(fm: FrameMatrix) -> float:
    """Smallest eigenvalue of G - R^{-d} diag(lambda_1..lambda_N)."""
    deviation = fm.G - fm.tb.delta_matrix / fm.tb.volume
    return float(scipy.linalg.eigh(deviation, eigvals_only=True)[0])


def frame_lower_bound(fm: FrameMatrix) -> float:
    """r * lambda_min(G): the exact lower frame bound of the samples on P_N."""
    return fm.r * float(scipy.linalg.eigh(fm.G, eigvals_only=True)[0])


def covering_index(samples: SampleSet) -> int:
    """Largest number of points in one half-open cube k + [-1/2, 1/2)^d."""
    if samples.r == 0:
        return 0
    cells = np.floor(samples.points + 0.5).astype(np.int64)
    _, counts = np.unique(cells, axis=0, return_counts=True)
    return int(counts.max())


@dataclass(frozen=True)
class PPReport:
    """Sampled energy against N0 * e^{d pi} * ||f||^2."""
    lhs: float
    rhs: float
    N0: int
    ok: bool


def pp_check(f: BandlimitedFunction, samples: SampleSet, sampled: Optional[np.ndarray] = None) -> PPReport:
    """Check sum_j f(x_j)^2 <= N0 e^{d pi} ||f||_2^2.

    ``sampled`` may carry f already evaluated at the samples.
    """
    if sampled is None:
        sampled = values(f, samples.points)
    n0 = covering_index(samples)
    lhs = float(np.sum(np.asarray(sampled) ** 2))
    rhs = n0 * kappa(samples.d) * f.norm2
    return PPReport(lhs=lhs, rhs=rhs, N0=n0, ok=lhs <= rhs * (1.0 + PP_RELATIVE_SLACK))


def _search_grid(R: float, d: int) -> np.ndarray:
    per_axis = SEARCH_POINTS_1D if d == 1 else SEARCH_POINTS_PER_AXIS
    axis = np.linspace(-R / 2.0, R / 2.0, per_axis)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def clustered_samples(f: BandlimitedFunction, r: int, seed: int, width: float = 0.1) -> SampleSet:
    """Adversarial design: r points in a cube of side ``width`` around the maximum of |f| on C_R."""
    if r < 1:
        raise InvalidArgumentError(f"Sample count must be at least 1, got {r}")
    if not 0.0 < width <= 1.0:
        raise InvalidArgumentError(f"Cluster width must lie in (0, 1], got {width}")
    R, d = f.tb.R, f.tb.dim
    center = argmax_abs(f, _search_grid(R, d))
    rng = np.random.Generator(np.random.PCG64(seed))
    points = center + rng.uniform(-width / 2.0, width / 2.0, size=(r, d))
    points = np.clip(points, -R / 2.0, R / 2.0)
    return SampleSet(R=float(R), d=int(d), points=points, seed=seed)
