"""Prolate spheroidal bases from a Nyström discretization of the time-frequency limiting operator.

The 1-D operator acts on the spectral interval [-1/2, 1/2] with kernel
sin(pi R (xi - eta)) / (pi (xi - eta)). Discretizing it with a Gauss-Legendre
rule and symmetrizing by the square roots of the weights gives a symmetric
matrix whose eigenvalues approximate mu_k(R) and whose eigenvectors hold the
weighted frequency samples of the prolate functions.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from numpy.polynomial import legendre

from relevant_sampling.core.exceptions import InvalidArgumentError

EIGEN_FLOOR = 1e-12
NEWTON_TOL = 1e-14
MAX_NEWTON_STEPS = 20
SYMMETRY_TOL = 1e-12
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
PHASE_GRID_POINTS = 201
REALNESS_GRID_POINTS = 801
REALNESS_TOL = 1e-8
EVAL_CHUNK = 8192


def _readonly(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on [-1/2, 1/2]."""
    order: int
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True, eq=False)
class ProlateBasis1D:
    """Retained eigenpairs of the discretized 1-D limiting operator.

    Attributes:
        bandwidth_R: interval length R of the time cube
        quad: quadrature rule the operator was discretized with
        mu: eigenvalues above the floor whose eigenfunctions are real after
            the phase fix, strictly decreasing
        eigvecs: column k holds sqrt(w_i) * phi_hat_k(xi_i)
        phases: global phase removed from each eigenfunction on evaluation
        trace: sum of all computed eigenvalues (approximately R)
    """
    bandwidth_R: float
    quad: QuadratureRule
    mu: np.ndarray
    eigvecs: np.ndarray
    phases: np.ndarray
    trace: float

    @property
    def count(self) -> int:
        return len(self.mu)


@dataclass(frozen=True, eq=False)
class TensorBasis:
    """d-fold tensor products of a 1-D basis, sorted by product eigenvalue.

    All products above the eigenvalue floor are retained (``count`` of them);
    the first ``N`` span P_N.
    """
    dim: int
    base: ProlateBasis1D
    multi_indices: np.ndarray
    lam: np.ndarray
    N: int

    @property
    def count(self) -> int:
        return len(self.lam)

    @property
    def alpha(self) -> float:
        return float(self.lam[self.N - 1])

    @property
    def R(self) -> float:
        return self.base.bandwidth_R

    @property
    def volume(self) -> float:
        """R^d, the volume of the time cube C_R."""
        return self.base.bandwidth_R ** self.dim

    @property
    def delta_matrix(self) -> np.ndarray:
        """diag(lambda_1, ..., lambda_N)."""
        return np.diag(self.lam[: self.N])


def required_quad_order(R: float) -> int:
    """Smallest quadrature order accepted for bandwidth R."""
    return math.ceil(4 * R) + 30


def gauss_legendre(order: int) -> QuadratureRule:
    """Gauss-Legendre rule on [-1/2, 1/2].

    Roots are seeded from numpy's Legendre module and polished by Newton
    steps on P_order until the update falls below 1e-14.
    """
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)) or order < 1:
        raise InvalidArgumentError(f"Quadrature order must be a positive integer, got {order!r}")

    x, _ = legendre.leggauss(order)
    x = np.sort(x)
    p_n = legendre.Legendre.basis(order)
    dp_n = p_n.deriv()
    for _ in range(MAX_NEWTON_STEPS):
        step = p_n(x) / dp_n(x)
        x = x - step
        if np.max(np.abs(step)) < NEWTON_TOL:
            break

    # exact symmetry about 0
    x = 0.5 * (x - x[::-1])
    w = 2.0 / ((1.0 - x**2) * dp_n(x) ** 2)
    w = 0.5 * (w + w[::-1])
    w = w / np.sum(w)

    return QuadratureRule(order=int(order), nodes=_readonly(x / 2.0), weights=_readonly(w))


def kernel_matrix(R: float, quad: QuadratureRule) -> np.ndarray:
    """Symmetrized Nyström matrix sqrt(w_i w_j) K(xi_i, xi_j) of the sinc kernel."""
    if R <= 0:
        raise InvalidArgumentError(f"Bandwidth R must be positive, got {R}")

    xi = quad.nodes
    sqrt_w = np.sqrt(quad.weights)
    # sin(pi R t) / (pi t) == R * sinc(R t), with the value R at t = 0
    kernel = R * np.sinc(R * (xi[:, None] - xi[None, :]))
    matrix = sqrt_w[:, None] * kernel * sqrt_w[None, :]
    np.fill_diagonal(matrix, R * quad.weights)
    return np.triu(matrix) + np.triu(matrix, 1).T


def _jacobi_eigh(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi rotations until the off-diagonal Frobenius norm is below 1e-12 ||M||."""
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v

    for _ in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(max(np.sum(a**2) - np.sum(np.diag(a) ** 2), 0.0))
        if off < JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q

    return np.diag(a).copy(), v


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the first near-largest-magnitude component of every column positive."""
    if vectors.size == 0:
        return vectors
    magnitude = np.abs(vectors)
    # first index within a relative 1e-8 of the column maximum; robust to parity ties
    near_max = magnitude >= (1.0 - 1e-8) * magnitude.max(axis=0)
    pivot = np.argmax(near_max, axis=0)
    signs = np.sign(vectors[pivot, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig(matrix, method: str = "lapack") -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix, eigenvalues descending.

    Args:
        matrix: square symmetric matrix
        method: "lapack" (scipy.linalg.eigh) or "jacobi" (cyclic Jacobi rotations)

    Returns:
        (eigenvalues, eigenvectors as columns), signs normalized

    Raises:
        InvalidArgumentError: if the matrix is not square and symmetric
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError(f"Expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and np.max(np.abs(m - m.T)) > SYMMETRY_TOL * scale:
        raise InvalidArgumentError("Matrix is not symmetric")

    if method == "lapack":
        values, vectors = scipy.linalg.eigh(m)
    elif method == "jacobi":
        values, vectors = _jacobi_eigh(m)
    else:
        raise InvalidArgumentError(f"Unknown eigensolver '{method}'")

    order = np.argsort(-values, kind="stable")
    return values[order], _fix_signs(vectors[:, order])


def _fourier_synthesis(quad: QuadratureRule, eigvecs: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """sum_i sqrt(w_i) v_ik exp(2 pi i x xi_i) for every x and column k."""
    weighted = np.sqrt(quad.weights)[:, None] * eigvecs
    out = np.empty((len(xs), eigvecs.shape[1]), dtype=complex)
    for start in range(0, len(xs), EVAL_CHUNK):
        chunk = xs[start:start + EVAL_CHUNK]
        out[start:start + len(chunk)] = np.exp(2j * np.pi * chunk[:, None] * quad.nodes[None, :]) @ weighted
    return out


def _global_phases(R: float, quad: QuadratureRule, eigvecs: np.ndarray) -> np.ndarray:
    grid = np.linspace(-R, R, PHASE_GRID_POINTS)
    values = _fourier_synthesis(quad, eigvecs, grid)
    modulus = np.abs(values)
    near_max = modulus >= (1.0 - 1e-8) * modulus.max(axis=0)
    pivot = np.argmax(near_max, axis=0)
    return np.angle(values[pivot, np.arange(values.shape[1])])


def _imaginary_residue(R: float, quad: QuadratureRule, eigvecs: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """max |Im phi_k| / max |phi_k| on [-2R, 2R] after removing the global phases."""
    grid = np.linspace(-2.0 * R, 2.0 * R, REALNESS_GRID_POINTS)
    values = _fourier_synthesis(quad, eigvecs, grid) * np.exp(-1j * phases)[None, :]
    sup = np.abs(values).max(axis=0)
    return np.abs(values.imag).max(axis=0) / np.where(sup > 0.0, sup, 1.0)


def build_basis_1d(
    R: float,
    order: Optional[int] = None,
    floor: float = EIGEN_FLOOR,
    method: str = "lapack",
) -> ProlateBasis1D:
    """Discretize A_R^(1), solve the eigenproblem and keep eigenpairs above the floor.

    Retention stops at the first eigenfunction whose imaginary residue after
    the phase fix reaches 1e-8 of its sup norm on [-2R, 2R].

    Args:
        R: bandwidth (length of the time interval), R >= 1
        order: quadrature order, at least ceil(4R) + 30 (defaults to that minimum)
        floor: eigenvalues below this are treated as discretization noise
        method: eigensolver passed to sym_eig

    Raises:
        InvalidArgumentError: if R < 1 or the order is below the rule
    """
    if R < 1:
        raise InvalidArgumentError(f"Bandwidth R must be at least 1, got {R}")
    minimum = required_quad_order(R)
    if order is None:
        order = minimum
    if order < minimum:
        raise InvalidArgumentError(
            f"Quadrature order {order} is too small for R={R}; required minimum is {minimum}"
        )

    quad = gauss_legendre(order)
    values, vectors = sym_eig(kernel_matrix(R, quad), method=method)
    count = int(np.sum(values >= floor))
    eigvecs = vectors[:, :count]
    phases = _global_phases(R, quad, eigvecs)

    # modes past the first one that stays complex are eigenvector noise
    noisy = np.flatnonzero(_imaginary_residue(R, quad, eigvecs, phases) >= REALNESS_TOL)
    if noisy.size:
        count = int(noisy[0])
        eigvecs, phases = eigvecs[:, :count], phases[:count]

    return ProlateBasis1D(
        bandwidth_R=float(R),
        quad=quad,
        mu=_readonly(values[:count]),
        eigvecs=_readonly(eigvecs),
        phases=_readonly(phases),
        trace=float(np.sum(values)),
    )


def phi_complex_1d(basis: ProlateBasis1D, xs, ks: Optional[Sequence[int]] = None) -> np.ndarray:
    """Phase-corrected complex values of the 1-D eigenfunctions; imaginary part is residue."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ks = np.arange(basis.count) if ks is None else np.asarray(ks, dtype=int)
    values = _fourier_synthesis(basis.quad, basis.eigvecs[:, ks], xs)
    return values * np.exp(-1j * basis.phases[ks])[None, :]


def phi_matrix_1d(basis: ProlateBasis1D, xs, ks: Optional[Sequence[int]] = None) -> np.ndarray:
    """Real eigenfunction values, one row per x and one column per index in ks."""
    return phi_complex_1d(basis, xs, ks).real


def eval_phi_1d(basis: ProlateBasis1D, k: int, x: float) -> float:
    """Value of the k-th prolate function (0-based) at x."""
    if not 0 <= k < basis.count:
        raise InvalidArgumentError(f"Eigenfunction index {k} out of range [0, {basis.count})")
    return float(phi_matrix_1d(basis, [x], [k])[0, 0])


def tensor_basis(base: ProlateBasis1D, d: int, N: int, floor: float = EIGEN_FLOOR) -> TensorBasis:
    """Tensor-product basis in dimension d truncated at N.

    Products are sorted by descending eigenvalue with lexicographic multi-index
    as tie-break. Each product is formed from its factors in sorted order so
    permuted multi-indices give bit-identical eigenvalues.

    Raises:
        InvalidArgumentError: if fewer than N products lie above the floor
    """
    if d < 1:
        raise InvalidArgumentError(f"Dimension must be at least 1, got {d}")
    if N < 1:
        raise InvalidArgumentError(f"Truncation level N must be at least 1, got {N}")

    mu = np.asarray(base.mu)
    k = len(mu)
    indices = np.arange(k)[:, None]
    values = mu.copy()
    for _ in range(d - 1):
        values_next = (values[:, None] * mu[None, :]).ravel()
        indices_next = np.concatenate(
            [np.repeat(indices, k, axis=0), np.tile(np.arange(k), len(indices))[:, None]], axis=1
        )
        keep = values_next >= floor
        values, indices = values_next[keep], indices_next[keep]

    keep = values >= floor
    indices = indices[keep]
    values = np.prod(np.sort(mu[indices], axis=1), axis=1)

    keys = [indices[:, i] for i in reversed(range(d))] + [-values]
    order = np.lexsort(keys)
    indices, values = indices[order], values[order]

    if N > len(values):
        raise InvalidArgumentError(
            f"Only {len(values)} product eigenvalues lie above the floor {floor:g}; "
            f"cannot truncate at N={N} (raise the quadrature order or lower N)"
        )

    return TensorBasis(
        dim=int(d),
        base=base,
        multi_indices=_readonly(indices, dtype=int),
        lam=_readonly(values),
        N=int(N),
    )


def as_points(x, d: int) -> np.ndarray:
    """Coerce a point or an array of points to shape (n, d)."""
    points = np.asarray(x, dtype=float)
    if points.ndim == 0:
        points = points.reshape(1, 1)
    elif points.ndim == 1:
        points = points.reshape(1, d) if len(points) == d else points.reshape(-1, 1)
    if points.shape[1] != d:
        raise InvalidArgumentError(f"Expected points of dimension {d}, got shape {points.shape}")
    return points


def phi_matrix(tb: TensorBasis, points, count: Optional[int] = None) -> np.ndarray:
    """Values of the first ``count`` tensor eigenfunctions, shape (n_points, count)."""
    count = tb.N if count is None else count
    if not 0 <= count <= tb.count:
        raise InvalidArgumentError(f"Requested {count} basis functions, only {tb.count} retained")
    points = as_points(points, tb.dim)
    values = np.ones((len(points), count))
    if count == 0:
        return values
    multi = tb.multi_indices[:count]
    for axis in range(tb.dim):
        needed = int(multi[:, axis].max()) + 1
        factors = phi_matrix_1d(tb.base, points[:, axis], np.arange(needed))
        values *= factors[:, multi[:, axis]]
    return values


def eval_phi_d(tb: TensorBasis, j: int, x) -> float:
    """Value of the j-th tensor eigenfunction at the point x."""
    if not 0 <= j < tb.count:
        raise InvalidArgumentError(f"Basis index {j} out of range [0, {tb.count})")
    point = as_points(x, tb.dim)
    value = 1.0
    for axis, k in enumerate(tb.multi_indices[j]):
        value *= eval_phi_1d(tb.base, int(k), point[0, axis])
    return value


def kernel_diag_m(tb: TensorBasis, x, n_terms: Optional[int] = None) -> float:
    """m(x) = sum of squares of the first N eigenfunctions at x."""
    n_terms = tb.N if n_terms is None else n_terms
    if n_terms == 0:
        return 0.0
    values = phi_matrix(tb, x, n_terms)
    return float(np.sum(values[0] ** 2))
