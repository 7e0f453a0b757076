"""Zero-boundary discrete Gaussian free field on the grid ``(1/N) Z^2 ∩ [0,1]^2``.

Interior nodes are indexed ``(i, j)`` with ``1 <= i, j <= N - 1`` and sit at
``(i/N, j/N)``; array position ``[i-1, j-1]`` holds node ``(i, j)``. The
graph Laplacian ``L`` is the 5-point operator with zero Dirichlet data, and
the field has covariance exactly ``L^{-1}``, i.e. Gibbs weight
``exp(-H(f))`` with ``H(f) = 1/2 sum_{x~y} (f(x) - f(y))^2``.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.fft
import scipy.sparse as sp
from scipy.sparse.linalg import cg
from scipy.special import ndtr

from . import rng
from ._validation import check_positive_int, check_seed, is_power_of_two
from .exceptions import ConvergenceError, DomainError, InvalidConfigError

DENSE_MAX_N = 64
CG_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class LatticeField:
    n: int
    values: np.ndarray = dc_field(repr=False)
    seed: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.shape != (self.n - 1, self.n - 1):
            raise InvalidConfigError(
                f"values must have shape ({self.n - 1}, {self.n - 1}), got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def padded(self):
        """Values on the full ``(N+1) x (N+1)`` grid including the zero boundary."""
        return np.pad(self.values, 1)

    def energy(self):
        """``H(f) = 1/2 sum over unordered nearest-neighbour pairs of (f_x - f_y)^2``."""
        f = self.padded()
        return 0.5 * float(np.sum(np.diff(f, axis=0) ** 2) + np.sum(np.diff(f, axis=1) ** 2))

    def quadratic_energy(self):
        """``1/2 f^T L f`` with the interior Laplacian."""
        f = self.values.ravel()
        return 0.5 * float(f @ (laplacian_matrix(self.n - 1) @ f))


@dataclass(frozen=True, eq=False)
class LatticeGreens:
    n: int
    source: tuple
    values: np.ndarray = dc_field(repr=False)
    residual: float = 0.0


@dataclass(frozen=True, eq=False)
class HighPointReport:
    """Interior lattice points whose value reaches ``threshold``.

    ``points`` holds integer node indices ``(i, j)``; :attr:`coordinates`
    gives the positions ``(i/N, j/N)``.
    """

    a: float
    threshold: float
    points: np.ndarray = dc_field(repr=False)
    n: int = 0
    seed: int = 0

    @property
    def count(self):
        return int(len(self.points))

    @property
    def coordinates(self):
        return np.asarray(self.points, dtype=float) / self.n


def laplacian_matrix(nx, ny=None):
    """Sparse 5-point Dirichlet Laplacian on an ``nx x ny`` block of interior nodes."""
    ny = nx if ny is None else ny
    def second_difference(m):
        return sp.diags([-np.ones(m - 1), 2 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1])
    return (sp.kron(second_difference(nx), sp.identity(ny))
            + sp.kron(sp.identity(nx), second_difference(ny))).tocsr()


def eigenvalues(n):
    """``lambda_ij = 4 - 2 cos(pi i / N) - 2 cos(pi j / N)`` for ``1 <= i, j <= N-1``."""
    mu = 2 - 2 * np.cos(np.pi * np.arange(1, n) / n)
    return mu[:, None] + mu[None, :]


def sine_basis(n):
    """Orthonormal discrete sine matrix ``S[x-1, i-1] = sqrt(2/N) sin(pi x i / N)``."""
    k = np.arange(1, n)
    return math.sqrt(2.0 / n) * np.sin(np.pi * np.outer(k, k) / n)


def _check_n(n, minimum=4):
    return check_positive_int(n, "N", minimum=minimum)


def sample_dgff(n, seed, method="fast"):
    """Sample the DGFF with covariance ``L^{-1}``.

    Mode weights ``alpha_ij`` are keyed on ``(seed, i, j)``, so both methods
    return the same field up to rounding. ``fast`` uses a type-I discrete sine
    transform and needs ``N`` a power of two; ``dense`` applies the sine
    matrix explicitly and accepts any ``N <= 64``.
    """
    n = _check_n(n)
    seed = check_seed(seed)
    idx = np.arange(1, n, dtype=np.uint64)
    alpha = rng.keyed_normal(seed, rng.LATTICE, idx[:, None], idx[None, :])
    weights = alpha / np.sqrt(eigenvalues(n))
    if method == "fast":
        if not is_power_of_two(n):
            raise InvalidConfigError(f"the fast sampler needs N a power of two, got {n}")
        values = scipy.fft.dstn(weights, type=1, norm="ortho")
    elif method == "dense":
        if n > DENSE_MAX_N:
            raise InvalidConfigError(f"the dense sampler is limited to N <= {DENSE_MAX_N}, got {n}")
        s = sine_basis(n)
        values = s @ weights @ s.T
    else:
        raise InvalidConfigError(f"unknown method {method!r}; use 'fast' or 'dense'")
    return LatticeField(n=n, values=values, seed=seed)


def _check_node(n, node, name="source"):
    try:
        i, j = (int(v) for v in node)
    except (TypeError, ValueError):
        raise InvalidConfigError(f"{name} must be an integer pair, got {node!r}") from None
    if not (1 <= i <= n - 1 and 1 <= j <= n - 1):
        raise DomainError(f"{name} {(i, j)} is not an interior node of the N={n} grid")
    return i, j


def _solve(matrix, rhs):
    x, info = cg(matrix, rhs, rtol=0.0, atol=CG_ATOL, maxiter=20 * matrix.shape[0])
    residual = float(np.linalg.norm(matrix @ x - rhs))
    if info != 0 or residual > CG_ATOL * 10:
        raise ConvergenceError(f"conjugate gradient stopped with residual {residual:.3e} (info={info})")
    return x, residual


def lattice_greens(n, source):
    """Discrete Green's function ``G(source, .)`` solving ``L g = e_source`` by CG."""
    n = _check_n(n, minimum=2)
    i, j = _check_node(n, source)
    m = n - 1
    rhs = np.zeros(m * m)
    rhs[(i - 1) * m + (j - 1)] = 1.0
    g, residual = _solve(laplacian_matrix(m), rhs)
    return LatticeGreens(n=n, source=(i, j), values=g.reshape(m, m), residual=residual)


def lattice_variance(n, node):
    """``Var f(node) = G(node, node)`` via a Green's-function solve."""
    g = lattice_greens(n, node)
    i, j = g.source
    return float(g.values[i - 1, j - 1])


def _check_subbox(n, subbox):
    try:
        i0, i1, j0, j1 = (int(v) for v in subbox)
    except (TypeError, ValueError):
        raise InvalidConfigError(f"subbox must be (i0, i1, j0, j1), got {subbox!r}") from None
    if i0 > i1 or j0 > j1:
        raise InvalidConfigError(f"subbox {subbox} is empty")
    if i0 < 1 or j0 < 1 or i1 > n - 1 or j1 > n - 1:
        raise DomainError(f"subbox {subbox} reaches the boundary of the N={n} grid")
    return i0, i1, j0, j1


def markov_residual(n, subbox, sources=None, n_sources=4, seed=0):
    """Discrete harmonicity defect of ``G_U(., y) - G_W(., y)`` inside ``W``.

    ``U`` is the full interior, ``W`` the node block ``i0..i1 x j0..j1``
    (inclusive) and ``G_W`` is extended by zero outside ``W``. The difference
    is discrete-harmonic in ``W``, so applying ``L`` to it and reading off the
    ``W`` nodes gives zero up to solver tolerance. Returns the max abs value
    over all sources ``y`` (random nodes of ``W`` unless given).
    """
    n = _check_n(n, minimum=2)
    i0, i1, j0, j1 = _check_subbox(n, subbox)
    if sources is None:
        count = check_positive_int(n_sources, "n_sources")
        k = np.arange(count, dtype=np.uint64)
        ui = rng.keyed_uniform(seed, rng.MARKOV, 0, k)
        uj = rng.keyed_uniform(seed, rng.MARKOV, 1, k)
        sources = np.column_stack([i0 + np.floor(ui * (i1 - i0 + 1)),
                                   j0 + np.floor(uj * (j1 - j0 + 1))]).astype(int)
    m = n - 1
    wx, wy = i1 - i0 + 1, j1 - j0 + 1
    lap_u = laplacian_matrix(m)
    lap_w = laplacian_matrix(wx, wy)
    worst = 0.0
    for y in sources:
        yi, yj = _check_node(n, y)
        if not (i0 <= yi <= i1 and j0 <= yj <= j1):
            raise DomainError(f"source {(yi, yj)} lies outside the subbox {subbox}")
        g_u = lattice_greens(n, (yi, yj)).values
        rhs = np.zeros(wx * wy)
        rhs[(yi - i0) * wy + (yj - j0)] = 1.0
        g_w, _ = _solve(lap_w, rhs)
        diff = g_u.copy()
        diff[i0 - 1:i1, j0 - 1:j1] -= g_w.reshape(wx, wy)
        defect = (lap_u @ diff.ravel()).reshape(m, m)[i0 - 1:i1, j0 - 1:j1]
        worst = max(worst, float(np.max(np.abs(defect))))
    return worst


def high_point_threshold(n, a, threshold_coef=1 / math.sqrt(math.pi)):
    """``threshold_coef * sqrt(a) * log N``; the default coefficient gives ``sqrt(a/pi) log N``."""
    a = float(a)
    if not a >= 0:
        raise InvalidConfigError(f"a must be nonnegative, got {a}")
    return float(threshold_coef) * math.sqrt(a) * math.log(n)


def high_points(field, a, threshold_coef=1 / math.sqrt(math.pi)):
    """Interior nodes with ``f >= threshold`` (closed comparison)."""
    threshold = high_point_threshold(field.n, a, threshold_coef)
    pts = np.argwhere(field.values >= threshold) + 1
    return HighPointReport(a=float(a), threshold=threshold, points=pts, n=field.n, seed=field.seed)


def pointwise_variance(n):
    """Diagonal of ``L^{-1}`` on the interior grid, from the sine eigenbasis."""
    n = _check_n(n, minimum=2)
    s2 = sine_basis(n) ** 2
    return s2 @ (1.0 / eigenvalues(n)) @ s2.T


def expected_high_point_count(n, a, threshold_coef=1 / math.sqrt(math.pi)):
    """Exact ``E #{x : f(x) >= threshold}`` from the Gaussian marginals."""
    threshold = high_point_threshold(n, a, threshold_coef)
    sd = np.sqrt(pointwise_variance(n))
    return float(np.sum(ndtr(-threshold / sd)))
