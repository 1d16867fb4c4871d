"""Gauss-Legendre rules on the reference segment/square and the boundary trapezoid rule."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from gfemad.errors import InvalidArgumentError

MAX_GAUSS_POINTS = 100

# Points per axis used on elements carrying enriched nodes.  Unenriched
# elements get the 2-point (2x2) rule, exact for bilinear-times-bilinear.
ENRICHED_ORDER_1D = 100
ENRICHED_ORDER_2D = 30
STANDARD_ORDER = 2


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (npts, dim) natural coordinates
    weights: np.ndarray  # (npts,)

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.weights)


def _legendre_and_derivative(n, x):
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@lru_cache(maxsize=None)
def _gauss_legendre_1d(n):
    if n == 1:
        return np.array([0.0]), np.array([2.0])
    k = np.arange(1, n + 1)
    # Chebyshev-like initial guesses, descending order
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    x = x[::-1].copy()
    w = w[::-1].copy()
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_rule(n, dim=1):
    """n-point Gauss-Legendre rule on [-1, 1] (dim=1) or its n x n tensor product (dim=2)."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_GAUSS_POINTS:
        raise InvalidArgumentError(f"gauss rule order must be in 1..{MAX_GAUSS_POINTS}, got {n!r}")
    x, w = _gauss_legendre_1d(int(n))
    if dim == 1:
        return QuadratureRule(x[:, None], w.copy())
    if dim == 2:
        xi, eta = np.meshgrid(x, x, indexing="ij")
        pts = np.column_stack([xi.ravel(), eta.ravel()])
        return QuadratureRule(pts, np.outer(w, w).ravel())
    raise InvalidArgumentError(f"dim must be 1 or 2, got {dim!r}")


def trapezoid_boundary_rule(a, b):
    """Two-point trapezoid rule on the physical segment [a, b].

    Points are the endpoints themselves (physical coordinates) and each
    weight is half the segment length.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    length = float(np.linalg.norm(b - a))
    if not length > 0.0:
        raise InvalidArgumentError("degenerate boundary segment")
    return QuadratureRule(np.vstack([a, b]), np.array([0.5 * length, 0.5 * length]))


def element_rule(dim, enriched, enriched_order=None):
    """Rule used for an element's stiffness/load integrals."""
    if enriched:
        if enriched_order is None:
            enriched_order = ENRICHED_ORDER_1D if dim == 1 else ENRICHED_ORDER_2D
        return gauss_rule(enriched_order, dim)
    return gauss_rule(STANDARD_ORDER, dim)
