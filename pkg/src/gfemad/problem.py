"""Problem definition: advection field, diffusivity, source and boundary data."""

from dataclasses import dataclass, replace

import numpy as np

from gfemad.errors import InvalidArgumentError


def _couette(points):
    pts = np.atleast_2d(points)
    return np.column_stack([pts[:, 1], np.zeros(len(pts))])


# Named velocity profiles: name -> (dim, callable)
PROFILES = {
    "couette": (2, _couette),
}


@dataclass(frozen=True)
class ProblemSpec:
    """Steady problem  alpha . grad u - div(kappa grad u) = f.

    alpha is a constant vector (tuple) or the name of a profile in PROFILES.
    dirichlet and neumann are tuples of (boundary tag, value); when a node sits
    on two Dirichlet tags the first listed tag supplies its strong value.
    """

    lengths: tuple
    alpha: object
    kappa: float
    source: float = 1.0
    dirichlet: tuple = ()
    neumann: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))
        object.__setattr__(self, "dirichlet", tuple((str(t), float(v)) for t, v in self.dirichlet))
        object.__setattr__(self, "neumann", tuple((str(t), float(v)) for t, v in self.neumann))
        if not isinstance(self.alpha, str):
            object.__setattr__(self, "alpha", tuple(float(a) for a in np.atleast_1d(self.alpha)))
        self.validate()

    @property
    def dim(self):
        return len(self.lengths)

    def validate(self):
        if self.dim not in (1, 2):
            raise InvalidArgumentError("only 1D and 2D problems are supported")
        if not np.isfinite(self.kappa) or self.kappa <= 0:
            raise InvalidArgumentError("kappa must be positive")
        if any(L <= 0 for L in self.lengths):
            raise InvalidArgumentError("domain lengths must be positive")
        if isinstance(self.alpha, str):
            if self.alpha not in PROFILES:
                raise InvalidArgumentError(f"unknown velocity profile {self.alpha!r}; known: {sorted(PROFILES)}")
            if PROFILES[self.alpha][0] != self.dim:
                raise InvalidArgumentError(f"profile {self.alpha!r} is not {self.dim}D")
            if abs(self.divergence_check()) > 1e-10:
                raise InvalidArgumentError(f"profile {self.alpha!r} is not divergence-free")
        elif len(self.alpha) != self.dim:
            raise InvalidArgumentError("alpha must have one component per dimension")
        dtags = {t for t, _ in self.dirichlet}
        ntags = {t for t, _ in self.neumann}
        if dtags & ntags:
            raise InvalidArgumentError(f"tags on both Dirichlet and Neumann boundaries: {sorted(dtags & ntags)}")

    def velocity(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        if isinstance(self.alpha, str):
            return PROFILES[self.alpha][1](pts)
        return np.broadcast_to(np.asarray(self.alpha), pts.shape)

    def divergence_check(self, n=7, step=1e-6):
        """Largest |div alpha| over an n^d sample grid by central differences."""
        grids = [np.linspace(0.1, 0.9, n) * L for L in self.lengths]
        pts = np.array(np.meshgrid(*grids, indexing="ij")).reshape(self.dim, -1).T
        div = np.zeros(len(pts))
        for d in range(self.dim):
            e = np.zeros(self.dim)
            e[d] = step
            div += (self.velocity(pts + e)[:, d] - self.velocity(pts - e)[:, d]) / (2 * step)
        return float(np.max(np.abs(div)))

    def max_speed(self):
        if isinstance(self.alpha, str):
            grids = [np.linspace(0, L, 65) for L in self.lengths]
            pts = np.array(np.meshgrid(*grids, indexing="ij")).reshape(self.dim, -1).T
            return float(np.max(np.linalg.norm(self.velocity(pts), axis=1)))
        return float(np.linalg.norm(self.alpha))

    def with_kappa(self, kappa):
        return replace(self, kappa=float(kappa))
