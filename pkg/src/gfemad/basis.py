"""Linear shape functions, exponential enrichments and the enriched element basis.

The enriched approximation on an element with nodes i and enriched subset J is

    u(x) = sum_i ubar_i N_i(x) + sum_{j in J} u'_j N_j(x) H(x)

with H evaluated in global physical coordinates.
"""

from dataclasses import dataclass, field

import numpy as np

from gfemad.errors import (
    AssemblyError,
    DomainError,
    InvalidArgumentError,
    OutOfDomainError,
    OverflowGuardError,
)

# Largest exponent allowed before exp() is considered to overflow.
EXP_LIMIT = 700.0
# Above this gamma the layer ratio is evaluated in its rescaled form.
STABLE_GAMMA = 30.0

_CORNERS_2D = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
_CORNERS_1D = np.array([[-1.0], [1.0]])

FAMILIES = ("none", "Ha", "Hb", "Hc", "Hb2", "GlobalLocalField")
_FAMILY_ALIASES = {
    "none": "none",
    "galerkin": "none",
    "ha": "Ha",
    "hb": "Hb",
    "hc": "Hc",
    "hb2": "Hb2",
    "globallocalfield": "GlobalLocalField",
    "global-local": "GlobalLocalField",
    "global_local": "GlobalLocalField",
    "gl": "GlobalLocalField",
}


def normalize_family(name):
    key = str(name).strip().lower()
    if key not in _FAMILY_ALIASES:
        raise InvalidArgumentError(f"unknown enrichment family {name!r}; expected one of {FAMILIES}")
    return _FAMILY_ALIASES[key]


def corner_coords(dim):
    return _CORNERS_1D if dim == 1 else _CORNERS_2D


# ---------------------------------------------------------------- shapes


def reference_shapes(xi):
    """Values (npts, n) and natural derivatives (npts, n, dim) at natural points xi (npts, dim)."""
    xi = np.atleast_2d(xi)
    dim = xi.shape[1]
    if dim == 1:
        s = xi[:, 0]
        N = np.column_stack([0.5 * (1 - s), 0.5 * (1 + s)])
        dN = np.empty((len(s), 2, 1))
        dN[:, 0, 0] = -0.5
        dN[:, 1, 0] = 0.5
        return N, dN
    c = _CORNERS_2D
    a = 1 + xi[:, None, 0] * c[None, :, 0]
    b = 1 + xi[:, None, 1] * c[None, :, 1]
    N = 0.25 * a * b
    dN = np.stack([0.25 * c[None, :, 0] * b, 0.25 * a * c[None, :, 1]], axis=2)
    return N, dN


def _natural_coords(coords, points, tol=1e-9):
    """Invert the isoparametric map; coords (npts, n, dim), points (npts, dim)."""
    dim = points.shape[1]
    if dim == 1:
        x0 = coords[:, 0, 0]
        x1 = coords[:, 1, 0]
        xi = ((2 * points[:, 0] - (x0 + x1)) / (x1 - x0))[:, None]
    else:
        xi = np.zeros_like(points)
        for _ in range(25):
            N, dN = reference_shapes(xi)
            X = np.einsum("pk,pkb->pb", N, coords)
            J = np.einsum("pka,pkb->pab", dN, coords)
            step = np.linalg.solve(np.transpose(J, (0, 2, 1)), (X - points)[..., None])[..., 0]
            xi = xi - step
            if np.max(np.abs(step), initial=0.0) < 1e-14:
                break
    if np.any(np.abs(xi) > 1 + tol):
        raise OutOfDomainError("point lies outside its element")
    return np.clip(xi, -1.0, 1.0)


def _map(coords, xi):
    """Shapes, physical gradients, det J and physical points for one element."""
    N, dN = reference_shapes(xi)
    J = np.einsum("qka,kb->qab", dN, coords)
    det = np.linalg.det(J)
    if np.any(det <= 0):
        raise AssemblyError("element has non-positive Jacobian")
    invJ = np.linalg.inv(J)
    grad = np.einsum("qba,qka->qkb", invJ, dN)
    return N, grad, det, N @ coords


def shape_values(element, x):
    """Standard linear shape values and physical gradients at physical points x.

    element is the (n, dim) array of node coordinates (2 for a segment,
    4 counterclockwise for a quad).  Returns (values (npts, n), gradients (npts, n, dim)).
    """
    coords = np.asarray(element, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    dim = coords.shape[1]
    pts = np.asarray(x, dtype=float).reshape(-1, dim)
    xi = _natural_coords(np.broadcast_to(coords, (len(pts),) + coords.shape), pts)
    N, grad, _, _ = _map(coords, xi)
    return N, grad


# ----------------------------------------------------------- enrichment


def layer_ratio(t, gamma):
    """(1 - e^{gamma t}) / (1 - e^{gamma}) and its t-derivative, overflow-free."""
    t = np.asarray(t, dtype=float)
    if gamma > STABLE_GAMMA:
        scale = np.exp(gamma * (t - 1.0))
        r = scale * np.expm1(-gamma * t) / np.expm1(-gamma)
        dr = gamma * scale / -np.expm1(-gamma)
    else:
        r = np.expm1(gamma * t) / np.expm1(gamma)
        dr = gamma * np.exp(gamma * t) / np.expm1(gamma)
    return r, dr


def hb_profile(t, gamma):
    """H_b(t) = 1 - (1 - e^{gamma t})/(1 - e^{gamma}) with derivative."""
    r, dr = layer_ratio(t, gamma)
    return 1.0 - r, -dr


@dataclass(frozen=True)
class EnrichmentSpec:
    """Enrichment family, its parameter and the enriched node set J.

    axis selects the coordinate used by the one-dimensional families
    (Ha, Hb, Hc) on 2D meshes.  carrier_field is the previous solution for
    the GlobalLocalField family.
    """

    family: str = "none"
    gamma: float = None
    enriched_nodes: frozenset = frozenset()
    carrier_field: object = None
    axis: int = 0

    def __post_init__(self):
        fam = normalize_family(self.family)
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "enriched_nodes", frozenset(int(i) for i in self.enriched_nodes))
        if fam == "none":
            object.__setattr__(self, "enriched_nodes", frozenset())
            return
        if fam == "GlobalLocalField":
            if self.carrier_field is None:
                raise InvalidArgumentError("GlobalLocalField enrichment needs a carrier field")
            return
        g = self.gamma
        if g is None or not np.isfinite(g):
            hint = "; use the Hc family instead" if fam in ("Hb", "Hb2") else ""
            raise OverflowGuardError(f"{fam} needs a finite gamma, got {g!r}{hint}")
        if fam in ("Hb", "Hb2") and g <= 0:
            raise OverflowGuardError(
                f"H_b is undefined for gamma={g!r} (0/0 at gamma=0); use the Hc family instead"
            )
        if fam == "Hc" and g < 0:
            raise DomainError("H_c needs gamma >= 0")

    @classmethod
    def none(cls):
        return cls("none")

    @property
    def is_enriched(self):
        return self.family != "none" and bool(self.enriched_nodes)


def eval_enrichment(spec, x, elements=None):
    """Enrichment value H (npts,) and gradient (npts, dim) at physical points x.

    elements, when given, are the host elements of x on the carrier's mesh
    (GlobalLocalField only) and spare a point location.
    """
    fam = spec.family
    if fam == "GlobalLocalField":
        field_ = spec.carrier_field
        pts = np.asarray(x, dtype=float).reshape(-1, field_.mesh.dim)
        H, gH = field_.value_and_gradient(pts, elements)
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(gH))):
            raise OverflowGuardError("global-local enrichment produced non-finite values")
        return H, gH
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    dim = pts.shape[1]
    H = np.ones(len(pts))
    gH = np.zeros((len(pts), dim))
    g = spec.gamma
    if fam == "none":
        return H, gH
    if fam == "Hb2":
        hs, ds = zip(*(hb_profile(pts[:, d], g) for d in range(dim)))
        H = np.prod(hs, axis=0)
        for d in range(dim):
            others = np.prod([hs[k] for k in range(dim) if k != d], axis=0) if dim > 1 else 1.0
            gH[:, d] = ds[d] * others
        return H, gH
    t = pts[:, spec.axis]
    if fam == "Ha":
        if np.max(g * t) > EXP_LIMIT:
            raise OverflowGuardError(f"H_a = exp({g}*x) overflows here; use the Hb or Hc family")
        H = np.exp(g * t)
        gH[:, spec.axis] = g * H
    elif fam == "Hb":
        H, d = hb_profile(t, g)
        gH[:, spec.axis] = d
    elif fam == "Hc":
        H, d = _hc_profile(t, g)
        gH[:, spec.axis] = d
    return H, gH


def _hc_profile(t, gamma):
    if float(gamma).is_integer():
        n = int(gamma)
        if n == 0:
            return np.zeros_like(t), np.zeros_like(t)
        return 1.0 - t**n, -n * t ** (n - 1)
    if np.any(t < 0):
        raise DomainError("H_c = 1 - x^gamma with non-integer gamma is undefined for x < 0")
    pos = t > 0
    H = np.ones_like(t)
    d = np.zeros_like(t)
    lt = np.log(t[pos])
    H[pos] = 1.0 - np.exp(gamma * lt)
    d[pos] = -gamma * np.exp((gamma - 1) * lt)
    if gamma < 1:
        d[~pos] = -np.inf
    return H, d


# --------------------------------------------------------------- dofs


@dataclass(frozen=True)
class DofMap:
    """Standard DOF of node i is i; enriched DOFs follow, in node order."""

    n_nodes: int
    enriched_nodes: tuple
    enriched_dof: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "enriched_nodes", tuple(sorted(int(i) for i in self.enriched_nodes)))
        object.__setattr__(
            self, "enriched_dof", {j: self.n_nodes + k for k, j in enumerate(self.enriched_nodes)}
        )

    @classmethod
    def for_mesh(cls, mesh, spec):
        return cls(mesh.n_nodes, tuple(spec.enriched_nodes) if spec.family != "none" else ())

    @property
    def total(self):
        return self.n_nodes + len(self.enriched_nodes)

    def standard_dof(self, node):
        return int(node)

    def element_dofs(self, conn):
        """Global DOFs of an element's basis entries and the local indices of enriched nodes."""
        local = [k for k, i in enumerate(conn) if int(i) in self.enriched_dof]
        dofs = [int(i) for i in conn] + [self.enriched_dof[int(conn[k])] for k in local]
        return np.array(dofs, dtype=int), local


@dataclass
class ElementBasis:
    values: np.ndarray  # (npts, nb)
    gradients: np.ndarray  # (npts, nb, dim)
    dof_map: np.ndarray  # (nb,)
    points: np.ndarray = None  # physical points (npts, dim)
    det: np.ndarray = None  # Jacobian determinants (npts,)
    n_standard: int = 0


def element_basis_natural(mesh, spec, e, xi, dofmap=None):
    """Enriched basis of element e at natural points xi."""
    if dofmap is None:
        dofmap = DofMap.for_mesh(mesh, spec)
    coords = mesh.element_coords(e)
    try:
        N, grad, det, X = _map(coords, np.atleast_2d(xi))
    except AssemblyError as exc:
        raise AssemblyError(f"element {e}: {exc}") from None
    conn = mesh.elements[e]
    dofs, local = dofmap.element_dofs(conn)
    if local:
        H, gH = eval_enrichment(spec, X, np.full(len(X), e))
        Ne = N[:, local]
        values = np.hstack([N, Ne * H[:, None]])
        genr = grad[:, local, :] * H[:, None, None] + Ne[:, :, None] * gH[:, None, :]
        gradients = np.concatenate([grad, genr], axis=1)
    else:
        values, gradients = N, grad
    return ElementBasis(values, gradients, dofs, X, det, n_standard=N.shape[1])


def element_basis(mesh, spec, element, x, dofmap=None):
    """Enriched basis row [N_1..N_n, H N_j (j in J)] at physical points x in the element."""
    coords = mesh.element_coords(element)
    pts = np.asarray(x, dtype=float).reshape(-1, mesh.dim)
    xi = _natural_coords(np.broadcast_to(coords, (len(pts),) + coords.shape), pts)
    return element_basis_natural(mesh, spec, element, xi, dofmap)


# ------------------------------------------------------------ solution


@dataclass(frozen=True, eq=False)
class SolutionField:
    """Coefficients ubar (one per node) and uprime (one per enriched node, ascending node order)."""

    mesh: object
    enrichment: EnrichmentSpec
    ubar: np.ndarray
    uprime: np.ndarray

    def __post_init__(self):
        ubar = np.asarray(self.ubar, dtype=float)
        uprime = np.asarray(self.uprime, dtype=float).reshape(-1)
        n_enr = len(self.enrichment.enriched_nodes) if self.enrichment.family != "none" else 0
        if ubar.shape != (self.mesh.n_nodes,) or uprime.shape != (n_enr,):
            raise InvalidArgumentError("coefficient lengths do not match the DOF map")
        if not (np.all(np.isfinite(ubar)) and np.all(np.isfinite(uprime))):
            raise InvalidArgumentError("solution coefficients must be finite")
        ubar.setflags(write=False)
        uprime.setflags(write=False)
        object.__setattr__(self, "ubar", ubar)
        object.__setattr__(self, "uprime", uprime)

    @property
    def dofmap(self):
        return DofMap.for_mesh(self.mesh, self.enrichment)

    def coefficients(self):
        return np.concatenate([self.ubar, self.uprime])

    def _enriched_coeffs(self):
        full = np.zeros(self.mesh.n_nodes)
        flag = np.zeros(self.mesh.n_nodes, dtype=bool)
        nodes = list(self.dofmap.enriched_nodes)
        full[nodes] = self.uprime
        flag[nodes] = True
        return full, flag

    def value_and_gradient(self, points, elements=None):
        mesh = self.mesh
        P = np.asarray(points, dtype=float).reshape(-1, mesh.dim)
        if elements is None:
            E = mesh.locate(P)
        else:
            E = np.broadcast_to(np.asarray(elements, dtype=int), (len(P),))
        conn = mesh.elements[E]
        coords = mesh.nodes[conn]
        xi = _natural_coords(coords, P)
        N, dN = reference_shapes(xi)
        J = np.einsum("pka,pkb->pab", dN, coords)
        grad = np.einsum("pba,pka->pkb", np.linalg.inv(J), dN)
        ub = self.ubar[conn]
        u = np.einsum("pk,pk->p", N, ub)
        g = np.einsum("pkb,pk->pb", grad, ub)
        if self.uprime.size:
            full, flag = self._enriched_coeffs()
            mask = flag[conn].any(axis=1)
            if mask.any():
                H, gH = eval_enrichment(self.enrichment, P[mask], E[mask])
                up = full[conn[mask]]
                s = np.einsum("pk,pk->p", N[mask], up)
                sg = np.einsum("pkb,pk->pb", grad[mask], up)
                u[mask] += s * H
                g[mask] += sg * H[:, None] + s[:, None] * gH
        return u, g

    def __call__(self, points, elements=None):
        return self.value_and_gradient(points, elements)[0]

    def nodal_values(self):
        """u evaluated at the nodes (differs from ubar at enriched nodes)."""
        E = np.empty(self.mesh.n_nodes, dtype=int)
        for e, c in enumerate(self.mesh.elements):
            E[c] = e
        return self(self.mesh.nodes, E)


def evaluate_solution(field_, x):
    """u(x) from the enriched expansion; raises OutOfDomainError outside the mesh."""
    return field_(np.asarray(x, dtype=float).reshape(-1, field_.mesh.dim))
