"""Exact 1D solution, Peclet numbers, error metrics and the enrichment time scale tau."""

from dataclasses import dataclass

import numpy as np

from gfemad.basis import DofMap, element_basis_natural, layer_ratio
from gfemad.errors import DegenerateEnrichmentError, InvalidArgumentError
from gfemad.quadrature import ENRICHED_ORDER_1D, ENRICHED_ORDER_2D, gauss_rule

# differences smaller than this fraction of the profile range count as flat
FLAT_RTOL = 1e-8


def exact_1d(alpha, kappa, x):
    """u(x) = (x - (1 - e^{alpha x/kappa}) / (1 - e^{alpha/kappa})) / alpha on [0, 1].

    Solves alpha u' - kappa u'' = 1 with u(0) = u(1) = 0.
    """
    if not kappa > 0:
        raise InvalidArgumentError("kappa must be positive")
    x = np.asarray(x, dtype=float)
    if alpha == 0:
        return x * (1 - x) / (2 * kappa)
    r, _ = layer_ratio(x, alpha / kappa)
    return (x - r) / alpha


def exact_1d_callable(alpha, kappa):
    def u(points):
        return exact_1d(alpha, kappa, np.asarray(points, dtype=float).reshape(-1))

    return u


def element_peclet(alpha, h, kappa):
    """Pe^h = |alpha| h / (2 kappa)."""
    if not kappa > 0:
        raise InvalidArgumentError("kappa must be positive")
    if not h > 0:
        raise InvalidArgumentError("h must be positive")
    return float(np.linalg.norm(np.atleast_1d(alpha))) * h / (2.0 * kappa)


def kappa_for_peclet(speed, h, pe):
    return speed * h / (2.0 * pe)


def sign_changes(values, rtol=FLAT_RTOL):
    """Sign alternations in successive differences, ignoring near-flat steps."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return 0
    d = np.diff(v)
    span = float(np.ptp(v))
    d = d[np.abs(d) > rtol * max(span, np.finfo(float).tiny)]
    s = np.sign(d)
    return int(np.count_nonzero(s[1:] != s[:-1]))


def total_variation(values):
    return float(np.sum(np.abs(np.diff(np.asarray(values, dtype=float)))))


@dataclass(frozen=True)
class ErrorReport:
    l2_rel: float
    linf_nodal: float
    overshoot: float
    sign_changes: int

    def as_row(self):
        return {
            "l2_rel": self.l2_rel,
            "linf_nodal": self.linf_nodal,
            "overshoot": self.overshoot,
            "sign_changes": self.sign_changes,
        }


def _sample_rule(dim):
    return gauss_rule(ENRICHED_ORDER_1D if dim == 1 else ENRICHED_ORDER_2D, dim)


def error_report(field, exact, line):
    """Compare field with exact (callable on (npts, dim) points, or a reference field).

    line is the sequence of node indices along which sign changes are counted.
    """
    line = list(line)
    if not line:
        raise InvalidArgumentError("line must contain at least one node")
    mesh = field.mesh
    rule = _sample_rule(mesh.dim)
    spec_none = type(field.enrichment).none()
    dm = DofMap.for_mesh(mesh, spec_none)
    num = den = 0.0
    umin, umax = np.inf, -np.inf
    emin, emax = np.inf, -np.inf
    for e in range(mesh.n_elems):
        eb = element_basis_natural(mesh, spec_none, e, rule.points, dm)
        X = eb.points
        u = field(X, np.full(len(X), e))
        ue = np.asarray(exact(X), dtype=float).reshape(-1)
        w = rule.weights * eb.det
        num += w @ (u - ue) ** 2
        den += w @ ue**2
        umin, umax = min(umin, u.min()), max(umax, u.max())
        emin, emax = min(emin, ue.min()), max(emax, ue.max())
    un = field.nodal_values()
    ue_n = np.asarray(exact(mesh.nodes), dtype=float).reshape(-1)
    umin, umax = min(umin, un.min()), max(umax, un.max())
    emin, emax = min(emin, ue_n.min()), max(emax, ue_n.max())
    l2 = np.sqrt(num / den) if den > 0 else np.sqrt(num)
    return ErrorReport(
        l2_rel=float(l2),
        linf_nodal=float(np.max(np.abs(un - ue_n))),
        overshoot=float(max(0.0, umax - emax, emin - umin)),
        sign_changes=sign_changes(un[line]),
    )


@dataclass
class TauEntry:
    """Time scale tau(x) = N'(x) . D^{-1} m on one element.

    m = int N' dOmega, D = int N' (alpha . grad N') + kappa grad N' . grad N' dOmega
    with N' the enriched basis entries of the element.
    """

    element: int
    m: np.ndarray
    D: np.ndarray
    mean: float
    _coef: np.ndarray
    _mesh: object
    _spec: object

    @property
    def n_enriched(self):
        return len(self.m)

    def __call__(self, x):
        from gfemad.basis import element_basis

        eb = element_basis(self._mesh, self._spec, self.element, x)
        Np = eb.values[:, eb.n_standard:]
        return Np @ self._coef


def _enriched_parts(problem, mesh, spec, e, rule):
    eb = element_basis_natural(mesh, spec, e, rule.points)
    ns = eb.n_standard
    Np = eb.values[:, ns:]
    Gp = eb.gradients[:, ns:, :]
    return Np, Gp, rule.weights * eb.det, eb.points


def compute_tau(problem, mesh, spec, e, order=None):
    """tau(x) on element e (needs at least one enriched node and constant kappa)."""
    if order is None:
        order = ENRICHED_ORDER_1D if mesh.dim == 1 else ENRICHED_ORDER_2D
    rule = gauss_rule(order, mesh.dim)
    Np, Gp, w, X = _enriched_parts(problem, mesh, spec, e, rule)
    if Np.shape[1] == 0:
        raise InvalidArgumentError(f"element {e} has no enriched nodes")
    alpha = problem.velocity(X)
    m = w @ Np
    adv = np.einsum("qkd,qd->qk", Gp, alpha)
    D = np.einsum("q,qp,qr->pr", w, Np, adv) + problem.kappa * np.einsum("q,qpd,qrd->pr", w, Gp, Gp)
    if not np.all(np.isfinite(D)) or np.linalg.cond(D) > 1e14:
        raise DegenerateEnrichmentError(f"enriched block on element {e} is singular")
    coef = np.linalg.solve(D, m)
    tau = Np @ coef
    mean = float(w @ tau / w.sum())
    return TauEntry(e, m, D, mean, coef, mesh, spec)


def tau_scalar(problem, mesh, spec, e, x, order=None):
    """Single-enrichment quotient tau(x) = N'(x) int N' / int (N' alpha.grad N' + kappa |grad N'|^2)."""
    from gfemad.basis import element_basis

    if order is None:
        order = ENRICHED_ORDER_1D if mesh.dim == 1 else ENRICHED_ORDER_2D
    rule = gauss_rule(order, mesh.dim)
    Np, Gp, w, X = _enriched_parts(problem, mesh, spec, e, rule)
    if Np.shape[1] != 1:
        raise InvalidArgumentError("scalar tau needs exactly one enriched DOF on the element")
    alpha = problem.velocity(X)
    num = w @ Np[:, 0]
    den = w @ (Np[:, 0] * np.einsum("qd,qd->q", Gp[:, 0], alpha)) + problem.kappa * (
        w @ np.einsum("qd,qd->q", Gp[:, 0], Gp[:, 0])
    )
    eb = element_basis(mesh, spec, e, x)
    return eb.values[:, eb.n_standard] * num / den


def enriched_elements(mesh, spec):
    if spec.family == "none":
        return []
    return [e for e in range(mesh.n_elems) if any(int(i) in spec.enriched_nodes for i in mesh.elements[e])]


def tau_table(problem, mesh, spec):
    return [compute_tau(problem, mesh, spec, e) for e in enriched_elements(mesh, spec)]
