"""Global system assembly: advection, diffusion, load, Neumann and penalty terms."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from gfemad.basis import DofMap, corner_coords, element_basis_natural
from gfemad.errors import InvalidArgumentError
from gfemad.quadrature import element_rule, gauss_rule, trapezoid_boundary_rule


@dataclass
class GlobalSystem:
    K: sp.csr_matrix
    f: np.ndarray
    dofmap: DofMap
    mesh: object = None
    enrichment: object = None

    def copy(self):
        return GlobalSystem(self.K.copy(), self.f.copy(), self.dofmap, self.mesh, self.enrichment)


def element_has_enrichment(mesh, spec, e):
    return spec.family != "none" and any(int(i) in spec.enriched_nodes for i in mesh.elements[e])


def element_matrices(problem, mesh, spec, e, dofmap=None, enriched_order=None, rule=None):
    """Element matrix, load vector and global DOFs of element e.

    K_e[p, q] = int B_p (alpha . grad B_q) + kappa grad B_p . grad B_q
    f_e[p]    = int B_p f  (+ Neumann faces of this element)
    """
    if dofmap is None:
        dofmap = DofMap.for_mesh(mesh, spec)
    if rule is None:
        rule = element_rule(mesh.dim, element_has_enrichment(mesh, spec, e), enriched_order)
    eb = element_basis_natural(mesh, spec, e, rule.points, dofmap)
    w = rule.weights * eb.det
    B, G = eb.values, eb.gradients
    alpha = problem.velocity(eb.points)
    adv = np.einsum("qkd,qd->qk", G, alpha)
    Ke = np.einsum("q,qp,qr->pr", w, B, adv) + problem.kappa * np.einsum("q,qpd,qrd->pr", w, G, G)
    fe = problem.source * (w @ B)
    for tag, flux in problem.neumann:
        if flux == 0.0:
            continue
        for fe_elem, local in mesh.boundary_node_faces(tag):
            if fe_elem == e:
                fe = fe + flux * _face_integral(mesh, spec, e, local, dofmap)
    return Ke, fe, eb.dof_map


def _face_integral(mesh, spec, e, local, dofmap):
    """int_face B_p dGamma with 2-point Gauss (a point evaluation in 1D)."""
    corners = corner_coords(mesh.dim)
    if mesh.dim == 1:
        eb = element_basis_natural(mesh, spec, e, corners[list(local)], dofmap)
        return eb.values[0]
    a, b = corners[local[0]], corners[local[1]]
    g = gauss_rule(2, 1)
    s = g.points[:, 0]
    xi = 0.5 * (1 - s)[:, None] * a + 0.5 * (1 + s)[:, None] * b
    eb = element_basis_natural(mesh, spec, e, xi, dofmap)
    pa, pb = mesh.element_coords(e)[list(local)]
    half = 0.5 * np.linalg.norm(pb - pa)
    return (g.weights * half) @ eb.values


def nodal_dirichlet_values(mesh, problem):
    """Node -> prescribed value; the first tag listed wins at shared corners."""
    values = {}
    for tag, u0 in problem.dirichlet:
        for i in sorted(mesh.boundary_nodes[mesh.resolve_tag(tag)]):
            values.setdefault(int(i), u0)
    return values


def assemble(problem, mesh, spec, enriched_order=None):
    """Assemble K and f over all elements in element order."""
    dofmap = DofMap.for_mesh(mesh, spec)
    rows, cols, vals = [], [], []
    f = np.zeros(dofmap.total)
    for e in range(mesh.n_elems):
        Ke, fe, dofs = element_matrices(problem, mesh, spec, e, dofmap, enriched_order)
        rows.append(np.repeat(dofs, len(dofs)))
        cols.append(np.tile(dofs, len(dofs)))
        vals.append(Ke.ravel())
        np.add.at(f, dofs, fe)
    K = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dofmap.total, dofmap.total),
    ).tocsr()
    K.sum_duplicates()
    return GlobalSystem(K, f, dofmap, mesh, spec)


def add_penalty_terms(system, problem, mesh, spec, lam):
    """Weak Dirichlet terms lam*int B_p B_q and lam*int B_p u0 on every Dirichlet face.

    Faces are integrated with the endpoint trapezoid rule; in 1D a face is a
    single point with unit weight.
    """
    if not np.isfinite(lam) or lam <= 0:
        raise InvalidArgumentError(f"penalty weight must be positive, got {lam!r}")
    dofmap = system.dofmap
    corners = corner_coords(mesh.dim)
    rows, cols, vals = [], [], []
    f = system.f.copy()
    owner = nodal_dirichlet_values(mesh, problem)
    for tag, _ in problem.dirichlet:
        for e, local in mesh.boundary_node_faces(tag):
            eb = element_basis_natural(mesh, spec, e, corners[list(local)], dofmap)
            if mesh.dim == 1:
                weights = np.ones(1)
            else:
                pa, pb = mesh.element_coords(e)[list(local)]
                weights = trapezoid_boundary_rule(pa, pb).weights
            # data at each trapezoid point is the node's prescribed value
            u0 = np.array([owner[int(mesh.elements[e][k])] for k in local])
            B = eb.values
            Kb = lam * np.einsum("q,qp,qr->pr", weights, B, B)
            fb = lam * ((weights * u0) @ B)
            d = eb.dof_map
            rows.append(np.repeat(d, len(d)))
            cols.append(np.tile(d, len(d)))
            vals.append(Kb.ravel())
            np.add.at(f, d, fb)
    K = system.K
    if vals:
        P = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=K.shape
        ).tocsr()
        K = (K + P).tocsr()
    return GlobalSystem(K, f, dofmap, system.mesh, system.enrichment)
