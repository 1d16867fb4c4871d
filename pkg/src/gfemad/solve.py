"""Dirichlet enforcement, the sparse direct solve and the GFEM driver."""

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from gfemad.assembly import GlobalSystem, add_penalty_terms, assemble, nodal_dirichlet_values
from gfemad.basis import EnrichmentSpec, SolutionField, element_basis_natural, eval_enrichment
from gfemad.errors import InvalidArgumentError, ModeConflictError, SingularSystemError
from gfemad.quadrature import element_rule


PIVOT_RTOL = 1e-14
RESIDUAL_RTOL = 1e-10
REFINE_STEPS = 3
# |H(x_b)| below this (relative) counts as vanishing at a Dirichlet node
VANISH_RTOL = 1e-10


@dataclass(frozen=True)
class BcMode:
    mode: str = "strong"
    penalty: float = None

    def __post_init__(self):
        if self.mode not in ("strong", "weak"):
            raise InvalidArgumentError(f"bc mode must be 'strong' or 'weak', got {self.mode!r}")
        if self.mode == "weak" and (self.penalty is None or not self.penalty > 0):
            raise InvalidArgumentError("weak penalty mode needs lambda > 0")

    @classmethod
    def strong(cls):
        return cls("strong")

    @classmethod
    def weak(cls, lam):
        return cls("weak", float(lam))


dirichlet_values = nodal_dirichlet_values


def _host_elements(mesh, nodes):
    host = {}
    for e, c in enumerate(mesh.elements):
        for i in c:
            host.setdefault(int(i), e)
    return np.array([host[int(i)] for i in nodes], dtype=int)


def check_strong_compatible(mesh, problem, spec):
    """H_a never vanishes on the boundary, so it cannot be combined with strong enforcement."""
    if spec.family == "Ha" and set(dirichlet_values(mesh, problem)) & spec.enriched_nodes:
        raise ModeConflictError(
            "H_a = exp(gamma x) does not vanish on the Dirichlet boundary; use weak (penalty) enforcement"
        )


def apply_strong_bc(system, mesh, problem):
    """Impose u(x_b) = u^p at every Dirichlet node b.

    For a node without enrichment (or where H(x_b) = 0) the standard row is
    replaced by u_b = u^p and its column condensed into the load.  At an
    enriched node with H(x_b) != 0 the standard row becomes the constraint
    ubar_b + H(x_b) u'_b = u^p and the enriched test function is shifted to
    N_b (H - H(x_b)) so that it vanishes at x_b.
    """
    values = dirichlet_values(mesh, problem)
    if not values:
        return system
    nodes = np.array(sorted(values))
    up = np.array([values[i] for i in nodes])
    dofmap = system.dofmap
    spec = system.enrichment
    hb = np.zeros(len(nodes))
    enr = np.array([int(i) in dofmap.enriched_dof for i in nodes])
    if enr.any():
        H, _ = eval_enrichment(spec, mesh.nodes[nodes[enr]], _host_elements(mesh, nodes[enr]))
        hb[enr] = H
    scale = max(1.0, float(np.max(np.abs(hb))))
    general = np.abs(hb) > VANISH_RTOL * scale

    K = system.K.tolil(copy=True)
    f = system.f.copy()
    Kcsr = system.K.tocsr()
    for b, h in zip(nodes[general], hb[general]):
        d = dofmap.enriched_dof[int(b)]
        K[d, :] = Kcsr[d, :] - h * Kcsr[b, :]
        f[d] = f[d] - h * system.f[b]
    K = K.tocsc()
    unit = nodes[~general]
    if len(unit):
        f = f - K[:, unit] @ up[~general]
        keep = np.ones(K.shape[0])
        keep[unit] = 0.0
        K = K @ sp.diags(keep)
    K = K.tolil()
    for b, u0, h in zip(nodes, up, hb):
        K[b, :] = 0.0
        K[b, b] = 1.0
        if abs(h) > VANISH_RTOL * scale:
            K[b, dofmap.enriched_dof[int(b)]] = h
        f[b] = u0
    return GlobalSystem(K.tocsr(), f, dofmap, system.mesh, spec)


def _equilibrate(K, sweeps=8):
    """Ruiz scaling: row and column factors bringing every max-abs to ~1."""
    A = sp.csr_matrix(abs(K))
    r = np.ones(K.shape[0])
    c = np.ones(K.shape[1])
    for _ in range(sweeps):
        B = sp.diags(r) @ A @ sp.diags(c)
        rm = np.asarray(B.max(axis=1).todense()).ravel()
        cm = np.asarray(B.max(axis=0).todense()).ravel()
        rm[rm == 0] = 1.0
        cm[cm == 0] = 1.0
        r /= np.sqrt(rm)
        c /= np.sqrt(cm)
    return r, c


def solve_linear(K, f):
    """Solve K u = f by sparse LU on the equilibrated system.

    Raises SingularSystemError naming a DOF when a pivot falls below
    PIVOT_RTOL * max|K| (measured on the equilibrated matrix).
    """
    K = sp.csc_matrix(K)
    if K.shape[0] != K.shape[1] or K.shape[0] != len(f):
        raise InvalidArgumentError("K must be square and match f")
    r, c = _equilibrate(K)
    A = (sp.diags(r) @ K @ sp.diags(c)).tocsc()
    b = r * f
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        dof = _zero_column(A)
        raise SingularSystemError(f"factorization failed ({exc}); near DOF {dof}", dof=dof) from None
    piv = np.abs(lu.U.diagonal())
    amax = abs(A).max()
    k = int(np.argmin(piv))
    if piv[k] < PIVOT_RTOL * amax:
        dof = int(lu.perm_c[k])
        raise SingularSystemError(f"near-singular pivot {piv[k]:.3e} at DOF {dof}", dof=dof)
    y = lu.solve(b)
    tol = RESIDUAL_RTOL * (1 + np.linalg.norm(b))
    res = np.linalg.norm(A @ y - b)
    for _ in range(REFINE_STEPS):
        if res <= tol:
            break
        y = y + lu.solve(b - A @ y)
        res = np.linalg.norm(A @ y - b)
    if res > tol:
        dof = int(np.argmax(np.abs(A @ y - b)))
        raise SingularSystemError(
            f"system too ill-conditioned: residual {res:.3e} after refinement (worst row {dof})", dof=dof
        )
    return c * y


def _zero_column(A):
    colmax = np.asarray(abs(A).max(axis=0).todense()).ravel()
    return int(np.argmin(colmax))


def solve(system):
    """Solve the global system and unpack it into a SolutionField."""
    u = solve_linear(system.K, system.f)
    n = system.dofmap.n_nodes
    return SolutionField(system.mesh, system.enrichment, u[:n], u[n:])


def prune_flat_enrichment(mesh, spec, tol=1e-12, enriched_order=None):
    """Drop enriched nodes whose whole support sees |grad H| < tol.

    Where H is constant to round-off, N_j H duplicates N_j and the system is
    singular; removing those nodes leaves the discrete solution unchanged to
    the same round-off.
    """
    if not spec.is_enriched:
        return spec
    keep = set()
    for e in range(mesh.n_elems):
        conn = [int(i) for i in mesh.elements[e]]
        cand = [i for i in conn if i in spec.enriched_nodes and i not in keep]
        if not cand:
            continue
        rule = element_rule(mesh.dim, True, enriched_order)
        eb = element_basis_natural(mesh, EnrichmentSpec.none(), e, rule.points)
        _, gH = eval_enrichment(spec, eb.points, np.full(len(eb.points), e))
        if np.max(np.abs(gH)) >= tol:
            keep.update(cand)
    return replace(spec, enriched_nodes=frozenset(keep))


def solve_gfem(problem, mesh, spec, bc, enriched_order=None, flat_tol=None):
    """assemble -> (penalty terms | strong Dirichlet) -> solve.

    flat_tol, when set, first removes enriched nodes on which H is flat
    (see prune_flat_enrichment).
    """
    if flat_tol is not None:
        spec = prune_flat_enrichment(mesh, spec, flat_tol, enriched_order)
    if bc.mode == "strong":
        check_strong_compatible(mesh, problem, spec)
    system = assemble(problem, mesh, spec, enriched_order)
    if bc.mode == "weak":
        system = add_penalty_terms(system, problem, mesh, spec, bc.penalty)
    else:
        system = apply_strong_bc(system, mesh, problem)
    return solve(system)
