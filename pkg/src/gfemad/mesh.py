"""Structured interval and quadrilateral meshes."""

from dataclasses import dataclass, field

import numpy as np

from gfemad.errors import InvalidArgumentError, OutOfDomainError

# 1D endpoints answer to both names
TAG_ALIASES_1D = {"inflow": "left", "outflow": "right"}


@dataclass(frozen=True)
class NodeSupport:
    node: int
    elements: frozenset


@dataclass(frozen=True)
class Mesh:
    """Immutable structured mesh.

    nodes: (n_nodes, dim) coordinates.
    elements: (n_elems, 2) segments or (n_elems, 4) counterclockwise quads.
    boundary_nodes: tag -> frozenset of node indices.
    boundary_faces: tag -> tuple of (element, local node indices) faces.
    h: (n_elems,) characteristic length.
    """

    nodes: np.ndarray
    elements: np.ndarray
    boundary_nodes: dict
    boundary_faces: dict
    h: np.ndarray
    shape: tuple
    extent: tuple
    origin: tuple = field(default=None)

    @property
    def dim(self):
        return self.nodes.shape[1]

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elems(self):
        return self.elements.shape[0]

    @property
    def tags(self):
        return tuple(self.boundary_nodes)

    def resolve_tag(self, tag):
        if self.dim == 1:
            tag = TAG_ALIASES_1D.get(tag, tag)
        if tag not in self.boundary_nodes:
            raise InvalidArgumentError(f"unknown boundary tag {tag!r}; mesh has {sorted(self.boundary_nodes)}")
        return tag

    def element_coords(self, e):
        return self.nodes[self.elements[e]]

    def element_measure(self, e):
        c = self.element_coords(e)
        if self.dim == 1:
            return abs(c[1, 0] - c[0, 0])
        x, y = c[:, 0], c[:, 1]
        # shoelace
        return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    def node_supports(self):
        sets = [set() for _ in range(self.n_nodes)]
        for e, conn in enumerate(self.elements):
            for i in conn:
                sets[i].add(e)
        return [NodeSupport(i, frozenset(s)) for i, s in enumerate(sets)]

    def locate(self, points):
        """Element index containing each point (structured lookup)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            pts = pts.reshape(-1, self.dim)
        tol = 1e-12 * max(self.extent)
        idx = []
        for d in range(self.dim):
            rel = (pts[:, d] - self.origin[d]) / self.extent[d]
            if np.any(rel < -tol) or np.any(rel > 1 + tol):
                raise OutOfDomainError("point outside mesh")
            k = np.floor(rel * self.shape[d]).astype(int)
            idx.append(np.clip(k, 0, self.shape[d] - 1))
        if self.dim == 1:
            return idx[0]
        return idx[1] * self.shape[0] + idx[0]

    def boundary_node_faces(self, tag):
        return self.boundary_faces[self.resolve_tag(tag)]


def _check_count(name, n):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError(f"{name} must be a positive integer, got {n!r}")


def _check_length(name, length):
    if not np.isfinite(length) or length <= 0:
        raise InvalidArgumentError(f"{name} must be positive, got {length!r}")


def build_interval_mesh(length, n_elems, origin=0.0):
    _check_count("n_elems", n_elems)
    _check_length("length", length)
    x = origin + length * np.arange(n_elems + 1) / n_elems
    elements = np.column_stack([np.arange(n_elems), np.arange(1, n_elems + 1)])
    left, right = 0, n_elems
    return Mesh(
        nodes=x[:, None],
        elements=elements,
        boundary_nodes={"left": frozenset({left}), "right": frozenset({right})},
        boundary_faces={"left": ((0, (0,)),), "right": ((n_elems - 1, (1,)),)},
        h=np.full(n_elems, length / n_elems),
        shape=(int(n_elems),),
        extent=(float(length),),
        origin=(float(origin),),
    )


def build_quad_mesh(lx, ly, nx, ny, origin=(0.0, 0.0)):
    """Tensor-product mesh of lx x ly with nx x ny quads.

    Node (i, j) has index j*(nx+1) + i; element (i, j) has index j*nx + i.
    """
    _check_count("nx", nx)
    _check_count("ny", ny)
    _check_length("lx", lx)
    _check_length("ly", ly)
    xs = origin[0] + lx * np.arange(nx + 1) / nx
    ys = origin[1] + ly * np.arange(ny + 1) / ny
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return j * (nx + 1) + i

    elements = np.array(
        [[nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)] for j in range(ny) for i in range(nx)]
    )
    bn = {
        "left": frozenset(nid(0, j) for j in range(ny + 1)),
        "right": frozenset(nid(nx, j) for j in range(ny + 1)),
        "bottom": frozenset(nid(i, 0) for i in range(nx + 1)),
        "top": frozenset(nid(i, ny) for i in range(nx + 1)),
    }
    # local edges of a CCW quad: 0-1 bottom, 1-2 right, 2-3 top, 3-0 left
    bf = {
        "left": tuple((j * nx, (3, 0)) for j in range(ny)),
        "right": tuple((j * nx + nx - 1, (1, 2)) for j in range(ny)),
        "bottom": tuple((i, (0, 1)) for i in range(nx)),
        "top": tuple(((ny - 1) * nx + i, (2, 3)) for i in range(nx)),
    }
    hx, hy = lx / nx, ly / ny
    # cells are square in every preset; otherwise report the longer edge
    h = np.full(nx * ny, max(hx, hy))
    return Mesh(
        nodes=nodes,
        elements=elements,
        boundary_nodes=bn,
        boundary_faces=bf,
        h=h,
        shape=(int(nx), int(ny)),
        extent=(float(lx), float(ly)),
        origin=(float(origin[0]), float(origin[1])),
    )


def select_enriched_nodes(mesh, boundary_tags):
    """All nodes of every element having a face on one of the tagged boundaries."""
    if isinstance(boundary_tags, str):
        boundary_tags = (boundary_tags,)
    nodes = set()
    for tag in boundary_tags:
        for e, _ in mesh.boundary_node_faces(tag):
            nodes.update(int(i) for i in mesh.elements[e])
    return frozenset(nodes)
