"""CSV and legacy-ASCII VTK serialization (rendered to strings; callers write files)."""

import io

import numpy as np

VTK_LINE = 3
VTK_QUAD = 9


def fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def csv_text(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def solution_csv(field):
    mesh = field.mesh
    u = field.nodal_values()
    enr = field.dofmap.enriched_dof
    up = np.full(mesh.n_nodes, np.nan)
    for k, j in enumerate(field.dofmap.enriched_nodes):
        up[j] = field.uprime[k]
    coords = ["x", "y"][: mesh.dim]
    header = ["node", *coords, "ubar", "uprime", "u"]
    rows = []
    for i in range(mesh.n_nodes):
        rows.append([i, *mesh.nodes[i], field.ubar[i], up[i] if i in enr else "", u[i]])
    return csv_text(header, rows)


def line_csv(points, values, cut=None):
    """Sampled profile; cut (optional, one per point) labels which cut line a sample is on."""
    points = np.asarray(points)
    coords = ["x", "y"][: points.shape[1]]
    if cut is None:
        return csv_text(["s", *coords, "u"], [[k, *p, v] for k, (p, v) in enumerate(zip(points, values))])
    rows, seen = [], {}
    for c, p, v in zip(cut, points, values):
        k = seen.get(c, 0)
        seen[c] = k + 1
        rows.append([c, k, *p, v])
    return csv_text(["cut", "s", *coords, "u"], rows)


def vtk_text(mesh, point_data=None, title="gfemad"):
    """Legacy ASCII UNSTRUCTURED_GRID; point_data maps name -> nodal array."""
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {mesh.n_nodes} double")
    for p in mesh.nodes:
        xyz = list(p) + [0.0] * (3 - len(p))
        lines.append(" ".join(fmt(c) for c in xyz))
    npe = mesh.elements.shape[1]
    lines.append(f"CELLS {mesh.n_elems} {mesh.n_elems * (npe + 1)}")
    for c in mesh.elements:
        lines.append(" ".join(str(int(i)) for i in [npe, *c]))
    lines.append(f"CELL_TYPES {mesh.n_elems}")
    ctype = VTK_LINE if npe == 2 else VTK_QUAD
    lines.extend([str(ctype)] * mesh.n_elems)
    if point_data:
        lines.append(f"POINT_DATA {mesh.n_nodes}")
        for name, values in point_data.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(fmt(v) for v in values)
    return "\n".join(lines) + "\n"


def read_vtk_scalars(text, name):
    """Parse one POINT_DATA scalar array back out of vtk_text output."""
    lines = text.splitlines()
    k = lines.index(f"SCALARS {name} double 1")
    n = int(next(l for l in lines if l.startswith("POINT_DATA")).split()[1])
    return np.array([float(v) for v in lines[k + 2 : k + 2 + n]])
