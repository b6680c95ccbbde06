"""2D unstructured meshes: representation, generators, native I/O, VTK.

Cells are counterclockwise triangles or quadrilaterals.  Every edge is
stored once with the unit normal pointing out of its owner cell (the first
cell that referenced it); boundary edges carry a tag from
{wall, symmetry, inflow, outflow}.  Meshes are immutable after
construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

BOUNDARY_TAGS = ("wall", "symmetry", "inflow", "outflow")


class MeshError(ValueError):
    """Inconsistent mesh definition or file."""


@dataclass(frozen=True)
class Mesh:
    """Conforming mesh of triangles/quads with precomputed edge geometry."""

    vertices: np.ndarray            # (nv, 2)
    cells: tuple[tuple[int, ...], ...]
    edge_vertices: np.ndarray = field(init=False, repr=False)  # (ne, 2)
    edge_cells: np.ndarray = field(init=False, repr=False)     # (ne, 2), -1 = boundary
    edge_normal: np.ndarray = field(init=False, repr=False)    # (ne, 2) unit, out of owner
    edge_length: np.ndarray = field(init=False, repr=False)
    edge_tag: tuple[str, ...] = field(init=False, repr=False)  # "" on interior edges
    cell_area: np.ndarray = field(init=False, repr=False)
    cell_perimeter: np.ndarray = field(init=False, repr=False)
    cell_centroid: np.ndarray = field(init=False, repr=False)
    boundary_map: dict = None       # {(i, j) sorted vertex pair: tag}
    periodic_pairs: tuple = ()      # ((edge_a, edge_b), ...) glued interior pairs

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise MeshError("vertices must be an (n, 2) array")
        object.__setattr__(self, "vertices", verts)
        cells = tuple(tuple(int(i) for i in c) for c in self.cells)
        if not cells:
            raise MeshError("mesh needs at least one cell")
        for c in cells:
            if len(c) not in (3, 4):
                raise MeshError(f"only tri/quad cells supported, got {len(c)} vertices")
            if max(c) >= len(verts) or min(c) < 0:
                raise MeshError(f"cell {c} references missing vertex")
        cells = tuple(self._oriented(verts, c) for c in cells)
        object.__setattr__(self, "cells", cells)
        self._build_geometry(verts, cells)

    @staticmethod
    def _oriented(verts, cell):
        xy = verts[list(cell)]
        area2 = 0.0
        for k in range(len(cell)):
            x0, y0 = xy[k]
            x1, y1 = xy[(k + 1) % len(cell)]
            area2 += x0 * y1 - x1 * y0
        if area2 == 0.0:
            raise MeshError(f"degenerate cell {cell}")
        return cell if area2 > 0.0 else tuple(reversed(cell))

    def _build_geometry(self, verts, cells):
        nc = len(cells)
        area = np.empty(nc)
        perim = np.empty(nc)
        centroid = np.empty((nc, 2))
        edge_index: dict[tuple[int, int], int] = {}
        e_verts, e_cells, e_normal, e_length = [], [], [], []
        for ic, cell in enumerate(cells):
            xy = verts[list(cell)]
            a2 = 0.0
            cx = cy = 0.0
            per = 0.0
            for k in range(len(cell)):
                x0, y0 = xy[k]
                x1, y1 = xy[(k + 1) % len(cell)]
                cross = x0 * y1 - x1 * y0
                a2 += cross
                cx += (x0 + x1) * cross
                cy += (y0 + y1) * cross
                length = float(np.hypot(x1 - x0, y1 - y0))
                per += length
                key = (min(cell[k], cell[(k + 1) % len(cell)]),
                       max(cell[k], cell[(k + 1) % len(cell)]))
                if key in edge_index:
                    ie = edge_index[key]
                    if e_cells[ie][1] != -1:
                        raise MeshError(f"edge {key} shared by more than two cells")
                    e_cells[ie][1] = ic
                else:
                    edge_index[key] = len(e_verts)
                    e_verts.append(key)
                    e_cells.append([ic, -1])
                    # CCW cell: outward normal of edge (v0 -> v1) is (dy, -dx).
                    e_normal.append(((y1 - y0) / length, -(x1 - x0) / length))
                    e_length.append(length)
            area[ic] = 0.5 * a2
            perim[ic] = per
            centroid[ic] = (cx / (3.0 * a2), cy / (3.0 * a2))
        if np.any(area <= 0.0):
            raise MeshError("non-positive cell area after orientation")

        e_cells = np.asarray(e_cells, dtype=int)
        tags = [""] * len(e_verts)
        provided = dict(self.boundary_map or {})
        provided = {(min(i, j), max(i, j)): t for (i, j), t in provided.items()}
        for ie, key in enumerate(e_verts):
            if e_cells[ie, 1] == -1:
                tag = provided.get(key)
                if tag is None:
                    raise MeshError(f"boundary edge {key} has no tag")
                if tag not in BOUNDARY_TAGS:
                    raise MeshError(f"unknown boundary tag {tag!r} on edge {key}")
                tags[ie] = tag
            elif key in provided:
                raise MeshError(f"interior edge {key} carries a boundary tag")

        # Periodic gluing: each pair of boundary edges becomes one interior
        # connection; the owner keeps its normal, the partner cell is wired
        # as the neighbor.
        glued = []
        for ea, eb in self.periodic_pairs:
            if e_cells[ea, 1] != -1 or e_cells[eb, 1] != -1:
                raise MeshError("periodic pair must join boundary edges")
            e_cells[ea, 1] = e_cells[eb, 0]
            tags[ea] = ""
            glued.append((ea, eb))
        drop = {eb for _, eb in glued}
        if drop:
            keep = np.array([i for i in range(len(e_verts)) if i not in drop])
            e_verts = [e_verts[i] for i in keep]
            e_cells = e_cells[keep]
            e_normal = [e_normal[i] for i in keep]
            e_length = [e_length[i] for i in keep]
            tags = [tags[i] for i in keep]

        def _set(name, value):
            object.__setattr__(self, name, value)

        _set("edge_vertices", np.asarray(e_verts, dtype=int))
        _set("edge_cells", np.asarray(e_cells, dtype=int))
        _set("edge_normal", np.asarray(e_normal, dtype=float))
        _set("edge_length", np.asarray(e_length, dtype=float))
        _set("edge_tag", tuple(tags))
        _set("cell_area", area)
        _set("cell_perimeter", perim)
        _set("cell_centroid", centroid)
        for arr in (self.vertices, self.edge_vertices, self.edge_cells,
                    self.edge_normal, self.edge_length, self.cell_area,
                    self.cell_perimeter, self.cell_centroid):
            arr.setflags(write=False)

    # -- queries ------------------------------------------------------------

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def interior_edges(self) -> np.ndarray:
        return np.nonzero(self.edge_cells[:, 1] >= 0)[0]

    @property
    def boundary_edges(self) -> np.ndarray:
        return np.nonzero(self.edge_cells[:, 1] < 0)[0]

    def edges_with_tag(self, tag: str) -> np.ndarray:
        return np.array([i for i, t in enumerate(self.edge_tag) if t == tag],
                        dtype=int)

    def closure_residual(self) -> float:
        """Max over cells of |sum_e |e| n_e| / perimeter (0 for closed polygons)."""
        acc = np.zeros((self.n_cells, 2))
        ln = self.edge_length[:, None] * self.edge_normal
        np.add.at(acc, self.edge_cells[:, 0], ln)
        inner = self.edge_cells[:, 1] >= 0
        np.add.at(acc, self.edge_cells[inner, 1], -ln[inner])
        return float(np.max(np.hypot(acc[:, 0], acc[:, 1]) / self.cell_perimeter))

    def shape_regularity(self) -> float:
        """Min over cells of (approximate inradius) / diameter."""
        worst = np.inf
        for ic, cell in enumerate(self.cells):
            xy = self.vertices[list(cell)]
            d = 0.0
            for i in range(len(cell)):
                for j in range(i + 1, len(cell)):
                    d = max(d, float(np.hypot(*(xy[i] - xy[j]))))
            inradius = 2.0 * self.cell_area[ic] / self.cell_perimeter[ic]
            worst = min(worst, inradius / d)
        return worst


# -- generators --------------------------------------------------------------


def gen_rect(nx: int, ny: int, extent=(0.0, 1.0, 0.0, 1.0),
             tags: dict | None = None, periodic=()) -> Mesh:
    """Structured quad mesh of an axis-aligned rectangle.

    *tags* maps side names (left/right/bottom/top) to boundary tags;
    *periodic* lists axes ("x", "y") whose opposite sides are glued.
    """
    if nx < 1 or ny < 1:
        raise MeshError("need nx, ny >= 1")
    x0, x1, y0, y1 = extent
    side = {"left": "inflow", "right": "outflow",
            "bottom": "symmetry", "top": "symmetry"}
    side.update(tags or {})
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i * (ny + 1) + j

    cells = []
    for i in range(nx):
        for j in range(ny):
            cells.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1),
                          vid(i, j + 1)))
    bmap = {}
    for i in range(nx):
        bmap[(vid(i, 0), vid(i + 1, 0))] = side["bottom"]
        bmap[(vid(i, ny), vid(i + 1, ny))] = side["top"]
    for j in range(ny):
        bmap[(vid(0, j), vid(0, j + 1))] = side["left"]
        bmap[(vid(nx, j), vid(nx, j + 1))] = side["right"]

    mesh = Mesh(verts, tuple(cells), boundary_map=bmap)
    if not periodic:
        return mesh
    # Rebuild with glued pairs, matching opposite edges by position.
    pairs = []
    index = {tuple(sorted(ev)): k for k, ev in enumerate(map(tuple, mesh.edge_vertices))}
    if "x" in periodic:
        for j in range(ny):
            ea = index[tuple(sorted((vid(nx, j), vid(nx, j + 1))))]
            eb = index[tuple(sorted((vid(0, j), vid(0, j + 1))))]
            pairs.append((ea, eb))
    if "y" in periodic:
        for i in range(nx):
            ea = index[tuple(sorted((vid(i, ny), vid(i + 1, ny))))]
            eb = index[tuple(sorted((vid(i, 0), vid(i + 1, 0))))]
            pairs.append((ea, eb))
    return Mesh(verts, tuple(cells), boundary_map=bmap,
                periodic_pairs=tuple(pairs))


def gen_cylinder_ogrid(n_radial: int, n_theta: int, body_radius: float,
                       outer_radius=None, clustering: float = 1.0) -> Mesh:
    """Body-fitted quad mesh around the upstream half of a circular body.

    Covers the annular sector from the stagnation line (theta = 180 deg,
    the y = 0 symmetry plane) to the shoulder exit plane (theta = 90 deg).
    Inner arc is tagged wall, outer arc inflow, the y = 0 side symmetry and
    the exit plane outflow.  *outer_radius* is a radius, a callable of
    theta, or None (default 3x the body radius); *clustering* > 1
    concentrates radial spacing toward the wall geometrically.
    """
    if n_radial < 2 or n_theta < 2:
        raise MeshError("need n_radial, n_theta >= 2")
    if outer_radius is None:
        outer = lambda th: 3.0 * body_radius  # noqa: E731
    elif callable(outer_radius):
        outer = outer_radius
    else:
        outer = lambda th, r=float(outer_radius): r  # noqa: E731

    thetas = np.linspace(np.pi / 2.0, np.pi, n_theta + 1)
    if clustering == 1.0:
        frac = np.linspace(0.0, 1.0, n_radial + 1)
    else:
        q = np.full(n_radial, 1.0)
        q[1:] = clustering ** np.arange(1, n_radial)
        frac = np.concatenate([[0.0], np.cumsum(q)])
        frac /= frac[-1]

    verts = np.empty(((n_radial + 1) * (n_theta + 1), 2))
    for jt, th in enumerate(thetas):
        r_out = outer(th)
        if r_out <= body_radius:
            raise MeshError("outer radius must exceed the body radius")
        r = body_radius + frac * (r_out - body_radius)
        idx = slice(jt * (n_radial + 1), (jt + 1) * (n_radial + 1))
        verts[idx, 0] = r * np.cos(th)
        verts[idx, 1] = r * np.sin(th)

    def vid(jt, ir):
        return jt * (n_radial + 1) + ir

    cells = []
    for jt in range(n_theta):
        for ir in range(n_radial):
            cells.append((vid(jt, ir), vid(jt + 1, ir), vid(jt + 1, ir + 1),
                          vid(jt, ir + 1)))
    bmap = {}
    for jt in range(n_theta):
        bmap[(vid(jt, 0), vid(jt + 1, 0))] = "wall"
        bmap[(vid(jt, n_radial), vid(jt + 1, n_radial))] = "inflow"
    for ir in range(n_radial):
        bmap[(vid(0, ir), vid(0, ir + 1))] = "outflow"      # theta = 90 deg
        bmap[(vid(n_theta, ir), vid(n_theta, ir + 1))] = "symmetry"  # y = 0
    return Mesh(verts, tuple(cells), boundary_map=bmap)


def gen_double_cone(angles=(25.0, 55.0), lengths=(0.10, 0.08, 0.04),
                    resolution: int = 30, upstream: float = 0.05,
                    top: float = 0.45) -> Mesh:
    """Triangulated wedge domain around a double-cone profile.

    The body runs from the tip at the origin along two ramps with the given
    half-angles (degrees) and axial runs lengths[0], lengths[1], then a flat
    shoulder of run lengths[2].  The bottom boundary upstream of the tip is
    the symmetry plane; the body is tagged wall, the left and top sides
    inflow, the right side outflow.  *resolution* sets the axial cell count
    (the vertical count follows the aspect ratio).
    """
    a1, a2 = np.radians(angles[0]), np.radians(angles[1])
    L1, L2, L3 = lengths
    x_start = -abs(upstream)

    def body(x):
        x = np.asarray(x, dtype=float)
        y = np.where(x <= 0.0, 0.0, np.minimum(x, L1) * np.tan(a1))
        y = y + np.clip(x - L1, 0.0, L2) * np.tan(a2)
        return y

    x_end = L1 + L2 + L3
    ni = max(int(resolution), 8)
    nj = max(int(round(ni * top / (x_end - x_start))), 6)
    xs = np.linspace(x_start, x_end, ni + 1)
    verts = np.empty(((ni + 1) * (nj + 1), 2))
    for i, x in enumerate(xs):
        yb = float(body(x))
        ys = yb + (top - yb) * (np.linspace(0.0, 1.0, nj + 1)) ** 1.15
        idx = slice(i * (nj + 1), (i + 1) * (nj + 1))
        verts[idx, 0] = x
        verts[idx, 1] = ys

    def vid(i, j):
        return i * (nj + 1) + j

    cells = []
    for i in range(ni):
        for j in range(nj):
            q = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1))
            # Split each quad along its shorter diagonal.
            d1 = np.hypot(*(verts[q[0]] - verts[q[2]]))
            d2 = np.hypot(*(verts[q[1]] - verts[q[3]]))
            if d1 <= d2:
                cells.append((q[0], q[1], q[2]))
                cells.append((q[0], q[2], q[3]))
            else:
                cells.append((q[0], q[1], q[3]))
                cells.append((q[1], q[2], q[3]))
    bmap = {}
    for i in range(ni):
        xm = 0.5 * (xs[i] + xs[i + 1])
        bmap[(vid(i, 0), vid(i + 1, 0))] = "symmetry" if xm < 0.0 else "wall"
        bmap[(vid(i, nj), vid(i + 1, nj))] = "inflow"
    for j in range(nj):
        bmap[(vid(0, j), vid(0, j + 1))] = "inflow"
        bmap[(vid(ni, j), vid(ni, j + 1))] = "outflow"
    return Mesh(verts, tuple(cells), boundary_map=bmap)


def double_cone_series(n_levels: int = 5, base_resolution: int = 30,
                       **kw) -> list[Mesh]:
    """Nested refinements of the double-cone mesh (factor 1.5 per level)."""
    meshes = []
    for k in range(n_levels):
        res = int(round(base_resolution * 1.5 ** k))
        meshes.append(gen_double_cone(resolution=res, **kw))
    return meshes


# -- native mesh format -------------------------------------------------------


def write_mesh(mesh: Mesh, path) -> None:
    """ASCII format: $Vertices, $Cells (k i1..ik), $Boundary (i j tag)."""
    lines = [f"$Vertices {mesh.n_vertices}"]
    for x, y in mesh.vertices:
        lines.append(f"{x:.17g} {y:.17g}")
    lines.append(f"$Cells {mesh.n_cells}")
    for cell in mesh.cells:
        lines.append(f"{len(cell)} " + " ".join(map(str, cell)))
    boundary = [(ev, tag) for ev, tag in zip(mesh.edge_vertices, mesh.edge_tag)
                if tag]
    lines.append(f"$Boundary {len(boundary)}")
    for (i, j), tag in boundary:
        lines.append(f"{i} {j} {tag}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path) -> Mesh:
    """Parse the native ASCII format written by :func:`write_mesh`."""
    tokens = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line:
                tokens.append((lineno, line))
    pos = 0

    def token(at):
        if at >= len(tokens):
            raise MeshError(f"{path}: unexpected end of file "
                            f"(section count larger than file?)")
        return tokens[at]

    def expect_section(name, at):
        lineno, line = token(at)
        parts = line.split()
        if len(parts) != 2 or parts[0] != name:
            raise MeshError(f"{path}:{lineno}: expected '{name} <count>'")
        try:
            return int(parts[1])
        except ValueError:
            raise MeshError(f"{path}:{lineno}: bad count {parts[1]!r}") from None

    nv = expect_section("$Vertices", pos)
    pos += 1
    verts = np.empty((nv, 2))
    for k in range(nv):
        lineno, line = token(pos + k)
        parts = line.split()
        try:
            verts[k] = [float(parts[0]), float(parts[1])]
        except (IndexError, ValueError):
            raise MeshError(f"{path}:{lineno}: bad vertex line {line!r}") from None
    pos += nv

    nc = expect_section("$Cells", pos)
    pos += 1
    cells = []
    for k in range(nc):
        lineno, line = token(pos + k)
        parts = line.split()
        try:
            nvtx = int(parts[0])
            idx = tuple(int(p) for p in parts[1:1 + nvtx])
            if len(idx) != nvtx:
                raise ValueError
        except ValueError:
            raise MeshError(f"{path}:{lineno}: bad cell line {line!r}") from None
        if any(i < 0 or i >= nv for i in idx):
            raise MeshError(f"{path}:{lineno}: cell index out of range")
        cells.append(idx)
    pos += nc

    nb = expect_section("$Boundary", pos)
    pos += 1
    bmap = {}
    for k in range(nb):
        lineno, line = token(pos + k)
        parts = line.split()
        if len(parts) != 3:
            raise MeshError(f"{path}:{lineno}: bad boundary line {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise MeshError(f"{path}:{lineno}: bad boundary indices") from None
        bmap[(i, j)] = parts[2]
    return Mesh(verts, tuple(cells), boundary_map=bmap)


def write_vtk(path, mesh: Mesh, cell_data: dict | None = None,
              title: str = "relaxfv output") -> None:
    """Legacy ASCII VTK unstructured grid with scalar cell arrays."""
    lines = ["# vtk DataFile Version 3.0", title, "ASCII",
             "DATASET UNSTRUCTURED_GRID",
             f"POINTS {mesh.n_vertices} double"]
    for x, y in mesh.vertices:
        lines.append(f"{x:.12g} {y:.12g} 0.0")
    size = sum(len(c) + 1 for c in mesh.cells)
    lines.append(f"CELLS {mesh.n_cells} {size}")
    for cell in mesh.cells:
        lines.append(f"{len(cell)} " + " ".join(map(str, cell)))
    lines.append(f"CELL_TYPES {mesh.n_cells}")
    lines.extend("5" if len(c) == 3 else "9" for c in mesh.cells)
    if cell_data:
        lines.append(f"CELL_DATA {mesh.n_cells}")
        for name, values in cell_data.items():
            values = np.asarray(values, dtype=float)
            if values.shape != (mesh.n_cells,):
                raise MeshError(f"cell array {name!r} has shape {values.shape}")
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(f"{v:.12g}" for v in values)
    Path(path).write_text("\n".join(lines) + "\n")
