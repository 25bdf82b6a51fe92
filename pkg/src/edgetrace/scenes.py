"""Builtin test scenes, built as open triangle meshes with outward normals.

Every scene is returned together with the default source and listener used
by the acceptance suite. Names are addressed from the CLI as
``--scene builtin:NAME``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bedrf import DIRICHLET, NEUMANN
from .geometry import TriangleMesh


@dataclass
class BuiltinScene:
    name: str
    mesh: TriangleMesh
    source: np.ndarray
    listener: np.ndarray
    bc: str = NEUMANN
    materials: dict = None

    def bc_of_material(self):
        names = self.mesh.material_names or ["default"]
        return {m: self.bc for m in names}


def _orient(tris, pts, inside):
    """Flip triangles so their normals point away from ``inside``."""
    out = []
    for t in tris:
        a, b, c = (pts[i] for i in t)
        nrm = np.cross(b - a, c - a)
        out.append(t if np.dot(nrm, a - inside) > 0 else (t[0], t[2], t[1]))
    return out


def _mesh(pts, tris, material="default"):
    return TriangleMesh(np.asarray(pts, float), np.asarray(tris, dtype=np.int64),
                        np.zeros(len(tris), dtype=np.int64), [material])


def wedge_mesh(apex, n, half_angle, z0, z1, width, material="default"):
    """Exterior wedge with edge along z through ``apex`` and air bisector ``n`` (in xy).

    Each face is a trapezoid of depth ``width`` split into three triangles,
    one of which spans the full edge.
    """
    apex = np.asarray(apex, float)
    n = np.asarray(n, float) / np.linalg.norm(n)
    ang = math.atan2(n[1], n[0])
    dirs = [np.array([math.cos(ang + s * (math.pi - half_angle)),
                      math.sin(ang + s * (math.pi - half_angle)), 0.0]) for s in (1, -1)]
    a = np.array([apex[0], apex[1], z0])
    b = np.array([apex[0], apex[1], z1])
    pts = [a, b]
    tris = []
    for d in dirs:
        a2, b2 = a + width * d, b + width * d
        m = 0.5 * (a2 + b2)
        i = len(pts)
        pts += [a2, b2, m]
        tris += [(0, 1, i + 2), (0, i + 2, i), (1, i + 1, i + 2)]
    inside = a + 0.5 * (b - a) - 0.25 * width * n
    return _mesh(pts, _orient(tris, pts, inside), material)


def box_mesh(lo, hi, open_bottom=True, material="default"):
    """Axis-aligned box; the bottom face is omitted when ``open_bottom``."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    pts = [np.array([(hi if (i >> k) & 1 else lo)[k] for k in range(3)]) for i in range(8)]
    quads = [(0, 2, 6, 4), (1, 3, 7, 5), (0, 1, 5, 4), (2, 3, 7, 6), (4, 5, 7, 6)]
    if not open_bottom:
        quads.append((0, 1, 3, 2))
    tris = []
    for q in quads:
        tris += [(q[0], q[1], q[2]), (q[0], q[2], q[3])]
    return _mesh(pts, _orient(tris, pts, 0.5 * (lo + hi)), material)


def single_wedge(width=3.0, half_length=2.0):
    """Right-angle wedge (half angle pi/4), source 2 m out at pi/6 from one face,
    listener 1 m out at pi/4 from the other face and 1 m along the edge."""
    mesh = wedge_mesh((0, 0, 0), (1, 0, 0), math.pi / 4, -half_length, half_length, width)
    th_s = 7 * math.pi / 12
    src = np.array([2 * math.cos(th_s), 2 * math.sin(th_s), 0.0])
    lst = np.array([0.0, -1.0, 1.0])
    return BuiltinScene("wedge", mesh, src, lst, DIRICHLET)


def double_wedge():
    """Two right-angle wedges side by side; only second-order paths reach the listener."""
    depth = 1.5 * math.sqrt(2)
    m1 = wedge_mesh((0, 0, 0), (0, 1, 0), math.pi / 4, -1.0, 1.0, depth)
    m2 = wedge_mesh((4, 0, 0), (0, 1, 0), math.pi / 4, -1.0, 1.0, depth)
    mesh = TriangleMesh.concat([m1, m2])
    return BuiltinScene("double-wedge", mesh, np.array([-2.0, -1.0, 0.0]),
                        np.array([6.0, -1.0, 0.0]), DIRICHLET)


def boxes():
    """Two open-bottom boxes on an absorbing floor strip: 26 triangles, 16 convex edges.

    The listener hangs above the gap between the boxes, so sound reaches it
    over the roof of the first box by first- and second-order diffraction.
    """
    floor = _mesh([(-20, -20, 0), (40, -20, 0), (40, 20, 0), (-20, 20, 0),
                   (-20, -8, 0), (40, -8, 0), (-20, 8, 0), (40, 8, 0)],
                  [(0, 1, 5), (0, 5, 4), (4, 5, 7), (4, 7, 6), (6, 7, 2), (6, 2, 3)],
                  "floor")
    floor = TriangleMesh(floor.vertices, np.array(_orient(
        [tuple(t) for t in floor.triangles], floor.vertices, np.array([0, 0, -1.0]))),
        floor.materials, ["floor"])
    b1 = box_mesh((0, -6, 0), (12, 6, 4), material="box")
    b2 = box_mesh((18, -6, 0), (30, 6, 4), material="box")
    mesh = TriangleMesh.concat([floor, b1, b2])
    return BuiltinScene("boxes", mesh, np.array([-6.0, 0.0, 2.0]),
                        np.array([15.0, 0.0, 7.0]), NEUMANN)


def slit(gap=0.5, half_angle=math.pi / 12, plate=14.0, length=24.0):
    """Two knife-edge plates in the plane x = 0 leaving a slit of width ``gap`` along z."""
    h = length / 2
    up = wedge_mesh((0, gap / 2, 0), (0, -1, 0), half_angle, -h, h, plate)
    dn = wedge_mesh((0, -gap / 2, 0), (0, 1, 0), half_angle, -h, h, plate)
    mesh = TriangleMesh.concat([up, dn])
    return BuiltinScene("slit", mesh, np.array([-1000.0, 0.0, 0.0]),
                        np.array([20.0, 0.0, 0.0]), DIRICHLET)


def cube():
    mesh = box_mesh((-0.5, -0.5, -0.5), (0.5, 0.5, 0.5), open_bottom=False)
    return BuiltinScene("cube", mesh, np.array([-2.0, 0.1, 0.2]),
                        np.array([2.0, -0.1, 0.3]), NEUMANN)


def empty():
    mesh = TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    return BuiltinScene("empty", mesh, np.zeros(3), np.array([34.4, 0.0, 0.0]))


BUILTINS = {"wedge": single_wedge, "double-wedge": double_wedge, "boxes": boxes,
            "slit": slit, "cube": cube, "empty": empty}


def get(name: str) -> BuiltinScene:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin scene {name!r}; choose from {sorted(BUILTINS)}")
