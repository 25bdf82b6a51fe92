"""Triangle meshes, convex diffraction edges, wedge frames and ray queries."""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .bedrf import DIRICHLET, NEUMANN, OutOfDomainError

log = logging.getLogger(__name__)

AREA_EPS = 1e-12
DIHEDRAL_TOL = 1e-6
LEAF_SIZE = 4
MAXIV = 64
# endpoint emission: uniform sphere, or solid-angle sampling of proxy triangles
EMISSION_MODES = ("uniform", "proxy")


class DegenerateGeometryError(ValueError):
    """Raised when a wedge frame cannot be built from its faces."""


@dataclass
class TriangleMesh:
    """Vertices (m), index triples and a material id per triangle."""
    vertices: np.ndarray
    triangles: np.ndarray
    materials: np.ndarray | None = None
    material_names: list = field(default_factory=lambda: ["default"])

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.materials is None:
            self.materials = np.zeros(len(self.triangles), dtype=np.int64)
        self.materials = np.asarray(self.materials, dtype=np.int64).reshape(-1)
        if len(self.materials) != len(self.triangles):
            raise ValueError("one material id per triangle required")
        if len(self.triangles) and (self.triangles.min() < 0
                                    or self.triangles.max() >= len(self.vertices)):
            raise ValueError("triangle index out of range")
        if len(self.materials) and self.materials.max() >= len(self.material_names):
            raise ValueError("material id out of range")

    @property
    def corners(self):
        return self.vertices[self.triangles]

    def areas(self):
        p = self.corners
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    def normals(self):
        p = self.corners
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        ln = np.linalg.norm(n, axis=1, keepdims=True)
        return n / np.where(ln > 0, ln, 1.0)

    def without_degenerate(self):
        """Copy with triangles of area <= AREA_EPS removed (warned)."""
        keep = self.areas() > AREA_EPS
        if not keep.all():
            warnings.warn(f"skipping {int((~keep).sum())} degenerate triangles", stacklevel=2)
        return TriangleMesh(self.vertices, self.triangles[keep], self.materials[keep],
                            list(self.material_names))

    @classmethod
    def concat(cls, meshes):
        verts, tris, mats, names = [], [], [], []
        off = 0
        for m in meshes:
            remap = []
            for nm in m.material_names:
                if nm not in names:
                    names.append(nm)
                remap.append(names.index(nm))
            verts.append(m.vertices)
            tris.append(m.triangles + off)
            mats.append(np.asarray(remap, dtype=np.int64)[m.materials])
            off += len(m.vertices)
        return cls(np.concatenate(verts), np.concatenate(tris), np.concatenate(mats),
                   names or ["default"])


def load_obj(path) -> TriangleMesh:
    """Read the v/f/usemtl subset of Wavefront OBJ; polygons are fanned."""
    verts, tris, mats = [], [], []
    names = ["default"]
    cur = 0
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        tag = parts[0]
        try:
            if tag == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif tag == "f":
                idx = []
                for tok in parts[1:]:
                    i = int(tok.split("/")[0])
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                for k in range(1, len(idx) - 1):
                    tris.append([idx[0], idx[k], idx[k + 1]])
                    mats.append(cur)
            elif tag == "usemtl":
                name = parts[1] if len(parts) > 1 else "default"
                if name not in names:
                    names.append(name)
                cur = names.index(name)
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}:{lineno}: malformed '{tag}' line") from exc
    if not tris:
        return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64),
                            np.zeros(0, dtype=np.int64), names)
    return TriangleMesh(np.array(verts), np.array(tris), np.array(mats), names)


@dataclass(frozen=True)
class EdgeFrame:
    """Local wedge frame: ``n`` bisects the air side, ``t`` runs a -> b, ``b = t x n``."""
    n: np.ndarray
    t: np.ndarray
    b: np.ndarray
    phi: float


@dataclass(frozen=True)
class ConvexEdge:
    """A diffracting wedge shared by exactly two consistently wound triangles."""
    a: int
    b: int
    triangles: tuple
    c: tuple
    phi: float
    frame: EdgeFrame
    bc: str
    pa: np.ndarray
    pb: np.ndarray
    pc: tuple

    @property
    def length(self):
        return float(np.linalg.norm(self.pb - self.pa))

    def key(self):
        return (min(self.a, self.b), max(self.a, self.b))


@dataclass
class Ray:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float).reshape(3)
        d = np.asarray(self.direction, dtype=float).reshape(3)
        ln = np.linalg.norm(d)
        if not ln > 0:
            raise ValueError("ray direction must be non-zero")
        self.direction = d / ln


@dataclass(frozen=True)
class Hit:
    triangle: int
    barycentric: tuple
    distance: float
    point: np.ndarray


def frame_from_faces(pa, pb, c1, c2):
    """Frame and half-wedge angle of the wedge with faces (a, b, c1), (a, b, c2)."""
    t = pb - pa
    ln = np.linalg.norm(t)
    if ln <= 0:
        raise DegenerateGeometryError("zero-length edge")
    t = t / ln
    d = []
    for c in (c1, c2):
        v = c - pa
        v = v - np.dot(v, t) * t
        lv = np.linalg.norm(v)
        if lv <= math.sqrt(AREA_EPS):
            raise DegenerateGeometryError("degenerate adjacent triangle")
        d.append(v / lv)
    s = d[0] + d[1]
    ls = np.linalg.norm(s)
    if ls <= 1e-12:
        raise DegenerateGeometryError("faces are coplanar")
    n = -s / ls
    bv = np.cross(t, n)
    phi = 0.5 * math.acos(min(1.0, max(-1.0, float(np.dot(d[0], d[1])))))
    return EdgeFrame(n, t, bv / np.linalg.norm(bv), phi)


def extract_convex_edges(mesh: TriangleMesh, dihedral_tolerance: float = DIHEDRAL_TOL,
                         bc_of_material=None, report: list | None = None):
    """Convex wedges of ``mesh`` whose air-side dihedral exceeds pi + tolerance.

    Triangle winding must be consistent (outward normals): the shared edge is
    traversed in opposite directions by its two faces. Edges with a number of
    adjacent triangles other than two, or with inconsistent winding, are
    skipped and described in ``report`` (and as warnings for non-manifold or
    inconsistent cases). ``bc_of_material`` maps material name to DIRICHLET or
    NEUMANN; an edge is Dirichlet only when both faces are.
    """
    bc_of_material = bc_of_material or {}
    report = report if report is not None else []
    areas = mesh.areas()
    normals = mesh.normals()
    adj = {}
    for ti, tri in enumerate(mesh.triangles):
        if areas[ti] <= AREA_EPS:
            report.append(f"triangle {ti}: degenerate, skipped")
            continue
        for k in range(3):
            a, b, c = int(tri[k]), int(tri[(k + 1) % 3]), int(tri[(k + 2) % 3])
            adj.setdefault((min(a, b), max(a, b)), []).append((ti, a, b, c))
    edges = []
    for key in sorted(adj):
        inc = adj[key]
        if len(inc) != 2:
            if len(inc) > 2:
                msg = f"edge {key}: {len(inc)} adjacent triangles, skipped"
                warnings.warn(msg, stacklevel=2)
                report.append(msg)
            continue
        (t1, a1, b1, c1), (t2, a2, b2, c2) = sorted(inc)
        if not (a1 == b2 and b1 == a2):
            msg = f"edge {key}: inconsistent winding, skipped"
            warnings.warn(msg, stacklevel=2)
            report.append(msg)
            continue
        V = mesh.vertices
        pa, pb = V[key[0]], V[key[1]]
        scale = max(np.linalg.norm(V[c2] - pa), np.linalg.norm(pb - pa))
        if np.dot(normals[t1], V[c2] - V[a1]) >= -1e-9 * scale:
            continue  # flat or concave
        try:
            frame = frame_from_faces(pa, pb, V[c1], V[c2])
        except DegenerateGeometryError as exc:
            report.append(f"edge {key}: {exc}")
            continue
        if 2.0 * math.pi - 2.0 * frame.phi <= math.pi + dihedral_tolerance:
            continue
        names = [mesh.material_names[mesh.materials[t]] for t in (t1, t2)]
        bcs = [bc_of_material.get(nm, NEUMANN) for nm in names]
        bc = DIRICHLET if all(b == DIRICHLET for b in bcs) else NEUMANN
        edges.append(ConvexEdge(key[0], key[1], (t1, t2), (c1, c2), frame.phi, frame, bc,
                                pa.copy(), pb.copy(), (V[c1].copy(), V[c2].copy())))
    return edges


def wedge_frame(edge: ConvexEdge, origin_point=None, tol: float = 1e-9):
    """Frame (n, t, b) and phi of ``edge``, validated at ``origin_point``."""
    if origin_point is not None:
        p = np.asarray(origin_point, dtype=float)
        ab = edge.pb - edge.pa
        s = np.dot(p - edge.pa, ab) / np.dot(ab, ab)
        off = np.linalg.norm(edge.pa + s * ab - p)
        if s < -tol or s > 1 + tol or off > tol * max(1.0, edge.length):
            raise ValueError("origin point is not on the edge segment")
    fr = frame_from_faces(edge.pa, edge.pb, edge.pc[0], edge.pc[1])
    return (fr.n, fr.t, fr.b), fr.phi


def _check_domain(theta, phi_half, what):
    lim = math.pi - phi_half
    if abs(theta) > lim + 1e-12:
        raise OutOfDomainError(f"{what} direction points into the solid wedge")


def directions_to_angles(frame: EdgeFrame, v_i, v_o):
    """(theta_i, phi_i, theta_o, phi_o) of travel directions ``v_i`` and ``v_o``."""
    u = -np.asarray(v_i, dtype=float)
    w = np.asarray(v_o, dtype=float)
    ti = math.atan2(float(u @ frame.b), float(u @ frame.n))
    pi_ = math.asin(min(1.0, max(-1.0, float(u @ frame.t))))
    to = math.atan2(float(w @ frame.b), float(w @ frame.n))
    po = math.asin(min(1.0, max(-1.0, -float(w @ frame.t))))
    _check_domain(ti, frame.phi, "incident")
    _check_domain(to, frame.phi, "outgoing")
    return ti, pi_, to, po


def angles_to_directions(frame: EdgeFrame, theta_i, phi_i, theta_o, phi_o):
    """Inverse of ``directions_to_angles``."""
    v_i = -(math.cos(theta_i) * math.cos(phi_i) * frame.n
            + math.sin(theta_i) * math.cos(phi_i) * frame.b + math.sin(phi_i) * frame.t)
    v_o = (math.cos(theta_o) * math.cos(phi_o) * frame.n
           + math.sin(theta_o) * math.cos(phi_o) * frame.b - math.sin(phi_o) * frame.t)
    return v_i, v_o


# ---------------------------------------------------------------------------
# BVH
# ---------------------------------------------------------------------------

def _area(lo, hi):
    d = np.maximum(hi - lo, 0.0)
    return 2.0 * (d[..., 0] * d[..., 1] + d[..., 1] * d[..., 2] + d[..., 2] * d[..., 0])


def build_bvh(corners: np.ndarray, leaf_size: int = LEAF_SIZE):
    """Surface-area-heuristic BVH with children stored at (left, left + 1)."""
    nt = len(corners)
    tlo = corners.min(axis=1)
    thi = corners.max(axis=1)
    cen = 0.5 * (tlo + thi)
    bmin, bmax, left, first, count = [], [], [], [], []
    order = []

    def new_node():
        bmin.append(None)
        bmax.append(None)
        left.append(-1)
        first.append(0)
        count.append(0)
        return len(bmin) - 1

    def build(node, idx):
        bmin[node] = tlo[idx].min(axis=0)
        bmax[node] = thi[idx].max(axis=0)
        if len(idx) <= leaf_size:
            first[node] = len(order)
            count[node] = len(idx)
            order.extend(int(i) for i in idx)
            return
        best = None
        for ax in range(3):
            srt = idx[np.argsort(cen[idx, ax], kind="stable")]
            lo_l = np.minimum.accumulate(tlo[srt], axis=0)
            hi_l = np.maximum.accumulate(thi[srt], axis=0)
            lo_r = np.minimum.accumulate(tlo[srt][::-1], axis=0)[::-1]
            hi_r = np.maximum.accumulate(thi[srt][::-1], axis=0)[::-1]
            k = np.arange(1, len(srt))
            cost = _area(lo_l[:-1], hi_l[:-1]) * k + _area(lo_r[1:], hi_r[1:]) * (len(srt) - k)
            j = int(np.argmin(cost))
            if best is None or cost[j] < best[0]:
                best = (cost[j], srt, j + 1)
        _, srt, split = best
        c0 = new_node()
        new_node()
        left[node] = c0
        build(c0, srt[:split])
        build(c0 + 1, srt[split:])

    if nt:
        build(new_node(), np.arange(nt))
    nn = len(bmin)
    return dict(
        bmin=np.array(bmin, dtype=float).reshape(nn, 3),
        bmax=np.array(bmax, dtype=float).reshape(nn, 3),
        bleft=np.array(left, dtype=np.int32),
        bfirst=np.array(first, dtype=np.int32),
        bcount=np.array(count, dtype=np.int32),
        border=np.array(order, dtype=np.int32),
    )


# ---------------------------------------------------------------------------
# Scene: mesh + edges + flat kernel arrays
# ---------------------------------------------------------------------------

class Scene:
    """Mesh with its convex edges, BVH and the kernel-side scene object."""

    def __init__(self, mesh: TriangleMesh, bc_of_material=None, edges=None,
                 kernels=None, dihedral_tolerance=DIHEDRAL_TOL, emission="proxy"):
        if emission not in EMISSION_MODES:
            raise ValueError(f"emission must be one of {EMISSION_MODES}")
        self.emission = emission
        self.mesh = mesh.without_degenerate() if len(mesh.triangles) else mesh
        self.report = []
        self.edges = edges if edges is not None else extract_convex_edges(
            self.mesh, dihedral_tolerance, bc_of_material, self.report)
        self.kernels = kernels if kernels is not None else _backend.kernels
        V = self.mesh.vertices
        self.scale = float(np.ptp(V, axis=0).max()) if len(V) else 1.0
        self.eps = 1e-9 * max(self.scale, 1.0)
        self.k = self._build()

    def _build(self):
        m = self.mesh
        nt, ne = len(m.triangles), len(self.edges)
        tv = np.ascontiguousarray(m.corners.reshape(nt, 3, 3))
        tn = np.ascontiguousarray(m.normals().reshape(nt, 3))
        te1 = np.ascontiguousarray(tv[:, 1] - tv[:, 0])
        te2 = np.ascontiguousarray(tv[:, 2] - tv[:, 0])
        tne = np.zeros(nt, dtype=np.int32)
        tedge = -np.ones((nt, 3), dtype=np.int32)
        for ei, e in enumerate(self.edges):
            for t in e.triangles:
                tedge[t, tne[t]] = ei
                tne[t] += 1
        ea = np.array([e.pa for e in self.edges], dtype=float).reshape(ne, 3)
        eb = np.array([e.pb for e in self.edges], dtype=float).reshape(ne, 3)
        et = np.array([e.frame.t for e in self.edges], dtype=float).reshape(ne, 3)
        en = np.array([e.frame.n for e in self.edges], dtype=float).reshape(ne, 3)
        ebv = np.array([e.frame.b for e in self.edges], dtype=float).reshape(ne, 3)
        elen = np.array([e.length for e in self.edges], dtype=float)
        ephi = np.array([e.phi for e in self.edges], dtype=float)
        esgn = np.array([1.0 if e.bc == DIRICHLET else -1.0 for e in self.edges])
        etri = np.array([e.triangles for e in self.edges], dtype=np.int32).reshape(ne, 2)
        ec = np.array([e.pc for e in self.edges], dtype=float).reshape(ne, 2, 3)
        areas = m.areas()
        eh = np.zeros((ne, 2))
        ep = np.zeros((ne, 2))
        for ei, e in enumerate(self.edges):
            for s, t in enumerate(e.triangles):
                eh[ei, s] = 2.0 * areas[t] / e.length
                ep[ei, s] = 1.0 / tne[t]
        bvh = build_bvh(tv)
        self.bvh = bvh
        K = self.kernels
        self._iv = np.zeros((3 * MAXIV, 2))
        ptri = np.nonzero(tne > 0)[0].astype(np.int32)
        return K.KScene(tv, te1, te2, tn, tne, tedge, ea, eb, et, en, ebv, elen, ephi,
                        esgn, etri, ec, eh, ep, bvh["bmin"], bvh["bmax"], bvh["bleft"],
                        bvh["bfirst"], bvh["bcount"], bvh["border"], self.eps,
                        np.zeros(128, dtype=np.int32), self._iv,
                        np.zeros(2, dtype=np.int32), np.zeros(5), np.zeros(3),
                        ptri, np.zeros((2, max(len(ptri), 1))), np.full((2, 4), np.nan),
                        EMISSION_MODES.index(self.emission))

    def with_kernels(self, kernels):
        """Same scene bound to another kernel module (compiled or pure)."""
        return Scene(self.mesh, edges=self.edges, kernels=kernels, emission=self.emission)

    def with_emission(self, emission):
        """Same scene with another endpoint emission mode ("uniform" or "proxy")."""
        if emission == self.emission:
            return self
        return Scene(self.mesh, edges=self.edges, kernels=self.kernels, emission=emission)

    # -- queries ------------------------------------------------------------

    def intersect(self, ray: Ray, skip=(-1, -1)):
        o, d = ray.origin, ray.direction
        tri = self.k.ray_closest(o[0], o[1], o[2], d[0], d[1], d[2], skip[0], skip[1])
        if tri < 0:
            return None
        u, v, t = self.k.h_u, self.k.h_v, self.k.h_t
        return Hit(int(tri), (1.0 - u - v, u, v), float(t), o + t * d)

    def segment_visible(self, p, q):
        return not self.k.seg_blocked(p[0], p[1], p[2], q[0], q[1], q[2])

    def visible_subsegments(self, apex, seg_start, seg_end):
        a, p, q = (np.asarray(x, dtype=float) for x in (apex, seg_start, seg_end))
        if np.linalg.norm(q - p) <= 0:
            raise ValueError("degenerate segment")
        n = self.k.visible(0, a[0], a[1], a[2], p[0], p[1], p[2], q[0], q[1], q[2], -1, -1)
        iv = self._iv
        return [(float(iv[i, 0]), float(iv[i, 1])) for i in range(n)]


def _as_scene(mesh_or_scene):
    return mesh_or_scene if isinstance(mesh_or_scene, Scene) else Scene(mesh_or_scene)


def intersect(ray: Ray, mesh) -> Hit | None:
    """Nearest hit with positive distance (ties to the lowest triangle id)."""
    return _as_scene(mesh).intersect(ray)


def visible_subsegments(apex, seg_start, seg_end, mesh):
    """Sorted disjoint sub-intervals of [0, 1] of the segment visible from apex."""
    return _as_scene(mesh).visible_subsegments(apex, seg_start, seg_end)
