import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgetrace import scenes
from edgetrace.bedrf import DIRICHLET, NEUMANN, OutOfDomainError
from edgetrace.geometry import (Ray, Scene, TriangleMesh, angles_to_directions,
                                directions_to_angles, extract_convex_edges, intersect,
                                load_obj, visible_subsegments, wedge_frame)


def brute_force_hit(mesh, ray):
    """Moller-Trumbore over every triangle."""
    best = (None, math.inf)
    for ti, (a, b, c) in enumerate(mesh.corners):
        e1, e2 = b - a, c - a
        p = np.cross(ray.direction, e2)
        det = e1 @ p
        if abs(det) < 1e-14:
            continue
        s = ray.origin - a
        u = (s @ p) / det
        q = np.cross(s, e1)
        v = (ray.direction @ q) / det
        t = (e2 @ q) / det
        if u >= 0 and v >= 0 and u + v <= 1 and 1e-9 < t < best[1]:
            best = (ti, t)
    return best


def test_cube_edges():
    edges = extract_convex_edges(scenes.cube().mesh)
    assert len(edges) == 12
    for e in edges:
        assert e.phi == pytest.approx(math.pi / 4)
        assert e.length == pytest.approx(1.0)


def test_boxes_counts():
    b = scenes.boxes()
    assert len(b.mesh.triangles) == 26
    sc = Scene(b.mesh, b.bc_of_material())
    assert len(sc.edges) == 16
    assert all(e.bc == NEUMANN for e in sc.edges)


def test_builtin_wedges():
    assert len(Scene(scenes.single_wedge().mesh).edges) == 1
    assert len(Scene(scenes.double_wedge().mesh).edges) == 2
    b = scenes.slit()
    sc = Scene(b.mesh, b.bc_of_material())
    assert len(sc.edges) == 2
    assert all(e.bc == DIRICHLET for e in sc.edges)


def test_flat_and_open_edges_are_not_diffracting():
    quad = TriangleMesh(np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0.0]]),
                        np.array([[0, 1, 2], [0, 2, 3]]))
    assert extract_convex_edges(quad) == []


def test_inconsistent_winding_is_reported():
    mesh = TriangleMesh(np.array([[0, 0, 0], [0, 0, 1], [1, 0, 0], [0, 1, 0.0]]),
                        np.array([[0, 1, 2], [0, 1, 3]]))
    report = []
    with pytest.warns(UserWarning):
        assert extract_convex_edges(mesh, report=report) == []
    assert any("winding" in r for r in report)


def test_dirichlet_needs_both_faces():
    b = scenes.single_wedge()
    names = b.mesh.material_names
    edges = extract_convex_edges(b.mesh, bc_of_material={names[0]: DIRICHLET})
    assert edges[0].bc == DIRICHLET
    m = TriangleMesh(b.mesh.vertices, b.mesh.triangles,
                     np.arange(len(b.mesh.triangles)) % 2, ["soft", "hard"])
    assert extract_convex_edges(m, bc_of_material={"soft": DIRICHLET})[0].bc == NEUMANN


def test_intersect_matches_brute_force(boxes_scene):
    b, sc = boxes_scene
    rng = np.random.default_rng(0)
    for _ in range(500):
        o = rng.uniform([-25, -25, -1], [45, 25, 10])
        ray = Ray(o, rng.normal(size=3))
        hit = sc.intersect(ray)
        tri, t = brute_force_hit(b.mesh, ray)
        if tri is None:
            assert hit is None
        else:
            assert hit is not None
            assert hit.distance == pytest.approx(t, rel=1e-9, abs=1e-9)
            assert np.allclose(hit.point, o + t * ray.direction)


def test_module_level_intersect_and_visibility():
    mesh = scenes.cube().mesh
    hit = intersect(Ray([-2, 0.1, 0.2], [1, 0, 0]), mesh)
    assert hit.distance == pytest.approx(1.5)
    assert intersect(Ray([-2, 0.1, 0.2], [-1, 0, 0]), mesh) is None
    # a segment passing behind the cube is half hidden from the apex
    iv = visible_subsegments([-2, 0, 0], [2, -4, 0.2], [2, 4, 0.2], mesh)
    assert iv[0][0] == pytest.approx(0.0)
    assert iv[-1][1] == pytest.approx(1.0)
    hidden = 1.0 - sum(b - a for a, b in iv)
    assert hidden == pytest.approx(1 / 3, abs=1e-6)


def test_ray_rejects_zero_direction():
    with pytest.raises(ValueError):
        Ray([0, 0, 0], [0, 0, 0])


@settings(max_examples=200)
@given(st.floats(-0.99, 0.99), st.floats(-1.5, 1.5), st.floats(-0.99, 0.99),
       st.floats(-1.5, 1.5))
def test_angle_round_trip(a, pi_, b, po):
    e = Scene(scenes.single_wedge().mesh).edges[0]
    lim = math.pi - e.phi
    vi, vo = angles_to_directions(e.frame, a * lim, pi_, b * lim, po)
    out = directions_to_angles(e.frame, vi, vo)
    assert out == pytest.approx((a * lim, pi_, b * lim, po), abs=1e-9)


def test_direction_into_solid_is_rejected():
    e = Scene(scenes.single_wedge().mesh).edges[0]
    with pytest.raises(OutOfDomainError):
        directions_to_angles(e.frame, e.frame.n, -e.frame.n)


def test_wedge_frame_checks_origin():
    e = Scene(scenes.single_wedge().mesh).edges[0]
    (n, t, bv), phi = wedge_frame(e, 0.5 * (e.pa + e.pb))
    assert phi == pytest.approx(e.phi)
    assert np.allclose(np.cross(t, n), bv)
    with pytest.raises(ValueError):
        wedge_frame(e, e.pa + 5 * e.frame.n)


def test_load_obj(tmp_path):
    p = tmp_path / "tet.obj"
    p.write_text("# tetra\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
                 "usemtl hard\nf 1 3 2\nf 1 2 4\nusemtl soft\nf 1 4 3\nf 2/1 3/1 4/1\n")
    m = load_obj(p)
    assert m.triangles.shape == (4, 3)
    assert m.material_names == ["default", "hard", "soft"]
    assert list(m.materials) == [1, 1, 2, 2]
    assert len(extract_convex_edges(m)) == 6


def test_load_obj_fans_polygons_and_reports_errors(tmp_path):
    p = tmp_path / "quad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    assert load_obj(p).triangles.shape == (2, 3)
    bad = tmp_path / "bad.obj"
    bad.write_text("v 0 0 zero\n")
    with pytest.raises(ValueError, match="bad.obj:1"):
        load_obj(bad)


def test_degenerate_triangles_are_dropped():
    m = TriangleMesh(np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0.0]]), np.array([[0, 1, 2]]))
    with pytest.warns(UserWarning):
        assert len(Scene(m).mesh.triangles) == 0
