import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgetrace import _backend, scenes
from edgetrace.config import SimulationConfig
from edgetrace.geometry import Scene
from edgetrace.transport import (MediaTerm, group_pairing, irr_plan, measure_conversion,
                                 media_apply, outlier_metric, simulate, strategy_weights,
                                 suppress)


def test_media_apply():
    amp, delay = media_apply(2.0, 4.0)
    assert amp == pytest.approx(0.5)
    assert delay == pytest.approx(4.0 / 344.0)
    amp, _ = media_apply(1.0, 10.0, MediaTerm(absorption=0.1))
    assert amp == pytest.approx(math.exp(-1.0) / 10.0)
    with pytest.raises(ValueError):
        media_apply(1.0, 0.0)
    with pytest.raises(ValueError):
        MediaTerm(absorption=-1.0)


def test_suppress_closed_form():
    for co in (1e-3, 0.5, 1.0, 50.0, 100.0, 1e4):
        x = math.exp(-2 * co / 100.0)
        assert suppress(co) == pytest.approx((100.0 / co) * (1 - x) / (1 + x), rel=1e-12)


@given(st.floats(1e-6, 1e6), st.floats(1.0, 1e4))
def test_suppress_bounds(co, co_star):
    # tanh(u)/u lies in (0, 1] and C_s * C_o never exceeds C*
    cs = suppress(co, co_star)
    assert 0.0 < cs <= 1.0 + 1e-12
    assert cs * co <= co_star * (1 + 1e-12)


def test_outlier_metric_is_one_for_identical_points():
    assert outlier_metric(0.3, 0.3, 2.0, 2.0, 1.0) == pytest.approx(1.0)


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(0, 3), st.booleans(), st.floats(0.0, 10.0)),
                min_size=1, max_size=40))
def test_irr_conserves_amplitude(rows):
    parent = np.array([r[0] for r in rows])
    success = np.array([r[1] for r in rows])
    inten = np.array([r[2] if r[1] else 0.0 for r in rows])
    alive = np.ones(len(rows), bool)
    source, share = irr_plan(alive, success, parent, inten)
    for s in np.nonzero(success)[0]:
        copies = int(np.sum(source == s))
        assert share[s] == copies + 1
    for q in np.nonzero(source >= 0)[0]:
        assert not success[q]
        assert success[source[q]]
        assert parent[source[q]] == parent[q]
    for p in np.unique(parent):
        g = parent == p
        # every failure is refilled when the group has a success with positive weight
        if np.any(inten[g] > 0):
            assert np.all((source[g] >= 0) | success[g])


def test_irr_largest_remainder():
    alive = np.ones(8, bool)
    success = np.array([1, 0, 1, 0, 0, 1, 1, 0], bool)
    parent = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    inten = np.array([3.0, 0, 1, 0, 0, 1, 1, 0])
    source, share = irr_plan(alive, success, parent, inten)
    assert list(source) == [-1, 0, -1, 0, 5, -1, -1, 6]
    assert list(share[[0, 2, 5, 6]]) == [3.0, 1.0, 2.0, 2.0]


def test_group_pairing_stays_in_groups():
    perm = group_pairing(64, 16, np.random.default_rng(0))
    assert sorted(perm) == list(range(64))
    assert np.all(perm // 16 == np.arange(64) // 16)


def test_strategy_weights():
    w = strategy_weights([2.0, 3.0], [5.0, 7.0])
    p = np.array([5 * 7, 2 * 7, 2 * 3], float)
    assert w == pytest.approx(p / p.sum())
    assert strategy_weights([0.0, 3.0], [5.0, 0.0]).sum() == 0.0
    assert strategy_weights([1.0, 0.0], [1.0, 1.0], "uniform") == pytest.approx([0.5, 0.5, 0])
    with pytest.raises(ValueError):
        strategy_weights([1.0], [1.0], "power")


@settings(max_examples=200)
@given(st.lists(st.tuples(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6)), min_size=1,
                max_size=6))
def test_strategy_weights_partition_of_unity(dens):
    w = strategy_weights([d[0] for d in dens], [d[1] for d in dens])
    assert abs(w.sum() - 1.0) <= 1e-12
    assert np.all(w >= 0)


def test_measure_conversion_unoccluded_wedge(wedge_scene):
    # with nothing in the way the proxy measure integrates to the pick-weighted
    # area of the faces turned toward the viewer
    b, sc = wedge_scene
    e = sc.edges[0]
    s, w = np.polynomial.legendre.leggauss(64)
    s = 0.5 * (s + 1)
    viewer = b.source
    tot = sum(wi * 0.5 * measure_conversion(sc, 0, e.pa + si * (e.pb - e.pa), viewer)
              for si, wi in zip(s, w)) * e.length
    areas, normals = sc.mesh.areas(), sc.mesh.normals()
    facing = [t for t, c in zip(e.triangles, e.pc) if normals[t] @ (viewer - c) > 0]
    assert len(facing) == 1
    expect = sum(areas[t] / sum(1 for ed in sc.edges if t in ed.triangles) for t in facing)
    assert tot == pytest.approx(expect, rel=1e-3)


def test_empty_scene_is_direct_path_only():
    b = scenes.empty()
    cfg = SimulationConfig(samples=100)
    ir = simulate(b.mesh, b.source, b.listener, cfg)
    k = ir.bin_of(34.4 / 344.0)
    assert ir.pressure[k] == pytest.approx(1 / 34.4)
    assert np.count_nonzero(ir.pressure) == 1


def test_occluded_direct_path_is_dropped():
    b = scenes.cube()
    cfg = SimulationConfig(samples=3000, max_order=2)
    ir = simulate(Scene(b.mesh), b.source, b.listener, cfg)
    k = ir.bin_of(np.linalg.norm(b.listener - b.source) / 344.0)
    assert ir.offset[k] == 0.0
    assert np.any(ir.mean != 0)


def test_workers_do_not_change_bins(boxes_scene):
    b, sc = boxes_scene
    cfg = SimulationConfig(samples=6000, batch_size=1500, seed=3)
    a = simulate(sc, b.source, b.listener, cfg, workers=1)
    c = simulate(sc, b.source, b.listener, cfg, workers=2)
    assert np.array_equal(a.pressure, c.pressure)
    assert np.array_equal(a.variance, c.variance)


def test_seed_changes_result(boxes_scene):
    b, sc = boxes_scene
    a = simulate(sc, b.source, b.listener, SimulationConfig(samples=3000, seed=1))
    c = simulate(sc, b.source, b.listener, SimulationConfig(samples=3000, seed=2))
    assert not np.array_equal(a.pressure, c.pressure)


@pytest.mark.skipif(not _backend.COMPILED, reason="compiled kernels not built")
def test_pure_and_compiled_agree(wedge_scene):
    b, sc = wedge_scene
    cfg = SimulationConfig(samples=600, batch_size=300, ir_length=0.03)
    a = simulate(sc.with_kernels(_backend.load(pure=False)), b.source, b.listener, cfg)
    c = simulate(sc.with_kernels(_backend.load(pure=True)), b.source, b.listener, cfg)
    assert np.allclose(a.pressure, c.pressure, rtol=1e-9, atol=1e-12)
    assert not c.meta["compiled"] and a.meta["compiled"]


def test_logged_weights_match_balance_heuristic():
    b = scenes.double_wedge()
    sc = Scene(b.mesh, b.bc_of_material())
    cfg = SimulationConfig(samples=1500, max_order=2, ir_length=0.03, direct=False,
                           outlier_suppression=False)
    ir = simulate(sc, b.source, b.listener, cfg, log_cap=500)
    rows = 0
    for lp, meta, *_ in ir.meta["logs"]:
        for r in range(len(meta)):
            n, i = int(meta[r, 0]), int(meta[r, 1])
            w = strategy_weights(lp[r, 0, :n], lp[r, 1, :n])
            assert w[i] == pytest.approx(meta[r, 2], abs=1e-12)
            rows += 1
    assert rows > 0
