import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from edgetrace import oracles
from edgetrace.bedrf import DIRICHLET, NEUMANN, kappa


@given(st.floats(-3, 3), st.floats(0.1, 6.0), st.floats(0, 2 * math.pi))
def test_fc_is_the_arc_indicator_on_the_circle(t0, width, ang):
    t1 = t0 + width
    x = cmath.exp(1j * ang)
    rel = (ang - t0) % (2 * math.pi)
    if min(abs(rel), abs(rel - width), abs(rel - 2 * math.pi)) < 1e-6:
        return
    inside = rel < width
    assert oracles.fc_complex(t0, t1, x) == pytest.approx(1.0 if inside else 0.0, abs=1e-9)


@given(st.floats(-3, 3), st.floats(0.1, 3.0), st.floats(0.05, 0.95), st.floats(-3, 3))
def test_fc_real_matches_complex(t0, width, rad, ang):
    x = rad * cmath.exp(1j * ang)
    a = oracles.fc_complex(t0, t0 + width, x)
    b = oracles.fc_real(t0, t0 + width, x)
    assert a == pytest.approx(b, abs=1e-9)
    assert -1e-12 <= a <= 1 + 1e-12


def test_fc_rejects_outside_points():
    with pytest.raises(ValueError):
        oracles.fc_complex(0.0, 1.0, 2.0)


def test_splat_linear_conserves_mass():
    rng = np.random.default_rng(0)
    lo = rng.uniform(0.001, 0.01, 100)
    hi = lo + rng.uniform(0, 0.001, 100)
    m = rng.normal(size=100)
    out = oracles.splat_linear(lo, hi, m, 48000.0, 1000)
    assert out.sum() == pytest.approx(m.sum())
    one = oracles.splat_linear(np.array([2.0 / 1000]), np.array([2.0 / 1000]), np.array([3.0]),
                               1000.0, 5)
    assert list(one) == [0, 0, 3.0, 0, 0]


def test_btm_beta_dirichlet_subtracts_images():
    args = (0.7, 2.1, 1.3, kappa(math.pi / 4))
    n = oracles.btm_beta(*args, NEUMANN)
    d = oracles.btm_beta(*args, DIRICHLET)
    nu = args[3]
    img = sum(math.sin(nu * p) / (math.cosh(nu * math.acosh(1.3)) - math.cos(nu * p))
              for p in (math.pi + 0.7 + 2.1, math.pi - 0.7 - 2.1))
    assert n - d == pytest.approx(2 * img)


def test_keller_ir_matches_edge_quadrature():
    res = __import__("edgetrace.validation", fromlist=["check_keller"]).check_keller()
    assert res.passed, res.detail


def test_single_slit_pattern():
    ys = np.array([0.0, 1.0, 4.0])
    p = oracles.single_slit_pattern(0.5, 0.1, 20.0, ys)
    assert p[0] == 1.0
    # first zero where sin(theta) = lambda / w
    y0 = 20.0 * 0.2 / math.sqrt(1 - 0.04)
    assert oracles.single_slit_pattern(0.5, 0.1, 20.0, [y0])[0] == pytest.approx(0, abs=1e-20)


def test_bruteforce_projection_without_occluders_matches_profile():
    tri = (np.array([0, 0, 0.0]), np.array([0, 0, 2.0]), np.array([1.0, 0, 0.5]))
    rng = np.random.default_rng(3)
    counts, edges, acc = oracles.bruteforce_triangle_projection(tri, [], [3, 1, 1], 40000, rng, 10)
    assert acc == 40000
    # projection through c is uniform in the edge parameter
    assert np.all(np.abs(counts - 4000) < 4 * math.sqrt(4000))
    prof = oracles.projected_density_profile(tri, [], [3, 1, 1], [0.25, 0.75], n_q=200)
    assert prof == pytest.approx([1.0, 1.0])


def test_refine_reports_non_convergence():
    calls = iter(range(100))
    with pytest.raises(oracles.QuadratureError):
        oracles._refine(lambda n: np.array([float(next(calls))]), 4, 1e-9, 16, "test")
