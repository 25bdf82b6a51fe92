import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgetrace import oracles
from edgetrace.geometry import EdgeFrame, angles_to_directions
from edgetrace.bedrf import (DIRICHLET, NEUMANN, OutOfDomainError, SingularityError,
                             WedgeAngles, bedrf_eval, bedrf_terms, df_dr, f, kappa,
                             keller_time_solution, r_param, shadow_boundaries)

mp.mp.dps = 50


def f_mp(t0, t1, th, rl, kap):
    """Arc function at 50 digits with the branch anchored on the denominator sign."""
    t0, t1, th, rl, kap = map(mp.mpf, (t0, t1, th, rl, kap))
    half = kap * (t0 - t1) / 2
    num = mp.sinh(kap * rl) * mp.sin(half)
    den = mp.cos(kap * (th - (t0 + t1) / 2)) - mp.cosh(kap * rl) * mp.cos(half)
    val = mp.atan(num / den)
    if den < 0:
        val += mp.pi if num > 0 else -mp.pi
    return val / mp.pi


def df_mp(t0, t1, th, rl, kap):
    return mp.diff(lambda x: f_mp(t0, t1, th, x, kap), mp.mpf(rl))


def rho_mp(ti, pi_, to, po, phi, sgn):
    kap = mp.pi / (2 * mp.pi - 2 * mp.mpf(phi))
    si, so = mp.sin(pi_), mp.sin(po)
    r = (1 - si * so - abs(si - so)) / (mp.cos(pi_) * mp.cos(po))
    rl = mp.log(r)
    up = df_mp(ti - mp.pi, ti + mp.pi, to, rl, kap)
    lo = df_mp(-ti - mp.pi + 2 * mp.mpf(phi), -ti + mp.pi - 2 * mp.mpf(phi), to, rl, kap)
    return (up + sgn * lo) / 2


# -- kappa, r -------------------------------------------------------------------

def test_kappa_examples():
    assert kappa(math.pi / 4) == pytest.approx(2 / 3, rel=1e-15)
    assert kappa(math.pi / 3) == pytest.approx(3 / 4, rel=1e-15)
    assert kappa(1e-12) == pytest.approx(0.5, rel=1e-9)


@pytest.mark.parametrize("phi", [-0.1, math.pi / 2, 2.0])
def test_kappa_out_of_range(phi):
    with pytest.raises(OutOfDomainError):
        kappa(phi)


def test_r_param_examples():
    assert r_param(0.3, 0.3) == pytest.approx(1.0, abs=1e-15)
    assert r_param(0.0, math.pi / 6) == pytest.approx(1 / math.sqrt(3), rel=1e-14)
    assert r_param(0.2, math.pi / 2) == 0.0
    assert r_param(0.2, math.pi / 2 - 1e-7) < 1e-6


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_r_param_range_and_symmetry(a, b):
    r = r_param(a, b)
    assert 0.0 <= r <= 1.0
    assert r == pytest.approx(r_param(b, a), abs=1e-15)


# -- f and its derivative ---------------------------------------------------------

def test_f_trivial_zeros():
    assert f(0.3, 1.2, 0.1, 0.0, 0.7) == 0.0
    assert f(0.8, 0.8, -0.4, -1.3, 0.6) == 0.0
    assert df_dr(0.8, 0.8, -0.4, -1.3, 0.6) == 0.0


def test_f_singular_example_is_signalled():
    # (-pi/2, 3pi/2, pi/4, ln(1/sqrt3), 2/3) sits where both the numerator
    # and the denominator vanish to double precision
    try:
        v = f(-math.pi / 2, 3 * math.pi / 2, math.pi / 4, math.log(1 / math.sqrt(3)), 2 / 3)
    except SingularityError:
        return
    assert math.isfinite(v)


@pytest.mark.parametrize("args", [
    (-math.pi / 2, 3 * math.pi / 2, math.pi / 4 + 0.1, math.log(1 / math.sqrt(3)), 2 / 3),
    (-2.0, 2.5, 0.3, -0.7, 0.6),
    (0.4, -1.1, 2.0, -2.2, 0.9),
    (-3.5, 2.9, -1.0, -0.1, 0.55),
])
def test_f_matches_high_precision(args):
    assert f(*args) == pytest.approx(float(f_mp(*args)), rel=1e-12, abs=1e-14)
    assert df_dr(*args) == pytest.approx(float(df_mp(*args)), rel=1e-10, abs=1e-13)


@settings(max_examples=200)
@given(st.floats(-3.0, 3.0), st.floats(0.05, 3.0), st.floats(-2.5, 2.5),
       st.floats(-3.0, -0.05), st.floats(0.52, 0.98))
def test_df_dr_matches_central_difference(t0, width, th, rl, kap):
    t1 = t0 + width
    h = 1e-6
    try:
        an = df_dr(t0, t1, th, rl, kap)
        fd = (f(t0, t1, th, rl + h, kap) - f(t0, t1, th, rl - h, kap)) / (2 * h)
    except SingularityError:
        return
    if abs(an) > 1e3:
        return  # within the singular neighbourhood of a shadow boundary
    assert an == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_f_bounded_and_continuous_in_r():
    prev = None
    for q in range(1, 400):
        v = f(-2.0, 2.5, 0.3, -q * 0.01, 0.6)
        assert -1.0 < v < 1.0
        if prev is not None:
            assert abs(v - prev) < 0.05
        prev = v


def test_df_dr_decays_at_small_r():
    assert abs(df_dr(-2.0, 2.5, 0.3, -60.0, 0.6)) < 1e-10


# -- shadow boundaries --------------------------------------------------------------

def test_shadow_boundary_examples():
    w = shadow_boundaries(math.pi / 2, math.pi / 4)
    assert (w.lu, w.lr, w.ru, w.rr) == pytest.approx((-math.pi / 2, -math.pi, 3 * math.pi / 2, 0))
    w = shadow_boundaries(math.pi / 3, math.pi / 4)
    assert (w.lu, w.lr, w.ru, w.rr) == pytest.approx(
        (-2 * math.pi / 3, -5 * math.pi / 6, 4 * math.pi / 3, math.pi / 6))


@given(st.floats(0.05, 1.5), st.floats(-0.99, 0.99))
def test_shadow_boundaries_symmetric_about_bisector(phi, frac):
    ti = frac * (math.pi - phi)
    w = shadow_boundaries(ti, phi)
    assert w.ru - w.lu == pytest.approx(2 * math.pi)
    assert w.rr - w.lr == pytest.approx(2 * math.pi - 4 * phi)
    assert (w.lu + w.ru) / 2 == pytest.approx(ti)
    assert (w.lr + w.rr) / 2 == pytest.approx(-ti)


# -- BEDRF ----------------------------------------------------------------------------

def test_bedrf_figure_configuration_high_precision():
    a = WedgeAngles(math.pi / 2, 0.0, 0.0, 0.0, math.pi / 4)
    with pytest.raises(SingularityError):
        bedrf_eval(a, DIRICHLET)  # on the Keller cone with r = 1 exactly
    a = WedgeAngles(math.pi / 2, 0.0, 0.0, 0.2, math.pi / 4)
    for bc, sgn in ((DIRICHLET, 1), (NEUMANN, -1)):
        ref = float(rho_mp(math.pi / 2, 0.0, 0.0, 0.2, math.pi / 4, sgn))
        assert bedrf_eval(a, bc) == pytest.approx(ref, rel=1e-10)


def test_bedrf_sign_structure():
    a = WedgeAngles(0.7, 0.2, -1.4, -0.3, 0.5)
    up, lo = bedrf_terms(a)
    assert bedrf_eval(a, DIRICHLET) == pytest.approx(up + lo, rel=1e-13)
    assert bedrf_eval(a, NEUMANN) == pytest.approx(up - lo, rel=1e-13)


@pytest.mark.parametrize("bc", [DIRICHLET, NEUMANN])
def test_bedrf_matches_btm(bc):
    phi = math.pi / 4
    n, t = np.array([1.0, 0, 0]), np.array([0, 0, 1.0])
    w = oracles.Wedge(np.array([0, 0, -5.0]), np.array([0, 0, 5.0]), n, phi, bc)
    frame = EdgeFrame(n, t, np.cross(t, n), phi)
    for ti, pi_, to, po in [(0.6, 0.2, -1.9, -0.1), (-1.0, -0.3, 2.0, 0.4),
                            (2.2, 0.5, 0.1, 0.5)]:
        ours = bedrf_eval(WedgeAngles(ti, pi_, to, po, phi), bc)
        vi, vo = angles_to_directions(frame, ti, pi_, to, po)
        ref = oracles.btm_rho(w, np.zeros(3), -vi, vo)
        assert ours == pytest.approx(float(np.squeeze(ref)), rel=1e-8)


def test_bedrf_degenerate_is_zero():
    a = WedgeAngles(0.5, 0.3, 1.0, math.pi / 2, 0.4)
    assert bedrf_eval(a, DIRICHLET) == 0.0


@settings(max_examples=300)
@given(st.floats(0.02, 1.55), st.floats(-0.999, 0.999), st.floats(-0.999, 0.999),
       st.floats(-1.56, 1.56), st.floats(-1.56, 1.56), st.sampled_from([DIRICHLET, NEUMANN]))
def test_reciprocity_property(phi, a, b, pi_, po, bc):
    lim = math.pi - phi
    ang = WedgeAngles(a * lim, pi_, b * lim, po, phi)
    try:
        x = bedrf_eval(ang, bc)
        y = bedrf_eval(ang.swapped(), bc)
    except SingularityError:
        return
    assert abs(x - y) <= 1e-9 * max(1.0, abs(x))


def test_wedge_angles_validate():
    with pytest.raises(OutOfDomainError):
        WedgeAngles(3.0, 0.0, 0.0, 0.0, math.pi / 4)
    with pytest.raises(OutOfDomainError):
        WedgeAngles(0.0, 0.0, 0.0, 0.0, 1.6)


# -- Keller closed form -------------------------------------------------------------

def test_keller_causal_and_decaying():
    args = (7 * math.pi / 12, 0.0, -math.pi / 2, 1.0, math.pi / 4, DIRICHLET)
    assert keller_time_solution(*args, t=0.5 / 344.0) == 0.0
    early = abs(keller_time_solution(*args, t=1.0001 / 344.0))
    late = abs(keller_time_solution(*args, t=50.0 / 344.0))
    assert early > 0.0
    assert late < 1e-3 * early


@pytest.mark.parametrize("phi", [0.3, math.pi / 4, 1.2])
def test_dirichlet_vanishes_on_faces(phi):
    # observed property of the construction rather than a stated contract
    for ti, pi_, po in [(0.5, 0.2, -0.1), (-1.0, -0.3, 0.4)]:
        for side in (1, -1):
            a = WedgeAngles(ti, pi_, side * (math.pi - phi), po, phi)
            assert abs(bedrf_eval(a, DIRICHLET)) < 1e-12
            assert abs(bedrf_eval(a, NEUMANN)) > 1e-3
