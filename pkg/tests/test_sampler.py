import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from edgetrace import validation
from edgetrace.bedrf import DIRICHLET, NEUMANN, OutOfDomainError, kappa
from edgetrace.sampler import (Material, compute_params, p_phi, p_theta, pc_cdf, pc_inv,
                               pc_pdf, pc_slope_at_one, pdf, sample, sample_many,
                               sample_surface, surface_pdf)


def test_p_theta_is_uniform_over_exterior():
    for phi in (0.1, math.pi / 4, 1.4):
        assert p_theta(phi) * 2 * (math.pi - phi) == pytest.approx(1.0)


@settings(max_examples=50)
@given(st.floats(0.3, 1.4), st.floats(0.05, 0.95))
def test_pc_is_a_cdf(theta_a, frac):
    theta_b = frac * theta_a
    assert pc_cdf(0.0, theta_a, theta_b) == pytest.approx(0.0, abs=1e-12)
    assert pc_cdf(1.0, theta_a, theta_b) == pytest.approx(1.0, abs=1e-12)
    xs = np.linspace(0, 1, 50)
    vals = [pc_cdf(x, theta_a, theta_b) for x in xs]
    assert np.all(np.diff(vals) >= -1e-14)
    mass, _ = integrate.quad(lambda x: pc_pdf(x, theta_a, theta_b), 0, 1)
    assert mass == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=50)
@given(st.floats(0.3, 1.4), st.floats(0.05, 0.95), st.floats(0.001, 0.999))
def test_pc_inverse_round_trip(theta_a, frac, u):
    theta_b = frac * theta_a
    x = pc_inv(u, theta_a, theta_b)
    assert 0.0 <= x <= 1.0
    assert pc_cdf(x, theta_a, theta_b) == pytest.approx(u, abs=1e-9)


def test_pc_slope_closed_form():
    ta, tb = 1.1, 0.4
    h = 1e-6
    fd = (pc_cdf(1.0, ta, tb) - pc_cdf(1.0 - h, ta, tb)) / h
    assert pc_slope_at_one(ta, tb) == pytest.approx(fd, rel=1e-4)


@pytest.mark.parametrize("bc", [DIRICHLET, NEUMANN])
def test_params_invariants(bc):
    rng = np.random.default_rng(0)
    for _ in range(100):
        phi = rng.uniform(0.05, 1.5)
        ti, to = rng.uniform(phi - math.pi, math.pi - phi, 2) * 0.99
        p = compute_params(ti, rng.uniform(-1.4, 1.4), phi, bc, to)
        assert 0.0 < p.theta_b < p.theta_a < math.pi / 2
        assert 0.0 <= p.a <= 1.0
        assert p.kappa == pytest.approx(kappa(phi))


def test_p_phi_integrates_to_one():
    for ti, pi_, to, phi, bc in [(0.4, 0.3, -1.0, math.pi / 4, DIRICHLET),
                                 (-1.2, -0.6, 2.0, 0.3, NEUMANN)]:
        a, _ = integrate.quad(lambda po: p_phi(ti, pi_, to, po, phi, bc), -math.pi / 2, pi_,
                              limit=200)
        b, _ = integrate.quad(lambda po: p_phi(ti, pi_, to, po, phi, bc), pi_, math.pi / 2,
                              limit=200)
        assert a + b == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("case", validation.random_sampler_params(6, seed=9))
def test_solid_angle_mass_is_one(case):
    assert validation.sampler_mass(*case) == pytest.approx(1.0, abs=1e-3)


def test_sample_reports_its_pdf():
    rng = np.random.default_rng(5)
    for _ in range(200):
        s = sample(0.4, 0.3, math.pi / 4, DIRICHLET, rng)
        assert abs(s.theta_o) <= math.pi - math.pi / 4
        assert abs(s.phi_o) <= math.pi / 2
        assert s.pdf == pytest.approx(pdf(0.4, 0.3, s.theta_o, s.phi_o, math.pi / 4, DIRICHLET),
                                      rel=1e-10)


def test_sample_rejects_interior_incidence():
    with pytest.raises(OutOfDomainError):
        sample(3.0, 0.0, math.pi / 4, DIRICHLET, np.random.default_rng(0))


def test_sample_many_is_deterministic():
    u = np.random.default_rng(3).random((100, 4))
    a = sample_many(0.2, -0.1, 0.5, NEUMANN, u)
    b = sample_many(0.2, -0.1, 0.5, NEUMANN, u)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_histogram_matches_density_small():
    chi2, dof, p = validation.sampler_chi_square(0.4, 0.3, math.pi / 4, DIRICHLET, 100_000,
                                                 seed=8, bins=(12, 12), gl=8)
    assert p > 1e-3


# -- surfaces -------------------------------------------------------------------------

def test_diffuse_surface_is_cosine_weighted():
    rng = np.random.default_rng(2)
    m = Material(reflection=0.8)
    n = np.array([0.0, 0.0, 1.0])
    cos = []
    for _ in range(4000):
        s = sample_surface(np.array([0.3, 0.0, -1.0]), n, m, rng)
        assert not s.specular
        assert np.linalg.norm(s.direction) == pytest.approx(1.0)
        c = s.direction @ n
        assert c >= 0
        assert s.pdf == pytest.approx(c / math.pi)
        assert surface_pdf(s.direction, n, np.array([0.3, 0.0, -1.0]), m) == pytest.approx(s.pdf)
        cos.append(c)
    # E[cos] under a cosine lobe is 2/3
    assert np.mean(cos) == pytest.approx(2 / 3, abs=0.02)


def test_specular_surface_mirrors():
    m = Material(specularity=1.0)
    d = np.array([1.0, 0.0, -1.0]) / math.sqrt(2)
    s = sample_surface(d, np.array([0, 0, 1.0]), m, np.random.default_rng(0))
    assert s.specular and math.isinf(s.pdf)
    assert s.direction == pytest.approx(np.array([1.0, 0.0, 1.0]) / math.sqrt(2))


def test_material_validation():
    with pytest.raises(ValueError):
        Material(bc="soft")
    with pytest.raises(ValueError):
        Material(reflection=1.5)
