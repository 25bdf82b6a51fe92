"""Importance sampling of BEDRF outgoing directions and of surface bounces.

Edge directions use ``p(theta_o, phi_o) = p_theta * p_phi / cos(phi_o)`` with a
uniform ``p_theta`` and a ``p_phi`` that blends a uniform floor with a lobe
shaped by the closed-form CDF ``P_c`` in ``r^kappa``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels as _k
from .bedrf import OutOfDomainError, bc_sign


@dataclass(frozen=True)
class EdgeSamplerParams:
    theta_a: float
    theta_b: float
    a: float
    x: float
    kappa: float


@dataclass(frozen=True)
class DirectionSample:
    theta_o: float
    phi_o: float
    pdf: float
    branch: str


@dataclass(frozen=True)
class SurfaceSample:
    direction: np.ndarray
    pdf: float
    specular: bool
    weight: float


@dataclass(frozen=True)
class Material:
    name: str = "default"
    bc: str = "neumann"
    reflection: float = 1.0
    specularity: float = 0.0

    def __post_init__(self):
        bc_sign(self.bc)
        if not 0.0 <= self.reflection <= 1.0 or not 0.0 <= self.specularity <= 1.0:
            raise ValueError("reflection and specularity must lie in [0, 1]")


BRANCHES = ("uniform", "lower", "upper")


def p_theta(phi: float) -> float:
    return 1.0 / (2.0 * (math.pi - phi))


def compute_params(theta_i, phi_i, phi, bc, theta_o) -> EdgeSamplerParams:
    """Sampler shape for one incident direction and outgoing ``theta_o``.

    ``x`` is the endpoint slope of the BEDRF's phi-profile, which depends on
    ``theta_o``; the lobe is matched to it, so ``theta_o`` is an input here.
    """
    out = np.zeros(5)
    _k.edge_params(theta_i, phi_i, theta_o, phi, bc_sign(bc), out)
    return EdgeSamplerParams(*map(float, out))


def pc_cdf(x, theta_a, theta_b):
    return _k.pc_cdf(x, theta_a, theta_b)


def pc_pdf(x, theta_a, theta_b):
    return _k.pc_pdf(x, theta_a, theta_b)


def pc_inv(u, theta_a, theta_b):
    return _k.pc_inv(u, theta_a, theta_b)


def pc_slope_at_one(theta_a, theta_b):
    """Closed form of dP_c/dx at x = 1."""
    cb, ca = math.cos(theta_b), math.cos(theta_a)
    return 2.0 * math.sin(theta_a) * cb / (math.pi * (cb * cb - ca * ca))


def p_phi(theta_i, phi_i, theta_o, phi_o, phi, bc) -> float:
    """Density of ``phi_o`` given ``theta_o`` (integrates to 1 over (-pi/2, pi/2))."""
    return pdf(theta_i, phi_i, theta_o, phi_o, phi, bc) * math.cos(phi_o) / p_theta(phi)


def pdf(theta_i, phi_i, theta_o, phi_o, phi, bc) -> float:
    """Solid-angle density of the edge sampler."""
    return _k.edge_pdf(theta_i, phi_i, theta_o, phi_o, phi, bc_sign(bc), np.zeros(5))


def pdf_grid(theta_i, phi_i, theta_o, phi_o, phi, bc):
    """Vectorised ``pdf`` over broadcast arrays of (theta_o, phi_o)."""
    to, po = np.broadcast_arrays(np.asarray(theta_o, float), np.asarray(phi_o, float))
    out = np.empty(to.shape)
    par = np.zeros(5)
    sgn = bc_sign(bc)
    for idx in np.ndindex(to.shape):
        out[idx] = _k.edge_pdf(theta_i, phi_i, to[idx], po[idx], phi, sgn, par)
    return out


def sample(theta_i, phi_i, phi, bc, rng: np.random.Generator) -> DirectionSample:
    """Draw theta_o uniformly, then phi_o from the blended lobe."""
    lim = math.pi - phi
    if abs(theta_i) > lim:
        raise OutOfDomainError("incident theta inside the wedge")
    u = rng.random(4)
    par, out = np.zeros(5), np.zeros(3)
    br = _k.edge_sample(theta_i, phi_i, phi, bc_sign(bc), u[0], u[1], u[2], u[3], par, out)
    return DirectionSample(float(out[0]), float(out[1]), float(out[2]), BRANCHES[br])


def sample_many(theta_i, phi_i, phi, bc, u: np.ndarray):
    """Deterministic batch of samples from uniforms ``u`` of shape (n, 4)."""
    par, out = np.zeros(5), np.zeros(3)
    sgn = bc_sign(bc)
    res = np.empty((len(u), 3))
    br = np.empty(len(u), dtype=np.int64)
    for i, (a, b, c, d) in enumerate(u):
        br[i] = _k.edge_sample(theta_i, phi_i, phi, sgn, a, b, c, d, par, out)
        res[i] = out
    return res[:, 0], res[:, 1], res[:, 2], br


def _basis(n):
    a = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t = np.cross(n, a)
    t /= np.linalg.norm(t)
    return t, np.cross(n, t)


def sample_surface(incident, normal, material: Material, rng: np.random.Generator):
    """Specular/diffuse mixture; the specular branch is a delta (pdf = inf)."""
    d = np.asarray(incident, dtype=float)
    n = np.asarray(normal, dtype=float)
    if np.dot(d, n) > 0.0:
        n = -n
    if rng.random() < material.specularity:
        r = d - 2.0 * np.dot(d, n) * n
        return SurfaceSample(r / np.linalg.norm(r), math.inf, True, material.reflection)
    u1, u2 = rng.random(2)
    rad = math.sqrt(u1)
    ang = 2.0 * math.pi * u2
    t, b = _basis(n)
    z = math.sqrt(max(0.0, 1.0 - u1))
    w = rad * math.cos(ang) * t + rad * math.sin(ang) * b + z * n
    return SurfaceSample(w, z / math.pi, False, material.reflection)


def surface_pdf(outgoing, normal, incident, material: Material) -> float:
    """Density of the diffuse branch (the specular part has no density)."""
    n = np.asarray(normal, dtype=float)
    if np.dot(incident, n) > 0.0:
        n = -n
    c = float(np.dot(outgoing, n))
    return (1.0 - material.specularity) * max(c, 0.0) / math.pi
