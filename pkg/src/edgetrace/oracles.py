"""Independent reference computations for tests and the ``validate`` command.

Nothing here calls the compiled kernels. The wedge integrand is evaluated in
the Biot-Tolstoy-Medwin secondary-source form (four ``beta`` terms in face
angles and the hyperbolic parameter ``eta``), which is algebraically distinct
from the shadow-boundary form used by ``bedrf``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .bedrf import DIRICHLET, NEUMANN, keller_time_solution


class QuadratureError(RuntimeError):
    """Binned quadrature did not converge to the requested tolerance."""


# ---------------------------------------------------------------------------
# Arc indicator on the unit disk
# ---------------------------------------------------------------------------

def fc_complex(theta0: float, theta1: float, x: complex) -> float:
    """``(1/pi)(arg((x - e^{i t1}) / (x - e^{i t0})) - (t1 - t0)/2)``."""
    x = complex(x)
    if abs(x) > 1 + 1e-12:
        raise ValueError("point outside the unit disk")
    p0, p1 = cmath.exp(1j * theta0), cmath.exp(1j * theta1)
    if abs(x - p0) < 1e-12 or abs(x - p1) < 1e-12:
        raise ValueError("singular boundary point")
    return _measure((cmath.phase((x - p1) / (x - p0)) - 0.5 * (theta1 - theta0)) / math.pi)


def _measure(v):
    """Map onto the harmonic-measure branch: values lie in [0, 1], so reduce mod 2."""
    v = v % 2.0
    return v - 2.0 if v > 1.5 else v


def fc_real(theta0: float, theta1: float, x: complex) -> float:
    """The same function written with real arctangents of the two chords."""
    x = complex(x)
    if abs(x) > 1 + 1e-12:
        raise ValueError("point outside the unit disk")
    u, v = x.real, x.imag
    a1 = math.atan2(v - math.sin(theta1), u - math.cos(theta1))
    a0 = math.atan2(v - math.sin(theta0), u - math.cos(theta0))
    if math.hypot(u - math.cos(theta0), v - math.sin(theta0)) < 1e-12 or \
            math.hypot(u - math.cos(theta1), v - math.sin(theta1)) < 1e-12:
        raise ValueError("singular boundary point")
    return _measure((a1 - a0 - 0.5 * (theta1 - theta0)) / math.pi)


# ---------------------------------------------------------------------------
# Secondary-source wedge integrand
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Wedge:
    """Straight wedge edge from ``a`` to ``b`` with air bisector ``n`` and half angle ``phi``."""
    a: np.ndarray
    b: np.ndarray
    n: np.ndarray
    phi: float
    bc: str = NEUMANN

    @classmethod
    def from_edge(cls, edge):
        return cls(np.asarray(edge.pa, float), np.asarray(edge.pb, float),
                   np.asarray(edge.frame.n, float), edge.phi, edge.bc)

    @property
    def t(self):
        d = self.b - self.a
        return d / np.linalg.norm(d)

    @property
    def bvec(self):
        return np.cross(self.t, self.n)

    @property
    def length(self):
        return float(np.linalg.norm(self.b - self.a))

    def point(self, s):
        return self.a[None, :] + np.asarray(s, float)[:, None] * self.t[None, :]


def btm_beta(theta_s, theta_r, cosh_eta, nu, bc):
    """Sum of the four ``sin(nu p)/(cosh(nu eta) - cos(nu p))`` terms.

    ``theta_s`` and ``theta_r`` are measured from one face through the air
    (in ``[0, pi/nu]``). Rigid faces add all four terms; pressure-release
    faces subtract the two image terms ``pi +- (theta_s + theta_r)``.
    """
    eta = np.arccosh(np.maximum(cosh_eta, 1.0))
    ch = np.cosh(nu * eta)
    img = 1.0 if bc == NEUMANN else -1.0
    tot = 0.0
    for p, w in ((math.pi + theta_s + theta_r, img), (math.pi + theta_s - theta_r, 1.0),
                 (math.pi - theta_s + theta_r, 1.0), (math.pi - theta_s - theta_r, img)):
        tot = tot + w * np.sin(nu * p) / (ch - np.cos(nu * p))
    return tot


def btm_rho(wedge: Wedge, x, to_source, to_listener):
    """Secondary-source density ``-(nu / 4 pi) beta`` at edge points ``x``.

    ``to_source`` / ``to_listener`` are unit vectors from ``x`` toward the
    incoming and outgoing neighbours (arrays of shape (k, 3)).
    """
    nu = math.pi / (2 * math.pi - 2 * wedge.phi)
    n, t, b = wedge.n, wedge.t, wedge.bvec
    off = math.pi - wedge.phi

    def face_angle(u):
        return np.arctan2(u @ b, u @ n) + off

    us = np.atleast_2d(to_source)
    ul = np.atleast_2d(to_listener)
    ss, sl = -(us @ t), -(ul @ t)
    cs, cl = np.sqrt(np.maximum(1 - ss * ss, 0)), np.sqrt(np.maximum(1 - sl * sl, 0))
    with np.errstate(divide="ignore", invalid="ignore"):
        cosh_eta = (1 + ss * sl) / (cs * cl)
    beta = btm_beta(face_angle(us), face_angle(ul), cosh_eta, nu, wedge.bc)
    return -nu / (4 * math.pi) * beta


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# Binning of a 1-D integral by delay
# ---------------------------------------------------------------------------

def splat_linear(tau_lo, tau_hi, mass, fs, nbins):
    """Bin masses spread uniformly in delay over each cell ``[tau_lo, tau_hi]``.

    Nearest-bin convention: bin ``k`` covers ``[(k - 1/2)/fs, (k + 1/2)/fs)``.
    Exact for a delay that is linear across each cell; mass outside
    ``[0, nbins)`` is dropped.
    """
    a = np.minimum(tau_lo, tau_hi) * fs + 0.5
    b = np.maximum(tau_lo, tau_hi) * fs + 0.5
    mass = np.asarray(mass, float)
    out = np.zeros(nbins)
    ka = np.floor(a).astype(np.int64)
    span = np.floor(b).astype(np.int64) - ka
    width = np.where(span > 0, b - a, 1.0)
    for j in range(int(span.max(initial=0)) + 1):
        sel = span >= j
        k = ka[sel] + j
        lo = np.maximum(a[sel], k)
        hi = np.minimum(b[sel], k + 1)
        frac = np.where(span[sel] > 0, (hi - lo) / width[sel], 1.0)
        ok = (k >= 0) & (k < nbins)
        np.add.at(out, k[ok], (mass[sel] * frac)[ok])
    return out


def _refine(fn, n0, tol, max_cells, what):
    prev = fn(n0)
    n = n0
    while True:
        n *= 2
        cur = fn(n)
        scale = max(np.linalg.norm(cur), 1e-300)
        err = np.linalg.norm(cur - prev) / scale
        if err <= tol:
            return cur
        if n >= max_cells:
            raise QuadratureError(f"{what}: relative change {err:.3g} at {n} cells "
                                  f"exceeds {tol:g}")
        prev = cur


def edge_quadrature_ir(wedge: Wedge, listener, fs: float, nbins: int, c: float = 344.0,
                       source=None, plane_direction=None, tol: float = 1e-5,
                       cells: int = 4096, max_cells: int = 1 << 22):
    """Deterministic first-order diffraction IR of one edge, integrated per bin.

    Point source: bins of ``int rho / (m l) ds`` over edge points whose delay
    ``(m + l)/c`` falls in the bin. Plane wave (``plane_direction`` = unit
    vector pointing back toward the source, wavefront through the origin at
    t = 0): ``int rho / l ds`` with delay ``-(d . x)/c + l/c``. The cell count is
    doubled until successive results agree to ``tol`` (relative L2).
    """
    if (source is None) == (plane_direction is None):
        raise ValueError("give exactly one of source and plane_direction")
    L = np.asarray(listener, float)

    def run(ncell):
        edges = np.linspace(0.0, wedge.length, ncell + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        x_all = wedge.point(np.concatenate([edges, mid]))
        xe, xm = x_all[:ncell + 1], x_all[ncell + 1:]

        def delay(x):
            lv = L[None, :] - x
            dl = np.linalg.norm(lv, axis=1)
            if source is None:
                d = np.asarray(plane_direction, float)
                return (-(x @ d) + dl) / c
            return (np.linalg.norm(np.asarray(source, float)[None, :] - x, axis=1) + dl) / c

        tau = delay(xe)
        lv = L[None, :] - xm
        dl = np.linalg.norm(lv, axis=1)
        if source is None:
            us = np.broadcast_to(_unit(np.asarray(plane_direction, float)), xm.shape)
            dm = np.ones(len(xm))
        else:
            sv = np.asarray(source, float)[None, :] - xm
            dm = np.linalg.norm(sv, axis=1)
            us = sv / dm[:, None]
        rho = btm_rho(wedge, xm, us, lv / dl[:, None])
        mass = rho / (dm * dl) * np.diff(edges)
        # split cells that straddle the delay minimum into two linear halves
        tm = delay(xm)
        lo = np.minimum(tau[:-1], tau[1:])
        kink = tm < lo
        out = splat_linear(tau[:-1][~kink], tau[1:][~kink], mass[~kink], fs, nbins)
        if kink.any():
            half = 0.5 * mass[kink]
            out += splat_linear(tau[:-1][kink], tm[kink], half, fs, nbins)
            out += splat_linear(tm[kink], tau[1:][kink], half, fs, nbins)
        return out

    return _refine(run, cells, tol, max_cells, "edge quadrature")


def keller_ir(theta_i, phi_i, theta_o, distance, phi, bc, fs, nbins, c: float = 344.0):
    """Bin integrals of ``keller_time_solution`` (plane wave, listener on the cone).

    Uses ``t = t0 + s^2`` to remove the inverse-square-root onset at
    ``t0 = distance / c``; returns bins on the nearest-bin grid.
    """
    t0 = distance / c
    out = np.zeros(nbins)

    def g(s):
        return 2.0 * s * keller_time_solution(theta_i, phi_i, theta_o, distance, phi, bc,
                                              t0 + s * s, c)

    for k in range(nbins):
        lo, hi = (k - 0.5) / fs, (k + 0.5) / fs
        if hi <= t0:
            continue
        s0, s1 = math.sqrt(max(lo - t0, 0.0)), math.sqrt(hi - t0)
        val, err = integrate.quad(g, s0, s1, epsabs=1e-13, epsrel=1e-10, limit=200)
        out[k] = val
    return out


def keller_listener(theta_o, phi_i, distance, n, t):
    """Listener point on the Keller cone of the edge point at the origin."""
    n, t = np.asarray(n, float), np.asarray(t, float)
    b = np.cross(t, n)
    return distance * (math.cos(theta_o) * math.cos(phi_i) * n
                       + math.sin(theta_o) * math.cos(phi_i) * b - math.sin(phi_i) * t)


def plane_direction(theta_i, phi_i, n, t):
    """Unit vector toward the plane-wave source for incident angles (theta_i, phi_i)."""
    n, t = np.asarray(n, float), np.asarray(t, float)
    b = np.cross(t, n)
    return (math.cos(theta_i) * math.cos(phi_i) * n + math.sin(theta_i) * math.cos(phi_i) * b
            + math.sin(phi_i) * t)


def double_edge_ir(w1: Wedge, w2: Wedge, source, listener, fs: float, nbins: int,
                   c: float = 344.0, tol: float = 1e-3, cells: int = 256,
                   max_cells: int = 4096):
    """Second-order diffraction IR via nested edge quadrature of ``rho1 * rho2``.

    The outer edge uses the midpoint rule; the inner edge is binned exactly for
    linear delay per cell. Visibility between the points is assumed.
    """
    S, L = np.asarray(source, float), np.asarray(listener, float)

    def run(ncell):
        e1 = np.linspace(0.0, w1.length, ncell + 1)
        m1 = 0.5 * (e1[1:] + e1[:-1])
        x1 = w1.point(m1)
        e2 = np.linspace(0.0, w2.length, ncell + 1)
        m2 = 0.5 * (e2[1:] + e2[:-1])
        x2e, x2m = w2.point(e2), w2.point(m2)
        out = np.zeros(nbins)
        h1, h2 = np.diff(e1), np.diff(e2)
        for i, p in enumerate(x1):
            sv = S - p
            dm = np.linalg.norm(sv)
            qv = x2m - p[None, :]
            dq = np.linalg.norm(qv, axis=1)
            lv = L[None, :] - x2m
            dl = np.linalg.norm(lv, axis=1)
            r1 = btm_rho(w1, p[None, :], (sv / dm)[None, :], qv / dq[:, None])
            r2 = btm_rho(w2, x2m, -qv / dq[:, None], lv / dl[:, None])
            mass = r1 * r2 / (dm * dq * dl) * h1[i] * h2
            base = dm
            te = (base + np.linalg.norm(x2e - p[None, :], axis=1)
                  + np.linalg.norm(L[None, :] - x2e, axis=1)) / c
            tm = (base + dq + dl) / c
            lo = np.minimum(te[:-1], te[1:])
            kink = tm < lo
            out += splat_linear(te[:-1][~kink], te[1:][~kink], mass[~kink], fs, nbins)
            if kink.any():
                half = 0.5 * mass[kink]
                out += splat_linear(te[:-1][kink], tm[kink], half, fs, nbins)
                out += splat_linear(tm[kink], te[1:][kink], half, fs, nbins)
        return out

    return _refine(run, cells, tol, max_cells, "double-edge quadrature")


# ---------------------------------------------------------------------------
# Single slit
# ---------------------------------------------------------------------------

def single_slit_pattern(width: float, wavelength: float, screen_distance: float, positions):
    """Fraunhofer intensity ``sinc^2(pi w sin(theta) / lambda)`` normalised to 1 at the centre."""
    y = np.asarray(positions, float)
    s = y / np.hypot(y, screen_distance)
    return np.sinc(width * s / wavelength) ** 2


# ---------------------------------------------------------------------------
# Brute-force projection of proxy triangles
# ---------------------------------------------------------------------------

def _seg_tri_hit(p, q, tri):
    """Whether open segments p -> q (arrays (k, 3)) cross triangle ``tri``."""
    a, b, c = tri
    e1, e2 = b - a, c - a
    d = q - p
    h = np.cross(d, e2)
    det = h @ e1
    ok = np.abs(det) > 1e-14
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    s = p - a
    u = np.einsum("ij,ij->i", s, h) * inv
    qq = np.cross(s, e1)
    v = np.einsum("ij,ij->i", d, qq) * inv
    t = (qq @ e2) * inv
    return ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > 1e-9) & (t < 1 - 1e-9)


def bruteforce_triangle_projection(triangle, occluders, viewer, n_samples: int,
                                   rng: np.random.Generator, bins: int = 20):
    """Uniform-area samples of ``triangle = (a, b, c)`` seen from ``viewer``, projected
    through ``c`` onto edge ``ab``.

    Returns ``(counts, edges, accepted)`` where ``counts`` histogram the edge
    parameter ``s`` in [0, 1] of samples whose proxy point and projected edge
    point are both visible from the viewer through the occluder triangles.
    """
    a, b, c = (np.asarray(v, float) for v in triangle)
    u1, u2 = rng.random(n_samples), rng.random(n_samples)
    flip = u1 + u2 > 1
    u1, u2 = np.where(flip, 1 - u1, u1), np.where(flip, 1 - u2, u2)
    y = a + u1[:, None] * (b - a) + u2[:, None] * (c - a)
    # barycentric weight of c is u2; the projection is c + (y - c)/(1 - u2)
    q = 1.0 - u2
    s = u1 / q
    x = a + s[:, None] * (b - a)
    V = np.broadcast_to(np.asarray(viewer, float), y.shape)
    vis = np.ones(n_samples, bool)
    for occ in occluders:
        occ = [np.asarray(v, float) for v in occ]
        vis &= ~_seg_tri_hit(V, y, occ)
        vis &= ~_seg_tri_hit(V, x, occ)
    counts, edges = np.histogram(s[vis], bins=bins, range=(0.0, 1.0))
    return counts, edges, int(vis.sum())


def projected_density_profile(triangle, occluders, viewer, s_values, n_q: int = 4000):
    """Deterministic density in ``s`` of the same construction (for histogram bands).

    For each edge parameter ``s`` integrates ``q`` over the visible part of the
    segment from ``c`` to ``x(s)`` (midpoint rule in ``q``), then normalises by
    the triangle's total mass 1/2 per unit ``s``.
    """
    a, b, c = (np.asarray(v, float) for v in triangle)
    qs = (np.arange(n_q) + 0.5) / n_q
    out = np.zeros(len(s_values))
    for i, s in enumerate(s_values):
        x = a + s * (b - a)
        y = c[None, :] + qs[:, None] * (x - c)[None, :]
        V = np.broadcast_to(np.asarray(viewer, float), y.shape)
        vis = np.ones(n_q, bool)
        xv = np.ones(1, bool)
        for occ in occluders:
            occ = [np.asarray(v, float) for v in occ]
            vis &= ~_seg_tri_hit(V, y, occ)
            xv &= ~_seg_tri_hit(np.asarray(viewer, float)[None, :], x[None, :], occ)
        out[i] = (qs * vis).sum() / n_q * 2.0 if xv[0] else 0.0
    return out
