# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, nonecheck=False
"""Numeric core of the edge-diffraction tracer.

The file is written in Cython's pure-Python syntax. ``setup.py`` compiles it to
a C extension; when no compiled module is available the same source runs as
ordinary Python. Every division, square root, logarithm and hyperbolic call is
guarded explicitly so that both builds take identical branches and produce the
same numbers.

Conventions shared with the Python layers:

* Edge frame: ``t`` along the edge, ``n`` bisects the exterior (air) wedge,
  ``b = t x n``. For a neighbour point ``p`` seen from edge point ``x`` with
  ``u = (p - x)/|p - x|`` the incident angles are ``theta = atan2(u.b, u.n)``,
  ``phi = asin(u.t)``; outgoing angles use ``asin(-u.t)`` so that the Keller
  cone is ``phi_o = phi_i``.
* ``sgn`` is +1 for a Dirichlet (pressure-release) wedge and -1 for Neumann.
"""
import cython
from cython.cimports.libc.math import (sqrt, sin, cos, tan, atan, atan2, asin,
                                       acos, exp, log, sinh, cosh, fabs, pow)

PI = cython.declare(cython.double, 3.141592653589793)
TWO_PI = cython.declare(cython.double, 6.283185307179586)
HALF_PI = cython.declare(cython.double, 1.5707963267948966)
INV_4PI = cython.declare(cython.double, 0.07957747154594767)
NAN = cython.declare(cython.double, float("nan"))
SINGULAR_TOL = cython.declare(cython.double, 1e-9)
ANGLE_TOL = cython.declare(cython.double, 1e-9)
THETA_A_EPS = cython.declare(cython.double, 1e-6)
COS_FLOOR = cython.declare(cython.double, 1e-6)
MAXIV = cython.declare(cython.int, 64)
STACK = cython.declare(cython.int, 128)
BISECT_ITERS = cython.declare(cython.int, 60)


# ---------------------------------------------------------------------------
# BEDRF building blocks
# ---------------------------------------------------------------------------

@cython.ccall
@cython.exceptval(check=False)
def kappa(phi: cython.double) -> cython.double:
    """Wedge index ``pi / (2 pi - 2 phi)``."""
    return PI / (TWO_PI - 2.0 * phi)


@cython.ccall
@cython.exceptval(check=False)
def r_param(phi_i: cython.double, phi_o: cython.double) -> cython.double:
    """Spherical-decomposition radius ``r`` in [0, 1]; 0 at the poles."""
    si: cython.double = sin(phi_i)
    so: cython.double = sin(phi_o)
    den: cython.double = cos(phi_i) * cos(phi_o)
    r: cython.double
    if den < 1e-300:
        return 0.0
    r = (1.0 - si * so - fabs(si - so)) / den
    if r < 0.0:
        return 0.0
    if r > 1.0:
        return 1.0
    return r


@cython.ccall
@cython.exceptval(check=False)
def f_val(t0: cython.double, t1: cython.double, th: cython.double,
          rl: cython.double, kap: cython.double) -> cython.double:
    """Arc function with the continuous arctan branch; NaN when 0/0."""
    half: cython.double = kap * (t0 - t1) * 0.5
    kr: cython.double = kap * rl
    num: cython.double
    den: cython.double
    val: cython.double
    if kr > 700.0 or kr < -700.0:
        return 0.0
    num = sinh(kr) * sin(half)
    den = cos(kap * (th - 0.5 * (t0 + t1))) - cosh(kr) * cos(half)
    if fabs(num) < SINGULAR_TOL and fabs(den) < SINGULAR_TOL:
        return NAN
    if num == 0.0:
        return 0.0
    if den == 0.0:
        return 0.5 if num > 0.0 else -0.5
    val = atan(num / den)
    if den < 0.0:
        if num > 0.0:
            val = val + PI
        else:
            val = val - PI
    return val / PI


@cython.ccall
@cython.exceptval(check=False)
def df_dr(t0: cython.double, t1: cython.double, th: cython.double,
          rl: cython.double, kap: cython.double) -> cython.double:
    """Derivative of ``f_val`` with respect to ``rl``; NaN when singular."""
    half: cython.double = kap * (t0 - t1) * 0.5
    kr: cython.double = kap * rl
    s: cython.double
    c: cython.double
    a: cython.double
    ch: cython.double
    sh: cython.double
    p: cython.double
    q: cython.double
    den: cython.double
    if kr > 700.0 or kr < -700.0:
        return 0.0
    s = sin(half)
    c = cos(half)
    a = cos(kap * (th - 0.5 * (t0 + t1)))
    ch = cosh(kr)
    sh = sinh(kr)
    p = sh * s
    q = ch * c - a
    den = p * p + q * q
    if sqrt(den) < SINGULAR_TOL:
        return NAN
    return kap / PI * s * (a * ch - c) / den


@cython.ccall
@cython.exceptval(check=False)
def rho(ti: cython.double, pi_: cython.double, to: cython.double,
        po: cython.double, phi: cython.double, sgn: cython.double) -> cython.double:
    """BEDRF for a Dirichlet (``sgn`` = 1) or Neumann (``sgn`` = -1) wedge."""
    kap: cython.double = kappa(phi)
    r: cython.double = r_param(pi_, po)
    rl: cython.double
    if r <= 0.0:
        return 0.0
    rl = log(r)
    return 0.5 * (df_dr(ti - PI, ti + PI, to, rl, kap)
                  + sgn * df_dr(-ti - PI + 2.0 * phi, -ti + PI - 2.0 * phi, to, rl, kap))


# ---------------------------------------------------------------------------
# Edge direction sampler
# ---------------------------------------------------------------------------

@cython.cfunc
@cython.inline
@cython.exceptval(check=False)
def _gterm(t0: cython.double, t1: cython.double, th: cython.double,
           kap: cython.double) -> cython.double:
    half: cython.double = kap * (t1 - t0) * 0.5
    den: cython.double = PI * (cos(kap * (th - 0.5 * (t0 + t1))) - cos(half))
    if fabs(den) < 1e-300:
        return NAN
    return sin(half) / den


@cython.ccall
@cython.exceptval(check=False)
def edge_params(ti: cython.double, pi_: cython.double, to: cython.double,
                phi: cython.double, sgn: cython.double,
                out: cython.double[:]) -> cython.int:
    """Fill ``out`` with (theta_a, theta_b, a, x, kappa)."""
    kap: cython.double = kappa(phi)
    ci2: cython.double = cos(pi_) * cos(pi_)
    g1: cython.double = _gterm(ti - PI, ti + PI, to, kap)
    g2: cython.double = _gterm(-ti - PI + 2.0 * phi, -ti + PI - 2.0 * phi, to, kap)
    x: cython.double
    arg: cython.double
    ta: cython.double
    sa: cython.double
    ca: cython.double
    k: cython.double
    kc: cython.double
    a: cython.double
    y: cython.double
    tb: cython.double
    if g1 != g1 or g2 != g2:
        x = 1e300
    else:
        x = fabs((g1 + sgn * g2) * ci2)
    arg = -ci2 / tan(kap * PI)
    if arg > 1.0:
        arg = 1.0
    if arg < THETA_A_EPS:
        arg = THETA_A_EPS
    if arg > 1.0 - THETA_A_EPS:
        arg = 1.0 - THETA_A_EPS
    ta = asin(arg)
    sa = sin(ta)
    ca = cos(ta)
    if x < 1e-300:
        k = 1e300
    else:
        k = sa / (PI * x)
    if k > 350.0:
        a = 1.0
    else:
        a = 1.0 - 0.5 * exp(1.0 - 2.0 * k)
    if a < 0.0:
        a = 0.0
    if a > 1.0:
        a = 1.0
    kc = k if k < 0.5 else 0.5
    y = kc + sqrt(kc * kc + ca * ca)
    if y > 1.0 - 1e-12:
        y = 1.0 - 1e-12
    tb = acos(y)
    if tb > ta - 1e-12:
        tb = ta - 1e-12
    out[0] = ta
    out[1] = tb
    out[2] = a
    out[3] = x
    out[4] = kap
    return 0


@cython.ccall
@cython.exceptval(check=False)
def pc_cdf(x: cython.double, ta: cython.double, tb: cython.double) -> cython.double:
    """CDF ``P_c`` on [0, 1] with P_c(0) = 0 and P_c(1) = 1."""
    sa: cython.double = sin(ta)
    ca: cython.double = cos(ta)
    cb: cython.double = cos(tb)
    n: cython.double = (1.0 - x * x) * sa
    d1: cython.double = (1.0 + x * x) * ca - 2.0 * x * cb
    d2: cython.double = (1.0 + x * x) * ca + 2.0 * x * cb
    return (atan2(n, d1) - atan2(n, d2)) / PI


@cython.ccall
@cython.exceptval(check=False)
def pc_pdf(x: cython.double, ta: cython.double, tb: cython.double) -> cython.double:
    """Derivative of ``pc_cdf``."""
    sa: cython.double = sin(ta)
    ca: cython.double = cos(ta)
    cb: cython.double = cos(tb)
    n: cython.double = (1.0 - x * x) * sa
    dn: cython.double = -2.0 * x * sa
    d1: cython.double = (1.0 + x * x) * ca - 2.0 * x * cb
    dd1: cython.double = 2.0 * x * ca - 2.0 * cb
    d2: cython.double = (1.0 + x * x) * ca + 2.0 * x * cb
    dd2: cython.double = 2.0 * x * ca + 2.0 * cb
    m1: cython.double = n * n + d1 * d1
    m2: cython.double = n * n + d2 * d2
    if m1 < 1e-300 or m2 < 1e-300:
        return 0.0
    return ((dn * d1 - n * dd1) / m1 - (dn * d2 - n * dd2) / m2) / PI


@cython.ccall
@cython.exceptval(check=False)
def pc_inv(u: cython.double, ta: cython.double, tb: cython.double) -> cython.double:
    """Invert ``pc_cdf`` by bisection."""
    lo: cython.double = 0.0
    hi: cython.double = 1.0
    mid: cython.double
    it: cython.int
    for it in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if pc_cdf(mid, ta, tb) < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@cython.ccall
@cython.exceptval(check=False)
def edge_pdf(ti: cython.double, pi_: cython.double, to: cython.double,
             po: cython.double, phi: cython.double, sgn: cython.double,
             par: cython.double[:]) -> cython.double:
    """Solid-angle density of the edge sampler at (to, po)."""
    co: cython.double = cos(po)
    r: cython.double
    xk: cython.double
    kap: cython.double
    a: cython.double
    pphi: cython.double
    if to < phi - PI - ANGLE_TOL or to > PI - phi + ANGLE_TOL:
        return 0.0
    if co < 1e-12:
        return 0.0
    edge_params(ti, pi_, to, phi, sgn, par)
    kap = par[4]
    a = par[2]
    r = r_param(pi_, po)
    pphi = a / PI
    if r > 0.0 and a < 1.0:
        xk = pow(r, kap)
        pphi = pphi + (1.0 - a) * kap * xk / (2.0 * co) * pc_pdf(xk, par[0], par[1])
    return pphi / (2.0 * (PI - phi) * co)


@cython.ccall
@cython.exceptval(check=False)
def edge_sample(ti: cython.double, pi_: cython.double, phi: cython.double,
                sgn: cython.double, u0: cython.double, u1: cython.double,
                u2: cython.double, u3: cython.double,
                par: cython.double[:], out: cython.double[:]) -> cython.int:
    """Draw (theta_o, phi_o) into ``out[0:2]`` and the density into ``out[2]``.

    Returns the branch: 0 uniform floor, 1 lower lobe, 2 upper lobe.
    """
    to: cython.double = (phi - PI) + u0 * 2.0 * (PI - phi)
    po: cython.double
    x: cython.double
    r: cython.double
    ci: cython.double = cos(pi_)
    si: cython.double = sin(pi_)
    branch: cython.int
    edge_params(ti, pi_, to, phi, sgn, par)
    if u1 < par[2]:
        po = -HALF_PI + PI * u2
        branch = 0
    else:
        x = pc_inv(u2, par[0], par[1])
        r = pow(x, 1.0 / par[4])
        if u3 < 0.5:
            po = 2.0 * atan(r * ci / (1.0 - si)) - HALF_PI
            branch = 1
        else:
            po = HALF_PI - 2.0 * atan(r * ci / (1.0 + si))
            branch = 2
    out[0] = to
    out[1] = po
    out[2] = edge_pdf(ti, pi_, to, po, phi, sgn, par)
    return branch


@cython.ccall
@cython.exceptval(check=False)
def suppress(co: cython.double, cstar: cython.double) -> cython.double:
    """Logistic outlier suppression coefficient ``(C*/C_o) tanh(C_o/C*)``."""
    z: cython.double
    e: cython.double
    if co <= 0.0:
        return 1.0
    z = co / cstar
    if z < 1e-8:
        return 1.0 - z * z / 3.0
    e = exp(-2.0 * z)
    return (1.0 - e) / (1.0 + e) / z


@cython.cfunc
@cython.exceptval(check=False)
def _corner(ab: cython.double, ac: cython.double, bc: cython.double) -> cython.double:
    """Spherical-triangle angle at A from the cosines of arcs AB, AC and BC."""
    den: cython.double = sqrt(max(0.0, 1.0 - ab * ab) * max(0.0, 1.0 - ac * ac))
    c: cython.double
    if den <= 0.0:
        return 0.0
    c = (bc - ab * ac) / den
    return acos(min(1.0, max(-1.0, c)))


# ---------------------------------------------------------------------------
# Scene: BVH queries, proxy measures and the bidirectional tracer
# ---------------------------------------------------------------------------

@cython.cclass
class KScene:
    """Flat-array scene used by the hot loops."""
    nt = cython.declare(cython.int, visibility="readonly")
    ne = cython.declare(cython.int, visibility="readonly")
    eps = cython.declare(cython.double, visibility="readonly")
    tv = cython.declare(cython.double[:, :, :])
    te1 = cython.declare(cython.double[:, :])
    te2 = cython.declare(cython.double[:, :])
    tn = cython.declare(cython.double[:, :])
    tne = cython.declare(cython.int[:])
    tedge = cython.declare(cython.int[:, :])
    ea = cython.declare(cython.double[:, :])
    eb = cython.declare(cython.double[:, :])
    et = cython.declare(cython.double[:, :])
    en = cython.declare(cython.double[:, :])
    ebv = cython.declare(cython.double[:, :])
    elen = cython.declare(cython.double[:])
    ephi = cython.declare(cython.double[:])
    esgn = cython.declare(cython.double[:])
    etri = cython.declare(cython.int[:, :])
    ec = cython.declare(cython.double[:, :, :])
    eh = cython.declare(cython.double[:, :])
    ep = cython.declare(cython.double[:, :])
    bmin = cython.declare(cython.double[:, :])
    bmax = cython.declare(cython.double[:, :])
    bleft = cython.declare(cython.int[:])
    bfirst = cython.declare(cython.int[:])
    bcount = cython.declare(cython.int[:])
    border = cython.declare(cython.int[:])
    nnodes = cython.declare(cython.int)
    stack = cython.declare(cython.int[:])
    iv = cython.declare(cython.double[:, :])
    niv = cython.declare(cython.int[:])
    par = cython.declare(cython.double[:])
    smp = cython.declare(cython.double[:])
    overflow = cython.declare(cython.long, visibility="public")
    h_t = cython.declare(cython.double, visibility="readonly")
    h_u = cython.declare(cython.double, visibility="readonly")
    h_v = cython.declare(cython.double, visibility="readonly")
    a_th = cython.declare(cython.double, visibility="readonly")
    a_ph = cython.declare(cython.double, visibility="readonly")
    k_x = cython.declare(cython.double, visibility="readonly")
    k_y = cython.declare(cython.double, visibility="readonly")
    k_z = cython.declare(cython.double, visibility="readonly")
    k_t = cython.declare(cython.int, visibility="readonly")
    ptri = cython.declare(cython.int[:])
    pcdf = cython.declare(cython.double[:, :])
    cpos = cython.declare(cython.double[:, :])
    cnext = cython.declare(cython.int)
    emit = cython.declare(cython.int, visibility="public")
    d_x = cython.declare(cython.double, visibility="readonly")
    d_y = cython.declare(cython.double, visibility="readonly")
    d_z = cython.declare(cython.double, visibility="readonly")

    def __init__(self, tv, te1, te2, tn, tne, tedge, ea, eb, et, en, ebv, elen,
                 ephi, esgn, etri, ec, eh, ep, bmin, bmax, bleft, bfirst,
                 bcount, border, eps, stack, iv, niv, par, smp, ptri, pcdf, cpos,
                 emit):
        self.tv = tv
        self.te1 = te1
        self.te2 = te2
        self.tn = tn
        self.tne = tne
        self.tedge = tedge
        self.ea = ea
        self.eb = eb
        self.et = et
        self.en = en
        self.ebv = ebv
        self.elen = elen
        self.ephi = ephi
        self.esgn = esgn
        self.etri = etri
        self.ec = ec
        self.eh = eh
        self.ep = ep
        self.bmin = bmin
        self.bmax = bmax
        self.bleft = bleft
        self.bfirst = bfirst
        self.bcount = bcount
        self.border = border
        self.nt = tv.shape[0]
        self.ne = ea.shape[0]
        self.nnodes = bmin.shape[0]
        self.eps = eps
        self.stack = stack
        self.iv = iv
        self.niv = niv
        self.par = par
        self.smp = smp
        self.overflow = 0
        self.h_t = 0.0
        self.h_u = 0.0
        self.h_v = 0.0
        self.a_th = 0.0
        self.a_ph = 0.0
        self.k_x = 0.0
        self.k_y = 0.0
        self.k_z = 0.0
        self.k_t = -1
        self.ptri = ptri
        self.pcdf = pcdf
        self.cpos = cpos
        self.cnext = 0
        self.emit = emit
        self.d_x = 0.0
        self.d_y = 0.0
        self.d_z = 1.0

    # -- ray queries --------------------------------------------------------

    @cython.cfunc
    @cython.exceptval(check=False)
    def _box_hit(self, node: cython.int, ox: cython.double, oy: cython.double,
                 oz: cython.double, dx: cython.double, dy: cython.double,
                 dz: cython.double, tmax: cython.double) -> cython.bint:
        t0: cython.double = 0.0
        t1: cython.double = tmax
        lo: cython.double
        hi: cython.double
        o: cython.double
        d: cython.double
        ta: cython.double
        tb: cython.double
        ax: cython.int
        for ax in range(3):
            lo = self.bmin[node, ax]
            hi = self.bmax[node, ax]
            if ax == 0:
                o = ox
                d = dx
            elif ax == 1:
                o = oy
                d = dy
            else:
                o = oz
                d = dz
            if fabs(d) < 1e-300:
                if o < lo - self.eps or o > hi + self.eps:
                    return False
            else:
                ta = (lo - o) / d
                tb = (hi - o) / d
                if ta > tb:
                    ta, tb = tb, ta
                if ta > t0:
                    t0 = ta
                if tb < t1:
                    t1 = tb
                if t0 > t1 + self.eps:
                    return False
        return True

    @cython.cfunc
    @cython.exceptval(check=False)
    def _tri_ray(self, tri: cython.int, ox: cython.double, oy: cython.double,
                 oz: cython.double, dx: cython.double, dy: cython.double,
                 dz: cython.double) -> cython.double:
        """Double-sided Moller-Trumbore; returns t or -1 and sets h_u, h_v."""
        e1x: cython.double = self.te1[tri, 0]
        e1y: cython.double = self.te1[tri, 1]
        e1z: cython.double = self.te1[tri, 2]
        e2x: cython.double = self.te2[tri, 0]
        e2y: cython.double = self.te2[tri, 1]
        e2z: cython.double = self.te2[tri, 2]
        px: cython.double = dy * e2z - dz * e2y
        py: cython.double = dz * e2x - dx * e2z
        pz: cython.double = dx * e2y - dy * e2x
        det: cython.double = e1x * px + e1y * py + e1z * pz
        inv: cython.double
        sx: cython.double
        sy: cython.double
        sz: cython.double
        u: cython.double
        v: cython.double
        qx: cython.double
        qy: cython.double
        qz: cython.double
        if fabs(det) < 1e-300:
            return -1.0
        inv = 1.0 / det
        sx = ox - self.tv[tri, 0, 0]
        sy = oy - self.tv[tri, 0, 1]
        sz = oz - self.tv[tri, 0, 2]
        u = (sx * px + sy * py + sz * pz) * inv
        if u < 0.0 or u > 1.0:
            return -1.0
        qx = sy * e1z - sz * e1y
        qy = sz * e1x - sx * e1z
        qz = sx * e1y - sy * e1x
        v = (dx * qx + dy * qy + dz * qz) * inv
        if v < 0.0 or u + v > 1.0:
            return -1.0
        self.h_u = u
        self.h_v = v
        return (e2x * qx + e2y * qy + e2z * qz) * inv

    @cython.ccall
    @cython.exceptval(check=False)
    def ray_closest(self, ox: cython.double, oy: cython.double, oz: cython.double,
                    dx: cython.double, dy: cython.double, dz: cython.double,
                    skip0: cython.int, skip1: cython.int) -> cython.int:
        """Nearest hit with t > eps; ties go to the lowest triangle id.

        Sets ``h_t`` and the barycentrics ``h_u``, ``h_v`` of the hit.
        """
        best: cython.int = -1
        bt: cython.double = 1e300
        bu: cython.double = 0.0
        bv: cython.double = 0.0
        sp: cython.int = 0
        node: cython.int
        k: cython.int
        tri: cython.int
        t: cython.double
        if self.nnodes == 0:
            return -1
        self.stack[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            node = self.stack[sp]
            if not self._box_hit(node, ox, oy, oz, dx, dy, dz, bt):
                continue
            if self.bleft[node] < 0:
                for k in range(self.bfirst[node], self.bfirst[node] + self.bcount[node]):
                    tri = self.border[k]
                    if tri == skip0 or tri == skip1:
                        continue
                    t = self._tri_ray(tri, ox, oy, oz, dx, dy, dz)
                    if t <= self.eps:
                        continue
                    if t < bt or (t == bt and tri < best):
                        bt = t
                        best = tri
                        bu = self.h_u
                        bv = self.h_v
            elif sp + 2 <= STACK:
                self.stack[sp] = self.bleft[node]
                self.stack[sp + 1] = self.bleft[node] + 1
                sp += 2
        self.h_t = bt
        self.h_u = bu
        self.h_v = bv
        return best

    @cython.cfunc
    @cython.exceptval(check=False)
    def _box_overlap(self, node: cython.int, lx: cython.double, ly: cython.double,
                     lz: cython.double, hx: cython.double, hy: cython.double,
                     hz: cython.double) -> cython.bint:
        e: cython.double = self.eps
        if self.bmax[node, 0] < lx - e or self.bmin[node, 0] > hx + e:
            return False
        if self.bmax[node, 1] < ly - e or self.bmin[node, 1] > hy + e:
            return False
        if self.bmax[node, 2] < lz - e or self.bmin[node, 2] > hz + e:
            return False
        return True

    @cython.ccall
    @cython.exceptval(check=False)
    def seg_blocked(self, px: cython.double, py: cython.double, pz: cython.double,
                    qx: cython.double, qy: cython.double, qz: cython.double) -> cython.bint:
        """True if a triangle separates p from q.

        Triangles whose plane passes within eps of either endpoint are ignored,
        which lets segments start or end on the surfaces they touch.
        """
        sp: cython.int
        node: cython.int
        k: cython.int
        tri: cython.int
        sa: cython.double
        sb: cython.double
        nx: cython.double
        ny: cython.double
        nz: cython.double
        t: cython.double
        if self.nnodes == 0:
            return False
        self.stack[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            node = self.stack[sp]
            if not self._box_overlap(node, min(px, qx), min(py, qy), min(pz, qz),
                                     max(px, qx), max(py, qy), max(pz, qz)):
                continue
            if self.bleft[node] < 0:
                for k in range(self.bfirst[node], self.bfirst[node] + self.bcount[node]):
                    tri = self.border[k]
                    nx = self.tn[tri, 0]
                    ny = self.tn[tri, 1]
                    nz = self.tn[tri, 2]
                    sa = (nx * (px - self.tv[tri, 0, 0]) + ny * (py - self.tv[tri, 0, 1])
                          + nz * (pz - self.tv[tri, 0, 2]))
                    sb = (nx * (qx - self.tv[tri, 0, 0]) + ny * (qy - self.tv[tri, 0, 1])
                          + nz * (qz - self.tv[tri, 0, 2]))
                    if fabs(sa) <= self.eps or fabs(sb) <= self.eps:
                        continue
                    if (sa > 0.0) == (sb > 0.0):
                        continue
                    t = self._tri_ray(tri, px, py, pz, qx - px, qy - py, qz - pz)
                    if t > 0.0 and t < 1.0:
                        return True
            elif sp + 2 <= STACK:
                self.stack[sp] = self.bleft[node]
                self.stack[sp + 1] = self.bleft[node] + 1
                sp += 2
        return False

    # -- endpoint emission ----------------------------------------------------

    @cython.cfunc
    @cython.exceptval(check=False)
    def _solid_angle(self, tri: cython.int, vx: cython.double, vy: cython.double,
                     vz: cython.double) -> cython.double:
        """Solid angle of triangle ``tri`` seen from v (Van Oosterom-Strackee)."""
        ax: cython.double = self.tv[tri, 0, 0] - vx
        ay: cython.double = self.tv[tri, 0, 1] - vy
        az: cython.double = self.tv[tri, 0, 2] - vz
        bx: cython.double = self.tv[tri, 1, 0] - vx
        by: cython.double = self.tv[tri, 1, 1] - vy
        bz: cython.double = self.tv[tri, 1, 2] - vz
        cx: cython.double = self.tv[tri, 2, 0] - vx
        cy: cython.double = self.tv[tri, 2, 1] - vy
        cz: cython.double = self.tv[tri, 2, 2] - vz
        la: cython.double = sqrt(ax * ax + ay * ay + az * az)
        lb: cython.double = sqrt(bx * bx + by * by + bz * bz)
        lc: cython.double = sqrt(cx * cx + cy * cy + cz * cz)
        num: cython.double
        den: cython.double
        if la <= self.eps or lb <= self.eps or lc <= self.eps:
            return 0.0
        num = fabs(ax * (by * cz - bz * cy) + ay * (bz * cx - bx * cz)
                   + az * (bx * cy - by * cx))
        den = (la * lb * lc + (ax * bx + ay * by + az * bz) * lc
               + (bx * cx + by * cy + bz * cz) * la + (cx * ax + cy * ay + cz * az) * lb)
        if num <= 1e-14 * la * lb * lc:
            return 0.0
        return 2.0 * atan2(num, den)

    @cython.ccall
    @cython.exceptval(check=False)
    def endpoint_prepare(self, vx: cython.double, vy: cython.double,
                         vz: cython.double) -> cython.int:
        """Cache slot holding the cumulative proxy solid angles seen from v."""
        k: cython.int
        i: cython.int
        acc: cython.double = 0.0
        for k in range(2):
            if self.cpos[k, 0] == vx and self.cpos[k, 1] == vy and self.cpos[k, 2] == vz:
                return k
        k = self.cnext
        self.cnext = 1 - k
        for i in range(self.ptri.shape[0]):
            acc += self._solid_angle(self.ptri[i], vx, vy, vz)
            self.pcdf[k, i] = acc
        self.cpos[k, 0] = vx
        self.cpos[k, 1] = vy
        self.cpos[k, 2] = vz
        self.cpos[k, 3] = acc
        return k

    @cython.ccall
    @cython.exceptval(check=False)
    def endpoint_pdf(self, vx: cython.double, vy: cython.double, vz: cython.double,
                     dx: cython.double, dy: cython.double, dz: cython.double) -> cython.double:
        """Solid-angle density of emitting along d from an endpoint at v.

        Proxy emission picks a proxy triangle with probability proportional to
        its solid angle and a direction uniformly inside it, so the density is
        (number of proxy triangles the ray crosses) / (total solid angle).
        """
        k: cython.int
        i: cython.int
        cnt: cython.int = 0
        ln: cython.double = sqrt(dx * dx + dy * dy + dz * dz)
        tot: cython.double
        if self.emit == 0:
            return INV_4PI
        k = self.endpoint_prepare(vx, vy, vz)
        tot = self.cpos[k, 3]
        if tot <= 0.0 or ln <= 0.0:
            return 0.0
        for i in range(self.ptri.shape[0]):
            if self._tri_ray(self.ptri[i], vx, vy, vz, dx / ln, dy / ln, dz / ln) > self.eps:
                cnt += 1
        return cnt / tot

    @cython.ccall
    @cython.exceptval(check=False)
    def endpoint_sample(self, vx: cython.double, vy: cython.double, vz: cython.double,
                        u0: cython.double, u1: cython.double,
                        u2: cython.double) -> cython.bint:
        """Draw an emission direction into ``d_x, d_y, d_z``.

        Uniform sphere when ``emit`` is 0; otherwise Arvo's uniform sampling of
        the spherical triangle of a proxy triangle chosen by solid angle.
        """
        k: cython.int
        i: cython.int
        n: cython.int = self.ptri.shape[0]
        tri: cython.int
        z: cython.double
        rr: cython.double
        ph: cython.double
        tot: cython.double
        target: cython.double
        ax: cython.double
        ay: cython.double
        az: cython.double
        bx: cython.double
        by: cython.double
        bz: cython.double
        cx: cython.double
        cy: cython.double
        cz: cython.double
        ln: cython.double
        ab: cython.double
        ac: cython.double
        bc: cython.double
        al: cython.double
        be: cython.double
        ga: cython.double
        area: cython.double
        s: cython.double
        t: cython.double
        uu: cython.double
        vv: cython.double
        q: cython.double
        den: cython.double
        hx: cython.double
        hy: cython.double
        hz: cython.double
        wx: cython.double
        wy: cython.double
        wz: cython.double
        hb: cython.double
        if self.emit == 0:
            z = 1.0 - 2.0 * u0
            rr = 1.0 - z * z
            rr = sqrt(rr) if rr > 0.0 else 0.0
            ph = TWO_PI * u1
            self.d_x = rr * cos(ph)
            self.d_y = rr * sin(ph)
            self.d_z = z
            return True
        k = self.endpoint_prepare(vx, vy, vz)
        tot = self.cpos[k, 3]
        if tot <= 0.0 or n == 0:
            return False
        target = u0 * tot
        i = 0
        while i < n - 1 and self.pcdf[k, i] <= target:
            i += 1
        while i > 0 and self.pcdf[k, i] == self.pcdf[k, i - 1]:
            i -= 1
        tri = self.ptri[i]
        ax = self.tv[tri, 0, 0] - vx
        ay = self.tv[tri, 0, 1] - vy
        az = self.tv[tri, 0, 2] - vz
        ln = sqrt(ax * ax + ay * ay + az * az)
        ax = ax / ln
        ay = ay / ln
        az = az / ln
        bx = self.tv[tri, 1, 0] - vx
        by = self.tv[tri, 1, 1] - vy
        bz = self.tv[tri, 1, 2] - vz
        ln = sqrt(bx * bx + by * by + bz * bz)
        bx = bx / ln
        by = by / ln
        bz = bz / ln
        cx = self.tv[tri, 2, 0] - vx
        cy = self.tv[tri, 2, 1] - vy
        cz = self.tv[tri, 2, 2] - vz
        ln = sqrt(cx * cx + cy * cy + cz * cz)
        cx = cx / ln
        cy = cy / ln
        cz = cz / ln
        ab = ax * bx + ay * by + az * bz
        ac = ax * cx + ay * cy + az * cz
        bc = bx * cx + by * cy + bz * cz
        al = _corner(ab, ac, bc)
        be = _corner(ab, bc, ac)
        ga = _corner(ac, bc, ab)
        area = al + be + ga - PI
        if area <= 0.0:
            return False
        s = sin(u1 * area - al)
        t = cos(u1 * area - al)
        uu = t - cos(al)
        vv = s + sin(al) * ab
        den = (vv * s + uu * t) * sin(al)
        if den == 0.0:
            return False
        q = ((vv * t - uu * s) * cos(al) - vv) / den
        q = min(1.0, max(-1.0, q))
        # C-hat = q A + sqrt(1 - q^2) * unit(C - (C.A) A)
        wx = cx - ac * ax
        wy = cy - ac * ay
        wz = cz - ac * az
        ln = sqrt(wx * wx + wy * wy + wz * wz)
        if ln <= 0.0:
            return False
        rr = sqrt(max(0.0, 1.0 - q * q)) / ln
        hx = q * ax + rr * wx
        hy = q * ay + rr * wy
        hz = q * az + rr * wz
        hb = hx * bx + hy * by + hz * bz
        z = 1.0 - u2 * (1.0 - hb)
        wx = hx - hb * bx
        wy = hy - hb * by
        wz = hz - hb * bz
        ln = sqrt(wx * wx + wy * wy + wz * wz)
        if ln <= 0.0:
            self.d_x = bx
            self.d_y = by
            self.d_z = bz
            return True
        rr = sqrt(max(0.0, 1.0 - z * z)) / ln
        self.d_x = z * bx + rr * wx
        self.d_y = z * by + rr * wy
        self.d_z = z * bz + rr * wz
        return True

    # -- visibility of a segment from an apex -------------------------------

    @cython.cfunc
    @cython.exceptval(check=False)
    def _subtract(self, slot: cython.int, lo: cython.double, hi: cython.double) -> cython.int:
        """Remove [lo, hi] from the sorted interval list ``iv[slot]``."""
        n: cython.int = self.niv[slot]
        base: cython.int = slot * MAXIV
        tmp: cython.int = self.niv.shape[0] * MAXIV
        out: cython.int = 0
        i: cython.int
        a: cython.double
        b: cython.double
        # survivors go to the scratch block first, then are copied back
        for i in range(n):
            a = self.iv[base + i, 0]
            b = self.iv[base + i, 1]
            if hi <= a or lo >= b:
                if out < MAXIV:
                    self.iv[tmp + out, 0] = a
                    self.iv[tmp + out, 1] = b
                    out += 1
                else:
                    self.overflow += 1
                continue
            if lo > a:
                if out < MAXIV:
                    self.iv[tmp + out, 0] = a
                    self.iv[tmp + out, 1] = lo
                    out += 1
                else:
                    self.overflow += 1
            if hi < b:
                if out < MAXIV:
                    self.iv[tmp + out, 0] = hi
                    self.iv[tmp + out, 1] = b
                    out += 1
                else:
                    self.overflow += 1
        for i in range(out):
            self.iv[base + i, 0] = self.iv[tmp + i, 0]
            self.iv[base + i, 1] = self.iv[tmp + i, 1]
        self.niv[slot] = out
        return out

    @cython.ccall
    @cython.exceptval(check=False)
    def visible(self, slot: cython.int, ax: cython.double, ay: cython.double,
                az: cython.double, x0: cython.double, y0: cython.double,
                z0: cython.double, x1: cython.double, y1: cython.double,
                z1: cython.double, skip0: cython.int, skip1: cython.int) -> cython.int:
        """Parameter intervals of segment (p0, p1) visible from apex A.

        Exact clipping: for each candidate occluder the blocked set is the
        intersection of five half-lines in the segment parameter (one plane
        condition and three cone conditions). Results go to ``iv[slot]``.
        """
        sp: cython.int
        node: cython.int
        k: cython.int
        tri: cython.int
        j: cython.int
        base: cython.int = slot * MAXIV
        nx: cython.double
        ny: cython.double
        nz: cython.double
        sA: cython.double
        s0: cython.double
        s1: cython.double
        lo: cython.double
        hi: cython.double
        c0: cython.double
        c1: cython.double
        sig: cython.double
        vx: cython.double
        vy: cython.double
        vz: cython.double
        wx: cython.double
        wy: cython.double
        wz: cython.double
        mx: cython.double
        my: cython.double
        mz: cython.double
        dx: cython.double = x1 - x0
        dy: cython.double = y1 - y0
        dz: cython.double = z1 - z0
        rx: cython.double = x0 - ax
        ry: cython.double = y0 - ay
        rz: cython.double = z0 - az
        trip: cython.double
        scale: cython.double
        self.iv[base, 0] = 0.0
        self.iv[base, 1] = 1.0
        self.niv[slot] = 1
        if self.nnodes == 0:
            return 1
        self.stack[0] = 0
        sp = 1
        while sp > 0 and self.niv[slot] > 0:
            sp -= 1
            node = self.stack[sp]
            if not self._box_overlap(node, min(ax, min(x0, x1)), min(ay, min(y0, y1)),
                                     min(az, min(z0, z1)), max(ax, max(x0, x1)),
                                     max(ay, max(y0, y1)), max(az, max(z0, z1))):
                continue
            if self.bleft[node] >= 0:
                if sp + 2 <= STACK:
                    self.stack[sp] = self.bleft[node]
                    self.stack[sp + 1] = self.bleft[node] + 1
                    sp += 2
                continue
            for k in range(self.bfirst[node], self.bfirst[node] + self.bcount[node]):
                tri = self.border[k]
                if tri == skip0 or tri == skip1:
                    continue
                nx = self.tn[tri, 0]
                ny = self.tn[tri, 1]
                nz = self.tn[tri, 2]
                sA = (nx * (ax - self.tv[tri, 0, 0]) + ny * (ay - self.tv[tri, 0, 1])
                      + nz * (az - self.tv[tri, 0, 2]))
                if fabs(sA) <= self.eps:
                    continue
                s0 = (nx * (x0 - self.tv[tri, 0, 0]) + ny * (y0 - self.tv[tri, 0, 1])
                      + nz * (z0 - self.tv[tri, 0, 2]))
                s1 = (nx * (x1 - self.tv[tri, 0, 0]) + ny * (y1 - self.tv[tri, 0, 1])
                      + nz * (z1 - self.tv[tri, 0, 2]))
                if sA < 0.0:
                    s0 = -s0
                    s1 = -s1
                # plane: s0 + u (s1 - s0) < -eps
                lo = 0.0
                hi = 1.0
                c0 = s0 + self.eps
                c1 = s1 - s0
                if fabs(c1) < 1e-300:
                    if c0 >= 0.0:
                        continue
                elif c1 > 0.0:
                    hi = min(hi, -c0 / c1)
                else:
                    lo = max(lo, -c0 / c1)
                if lo >= hi:
                    continue
                # orientation of the cone
                vx = self.tv[tri, 0, 0] - ax
                vy = self.tv[tri, 0, 1] - ay
                vz = self.tv[tri, 0, 2] - az
                wx = self.tv[tri, 1, 0] - ax
                wy = self.tv[tri, 1, 1] - ay
                wz = self.tv[tri, 1, 2] - az
                mx = vy * wz - vz * wy
                my = vz * wx - vx * wz
                mz = vx * wy - vy * wx
                trip = (mx * (self.tv[tri, 2, 0] - ax)
                        + my * (self.tv[tri, 2, 1] - ay)
                        + mz * (self.tv[tri, 2, 2] - az))
                scale = sqrt(vx * vx + vy * vy + vz * vz) * sqrt(wx * wx + wy * wy + wz * wz)
                if fabs(trip) <= 1e-14 * scale * scale:
                    continue
                sig = 1.0 if trip > 0.0 else -1.0
                for j in range(3):
                    vx = self.tv[tri, j, 0] - ax
                    vy = self.tv[tri, j, 1] - ay
                    vz = self.tv[tri, j, 2] - az
                    wx = self.tv[tri, (j + 1) % 3, 0] - ax
                    wy = self.tv[tri, (j + 1) % 3, 1] - ay
                    wz = self.tv[tri, (j + 1) % 3, 2] - az
                    mx = sig * (vy * wz - vz * wy)
                    my = sig * (vz * wx - vx * wz)
                    mz = sig * (vx * wy - vy * wx)
                    c0 = mx * rx + my * ry + mz * rz
                    c1 = mx * dx + my * dy + mz * dz
                    if fabs(c1) < 1e-300:
                        if c0 < 0.0:
                            lo = 1.0
                            hi = 0.0
                            break
                    elif c1 > 0.0:
                        lo = max(lo, -c0 / c1)
                    else:
                        hi = min(hi, -c0 / c1)
                    if lo >= hi:
                        break
                if lo < hi:
                    self._subtract(slot, lo, hi)
                    if self.niv[slot] == 0:
                        break
        return self.niv[slot]

    # -- edge frames, angles and the proxy measure --------------------------

    @cython.ccall
    @cython.exceptval(check=False)
    def angles(self, e: cython.int, xx: cython.double, xy: cython.double,
               xz: cython.double, px: cython.double, py: cython.double,
               pz: cython.double, outgoing: cython.bint) -> cython.bint:
        """Wedge angles of neighbour p seen from edge point x.

        Sets ``a_th``, ``a_ph``; returns False when p lies inside the solid
        wedge (beyond ANGLE_TOL). Angles within tolerance are clamped.
        """
        ux: cython.double = px - xx
        uy: cython.double = py - xy
        uz: cython.double = pz - xz
        ln: cython.double = sqrt(ux * ux + uy * uy + uz * uz)
        cn: cython.double
        cb: cython.double
        ct: cython.double
        lim: cython.double = PI - self.ephi[e]
        th: cython.double
        if ln < 1e-300:
            return False
        ux /= ln
        uy /= ln
        uz /= ln
        cn = ux * self.en[e, 0] + uy * self.en[e, 1] + uz * self.en[e, 2]
        cb = ux * self.ebv[e, 0] + uy * self.ebv[e, 1] + uz * self.ebv[e, 2]
        ct = ux * self.et[e, 0] + uy * self.et[e, 1] + uz * self.et[e, 2]
        if ct > 1.0:
            ct = 1.0
        if ct < -1.0:
            ct = -1.0
        th = atan2(cb, cn)
        if th > lim + ANGLE_TOL or th < -lim - ANGLE_TOL:
            return False
        if th > lim:
            th = lim
        if th < -lim:
            th = -lim
        self.a_th = th
        self.a_ph = -asin(ct) if outgoing else asin(ct)
        return True

    @cython.ccall
    @cython.exceptval(check=False)
    def rho_at(self, e: cython.int, px: cython.double, py: cython.double,
               pz: cython.double, xx: cython.double, xy: cython.double,
               xz: cython.double, qx: cython.double, qy: cython.double,
               qz: cython.double) -> cython.double:
        """BEDRF at edge point x for the path p -> x -> q (NaN if invalid)."""
        ti: cython.double
        pi_: cython.double
        if not self.angles(e, xx, xy, xz, px, py, pz, False):
            return NAN
        ti = self.a_th
        pi_ = self.a_ph
        if not self.angles(e, xx, xy, xz, qx, qy, qz, True):
            return NAN
        return rho(ti, pi_, self.a_th, self.a_ph, self.ephi[e], self.esgn[e])

    @cython.ccall
    @cython.exceptval(check=False)
    def dir_pdf(self, e: cython.int, px: cython.double, py: cython.double,
                pz: cython.double, xx: cython.double, xy: cython.double,
                xz: cython.double, qx: cython.double, qy: cython.double,
                qz: cython.double) -> cython.double:
        """Solid-angle density of emitting from x toward q after arriving from p.

        ``e < 0`` marks an endpoint (uniform sphere).
        """
        ti: cython.double
        pi_: cython.double
        if e < 0:
            return self.endpoint_pdf(xx, xy, xz, qx - xx, qy - xy, qz - xz)
        if not self.angles(e, xx, xy, xz, px, py, pz, False):
            return 0.0
        ti = self.a_th
        pi_ = self.a_ph
        if not self.angles(e, xx, xy, xz, qx, qy, qz, True):
            return 0.0
        return edge_pdf(ti, pi_, self.a_th, self.a_ph, self.ephi[e], self.esgn[e], self.par)

    @cython.ccall
    @cython.exceptval(check=False)
    def proxy_density(self, e: cython.int, vx: cython.double, vy: cython.double,
                      vz: cython.double, xx: cython.double, xy: cython.double,
                      xz: cython.double, skip0: cython.int, skip1: cython.int,
                      upick: cython.double, uq: cython.double,
                      want_pick: cython.bint) -> cython.double:
        """Proxy measure D(x | v) of edge point x seen from v.

        Sums p_tri * H_k * integral of q dq over the parts of segment x -> c_k
        visible from v, skipping a face whose plane contains v. With
        ``want_pick`` a proxy point is drawn proportional to that measure and
        stored in ``k_x, k_y, k_z`` (triangle ``k_t``).
        """
        side: cython.int
        tri: cython.int
        i: cython.int
        n: cython.int
        cx: cython.double
        cy: cython.double
        cz: cython.double
        s: cython.double
        w0: cython.double = 0.0
        w1: cython.double = 0.0
        tot: cython.double
        target: cython.double
        acc: cython.double
        a: cython.double
        b: cython.double
        qlo: cython.double
        qhi: cython.double
        q: cython.double
        m: cython.double
        for side in range(2):
            tri = self.etri[e, side]
            s = (self.tn[tri, 0] * (vx - self.tv[tri, 0, 0])
                 + self.tn[tri, 1] * (vy - self.tv[tri, 0, 1])
                 + self.tn[tri, 2] * (vz - self.tv[tri, 0, 2]))
            if fabs(s) <= self.eps:
                self.niv[side] = 0
                continue
            cx = self.ec[e, side, 0]
            cy = self.ec[e, side, 1]
            cz = self.ec[e, side, 2]
            n = self.visible(side, vx, vy, vz, xx, xy, xz, cx, cy, cz, skip0, skip1)
            acc = 0.0
            for i in range(n):
                a = 1.0 - self.iv[side * MAXIV + i, 0]
                b = 1.0 - self.iv[side * MAXIV + i, 1]
                acc += 0.5 * (a * a - b * b)
            if side == 0:
                w0 = self.ep[e, 0] * self.eh[e, 0] * acc
            else:
                w1 = self.ep[e, 1] * self.eh[e, 1] * acc
        tot = w0 + w1
        if not want_pick or tot <= 0.0:
            self.k_t = -1
            return tot
        target = upick * tot
        if target < w0 or w1 <= 0.0:
            side = 0
            m = w0
        else:
            side = 1
            target = target - w0
            m = w1
        # interval by mass (mass of [qlo, qhi] is proportional to qhi^2 - qlo^2)
        target = target / m
        n = self.niv[side]
        tot = 0.0
        for i in range(n):
            qhi = 1.0 - self.iv[side * MAXIV + i, 0]
            qlo = 1.0 - self.iv[side * MAXIV + i, 1]
            tot += qhi * qhi - qlo * qlo
        target = target * tot
        acc = 0.0
        i = 0
        qlo = 0.0
        qhi = 0.0
        while i < n:
            qhi = 1.0 - self.iv[side * MAXIV + i, 0]
            qlo = 1.0 - self.iv[side * MAXIV + i, 1]
            acc += qhi * qhi - qlo * qlo
            if acc >= target:
                break
            i += 1
        q = sqrt(qlo * qlo + uq * (qhi * qhi - qlo * qlo))
        cx = self.ec[e, side, 0]
        cy = self.ec[e, side, 1]
        cz = self.ec[e, side, 2]
        self.k_x = cx + q * (xx - cx)
        self.k_y = cy + q * (xy - cy)
        self.k_z = cz + q * (xz - cz)
        self.k_t = self.etri[e, side]
        return w0 + w1

    @cython.ccall
    @cython.exceptval(check=False)
    def area_pdf(self, pe: cython.int, ppx: cython.double, ppy: cython.double,
                 ppz: cython.double, vx: cython.double, vy: cython.double,
                 vz: cython.double, yx: cython.double, yy: cython.double,
                 yz: cython.double, tri: cython.int) -> cython.double:
        """Area density of hitting proxy point y on ``tri`` by a ray from v.

        ``pe`` is the edge of v (or -1 for an endpoint) and ``pp`` the vertex
        before v, which conditions the edge sampler.
        """
        dx: cython.double = yx - vx
        dy: cython.double = yy - vy
        dz: cython.double = yz - vz
        l2: cython.double = dx * dx + dy * dy + dz * dz
        cs: cython.double
        if l2 < 1e-300 or tri < 0:
            return 0.0
        cs = fabs(dx * self.tn[tri, 0] + dy * self.tn[tri, 1] + dz * self.tn[tri, 2]) / sqrt(l2)
        return self.dir_pdf(pe, ppx, ppy, ppz, vx, vy, vz, yx, yy, yz) * cs / l2


# ---------------------------------------------------------------------------
# Bidirectional tracer
# ---------------------------------------------------------------------------

@cython.ccall
def trace_bounce(sc: KScene, d: cython.int, pos: cython.double[:, :, :],
                 prox: cython.double[:, :, :], proxt: cython.int[:, :],
                 pick: cython.double[:, :, :], pickt: cython.int[:, :],
                 edge: cython.int[:, :], dsamp: cython.double[:, :],
                 dpick: cython.double[:, :], psamp: cython.double[:, :],
                 alpha: cython.double[:, :], plen: cython.double[:, :],
                 co: cython.double[:, :], nv: cython.int[:],
                 u: cython.double[:, :], absorb: cython.double) -> cython.int:
    """Extend every subpath that currently has ``d`` nodes by one edge node.

    Node ``d - 1`` emits a ray (uniform sphere at an endpoint, the edge sampler
    at an edge); the hit triangle picks one of its convex edges, the hit point
    is projected through the opposite vertex onto that edge, and the real point
    must be visible from the emitter. Uses ``u[s, 0:7]``. Returns the number of
    successes.
    """
    n: cython.int = pos.shape[0]
    s: cython.int
    ok: cython.int = 0
    pe: cython.int
    tri: cython.int
    k: cython.int
    e2: cython.int
    side: cython.int
    skip0: cython.int
    skip1: cython.int
    branch: cython.int
    vx: cython.double
    vy: cython.double
    vz: cython.double
    ppx: cython.double = 0.0
    ppy: cython.double = 0.0
    ppz: cython.double = 0.0
    dx: cython.double
    dy: cython.double
    dz: cython.double
    z: cython.double
    rr: cython.double
    ph: cython.double
    pdir: cython.double
    ti: cython.double
    pi_: cython.double
    to: cython.double
    po: cython.double
    hx: cython.double
    hy: cython.double
    hz: cython.double
    wa: cython.double
    wb: cython.double
    wc: cython.double
    q: cython.double
    xx: cython.double
    xy: cython.double
    xz: cython.double
    cx: cython.double
    cy: cython.double
    cz: cython.double
    dist: cython.double
    lp2: cython.double
    cs: cython.double
    dd: cython.double
    rh: cython.double
    preal: cython.double
    ratio: cython.double
    bw: cython.double
    for s in range(n):
        if nv[s] != d:
            continue
        vx = pos[s, d - 1, 0]
        vy = pos[s, d - 1, 1]
        vz = pos[s, d - 1, 2]
        pe = edge[s, d - 1]
        skip0 = -1
        skip1 = -1
        if pe < 0:
            if not sc.endpoint_sample(vx, vy, vz, u[s, 0], u[s, 1], u[s, 2]):
                continue
            dx = sc.d_x
            dy = sc.d_y
            dz = sc.d_z
            pdir = sc.endpoint_pdf(vx, vy, vz, dx, dy, dz)
            if pdir <= 0.0:
                continue
        else:
            ppx = pos[s, d - 2, 0]
            ppy = pos[s, d - 2, 1]
            ppz = pos[s, d - 2, 2]
            if not sc.angles(pe, vx, vy, vz, ppx, ppy, ppz, False):
                continue
            ti = sc.a_th
            pi_ = sc.a_ph
            branch = edge_sample(ti, pi_, sc.ephi[pe], sc.esgn[pe], u[s, 0], u[s, 1],
                                 u[s, 2], u[s, 3], sc.par, sc.smp)
            to = sc.smp[0]
            po = sc.smp[1]
            pdir = sc.smp[2]
            if cos(po) < 1e-12 or pdir <= 0.0:
                continue
            dx = (cos(to) * cos(po) * sc.en[pe, 0] + sin(to) * cos(po) * sc.ebv[pe, 0]
                  - sin(po) * sc.et[pe, 0])
            dy = (cos(to) * cos(po) * sc.en[pe, 1] + sin(to) * cos(po) * sc.ebv[pe, 1]
                  - sin(po) * sc.et[pe, 1])
            dz = (cos(to) * cos(po) * sc.en[pe, 2] + sin(to) * cos(po) * sc.ebv[pe, 2]
                  - sin(po) * sc.et[pe, 2])
            skip0 = sc.etri[pe, 0]
            skip1 = sc.etri[pe, 1]
        tri = sc.ray_closest(vx, vy, vz, dx, dy, dz, skip0, skip1)
        if tri < 0 or sc.tne[tri] == 0:
            continue
        hx = vx + sc.h_t * dx
        hy = vy + sc.h_t * dy
        hz = vz + sc.h_t * dz
        k = cython.cast(cython.int, u[s, 4] * sc.tne[tri])
        if k >= sc.tne[tri]:
            k = sc.tne[tri] - 1
        e2 = sc.tedge[tri, k]
        side = 0 if sc.etri[e2, 0] == tri else 1
        # barycentric weight of the opposite vertex c of the chosen edge
        cx = sc.ec[e2, side, 0]
        cy = sc.ec[e2, side, 1]
        cz = sc.ec[e2, side, 2]
        wb = sc.h_u
        wc = sc.h_v
        wa = 1.0 - wb - wc
        if (sc.tv[tri, 0, 0] == cx and sc.tv[tri, 0, 1] == cy and sc.tv[tri, 0, 2] == cz):
            q = 1.0 - wa
        elif (sc.tv[tri, 1, 0] == cx and sc.tv[tri, 1, 1] == cy and sc.tv[tri, 1, 2] == cz):
            q = 1.0 - wb
        else:
            q = 1.0 - wc
        if q < 1e-12:
            continue
        xx = cx + (hx - cx) / q
        xy = cy + (hy - cy) / q
        xz = cz + (hz - cz) / q
        if pe >= 0 and not sc.angles(pe, vx, vy, vz, xx, xy, xz, True):
            continue
        if not sc.angles(e2, xx, xy, xz, vx, vy, vz, False):
            continue
        if sc.seg_blocked(vx, vy, vz, xx, xy, xz):
            continue
        dd = sc.proxy_density(e2, vx, vy, vz, xx, xy, xz, skip0, skip1, 0.0, 0.0, False)
        if dd <= 0.0:
            continue
        lp2 = (hx - vx) * (hx - vx) + (hy - vy) * (hy - vy) + (hz - vz) * (hz - vz)
        cs = fabs(dx * sc.tn[tri, 0] + dy * sc.tn[tri, 1] + dz * sc.tn[tri, 2])
        dist = sqrt((xx - vx) * (xx - vx) + (xy - vy) * (xy - vy) + (xz - vz) * (xz - vz))
        if dist < 1e-300 or lp2 < 1e-300:
            continue
        if pe >= 0:
            rh = sc.rho_at(pe, ppx, ppy, ppz, vx, vy, vz, xx, xy, xz)
            if rh != rh:
                continue
            preal = sc.dir_pdf(pe, ppx, ppy, ppz, vx, vy, vz, xx, xy, xz)
        else:
            # endpoint emission: the density ratio of real and pseudo directions is taken as 1
            rh = 1.0
            preal = pdir
        bw = pdir * cs / lp2 * dd
        ratio = preal / pdir * lp2 / (dist * dist * max(cs, COS_FLOOR))
        # reverse proxy of the emitter as seen from the new node
        if pe >= 0:
            dpick[s, d - 1] = sc.proxy_density(pe, xx, xy, xz, vx, vy, vz,
                                               sc.etri[e2, 0], sc.etri[e2, 1],
                                               u[s, 5], u[s, 6], True)
            pick[s, d - 1, 0] = sc.k_x
            pick[s, d - 1, 1] = sc.k_y
            pick[s, d - 1, 2] = sc.k_z
            pickt[s, d - 1] = sc.k_t
        pos[s, d, 0] = xx
        pos[s, d, 1] = xy
        pos[s, d, 2] = xz
        prox[s, d, 0] = hx
        prox[s, d, 1] = hy
        prox[s, d, 2] = hz
        proxt[s, d] = tri
        edge[s, d] = e2
        dsamp[s, d] = dd
        psamp[s, d] = bw
        alpha[s, d] = alpha[s, d - 1] * rh * exp(-absorb * dist) / dist / bw
        plen[s, d] = plen[s, d - 1] + dist
        co[s, d] = co[s, d - 1] * ratio
        nv[s] = d + 1
        ok += 1
    return ok


@cython.ccall
def connect(sc: KScene, fpos: cython.double[:, :, :], fprox: cython.double[:, :, :],
            fproxt: cython.int[:, :], fpick: cython.double[:, :, :],
            fpickt: cython.int[:, :], fedge: cython.int[:, :],
            fds: cython.double[:, :], fdp: cython.double[:, :],
            fps: cython.double[:, :], falpha: cython.double[:, :],
            fplen: cython.double[:, :], fco: cython.double[:, :], fnv: cython.int[:],
            bpos: cython.double[:, :, :], bprox: cython.double[:, :, :],
            bproxt: cython.int[:, :], bpick: cython.double[:, :, :],
            bpickt: cython.int[:, :], bedge: cython.int[:, :],
            bds: cython.double[:, :], bdp: cython.double[:, :],
            bps: cython.double[:, :], balpha: cython.double[:, :],
            bplen: cython.double[:, :], bco: cython.double[:, :], bnv: cython.int[:],
            pair: cython.int[:], u: cython.double[:, :], max_order: cython.int,
            mis: cython.int, use_os: cython.bint, cstar: cython.double,
            absorb: cython.double, c: cython.double, fs: cython.double,
            out_sum: cython.double[:], out_sq: cython.double[:],
            pv: cython.double[:, :], pve: cython.int[:],
            fwd: cython.double[:], bwd: cython.double[:],
            bbin: cython.int[:], bval: cython.double[:],
            log_p: cython.double[:, :, :], log_meta: cython.double[:, :],
            log_cap: cython.int, group: cython.int) -> cython.long:
    """Join forward and backward subpaths of every slot and splat into bins.

    Forward slot ``s`` is paired with backward slot ``pair[s]``. For each
    (F_i, B_j) with 1 <= i + j <= max_order the reverse proxy points of the
    two joined nodes are drawn fresh (four uniforms per connection), per-node
    forward and backward densities are assembled, and the sample is weighted
    by the balance heuristic (``mis`` = 1) or uniformly over the usable
    strategies (``mis`` = 0). Consecutive blocks of ``group`` slots form one
    statistical sample: their bin values are averaged before the sum and sum
    of squares are updated. Returns the number of logged connections.
    """
    nslot: cython.int = fpos.shape[0]
    nbins: cython.int = out_sum.shape[0]
    s: cython.int
    sb: cython.int
    i: cython.int
    j: cython.int
    k: cython.int
    t: cython.int
    n: cython.int
    m: cython.int
    nb: cython.int
    bi: cython.int
    ue: cython.int
    ef: cython.int
    eb: cython.int
    tri: cython.int
    nuse: cython.int
    gsize: cython.int
    pkft: cython.int = -1
    pkbt: cython.int = -1
    nlog: cython.long = 0
    fx: cython.double
    fy: cython.double
    fz: cython.double
    gx: cython.double
    gy: cython.double
    gz: cython.double
    dist: cython.double
    rf: cython.double
    rb: cython.double
    df_: cython.double
    db_: cython.double
    pkfx: cython.double = 0.0
    pkfy: cython.double = 0.0
    pkfz: cython.double = 0.0
    pkbx: cython.double = 0.0
    pkby: cython.double = 0.0
    pkbz: cython.double = 0.0
    yx: cython.double
    yy: cython.double
    yz: cython.double
    dd: cython.double
    ps: cython.double
    tot: cython.double
    w: cython.double
    amp: cython.double
    cov: cython.double
    delay: cython.double
    val: cython.double
    found: cython.bint
    nb = 0
    for s in range(nslot):
        sb = pair[s]
        ue = 0
        for i in range(fnv[s]):
            for j in range(bnv[sb]):
                n = i + j
                if n < 1 or n > max_order:
                    continue
                ef = fedge[s, i]
                eb = bedge[sb, j]
                if ef >= 0 and ef == eb:
                    continue
                fx = fpos[s, i, 0]
                fy = fpos[s, i, 1]
                fz = fpos[s, i, 2]
                gx = bpos[sb, j, 0]
                gy = bpos[sb, j, 1]
                gz = bpos[sb, j, 2]
                dist = sqrt((gx - fx) * (gx - fx) + (gy - fy) * (gy - fy) + (gz - fz) * (gz - fz))
                if dist < 1e-300:
                    continue
                rf = 1.0
                rb = 1.0
                if i >= 1:
                    rf = sc.rho_at(ef, fpos[s, i - 1, 0], fpos[s, i - 1, 1], fpos[s, i - 1, 2],
                                   fx, fy, fz, gx, gy, gz)
                if j >= 1:
                    rb = sc.rho_at(eb, bpos[sb, j - 1, 0], bpos[sb, j - 1, 1],
                                   bpos[sb, j - 1, 2], gx, gy, gz, fx, fy, fz)
                if rf != rf or rb != rb or rf == 0.0 or rb == 0.0:
                    continue
                if sc.seg_blocked(fx, fy, fz, gx, gy, gz):
                    continue
                df_ = 0.0
                db_ = 0.0
                if i >= 1:
                    df_ = sc.proxy_density(ef, gx, gy, gz, fx, fy, fz,
                                           sc.etri[eb, 0] if eb >= 0 else -1,
                                           sc.etri[eb, 1] if eb >= 0 else -1,
                                           u[s, 4 * ue], u[s, 4 * ue + 1], True)
                    pkfx = sc.k_x
                    pkfy = sc.k_y
                    pkfz = sc.k_z
                    pkft = sc.k_t
                if j >= 1:
                    db_ = sc.proxy_density(eb, fx, fy, fz, gx, gy, gz,
                                           sc.etri[ef, 0] if ef >= 0 else -1,
                                           sc.etri[ef, 1] if ef >= 0 else -1,
                                           u[s, 4 * ue + 2], u[s, 4 * ue + 3], True)
                    pkbx = sc.k_x
                    pkby = sc.k_y
                    pkbz = sc.k_z
                    pkbt = sc.k_t
                ue += 1
                # path vertices 0..n+1 from source to listener
                for k in range(n + 2):
                    if k <= i:
                        pv[k, 0] = fpos[s, k, 0]
                        pv[k, 1] = fpos[s, k, 1]
                        pv[k, 2] = fpos[s, k, 2]
                        pve[k] = fedge[s, k]
                    else:
                        pv[k, 0] = bpos[sb, n + 1 - k, 0]
                        pv[k, 1] = bpos[sb, n + 1 - k, 1]
                        pv[k, 2] = bpos[sb, n + 1 - k, 2]
                        pve[k] = bedge[sb, n + 1 - k]
                for k in range(1, n + 1):
                    m = n + 1 - k
                    # forward density: ray from vertex k-1 (arrived from k-2)
                    if k <= i:
                        fwd[k] = fps[s, k]
                    else:
                        if m < j:
                            yx = bpick[sb, m, 0]
                            yy = bpick[sb, m, 1]
                            yz = bpick[sb, m, 2]
                            tri = bpickt[sb, m]
                            dd = bdp[sb, m]
                        else:
                            yx = pkbx
                            yy = pkby
                            yz = pkbz
                            tri = pkbt
                            dd = db_
                        if dd > 0.0:
                            if k >= 2:
                                fwd[k] = sc.area_pdf(pve[k - 1], pv[k - 2, 0], pv[k - 2, 1],
                                                     pv[k - 2, 2], pv[k - 1, 0], pv[k - 1, 1],
                                                     pv[k - 1, 2], yx, yy, yz, tri) * dd
                            else:
                                fwd[k] = sc.area_pdf(-1, 0.0, 0.0, 0.0, pv[0, 0], pv[0, 1],
                                                     pv[0, 2], yx, yy, yz, tri) * dd
                        else:
                            fwd[k] = 0.0
                    # backward density: ray from vertex k+1 (arrived from k+2)
                    if k > i:
                        bwd[k] = bps[sb, m]
                    else:
                        if k < i:
                            yx = fpick[s, k, 0]
                            yy = fpick[s, k, 1]
                            yz = fpick[s, k, 2]
                            tri = fpickt[s, k]
                            dd = fdp[s, k]
                        else:
                            yx = pkfx
                            yy = pkfy
                            yz = pkfz
                            tri = pkft
                            dd = df_
                        if dd > 0.0:
                            if k <= n - 1:
                                bwd[k] = sc.area_pdf(pve[k + 1], pv[k + 2, 0], pv[k + 2, 1],
                                                     pv[k + 2, 2], pv[k + 1, 0], pv[k + 1, 1],
                                                     pv[k + 1, 2], yx, yy, yz, tri) * dd
                            else:
                                bwd[k] = sc.area_pdf(-1, 0.0, 0.0, 0.0, pv[n + 1, 0],
                                                     pv[n + 1, 1], pv[n + 1, 2],
                                                     yx, yy, yz, tri) * dd
                        else:
                            bwd[k] = 0.0
                # strategy t samples nodes 1..t forward and t+1..n backward
                ps = 0.0
                tot = 0.0
                nuse = 0
                for t in range(n + 1):
                    w = 1.0
                    for k in range(1, n + 1):
                        if k <= t:
                            w = w * fwd[k]
                        else:
                            w = w * bwd[k]
                    if w > 0.0:
                        nuse += 1
                        tot += w
                    if t == i:
                        ps = w
                if ps <= 0.0 or tot <= 0.0:
                    continue
                if mis == 1:
                    w = ps / tot
                else:
                    w = 1.0 / nuse
                amp = falpha[s, i] * balpha[sb, j] * rf * rb * exp(-absorb * dist) / dist * w
                cov = fco[s, i] * bco[sb, j]
                if use_os:
                    amp = amp * suppress(cov, cstar)
                delay = (fplen[s, i] + bplen[sb, j] + dist) / c
                if nlog < log_cap:
                    for k in range(1, n + 1):
                        log_p[nlog, 0, k - 1] = fwd[k]
                        log_p[nlog, 1, k - 1] = bwd[k]
                    log_meta[nlog, 0] = n
                    log_meta[nlog, 1] = i
                    log_meta[nlog, 2] = w
                    log_meta[nlog, 3] = amp
                    log_meta[nlog, 4] = delay
                    log_meta[nlog, 5] = cov
                    log_meta[nlog, 6] = s
                    nlog += 1
                if amp != amp:
                    continue
                if delay < 0.0 or delay * fs + 0.5 >= nbins:
                    continue
                bi = cython.cast(cython.int, delay * fs + 0.5)
                if bi >= nbins:
                    continue
                found = False
                for k in range(nb):
                    if bbin[k] == bi:
                        bval[k] += amp
                        found = True
                        break
                if not found:
                    bbin[nb] = bi
                    bval[nb] = amp
                    nb += 1
        if (s + 1) % group == 0 or s == nslot - 1:
            gsize = (s % group) + 1
            for k in range(nb):
                val = bval[k] / gsize
                out_sum[bbin[k]] += val
                out_sq[bbin[k]] += val * val
            nb = 0
    return nlog


# ---------------------------------------------------------------------------
# Inverse Russian roulette assignment
# ---------------------------------------------------------------------------

@cython.ccall
def irr_assign(order: cython.longlong[:], parent: cython.longlong[:],
               success: cython.int[:], w: cython.double[:],
               source: cython.longlong[:], share: cython.double[:],
               cnt: cython.longlong[:], rem: cython.double[:]) -> cython.long:
    """Hand failed slots to successful ones that share their parent node.

    ``order`` lists the live slots sorted by (parent, slot). Within each run
    of equal parents the failures are split among the successes in proportion
    to ``|w|`` by largest-remainder rounding (ties to the lower slot). Writes
    the donor slot into ``source`` (left unchanged for slots not replaced) and
    the ``n + 1`` divisor into ``share``. Returns the number of copies.
    """
    n: cython.long = order.shape[0]
    r0: cython.long = 0
    r1: cython.long
    i: cython.long
    j: cython.long
    s: cython.long
    best: cython.long
    ns: cython.long
    nf: cython.long
    left: cython.long
    copies: cython.long = 0
    wsum: cython.double
    quota: cython.double
    bestv: cython.double
    while r0 < n:
        r1 = r0 + 1
        while r1 < n and parent[order[r1]] == parent[order[r0]]:
            r1 += 1
        ns = 0
        wsum = 0.0
        for i in range(r0, r1):
            if success[order[i]]:
                ns += 1
                wsum += fabs(w[order[i]])
        nf = (r1 - r0) - ns
        if ns > 0 and nf > 0:
            left = nf
            for i in range(r0, r1):
                s = order[i]
                if not success[s]:
                    continue
                if wsum > 0.0:
                    quota = nf * fabs(w[s]) / wsum
                else:
                    quota = nf / cython.cast(cython.double, ns)
                cnt[s] = cython.cast(cython.longlong, quota)
                rem[s] = quota - cnt[s]
                left -= cnt[s]
            while left < 0:
                best = -1
                bestv = 2.0
                for i in range(r0, r1):
                    s = order[i]
                    if success[s] and cnt[s] > 0 and rem[s] < bestv:
                        best = s
                        bestv = rem[s]
                cnt[best] -= 1
                rem[best] = 1.0
                left += 1
            while left > 0:
                best = -1
                bestv = -1.0
                for i in range(r0, r1):
                    s = order[i]
                    if success[s] and rem[s] > bestv:
                        best = s
                        bestv = rem[s]
                cnt[best] += 1
                rem[best] = -1.0
                left -= 1
            # failures in slot order go to successes in slot order
            j = r0
            for i in range(r0, r1):
                s = order[i]
                if not success[s]:
                    continue
                share[s] = cnt[s] + 1.0
                while cnt[s] > 0:
                    while success[order[j]]:
                        j += 1
                    source[order[j]] = s
                    share[order[j]] = share[s]
                    cnt[s] -= 1
                    copies += 1
                    j += 1
        r0 = r1
    return copies
