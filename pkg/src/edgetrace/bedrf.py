"""Closed-form BEDRF for Dirichlet and Neumann wedges and the Keller solution."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ._backend import kernels as _k

DIRICHLET = "dirichlet"
NEUMANN = "neumann"


class SingularityError(ArithmeticError):
    """Evaluation sits on a shadow-boundary singularity."""


class OutOfDomainError(ValueError):
    """Angles or directions outside the wedge exterior."""


def bc_sign(bc: str) -> float:
    if bc == DIRICHLET:
        return 1.0
    if bc == NEUMANN:
        return -1.0
    raise ValueError(f"unknown boundary condition {bc!r}")


@dataclass(frozen=True)
class WedgeAngles:
    theta_i: float
    phi_i: float
    theta_o: float
    phi_o: float
    phi: float

    def __post_init__(self):
        if not 0.0 < self.phi < math.pi / 2:
            raise OutOfDomainError("half-wedge angle must lie in (0, pi/2)")
        lim = math.pi - self.phi
        for th in (self.theta_i, self.theta_o):
            if not -lim <= th <= lim:
                raise OutOfDomainError("theta outside (phi - pi, pi - phi)")
        for p in (self.phi_i, self.phi_o):
            if not -math.pi / 2 <= p <= math.pi / 2:
                raise OutOfDomainError("phi_i/phi_o outside [-pi/2, pi/2]")

    def swapped(self):
        return WedgeAngles(self.theta_o, self.phi_o, self.theta_i, self.phi_i, self.phi)


@dataclass(frozen=True)
class ShadowBoundaries:
    lu: float
    lr: float
    ru: float
    rr: float


def kappa(phi: float) -> float:
    """Wedge index pi / (2 pi - 2 phi), in (1/2, 1) for phi in (0, pi/2)."""
    if not 0.0 <= phi < math.pi / 2:
        raise OutOfDomainError("half-wedge angle must lie in [0, pi/2)")
    return _k.kappa(phi)


def r_param(phi_i: float, phi_o: float) -> float:
    """Radius of the spherical decomposition; 1 on the Keller cone, 0 at the poles."""
    if abs(phi_i) > math.pi / 2 or abs(phi_o) > math.pi / 2:
        raise OutOfDomainError("phi_i/phi_o outside [-pi/2, pi/2]")
    return _k.r_param(phi_i, phi_o)


def f(theta0, theta1, theta, r_log, kap) -> float:
    """Arc function in (-1, 1), continuous in ``r_log``."""
    v = _k.f_val(theta0, theta1, theta, r_log, kap)
    if v != v:
        raise SingularityError("numerator and denominator vanish together")
    return v


def df_dr(theta0, theta1, theta, r_log, kap) -> float:
    """Closed-form derivative of ``f`` with respect to ``r_log``."""
    v = _k.df_dr(theta0, theta1, theta, r_log, kap)
    if v != v:
        raise SingularityError("vanishing denominator")
    return v


def shadow_boundaries(theta_i: float, phi: float) -> ShadowBoundaries:
    return ShadowBoundaries(theta_i - math.pi, -theta_i - math.pi + 2 * phi,
                            theta_i + math.pi, -theta_i + math.pi - 2 * phi)


def bedrf_terms(angles: WedgeAngles):
    """The two ``df_dr`` halves (upper pair, reflected pair) of the response."""
    a = angles
    kap = kappa(a.phi)
    r = r_param(a.phi_i, a.phi_o)
    if r <= 0.0:
        return 0.0, 0.0
    w = shadow_boundaries(a.theta_i, a.phi)
    rl = math.log(r)
    return (0.5 * df_dr(w.lu, w.ru, a.theta_o, rl, kap),
            0.5 * df_dr(w.lr, w.rr, a.theta_o, rl, kap))


def bedrf_eval(angles: WedgeAngles, bc: str) -> float:
    """Signed response: ``upper + reflected`` (Dirichlet) or ``upper - reflected``."""
    sgn = bc_sign(bc)
    v = _k.rho(angles.theta_i, angles.phi_i, angles.theta_o, angles.phi_o, angles.phi, sgn)
    if v != v:
        raise SingularityError("direction on a shadow boundary")
    return v


def keller_time_solution(theta_i, phi_i, theta_o, listener_distance, phi, bc, t,
                         c: float = 344.0) -> float:
    """Time-domain wedge response to a unit plane impulse.

    The plane wave reaches the edge point at the origin at t = 0 and the
    listener lies on that point's Keller cone at distance ``listener_distance``,
    so the first diffracted arrival is at ``listener_distance / c``.
    """
    R = listener_distance
    ci = math.cos(phi_i)
    si = math.sin(phi_i)
    if ci <= 0.0 or R <= 0.0:
        raise OutOfDomainError("need |phi_i| < pi/2 and a positive distance")
    s = (c * t - R * si * si) / ci
    d = R * ci
    if s <= d:
        return 0.0
    root = math.sqrt(s * s - d * d)
    r = (s - root) / d
    if r <= 0.0:
        return 0.0
    rl = math.log(r)
    dlr = -c / (root * ci)
    kap = kappa(phi)
    w = shadow_boundaries(theta_i, phi)
    sgn = bc_sign(bc)
    return dlr * (df_dr(w.ru, w.lu, theta_o, rl, kap) + sgn * df_dr(w.rr, w.lr, theta_o, rl, kap))
