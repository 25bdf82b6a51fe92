"""Oracle comparisons shared by ``edgetrace validate`` and the acceptance tests.

Every check returns a ``CheckResult`` holding the measured value, the
threshold it was held to and a JSON-friendly detail dict.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import _backend, oracles, scenes
from .bedrf import DIRICHLET, NEUMANN, bc_sign, df_dr, f, kappa
from .config import SimulationConfig
from .geometry import Scene, TriangleMesh
from .ir import read_csv, snr_of_runs
from .sampler import pdf_grid, sample_many
from .transport import measure_conversion, simulate, strategy_weights


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: str
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: {self.value:.6g} (need {self.threshold})"

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": float(self.value),
                "threshold": self.threshold, "detail": _jsonable(self.detail)}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def _scene(name):
    b = scenes.get(name)
    return b, Scene(b.mesh, b.bc_of_material())


# ---------------------------------------------------------------------------
# BEDRF
# ---------------------------------------------------------------------------

def random_angle_tuples(n: int, rng: np.random.Generator):
    """Half angle, then (theta_i, phi_i, theta_o, phi_o) strictly inside the domain."""
    phi = rng.uniform(0.02, math.pi / 2 - 0.02, n)
    lim = math.pi - phi
    ti = rng.uniform(-1, 1, n) * lim * 0.999
    to = rng.uniform(-1, 1, n) * lim * 0.999
    pi_ = rng.uniform(-1, 1, n) * (math.pi / 2) * 0.999
    po = rng.uniform(-1, 1, n) * (math.pi / 2) * 0.999
    return phi, ti, pi_, to, po


def check_reciprocity(n: int = 100_000, seed: int = 0, tol: float = 1e-9) -> CheckResult:
    """``rho(i -> o) == rho(o -> i)`` for both boundary conditions."""
    k = _backend.kernels
    rng = np.random.default_rng(seed)
    phi, ti, pi_, to, po = random_angle_tuples(n, rng)
    worst, fails, singular = 0.0, 0, 0
    for bc in (DIRICHLET, NEUMANN):
        sgn = bc_sign(bc)
        for q in range(n):
            a = k.rho(ti[q], pi_[q], to[q], po[q], phi[q], sgn)
            b = k.rho(to[q], po[q], ti[q], pi_[q], phi[q], sgn)
            if a != a or b != b:
                singular += 1
                continue
            err = abs(a - b) / max(abs(a), abs(b), 1e-300)
            worst = max(worst, err)
            fails += err > tol
    return CheckResult("reciprocity", fails == 0, worst, f"max relative error <= {tol:g}",
                       {"tuples": n, "failures": fails, "singular": singular})


def check_derivative(n: int = 2000, seed: int = 1, tol: float = 1e-6) -> CheckResult:
    """``df_dr`` against a central difference of ``f`` in ``log r``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    h = 1e-5
    for _ in range(n):
        phi = rng.uniform(0.05, math.pi / 2 - 0.05)
        kap = kappa(phi)
        t0, t1 = np.sort(rng.uniform(-math.pi, math.pi, 2))
        th = rng.uniform(-math.pi + phi, math.pi - phi)
        rl = rng.uniform(-3.0, -0.05)
        an = df_dr(t0, t1, th, rl, kap)
        fd = (f(t0, t1, th, rl + h, kap) - f(t0, t1, th, rl - h, kap)) / (2 * h)
        worst = max(worst, abs(an - fd) / max(abs(an), 1e-3))
    return CheckResult("bedrf derivative", worst <= tol, worst, f"relative error <= {tol:g}",
                       {"cases": n, "step": h})


# ---------------------------------------------------------------------------
# Sampler
# ---------------------------------------------------------------------------

def _gl(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1) * (b - a) + a, 0.5 * w * (b - a)


def sampler_mass(theta_i, phi_i, phi, bc, n_theta=512, n_phi=256):
    """Total probability of the edge sampler on a Gauss-Legendre grid split at ``phi_i``."""
    th, wt = _gl(phi - math.pi, math.pi - phi, n_theta)
    p1, w1 = _gl(-math.pi / 2, phi_i, n_phi)
    p2, w2 = _gl(phi_i, math.pi / 2, n_phi)
    ph, wp = np.concatenate([p1, p2]), np.concatenate([w1, w2])
    dens = pdf_grid(theta_i, phi_i, th[:, None], ph[None, :], phi, bc)
    return float((dens * np.cos(ph)[None, :] * wt[:, None] * wp[None, :]).sum())


def random_sampler_params(n: int, seed: int = 2):
    rng = np.random.default_rng(seed)
    out = []
    for q in range(n):
        phi = rng.uniform(0.05, 1.5)
        ti = rng.uniform(phi - math.pi, math.pi - phi)
        pi_ = rng.uniform(-1.4, 1.4)
        out.append((ti, pi_, phi, (DIRICHLET, NEUMANN)[q % 2]))
    return out


def check_sampler_normalization(n_sets: int = 20, tol: float = 1e-3, seed: int = 2):
    worst, masses = 0.0, []
    for ti, pi_, phi, bc in random_sampler_params(n_sets, seed):
        m = sampler_mass(ti, pi_, phi, bc)
        masses.append(m)
        worst = max(worst, abs(m - 1.0))
    return CheckResult("sampler normalization", worst <= tol, worst, f"|mass - 1| <= {tol:g}",
                       {"masses": masses})


def sampler_chi_square(theta_i, phi_i, phi, bc, n: int, seed: int, bins=(24, 24),
                       gl: int = 12):
    """Chi-square of sampled (theta_o, phi_o) against cell integrals of the density."""
    rng = np.random.default_rng(seed)
    to, po, _, _ = sample_many(theta_i, phi_i, phi, bc, rng.random((n, 4)))
    t_edges = np.linspace(phi - math.pi, math.pi - phi, bins[0] + 1)
    half = bins[1] // 2
    p_edges = np.concatenate([np.linspace(-math.pi / 2, phi_i, half + 1),
                              np.linspace(phi_i, math.pi / 2, bins[1] - half + 1)[1:]])
    counts, _, _ = np.histogram2d(to, po, bins=(t_edges, p_edges))
    expect = np.zeros_like(counts)
    for a in range(bins[0]):
        th, wt = _gl(t_edges[a], t_edges[a + 1], gl)
        for b in range(bins[1]):
            ph, wp = _gl(p_edges[b], p_edges[b + 1], gl)
            dens = pdf_grid(theta_i, phi_i, th[:, None], ph[None, :], phi, bc)
            expect[a, b] = (dens * np.cos(ph)[None, :] * wt[:, None] * wp[None, :]).sum()
    expect = expect / expect.sum() * n
    # pool sparse cells so every expected count is at least 5
    order = np.argsort(expect.ravel())
    e, c = expect.ravel()[order], counts.ravel()[order]
    keep = e >= 5
    e_pool, c_pool = e[~keep].sum(), c[~keep].sum()
    e_use, c_use = list(e[keep]), list(c[keep])
    if e_pool > 0:
        e_use.append(e_pool)
        c_use.append(c_pool)
    e_use, c_use = np.array(e_use), np.array(c_use)
    chi2 = float(((c_use - e_use) ** 2 / e_use).sum())
    dof = len(e_use) - 1
    return chi2, dof, float(stats.chi2.sf(chi2, dof))


def check_sampler_chi_square(n: int = 1_000_000, alpha: float = 1e-3, seed: int = 3):
    cases = [(0.4, 0.3, math.pi / 4, DIRICHLET), (-1.2, -0.6, 0.3, NEUMANN)]
    pvals, detail = [], []
    for q, (ti, pi_, phi, bc) in enumerate(cases):
        chi2, dof, pv = sampler_chi_square(ti, pi_, phi, bc, n, seed + q)
        pvals.append(pv)
        detail.append({"case": [ti, pi_, phi, bc], "chi2": chi2, "dof": dof, "p": pv})
    worst = min(pvals)
    return CheckResult("sampler chi-square", worst >= alpha, worst, f"p >= {alpha:g}",
                       {"cases": detail, "samples": n})


# ---------------------------------------------------------------------------
# Measure projection
# ---------------------------------------------------------------------------

def occlusion_scenario(rng: np.random.Generator):
    """A convex wedge edge, a viewer in its exterior and one to three occluders.

    Returns ``(mesh, (a, b), viewer)``; the wedge faces are the first two
    triangles and the occluders are free triangles between viewer and edge.
    """
    while True:
        phi = rng.uniform(0.2, 1.3)
        length = rng.uniform(1.0, 3.0)
        depth = rng.uniform(0.8, 2.0)
        a, b = np.array([0.0, 0.0, 0.0]), np.array([0.0, 0.0, length])
        ang = [math.pi - phi, -(math.pi - phi)]
        faces = []
        for g in ang:
            d = np.array([math.cos(g), math.sin(g), 0.0])
            faces.append(a + depth * d + np.array([0, 0, rng.uniform(0.0, length)]))
        th = rng.uniform(-(math.pi - phi) + 0.2, (math.pi - phi) - 0.2)
        dist = rng.uniform(2.0, 4.0)
        viewer = np.array([dist * math.cos(th), dist * math.sin(th), rng.uniform(-1, length + 1)])
        tris = [(a, b, faces[0]), (a, b, faces[1])]
        for _ in range(rng.integers(1, 4)):
            target = a + rng.uniform(0, 1) * (b - a) + 0.3 * (faces[rng.integers(2)] - a)
            mid = viewer + rng.uniform(0.3, 0.7) * (target - viewer)
            size = rng.uniform(0.3, 1.0)
            tris.append(tuple(mid + size * rng.normal(size=3) for _ in range(3)))
        pts = np.array([a, b, faces[0], faces[1]] + [p for t in tris[2:] for p in t])
        wedge = scenes._orient([(0, 1, 2), (0, 1, 3)], pts,
                               0.5 * (a + b) - np.array([0.1, 0.0, 0.0]))
        free = [(4 + 3 * q, 5 + 3 * q, 6 + 3 * q) for q in range(len(tris) - 2)]
        mesh = TriangleMesh(pts, np.array(wedge + free))
        if mesh.areas().min() > 1e-6:
            return mesh, (a, b), viewer


def _edge_mass(sc, e, viewer, s0, s1, n_gl, n_probe=32):
    """Integral of ``D(x(s) | viewer)`` over visible ``s`` in ``[s0, s1]``.

    Visibility switches of ``x(s)`` are bracketed on a probe grid and refined
    by bisection; each visible piece is integrated by Gauss-Legendre.
    """
    edge = sc.edges[e]

    def x(s):
        return edge.pa + s * (edge.pb - edge.pa)

    def vis(s):
        return sc.segment_visible(viewer, x(s))

    grid = np.linspace(s0, s1, n_probe + 1)
    flags = [vis(g) for g in grid]
    cuts = [s0]
    for q in range(n_probe):
        if flags[q] != flags[q + 1]:
            lo, hi = grid[q], grid[q + 1]
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                if vis(mid) == flags[q]:
                    lo = mid
                else:
                    hi = mid
            cuts.append(0.5 * (lo + hi))
    cuts.append(s1)
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo or not vis(0.5 * (lo + hi)):
            continue
        nodes, wts = _gl(lo, hi, n_gl)
        total += sum(w * measure_conversion(sc, e, x(t), viewer) for t, w in zip(nodes, wts))
    return total


def check_measure_projection(n_scenarios: int = 50, n_samples: int = 20_000,
                             bins: int = 20, seed: int = 4, max_outside: float = 0.0,
                             n_quad: int = 16):
    """Brute-force projected histograms vs the proxy measure ``D(x | viewer)``.

    Side ``k`` of the edge is sampled with probability proportional to
    ``p_k A_k`` (pick probability times area), so the projected edge-parameter
    density is ``D / Z`` with ``Z = sum_k p_k A_k``. Counts are compared with
    their multinomial 3 sigma bands.
    """
    rng = np.random.default_rng(seed)
    outside = total = 0
    worst = 0.0
    for _ in range(n_scenarios):
        mesh, (a, b), viewer = occlusion_scenario(rng)
        sc = Scene(mesh)
        e = next(i for i, ed in enumerate(sc.edges)
                 if {tuple(ed.pa), tuple(ed.pb)} == {tuple(a), tuple(b)})
        edge = sc.edges[e]
        tri_of = [edge.triangles[0], edge.triangles[1]]
        corners = mesh.corners
        weights = []
        for t in tri_of:
            nedges = sum(1 for ed in sc.edges if t in ed.triangles)
            area = 0.5 * np.linalg.norm(np.cross(corners[t, 1] - corners[t, 0],
                                                 corners[t, 2] - corners[t, 0]))
            weights.append(area / nedges)
        weights = np.array(weights)
        n_side = rng.multinomial(n_samples, weights / weights.sum())
        counts = np.zeros(bins)
        for side, t in enumerate(tri_of):
            c = next(corners[t, v] for v in range(3)
                     if not (np.allclose(corners[t, v], a) or np.allclose(corners[t, v], b)))
            occ = [corners[o] for o in range(len(corners)) if o != t]
            cnt, _, _ = oracles.bruteforce_triangle_projection(
                (edge.pa, edge.pb, c), occ, viewer, int(n_side[side]), rng, bins)
            counts += cnt
        # expected probability per bin from the kernel measure
        prob = np.array([_edge_mass(sc, e, viewer, k / bins, (k + 1) / bins, n_quad)
                         for k in range(bins)]) * edge.length
        prob = prob / weights.sum()
        expect = n_samples * prob
        sd = np.sqrt(np.maximum(n_samples * prob * (1 - prob), 1e-12))
        z = np.abs(counts - expect) / sd
        bad = z > 3
        outside += int(bad.sum())
        total += bins
        worst = max(worst, float(z.max()))
    frac = outside / total
    return CheckResult("measure projection", frac <= max_outside, frac,
                       f"fraction of bins outside 3 sigma <= {max_outside:g}",
                       {"scenarios": n_scenarios, "bins": total, "outside": outside,
                        "worst_z": worst})


# ---------------------------------------------------------------------------
# Impulse responses
# ---------------------------------------------------------------------------

def support(ref):
    nz = np.nonzero(ref)[0]
    return slice(int(nz[0]), int(nz[-1]) + 1)


def check_wedge_mc(samples: int = 12_000, seed: int = 0, min_fraction: float = 0.95,
                   ir_length: float = 0.04, budget: float = 10.0):
    """Monte Carlo wedge IR vs the edge-quadrature oracle, bin by bin within 3 SE."""
    b, sc = _scene("wedge")
    fs = 48000.0
    nbins = int(round(ir_length * fs))
    w = oracles.Wedge.from_edge(sc.edges[0])
    ref = oracles.edge_quadrature_ir(w, b.listener, fs, nbins, source=b.source)
    cfg = SimulationConfig(samples=samples, seed=seed, max_order=1, ir_length=ir_length,
                           direct=False)
    t = time.perf_counter()
    ir = simulate(sc, b.source, b.listener, cfg)
    dt = time.perf_counter() - t
    win = support(ref)
    p, se = ir.pressure[win], np.sqrt(ir.variance[win])
    ok = np.abs(p - ref[win]) <= 3 * se
    frac = float(ok.mean())
    return CheckResult("wedge Monte Carlo", frac >= min_fraction and dt <= budget, frac,
                       f"fraction within 3 SE >= {min_fraction} in <= {budget:g} s",
                       {"bins": int(ok.size), "seconds": dt, "window": [win.start, win.stop]})


KELLER_CASES = [(7 * math.pi / 12, 0.0, -math.pi / 2), (7 * math.pi / 12, 0.3, -math.pi / 2),
                (0.3, -0.4, 2.0)]


def check_keller(tol: float = 0.01):
    """Plane-wave edge quadrature vs the Keller closed form (relative L2)."""
    fs, nb, phi = 48000.0, int(0.03 * 48000), math.pi / 4
    n, t = np.array([1.0, 0, 0]), np.array([0, 0, 1.0])
    worst, rows = 0.0, []
    for bc in (DIRICHLET, NEUMANN):
        w = oracles.Wedge(np.array([0, 0, -15.0]), np.array([0, 0, 15.0]), n, phi, bc)
        for ti, pi_, to in KELLER_CASES:
            L = oracles.keller_listener(to, pi_, 1.0, n, t)
            d = oracles.plane_direction(ti, pi_, n, t)
            q = oracles.edge_quadrature_ir(w, L, fs, nb, plane_direction=d)
            k = oracles.keller_ir(ti, pi_, to, 1.0, phi, bc, fs, nb)
            err = float(np.linalg.norm(q - k) / np.linalg.norm(k))
            rows.append({"bc": bc, "angles": [ti, pi_, to], "l2": err})
            worst = max(worst, err)
    return CheckResult("quadrature vs Keller", worst <= tol, worst, f"relative L2 <= {tol:g}",
                       {"cases": rows})


def check_double_wedge(samples: int = 200_000, seed: int = 0, tol: float = 0.05,
                       window: float = 0.03):
    """Second-order IR of the double wedge vs nested edge quadrature."""
    b, sc = _scene("double-wedge")
    fs = 48000.0
    nb = int(round(window * fs))
    w1, w2 = sorted((oracles.Wedge.from_edge(e) for e in sc.edges), key=lambda w: w.a[0])
    ref = oracles.double_edge_ir(w1, w2, b.source, b.listener, fs, nb)
    cfg = SimulationConfig(samples=samples, seed=seed, max_order=2, ir_length=window,
                           direct=False)
    ir = simulate(sc, b.source, b.listener, cfg)
    err = float(np.linalg.norm(ir.pressure - ref) / np.linalg.norm(ref))
    return CheckResult("double wedge", err <= tol, err, f"relative L2 <= {tol:g}",
                       {"samples": samples, "bins": nb})


SLIT_WAVELENGTH = 0.1


def slit_intensity(samples: int = 50_000, positions=None, wavelength: float = SLIT_WAVELENGTH,
                   sample_rate: float = 192_000.0, seed: int = 7):
    """Intensity ``|P(c / lambda)|^2`` along a line behind the slit.

    The DFT of each listener's IR (direct path included) is evaluated at the
    single frequency ``c / lambda``.
    """
    b, sc = _scene("slit")
    ys = np.linspace(-8.0, 8.0, 25) if positions is None else np.asarray(positions, float)
    cfg = SimulationConfig(samples=samples, seed=seed, sample_rate=sample_rate)
    freq = cfg.c / wavelength
    dist = float(np.linalg.norm(b.listener - b.source))
    cfg = cfg.replace(ir_length=(dist + 10.0) / cfg.c)
    out = []
    for y in ys:
        L = b.listener + np.array([0.0, y, 0.0])
        p = simulate(sc, b.source, L, cfg).pressure
        n = np.arange(len(p))
        out.append(abs(np.sum(p * np.exp(-2j * np.pi * freq * n / sample_rate))) ** 2)
    screen = float(b.listener[0])
    return ys, np.array(out), oracles.single_slit_pattern(0.5, wavelength, screen, ys)


def check_single_slit(samples: int = 50_000, min_r: float = 0.99, budget: float = 60.0):
    t = time.perf_counter()
    ys, inten, ref = slit_intensity(samples)
    dt = time.perf_counter() - t
    r = float(np.corrcoef(inten, ref)[0, 1])
    norm = inten / inten[len(inten) // 2]
    return CheckResult("single slit", r >= min_r and dt <= budget, r,
                       f"Pearson >= {min_r} in <= {budget:g} s",
                       {"seconds": dt, "positions": ys, "intensity": norm, "analytic": ref})


TECHNIQUES = {
    "plain": dict(mis=False, irr=False, outlier_suppression=False),
    "mis": dict(mis=True, irr=False, outlier_suppression=False),
    "mis+irr+os": dict(mis=True, irr=True, outlier_suppression=True),
}


def check_technique_ordering(k: int = 50, samples: int = 12_000, emission: str = "uniform",
                             min_gain: float = 2.0, seed0: int = 0):
    """Band SNR of K independent IRs for each technique stack on the Boxes scene."""
    b, sc = _scene("boxes")
    snrs = {}
    for name, kw in TECHNIQUES.items():
        irs = [simulate(sc, b.source, b.listener,
                        SimulationConfig(samples=samples, seed=seed0 + r, emission=emission,
                                         **kw)).pressure for r in range(k)]
        snrs[name] = snr_of_runs(irs, 48000.0)
    v = list(snrs.values())
    ok = all(x < y for x, y in zip(v, v[1:])) and v[-1] - v[0] >= min_gain
    return CheckResult("technique ordering", ok, v[-1] - v[0],
                       f"strictly increasing and total gain >= {min_gain} dB", snrs)


def check_mis_partition(n_paths: int = 10_000, tol: float = 1e-9, seed: int = 0):
    """Balance weights of all strategies of logged paths sum to one."""
    b, sc = _scene("double-wedge")
    cfg = SimulationConfig(samples=6000, seed=seed, max_order=2, ir_length=0.03,
                           direct=False, outlier_suppression=False)
    worst_sum, worst_match, count = 0.0, 0.0, 0
    batch = 0
    while count < n_paths:
        ir = simulate(sc, b.source, b.listener, cfg.replace(seed=seed + batch),
                      log_cap=n_paths)
        batch += 1
        for lp, meta, *_ in ir.meta["logs"]:
            for r in range(len(meta)):
                if count >= n_paths:
                    break
                n, i, w = int(meta[r, 0]), int(meta[r, 1]), meta[r, 2]
                ws = strategy_weights(lp[r, 0, :n], lp[r, 1, :n])
                worst_sum = max(worst_sum, abs(ws.sum() - 1.0))
                worst_match = max(worst_match, abs(ws[i] - w))
                count += 1
    ok = worst_sum <= tol and worst_match <= tol
    return CheckResult("MIS partition of unity", ok, worst_sum, f"|sum - 1| <= {tol:g}",
                       {"paths": count, "kernel_weight_error": worst_match})


def time_boxes(samples: int, repeats: int = 3, seed: int = 0) -> float:
    b, sc = _scene("boxes")
    cfg = SimulationConfig(samples=samples, seed=seed, workers=1)
    best = math.inf
    for r in range(repeats):
        t = time.perf_counter()
        simulate(sc, b.source, b.listener, cfg.replace(seed=seed + r))
        best = min(best, time.perf_counter() - t)
    return best


def check_performance(budget: float = 0.5, tolerance: float = 0.3):
    time_boxes(3000, repeats=1)
    t12 = time_boxes(12_000)
    t6 = time_boxes(6_000)
    t24 = time_boxes(24_000)
    ratios = [t6 * 2 / t12, t24 / 2 / t12]
    lin = all(abs(r - 1.0) <= tolerance for r in ratios)
    return CheckResult("performance", t12 <= budget and lin, t12,
                       f"<= {budget:g} s at 12k samples, per-sample ratios within "
                       f"+-{tolerance:.0%}",
                       {"t6k": t6, "t12k": t12, "t24k": t24, "ratios": ratios,
                        "compiled": _backend.COMPILED})


def check_determinism(tmpdir, workers: int = 2, seed: int = 11):
    from pathlib import Path
    b, sc = _scene("boxes")
    cfg = SimulationConfig(samples=6000, seed=seed, workers=workers, batch_size=1500)
    paths = []
    for r in range(2):
        ir = simulate(sc, b.source, b.listener, cfg)
        p = Path(tmpdir) / f"run{r}.csv"
        ir.to_csv(p)
        paths.append(p)
    same = paths[0].read_bytes() == paths[1].read_bytes()
    rows = len(read_csv(paths[0])[0])
    return CheckResult("determinism", same, float(same), "identical bytes",
                       {"rows": rows, "workers": workers})


# ---------------------------------------------------------------------------
# Named suites for the CLI
# ---------------------------------------------------------------------------

SUITES = {
    "bedrf": lambda: [check_reciprocity(), check_derivative()],
    "sampler": lambda: [check_sampler_normalization(), check_sampler_chi_square()],
    "measure": lambda: [check_measure_projection()],
    "wedge-ir": lambda: [check_wedge_mc(), check_keller()],
    "single-slit": lambda: [check_single_slit()],
}


def run_suite(name: str):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name]()

