"""Bidirectional Monte Carlo transport over the meta-path space.

A path alternates segments (media term ``exp(-alpha r)/r``) and edge nodes
(BEDRF). Edge nodes are reached through proxy triangles: a ray hits a triangle
adjacent to a convex edge at a pseudo point ``x'``, one of the triangle's
convex edges is chosen, and ``x'`` is projected through the opposite vertex
onto the edge to give the real point ``x``. Each edge node also carries a
reverse proxy ``x''`` drawn from the proxy set seen from the next vertex, so
every strategy's density can be evaluated for multiple importance sampling.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .config import SimulationConfig
from .geometry import Ray, Scene, TriangleMesh
from .ir import ImpulseResponse, PathSample

UNIFORMS_PER_BOUNCE = 7


@dataclass(frozen=True)
class MediaTerm:
    absorption: float = 0.0
    c: float = 344.0

    def __post_init__(self):
        if self.absorption < 0 or not self.c > 0:
            raise ValueError("need absorption >= 0 and c > 0")


def media_apply(amplitude: float, r: float, media: MediaTerm = MediaTerm()):
    """Amplitude after spreading and absorption over ``r``, and the delay."""
    if not r > 0:
        raise ValueError("degenerate segment length")
    return amplitude * math.exp(-media.absorption * r) / r, r / media.c


def suppress(co: float, co_star: float = 100.0) -> float:
    """Logistic coefficient ``C_s = (C*/C_o)(1 - e^{-2C_o/C*})/(1 + e^{-2C_o/C*})``."""
    return _backend.kernels.suppress(co, co_star)


def outlier_metric(p_real: float, p_pseudo: float, dist_pseudo: float, dist_real: float,
                   cos_theta: float) -> float:
    """Per-segment ratio of the real-point and pseudo-point densities."""
    return (p_real / p_pseudo) * dist_pseudo ** 2 / (dist_real ** 2 * max(cos_theta, 1e-6))


@dataclass
class MetaPathNode:
    kind: str
    x: np.ndarray
    x_pseudo: np.ndarray | None = None
    x_reverse: np.ndarray | None = None
    edge: int = -1
    alpha: float = 1.0
    delay: float = 0.0
    density: float = 0.0
    co: float = 1.0


class Subpaths:
    """Structure-of-arrays storage for ``n`` subpaths of up to ``depth`` edges."""

    FIELDS = ("pos", "prox", "proxt", "pick", "pickt", "edge", "ds", "dp", "ps",
              "alpha", "plen", "co", "node_id")

    def __init__(self, n: int, depth: int, start, group: int = 1):
        m = depth + 1
        self.n, self.depth = n, depth
        self.pos = np.zeros((n, m, 3))
        self.pos[:, 0] = start
        self.prox = np.zeros((n, m, 3))
        self.proxt = -np.ones((n, m), dtype=np.int32)
        self.pick = np.zeros((n, m, 3))
        self.pickt = -np.ones((n, m), dtype=np.int32)
        self.edge = -np.ones((n, m), dtype=np.int32)
        self.ds = np.zeros((n, m))
        self.dp = np.zeros((n, m))
        self.ps = np.zeros((n, m))
        self.alpha = np.zeros((n, m))
        self.alpha[:, 0] = 1.0
        self.plen = np.zeros((n, m))
        self.co = np.ones((n, m))
        self.nv = np.ones(n, dtype=np.int32)
        self.node_id = np.zeros((n, m), dtype=np.int64)
        # the endpoint is shared, but IRR only recycles within a group of slots
        self.node_id[:, 0] = -1 - np.arange(n) // group

    def bounce(self, scene: Scene, d: int, u: np.ndarray, absorption: float) -> int:
        ok = scene.kernels.trace_bounce(
            scene.k, d, self.pos, self.prox, self.proxt, self.pick, self.pickt, self.edge,
            self.ds, self.dp, self.ps, self.alpha, self.plen, self.co, self.nv,
            np.ascontiguousarray(u), absorption)
        hit = self.nv == d + 1
        self.node_id[hit, d] = np.nonzero(hit)[0] * (self.depth + 1) + d
        return ok

    def copy_rows(self, dst, src):
        for name in self.FIELDS:
            arr = getattr(self, name)
            arr[dst] = arr[src]
        self.nv[dst] = self.nv[src]

    def copy_slot(self, dst: int, src: int):
        for name in self.FIELDS:
            arr = getattr(self, name)
            arr[dst] = arr[src]
        self.nv[dst] = self.nv[src]

    def nodes(self, s: int, c: float = 344.0):
        out = []
        for d in range(self.nv[s]):
            e = int(self.edge[s, d])
            out.append(MetaPathNode(
                "endpoint" if d == 0 else "edge", self.pos[s, d].copy(),
                self.prox[s, d].copy() if d else None,
                self.pick[s, d].copy() if d and self.pickt[s, d] >= 0 else None,
                e, float(self.alpha[s, d]), float(self.plen[s, d] / c),
                float(self.ps[s, d]), float(self.co[s, d])))
        return out


def irr_plan(alive, success, parent, intensity, kernels=None):
    """Inverse Russian roulette assignment for one bounce.

    Within each group of slots that share a parent node, failed slots are
    handed to successful ones in proportion to ``|intensity|`` using
    largest-remainder rounding (ties broken by slot index). Returns
    ``source`` (slot whose new node each slot takes, or -1 to leave it) and
    ``share`` (the n + 1 divisor applied to the amplitude of each copy).
    """
    K = kernels or _backend.kernels
    alive = np.asarray(alive, bool)
    parent = np.ascontiguousarray(parent, dtype=np.int64)
    n = len(alive)
    live = np.nonzero(alive)[0]
    order = live[np.lexsort((live, parent[live]))].astype(np.int64)
    source = -np.ones(n, dtype=np.int64)
    share = np.ones(n)
    K.irr_assign(order, parent, np.ascontiguousarray(success, dtype=np.int32),
                 np.ascontiguousarray(intensity, dtype=float), source, share,
                 np.zeros(n, dtype=np.int64), np.zeros(n))
    return source, share


def inverse_russian_roulette(sub: Subpaths, d: int, alive_before) -> int:
    """Apply ``irr_plan`` to the nodes created at depth ``d``; returns copies made."""
    success = sub.nv == d + 1
    source, share = irr_plan(alive_before, success, sub.node_id[:, d - 1],
                             np.where(success, sub.alpha[:, d], 0.0))
    dst = np.nonzero(source >= 0)[0]
    if len(dst):
        sub.copy_rows(dst, source[dst])
    hit = sub.nv == d + 1
    sub.alpha[hit, d] /= share[hit]
    return len(dst)


def group_pairing(n: int, group: int, rng: np.random.Generator):
    """Random backward partner for each forward slot, permuted within groups."""
    keys = np.arange(n) // group + rng.random(n)
    return np.argsort(keys, kind="stable").astype(np.int32)


class Engine:
    """Runs fixed-size batches; batch ``b`` uses ``default_rng([seed, b])``."""

    def __init__(self, scene: Scene, source, listener, config: SimulationConfig,
                 log_cap: int = 0):
        self.scene = scene
        self.source = np.asarray(source, dtype=float)
        self.listener = np.asarray(listener, dtype=float)
        self.cfg = config
        self.depth = config.subpath_depth
        self.log_cap = log_cap

    def batch_sizes(self):
        n, b = self.cfg.samples, self.cfg.batch_size
        return [min(b, n - i) for i in range(0, n, b)]

    def trace(self, start, n, rng):
        sub = Subpaths(n, self.depth, start, self.cfg.group_size)
        for d in range(1, self.depth + 1):
            u = rng.random((n, UNIFORMS_PER_BOUNCE))
            alive = sub.nv == d
            if not alive.any():
                continue
            sub.bounce(self.scene, d, u, self.cfg.absorption)
            if self.cfg.irr:
                inverse_russian_roulette(sub, d, alive)
        return sub

    def run_batch(self, index: int, n: int, nbins: int):
        cfg = self.cfg
        rng = np.random.default_rng([cfg.seed, index])
        fw = self.trace(self.source, n, rng)
        bw = self.trace(self.listener, n, rng)
        pair = group_pairing(n, self.cfg.group_size, rng)
        m = self.depth + 1
        u = rng.random((n, 4 * m * m))
        total = np.zeros(nbins)
        total_sq = np.zeros(nbins)
        cap = self.log_cap
        g = self.cfg.group_size
        log_p = np.zeros((max(cap, 1), 2, max(cfg.max_order, 1)))
        log_meta = np.zeros((max(cap, 1), 8))
        nlog = self.scene.kernels.connect(
            self.scene.k, fw.pos, fw.prox, fw.proxt, fw.pick, fw.pickt, fw.edge, fw.ds,
            fw.dp, fw.ps, fw.alpha, fw.plen, fw.co, fw.nv, bw.pos, bw.prox, bw.proxt,
            bw.pick, bw.pickt, bw.edge, bw.ds, bw.dp, bw.ps, bw.alpha, bw.plen, bw.co,
            bw.nv, pair, u, cfg.max_order, 1 if cfg.mis else 0, bool(cfg.outlier_suppression),
            cfg.co_star, cfg.absorption, cfg.c, cfg.sample_rate, total, total_sq,
            np.zeros((cfg.max_order + 2, 3)), np.zeros(cfg.max_order + 2, dtype=np.int32),
            np.zeros(cfg.max_order + 2), np.zeros(cfg.max_order + 2),
            np.zeros(g * m * m, dtype=np.int32), np.zeros(g * m * m), log_p, log_meta, cap, g)
        ngroups = -(-n // g)
        return total, total_sq, ngroups, (log_p[:nlog], log_meta[:nlog], fw, bw, pair)


_WORKER = {}


def _init_worker(mesh, edges, source, listener, cfg):
    scene = Scene(mesh, edges=edges, emission=cfg.emission)
    _WORKER["engine"] = Engine(scene, source, listener, cfg)


def _run_in_worker(args):
    index, n, nbins = args
    total, total_sq, n, _ = _WORKER["engine"].run_batch(index, n, nbins)
    return total, total_sq, n


def simulate(scene, source, listener, config: SimulationConfig, workers: int | None = None,
             log_cap: int = 0):
    """Impulse response at ``listener`` for a unit impulse at ``source``.

    Output depends only on (scene, config, seed): batches have a fixed size,
    draw from per-batch streams and are merged in batch order, so the worker
    count changes wall time but not the bins.
    """
    if isinstance(scene, TriangleMesh):
        scene = Scene(scene, config.bc_of_material(), emission=config.emission)
    scene = scene.with_emission(config.emission)
    src = np.asarray(source, dtype=float)
    lst = np.asarray(listener, dtype=float)
    ir = ImpulseResponse.empty(config.sample_rate, config.ir_length)
    engine = Engine(scene, src, lst, config, log_cap=log_cap)
    sizes = engine.batch_sizes()
    jobs = [(i, n, ir.nbins) for i, n in enumerate(sizes)]
    workers = workers or config.workers
    logs = []
    if scene.edges:
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(min(workers, len(jobs)), initializer=_init_worker,
                                     initargs=(scene.mesh, scene.edges, src, lst, config)) as ex:
                results = list(ex.map(_run_in_worker, jobs))
        else:
            results = []
            for job in jobs:
                total, total_sq, n, lg = engine.run_batch(*job)
                results.append((total, total_sq, n))
                if log_cap:
                    logs.append(lg)
        for total, total_sq, n in results:
            ir.add_batch(total, total_sq, n)
    else:
        ir.count = config.samples
    if config.direct:
        dist = float(np.linalg.norm(lst - src))
        if dist > 0 and scene.segment_visible(src, lst):
            amp, delay = media_apply(1.0, dist, MediaTerm(config.absorption, config.c))
            ir.add_deterministic(delay, amp)
    ir.meta.update(samples=config.samples, seed=config.seed, edges=len(scene.edges),
                   compiled=_backend.is_compiled(scene.kernels))
    if log_cap:
        ir.meta["logs"] = logs
    return ir


# ---------------------------------------------------------------------------
# Single-query helpers mirroring the kernel steps
# ---------------------------------------------------------------------------

def measure_conversion(scene: Scene, edge: int, x, origin) -> float:
    """Proxy measure ``D(x | origin)`` converting proxy-area to edge-length density."""
    k = scene.k
    return k.proxy_density(edge, origin[0], origin[1], origin[2], x[0], x[1], x[2],
                           -1, -1, 0.0, 0.0, False)


def pick_reverse_proxy(scene: Scene, edge: int, x, viewer, u1: float, u2: float):
    """Draw a proxy point of edge point ``x`` uniformly in the measure seen from ``viewer``."""
    k = scene.k
    dens = k.proxy_density(edge, viewer[0], viewer[1], viewer[2], x[0], x[1], x[2],
                           -1, -1, u1, u2, True)
    if dens <= 0:
        return None, 0.0
    return np.array([k.k_x, k.k_y, k.k_z]), dens


def project_to_edge(scene: Scene, tri: int, edge: int, point):
    """Project a point of ``tri`` through the vertex opposite ``edge`` onto that edge."""
    e = scene.edges[edge]
    side = 0 if e.triangles[0] == tri else 1
    c = e.pc[side]
    a, b = e.pa, e.pb
    # solve c + (point - c) / q on line ab
    nrm = np.cross(b - a, c - a)
    tot = np.dot(nrm, nrm)
    w_c = np.dot(np.cross(b - a, point - a), nrm) / tot
    q = 1.0 - w_c
    if q <= 1e-12:
        return None, q
    return c + (np.asarray(point) - c) / q, q


def edge_pseudo_intersect(ray: Ray, scene: Scene, rng: np.random.Generator,
                          skip=(-1, -1)) -> MetaPathNode | None:
    """Ray -> proxy triangle -> uniformly chosen convex edge -> visible real point."""
    hit = scene.intersect(ray, skip)
    if hit is None:
        return None
    cand = [i for i, e in enumerate(scene.edges) if hit.triangle in e.triangles]
    if not cand:
        return None
    k = min(int(rng.random() * len(cand)), len(cand) - 1)
    ei = cand[k]
    x, _ = project_to_edge(scene, hit.triangle, ei, hit.point)
    if x is None or not scene.segment_visible(ray.origin, x):
        return None
    dens = measure_conversion(scene, ei, x, ray.origin)
    if dens <= 0:
        return None
    return MetaPathNode("edge", x, hit.point, None, ei, density=dens)


def trace_subpath(scene: Scene, origin, max_depth: int, config: SimulationConfig,
                  rng: np.random.Generator):
    """One subpath as a list of nodes (the endpoint first)."""
    sub = Subpaths(1, max_depth, origin)
    for d in range(1, max_depth + 1):
        if sub.nv[0] != d:
            break
        sub.bounce(scene, d, rng.random((1, UNIFORMS_PER_BOUNCE)), config.absorption)
    return sub.nodes(0, config.c)


def connect_and_weight(scene: Scene, forward: Subpaths, backward: Subpaths,
                       config: SimulationConfig, rng: np.random.Generator, pair=None):
    """All connections between paired subpaths as weighted ``PathSample`` records."""
    n = forward.n
    m = forward.depth + 1
    pair = np.arange(n, dtype=np.int32) if pair is None else np.asarray(pair, np.int32)
    cap = n * m * m
    log_p = np.zeros((cap, 2, max(config.max_order, 1)))
    log_meta = np.zeros((cap, 8))
    nbins = ImpulseResponse.empty(config.sample_rate, config.ir_length).nbins
    f, b = forward, backward
    nlog = scene.kernels.connect(
        scene.k, f.pos, f.prox, f.proxt, f.pick, f.pickt, f.edge, f.ds, f.dp, f.ps,
        f.alpha, f.plen, f.co, f.nv, b.pos, b.prox, b.proxt, b.pick, b.pickt, b.edge,
        b.ds, b.dp, b.ps, b.alpha, b.plen, b.co, b.nv, pair, rng.random((n, 4 * m * m)),
        config.max_order, 1 if config.mis else 0, bool(config.outlier_suppression),
        config.co_star, config.absorption, config.c, config.sample_rate,
        np.zeros(nbins), np.zeros(nbins), np.zeros((config.max_order + 2, 3)),
        np.zeros(config.max_order + 2, dtype=np.int32), np.zeros(config.max_order + 2),
        np.zeros(config.max_order + 2), np.zeros(m * m, dtype=np.int32), np.zeros(m * m),
        log_p, log_meta, cap, 1)
    out = []
    for r in range(nlog):
        order, i = int(log_meta[r, 0]), int(log_meta[r, 1])
        out.append(PathSample(float(log_meta[r, 3]), float(log_meta[r, 4]), order, i,
                              float(log_meta[r, 2]), float(log_meta[r, 5]),
                              tuple(log_p[r, 0, :order]), tuple(log_p[r, 1, :order])))
    return out


def strategy_weights(fwd, bwd, heuristic: str = "balance"):
    """Weights of every strategy ``t = 0..n`` for one path.

    ``fwd[k-1]`` and ``bwd[k-1]`` are the densities of node ``k`` when it is
    sampled from the source side or the listener side; strategy ``t`` samples
    nodes ``1..t`` forward and ``t+1..n`` backward. Strategies that cannot
    produce the path get weight 0.
    """
    fwd = np.asarray(fwd, float)
    bwd = np.asarray(bwd, float)
    n = len(fwd)
    p = np.array([np.prod(fwd[:t]) * np.prod(bwd[t:]) for t in range(n + 1)])
    usable = p > 0
    if not usable.any():
        return np.zeros(n + 1)
    if heuristic == "balance":
        return p / p.sum()
    if heuristic == "uniform":
        return usable / usable.sum()
    raise ValueError(f"unknown heuristic {heuristic!r}")


def default_workers():
    return max(1, os.cpu_count() or 1)
