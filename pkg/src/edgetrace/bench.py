"""Timing of the compiled kernels against their pure-Python twin."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import _backend
from .config import SimulationConfig
from .transport import simulate

# published per-IR time for a Boxes-like scene at 12k samples, and our budget
REFERENCE_BOXES_MS = 34.0
BUDGET_MS = 500.0


@dataclass
class Timing:
    backend: str
    samples: int
    seconds: float

    @property
    def per_sample_us(self) -> float:
        return self.seconds / self.samples * 1e6


def time_ir(scene, source, listener, config: SimulationConfig, repeats: int = 3) -> float:
    """Best wall time of ``repeats`` single-thread runs (seeds differ per repeat)."""
    best = math.inf
    for r in range(repeats):
        cfg = config.replace(seed=config.seed + r, workers=1)
        t = time.perf_counter()
        simulate(scene, source, listener, cfg)
        best = min(best, time.perf_counter() - t)
    return best


def compare_backends(scene, source, listener, config: SimulationConfig,
                     pure_samples: int | None = None, repeats: int = 3):
    """Per-sample cost of both kernel variants and whether their bins agree.

    The pure kernels are slow, so they run ``pure_samples`` (default a tenth
    of the configured count); the agreement check uses that count for both.
    """
    compiled = _backend.load(pure=False)
    pure = _backend.load(pure=True)
    n_pure = pure_samples or max(config.batch_size, config.samples // 10)
    out = {}
    if _backend.is_compiled(compiled):
        sc = scene.with_kernels(compiled)
        out["compiled"] = Timing("compiled", config.samples,
                                 time_ir(sc, source, listener, config, repeats))
    sp = scene.with_kernels(pure)
    cfg_p = config.replace(samples=n_pure)
    out["pure"] = Timing("pure", n_pure, time_ir(sp, source, listener, cfg_p, 1))
    agree = None
    if "compiled" in out:
        a = simulate(scene.with_kernels(compiled), source, listener, cfg_p).pressure
        b = simulate(sp, source, listener, cfg_p).pressure
        agree = float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))
    speedup = (out["pure"].per_sample_us / out["compiled"].per_sample_us
               if "compiled" in out else None)
    return out, speedup, agree


def scaling(scene, source, listener, config: SimulationConfig, repeats: int = 3):
    """Wall time at half and full sample count and their per-sample ratio."""
    full = time_ir(scene, source, listener, config, repeats)
    half = time_ir(scene, source, listener, config.replace(samples=config.samples // 2),
                   repeats)
    return half, full, 2 * half / full
