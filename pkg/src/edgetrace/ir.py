"""Impulse-response accumulation, spectra and the band-averaged SNR metric."""
from __future__ import annotations

import csv
import math
import wave
from dataclasses import dataclass, field

import numpy as np

AUDIBLE_BAND = (20.0, 20000.0)


@dataclass
class ImpulseResponse:
    """Binned signed pressure with per-bin running mean and M2.

    Each Monte Carlo sample is a whole vector over bins; statistics are kept
    in Welford/Chan form so merges are numerically stable. ``offset`` holds
    deterministic contributions (the direct path) that carry no variance.
    """
    sample_rate: float
    nbins: int
    count: int = 0
    mean: np.ndarray = None
    m2: np.ndarray = None
    offset: np.ndarray = None
    dropped: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("mean", "m2", "offset"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(self.nbins))

    @classmethod
    def empty(cls, sample_rate: float = 48000.0, length: float = 0.2):
        return cls(float(sample_rate), int(math.ceil(length * sample_rate - 1e-9)))

    @property
    def pressure(self):
        return self.mean + self.offset

    @property
    def variance(self):
        """Variance of the per-bin estimate (squared standard error)."""
        if self.count < 2:
            return np.zeros(self.nbins)
        return np.maximum(self.m2, 0.0) / (self.count * (self.count - 1))

    @property
    def times_ms(self):
        return np.arange(self.nbins) * 1000.0 / self.sample_rate

    def bin_of(self, delay: float) -> int:
        return int(math.floor(delay * self.sample_rate + 0.5))

    def add_batch(self, total: np.ndarray, total_sq: np.ndarray, n: int):
        """Merge ``n`` samples given their bin-wise sum and sum of squares."""
        if n <= 0:
            return
        mb = total / n
        m2b = np.maximum(total_sq - total * mb, 0.0)
        self._merge(n, mb, m2b)

    def _merge(self, nb, mb, m2b):
        na = self.count
        n = na + nb
        delta = mb - self.mean
        self.mean = self.mean + delta * (nb / n)
        self.m2 = self.m2 + m2b + delta * delta * (na * nb / n)
        self.count = n

    def merge(self, other: "ImpulseResponse") -> "ImpulseResponse":
        if other.nbins != self.nbins or other.sample_rate != self.sample_rate:
            raise ValueError("incompatible impulse responses")
        out = ImpulseResponse(self.sample_rate, self.nbins, self.count, self.mean.copy(),
                              self.m2.copy(), self.offset + other.offset,
                              self.dropped + other.dropped, dict(self.meta))
        if other.count:
            out._merge(other.count, other.mean, other.m2)
        return out

    def add_deterministic(self, delay: float, amplitude: float):
        b = self.bin_of(delay)
        if 0 <= b < self.nbins:
            self.offset[b] += amplitude
        else:
            self.dropped += 1

    def to_csv(self, path):
        p, v, t = self.pressure, self.variance, self.times_ms
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "pressure", "variance"])
            for i in range(self.nbins):
                w.writerow([repr(float(t[i])), repr(float(p[i])), repr(float(v[i]))])

    def to_wav(self, path, peak: float = 0.9):
        p = self.pressure
        m = np.abs(p).max()
        data = np.zeros_like(p) if m == 0 else p / m * peak
        pcm = np.round(data * 32767).astype("<i2")
        with wave.open(str(path), "wb") as wf:
            wf.setnchannels(1)
            wf.setsampwidth(2)
            wf.setframerate(int(self.sample_rate))
            wf.writeframes(pcm.tobytes())


@dataclass(frozen=True)
class PathSample:
    """One connected path: signed estimator amplitude and its delay."""
    amplitude: float
    delay: float
    order: int = 0
    forward_nodes: int = 0
    weight: float = 1.0
    co: float = 0.0
    fwd: tuple = ()
    bwd: tuple = ()


def accumulate(ir: ImpulseResponse, path: PathSample):
    """Add ``path`` as one Monte Carlo sample (Welford update)."""
    b = ir.bin_of(path.delay)
    x = np.zeros(ir.nbins)
    if 0 <= b < ir.nbins:
        x[b] = path.amplitude
    else:
        ir.dropped += 1
    ir._merge(1, x, np.zeros(ir.nbins))


def read_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1], data[:, 2]


def spectrum(ir):
    """One-sided DFT of the pressure trace and the matching frequencies."""
    p = ir.pressure if isinstance(ir, ImpulseResponse) else np.asarray(ir, dtype=float)
    fs = ir.sample_rate if isinstance(ir, ImpulseResponse) else None
    spec = np.fft.rfft(p)
    freqs = np.fft.rfftfreq(len(p), 1.0 / fs) if fs else None
    return spec, freqs


@dataclass(frozen=True)
class SNRResult:
    freqs: np.ndarray
    db: np.ndarray
    band_db: float
    excluded: int


def snr(ir_mean, ir_error, sample_rate: float, band=AUDIBLE_BAND) -> SNRResult:
    """``10 log10 |F(mean)| / |F(error)|`` per frequency and its band average."""
    a = np.asarray(ir_mean, dtype=float)
    e = np.asarray(ir_error, dtype=float)
    if a.shape != e.shape:
        raise ValueError("signal and error must have equal length")
    fa = np.abs(np.fft.rfft(a))
    fe = np.abs(np.fft.rfft(e))
    freqs = np.fft.rfftfreq(len(a), 1.0 / sample_rate)
    with np.errstate(divide="ignore", invalid="ignore"):
        db = 10.0 * np.log10(fa / fe)
    inband = (freqs >= band[0]) & (freqs <= band[1])
    ok = inband & (fe > 0) & (fa > 0)
    band_db = float(np.mean(db[ok])) if ok.any() else float("nan")
    return SNRResult(freqs, db, band_db, int((inband & ~ok).sum()))


def snr_of_runs(irs, sample_rate: float, band=AUDIBLE_BAND) -> float:
    """Band SNR averaged over K runs, each compared to the mean of all K."""
    arr = np.asarray(irs, dtype=float)
    ref = arr.mean(axis=0)
    vals = [snr(ref, row - ref, sample_rate, band).band_db for row in arr]
    return float(np.mean(vals))
