import math
import wave

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgetrace.ir import (ImpulseResponse, PathSample, accumulate, read_csv, snr,
                          snr_of_runs, spectrum)


def test_empty_and_binning():
    ir = ImpulseResponse.empty(48000.0, 0.2)
    assert ir.nbins == 9600
    assert ir.bin_of(0.0) == 0
    assert ir.bin_of(0.49 / 48000) == 0
    assert ir.bin_of(0.5 / 48000) == 1
    assert ir.times_ms[48] == pytest.approx(1.0)


@settings(max_examples=50)
@given(st.lists(st.lists(st.floats(-5, 5), min_size=4, max_size=4), min_size=2,
                max_size=30), st.integers(1, 29))
def test_batch_statistics_match_numpy(rows, cut):
    x = np.array(rows)
    cut = min(cut, len(x) - 1)
    ir = ImpulseResponse(1000.0, 4)
    for part in (x[:cut], x[cut:]):
        ir.add_batch(part.sum(0), (part ** 2).sum(0), len(part))
    assert ir.count == len(x)
    assert ir.mean == pytest.approx(x.mean(0), abs=1e-9)
    assert ir.variance == pytest.approx(x.var(0, ddof=1) / len(x), abs=1e-9)


def test_merge_equals_joint_batch():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(20, 5)), rng.normal(size=(7, 5))
    ia, ib, ij = (ImpulseResponse(100.0, 5) for _ in range(3))
    ia.add_batch(a.sum(0), (a ** 2).sum(0), 20)
    ib.add_batch(b.sum(0), (b ** 2).sum(0), 7)
    ab = np.vstack([a, b])
    ij.add_batch(ab.sum(0), (ab ** 2).sum(0), 27)
    m = ia.merge(ib)
    assert m.mean == pytest.approx(ij.mean)
    assert m.variance == pytest.approx(ij.variance)
    with pytest.raises(ValueError):
        ia.merge(ImpulseResponse(100.0, 6))


def test_accumulate_and_deterministic_offset():
    ir = ImpulseResponse(1000.0, 10)
    accumulate(ir, PathSample(2.0, 0.003))
    accumulate(ir, PathSample(4.0, 0.003))
    accumulate(ir, PathSample(1.0, 5.0))
    assert ir.count == 3 and ir.dropped == 1
    assert ir.pressure[3] == pytest.approx(2.0)
    ir.add_deterministic(0.0051, 0.5)
    assert ir.offset[5] == 0.5
    assert ir.variance[5] == 0.0


def test_csv_and_wav_round_trip(tmp_path):
    ir = ImpulseResponse(1000.0, 8)
    rng = np.random.default_rng(1)
    x = rng.normal(size=(10, 8))
    ir.add_batch(x.sum(0), (x ** 2).sum(0), 10)
    ir.to_csv(tmp_path / "a.csv")
    t, p, v = read_csv(tmp_path / "a.csv")
    assert np.array_equal(p, ir.pressure)
    assert np.array_equal(v, ir.variance)
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "time,pressure,variance"
    ir.to_wav(tmp_path / "a.wav")
    with wave.open(str(tmp_path / "a.wav")) as wf:
        assert wf.getframerate() == 1000 and wf.getnframes() == 8
        pcm = np.frombuffer(wf.readframes(8), "<i2")
    assert np.abs(pcm).max() == round(0.9 * 32767)


def test_spectrum_of_impulse_is_flat():
    ir = ImpulseResponse(48000.0, 64)
    ir.add_deterministic(0.0, 1.0)
    spec, freqs = spectrum(ir)
    assert np.allclose(np.abs(spec), 1.0)
    assert freqs[-1] == pytest.approx(24000.0)


def test_snr_of_known_ratio():
    rng = np.random.default_rng(0)
    a = rng.normal(size=4800)
    r = snr(a, 0.1 * a, 48000.0)
    assert r.band_db == pytest.approx(10.0)
    with pytest.raises(ValueError):
        snr(a, a[:-1], 48000.0)


def test_snr_of_runs_grows_with_lower_noise():
    rng = np.random.default_rng(1)
    # broadband signal so every band frequency carries signal
    sig = rng.normal(scale=3.0, size=2048)
    noisy = [sig + rng.normal(scale=1.0, size=2048) for _ in range(10)]
    quiet = [sig + rng.normal(scale=0.1, size=2048) for _ in range(10)]
    assert snr_of_runs(quiet, 48000.0) > snr_of_runs(noisy, 48000.0) + 5.0
