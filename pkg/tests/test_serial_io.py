import numpy as np
import pytest

from lgtime import detector_pipeline as dp
from lgtime import serial_io
from lgtime.analytic_spectrum import LgCurve, SpectrumRecord
from lgtime.qubit_dynamics import SpinTrajectory


def test_spectrum_round_trip(tmp_path):
    w = 2.0 * np.pi * np.linspace(0.0, 30e6, 64)
    spec = SpectrumRecord(w, np.random.default_rng(0).random(64),
                          meta={"kappa": 1.9e8, "label": "test"})
    path = serial_io.write_spectrum_csv(tmp_path / "s.csv", spec)
    back = serial_io.read_spectrum_csv(path)
    np.testing.assert_allclose(back.freqs, spec.freqs, rtol=1e-9)
    np.testing.assert_allclose(back.density, spec.density, rtol=1e-9)
    assert back.meta["kappa"] == pytest.approx(1.9e8)


def test_lg_curve_round_trip(tmp_path):
    taus = np.arange(6) * 16.67e-9
    rng = np.random.default_rng(1)
    curve = LgCurve(taus, rng.random(6), rng.random(6), rng.random(6),
                    rng.random(6), meta={"model": "quantum"})
    path = serial_io.write_lg_csv(tmp_path / "lg.csv", curve)
    back = serial_io.read_lg_csv(path)
    np.testing.assert_allclose(back.taus, curve.taus, rtol=1e-6)
    np.testing.assert_allclose(back.f, curve.f, rtol=1e-9)
    np.testing.assert_allclose(back.sigma_stat, curve.sigma_stat, rtol=1e-9)
    assert back.meta["model"] == "quantum"


def test_trajectory_round_trip(tmp_path):
    times = np.linspace(0.0, 1e-6, 40)
    xyz = np.random.default_rng(2).random((40, 3))
    path = serial_io.write_trajectory_csv(tmp_path / "t.csv",
                                          SpinTrajectory(times, xyz))
    back = serial_io.read_trajectory_csv(path)
    np.testing.assert_allclose(back.times, times, rtol=1e-9)
    np.testing.assert_allclose(back.xyz, xyz, rtol=1e-9)


def test_records_round_trip(tmp_path):
    cfg = dp.AcquisitionConfig(n_records=64, record_len=64, batch_size=32,
                               noise_to_peak=1.0, seed=3)
    stream = list(dp.synthesize_telegraph_trace(1e7, 1e-3, cfg))
    paths = serial_io.write_records(tmp_path / "run", stream, cfg.dt)
    assert all(p.exists() for p in paths)
    back = list(serial_io.read_records(tmp_path / "run", batch_size=32))
    orig_on = np.concatenate([b.I for b in stream if b.tag == "ON"])
    read_on = np.concatenate([b.I for b in back if b.tag == "ON"])
    np.testing.assert_array_equal(read_on, orig_on)
    tags = [b.tag for b in back]
    assert "ON" in tags and "OFF" in tags


def test_provenance_header(tmp_path):
    w = 2.0 * np.pi * np.linspace(0.0, 1e6, 8)
    spec = SpectrumRecord(w, np.ones(8), meta={"nbar": 0.78})
    path = serial_io.write_spectrum_csv(tmp_path / "p.csv", spec)
    meta = serial_io.read_provenance(path)
    assert meta["nbar"] == 0.78


def test_json_summary(tmp_path):
    path = serial_io.write_json_summary(
        tmp_path / "x.json",
        {"a": np.float64(1.5), "b": np.arange(3), "c": "text"})
    import json

    data = json.loads(path.read_text())
    assert data["a"] == 1.5 and data["b"] == [0, 1, 2]
