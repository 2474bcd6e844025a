"""Signal container, integration, residual checks, CSV I/O, surrogate."""

import numpy as np
import pytest

from shocksynth import (
    Signal,
    SignalFormatError,
    integrate,
    motion_of,
    read_signal,
    residual_motion,
    srs,
    synth_reference,
    write_signal,
)


def test_signal_validation():
    with pytest.raises(ValueError):
        Signal(0.0, [1.0, 2.0])
    with pytest.raises(ValueError):
        Signal(-100.0, [1.0, 2.0])
    with pytest.raises(ValueError):
        Signal(float("nan"), [1.0, 2.0])
    with pytest.raises(ValueError):
        Signal(100.0, [])
    with pytest.raises(ValueError):
        Signal(100.0, [[1.0, 2.0]])
    with pytest.raises(ValueError):
        Signal(100.0, [1.0, float("inf")])
    with pytest.raises(ValueError):
        Signal(100.0, [1.0, float("nan")])


def test_signal_properties():
    sig = Signal(1000.0, [1.0, 2.0, 3.0], t0=0.5)
    assert len(sig) == 3
    assert sig.dt == pytest.approx(1e-3)
    assert sig.duration == pytest.approx(2e-3)
    np.testing.assert_allclose(sig.times(), [0.5, 0.501, 0.502])
    with pytest.raises(ValueError):
        sig.samples[0] = 9.0  # stored array is read-only
    sig2 = sig.with_samples([4.0, 5.0, 6.0])
    assert sig2.sample_rate == sig.sample_rate
    assert sig2.t0 == sig.t0
    np.testing.assert_array_equal(sig2.samples, [4.0, 5.0, 6.0])


def test_integrate_cosine_oracle():
    # trapezoid integral of cos(wt) must track sin(wt)/w within the
    # classical T*dt^2*w^2/12 error bound
    fs, f = 20_000.0, 50.0
    w = 2.0 * np.pi * f
    t = np.arange(401) / fs
    vel = integrate(Signal(fs, np.cos(w * t)))
    bound = t[-1] * (1.0 / fs) ** 2 * w * w / 12.0
    assert np.max(np.abs(vel.samples - np.sin(w * t) / w)) <= 2.0 * bound


def test_integrate_initial_value():
    sig = Signal(100.0, np.ones(11))
    vel = integrate(sig, initial_value=3.0)
    assert vel.samples[0] == pytest.approx(3.0)
    assert vel.samples[-1] == pytest.approx(3.0 + 0.1)
    assert len(vel) == len(sig)


def test_motion_of_consistency():
    rng = np.random.default_rng(0)
    sig = Signal(5000.0, rng.normal(size=256))
    m = motion_of(sig)
    np.testing.assert_array_equal(m.velocity.samples, integrate(sig).samples)
    np.testing.assert_array_equal(
        m.displacement.samples, integrate(integrate(sig)).samples
    )
    assert m.acceleration is sig


def test_residual_motion_gaussian_doublet():
    # second derivative of a gaussian bump integrates back to the bump:
    # both terminal motions vanish
    fs = 50_000.0
    t = np.arange(2001) / fs
    c, s = 0.02, 0.002
    arg = (t - c) / s
    acc = (4.0 * arg * arg - 2.0) / (s * s) * np.exp(-arg * arg)
    rep = residual_motion(Signal(fs, acc))
    assert rep.passed
    assert rep.residual_velocity_ratio < 1e-6
    assert rep.residual_displacement_ratio < 1e-6


def test_residual_motion_detects_drift():
    # one full sine period: velocity returns to zero but displacement
    # accumulates t/w of drift
    fs, f = 50_000.0, 100.0
    t = np.arange(int(fs / f) + 1) / fs
    rep = residual_motion(Signal(fs, np.sin(2.0 * np.pi * f * t)))
    assert rep.residual_velocity_ratio < 1e-2
    assert rep.residual_displacement_ratio > 0.5
    assert not rep.passed


def test_residual_motion_zero_signal():
    rep = residual_motion(Signal(100.0, np.zeros(16)))
    assert rep.residual_velocity_ratio == 0.0
    assert rep.residual_displacement_ratio == 0.0
    assert rep.passed


def test_residual_motion_tolerance_validation():
    sig = Signal(100.0, np.ones(4))
    with pytest.raises(ValueError):
        residual_motion(sig, tolerance=0.0)
    with pytest.raises(ValueError):
        residual_motion(sig, tolerance=-1e-3)


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    sig = Signal(100_000.0, 1e3 * rng.normal(size=500), t0=0.25)
    path = tmp_path / "sig.csv"
    write_signal(sig, path)
    back = read_signal(path)
    assert back.sample_rate == pytest.approx(sig.sample_rate, rel=1e-9)
    assert back.t0 == pytest.approx(sig.t0, rel=1e-12)
    np.testing.assert_allclose(back.samples, sig.samples, rtol=1e-11, atol=1e-8)
    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header == "time_s,accel_m_s2"


def test_read_signal_malformed(tmp_path):
    cases = [
        ("time_s,accel_m_s2\n", "no samples"),
        ("0,1\n", "at least 2 samples"),
        ("0,1\n1e-5,2,3\n", "expected 2"),
        ("0,1\n1e-5,abc\n", "non-numeric"),
        ("0,1\n1e-5,inf\n", "non-finite"),
        ("0,1\n1e-5,2\n3e-5,3\n", "non-uniform"),
        ("0,1\n-1e-5,2\n-2e-5,3\n", "increasing"),
    ]
    for i, (content, fragment) in enumerate(cases):
        path = tmp_path / f"bad{i}.csv"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(SignalFormatError, match=fragment):
            read_signal(path)


def test_read_signal_line_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time_s,accel_m_s2\n0,1\n1e-5,oops\n", encoding="utf-8")
    with pytest.raises(SignalFormatError, match="line 3"):
        read_signal(path)


def test_read_signal_header_optional(tmp_path):
    path = tmp_path / "noheader.csv"
    path.write_text("0,1\n0.001,2\n0.002,3\n", encoding="utf-8")
    sig = read_signal(path)
    assert len(sig) == 3
    assert sig.sample_rate == pytest.approx(1000.0)


def test_synth_reference_deterministic():
    a = synth_reference(seed=7)
    b = synth_reference(seed=7)
    c = synth_reference(seed=8)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_synth_reference_contract():
    sig = synth_reference(seed=0)
    assert len(sig) == 5001
    assert sig.sample_rate == 100_000.0
    assert np.max(np.abs(sig.samples)) == pytest.approx(1000.0, rel=1e-12)
    rep = residual_motion(sig)
    assert rep.passed
    assert rep.residual_velocity_ratio < 1e-3
    assert rep.residual_displacement_ratio < 1e-3


def test_synth_reference_srs_spread():
    sig = synth_reference(seed=0)
    curve = srs(sig, [50.0, 100.0, 500.0, 2000.0, 10_000.0])
    # meaningful energy everywhere in the band, not just numerically nonzero
    assert np.all(curve.values > 1.0)


def test_synth_reference_other_shapes():
    sig = synth_reference(fs=50_000.0, duration=0.02, fmax=5000.0, seed=3)
    assert len(sig) == 1001
    assert np.max(np.abs(sig.samples)) == pytest.approx(1000.0, rel=1e-12)
    assert residual_motion(sig).passed


def test_synth_reference_validation():
    with pytest.raises(ValueError):
        synth_reference(fs=50_000.0, fmax=10_000.0)
    with pytest.raises(ValueError):
        synth_reference(duration=0.0)
    with pytest.raises(ValueError):
        synth_reference(fmax=150.0)
