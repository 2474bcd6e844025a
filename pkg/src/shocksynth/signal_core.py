"""Uniformly sampled acceleration histories and their integrated motion.

Everything downstream works on the :class:`Signal` container defined here:
a read-only acceleration array tagged with its sample rate and start time.
The module provides cumulative trapezoidal integration to velocity and
displacement, net-zero residual checks on the terminal motion, CSV
import/export, and a deterministic synthetic reference generator used when
no measured shock is available.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
from scipy import integrate as _sci_integrate
from scipy import signal as _sci_signal

__all__ = [
    "Signal",
    "MotionTriple",
    "ResidualReport",
    "SignalFormatError",
    "integrate",
    "motion_of",
    "residual_motion",
    "read_signal",
    "write_signal",
    "synth_reference",
]

# Relative tolerance on time-step jitter when importing CSV data.
_DT_REL_TOL = 1e-6


class SignalFormatError(ValueError):
    """Raised when a signal CSV file cannot be parsed."""


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclasses.dataclass(frozen=True)
class Signal:
    """A uniformly sampled time history.

    Parameters
    ----------
    sample_rate : float
        Sampling rate in Hz.  Must be finite and positive.
    samples : ndarray
        1-D array of sample values (acceleration in m/s^2 unless noted).
        Stored as a read-only float64 copy.
    t0 : float, optional
        Time of the first sample in seconds.
    """

    sample_rate: float
    samples: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        rate = float(self.sample_rate)
        if not np.isfinite(rate) or rate <= 0.0:
            raise ValueError(f"sample_rate must be finite and positive, got {rate}")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        if samples.size == 0:
            raise ValueError("samples must contain at least one value")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "sample_rate", rate)
        object.__setattr__(self, "samples", _frozen_array(samples))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def dt(self) -> float:
        """Time step in seconds."""
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        """Time spanned from the first to the last sample, in seconds."""
        return (self.samples.size - 1) / self.sample_rate

    def times(self) -> np.ndarray:
        """Sample times in seconds."""
        return self.t0 + np.arange(self.samples.size) / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> "Signal":
        """A copy of this signal with new sample values on the same clock."""
        return Signal(self.sample_rate, samples, self.t0)


@dataclasses.dataclass(frozen=True)
class MotionTriple:
    """Acceleration plus its integrated velocity and displacement.

    All three signals share the same sample rate, length, and start time.
    """

    acceleration: Signal
    velocity: Signal
    displacement: Signal

    def __post_init__(self):
        a, v, d = self.acceleration, self.velocity, self.displacement
        for other in (v, d):
            if other.sample_rate != a.sample_rate or len(other) != len(a):
                raise ValueError("motion components must share rate and length")


@dataclasses.dataclass(frozen=True)
class ResidualReport:
    """Terminal motion residuals relative to the motion peaks.

    ``residual_velocity_ratio`` is ``|v[-1]| / max|v|`` and likewise for
    displacement.  ``passed`` is true when both ratios are at or below
    ``tolerance``.  A ratio is defined as 0 when the corresponding motion
    is identically zero.
    """

    residual_velocity_ratio: float
    residual_displacement_ratio: float
    tolerance: float
    passed: bool


def integrate(sig: Signal, initial_value: float = 0.0) -> Signal:
    """Cumulative trapezoidal integral of a signal.

    The result has the same rate and length; its first sample equals
    ``initial_value``.
    """
    vals = _sci_integrate.cumulative_trapezoid(sig.samples, dx=sig.dt, initial=0.0)
    return sig.with_samples(vals + initial_value)


def motion_of(accel: Signal) -> MotionTriple:
    """Integrate acceleration to velocity and displacement (both start at 0)."""
    vel = integrate(accel)
    disp = integrate(vel)
    return MotionTriple(accel, vel, disp)


def _terminal_ratio(sig: Signal) -> float:
    peak = float(np.max(np.abs(sig.samples)))
    if peak == 0.0:
        return 0.0
    return abs(float(sig.samples[-1])) / peak


def residual_motion(accel: Signal, tolerance: float = 1e-3) -> ResidualReport:
    """Check how close the terminal velocity and displacement are to zero.

    A shock that imparts no net motion should integrate to velocity and
    displacement histories that return to zero once the transient has rung
    down.  The ratios compare the final sample of each motion against its
    own peak magnitude, so the check is amplitude invariant.
    """
    if tolerance <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    motion = motion_of(accel)
    rv = _terminal_ratio(motion.velocity)
    rd = _terminal_ratio(motion.displacement)
    return ResidualReport(rv, rd, tolerance, rv <= tolerance and rd <= tolerance)


def read_signal(path) -> Signal:
    """Read a signal from a two-column CSV file (``time_s,accel_m_s2``).

    The time column must be uniformly spaced to within a relative jitter of
    1e-6 of the median step.  Raises :class:`SignalFormatError` on malformed
    rows, empty files, or non-uniform time steps; the message names the
    offending line number.
    """
    path = Path(path)
    times = []
    accels = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if lineno == 1 and line.lower().replace(" ", "") == "time_s,accel_m_s2":
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise SignalFormatError(
                    f"{path.name}: expected 2 comma-separated fields on line {lineno}, "
                    f"got {len(parts)}"
                )
            try:
                t = float(parts[0])
                a = float(parts[1])
            except ValueError:
                raise SignalFormatError(
                    f"{path.name}: non-numeric value on line {lineno}: {line!r}"
                ) from None
            if not (np.isfinite(t) and np.isfinite(a)):
                raise SignalFormatError(
                    f"{path.name}: non-finite value on line {lineno}"
                )
            times.append(t)
            accels.append(a)
    if not accels:
        raise SignalFormatError(f"{path.name}: no samples found")
    if len(accels) == 1:
        raise SignalFormatError(f"{path.name}: need at least 2 samples to fix a rate")
    t_arr = np.asarray(times)
    steps = np.diff(t_arr)
    dt = float(np.median(steps))
    if dt <= 0.0:
        raise SignalFormatError(f"{path.name}: time column must be increasing")
    bad = np.nonzero(np.abs(steps - dt) > _DT_REL_TOL * dt)[0]
    if bad.size:
        # +2: diff index -> second row of the offending pair, 1-based with header.
        raise SignalFormatError(
            f"{path.name}: non-uniform time step near line {int(bad[0]) + 3} "
            f"(step {steps[bad[0]]:.6g} s vs median {dt:.6g} s)"
        )
    return Signal(1.0 / dt, np.asarray(accels), t0=float(t_arr[0]))


def write_signal(sig: Signal, path) -> None:
    """Write a signal as a two-column CSV file (``time_s,accel_m_s2``).

    Values are formatted with ``%.12g``, LF line endings, UTF-8.
    """
    path = Path(path)
    t = sig.times()
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("time_s,accel_m_s2\n")
        for ti, ai in zip(t, sig.samples):
            fh.write(f"{ti:.12g},{ai:.12g}\n")


def _highpass_sos(corner_hz: float, fs: float) -> np.ndarray:
    """Second order high-pass with a double zero at z = 1.

    Bilinear image of s^2 / (s^2 + (w/q) s + w^2) with q = 1/sqrt(2),
    pre-warped so the analog corner lands exactly at ``corner_hz``.
    The double zero at z = 1 forces the output's zeroth and first moments
    to vanish, which is what makes the corrected reference integrate back
    to zero net velocity and displacement.
    """
    q = 1.0 / np.sqrt(2.0)
    w0 = 2.0 * np.pi * corner_hz / fs
    c = (2.0 * np.pi * corner_hz) / np.tan(w0 / 2.0)
    w = 2.0 * np.pi * corner_hz
    a0 = c * c + (w / q) * c + w * w
    b = np.array([c * c, -2.0 * c * c, c * c]) / a0
    a = np.array([a0, 2.0 * (w * w - c * c), c * c - (w / q) * c + w * w]) / a0
    return np.hstack([b, a])[None, :]


def synth_reference(
    fs: float = 100_000.0,
    duration: float = 0.05,
    fmax: float = 10_000.0,
    seed: int = 0,
) -> Signal:
    """Deterministic broadband surrogate for a measured pyroshock record.

    The record is a single oscillatory burst whose instantaneous frequency
    sweeps exponentially from 45 Hz to just past ``fmax`` while its envelope
    grows, then rings out fast once the sweep completes.  A narrowband slice
    anywhere in [50 Hz, fmax] therefore sees one short, clean wave packet:
    energy is spread over the whole band (the SRS is nonzero across it)
    without the beating and mutual cancellation that a sum of fixed carriers
    produces.  Random phase and a gentle random coloring of the envelope,
    drawn from ``numpy.random.default_rng(seed)``, vary the record from seed
    to seed.

    A second order 45 Hz high-pass removes drift, then two compact interior
    pulses are fitted so the terminal velocity and displacement vanish to
    machine precision.  The result is peak-normalized to 1000 m/s^2.

    Raises ``ValueError`` when ``fs < 10 * fmax`` (the sweep needs headroom
    below Nyquist) or when ``fmax < 200`` Hz (the sweep starts at 45 Hz and
    must cover at least a couple of octaves).
    """
    if fs < 10.0 * fmax:
        raise ValueError(f"fs must be at least 10*fmax ({10.0 * fmax:.6g} Hz), got {fs:.6g}")
    if duration <= 0.0:
        raise ValueError(f"duration must be positive, got {duration}")
    if fmax < 200.0:
        raise ValueError(f"fmax must be at least 200 Hz, got {fmax:.6g}")
    rng = np.random.default_rng(seed)
    n = int(round(duration * fs)) + 1
    t = np.arange(n) / fs

    f_lo = 45.0
    sweep_end = 0.88 * duration
    # Overshoot fmax by one sixth octave so the top of the range is crossed
    # well inside the sweep rather than at its very edge.
    f_hi = fmax * 2.0 ** (1.0 / 6.0)
    rate = np.log(f_hi / f_lo) / sweep_end
    t_sweep = np.minimum(t, sweep_end)
    theta = 2.0 * np.pi * f_lo * np.expm1(rate * t_sweep) / rate
    theta += 2.0 * np.pi * f_hi * np.maximum(t - sweep_end, 0.0)
    theta += rng.uniform(0.0, 2.0 * np.pi)

    # The envelope rises with the sweep (amplitude ~ f^0.6) so that the
    # early low-frequency content stays weak; what little drift it causes
    # is cheap to correct.  Past the sweep it decays in a few percent of
    # the record, leaving the tail quiet.
    growth = 0.6 * rate
    ring_out = 75.0 / duration
    env = np.where(
        t <= sweep_end,
        np.exp(growth * (t - sweep_end)),
        np.exp(-ring_out * (t - sweep_end)),
    )
    env *= -np.expm1(-((t / (0.04 * duration)) ** 2))  # smooth turn-on

    # Gentle random coloring: a few slow cosines on the log envelope.
    n_modes = 6
    c = rng.normal(0.0, 0.10 / np.sqrt(n_modes), n_modes)
    ph = rng.uniform(0.0, 2.0 * np.pi, n_modes)
    color = np.zeros(n)
    for m in range(n_modes):
        color += c[m] * np.cos(2.0 * np.pi * (m + 1) * t_sweep / sweep_end + ph[m])
    env *= np.exp(color)

    x = _sci_signal.sosfilt(_highpass_sos(45.0, fs), env * np.cos(theta))

    # Cancel the terminal velocity and displacement exactly with an even and
    # an odd smooth bump over the middle of the record (2x2 linear solve).
    t1, t2 = 0.28 * duration, 0.60 * duration
    bump = np.where((t > t1) & (t < t2), ((t - t1) * (t2 - t)) ** 2, 0.0)
    bump /= np.max(bump)
    tilt = bump * (t - 0.5 * (t1 + t2)) / (0.5 * (t2 - t1))

    def _end_moments(y):
        v = _sci_integrate.cumulative_trapezoid(y, dx=1.0 / fs, initial=0.0)
        u = _sci_integrate.cumulative_trapezoid(v, dx=1.0 / fs, initial=0.0)
        return v[-1], u[-1]

    vx, ux = _end_moments(x)
    v1, u1 = _end_moments(bump)
    v2, u2 = _end_moments(tilt)
    coeff = np.linalg.solve(np.array([[v1, v2], [u1, u2]]), np.array([vx, ux]))
    x -= coeff[0] * bump + coeff[1] * tilt

    x *= 1000.0 / np.max(np.abs(x))
    return Signal(fs, x)
