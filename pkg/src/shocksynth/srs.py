"""Shock response spectra and dB error metrics against breakpoint specs.

The production path computes the maximax absolute-acceleration SRS with the
ramp-invariant recursive filter of Smallwood (1980), the standard digital
method in shock testing (see also ISO 18431-4).  An independent fixed-step
4th order ODE integrator over the relative-coordinate SDOF equation serves
as a cross-check oracle: the two share nothing but the input samples, so
mutual agreement validates both.

Specifications are piecewise log-log linear breakpoint curves; errors are
reported in amplitude dB, 20*log10(actual/target).
"""

from __future__ import annotations

import dataclasses
import warnings
from pathlib import Path

import numpy as np
from scipy import signal as _sci_signal

from .signal_core import Signal, SignalFormatError

__all__ = [
    "SrsSpec",
    "SrsCurve",
    "DbErrorReport",
    "srs",
    "srs_oracle",
    "spec_interpolate",
    "db_error",
    "read_spec",
    "write_curve",
]

TWO_PI = 2.0 * np.pi
_DECAY_LOG = float(np.log(1000.0))


def _frozen(values) -> np.ndarray:
    out = np.array(values, dtype=float)
    out.setflags(write=False)
    return out


@dataclasses.dataclass(frozen=True)
class SrsSpec:
    """Breakpoint SRS specification with a pass/fail tolerance in dB.

    ``breakpoints`` is an (n, 2) array of (frequency Hz, peak acceleration
    m/s^2) rows with strictly increasing frequencies, n >= 2, and positive
    accelerations.
    """

    breakpoints: np.ndarray
    tolerance_db: float = 3.0

    def __post_init__(self):
        bp = np.atleast_2d(np.asarray(self.breakpoints, dtype=float))
        if bp.ndim != 2 or bp.shape[1] != 2 or bp.shape[0] < 2:
            raise ValueError(f"breakpoints must be an (n>=2, 2) array, got shape {bp.shape}")
        if not np.all(np.isfinite(bp)):
            raise ValueError("breakpoints must be finite")
        if np.any(np.diff(bp[:, 0]) <= 0.0):
            raise ValueError("breakpoint frequencies must be strictly increasing")
        if np.any(bp[:, 0] <= 0.0) or np.any(bp[:, 1] <= 0.0):
            raise ValueError("breakpoint frequencies and accelerations must be positive")
        if self.tolerance_db <= 0.0:
            raise ValueError(f"tolerance_db must be positive, got {self.tolerance_db}")
        object.__setattr__(self, "breakpoints", _frozen(bp))
        object.__setattr__(self, "tolerance_db", float(self.tolerance_db))

    @property
    def freqs(self) -> np.ndarray:
        return self.breakpoints[:, 0]

    @property
    def peaks(self) -> np.ndarray:
        return self.breakpoints[:, 1]


@dataclasses.dataclass(frozen=True)
class SrsCurve:
    """Maximax absolute-acceleration SRS samples on a frequency grid."""

    freqs: np.ndarray
    values: np.ndarray
    q_srs: float = 10.0

    def __post_init__(self):
        freqs = np.atleast_1d(np.asarray(self.freqs, dtype=float))
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if freqs.ndim != 1 or freqs.size == 0:
            raise ValueError("freqs must be a non-empty 1-D array")
        if values.shape != freqs.shape:
            raise ValueError("freqs and values must have matching shapes")
        if np.any(freqs <= 0.0) or np.any(np.diff(freqs) <= 0.0):
            raise ValueError("freqs must be positive and strictly increasing")
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise ValueError("values must be finite and non-negative")
        if self.q_srs <= 0.5:
            raise ValueError(f"q_srs must exceed 0.5, got {self.q_srs}")
        object.__setattr__(self, "freqs", _frozen(freqs))
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "q_srs", float(self.q_srs))


@dataclasses.dataclass(frozen=True)
class DbErrorReport:
    """Per-frequency amplitude dB errors of an SRS against a target.

    ``floor_hit`` flags grid points where the actual SRS was zero; those
    entries are -inf dB and force a failure.
    """

    per_freq_db: np.ndarray
    max_abs_db: float
    tolerance_db: float
    passed: bool
    floor_hit: bool = False

    def __post_init__(self):
        object.__setattr__(self, "per_freq_db", _frozen(self.per_freq_db))


def _sdof_coeffs(fn: float, q_srs: float, dt: float):
    """Ramp-invariant recursion for the SDOF absolute-acceleration response.

    Smallwood's filter: exact for base accelerations that are piecewise
    linear between samples.
    """
    zeta = 0.5 / q_srs
    wn = TWO_PI * fn
    wd = wn * np.sqrt(1.0 - zeta * zeta)
    e = np.exp(-zeta * wn * dt)
    c = e * np.cos(wd * dt)
    s = e * np.sin(wd * dt)
    sp = s / (wd * dt)
    b = np.array([1.0 - sp, 2.0 * (sp - c), e * e - sp])
    a = np.array([1.0, -2.0 * c, e * e])
    return b, a


def _check_freqs(freqs: np.ndarray, fs: float, q_srs: float) -> None:
    if q_srs <= 0.5:
        raise ValueError(f"q_srs must exceed 0.5, got {q_srs}")
    if np.any(freqs <= 0.0):
        raise ValueError("natural frequencies must be positive")
    if np.any(freqs >= fs / 2.0):
        worst = float(np.max(freqs))
        raise ValueError(
            f"natural frequency {worst:.6g} Hz is at or above Nyquist ({fs / 2.0:.6g} Hz)"
        )


def _ring_down_samples(fn: float, q_srs: float, fs: float) -> int:
    return int(np.ceil(_DECAY_LOG * 2.0 * q_srs / (TWO_PI * fn) * fs))


def srs(sig: Signal, freqs, q_srs: float = 10.0) -> SrsCurve:
    """Maximax absolute-acceleration SRS via the ramp-invariant recursion.

    Each natural frequency's oscillator runs over the record plus a
    ring-down pad of ln(1000)*2*q_srs/wn seconds, so late response peaks
    of lightly damped oscillators are not cut off.
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    fs = sig.sample_rate
    _check_freqs(freqs, fs, q_srs)
    dt = sig.dt
    values = np.empty(freqs.size)
    for i, fn in enumerate(freqs):
        b, a = _sdof_coeffs(fn, q_srs, dt)
        x = np.concatenate([sig.samples, np.zeros(_ring_down_samples(fn, q_srs, fs))])
        y = _sci_signal.lfilter(b, a, x)
        values[i] = np.max(np.abs(y))
    return SrsCurve(freqs, values, q_srs)


def srs_oracle(sig: Signal, fn: float, q_srs: float = 10.0) -> float:
    """Maximax absolute acceleration from direct ODE integration.

    Integrates the relative-coordinate SDOF equation

        z'' + (wn/q_srs) z' + wn^2 z = -a_base(t)

    with classical fixed-step RK4 at >= 20 steps per period, treating the
    base acceleration as piecewise linear between samples (the same input
    model the ramp-invariant recursion assumes).  The absolute
    acceleration -( (wn/q_srs) z' + wn^2 z ) is recorded on the signal's
    own sample grid over the record plus ring-down pad.
    """
    fn = float(fn)
    _check_freqs(np.array([fn]), sig.sample_rate, q_srs)
    dt = sig.dt
    sub = max(1, int(np.ceil(20.0 * fn * dt)))
    h = dt / sub

    u = np.concatenate([sig.samples, np.zeros(_ring_down_samples(fn, q_srs, sig.sample_rate))])
    n_steps = (u.size - 1) * sub
    t_fine = np.arange(n_steps + 1) * h
    u_fine = np.interp(t_fine, np.arange(u.size) * dt, u)

    zeta = 0.5 / q_srs
    wn = TWO_PI * fn
    f_mat = np.array([[0.0, 1.0], [-wn * wn, -2.0 * zeta * wn]])

    eye = np.eye(2)
    f2 = f_mat @ f_mat
    f3 = f2 @ f_mat
    f4 = f3 @ f_mat
    phi = eye + h * f_mat + h * h / 2.0 * f2 + h ** 3 / 6.0 * f3 + h ** 4 / 24.0 * f4
    # Forcing weights of one RK4 step for g sampled at t, t+h/2, t+h.
    a0 = h / 6.0 * (eye + h * f_mat + h * h / 2.0 * f2 + h ** 3 / 4.0 * f3)
    ah = h / 6.0 * (4.0 * eye + 2.0 * h * f_mat + h * h / 2.0 * f2)
    a1 = h / 6.0 * eye

    # g(t) = [0, -u(t)]: only the second column of each weight matrix acts.
    u0 = u_fine[:-1]
    u1 = u_fine[1:]
    uh = 0.5 * (u0 + u1)  # midpoint of a piecewise-linear segment
    wz = -(a0[0, 1] * u0 + ah[0, 1] * uh + a1[0, 1] * u1)
    wv = -(a0[1, 1] * u0 + ah[1, 1] * uh + a1[1, 1] * u1)

    p00, p01 = phi[0]
    p10, p11 = phi[1]
    zs = np.empty(n_steps + 1)
    vs = np.empty(n_steps + 1)
    z = v = 0.0
    zs[0] = vs[0] = 0.0
    for n in range(n_steps):
        z, v = p00 * z + p01 * v + wz[n], p10 * z + p11 * v + wv[n]
        zs[n + 1] = z
        vs[n + 1] = v
    acc = -(2.0 * zeta * wn * vs[::sub] + wn * wn * zs[::sub])
    return float(np.max(np.abs(acc)))


def spec_interpolate(spec: SrsSpec, freqs) -> SrsCurve:
    """Log-log linear interpolation of a breakpoint spec onto a grid.

    Frequencies outside the breakpoint range are clamped to the end values
    with a warning.
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    if freqs.size == 0:
        raise ValueError("freqs must be non-empty")
    if np.any(freqs <= 0.0):
        raise ValueError("freqs must be positive")
    lo, hi = spec.freqs[0], spec.freqs[-1]
    if np.any(freqs < lo) or np.any(freqs > hi):
        warnings.warn(
            f"interpolation frequencies outside spec range [{lo:.6g}, {hi:.6g}] Hz "
            f"are clamped to the end values",
            stacklevel=2,
        )
    clamped = np.clip(freqs, lo, hi)
    log_vals = np.interp(np.log10(clamped), np.log10(spec.freqs), np.log10(spec.peaks))
    return SrsCurve(freqs, 10.0 ** log_vals)


def db_error(actual: SrsCurve, target: SrsCurve, tolerance_db: float = 3.0) -> DbErrorReport:
    """Per-frequency 20*log10(actual/target) with a max-abs pass verdict."""
    if actual.freqs.shape != target.freqs.shape or not np.allclose(
        actual.freqs, target.freqs, rtol=1e-12, atol=0.0
    ):
        raise ValueError("actual and target curves must share the same frequency grid")
    if np.any(target.values <= 0.0):
        raise ValueError("target SRS values must be positive")
    if tolerance_db <= 0.0:
        raise ValueError(f"tolerance_db must be positive, got {tolerance_db}")
    floor_hit = bool(np.any(actual.values == 0.0))
    with np.errstate(divide="ignore"):
        per_db = 20.0 * np.log10(actual.values / target.values)
    max_abs = float(np.max(np.abs(per_db)))
    passed = (not floor_hit) and max_abs <= tolerance_db
    return DbErrorReport(per_db, max_abs, float(tolerance_db), passed, floor_hit)


def read_spec(path, tolerance_db: float = 3.0) -> SrsSpec:
    """Read a breakpoint spec CSV (``freq_hz,peak_accel_m_s2``)."""
    path = Path(path)
    rows = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if lineno == 1 and line.lower().replace(" ", "") == "freq_hz,peak_accel_m_s2":
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise SignalFormatError(
                    f"{path.name}: expected 2 comma-separated fields on line {lineno}, "
                    f"got {len(parts)}"
                )
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise SignalFormatError(
                    f"{path.name}: non-numeric value on line {lineno}: {line!r}"
                ) from None
    if len(rows) < 2:
        raise SignalFormatError(f"{path.name}: need at least 2 breakpoints")
    try:
        return SrsSpec(np.asarray(rows), tolerance_db)
    except ValueError as exc:
        raise SignalFormatError(f"{path.name}: {exc}") from None


def write_curve(curve: SrsCurve, path) -> None:
    """Write an SRS curve as CSV (``freq_hz,srs_m_s2``), %.12g, LF, UTF-8."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("freq_hz,srs_m_s2\n")
        for f, v in zip(curve.freqs, curve.values):
            fh.write(f"{f:.12g},{v:.12g}\n")
