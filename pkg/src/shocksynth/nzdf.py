"""Net-zero displacement band-pass filters and their gammatone ancestry.

The analog prototype is

    H(s) = K s^M / (s^2 + (w/Q) s + w^2)^N,     w = 2*pi*fc

an N-fold repeated resonant pole pair with an M-fold zero at the origin.
With M >= 2 the transfer function carries a double (or higher) zero at
s = 0, so the impulse response integrates to zero net velocity *and* zero
net displacement; with M <= 2N - 1 the high-frequency magnitude still
rolls off.  K = w^(2N - M) / Q^N sets the magnitude at the center
frequency to exactly one.

The default shape (N=2, M=2, Q=5) is a squared unity-peak band-pass
biquad.  Discretization maps each analog section through the bilinear
transform, pre-warped so the digital response at fc equals the analog
response there.  The bilinear image keeps the zeros at z = 1, which is
what preserves the net-zero property in discrete time: the output's
zeroth and first moments vanish identically.

A gammatone impulse a * t^(N-1) * exp(-b t) * cos(wc t + phi) shares the
same pole layout (w = sqrt(wc^2 + b^2), Q = w / (2 b)) but lacks the
origin zeros, so it leaves behind a net velocity offset.  The gammatone
helpers here exist mainly to demonstrate that contrast.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np
from scipy import signal as _sci_signal

from .signal_core import Signal

__all__ = [
    "NzdfParams",
    "DigitalNzdf",
    "GammatoneParams",
    "validate_order",
    "nzdf_gain",
    "q_to_beta",
    "beta_to_q",
    "group_delay",
    "discretize",
    "apply_filter",
    "impulse_response",
    "gammatone_impulse",
]

TWO_PI = 2.0 * np.pi

# Ring-down pad length in units of 2 Q / w.  The default filter has a
# repeated pole pair, so its envelope decays like t * exp(-w t / (2 Q))
# rather than a bare exponential; solving b t = 1 + ln(1000) + ln(b t)
# gives b t ~ 10.3 for a 60 dB drop below the envelope peak.
_DECAY_FACTOR = 10.5

_BISECT_LO = 0.8
_BISECT_HI = 1.0e4
_BISECT_TOL = 1.0e-9


def validate_order(numerator_power: int, order: int) -> bool:
    """True when the zero multiplicity keeps both net-zero motion and decay.

    ``numerator_power`` (the multiplicity M of the zero at s = 0) must be
    at least 2 so velocity and displacement both return to zero, and at
    most 2*order - 1 so the magnitude still falls off above the band.
    """
    m = int(numerator_power)
    n = int(order)
    if m != numerator_power or n != order:
        raise TypeError("numerator_power and order must be integers")
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    return 2 <= m <= 2 * n - 1


@dataclasses.dataclass(frozen=True)
class NzdfParams:
    """Analog filter parameters.

    Parameters
    ----------
    center_freq : float
        Center frequency fc in Hz, > 0.
    q : float, optional
        Quality factor of each pole pair, > 0.5 (underdamped).
    order : int, optional
        Pole-pair multiplicity N, >= 1.
    numerator_power : int, optional
        Zero multiplicity M at the origin; must satisfy
        2 <= M <= 2*N - 1.
    """

    center_freq: float
    q: float = 5.0
    order: int = 2
    numerator_power: int = 2

    def __post_init__(self):
        fc = float(self.center_freq)
        q = float(self.q)
        if not np.isfinite(fc) or fc <= 0.0:
            raise ValueError(f"center_freq must be positive, got {fc}")
        if not np.isfinite(q) or q <= 0.5:
            raise ValueError(f"q must exceed 0.5 (underdamped), got {q}")
        if not validate_order(self.numerator_power, self.order):
            raise ValueError(
                f"numerator_power={self.numerator_power} with order={self.order} "
                f"violates 2 <= M <= 2*N - 1"
            )
        object.__setattr__(self, "center_freq", fc)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "order", int(self.order))
        object.__setattr__(self, "numerator_power", int(self.numerator_power))

    @property
    def omega(self) -> float:
        """Center frequency in rad/s."""
        return TWO_PI * self.center_freq

    @property
    def gain(self) -> float:
        """Numerator constant K giving unity magnitude at the center."""
        return self.omega ** (2 * self.order - self.numerator_power) / self.q ** self.order

    @property
    def ring_down_time(self) -> float:
        """Seconds for the envelope to decay below 1/1000 of its peak."""
        return _DECAY_FACTOR * 2.0 * self.q / self.omega


def nzdf_gain(f_eval, params: NzdfParams):
    """Complex frequency response H(j 2 pi f).

    ``f_eval`` may be a scalar or an array of frequencies in Hz.
    """
    s = 1j * TWO_PI * np.asarray(f_eval, dtype=float)
    w = params.omega
    den = (s * s + (w / params.q) * s + w * w) ** params.order
    h = params.gain * s ** params.numerator_power / den
    if np.isscalar(f_eval):
        return complex(h)
    return h


def q_to_beta(q: float) -> float:
    """Relative 3 dB bandwidth (f_hi - f_lo)/fc of the default magnitude shape.

    Closed form for N=2, M=2: the band edges are the two frequencies where
    the full filter magnitude crosses 2^(-1/2).  Decreasing in q; for large
    q it behaves like sqrt(sqrt(2) - 1) / q.
    """
    q = float(q)
    if not np.isfinite(q) or q <= 0.5:
        raise ValueError(f"q must exceed 0.5, got {q}")
    r2 = np.sqrt(2.0)
    rad = np.sqrt(4.0 * (r2 - 1.0) * q * q - 2.0 * r2 + 3.0)
    hi = np.sqrt((2.0 * q * q + rad + r2 - 1.0) / (2.0 * q * q))
    lo_arg = (2.0 * q * q - rad + r2 - 1.0) / (2.0 * q * q)
    if lo_arg < 0.0:
        raise ValueError(f"q={q} is below the underdamped range of the bandwidth form")
    return float(hi - np.sqrt(lo_arg))


def beta_to_q(beta: float) -> float:
    """Invert :func:`q_to_beta` by bisection on q in [0.8, 1e4]."""
    beta = float(beta)
    b_hi = q_to_beta(_BISECT_LO)
    b_lo = q_to_beta(_BISECT_HI)
    if not (b_lo <= beta <= b_hi):
        raise ValueError(
            f"beta={beta:.6g} outside invertible range [{b_lo:.6g}, {b_hi:.6g}]"
        )
    lo, hi = _BISECT_LO, _BISECT_HI
    # q_to_beta is decreasing: wide bandwidth means low q.
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if q_to_beta(mid) > beta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def group_delay(params: NzdfParams) -> float:
    """Group delay -dphi/domega at the center frequency, in seconds.

    Each pole pair contributes 2 Q / w of delay at resonance and the
    origin zeros contribute none, so the total is 2 N Q / w.
    """
    return 2.0 * params.order * params.q / params.omega


def _numerator_powers(params: NzdfParams) -> list[int]:
    """Split the M origin zeros across N biquad sections, most even first."""
    base, extra = divmod(params.numerator_power, params.order)
    return [base + 1] * extra + [base] * (params.order - extra)


@dataclasses.dataclass(frozen=True)
class DigitalNzdf:
    """Bilinear-transform image of :class:`NzdfParams` at a fixed rate.

    ``sos`` holds second-order sections in scipy's (b0, b1, b2, a0, a1, a2)
    layout with a0 = 1, ready for ``scipy.signal.sosfilt``.  Construction
    validates that every pole lies strictly inside the unit circle.
    """

    params: NzdfParams
    sample_rate: float
    sos: np.ndarray

    def __post_init__(self):
        sos = np.array(self.sos, dtype=float)
        if sos.ndim != 2 or sos.shape[1] != 6:
            raise ValueError(f"sos must have shape (n_sections, 6), got {sos.shape}")
        for section in sos:
            poles = np.roots(section[3:])
            if np.any(np.abs(poles) >= 1.0):
                raise ValueError("discretized section has a pole on or outside the unit circle")
        sos.setflags(write=False)
        object.__setattr__(self, "sos", sos)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def frequency_response(self, freqs) -> np.ndarray:
        """Complex response of the cascade at the given frequencies in Hz."""
        w = TWO_PI * np.asarray(freqs, dtype=float) / self.sample_rate
        _, h = _sci_signal.sosfreqz(self.sos, worN=w, fs=TWO_PI)
        return h


def discretize(params: NzdfParams, fs: float) -> DigitalNzdf:
    """Map the analog filter to second-order sections at sample rate ``fs``.

    Uses the bilinear transform pre-warped at the center frequency, then
    rescales so the digital magnitude at fc is exactly one.  Raises for
    fs <= 2*fc and warns when fs < 10*fc, where the bilinear frequency
    compression noticeably reshapes the upper skirt.
    """
    fs = float(fs)
    fc = params.center_freq
    if fs <= 2.0 * fc:
        raise ValueError(f"fs={fs:.6g} must exceed 2*fc={2.0 * fc:.6g}")
    if fs < 10.0 * fc:
        warnings.warn(
            f"fs={fs:.6g} is below 10*fc={10.0 * fc:.6g}; expect bilinear warping "
            f"distortion on the upper skirt",
            stacklevel=2,
        )
    w = params.omega
    q = params.q
    w0 = w / fs
    c = w / np.tan(w0 / 2.0)  # pre-warp: s = c (1 - 1/z) / (1 + 1/z) hits j*w at fc

    sections = []
    for m in _numerator_powers(params):
        g = w ** (2 - m) / q
        if m == 0:
            num = g * np.array([1.0, 2.0, 1.0])
        elif m == 1:
            num = g * c * np.array([1.0, 0.0, -1.0])
        else:
            num = g * c * c * np.array([1.0, -2.0, 1.0])
        a0 = c * c + (w / q) * c + w * w
        den = np.array([a0, 2.0 * (w * w - c * c), c * c - (w / q) * c + w * w])
        sections.append(np.hstack([num / a0, den / a0]))
    sos = np.asarray(sections)

    # Pin exact unity gain at the center against accumulated rounding.
    _, h = _sci_signal.sosfreqz(sos, worN=[w0], fs=TWO_PI)
    sos[0, :3] /= np.abs(h[0])
    return DigitalNzdf(params, fs, sos)


def apply_filter(filt: DigitalNzdf, sig: Signal) -> Signal:
    """Filter a signal and append the ring-down pad.

    The input is extended with ``params.ring_down_time`` seconds of zeros
    before filtering so the transient excited by the final samples can
    decay inside the record.
    """
    if not np.isclose(sig.sample_rate, filt.sample_rate, rtol=1e-9, atol=0.0):
        raise ValueError(
            f"signal rate {sig.sample_rate:.6g} Hz does not match filter rate "
            f"{filt.sample_rate:.6g} Hz"
        )
    n_pad = int(np.ceil(filt.params.ring_down_time * sig.sample_rate))
    x = np.concatenate([sig.samples, np.zeros(n_pad)])
    # sosfilt wants writable coefficient memory; the stored array is frozen.
    y = _sci_signal.sosfilt(filt.sos.copy(), x)
    return Signal(sig.sample_rate, y, t0=sig.t0)


def impulse_response(filt: DigitalNzdf, duration: float) -> Signal:
    """Response to a unit-area discrete impulse (amplitude fs at t = 0).

    ``duration`` sets the pre-pad record length; :func:`apply_filter`
    appends its usual ring-down on top.
    """
    if duration <= 0.0:
        raise ValueError(f"duration must be positive, got {duration}")
    n = int(round(duration * filt.sample_rate)) + 1
    x = np.zeros(n)
    x[0] = filt.sample_rate
    return apply_filter(filt, Signal(filt.sample_rate, x))


@dataclasses.dataclass(frozen=True)
class GammatoneParams:
    """Gammatone envelope-and-carrier description.

    ``bandwidth`` is the exponential decay constant b in rad/s.  The
    corresponding filter pole layout has w = sqrt(wc^2 + b^2) and
    Q = w / (2 b).
    """

    center_freq: float
    bandwidth: float
    order: int = 2
    amplitude: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if self.center_freq <= 0.0:
            raise ValueError(f"center_freq must be positive, got {self.center_freq}")
        if self.bandwidth <= 0.0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if int(self.order) < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        object.__setattr__(self, "order", int(self.order))


def gammatone_impulse(gp: GammatoneParams, fs: float, duration: float) -> Signal:
    """Sample a * t^(N-1) * exp(-b t) * cos(wc t + phi) on a uniform grid."""
    if duration <= 0.0:
        raise ValueError(f"duration must be positive, got {duration}")
    n = int(round(duration * fs)) + 1
    t = np.arange(n) / fs
    wc = TWO_PI * gp.center_freq
    env = gp.amplitude * t ** (gp.order - 1) * np.exp(-gp.bandwidth * t)
    return Signal(fs, env * np.cos(wc * t + gp.phase))
