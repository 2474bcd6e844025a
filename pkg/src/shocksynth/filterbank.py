"""Sixth-octave filter bank layout and the normalized basis matrix.

A reference shock is passed through one band-pass filter per grid center,
every filtered column is padded to a common length and scaled to unit peak,
and the columns are assembled side by side.  Linear combinations of the
columns then inherit the per-column net-zero property, which is the whole
point of building the basis this way.
"""

from __future__ import annotations

import dataclasses
import warnings
from pathlib import Path

import numpy as np

from .nzdf import NzdfParams, apply_filter, discretize
from .signal_core import Signal, motion_of

__all__ = [
    "BankLayout",
    "BasisMatrix",
    "NoBandEnergyError",
    "make_layout",
    "build_basis",
    "four_coordinate_check",
    "write_basis",
]

TWO_PI = 2.0 * np.pi

# Columns whose peak falls below this fraction of the reference peak carry
# no usable band energy.
_ENERGY_FLOOR = 1e-12


class NoBandEnergyError(ValueError):
    """Raised when the reference has no usable energy in some band."""

    def __init__(self, center_freq: float, message: str):
        super().__init__(message)
        self.center_freq = center_freq


@dataclasses.dataclass(frozen=True)
class BankLayout:
    """Geometric frequency grid with ``points_per_octave`` points per octave.

    ``centers[k] = fmin * 2**(k / points_per_octave)``; the last center is
    the first grid point at or above ``fmax``.
    """

    fmin: float
    fmax: float
    points_per_octave: int
    centers: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        if centers.ndim != 1 or centers.size == 0:
            raise ValueError("centers must be a non-empty 1-D array")
        centers = centers.copy()
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)


def make_layout(fmin: float, fmax: float, ppo: int = 6) -> BankLayout:
    """Build the grid covering [fmin, fmax] at 2**(1/ppo) spacing."""
    fmin = float(fmin)
    fmax = float(fmax)
    if fmin <= 0.0:
        raise ValueError(f"fmin must be positive, got {fmin}")
    if fmax <= fmin:
        raise ValueError(f"fmax must exceed fmin, got fmin={fmin}, fmax={fmax}")
    ppo = int(ppo)
    if ppo < 1:
        raise ValueError(f"points_per_octave must be >= 1, got {ppo}")
    # Small backoff so an fmax exactly on the grid does not gain an extra point.
    k_last = int(np.ceil(ppo * np.log2(fmax / fmin) - 1e-9))
    centers = fmin * 2.0 ** (np.arange(k_last + 1) / ppo)
    return BankLayout(fmin, fmax, ppo, centers)


@dataclasses.dataclass(frozen=True)
class BasisMatrix:
    """Unit-peak filtered columns of the reference, one per bank center.

    ``columns`` has shape (n_samples, n_centers); column i is the reference
    filtered at ``layout.centers[i]``, padded to the common length and
    divided by its own peak.  ``norms`` holds those peaks in m/s^2 so
    physical amplitudes stay recoverable.
    """

    layout: BankLayout
    sample_rate: float
    columns: np.ndarray
    norms: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=float)
        norms = np.asarray(self.norms, dtype=float)
        if cols.ndim != 2 or cols.shape[1] != self.layout.centers.size:
            raise ValueError(
                f"columns must be (n_samples, {self.layout.centers.size}), got {cols.shape}"
            )
        if norms.shape != (cols.shape[1],):
            raise ValueError("norms must hold one value per column")
        cols = cols.copy()
        cols.setflags(write=False)
        norms = norms.copy()
        norms.setflags(write=False)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "norms", norms)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    @property
    def n_columns(self) -> int:
        return self.columns.shape[1]

    def column_signal(self, i: int) -> Signal:
        return Signal(self.sample_rate, self.columns[:, i])


def build_basis(
    reference: Signal,
    layout: BankLayout,
    q: float = 5.0,
    order: int = 2,
    numerator_power: int = 2,
) -> BasisMatrix:
    """Filter the reference at every bank center and assemble the matrix.

    Each column gets the filter's own ring-down pad; all columns are then
    brought to the common length set by the lowest center (the longest
    ring-down) by pre-extending the filter input, so every tail is the
    filter's natural decay rather than a truncation.
    """
    top = float(layout.centers[-1])
    fs = reference.sample_rate
    if fs < 2.5 * top:
        raise ValueError(
            f"reference rate {fs:.6g} Hz is below 2.5x the top center {top:.6g} Hz"
        )
    if fs < 10.0 * top:
        warnings.warn(
            f"reference rate {fs:.6g} Hz is below 10x the top center {top:.6g} Hz; "
            f"upper-band filters operate close to Nyquist",
            stacklevel=2,
        )

    params = [
        NzdfParams(fc, q=q, order=order, numerator_power=numerator_power)
        for fc in layout.centers
    ]
    pads = [int(np.ceil(p.ring_down_time * fs)) for p in params]
    pad_max = max(pads)
    n_common = len(reference) + pad_max

    ref_peak = float(np.max(np.abs(reference.samples)))
    if ref_peak == 0.0:
        raise NoBandEnergyError(
            float(layout.centers[0]), "reference signal is identically zero"
        )
    cols = np.empty((n_common, layout.centers.size))
    norms = np.empty(layout.centers.size)
    with warnings.catch_warnings():
        # The bank-level warning above already covers near-Nyquist centers.
        warnings.simplefilter("ignore")
        for i, (p, pad) in enumerate(zip(params, pads)):
            filt = discretize(p, fs)
            extended = np.concatenate([reference.samples, np.zeros(pad_max - pad)])
            out = apply_filter(filt, Signal(fs, extended, reference.t0))
            peak = float(np.max(np.abs(out.samples)))
            if peak < _ENERGY_FLOOR * ref_peak:
                raise NoBandEnergyError(
                    p.center_freq,
                    f"reference has no energy at {p.center_freq:.6g} Hz "
                    f"(column peak {peak:.3g} vs reference peak {ref_peak:.3g})",
                )
            cols[:, i] = out.samples / peak
            norms[i] = peak
    return BasisMatrix(layout, fs, cols, norms)


def four_coordinate_check(column: Signal, fc: float) -> tuple[float, float]:
    """Peak-amplitude ratios linking acceleration, velocity, displacement.

    For a narrowband signal at fc the three peak amplitudes are tied by
    the carrier frequency: max|a| = w max|v| = w^2 max|u|.  Returns
    (max|a| / (w max|v|), max|a| / (w^2 max|u|)); both near 1 when the
    narrowband assumption holds.
    """
    if fc <= 0.0:
        raise ValueError(f"fc must be positive, got {fc}")
    w = TWO_PI * fc
    m = motion_of(column)
    peak_a = float(np.max(np.abs(m.acceleration.samples)))
    peak_v = float(np.max(np.abs(m.velocity.samples)))
    peak_d = float(np.max(np.abs(m.displacement.samples)))
    if peak_v == 0.0 or peak_d == 0.0:
        raise ValueError("velocity and displacement peaks must be nonzero")
    return peak_a / (w * peak_v), peak_a / (w * w * peak_d)


def write_basis(basis: BasisMatrix, path) -> None:
    """CSV dump of the basis, one column per center, centers in the header."""
    path = Path(path)
    header = ",".join(f"{fc:.12g}" for fc in basis.layout.centers)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in basis.columns:
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")
