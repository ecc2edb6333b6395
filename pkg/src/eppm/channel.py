"""Discrete chip-rate channel model: LOS + diffuse taps, LED response, shot noise.

The channel is a delta line-of-sight component plus a Gaussian-shaped diffuse
component, discretized into nonnegative taps that sum to 1 (energy fractions).
Photon statistics are Poisson: mean signal count per chip at unit amplitude is
Lambda0, background adds Lambda_b to every chip.

Tap ell integrates arrivals in the window centered at ell*chip_time.  In
cyclic mode taps wrap modulo Q (the intra-symbol analysis model); in linear
mode they form a causal FIR response (mass at negative delays is clipped and
the diffuse component renormalized, keeping the configured LOS/NLOS split).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as sp_signal
from scipy.special import ndtr

__all__ = [
    "BadGeometry",
    "ModeMismatch",
    "PLANCK",
    "C_LIGHT",
    "ChannelTaps",
    "PhotonModel",
    "build_taps",
    "led_response_taps",
    "propagate",
    "sample_counts",
    "illuminance_to_power",
]

PLANCK = 6.62607015e-34  # J s
C_LIGHT = 299792458.0  # m/s


class BadGeometry(ValueError):
    """LOS present but the diffuse delay is below one chip."""


class ModeMismatch(ValueError):
    """Cyclic propagation requested for a frame that is not symbol-length."""


def photon_energy(wavelength: float) -> float:
    return PLANCK * C_LIGHT / wavelength


@dataclass(frozen=True, eq=False)
class ChannelTaps:
    """Discrete impulse response h_0..h_L at chip rate (energy fractions).

    ``q`` is the symbol length the cyclic view folds onto (unused in linear
    mode).
    """

    h: np.ndarray
    chip_time: float
    mode: str = "cyclic"  # or "linear"
    q: int | None = None

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.float64)
        object.__setattr__(self, "h", h)
        if np.any(h < 0):
            raise ValueError("taps must be nonnegative")
        if self.mode not in ("cyclic", "linear"):
            raise ValueError(f"mode must be cyclic or linear, got {self.mode!r}")
        if self.mode == "cyclic" and self.q is None:
            object.__setattr__(self, "q", len(h))

    def wrapped(self, q: int | None = None) -> np.ndarray:
        """Tap vector folded modulo q (cyclic-analysis view)."""
        if q is None:
            q = self.q if self.q is not None else len(self.h)
        out = np.zeros(q)
        for ell, val in enumerate(self.h):
            out[ell % q] += val
        return out


@dataclass(frozen=True)
class PhotonModel:
    """Poisson photon-count scalars for one chip.

    lambda0 is the mean detected signal count per chip at unit frame
    amplitude: eta * P0 * chip_time / (h c / wavelength).  lambda_b is the
    mean background count per chip.
    """

    lambda0: float
    lambda_b: float
    eta: float
    peak_power: float
    wavelength: float
    chip_time: float
    area_cm2: float = 1.0

    def __post_init__(self):
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")
        if self.lambda_b < 0:
            raise ValueError("lambda_b must be nonnegative")
        expected = self.eta * self.peak_power * self.chip_time / photon_energy(self.wavelength)
        if abs(self.lambda0 - expected) > 1e-12 * max(expected, 1.0):
            raise ValueError(
                f"lambda0 {self.lambda0} inconsistent with eta*P0*Tc/hv = {expected}"
            )

    @classmethod
    def from_peak_power(
        cls,
        eta: float,
        peak_power: float,
        wavelength: float,
        chip_time: float,
        background_power: float = 0.0,
        area_cm2: float = 1.0,
    ) -> "PhotonModel":
        e_photon = photon_energy(wavelength)
        return cls(
            lambda0=eta * peak_power * chip_time / e_photon,
            lambda_b=eta * background_power * chip_time / e_photon,
            eta=eta,
            peak_power=peak_power,
            wavelength=wavelength,
            chip_time=chip_time,
            area_cm2=area_cm2,
        )

    @classmethod
    def from_bit_energy(
        cls,
        eta: float,
        energy_per_bit: float,
        bits_per_symbol: int,
        code_weight: int,
        wavelength: float,
        chip_time: float,
        background_power: float = 0.0,
        area_cm2: float = 1.0,
    ) -> "PhotonModel":
        """Photon model from total received energy per bit (all paths).

        The symbol's K unit-amplitude pulses carry the whole per-symbol
        energy, so lambda0 = eta * b * E_bit / (hv * K); the implied peak
        power is lambda0 * hv / (eta * chip_time).
        """
        e_photon = photon_energy(wavelength)
        lambda0 = eta * bits_per_symbol * energy_per_bit / (e_photon * code_weight)
        peak_power = lambda0 * e_photon / (eta * chip_time)
        return cls(
            lambda0=lambda0,
            lambda_b=eta * background_power * chip_time / e_photon,
            eta=eta,
            peak_power=peak_power,
            wavelength=wavelength,
            chip_time=chip_time,
            area_cm2=area_cm2,
        )


def _gaussian_bin_masses(center: float, sigma: float, chip_time: float) -> tuple[int, np.ndarray]:
    """Mass of a unit Gaussian, truncated at +-4 sigma, in chip bins.

    Bin ell covers [(ell-0.5)*Tc, (ell+0.5)*Tc).  Returns (first_index, masses).
    """
    if sigma == 0.0:
        ell = int(round(center / chip_time))
        return ell, np.array([1.0])
    lo = center - 4.0 * sigma
    hi = center + 4.0 * sigma
    first = int(math.floor(lo / chip_time + 0.5))
    last = int(math.floor(hi / chip_time + 0.5))
    edges = (np.arange(first, last + 2) - 0.5) * chip_time
    edges = np.clip(edges, lo, hi)
    z = (edges - center) / sigma
    masses = np.diff(ndtr(z))
    total = masses.sum()
    if total <= 0:
        return int(round(center / chip_time)), np.array([1.0])
    return first, masses / total


def build_taps(
    sigma: float,
    tau: float,
    e_los: float,
    e_nlos: float,
    chip_time: float,
    q: int,
    mode: str = "cyclic",
) -> ChannelTaps:
    """Taps for a delta LOS at t=0 plus a Gaussian diffuse hump at delay tau.

    Tap 0 carries e_los/(e_los+e_nlos); the Gaussian (std sigma, truncated at
    +-4 sigma) carries the rest.  Blocked-LOS channels use e_los = 0, in which
    case the hump itself is the synchronization reference (tau may be 0; in
    cyclic mode negative-delay mass wraps).  Taps always sum to 1.
    """
    if sigma < 0 or e_los < 0 or e_nlos < 0:
        raise ValueError("sigma and energies must be nonnegative")
    if e_los + e_nlos <= 0:
        raise ValueError("need e_los + e_nlos > 0")
    if e_los > 0 and e_nlos > 0 and tau < chip_time:
        raise BadGeometry(f"diffuse delay tau={tau} below one chip {chip_time}")

    los_frac = e_los / (e_los + e_nlos)
    nlos_frac = 1.0 - los_frac

    if nlos_frac == 0.0:
        return ChannelTaps(h=np.array([1.0]), chip_time=chip_time, mode=mode, q=q)

    first, masses = _gaussian_bin_masses(tau, sigma, chip_time)

    if mode == "cyclic":
        h = np.zeros(q)
        h[0] += los_frac
        for i, m in enumerate(masses):
            h[(first + i) % q] += nlos_frac * m
    else:
        # causal: clip negative-delay mass, renormalize the diffuse part
        idx = np.arange(first, first + len(masses))
        keep = idx >= 0
        kept = masses[keep]
        if kept.sum() <= 0:
            raise BadGeometry("diffuse component entirely at negative delay")
        kept = kept / kept.sum()
        last = idx[keep][-1]
        h = np.zeros(last + 1)
        h[0] += los_frac
        h[idx[keep]] += nlos_frac * kept
    return ChannelTaps(h=h, chip_time=chip_time, mode=mode, q=q)


def _bessel_impulse(order: int):
    """Normalized impulse response of an analog Bessel low-pass prototype.

    Returns (t_grid, h, t99) where t99 is the decay-to-1%-of-peak time.
    """
    b, a = sp_signal.bessel(order, 1.0, btype="low", analog=True, norm="delay")
    t = np.linspace(0.0, 80.0, 400001)
    _, h = sp_signal.impulse(sp_signal.lti(b, a), T=t)
    peak = np.abs(h).max()
    above = np.nonzero(np.abs(h) > 0.01 * peak)[0]
    t99 = t[above[-1] + 1]
    return t, h, t99


def led_response_taps(
    t_led: float, chip_time: float, order: int = 6, oversample: int = 16
) -> np.ndarray:
    """Chip-integrated impulse response of a Bessel-filter LED model.

    The analog prototype is time-scaled so its impulse response decays to 1%
    of peak exactly at t_led, sampled at oversample x chip rate
    (impulse-invariance) and integrated per chip.  Output is clipped at zero
    (the filter's sub-percent undershoot) and normalized to sum to 1.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if t_led <= 0 or chip_time <= 0:
        raise ValueError("t_led and chip_time must be positive")
    tn, hn, t99 = _bessel_impulse(order)
    scale = t_led / t99  # seconds per normalized time unit
    dt = chip_time / oversample
    n_chips = max(1, int(math.ceil(t_led * 1.25 / chip_time)))
    ts = np.arange(n_chips * oversample) * dt
    h = np.interp(ts / scale, tn, hn, right=0.0)
    taps = h.reshape(n_chips, oversample).sum(axis=1)
    taps = np.clip(taps, 0.0, None)
    taps /= taps.sum()
    nz = np.nonzero(taps > 1e-15)[0]
    return taps[: nz[-1] + 1]


def propagate(frame: np.ndarray, taps: ChannelTaps, photon: PhotonModel) -> np.ndarray:
    """Mean photoelectron-count vector for one transmitted frame.

    Cyclic mode: circular convolution over the Q frame chips.  Linear mode:
    full linear convolution (length n + L); the caller handles streaming
    across symbol boundaries.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if taps.mode == "cyclic":
        q = taps.q if taps.q is not None else frame.shape[-1]
        if frame.shape[-1] != q:
            raise ModeMismatch(
                f"cyclic propagation needs symbol-length frames ({q}), got {frame.shape[-1]}"
            )
        h = taps.wrapped(q)
        out = np.zeros_like(frame)
        for ell in np.nonzero(h)[0]:
            out += h[ell] * np.roll(frame, ell, axis=-1)
        return photon.lambda0 * out + photon.lambda_b
    full = np.convolve(frame, taps.h)
    return photon.lambda0 * full + photon.lambda_b


def sample_counts(means: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Independent Poisson draws per chip; reproducible given the generator state."""
    means = np.asarray(means)
    if np.any(means < 0):
        raise ValueError("means must be nonnegative")
    return rng.poisson(means)


def illuminance_to_power(lux: float, area_cm2: float) -> float:
    """Received optical watts for an illuminance level: 1 lx -> 1e-7 W per cm^2."""
    if lux < 0:
        raise ValueError("lux must be nonnegative")
    return lux * area_cm2 * 1e-7
