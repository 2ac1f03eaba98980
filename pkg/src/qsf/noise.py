"""Time-domain noise realization generators for profiles N0 through N6.

Each generator returns K independent series of M samples. Profiles:

* N0 - zero noise.
* N1 - 1/f power spectrum with a Gaussian bump, synthesized spectrally.
* N2 - stationary Gaussian colored noise (white noise circularly
  convolved with a Gaussian kernel).
* N3 - N2 modulated by the deterministic envelope 1 + sin(2*pi*t/T).
* N4 - pointwise square of an N3-style series (colored, non-Gaussian,
  non-stationary).
* N5 - same as N1 with the bump at a different frequency.
* N6 - pointwise square of another axis' realizations, preserving the
  per-realization pairing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

PROFILE_TAGS = ("N0", "N1", "N2", "N3", "N4", "N5", "N6")


@dataclass(frozen=True)
class NoiseSettings:
    """Spectral and shaping constants, in cycles of 1/T where frequency-like.

    The one-over-f law is onef_amp / (f + floor_cycles/T); the bump adds
    bump_amp_factor * onef_amp * T at bump_center_cycles/T with width
    bump_width_cycles/T. strength rescales each axis after the profile's
    own normalization (N1/N5 are normalized to unit time-domain variance
    first).
    """

    onef_amp: float = 1.0
    floor_cycles: float = 1.0
    bump_amp_factor: float = 20.0
    bump_width_cycles: float = 5.0
    bump_center_cycles_n1: float = 20.0
    bump_center_cycles_n5: float = 60.0
    kernel_sigma_samples: float = 8.0
    strength: float = 1.0

    def as_dict(self) -> dict:
        return {
            "onef_amp": self.onef_amp,
            "floor_cycles": self.floor_cycles,
            "bump_amp_factor": self.bump_amp_factor,
            "bump_width_cycles": self.bump_width_cycles,
            "bump_center_cycles_n1": self.bump_center_cycles_n1,
            "bump_center_cycles_n5": self.bump_center_cycles_n5,
            "kernel_sigma_samples": self.kernel_sigma_samples,
            "strength": self.strength,
        }


DEFAULT_SETTINGS = NoiseSettings()


@dataclass(frozen=True)
class NoiseProfile:
    """A profile tag, plus the base axis index for N6."""

    tag: str
    base_axis: Optional[int] = None

    def __post_init__(self):
        if self.tag not in PROFILE_TAGS:
            raise ValueError(f"unknown noise profile {self.tag!r}")
        if self.tag == "N6" and self.base_axis is None:
            raise ValueError("N6 requires a base_axis to square")


@dataclass
class NoiseRealizations:
    """K x M realization matrix for one noise axis."""

    data: np.ndarray
    tag: str
    seed: Optional[int] = None

    @property
    def n_realizations(self) -> int:
        return self.data.shape[0]

    @property
    def n_steps(self) -> int:
        return self.data.shape[1]


def _bump_center(tag: str, total_time: float, settings: NoiseSettings) -> float:
    if tag == "N1":
        return settings.bump_center_cycles_n1 / total_time
    if tag == "N5":
        return settings.bump_center_cycles_n5 / total_time
    raise ValueError(f"profile {tag!r} has no power spectral density form")


def target_psd(
    tag: str,
    f: np.ndarray | float,
    total_time: float = 1.0,
    settings: NoiseSettings = DEFAULT_SETTINGS,
) -> np.ndarray | float:
    """One-sided power spectral density for N1/N5 at frequency f >= 0."""
    f = np.asarray(f, dtype=np.float64)
    floor = settings.floor_cycles / total_time
    bump_amp = settings.bump_amp_factor * settings.onef_amp * total_time
    width = settings.bump_width_cycles / total_time
    center = _bump_center(tag, total_time, settings)
    s = settings.onef_amp / (f + floor) + bump_amp * np.exp(
        -((f - center) ** 2) / (2.0 * width**2)
    )
    return s if s.ndim else float(s)


def _require_power_of_two(m: int) -> None:
    if m < 2 or (m & (m - 1)) != 0:
        raise ValueError(f"spectral synthesis needs a power-of-two length, got {m}")


def generate_psd_noise(
    tag: str,
    n_steps: int,
    n_realizations: int,
    total_time: float,
    rng: np.random.Generator,
    settings: NoiseSettings = DEFAULT_SETTINGS,
) -> NoiseRealizations:
    """Spectral synthesis matching target_psd (profiles N1 and N5).

    Bin m at frequency m/T gets the deterministic component amplitude
    sqrt(2 * S(f_m) * df) and an i.i.d. uniform phase; the spectrum is
    Hermitian-symmetrized and inverted, so the one-sided periodogram of
    every realization reproduces the target density. DC and Nyquist are
    zeroed, making each series exactly mean-free.
    """
    _require_power_of_two(n_steps)
    if n_realizations < 1:
        raise ValueError("need at least one realization")
    m = n_steps
    df = 1.0 / total_time
    bins = np.arange(1, m // 2)
    freqs = bins * df
    amps = np.sqrt(2.0 * np.asarray(target_psd(tag, freqs, total_time, settings)) * df)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(n_realizations, bins.size))
    spectrum = np.zeros((n_realizations, m), dtype=np.complex128)
    # numpy ifft divides by m, so m/2 * amp yields a cosine of amplitude amp
    spectrum[:, bins] = (m / 2.0) * amps * np.exp(1j * phases)
    spectrum[:, m - bins] = spectrum[:, bins].conj()
    series = np.fft.ifft(spectrum, axis=1).real
    return NoiseRealizations(data=series, tag=tag)


def psd_time_variance(
    tag: str,
    n_steps: int,
    total_time: float,
    settings: NoiseSettings = DEFAULT_SETTINGS,
) -> float:
    """Exact time-domain mean square of a generate_psd_noise realization."""
    df = 1.0 / total_time
    freqs = np.arange(1, n_steps // 2) * df
    s = np.asarray(target_psd(tag, freqs, total_time, settings))
    return float(np.sum(s) * df)


def _gaussian_kernel(n_steps: int, sigma_samples: float) -> np.ndarray:
    """Circular unit-l2 Gaussian kernel over wrapped sample offsets."""
    offsets = np.arange(n_steps, dtype=np.float64)
    dist = np.minimum(offsets, n_steps - offsets)
    if sigma_samples <= 0:
        kern = np.zeros(n_steps)
        kern[0] = 1.0
        return kern
    kern = np.exp(-(dist**2) / (2.0 * sigma_samples**2))
    return kern / np.linalg.norm(kern)


def generate_colored_stationary(
    n_steps: int,
    n_realizations: int,
    total_time: float,
    rng: np.random.Generator,
    settings: NoiseSettings = DEFAULT_SETTINGS,
) -> NoiseRealizations:
    """N2: white Gaussian series circularly convolved with a Gaussian kernel.

    The kernel is normalized to unit l2 norm, so the output has unit
    variance and is stationary by construction.
    """
    white = rng.standard_normal((n_realizations, n_steps))
    kern = _gaussian_kernel(n_steps, settings.kernel_sigma_samples)
    series = np.fft.irfft(
        np.fft.rfft(white, axis=1) * np.fft.rfft(kern)[None, :], n=n_steps, axis=1
    )
    return NoiseRealizations(data=series, tag="N2")


def nonstationary_envelope(n_steps: int, total_time: float) -> np.ndarray:
    """Deterministic modulation 1 + sin(2*pi*t/T) on the midpoint grid."""
    t = (np.arange(n_steps) + 0.5) * (total_time / n_steps)
    return 1.0 + np.sin(2.0 * np.pi * t / total_time)


def generate_colored_nonstationary(
    n_steps: int,
    n_realizations: int,
    total_time: float,
    rng: np.random.Generator,
    settings: NoiseSettings = DEFAULT_SETTINGS,
) -> NoiseRealizations:
    """N3: stationary colored series modulated by the deterministic envelope."""
    base = generate_colored_stationary(
        n_steps, n_realizations, total_time, rng, settings
    )
    env = nonstationary_envelope(n_steps, total_time)
    return NoiseRealizations(data=base.data * env[None, :], tag="N3")


def generate_nongaussian(
    n_steps: int,
    n_realizations: int,
    total_time: float,
    rng: np.random.Generator,
    settings: NoiseSettings = DEFAULT_SETTINGS,
) -> NoiseRealizations:
    """N4: pointwise square of an N3-style series."""
    base = generate_colored_nonstationary(
        n_steps, n_realizations, total_time, rng, settings
    )
    return NoiseRealizations(data=np.square(base.data), tag="N4")


def square_correlated(base: NoiseRealizations) -> NoiseRealizations:
    """N6: exact pointwise square of the base axis, pairing k to k."""
    if base.tag not in ("N1", "N2", "N3", "N4", "N5"):
        raise ValueError(f"N6 must square one of N1..N5, got base {base.tag!r}")
    return NoiseRealizations(data=np.square(base.data), tag="N6")


def make_noise(
    profiles: Sequence[NoiseProfile],
    n_steps: int,
    n_realizations: int,
    total_time: float,
    rng: np.random.Generator,
    settings: NoiseSettings = DEFAULT_SETTINGS,
) -> list[NoiseRealizations]:
    """Realize every axis of a multi-axis noise specification.

    N6 axes square the already-realized base axis (which must appear
    earlier in the list). N1/N5 axes are normalized to unit time-domain
    variance; the per-axis strength multiplier is applied to every
    stochastic profile. Axes are realized in order from a single
    generator, so a fixed seed fixes every axis.
    """
    out: list[NoiseRealizations] = []
    for i, prof in enumerate(profiles):
        if prof.tag == "N0":
            real = NoiseRealizations(
                data=np.zeros((n_realizations, n_steps)), tag="N0"
            )
        elif prof.tag in ("N1", "N5"):
            real = generate_psd_noise(
                prof.tag, n_steps, n_realizations, total_time, rng, settings
            )
            scale = settings.strength / np.sqrt(
                psd_time_variance(prof.tag, n_steps, total_time, settings)
            )
            real.data *= scale
        elif prof.tag == "N2":
            real = generate_colored_stationary(
                n_steps, n_realizations, total_time, rng, settings
            )
            real.data *= settings.strength
        elif prof.tag == "N3":
            real = generate_colored_nonstationary(
                n_steps, n_realizations, total_time, rng, settings
            )
            real.data *= settings.strength
        elif prof.tag == "N4":
            base = generate_colored_nonstationary(
                n_steps, n_realizations, total_time, rng, settings
            )
            real = NoiseRealizations(
                data=np.square(base.data * settings.strength), tag="N4"
            )
        elif prof.tag == "N6":
            if prof.base_axis is None or not 0 <= prof.base_axis < i:
                raise ValueError(
                    f"N6 axis {i} must reference an earlier axis, "
                    f"got base_axis={prof.base_axis}"
                )
            real = square_correlated(out[prof.base_axis])
        else:  # pragma: no cover - guarded by NoiseProfile validation
            raise ValueError(f"unknown profile {prof.tag!r}")
        out.append(real)
    return out


def stack_axes(realizations: Sequence[NoiseRealizations]) -> np.ndarray:
    """Stack per-axis realizations into shape (n_axes, K, M)."""
    if not realizations:
        raise ValueError("no axes to stack")
    return np.stack([r.data for r in realizations])
