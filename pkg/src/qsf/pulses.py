"""Control pulse sampling, time-domain rendering, and signal-chain distortion.

Waveforms live on the midpoint grid t_j = (j + 1/2) * T / M so the
piecewise-constant evolution samples each interval at its center.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal

WAVEFORM_KINDS = ("gaussian", "square")


@dataclass(frozen=True)
class PulseConfig:
    """Shared pulse-train parameters.

    sigma defaults to total_time / (12 * n_steps); square pulses use a
    fixed width of 6*sigma. Amplitudes are drawn uniformly from
    [amp_min, amp_max].
    """

    waveform: str = "gaussian"
    n_pulses: int = 5
    amp_min: float = -100.0
    amp_max: float = 100.0
    total_time: float = 1.0
    n_steps: int = 1024
    sigma: Optional[float] = None

    @property
    def resolved_sigma(self) -> float:
        if self.sigma is not None:
            return self.sigma
        return self.total_time / (12.0 * self.n_steps)

    @property
    def dt(self) -> float:
        return self.total_time / self.n_steps

    def times(self) -> np.ndarray:
        """Midpoint sample times, shape (n_steps,)."""
        return (np.arange(self.n_steps) + 0.5) * self.dt

    def validate(self) -> None:
        if self.waveform not in WAVEFORM_KINDS:
            raise ValueError(f"waveform must be one of {WAVEFORM_KINDS}")
        if not self.amp_min < self.amp_max:
            raise ValueError("amp_min must be < amp_max")
        if self.n_steps < 1 or self.n_pulses < 0:
            raise ValueError("n_steps must be >= 1 and n_pulses >= 0")
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")
        width = 6.0 * self.resolved_sigma
        if self.n_pulses * width > self.total_time + 1e-12:
            raise ValueError(
                f"{self.n_pulses} pulses of width {width:g} do not fit in "
                f"total_time {self.total_time:g}"
            )


def draw_pulse_params(
    rng: np.random.Generator, cfg: PulseConfig, channels: int
) -> np.ndarray:
    """Random per-channel pulse parameters, shape (channels, n_pulses, 3).

    Rows are (amplitude, center, width) for gaussian trains and
    (amplitude, bin index, width) for square trains. Gaussian centers are
    drawn uniformly inside equal bins shrunk by a 3*sigma margin on each
    side, which makes the no-overlap guarantee (gaps >= 6*sigma)
    constructive; square pulses sit at bin centers.
    """
    cfg.validate()
    n = cfg.n_pulses
    sig = cfg.resolved_sigma
    out = np.zeros((channels, n, 3), dtype=np.float64)
    if n == 0:
        return out
    bin_width = cfg.total_time / n
    margin = 3.0 * sig
    if bin_width < 2.0 * margin - 1e-15:
        raise ValueError("pulse bins are too narrow to hold a pulse")
    for c in range(channels):
        amps = rng.uniform(cfg.amp_min, cfg.amp_max, size=n)
        if cfg.waveform == "gaussian":
            lo = np.arange(n) * bin_width + margin
            hi = (np.arange(n) + 1) * bin_width - margin
            centers = rng.uniform(lo, hi)
            out[c, :, 0] = amps
            out[c, :, 1] = centers
            out[c, :, 2] = sig
        else:
            out[c, :, 0] = amps
            out[c, :, 1] = np.arange(n, dtype=np.float64)
            out[c, :, 2] = 6.0 * sig
    return out


def render_waveform(params: np.ndarray, cfg: PulseConfig) -> np.ndarray:
    """Time-domain waveforms on the midpoint grid, shape (n_steps, channels).

    Gaussian trains evaluate sum_k A_k exp(-(t - mu_k)^2 / (2 sigma_k^2))
    pointwise. Square trains place A_k on round(width/dt) consecutive
    samples centered on the pulse's bin center.
    """
    cfg.validate()
    if params.ndim != 3 or params.shape[2] != 3:
        raise ValueError("params must have shape (channels, n_pulses, 3)")
    channels = params.shape[0]
    t = cfg.times()
    out = np.zeros((cfg.n_steps, channels), dtype=np.float64)
    if params.shape[1] == 0:
        return out
    if cfg.waveform == "gaussian":
        for c in range(channels):
            amps = params[c, :, 0]
            mus = params[c, :, 1]
            sigs = params[c, :, 2]
            gaussians = np.exp(-((t[:, None] - mus[None, :]) ** 2) / (2.0 * sigs**2))
            out[:, c] = gaussians @ amps
    else:
        bin_width = cfg.total_time / params.shape[1]
        for c in range(channels):
            for amp, pos, width in params[c]:
                center = (pos + 0.5) * bin_width
                n_samp = int(round(width / cfg.dt))
                if n_samp <= 0:
                    continue
                j_center = int(np.argmin(np.abs(t - center)))
                start = max(0, j_center - n_samp // 2)
                stop = min(cfg.n_steps, start + n_samp)
                out[start:stop, c] = amp
    return out


@dataclass(frozen=True)
class FilterSettings:
    """Design knobs for the control-line distortion filter.

    Chebyshev type-I low-pass; cutoff_frac is a fraction of Nyquist.
    One record so experiments can override every number at once.
    """

    order: int = 4
    ripple_db: float = 0.1
    cutoff_frac: float = 0.05

    def as_dict(self) -> dict:
        return {
            "kind": "chebyshev1",
            "order": self.order,
            "ripple_db": self.ripple_db,
            "cutoff_frac": self.cutoff_frac,
        }


@dataclass(frozen=True)
class DistortionFilter:
    """Stable second-order sections plus the design metadata."""

    sos: np.ndarray
    settings: FilterSettings

    def poles(self) -> np.ndarray:
        return np.concatenate(
            [np.roots(np.concatenate(([1.0], sec[4:6]))) for sec in self.sos]
        )

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def dc_gain(self) -> float:
        gain = 1.0
        for b0, b1, b2, _one, a1, a2 in self.sos:
            gain *= (b0 + b1 + b2) / (1.0 + a1 + a2)
        return float(gain)


def design_chebyshev(
    order: int = 4, ripple_db: float = 0.1, cutoff_frac: float = 0.05
) -> DistortionFilter:
    """Chebyshev type-I low-pass as stable second-order sections.

    The analog prototype is discretized by the bilinear transform with
    frequency prewarping at the cutoff (scipy's digital design path).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if not 0.0 < cutoff_frac < 1.0:
        raise ValueError("cutoff_frac must lie in (0, 1) of Nyquist")
    sos = signal.cheby1(order, ripple_db, cutoff_frac, btype="low", output="sos")
    filt = DistortionFilter(
        sos=np.asarray(sos, dtype=np.float64),
        settings=FilterSettings(order, ripple_db, cutoff_frac),
    )
    if not filt.is_stable():
        raise RuntimeError("designed filter is unstable; invalid parameters")
    return filt


def design_from_settings(settings: FilterSettings) -> DistortionFilter:
    return design_chebyshev(settings.order, settings.ripple_db, settings.cutoff_frac)


def apply_distortion(filt: DistortionFilter, waveform: np.ndarray) -> np.ndarray:
    """Causal filtering with zero initial conditions; preserves length.

    Accepts (n_steps,) or (n_steps, channels).
    """
    if not filt.is_stable():
        raise ValueError("refusing to filter with an unstable design")
    return signal.sosfilt(filt.sos, waveform, axis=0)
