"""Channel impairments and the amplitude/phase transform."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_CFO_NORM = 0.01


@dataclass(frozen=True)
class ChannelConfig:
    """AWGN level plus carrier frequency/phase offset for one sample."""

    snr_db: int
    cfo_norm: float = 0.0  # carrier frequency offset, cycles/sample
    phase0: float = 0.0  # initial carrier phase, radians

    def __post_init__(self):
        if abs(self.cfo_norm) > MAX_CFO_NORM:
            raise ValueError(f"|cfo_norm| must be <= {MAX_CFO_NORM}, got {self.cfo_norm}")


def apply_channel(
    clean: np.ndarray, cfg: ChannelConfig, rng: np.random.Generator | None
) -> np.ndarray:
    """Rotate by the carrier offset and add circular AWGN at the target SNR.

    Noise power is measured against the actual input power, so the realized
    SNR is exact in expectation.  ``rng=None`` disables the noise term.
    """
    clean = np.asarray(clean)
    power = float(np.mean(np.abs(clean) ** 2))
    if power <= 0.0:
        raise ValueError("apply_channel requires a nonzero-power input")
    n = len(clean)
    rotation = np.exp(1j * (2.0 * np.pi * cfg.cfo_norm * np.arange(n) + cfg.phase0))
    out = clean * rotation
    if rng is not None:
        sigma = np.sqrt(power / (10.0 ** (cfg.snr_db / 10.0)) / 2.0)
        out = out + sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return out


def to_amplitude_phase(iq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-point amplitude and four-quadrant phase of complex samples.

    Amplitude is nonnegative; phase lies in (-pi, pi] with (0, 0) mapped to
    (0, 0) by convention.
    """
    iq = np.asarray(iq)
    amplitude = np.abs(iq)
    phase = np.arctan2(iq.imag, iq.real)
    phase = np.where(phase == -np.pi, np.pi, phase)
    return amplitude, phase
