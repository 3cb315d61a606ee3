"""Baseband waveform synthesis for the registered modulation schemes.

Digital pulse shaping is circular (wrap-around) so that exactly
``n_points / sps`` symbols fill the capture window with stationary
inter-symbol interference and exact energy accounting: root-raised-cosine
taps are scaled so that ``sum(h**2) == sps``, which makes the average
waveform power equal the average symbol energy.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import hilbert, lfilter

from .schemes import ANALOG, CPM_DIGITAL, LINEAR_DIGITAL, ModulationScheme, get_scheme

RRC_ROLLOFF = 0.35
RRC_SPAN_SYMBOLS = 8
GFSK_BT = 0.35
GFSK_SPAN_SYMBOLS = 4
CPM_MOD_INDEX = 0.5
FM_DEVIATION = 0.25  # peak frequency deviation, cycles/sample
AM_MOD_INDEX = 0.5
MESSAGE_CUTOFF = 0.05  # single-pole low-pass corner, cycles/sample


class ModulationError(ValueError):
    """Invalid modulate() request (unknown scheme, bad length, short payload)."""


def rrc_taps(sps: int, rolloff: float = RRC_ROLLOFF, span: int = RRC_SPAN_SYMBOLS) -> np.ndarray:
    """Root-raised-cosine impulse response, scaled so sum(h^2) == sps."""
    n_taps = span * sps + 1
    t = (np.arange(n_taps) - (n_taps - 1) / 2.0) / sps
    beta = rolloff
    taps = np.zeros(n_taps)
    center = np.abs(t) < 1e-12
    singular = np.abs(np.abs(t) - 1.0 / (4.0 * beta)) < 1e-12
    regular = ~(center | singular)
    taps[center] = 1.0 + beta * (4.0 / np.pi - 1.0)
    taps[singular] = (beta / np.sqrt(2.0)) * (
        (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * beta))
        + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * beta))
    )
    tr = t[regular]
    taps[regular] = (
        np.sin(np.pi * tr * (1.0 - beta)) + 4.0 * beta * tr * np.cos(np.pi * tr * (1.0 + beta))
    ) / (np.pi * tr * (1.0 - (4.0 * beta * tr) ** 2))
    return taps * np.sqrt(sps / np.sum(taps**2))


def gaussian_taps(sps: int, bt: float = GFSK_BT, span: int = GFSK_SPAN_SYMBOLS) -> np.ndarray:
    """Gaussian smoothing pulse for GFSK, normalized to unit sum."""
    sigma = sps * np.sqrt(np.log(2.0)) / (2.0 * np.pi * bt)
    k = np.arange(-span * sps // 2, span * sps // 2 + 1)
    taps = np.exp(-0.5 * (k / sigma) ** 2)
    return taps / taps.sum()


def circular_filter(x: np.ndarray, taps: np.ndarray, center: int) -> np.ndarray:
    """Circular convolution with the tap at index ``center`` aligned to zero delay."""
    n = len(x)
    kernel = np.zeros(n, dtype=float)
    np.add.at(kernel, (np.arange(len(taps)) - center) % n, taps)
    out = np.fft.ifft(np.fft.fft(x) * np.fft.fft(kernel))
    return out if np.iscomplexobj(x) else out.real


def bits_to_symbols(scheme: ModulationScheme, bits: np.ndarray, n_symbols: int) -> np.ndarray:
    bits = np.asarray(bits).astype(np.int64).ravel()
    needed = n_symbols * scheme.bits_per_symbol
    if len(bits) < needed:
        raise ModulationError(
            f"insufficient payload: {scheme.name} needs {needed} bits for "
            f"{n_symbols} symbols, got {len(bits)}"
        )
    groups = bits[:needed].reshape(n_symbols, scheme.bits_per_symbol)
    weights = 1 << np.arange(scheme.bits_per_symbol - 1, -1, -1)
    return scheme.constellation[groups @ weights]


def modulate(scheme_name: str, payload, n_points: int, sps: int = 8) -> np.ndarray:
    """Synthesize ``n_points`` complex baseband samples for one scheme.

    ``payload`` is a bit sequence for digital schemes or a real message
    signal for analog ones.  Digital schemes require ``n_points`` to be a
    multiple of ``sps``; ``sps == 1`` bypasses pulse shaping.
    """
    scheme = get_scheme_checked(scheme_name)
    if scheme.kind in (LINEAR_DIGITAL, CPM_DIGITAL):
        if n_points % sps != 0:
            raise ModulationError(
                f"n_points={n_points} is not a multiple of sps={sps} for digital scheme {scheme.name}"
            )
        n_symbols = n_points // sps
        if scheme.kind == LINEAR_DIGITAL:
            symbols = bits_to_symbols(scheme, payload, n_symbols)
            if sps == 1:
                return symbols.astype(complex)
            train = np.zeros(n_points, dtype=complex)
            train[::sps] = symbols
            taps = rrc_taps(sps)
            return circular_filter(train, taps, center=len(taps) // 2)
        return _cpm_waveform(scheme, payload, n_symbols, sps)
    return _analog_waveform(scheme, payload, n_points)


def get_scheme_checked(name: str) -> ModulationScheme:
    try:
        return get_scheme(name)
    except ValueError as exc:
        raise ModulationError(str(exc)) from None


def _cpm_waveform(scheme: ModulationScheme, bits, n_symbols: int, sps: int) -> np.ndarray:
    bits = np.asarray(bits).astype(np.int64).ravel()
    if len(bits) < n_symbols:
        raise ModulationError(
            f"insufficient payload: {scheme.name} needs {n_symbols} bits, got {len(bits)}"
        )
    nrz = 1.0 - 2.0 * bits[:n_symbols]
    held = np.repeat(nrz, sps)
    if scheme.name == "GFSK":
        taps = gaussian_taps(sps)
        held = circular_filter(held, taps, center=len(taps) // 2)
    # per-sample phase increment; a full symbol of +1 advances pi*h
    phase = np.cumsum(np.pi * CPM_MOD_INDEX * held / sps)
    return np.exp(1j * phase)


def _analog_waveform(scheme: ModulationScheme, message, n_points: int) -> np.ndarray:
    m = np.asarray(message, dtype=float).ravel()
    if len(m) < n_points:
        raise ModulationError(
            f"insufficient payload: analog scheme {scheme.name} needs {n_points} message samples, got {len(m)}"
        )
    m = m[:n_points]
    peak = np.max(np.abs(m))
    if peak == 0.0:
        raise ModulationError("insufficient payload: analog message is identically zero")
    m = m / peak
    if scheme.name == "WBFM":
        return np.exp(2j * np.pi * FM_DEVIATION * np.cumsum(m))
    if scheme.name == "AM-DSB":
        return (1.0 + AM_MOD_INDEX * m).astype(complex)
    if scheme.name == "AM-SSB":
        analytic = hilbert(m)
        return analytic / np.sqrt(np.mean(np.abs(analytic) ** 2))
    raise ModulationError(f"unknown analog scheme {scheme.name!r}")


def analog_message(n_points: int, rng: np.random.Generator, cutoff: float = MESSAGE_CUTOFF) -> np.ndarray:
    """Band-limited stand-in message: single-pole low-passed white noise.

    A warm-up stretch is generated and discarded so the filter state is
    stationary over the returned samples.
    """
    rho = np.exp(-2.0 * np.pi * cutoff)
    warmup = 256
    white = rng.standard_normal(n_points + warmup)
    shaped = lfilter([1.0 - rho], [1.0, -rho], white)
    return shaped[warmup:]
