"""Modulation scheme registry.

Eleven schemes: eight digital (six linear plus two continuous-phase) and
three analog.  Label indices follow the fixed alphabetical order of the
canonical names so that datasets, checkpoints, and confusion matrices agree
on the vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LINEAR_DIGITAL = "linear-digital"
CPM_DIGITAL = "continuous-phase-digital"
ANALOG = "analog"

#: Canonical names in label-index order (alphabetical).
CANONICAL_NAMES = (
    "8PSK",
    "AM-DSB",
    "AM-SSB",
    "BPSK",
    "CPFSK",
    "GFSK",
    "PAM4",
    "QAM16",
    "QAM64",
    "QPSK",
    "WBFM",
)


@dataclass(frozen=True)
class ModulationScheme:
    """One modulation category.

    ``constellation`` maps the integer value of a ``bits_per_symbol``-wide
    bit group to a complex point; Gray coding is baked into the ordering.
    Linear-digital constellations have unit average energy.
    """

    name: str
    kind: str
    bits_per_symbol: int = 0
    constellation: np.ndarray | None = None

    @property
    def label(self) -> int:
        return CANONICAL_NAMES.index(self.name)


def _gray_pam_levels(bits: int) -> np.ndarray:
    """Amplitude levels indexed by bit-group value, Gray-coded, unnormalized.

    Level rank k carries the bit pattern gray(k), so adjacent amplitudes
    differ in exactly one bit.
    """
    m = 1 << bits
    levels = np.arange(m) * 2.0 - (m - 1)
    out = np.zeros(m)
    for rank in range(m):
        out[rank ^ (rank >> 1)] = levels[rank]  # rank ^ (rank >> 1) is gray(rank)
    return out


def _psk_constellation(bits: int) -> np.ndarray:
    m = 1 << bits
    points = np.zeros(m, dtype=complex)
    for rank in range(m):
        gray = rank ^ (rank >> 1)
        points[gray] = np.exp(2j * np.pi * rank / m)
    return points


def _qam_constellation(bits_per_rail: int) -> np.ndarray:
    rail = _gray_pam_levels(bits_per_rail)
    m = 1 << (2 * bits_per_rail)
    points = np.zeros(m, dtype=complex)
    for value in range(m):
        i_bits = value >> bits_per_rail
        q_bits = value & ((1 << bits_per_rail) - 1)
        points[value] = rail[i_bits] + 1j * rail[q_bits]
    scale = np.sqrt(np.mean(np.abs(points) ** 2))
    return points / scale


def _normalized(points: np.ndarray) -> np.ndarray:
    return points / np.sqrt(np.mean(np.abs(points) ** 2))


def _build_registry() -> dict[str, ModulationScheme]:
    bpsk = np.array([1.0 + 0j, -1.0 + 0j])
    qpsk = _normalized(np.array([(1 - 2 * (v >> 1)) + 1j * (1 - 2 * (v & 1)) for v in range(4)], dtype=complex))
    schemes = [
        ModulationScheme("BPSK", LINEAR_DIGITAL, 1, bpsk),
        ModulationScheme("QPSK", LINEAR_DIGITAL, 2, qpsk),
        ModulationScheme("8PSK", LINEAR_DIGITAL, 3, _psk_constellation(3)),
        ModulationScheme("PAM4", LINEAR_DIGITAL, 2, _normalized(_gray_pam_levels(2).astype(complex))),
        ModulationScheme("QAM16", LINEAR_DIGITAL, 4, _qam_constellation(2)),
        ModulationScheme("QAM64", LINEAR_DIGITAL, 6, _qam_constellation(3)),
        ModulationScheme("GFSK", CPM_DIGITAL, 1),
        ModulationScheme("CPFSK", CPM_DIGITAL, 1),
        ModulationScheme("WBFM", ANALOG),
        ModulationScheme("AM-SSB", ANALOG),
        ModulationScheme("AM-DSB", ANALOG),
    ]
    registry = {s.name: s for s in schemes}
    assert set(registry) == set(CANONICAL_NAMES)
    for s in registry.values():
        if s.kind == LINEAR_DIGITAL:
            energy = float(np.mean(np.abs(s.constellation) ** 2))
            assert abs(energy - 1.0) < 1e-9, f"{s.name} constellation energy {energy}"
    return registry


SCHEMES: dict[str, ModulationScheme] = _build_registry()


def get_scheme(name: str) -> ModulationScheme:
    try:
        return SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown modulation scheme {name!r}") from None
