"""Dataset generation: labeled, SNR-swept modulated captures.

Every sample is produced from its own RNG substream keyed by
``(seed, purpose, label, snr, index)``, so generation order is irrelevant
and regeneration of any single sample is possible from the tag alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, apply_channel
from .schemes import ANALOG, CANONICAL_NAMES, get_scheme
from .waveforms import analog_message, modulate

SPLIT_NAMES = ("train", "val", "test")
_SNR_OFFSET = 1 << 15  # keep substream keys non-negative for any int16 SNR

_STREAM_PAYLOAD = 1
_STREAM_CHANNEL = 2
_STREAM_SPLIT = 3


@dataclass(frozen=True)
class RadioSample:
    """One baseband capture with its label, SNR, and reproduction tag."""

    iq: np.ndarray
    label: int
    snr_db: int
    seed_tag: int


@dataclass(frozen=True)
class GenerationConfig:
    schemes: tuple[str, ...] = CANONICAL_NAMES
    snrs_db: tuple[int, ...] = tuple(range(0, 20, 2))
    per_cell: int = 1000
    n_x: int = 128
    sps: int = 8
    split_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    cfo_max: float = 0.001

    def validate(self) -> None:
        if not self.schemes:
            raise ValueError("config lists no schemes")
        for name in self.schemes:
            get_scheme(name)  # raises on unknown names
        if len(set(self.schemes)) != len(self.schemes):
            raise ValueError("duplicate scheme in config")
        if not self.snrs_db:
            raise ValueError("invalid grid: no SNR values")
        if self.per_cell <= 0:
            raise ValueError(f"per-cell count must be positive, got {self.per_cell}")
        if self.n_x <= 0:
            raise ValueError(f"n_x must be positive, got {self.n_x}")
        if abs(sum(self.split_ratios) - 1.0) > 1e-9 or min(self.split_ratios) < 0:
            raise ValueError(f"split ratios must be nonnegative and sum to 1: {self.split_ratios}")
        digital = [n for n in self.schemes if get_scheme(n).kind != ANALOG]
        if digital and self.n_x % self.sps != 0:
            raise ValueError(f"n_x={self.n_x} not divisible by sps={self.sps}")

    @property
    def total_samples(self) -> int:
        return len(self.schemes) * len(self.snrs_db) * self.per_cell


class Dataset:
    """Ordered sample collection with the full 11-name label vocabulary.

    Stored struct-of-arrays: ``iq`` is (N, n_x) complex64 (float32 I/Q
    pairs), labels index :data:`CANONICAL_NAMES`, splits use
    :data:`SPLIT_NAMES` codes.
    """

    def __init__(
        self,
        iq: np.ndarray,
        labels: np.ndarray,
        snrs_db: np.ndarray,
        splits: np.ndarray,
        seed_tags: np.ndarray | None = None,
        label_names: tuple[str, ...] = CANONICAL_NAMES,
        sps: int = 8,
        manifest: dict[str, str] | None = None,
    ):
        self.iq = np.ascontiguousarray(iq, dtype=np.complex64)
        self.labels = np.ascontiguousarray(labels, dtype=np.uint16)
        self.snrs_db = np.ascontiguousarray(snrs_db, dtype=np.int16)
        self.splits = np.ascontiguousarray(splits, dtype=np.uint8)
        n = len(self.iq)
        if seed_tags is None:
            seed_tags = np.zeros(n, dtype=np.uint64)
        self.seed_tags = np.ascontiguousarray(seed_tags, dtype=np.uint64)
        self.label_names = tuple(label_names)
        self.sps = int(sps)
        self.manifest = dict(manifest or {})
        if not (len(self.labels) == len(self.snrs_db) == len(self.splits) == len(self.seed_tags) == n):
            raise ValueError("dataset arrays disagree on sample count")

    def __len__(self) -> int:
        return len(self.iq)

    @property
    def n_x(self) -> int:
        return self.iq.shape[1]

    @property
    def n_y(self) -> int:
        return len(self.label_names)

    def sample(self, index: int) -> RadioSample:
        return RadioSample(
            iq=self.iq[index],
            label=int(self.labels[index]),
            snr_db=int(self.snrs_db[index]),
            seed_tag=int(self.seed_tags[index]),
        )

    def indices(self, split: str | None = None) -> np.ndarray:
        if split is None:
            return np.arange(len(self))
        code = SPLIT_NAMES.index(split)
        return np.flatnonzero(self.splits == code)

    def cell_counts(self) -> dict[tuple[int, int], int]:
        counts: dict[tuple[int, int], int] = {}
        for label, snr in zip(self.labels, self.snrs_db):
            counts[(int(label), int(snr))] = counts.get((int(label), int(snr)), 0) + 1
        return counts


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(key))


def _seed_tag(seed: int, label: int, snr_key: int, index: int) -> np.uint64:
    ss = np.random.SeedSequence((seed, _STREAM_PAYLOAD, label, snr_key, index))
    return ss.generate_state(1, np.uint64)[0]


def _split_quotas(count: int, ratios: tuple[float, float, float]) -> list[int]:
    """Largest-remainder apportionment of ``count`` over the three splits."""
    raw = [count * r for r in ratios]
    base = [int(q) for q in raw]
    short = count - sum(base)
    order = sorted(range(3), key=lambda i: (-(raw[i] - base[i]), i))
    for i in order[:short]:
        base[i] += 1
    return base


def synthesize_sample(
    scheme_name: str, snr_db: int, seed: int, index: int, cfg: GenerationConfig
) -> np.ndarray:
    """Generate one unit-power noisy capture from its substream key."""
    scheme = get_scheme(scheme_name)
    label = scheme.label
    snr_key = snr_db + _SNR_OFFSET
    payload_rng = _rng(seed, _STREAM_PAYLOAD, label, snr_key, index)
    if scheme.kind == ANALOG:
        payload = analog_message(cfg.n_x, payload_rng)
    else:
        n_symbols = cfg.n_x // cfg.sps
        payload = payload_rng.integers(0, 2, size=n_symbols * max(scheme.bits_per_symbol, 1))
    clean = modulate(scheme_name, payload, cfg.n_x, cfg.sps)
    clean = clean / np.sqrt(np.mean(np.abs(clean) ** 2))

    channel_rng = _rng(seed, _STREAM_CHANNEL, label, snr_key, index)
    channel = ChannelConfig(
        snr_db=snr_db,
        cfo_norm=float(channel_rng.uniform(-cfg.cfo_max, cfg.cfo_max)),
        phase0=float(channel_rng.uniform(-np.pi, np.pi)),
    )
    return apply_channel(clean, channel, channel_rng)


def generate_dataset(cfg: GenerationConfig, seed: int) -> Dataset:
    """Deterministically synthesize the configured (scheme x SNR) grid.

    Rows are ordered by label index, then SNR, then in-cell index,
    independent of the order schemes appear in the config.
    """
    cfg.validate()
    if seed < 0:
        raise ValueError("seed must be a nonnegative 64-bit integer")
    total = cfg.total_samples
    iq = np.empty((total, cfg.n_x), dtype=np.complex64)
    labels = np.empty(total, dtype=np.uint16)
    snrs = np.empty(total, dtype=np.int16)
    splits = np.empty(total, dtype=np.uint8)
    tags = np.empty(total, dtype=np.uint64)

    ordered = sorted(cfg.schemes, key=lambda n: get_scheme(n).label)
    row = 0
    for name in ordered:
        label = get_scheme(name).label
        for snr in sorted(cfg.snrs_db):
            snr_key = snr + _SNR_OFFSET
            cell_splits = _assign_cell_splits(seed, label, snr_key, cfg)
            for index in range(cfg.per_cell):
                iq[row] = synthesize_sample(name, snr, seed, index, cfg)
                labels[row] = label
                snrs[row] = snr
                splits[row] = cell_splits[index]
                tags[row] = _seed_tag(seed, label, snr_key, index)
                row += 1

    manifest = {
        "seed": str(seed),
        "schemes": ",".join(ordered),
        "snrs_db": ",".join(str(s) for s in sorted(cfg.snrs_db)),
        "per_cell": str(cfg.per_cell),
        "n_x": str(cfg.n_x),
        "sps": str(cfg.sps),
        "split_ratios": ",".join(str(r) for r in cfg.split_ratios),
        "cfo_max": str(cfg.cfo_max),
    }
    return Dataset(iq, labels, snrs, splits, tags, CANONICAL_NAMES, cfg.sps, manifest)


def _assign_cell_splits(seed: int, label: int, snr_key: int, cfg: GenerationConfig) -> np.ndarray:
    quotas = _split_quotas(cfg.per_cell, cfg.split_ratios)
    codes = np.repeat(np.arange(3, dtype=np.uint8), quotas)
    perm = _rng(seed, _STREAM_SPLIT, label, snr_key).permutation(cfg.per_cell)
    out = np.empty(cfg.per_cell, dtype=np.uint8)
    out[perm] = codes
    return out


def split_samples(ds: Dataset, factor: int = 2) -> Dataset:
    """Cut every capture into ``factor`` shorter ones inheriting label and SNR.

    Sample ``k`` becomes rows ``factor*k .. factor*k + factor - 1`` holding
    its consecutive segments, so concatenating the children restores the
    parent exactly.
    """
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    if ds.n_x % factor != 0:
        raise ValueError(f"n_x={ds.n_x} not divisible by factor={factor}")
    short = ds.n_x // factor
    iq = ds.iq.reshape(len(ds) * factor, short)
    manifest = dict(ds.manifest)
    manifest["split_factor"] = str(factor)
    manifest["n_x"] = str(short)
    return Dataset(
        iq,
        np.repeat(ds.labels, factor),
        np.repeat(ds.snrs_db, factor),
        np.repeat(ds.splits, factor),
        np.repeat(ds.seed_tags, factor),
        ds.label_names,
        ds.sps,
        manifest,
    )
