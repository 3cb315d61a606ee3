"""Binary dataset container and its sidecar manifest.

Layout (little-endian):

    magic "RMLB" | u32 version=1 | u32 sample_count | u32 n_x | u32 channels=2
    then per sample: u16 label | i16 snr_db | u8 split | 3x u8 pad
                     followed by n_x * 2 float32 (I then Q per point)

The sidecar ``<path>.manifest`` is UTF-8 ``key: value`` lines carrying the
label vocabulary, generation seed, and config echo.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .dataset import Dataset

MAGIC = b"RMLB"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")


class ContainerError(ValueError):
    """Malformed dataset container."""


class BadMagicError(ContainerError):
    pass


class VersionMismatchError(ContainerError):
    pass


class TruncatedPayloadError(ContainerError):
    pass


def _record_dtype(n_x: int) -> np.dtype:
    return np.dtype(
        [
            ("label", "<u2"),
            ("snr_db", "<i2"),
            ("split", "u1"),
            ("pad", "u1", (3,)),
            ("iq", "<f4", (n_x, 2)),
        ]
    )


def manifest_path(path: str | Path) -> Path:
    return Path(str(path) + ".manifest")


def write_dataset(ds: Dataset, path: str | Path) -> None:
    """Write the container plus its sidecar manifest; lossless round-trip."""
    path = Path(path)
    records = np.zeros(len(ds), dtype=_record_dtype(ds.n_x))
    records["label"] = ds.labels
    records["snr_db"] = ds.snrs_db
    records["split"] = ds.splits
    records["iq"][:, :, 0] = ds.iq.real
    records["iq"][:, :, 1] = ds.iq.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, len(ds), ds.n_x, 2))
        records.tofile(fh)

    lines = [f"label_names: {','.join(ds.label_names)}", f"sps: {ds.sps}"]
    lines += [f"{key}: {value}" for key, value in sorted(ds.manifest.items())]
    manifest_path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_dataset(path: str | Path) -> Dataset:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise TruncatedPayloadError(f"{path}: file shorter than header")
    magic, version, count, n_x, channels = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise VersionMismatchError(f"{path}: version {version}, expected {VERSION}")
    if channels != 2:
        raise ContainerError(f"{path}: unsupported channel count {channels}")
    dtype = _record_dtype(n_x)
    expected = _HEADER.size + count * dtype.itemsize
    if len(raw) != expected:
        raise TruncatedPayloadError(
            f"{path}: truncated payload, header promises {count} samples "
            f"({expected} bytes), file has {len(raw)}"
        )
    records = np.frombuffer(raw, dtype=dtype, offset=_HEADER.size, count=count)

    label_names, sps, manifest = _read_manifest(path)
    iq = records["iq"][:, :, 0] + 1j * records["iq"][:, :, 1]
    return Dataset(
        iq.astype(np.complex64),
        records["label"],
        records["snr_db"],
        records["split"],
        None,
        label_names,
        sps,
        manifest,
    )


def _read_manifest(path: Path) -> tuple[tuple[str, ...], int, dict[str, str]]:
    from .schemes import CANONICAL_NAMES

    side = manifest_path(path)
    if not side.exists():
        return CANONICAL_NAMES, 8, {}
    entries: dict[str, str] = {}
    for line in side.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(":")
        entries[key.strip()] = value.strip()
    names = tuple(entries.pop("label_names", ",".join(CANONICAL_NAMES)).split(","))
    sps = int(entries.pop("sps", "8"))
    return names, sps, entries
