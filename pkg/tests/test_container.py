"""Binary container round-trip and corruption handling."""

import struct

import numpy as np
import pytest

from modviz.signals import (
    BadMagicError,
    GenerationConfig,
    TruncatedPayloadError,
    VersionMismatchError,
    generate_dataset,
    read_dataset,
    write_dataset,
)
from modviz.signals.container import manifest_path

CFG = GenerationConfig(schemes=("BPSK", "GFSK"), snrs_db=(12,), per_cell=10, n_x=32)


@pytest.fixture
def dataset():
    return generate_dataset(CFG, seed=42)


def test_roundtrip_bit_identical(dataset, tmp_path):
    path = tmp_path / "ds.rmlb"
    write_dataset(dataset, path)
    loaded = read_dataset(path)
    np.testing.assert_array_equal(loaded.iq, dataset.iq)
    np.testing.assert_array_equal(loaded.labels, dataset.labels)
    np.testing.assert_array_equal(loaded.snrs_db, dataset.snrs_db)
    np.testing.assert_array_equal(loaded.splits, dataset.splits)
    assert loaded.label_names == dataset.label_names
    assert loaded.sps == dataset.sps


def test_same_seed_writes_identical_bytes(tmp_path):
    pa, pb = tmp_path / "a.rmlb", tmp_path / "b.rmlb"
    write_dataset(generate_dataset(CFG, seed=9), pa)
    write_dataset(generate_dataset(CFG, seed=9), pb)
    assert pa.read_bytes() == pb.read_bytes()
    assert manifest_path(pa).read_text() == manifest_path(pb).read_text()


def test_manifest_carries_seed_and_config(dataset, tmp_path):
    path = tmp_path / "ds.rmlb"
    write_dataset(dataset, path)
    text = manifest_path(path).read_text()
    assert "seed: 42" in text
    assert "label_names: " in text
    assert "schemes: BPSK,GFSK" in text


def test_bad_magic(dataset, tmp_path):
    path = tmp_path / "ds.rmlb"
    write_dataset(dataset, path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(raw)
    with pytest.raises(BadMagicError, match="bad magic"):
        read_dataset(path)


def test_version_mismatch(dataset, tmp_path):
    path = tmp_path / "ds.rmlb"
    write_dataset(dataset, path)
    raw = bytearray(path.read_bytes())
    raw[4:8] = struct.pack("<I", 99)
    path.write_bytes(raw)
    with pytest.raises(VersionMismatchError, match="version"):
        read_dataset(path)


def test_truncated_payload(dataset, tmp_path):
    path = tmp_path / "ds.rmlb"
    write_dataset(dataset, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-16])
    with pytest.raises(TruncatedPayloadError, match="truncated"):
        read_dataset(path)


def test_header_count_payload_mismatch(dataset, tmp_path):
    path = tmp_path / "ds.rmlb"
    write_dataset(dataset, path)
    raw = bytearray(path.read_bytes())
    raw[8:12] = struct.pack("<I", len(dataset) + 5)
    path.write_bytes(raw)
    with pytest.raises(TruncatedPayloadError, match="truncated"):
        read_dataset(path)
