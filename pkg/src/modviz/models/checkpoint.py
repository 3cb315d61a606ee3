"""Model checkpoint container.

Layout (little-endian):

    magic "MWTS" | u32 version=1 | u32 manifest_len | manifest UTF-8
    u32 tensor_count, then per tensor:
        u16 name_len | name UTF-8 | u8 ndim | u32 * ndim dims | float32 data

The manifest is ``key: value`` lines with at least ``arch``, ``input_format``,
``n_x``, ``n_y``, ``seed``, and the hyperparameters under ``hyper.``.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from ..autodiff import Tensor
from .network import Network
from .specs import build_spec

MAGIC = b"MWTS"
VERSION = 1


class CheckpointError(ValueError):
    """Malformed checkpoint container."""


def save_checkpoint(net: Network, path: str | Path, extra: dict[str, str] | None = None) -> None:
    spec = net.spec
    entries = {
        "arch": spec.arch,
        "input_format": spec.input_format,
        "n_x": str(spec.n_x),
        "n_y": str(spec.n_y),
        "init": "glorot-uniform/dense-conv, uniform-1/sqrtH lstm, forget-bias+1",
    }
    for key, value in sorted(spec.hyper.items()):
        entries[f"hyper.{key}"] = str(value)
    for key, value in sorted((extra or {}).items()):
        entries[key] = str(value)
    manifest = "".join(f"{k}: {v}\n" for k, v in entries.items()).encode("utf-8")

    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<II", VERSION, len(manifest)))
    buf.write(manifest)
    names = sorted(net.params)
    buf.write(struct.pack("<I", len(names)))
    for name in names:
        data = np.ascontiguousarray(net.params[name].data, dtype="<f4")
        encoded = name.encode("utf-8")
        buf.write(struct.pack("<H", len(encoded)))
        buf.write(encoded)
        buf.write(struct.pack("<B", data.ndim))
        buf.write(struct.pack(f"<{data.ndim}I", *data.shape))
        buf.write(data.tobytes())
    Path(path).write_bytes(buf.getvalue())


def read_manifest(path: str | Path) -> dict[str, str]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise CheckpointError(f"{path}: bad magic {raw[:4]!r}")
    version, manifest_len = struct.unpack_from("<II", raw, 4)
    if version != VERSION:
        raise CheckpointError(f"{path}: version {version}, expected {VERSION}")
    text = raw[12 : 12 + manifest_len].decode("utf-8")
    entries: dict[str, str] = {}
    for line in text.splitlines():
        key, _, value = line.partition(":")
        if key:
            entries[key.strip()] = value.strip()
    return entries


def load_checkpoint(path: str | Path) -> Network:
    raw = Path(path).read_bytes()
    entries = read_manifest(path)
    _, manifest_len = struct.unpack_from("<II", raw, 4)
    offset = 12 + manifest_len
    try:
        (count,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        params: dict[str, Tensor] = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", raw, offset)
            offset += 2
            name = raw[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (ndim,) = struct.unpack_from("<B", raw, offset)
            offset += 1
            shape = struct.unpack_from(f"<{ndim}I", raw, offset)
            offset += 4 * ndim
            size = int(np.prod(shape)) if ndim else 1
            data = np.frombuffer(raw, dtype="<f4", count=size, offset=offset).reshape(shape)
            offset += 4 * size
            params[name] = Tensor(data.copy(), name=name)
    except (struct.error, ValueError) as exc:
        raise CheckpointError(f"{path}: truncated tensor section ({exc})") from None

    hyper = {}
    for key, value in entries.items():
        if key.startswith("hyper."):
            text = value
            hyper[key[6:]] = float(text) if "." in text else int(text)
    spec = build_spec(
        entries["arch"], int(entries["n_x"]), int(entries["n_y"]), entries["input_format"], **hyper
    )
    expected = set(build_spec_param_names(spec))
    if expected != set(params):
        missing = sorted(expected - set(params))
        raise CheckpointError(f"{path}: parameter set mismatch, missing {missing}")
    return Network(spec, params)


def build_spec_param_names(spec) -> list[str]:
    from .specs import init_params

    return list(init_params(spec, seed=0))
