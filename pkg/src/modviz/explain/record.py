"""Round-trip parseable text container for explanation results."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gradcam import ClassActivationVector

FORMAT_TAG = "modviz-explanation-v1"


@dataclass(frozen=True)
class ExplanationRecord:
    """One explanation: where it came from and the activation vector."""

    cav: ClassActivationVector
    sample_index: int
    data_path: str = ""
    target_label: str = ""
    model_arch: str = ""
    input_format: str = ""
    extra: dict[str, str] = field(default_factory=dict)


def write_record(record: ExplanationRecord, path: str | Path) -> None:
    cav = record.cav
    lines = [
        f"format: {FORMAT_TAG}",
        f"sample-index: {record.sample_index}",
        f"data-path: {record.data_path}",
        f"method: {cav.method}",
        f"model-arch: {record.model_arch}",
        f"input-format: {record.input_format}",
        f"target-class: {cav.target_class}",
        f"target-label: {record.target_label}",
        f"n-x: {cav.w.size}",
        f"pre-resize-length: {cav.pre_resize_length}",
    ]
    lines += [f"{k}: {v}" for k, v in sorted(record.extra.items())]
    # repr() of Python floats round-trips exactly
    lines.append("w: " + " ".join(repr(float(v)) for v in cav.w))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_record(path: str | Path) -> ExplanationRecord:
    entries: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        key, sep, value = line.partition(":")
        if sep:
            entries[key.strip()] = value.strip()
    if entries.get("format") != FORMAT_TAG:
        raise ValueError(f"{path}: not an explanation record")
    w = np.array([float(v) for v in entries.pop("w").split()])
    n_x = int(entries.pop("n-x"))
    if w.size != n_x:
        raise ValueError(f"{path}: w length {w.size} does not match n-x {n_x}")
    cav = ClassActivationVector(
        w=w,
        target_class=int(entries.pop("target-class")),
        method=entries.pop("method"),
        pre_resize_length=int(entries.pop("pre-resize-length")),
    )
    known = {
        "sample_index": int(entries.pop("sample-index", "-1")),
        "data_path": entries.pop("data-path", ""),
        "target_label": entries.pop("target-label", ""),
        "model_arch": entries.pop("model-arch", ""),
        "input_format": entries.pop("input-format", ""),
    }
    entries.pop("format", None)
    return ExplanationRecord(cav=cav, extra=entries, **known)
