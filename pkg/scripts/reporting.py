#!/usr/bin/env python3
"""
Run artifacts: JSON and CSV payloads, SVG plots and the run manifest.
All files are written atomically (temp file, then replace).
"""

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from config import TOOL_VERSION  # noqa: E402


def _plain(value):
    """Convert numpy values and non-finite floats into JSON-safe Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def to_json(payload) -> str:
    """Deterministic JSON text; floats use repr, which round-trips exactly."""
    return json.dumps(_plain(payload), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def atomic_write(path: Path, data) -> Path:
    """Write text or bytes via a temp file and an atomic replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = path.with_name(path.name + ".tmp")
    if isinstance(data, bytes):
        temp_file.write_bytes(data)
    else:
        temp_file.write_text(data, encoding="utf-8")
    temp_file.replace(path)
    return path


def write_json(path: Path, payload) -> Path:
    return atomic_write(path, to_json(payload))


def format_number(value) -> str:
    """17 significant digits."""
    return f"{float(value):.17g}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return atomic_write(path, buffer.getvalue())


def compute_digest(data: bytes) -> str:
    """64-bit BLAKE2b content hash, hex."""
    return hashlib.blake2b(data, digest_size=8).hexdigest()


@dataclass
class RunManifest:
    """Provenance of one CLI run."""
    subcommand: str
    input_digest: str
    seed: Optional[int]
    tool_version: str
    timestamp: str

    @classmethod
    def for_input(cls, subcommand: str, input_bytes: bytes, seed: Optional[int] = None) -> "RunManifest":
        return cls(
            subcommand=subcommand,
            input_digest=compute_digest(input_bytes),
            seed=seed,
            tool_version=TOOL_VERSION,
            timestamp=datetime.now(timezone.utc).isoformat(),
        )

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "input_digest": self.input_digest,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
        }


def write_trace_svg(path: Path, times, series: dict, title: str = "", xlabel: str = "t", ylabel: str = "probability") -> Path:
    """Line plot, one polyline per series, written as deterministic SVG."""
    with plt.rc_context({"svg.hashsalt": "contextuality", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        try:
            for label, values in series.items():
                ax.plot(times, values, linewidth=1.2, label=label)
            ax.set_xlabel(xlabel)
            ax.set_ylabel(ylabel)
            ax.set_ylim(-0.02, 1.02)
            if title:
                ax.set_title(title)
            ax.legend(loc="upper right", fontsize="small", ncol=2)
            buffer = io.BytesIO()
            fig.savefig(buffer, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return atomic_write(path, buffer.getvalue())
