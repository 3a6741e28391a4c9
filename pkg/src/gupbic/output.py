"""Deterministic CSV/JSON artifacts and run manifests.

CSV formatting is pinned for byte-identical reruns: scientific notation with
17 significant digits, '.' decimal separator, '\\n' line endings, exact header
row.  Files are written atomically (temp + rename).
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

TOOL_VERSION = "0.1.0"


def fmt_float(x: float) -> str:
    return f"{x:.16e}"


def _fmt_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return fmt_float(value)
    return str(value)


def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    with open(tmp, "w", newline="") as handle:
        handle.write(data)
    os.replace(tmp, path)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines.extend(",".join(_fmt_cell(cell) for cell in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def write_json(path: str | Path, payload) -> Path:
    path = Path(path)
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def config_digest(config_path: str | Path | None, fallback: str = "") -> str:
    """Content hash of the config file, or of the canonical parameter string."""
    if config_path is not None:
        return sha256_hex(Path(config_path).read_bytes())
    return sha256_hex(fallback.encode())


def dump_basis_csv(path: str | Path, basis_function, xs: Sequence[float]) -> Path:
    """Debug dump of one basis function: x, re, im, d1, d2, d3 (real parts)."""
    rows = []
    for x in xs:
        d = basis_function.derivatives(float(x), order=3)
        rows.append((float(x), d[0].real, d[0].imag, d[1].real, d[2].real, d[3].real))
    return write_csv(path, ["x", "re", "im", "d1", "d2", "d3"], rows)


def dump_trajectory_csv(path: str | Path, trajectory, xs: Sequence[float] | None = None) -> Path:
    """Debug dump of an integrated trajectory: x plus re/im of all components."""
    if xs is None:
        xs = trajectory.grid
    rows = []
    for x in xs:
        state = trajectory.state_at(float(x))
        row = [float(x)]
        for component in state:
            row.extend((component.real, component.imag))
        rows.append(tuple(row))
    n = (len(rows[0]) - 1) // 2
    header = ["x"]
    names = ["phi", "d1", "d2", "d3"]
    for k in range(n):
        name = names[k] if k < len(names) else f"d{k}"
        header.extend((f"re_{name}", f"im_{name}"))
    return write_csv(path, header, rows)


@dataclass
class RunManifest:
    command: str
    config_digest: str
    tool_version: str = TOOL_VERSION
    outputs: list[str] = field(default_factory=list)
    wall_time_s: float = 0.0
    argv: list[str] = field(default_factory=list)
    _t0: float = field(default_factory=time.monotonic, repr=False)

    def add_output(self, path: Path) -> None:
        self.outputs.append(str(path))

    def write(self, out_dir: str | Path) -> Path:
        self.wall_time_s = time.monotonic() - self._t0
        payload = {
            "command": self.command,
            "config_digest": self.config_digest,
            "tool_version": self.tool_version,
            "outputs": sorted(self.outputs),
            "wall_time_s": self.wall_time_s,
            "argv": self.argv,
        }
        return write_json(Path(out_dir) / "manifest.json", payload)
