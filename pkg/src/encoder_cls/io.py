"""CSV/JSON artifacts and the flat key-value run configuration."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParseError
from .speed import SpeedSample

PULSE_HEADER = ["t_seconds"]
WHEEL_HEADER = ["sector", "alpha_true_rad", "theta_rad"]
SPEED_HEADER = ["t_seconds", "sector", "omega_basic", "omega_rev", "omega_filtered"]
ANGLES_HEADER = ["revolution", "sector", "alpha_hat_rad"]
SPECTRUM_HEADER = ["freq_hz", "amplitude"]


def fmt(x) -> str:
    """12 significant digits; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


@dataclass(frozen=True)
class RunConfig:
    L: int = 36
    wheel_radius_m: float = 0.334
    window_revolutions: int = 20
    enable_threshold_kmh: float = 5.0
    resample_rate_hz: float = 100.0
    gear_gain: float = 0.43035

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not v > 0:
                raise ConfigError(f"{f.name} must be positive, got {v!r}")
        if self.L < 2:
            raise ConfigError("L must be at least 2")
        if self.window_revolutions < 1:
            raise ConfigError("window_revolutions must be at least 1")


_INT_KEYS = {"L", "window_revolutions"}


def load_config(path) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror or e}") from e
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = int(val) if key in _INT_KEYS else float(val)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value {val!r} for {key}") from None
    return RunConfig(**values)


def dump_config(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in asdict(cfg).items())


def _read_rows(path, header):
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as e:
        raise ParseError(f"{path}: {e.strerror or e}") from e
    with fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or [c.strip() for c in first] != header:
            raise ParseError(f"{path}:1: expected header {','.join(header)}, got {first!r}")
        for row in reader:
            if row:
                yield reader.line_num, row


def _float(path, lineno, cell, *, optional=False):
    if optional and cell.strip() == "":
        return None
    try:
        v = float(cell)
    except ValueError:
        raise ParseError(f"{path}:{lineno}: not a number: {cell!r}") from None
    if not math.isfinite(v):
        raise ParseError(f"{path}:{lineno}: non-finite value {cell!r}")
    return v


def write_pulses(path, timestamps) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(PULSE_HEADER[0] + "\n")
        fh.writelines(fmt(t) + "\n" for t in timestamps)


def read_pulses(path) -> tuple[np.ndarray, np.ndarray]:
    """Timestamps and their 1-based line numbers."""
    ts, lines = [], []
    for lineno, row in _read_rows(path, PULSE_HEADER):
        if len(row) != 1:
            raise ParseError(f"{path}:{lineno}: expected 1 column, got {len(row)}")
        ts.append(_float(path, lineno, row[0]))
        lines.append(lineno)
    return np.array(ts), np.array(lines)


def write_wheel(path, wheel) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(WHEEL_HEADER)
        for i, (a, th) in enumerate(zip(wheel.sector_angles, wheel.theta)):
            w.writerow([i, fmt(a), fmt(th)])


def read_wheel(path) -> tuple[np.ndarray, np.ndarray]:
    angles, theta = [], []
    for lineno, row in _read_rows(path, WHEEL_HEADER):
        angles.append(_float(path, lineno, row[1]))
        theta.append(_float(path, lineno, row[2]))
    return np.array(angles), np.array(theta)


def write_speed(path, samples) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPEED_HEADER)
        for s in samples:
            w.writerow([fmt(s.t), s.sector, fmt(s.omega_basic), fmt(s.omega_rev), fmt(s.omega_filtered)])


def read_speed(path) -> list[SpeedSample]:
    out = []
    for lineno, row in _read_rows(path, SPEED_HEADER):
        if len(row) != len(SPEED_HEADER):
            raise ParseError(f"{path}:{lineno}: expected {len(SPEED_HEADER)} columns, got {len(row)}")
        try:
            sector = int(row[1])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: bad sector {row[1]!r}") from None
        out.append(SpeedSample(
            t=_float(path, lineno, row[0]),
            sector=sector,
            omega_basic=_float(path, lineno, row[2]),
            omega_rev=_float(path, lineno, row[3], optional=True),
            omega_filtered=_float(path, lineno, row[4], optional=True),
        ))
    return out


def write_angles(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ANGLES_HEADER)
        for rec in records:
            for i, a in enumerate(rec.alpha_hat):
                w.writerow([rec.revolution, i, fmt(a)])


def read_angles(path) -> list[tuple[int, np.ndarray]]:
    """Logged estimates in file order as ``(revolution, alpha_hat)`` blocks."""
    blocks: list[tuple[int, list[float]]] = []
    for lineno, row in _read_rows(path, ANGLES_HEADER):
        rev, sector = int(row[0]), int(row[1])
        if sector == 0:
            blocks.append((rev, []))
        elif not blocks or len(blocks[-1][1]) != sector:
            raise ParseError(f"{path}:{lineno}: sector {sector} out of sequence")
        blocks[-1][1].append(_float(path, lineno, row[2]))
    return [(rev, np.array(vals)) for rev, vals in blocks]


def write_table(path, header, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([fmt(v) for v in row])


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
