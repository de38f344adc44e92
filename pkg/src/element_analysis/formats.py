"""Readers and writers for series, scalograms and events.

Formats
-------
series CSV
    header row, then ``date,value`` (ISO-8601 date) or ``t,value``.
scalogram CSV
    first row ``period`` followed by one timestamp per column; each further
    row is a scale period (time units) followed by ``|W|`` values.
scalogram PGM
    binary P5, one row per scale with row 0 the finest. Pixels map
    ``log10|W|`` linearly from ``max - decades`` (0) to ``max`` (255).
events
    JSON lines or CSV with the columns in :data:`EVENT_FIELDS`.
All floats are written with 9 significant digits.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .cwt import Scalogram, ScaleGrid, TimeSeries
from .detection import ElementEvent
from .morse import MorseParams
from .preprocess import RawSeries

MISSING_MARKERS = ("", ".", "NA", "N/A", "NaN", "nan", "null")
EVENT_FIELDS = (
    "t_iso", "t_sample", "c_abs", "c_phase_rad", "rho_samples", "period", "omega_rho", "significance", "overlap_flag",
)
PGM_DECADES = 4.0


class CsvParseError(ValueError):
    pass


def fmt(x: float) -> str:
    return f"{x:.9g}"


def _parse_date(text: str) -> _dt.datetime:
    text = text.strip()
    try:
        return _dt.datetime.fromisoformat(text)
    except ValueError:
        return _dt.datetime.fromisoformat(text.replace("Z", "+00:00"))


def read_csv(path, date_column: str | None = None, value_column: str | None = None,
             missing_markers=MISSING_MARKERS) -> RawSeries:
    """Dated observations from a CSV with a header row.

    Columns default to the first (dates) and second (values). Rows whose
    value is a missing marker are dropped and counted in ``RawSeries.dropped``.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvParseError(f"{path}: empty file") from None
        try:
            di = header.index(date_column) if date_column else 0
            vi = header.index(value_column) if value_column else 1
        except ValueError:
            raise CsvParseError(f"{path}: columns {date_column!r}/{value_column!r} not in header {header}") from None
        if max(di, vi) >= len(header):
            raise CsvParseError(f"{path}: header needs at least two columns, got {header}")
        stamps, values, dropped = [], [], 0
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) <= max(di, vi):
                raise CsvParseError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            raw_value = row[vi].strip()
            if raw_value in missing_markers:
                dropped += 1
                continue
            try:
                stamp = _parse_date(row[di])
            except ValueError:
                raise CsvParseError(f"{path}:{line}: cannot parse date {row[di]!r}") from None
            try:
                value = float(raw_value)
            except ValueError:
                raise CsvParseError(f"{path}:{line}: cannot parse value {raw_value!r}") from None
            if not math.isfinite(value):
                raise CsvParseError(f"{path}:{line}: non-finite value {raw_value!r}")
            stamps.append(stamp)
            values.append(value)
    if not values:
        raise CsvParseError(f"{path}: no observations")
    return RawSeries(tuple(stamps), np.array(values), dropped)


def _time_labels(n: int, dt: float, t0: float, epoch) -> list[str]:
    times = t0 + dt * np.arange(n)
    if epoch is None:
        return [fmt(t) for t in times]
    return [(epoch + _dt.timedelta(days=float(t))).isoformat() for t in times]


def write_series_csv(path, series: TimeSeries, columns: dict[str, np.ndarray] | None = None) -> None:
    columns = columns or {"value": series.values}
    labels = _time_labels(len(series), series.dt, series.t0, series.epoch)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date" if series.epoch is not None else "t", *columns])
        for j, label in enumerate(labels):
            w.writerow([label, *(fmt(col[j]) for col in columns.values())])


def write_scalogram_csv(path, sc: Scalogram) -> None:
    labels = _time_labels(sc.n, sc.dt, sc.t0, sc.epoch)
    periods = sc.grid.periods * sc.dt
    modulus = sc.modulus
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period", *labels])
        for k in range(len(periods)):
            w.writerow([fmt(periods[k]), *(fmt(v) for v in modulus[k])])


def read_scalogram_csv(path) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Timestamps, periods and modulus matrix of a scalogram CSV."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    labels = rows[0][1:]
    periods = np.array([float(r[0]) for r in rows[1:]])
    modulus = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return labels, periods, modulus


def pgm_bytes(modulus: np.ndarray, decades: float = PGM_DECADES, comment: str | None = None) -> bytes:
    modulus = np.asarray(modulus, dtype=float)
    with np.errstate(divide="ignore"):
        level = np.log10(modulus)
    finite = np.isfinite(level)
    top = level[finite].max() if finite.any() else 0.0
    scaled = np.where(finite, (level - (top - decades)) / decades, 0.0)
    pixels = np.round(255 * np.clip(scaled, 0, 1)).astype(np.uint8)
    head = "P5\n"
    if comment:
        head += "".join(f"# {line}\n" for line in comment.splitlines())
    head += f"{pixels.shape[1]} {pixels.shape[0]}\n255\n"
    return head.encode() + pixels.tobytes()


def write_pgm(path, sc: Scalogram, decades: float = PGM_DECADES, comment: str | None = None) -> None:
    Path(path).write_bytes(pgm_bytes(sc.modulus, decades, comment))


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end].decode())
        pos = end
    if tokens[0] != "P5":
        raise ValueError(f"{path}: not a binary PGM")
    width, height = int(tokens[1]), int(tokens[2])
    pixels = np.frombuffer(data[pos + 1:pos + 1 + width * height], dtype=np.uint8)
    return pixels.reshape(height, width)


def _json_float(x: float):
    return float(fmt(x)) if math.isfinite(x) else None


def event_record(e: ElementEvent) -> dict:
    return {
        "t_iso": e.t_iso,
        "t_sample": _json_float(e.t_sample),
        "c_abs": _json_float(e.c_abs),
        "c_phase_rad": _json_float(e.c_phase),
        "rho_samples": _json_float(e.rho),
        "period": _json_float(e.period),
        "omega_rho": _json_float(e.omega_rho),
        "significance": _json_float(e.significance),
        "overlap_flag": bool(e.overlap_flag),
    }


def write_events_jsonl(path, events: list[ElementEvent]) -> None:
    with Path(path).open("w") as fh:
        for e in events:
            fh.write(json.dumps(event_record(e)) + "\n")


def write_events_csv(path, events: list[ElementEvent]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_FIELDS)
        for e in events:
            rec = event_record(e)
            w.writerow(["" if rec[k] is None else (fmt(rec[k]) if isinstance(rec[k], float) else rec[k])
                        for k in EVENT_FIELDS])


def _event_from_record(rec: dict, dt: float = 1.0) -> ElementEvent:
    def num(key, default=None):
        v = rec.get(key)
        if v in (None, ""):
            return default
        return float(v)

    flag = rec.get("overlap_flag", False)
    if isinstance(flag, str):
        flag = flag.strip().lower() == "true"
    t_sample = num("t_sample")
    return ElementEvent(
        t_sample=t_sample,
        c_abs=num("c_abs"),
        c_phase=num("c_phase_rad", 0.0),
        rho=num("rho_samples"),
        omega_rho=num("omega_rho"),
        period=num("period"),
        t=t_sample * dt,
        t_iso=rec.get("t_iso") or None,
        significance=num("significance", math.inf),
        overlap_flag=bool(flag),
    )


def read_events(path, dt: float = 1.0) -> list[ElementEvent]:
    """Events from a ``.jsonl`` or ``.csv`` file written by this package."""
    path = Path(path)
    if path.suffix == ".csv":
        with path.open(newline="") as fh:
            return [_event_from_record(r, dt) for r in csv.DictReader(fh)]
    with path.open() as fh:
        return [_event_from_record(json.loads(line), dt) for line in fh if line.strip()]


def save_scalogram(path, sc: Scalogram) -> None:
    """Lossless complex scalogram for passing between pipeline stages."""
    np.savez_compressed(
        path,
        coeffs=sc.coeffs,
        valid=sc.valid,
        scales=sc.grid.scales,
        voxels_per_octave=sc.grid.voxels_per_octave,
        beta=sc.params.beta,
        gamma=sc.params.gamma,
        dt=sc.dt,
        t0=sc.t0,
        epoch="" if sc.epoch is None else sc.epoch.isoformat(),
    )


def load_scalogram(path) -> Scalogram:
    with np.load(path) as z:
        params = MorseParams(float(z["beta"]), float(z["gamma"]))
        grid = ScaleGrid(z["scales"], int(z["voxels_per_octave"]), params)
        epoch = str(z["epoch"])
        return Scalogram(
            z["coeffs"], grid, params, float(z["dt"]), float(z["t0"]),
            _dt.datetime.fromisoformat(epoch) if epoch else None, z["valid"],
        )


def sha256(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, names: list[str], config_json: str) -> dict:
    out_dir = Path(out_dir)
    manifest = {
        "config_sha256": hashlib.sha256(config_json.encode()).hexdigest(),
        "files": [{"name": n, "bytes": (out_dir / n).stat().st_size, "sha256": sha256(out_dir / n)} for n in names],
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def verify_manifest(out_dir) -> list[str]:
    """Names of files whose content no longer matches the manifest."""
    out_dir = Path(out_dir)
    manifest = json.loads((out_dir / "manifest.json").read_text())
    return [f["name"] for f in manifest["files"] if sha256(out_dir / f["name"]) != f["sha256"]]
