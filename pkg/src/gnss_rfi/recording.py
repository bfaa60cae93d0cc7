"""Flight recording data model, CSV reader/writer and dataset manifests.

A flight file is plain CSV sampled at 1 Hz::

    # flight_id=F0001 label=1          (optional metadata line)
    t,cno_01,...,cno_32,heading_deg,roll_deg,pitch_deg,gs_mps,tas_mps
    0,41.2031,,38.9000,...

An empty C/No field means the satellite was not tracked at that epoch.
Dense channels (attitude and speeds) must be populated on every row.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

N_CNO = 32
CNO_COLUMNS = tuple(f"cno_{k:02d}" for k in range(1, N_CNO + 1))
DENSE_COLUMNS = ("heading_deg", "roll_deg", "pitch_deg", "gs_mps", "tas_mps")
CHANNEL_NAMES = CNO_COLUMNS + DENSE_COLUMNS
N_CHANNELS = len(CHANNEL_NAMES)  # 37
HEADER = ("t",) + CHANNEL_NAMES
MANIFEST_HEADER = ("flight_id", "relative_path", "label")
DECIMALS = 4

CNO_LIMITS = (0.0, 60.0)
# (low, high, high_inclusive)
DENSE_LIMITS = {
    "heading_deg": (0.0, 360.0, False),
    "roll_deg": (-180.0, 180.0, True),
    "pitch_deg": (-90.0, 90.0, True),
    "gs_mps": (0.0, math.inf, True),
    "tas_mps": (0.0, math.inf, True),
}


class RecordingError(ValueError):
    """Raised when a flight file or manifest violates the schema.

    ``row`` is the 1-based line number in the file and ``column`` the
    header name, when the problem can be pinned to a cell.
    """

    def __init__(self, message, path=None, row=None, column=None):
        self.path = None if path is None else str(path)
        self.row = row
        self.column = column
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where) + ": " if where else ""
        super().__init__(prefix + message)


def quantize(values):
    """Round to the serialized precision so in-memory data equals a file round-trip."""
    return np.round(np.asarray(values, dtype=np.float64), DECIMALS)


@dataclass(frozen=True, eq=False)
class FlightRecording:
    """One flight: 32 C/No channels with a presence mask plus five dense channels.

    ``channels`` is a ``(T, 37)`` float array in :data:`CHANNEL_NAMES` order
    with NaN at absent C/No cells; ``present`` is the matching boolean mask.
    Arrays are made read-only on construction.
    """

    flight_id: str
    epochs: np.ndarray
    channels: np.ndarray
    label: int = 0
    present: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        epochs = np.array(self.epochs, dtype=np.int64).reshape(-1)
        channels = np.array(self.channels, dtype=np.float64)
        if channels.ndim != 2 or channels.shape[1] != N_CHANNELS:
            raise RecordingError(f"channels must have shape (T, {N_CHANNELS}), got {channels.shape}")
        if channels.shape[0] == 0:
            raise RecordingError("recording has no epochs (T = 0)")
        if epochs.shape[0] != channels.shape[0]:
            raise RecordingError(
                f"{epochs.shape[0]} epochs but {channels.shape[0]} channel rows")
        if np.any(np.diff(epochs) <= 0):
            raise RecordingError("epochs must be strictly increasing")
        if self.label not in (0, 1):
            raise RecordingError(f"label must be 0 or 1, got {self.label!r}")
        present = np.isfinite(channels)
        _validate_block(channels, present)
        epochs.setflags(write=False)
        channels.setflags(write=False)
        present.setflags(write=False)
        object.__setattr__(self, "epochs", epochs)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "present", present)
        object.__setattr__(self, "label", int(self.label))

    @property
    def n_epochs(self) -> int:
        return self.channels.shape[0]

    @property
    def cno(self) -> np.ndarray:
        return self.channels[:, :N_CNO]

    def channel(self, name: str) -> np.ndarray:
        return self.channels[:, CHANNEL_NAMES.index(name)]

    def present_values(self, index: int) -> np.ndarray:
        col = self.channels[:, index]
        return col[self.present[:, index]]

    def with_label(self, label: int) -> "FlightRecording":
        return FlightRecording(self.flight_id, self.epochs, self.channels, label)

    def __eq__(self, other):
        if not isinstance(other, FlightRecording):
            return NotImplemented
        return (
            self.flight_id == other.flight_id
            and self.label == other.label
            and np.array_equal(self.epochs, other.epochs)
            and np.array_equal(self.channels, other.channels, equal_nan=True)
        )

    __hash__ = None


def _validate_block(channels, present, path=None, row_offset=1):
    """Range and gap checks shared by the constructor and the CSV parser."""
    for j, name in enumerate(CHANNEL_NAMES):
        col = channels[:, j]
        mask = present[:, j]
        if j < N_CNO:
            if np.any(np.isinf(col)):
                r = int(np.flatnonzero(np.isinf(col))[0])
                raise RecordingError("infinite C/No value", path, r + row_offset, name)
            lo, hi = CNO_LIMITS
            bad = mask & ((col < lo) | (col > hi))
            if np.any(bad):
                r = int(np.flatnonzero(bad)[0])
                raise RecordingError(
                    f"C/No {col[r]} outside [{lo}, {hi}] dB-Hz", path, r + row_offset, name)
            continue
        if not np.all(mask):
            r = int(np.flatnonzero(~mask)[0])
            raise RecordingError("dense-channel gap (missing or non-finite value)",
                                 path, r + row_offset, name)
        lo, hi, inclusive = DENSE_LIMITS[name]
        bad = (col < lo) | ((col > hi) if inclusive else (col >= hi))
        if np.any(bad):
            r = int(np.flatnonzero(bad)[0])
            raise RecordingError(f"value {col[r]} out of range", path, r + row_offset, name)


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of uniquely named flights."""

    recordings: tuple
    manifest_path: str | None = None

    def __post_init__(self):
        recordings = tuple(self.recordings)
        if not recordings:
            raise RecordingError("dataset must contain at least one recording")
        seen = set()
        for rec in recordings:
            if rec.flight_id in seen:
                raise RecordingError(f"duplicate flight_id {rec.flight_id!r}")
            seen.add(rec.flight_id)
        object.__setattr__(self, "recordings", recordings)

    def __len__(self):
        return len(self.recordings)

    def __iter__(self) -> Iterator[FlightRecording]:
        return iter(self.recordings)

    def __getitem__(self, i):
        return self.recordings[i]

    @property
    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.recordings], dtype=np.int64)

    @property
    def flight_ids(self) -> list[str]:
        return [r.flight_id for r in self.recordings]

    @property
    def prevalence(self) -> float:
        return float(self.labels.mean())


def _parse_metadata(line: str) -> dict:
    meta = {}
    for token in line.lstrip("#").split():
        key, sep, value = token.partition("=")
        if sep:
            meta[key.strip()] = value.strip()
    return meta


def _parse_rows_slowly(body, path, line0):
    """Cell-by-cell conversion that pinpoints the first bad cell."""
    n = len(body)
    values = np.full((n, N_CHANNELS), np.nan)
    epochs = np.empty(n, dtype=np.int64)
    for i, row in enumerate(body):
        if len(row) != len(HEADER):
            raise RecordingError(f"expected {len(HEADER)} fields, got {len(row)}", path, line0 + i)
        try:
            t = float(row[0])
        except ValueError:
            raise RecordingError(f"non-numeric cell {row[0]!r}", path, line0 + i, "t") from None
        if not math.isfinite(t) or t != int(t):
            raise RecordingError(f"epoch {row[0]!r} is not an integer second", path, line0 + i, "t")
        epochs[i] = int(t)
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            if cell == "":
                continue
            try:
                v = float(cell)
            except ValueError:
                raise RecordingError(f"non-numeric cell {cell!r}", path, line0 + i,
                                     CHANNEL_NAMES[j]) from None
            if math.isnan(v) and j < N_CNO:
                raise RecordingError("NaN is not a valid C/No value; leave the field empty",
                                     path, line0 + i, CHANNEL_NAMES[j])
            values[i, j] = v
    return epochs, values


def parse_flight_csv(path, flight_id: str | None = None, label: int | None = None) -> FlightRecording:
    """Read and validate one flight file.

    ``flight_id`` and ``label`` default to the optional ``# flight_id=.. label=..``
    metadata line, then to the file stem and 0.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise RecordingError(f"cannot read flight file: {exc}", path) from exc
    lines = text.splitlines()
    meta = {}
    first = 0
    if lines and lines[0].startswith("#"):
        meta = _parse_metadata(lines[0])
        first = 1
    if len(lines) <= first:
        raise RecordingError("empty flight file (no header)", path)
    rows = list(csv.reader(lines[first:]))
    header = tuple(c.strip() for c in rows[0])
    if header != HEADER:
        raise RecordingError(
            f"malformed header; expected {len(HEADER)} columns "
            f"'t,cno_01,...,tas_mps', got {len(header)} starting {','.join(header[:3])!r}",
            path, first + 1)
    body = rows[1:]
    if not body:
        raise RecordingError("flight file has no data rows (T = 0)", path)

    n = len(body)
    line0 = first + 2
    parsed = None
    lowered = text.lower()
    if "nan" not in lowered and "inf" not in lowered:
        try:
            parsed = np.array([[float(c or "nan") for c in row] for row in body])
        except ValueError:
            parsed = None
    if parsed is not None and parsed.shape == (n, len(HEADER)):
        t = parsed[:, 0]
        if not np.all(np.isfinite(t) & (t == np.floor(t))):
            parsed = None
    else:
        parsed = None

    if parsed is not None:
        epochs = parsed[:, 0].astype(np.int64)
        values = parsed[:, 1:]
    else:
        epochs, values = _parse_rows_slowly(body, path, line0)
    if np.any(np.diff(epochs) <= 0):
        r = int(np.flatnonzero(np.diff(epochs) <= 0)[0]) + 1
        raise RecordingError("epochs must be strictly increasing", path, line0 + r, "t")
    _validate_block(values, np.isfinite(values), path, row_offset=line0)

    if flight_id is None:
        flight_id = meta.get("flight_id", path.stem)
    if label is None:
        raw = meta.get("label", "0")
        if raw not in ("0", "1"):
            raise RecordingError(f"label must be 0 or 1, got {raw!r}", path, 1)
        label = int(raw)
    return FlightRecording(flight_id, epochs, values, label)


def _format_row(values) -> str:
    return ",".join("" if v != v else f"{v:.{DECIMALS}f}" for v in values)


def write_flight_csv(recording: FlightRecording, path) -> None:
    """Serialize ``recording`` with 4 decimals; absent cells become empty fields."""
    path = Path(path)
    lines = [f"# flight_id={recording.flight_id} label={recording.label}", ",".join(HEADER)]
    for t, row in zip(recording.epochs.tolist(), recording.channels.tolist()):
        lines.append(f"{t}," + _format_row(row))
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise RecordingError(f"cannot write flight file: {exc}", path) from exc


def load_dataset_manifest(path) -> Dataset:
    """Parse every flight listed in a ``flight_id,relative_path,label`` manifest.

    Paths are resolved against the manifest's directory. The manifest label
    is authoritative over any label stored in the flight file.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise RecordingError(f"cannot read manifest: {exc}", path) from exc
    base = path.parent
    recordings = []
    seen = set()
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        row = [c.strip() for c in row]
        if row[0].startswith("#") or (lineno == 1 and tuple(row) == MANIFEST_HEADER):
            continue
        if len(row) != 3:
            raise RecordingError(f"expected 3 fields, got {len(row)}", path, lineno)
        fid, rel, raw_label = row
        if raw_label not in ("0", "1"):
            raise RecordingError(f"label must be 0 or 1, got {raw_label!r}", path, lineno, "label")
        if fid in seen:
            raise RecordingError(f"duplicate flight_id {fid!r}", path, lineno, "flight_id")
        seen.add(fid)
        flight_path = base / rel
        if not flight_path.is_file():
            raise RecordingError(f"missing flight file {flight_path}", path, lineno, "relative_path")
        recordings.append(parse_flight_csv(flight_path, flight_id=fid, label=int(raw_label)))
    if not recordings:
        raise RecordingError("manifest lists no flights", path)
    return Dataset(tuple(recordings), str(path))


def write_manifest(entries: Sequence[tuple[str, str, int]], path) -> None:
    lines = [",".join(MANIFEST_HEADER)]
    lines += [f"{fid},{rel},{int(label)}" for fid, rel, label in entries]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
