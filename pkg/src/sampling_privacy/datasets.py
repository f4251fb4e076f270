"""Dataset ingestion: check-in logs, the breast-cancer attribute table, location grids.

Parsers read one line at a time and keep only per-owner selections and
per-value counts. Dataset files are never fetched; pass a path or an open
stream in the documented format.
"""
from __future__ import annotations

import codecs
import csv
import io
import math
import os
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, Hashable, Iterator, Mapping, Optional, Sequence, Tuple, Union

from .exceptions import DatasetError, InvalidParameters
from .simulation import PopulationSpec

MAX_MALFORMED_FRACTION = 0.10
MAX_CELLS = 2**32

AGE_GROUPS = tuple(f"{lo}-{lo + 9}" for lo in range(10, 100, 10))
TUMOR_SIZE_GROUPS = tuple(f"{lo}-{lo + 4}" for lo in range(0, 60, 5))
BREAST_CANCER_COLUMNS = (
    "class", "age", "menopause", "tumor-size", "inv-nodes",
    "node-caps", "deg-malig", "breast", "breast-quad", "irradiat",
)
RECURRENCE_TOKENS = {"recurrence-events": True, "no-recurrence-events": False}

Source = Union[str, os.PathLike, io.IOBase]


class OutOfGrid(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Bounding box cut into square cells of ``cell_size`` degrees.

    Cells are half-open, ``[min, min + cell_size)``, numbered row-major from
    the south-west corner.
    """

    lat_min: float
    lat_max: float
    lng_min: float
    lng_max: float
    cell_size: float

    def __post_init__(self):
        if not (self.lat_min < self.lat_max and self.lng_min < self.lng_max):
            raise InvalidParameters("grid bounds must satisfy min < max")
        if not self.cell_size > 0:
            raise InvalidParameters("cell_size must be positive")
        if self.rows * self.columns > MAX_CELLS:
            raise InvalidParameters(
                f"{self.rows * self.columns} cells do not fit a 32-bit location id"
            )

    @staticmethod
    def _cells(span: float, size: float) -> int:
        return max(1, math.ceil(span / size - 1e-9))

    @property
    def rows(self) -> int:
        return self._cells(self.lat_max - self.lat_min, self.cell_size)

    @property
    def columns(self) -> int:
        return self._cells(self.lng_max - self.lng_min, self.cell_size)

    def contains(self, lat: float, lng: float) -> bool:
        return self.lat_min <= lat < self.lat_max and self.lng_min <= lng < self.lng_max

    def cell_center(self, location_id: int) -> Tuple[float, float]:
        row, col = divmod(location_id, self.columns)
        if not (0 <= row < self.rows):
            raise OutOfGrid(f"location id {location_id} is not a cell of this grid")
        return (
            self.lat_min + (row + 0.5) * self.cell_size,
            self.lng_min + (col + 0.5) * self.cell_size,
        )


def discretize(lat: float, lng: float, grid: GridSpec) -> int:
    """Row-major cell id of a point."""
    if not grid.contains(lat, lng):
        raise OutOfGrid(f"({lat}, {lng}) is outside the grid")
    row = min(int((lat - grid.lat_min) // grid.cell_size), grid.rows - 1)
    col = min(int((lng - grid.lng_min) // grid.cell_size), grid.columns - 1)
    return row * grid.columns + col


@dataclass(frozen=True)
class CheckinRecord:
    user_id: str
    timestamp: datetime
    lat: float
    lng: float
    location_id: int


@dataclass(frozen=True)
class PatientRecord:
    recurrence: bool
    age_group: int
    tumor_size_group: int


@dataclass
class ParsedDataset:
    """Per-owner truthful value and per-value ground truth.

    ``histogram`` counts owners (one selected value each), so its total
    equals ``len(values)``. ``malformed`` rows could not be parsed;
    ``skipped`` rows parsed but had nothing selectable (outside the grid or
    time window, missing or unknown attribute token).
    """

    values: Dict[Hashable, int] = field(default_factory=dict)
    histogram: Counter = field(default_factory=Counter)
    rows: int = 0
    malformed: int = 0
    skipped: int = 0

    @property
    def owners(self) -> int:
        return len(self.values)

    def top_values(self, k: int) -> list:
        """The ``k`` most frequent values; ties broken by the value itself."""
        return [v for v, _ in sorted(self.histogram.items(), key=lambda kv: (-kv[1], kv[0]))[:k]]

    def monitor(self, monitored: Sequence[int]) -> Dict[Hashable, Optional[int]]:
        """Truthful values for a query over ``monitored``: index ``1..V`` or None."""
        index = {value: i for i, value in enumerate(monitored, start=1)}
        if len(index) != len(monitored):
            raise InvalidParameters("monitored values must be distinct")
        return {owner: index.get(value) for owner, value in self.values.items()}


@contextmanager
def _lines(source: Source) -> Iterator[Iterator[str]]:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            yield iter(fh)
        return
    if not hasattr(source, "read"):
        raise DatasetError(f"cannot read from {type(source).__name__}")
    if isinstance(source, io.TextIOBase):
        yield iter(source)
        return
    # bytes stream: decode incrementally
    yield iter(codecs.getreader("utf-8")(source))


def _finish(parsed: ParsedDataset, what: str) -> ParsedDataset:
    if parsed.rows == 0:
        raise DatasetError(f"{what}: no rows")
    if parsed.malformed > MAX_MALFORMED_FRACTION * parsed.rows:
        raise DatasetError(
            f"{what}: {parsed.malformed} of {parsed.rows} rows are malformed"
        )
    if not parsed.values:
        raise DatasetError(f"{what}: no usable rows")
    return parsed


def _parse_time(text: str) -> datetime:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    return ts if ts.tzinfo else ts.replace(tzinfo=timezone.utc)


def parse_checkin_row(line: str) -> CheckinRecord:
    parts = line.rstrip("\r\n").split("\t")
    if len(parts) != 5:
        raise ValueError(f"expected 5 columns, got {len(parts)}")
    user, when, lat, lng, loc = parts
    lat, lng = float(lat), float(lng)
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lng <= 180.0):
        raise ValueError(f"coordinate out of range: {lat}, {lng}")
    if not user:
        raise ValueError("empty user id")
    return CheckinRecord(user, _parse_time(when), lat, lng, int(loc))


def parse_checkins(
    source: Source,
    selection: Union[str, GridSpec] = "native",
    window: Optional[Tuple[datetime, datetime]] = None,
) -> ParsedDataset:
    """Each user's latest check-in (inside ``window`` if given) selects their value.

    ``selection="native"`` keeps the dataset's location id; a
    :class:`GridSpec` replaces it with the id of the grid cell containing
    the coordinate.
    """
    if selection != "native" and not isinstance(selection, GridSpec):
        raise InvalidParameters(f"selection must be 'native' or a GridSpec, got {selection!r}")
    if window is not None:
        window = tuple(t if t.tzinfo else t.replace(tzinfo=timezone.utc) for t in window)
    parsed = ParsedDataset()
    latest: Dict[str, Tuple[datetime, int]] = {}
    with _lines(source) as lines:
        for line in lines:
            if not line.strip():
                continue
            parsed.rows += 1
            try:
                rec = parse_checkin_row(line)
            except ValueError:
                parsed.malformed += 1
                continue
            if window is not None and not (window[0] <= rec.timestamp < window[1]):
                parsed.skipped += 1
                continue
            if isinstance(selection, GridSpec):
                if not selection.contains(rec.lat, rec.lng):
                    parsed.skipped += 1
                    continue
                value = discretize(rec.lat, rec.lng, selection)
            else:
                value = rec.location_id
            prev = latest.get(rec.user_id)
            if prev is None or rec.timestamp >= prev[0]:
                latest[rec.user_id] = (rec.timestamp, value)
    parsed.values = {user: value for user, (_, value) in latest.items()}
    parsed.histogram = Counter(parsed.values.values())
    return _finish(parsed, "check-ins")


def _group(token: str, groups: Sequence[str]) -> Optional[int]:
    token = token.strip().strip("'\"")
    try:
        return groups.index(token) + 1
    except ValueError:
        return None


def parse_patient_row(row: Sequence[str]) -> Tuple[Optional[bool], Optional[int], Optional[int]]:
    """``(recurrence, age_group, tumor_size_group)``, None where the token is missing or unknown."""
    if len(row) != len(BREAST_CANCER_COLUMNS):
        raise ValueError(f"expected {len(BREAST_CANCER_COLUMNS)} columns, got {len(row)}")
    recurrence = RECURRENCE_TOKENS.get(row[0].strip().strip("'\""))
    return recurrence, _group(row[1], AGE_GROUPS), _group(row[3], TUMOR_SIZE_GROUPS)


def iter_patients(source: Source) -> Iterator[PatientRecord]:
    """Complete patient records; rows with any missing selected attribute are dropped."""
    with _lines(source) as lines:
        for row in csv.reader(lines):
            if not row:
                continue
            try:
                rec, age, size = parse_patient_row(row)
            except ValueError:
                continue
            if rec is not None and age is not None and size is not None:
                yield PatientRecord(rec, age, size)


BREAST_CANCER_ATTRIBUTES = ("age", "tumor-size", "recurrence")


def parse_breast_cancer(source: Source, attribute: str = "age") -> ParsedDataset:
    """Map each patient (keyed by data row number) to the group id of ``attribute``.

    Age groups ``10-19 .. 90-99`` are 1..9, tumor sizes ``0-4 .. 55-59`` are
    1..12; ``recurrence`` gives 1 for recurrence events and None otherwise.
    """
    if attribute not in BREAST_CANCER_ATTRIBUTES:
        raise InvalidParameters(f"attribute must be one of {BREAST_CANCER_ATTRIBUTES}")
    parsed = ParsedDataset()
    with _lines(source) as lines:
        for row in csv.reader(lines):
            if not row or not any(cell.strip() for cell in row):
                continue
            owner = parsed.rows
            parsed.rows += 1
            try:
                rec, age, size = parse_patient_row(row)
            except ValueError:
                parsed.malformed += 1
                continue
            if attribute == "recurrence":
                if rec is None:
                    parsed.skipped += 1
                elif rec:
                    parsed.values[owner] = 1
                else:
                    parsed.values[owner] = None
                continue
            value = age if attribute == "age" else size
            if value is None:
                parsed.skipped += 1
            else:
                parsed.values[owner] = value
    parsed.histogram = Counter(v for v in parsed.values.values() if v is not None)
    return _finish(parsed, "breast-cancer")


def n_values_for(attribute: str) -> int:
    return {"age": len(AGE_GROUPS), "tumor-size": len(TUMOR_SIZE_GROUPS), "recurrence": 1}[attribute]


def pad_population(
    values: Mapping[Hashable, Optional[int]],
    target_total: Optional[int] = None,
    n_values: Optional[int] = None,
) -> PopulationSpec:
    """Population over values ``1..V`` with extra no-attribute owners up to ``target_total``."""
    counts = Counter(values.values())
    present = [v for v in counts if v is not None]
    if any(not isinstance(v, int) or v < 1 for v in present):
        raise InvalidParameters("truthful values must be None or integers >= 1")
    V = n_values if n_values is not None else max(present, default=1)
    if present and max(present) > V:
        raise InvalidParameters(f"value {max(present)} exceeds n_values={V}")
    current = len(values)
    if target_total is None:
        target_total = current
    if target_total < current:
        raise InvalidParameters(f"cannot pad {current} owners down to {target_total}")
    yes = tuple(counts.get(v, 0) for v in range(1, V + 1))
    return PopulationSpec(yes, counts.get(None, 0) + (target_total - current))
