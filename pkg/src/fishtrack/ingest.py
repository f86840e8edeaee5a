"""CSV ingestion of AIS contact logs.

Parses a comma-separated contact log (header row required, UTF-8) into
validated :class:`AisRecord` objects under a configurable column mapping.
Malformed rows are never fatal: they are skipped and logged with a reason.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import IO, Iterable, Optional

from .errors import DataError

# Ship type vocabulary broadcast by AIS transponders. Anything else parses
# to the catch-all "unknown".
SHIP_TYPES = (
    "Anti-pollution", "Cargo", "Dredging",
    "Fishing", "HSC", "Pilot",
    "Port tender", "Military", "Passenger",
    "Law enforcement", "Pleasure", "Medical",
    "Reserved", "Sailing", "SAR",
    "Tanker", "Towing", "Tug",
)
UNKNOWN_SHIP_TYPE = "unknown"

_SHIP_TYPE_BY_LOWER = {t.lower(): t for t in SHIP_TYPES}

FISHING = "fishing"
NON_FISHING = "non_fishing"
UNLABELED = "unlabeled"

MOBILE_SHIP = "ship"
MOBILE_BASE_STATION = "base-station"
MOBILE_OTHER = "other"

# strptime format understood as raw integer epoch seconds
EPOCH_FORMAT = "epoch"


@dataclass(frozen=True)
class AisRecord:
    """One timestamped AIS contact.

    Kinematic fields are in SI-adjacent AIS units: latitude/longitude in
    WGS-84 degrees, speed over ground in knots, course over ground in
    degrees clockwise from north. Optional fields are ``None`` when the
    transponder did not report them; sentinel numbers are never used.
    """

    timestamp: int
    mmsi: int
    lat: float
    lon: float
    sog: Optional[float] = None
    cog: Optional[float] = None
    nav_status: Optional[str] = None
    ship_type: Optional[str] = None
    length: Optional[float] = None
    width: Optional[float] = None
    mobile_class: str = MOBILE_SHIP


@dataclass(frozen=True)
class ColumnMapping:
    """Maps AisRecord fields to source CSV columns.

    ``columns`` must map at least timestamp, mmsi, lat and lon; other fields
    are optional and yield ``None`` when unmapped or empty.
    ``timestamp_format`` is a strptime format, or ``"epoch"`` for raw
    integer seconds. ``decimal_separator`` supports exports that use ","
    for decimals.
    """

    columns: dict = field(default_factory=lambda: dict(DEFAULT_COLUMNS))
    timestamp_format: str = "%Y-%m-%dT%H:%M:%S"
    decimal_separator: str = "."

    REQUIRED = ("timestamp", "mmsi", "lat", "lon")

    def __post_init__(self):
        missing = [f for f in self.REQUIRED if f not in self.columns]
        if missing:
            raise DataError(f"column mapping lacks required fields: {missing}")

    @classmethod
    def from_json(cls, text: str) -> "ColumnMapping":
        doc = json.loads(text)
        kwargs = {}
        if "columns" in doc:
            kwargs["columns"] = dict(doc["columns"])
        if "timestamp_format" in doc:
            kwargs["timestamp_format"] = doc["timestamp_format"]
        if "decimal_separator" in doc:
            kwargs["decimal_separator"] = doc["decimal_separator"]
        return cls(**kwargs)


DEFAULT_COLUMNS = {
    "timestamp": "timestamp",
    "mmsi": "mmsi",
    "lat": "lat",
    "lon": "lon",
    "sog": "sog",
    "cog": "cog",
    "nav_status": "nav_status",
    "ship_type": "ship_type",
    "length": "length",
    "width": "width",
    "mobile_class": "mobile_class",
}


@dataclass(frozen=True)
class RowReject:
    row: int  # 1-based data-row number (header excluded)
    reason: str


def to_binary_class(ship_type: Optional[str]) -> str:
    """Collapse the AIS ship-type vocabulary to the binary target class."""
    if ship_type is None or ship_type == UNKNOWN_SHIP_TYPE:
        return UNLABELED
    if ship_type == "Fishing":
        return FISHING
    return NON_FISHING


def _parse_float(raw: str, mapping: ColumnMapping) -> float:
    if mapping.decimal_separator != ".":
        raw = raw.replace(mapping.decimal_separator, ".")
    return float(raw)


def _parse_timestamp(raw: str, mapping: ColumnMapping) -> int:
    if mapping.timestamp_format == EPOCH_FORMAT:
        return int(raw)
    dt = datetime.strptime(raw, mapping.timestamp_format)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _format_timestamp(ts: int, mapping: ColumnMapping) -> str:
    if mapping.timestamp_format == EPOCH_FORMAT:
        return str(ts)
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    return dt.strftime(mapping.timestamp_format)


def mobile_class_from_mmsi(mmsi: int) -> str:
    """Fallback classification when no mobile-class column is mapped.

    Coast/base stations are encoded with a 00 prefix in the 9-digit MMSI
    space, so the integer must be zero-padded before inspection.
    """
    digits = str(mmsi).zfill(9)
    if digits.startswith("00"):
        return MOBILE_BASE_STATION
    return MOBILE_SHIP


def _row_value(row: dict, mapping: ColumnMapping, field_name: str) -> Optional[str]:
    col = mapping.columns.get(field_name)
    if col is None:
        return None
    raw = row.get(col)
    if raw is None:
        return None
    raw = raw.strip()
    return raw if raw else None


def _parse_row(row: dict, mapping: ColumnMapping) -> AisRecord:
    """Parse one CSV row; raises ValueError with a reject reason."""
    for f in ColumnMapping.REQUIRED:
        if _row_value(row, mapping, f) is None:
            raise ValueError(f"missing required field: {f}")

    try:
        timestamp = _parse_timestamp(_row_value(row, mapping, "timestamp"), mapping)
    except (ValueError, OverflowError):
        raise ValueError("unparseable timestamp")
    if timestamp < 0:
        raise ValueError("negative timestamp")

    raw_mmsi = _row_value(row, mapping, "mmsi")
    try:
        mmsi = int(raw_mmsi)
    except ValueError:
        raise ValueError("unparseable mmsi")
    if not (0 < mmsi <= 999_999_999):
        raise ValueError("invalid mmsi")

    try:
        lat = _parse_float(_row_value(row, mapping, "lat"), mapping)
        lon = _parse_float(_row_value(row, mapping, "lon"), mapping)
    except ValueError:
        raise ValueError("unparseable coordinate")
    if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
        raise ValueError("coordinate out of range")

    def optional_float(name, lo=None, hi=None, hi_open=False):
        raw = _row_value(row, mapping, name)
        if raw is None:
            return None
        try:
            value = _parse_float(raw, mapping)
        except ValueError:
            raise ValueError(f"unparseable {name}")
        if lo is not None and value < lo:
            raise ValueError(f"{name} out of range")
        if hi is not None and (value > hi or (hi_open and value == hi)):
            raise ValueError(f"{name} out of range")
        return value

    sog = optional_float("sog", lo=0.0)
    cog = optional_float("cog", lo=0.0, hi=360.0, hi_open=True)
    length = optional_float("length", lo=0.0)
    width = optional_float("width", lo=0.0)

    nav_status = _row_value(row, mapping, "nav_status")
    if nav_status is not None:
        nav_status = nav_status.lower()

    raw_type = _row_value(row, mapping, "ship_type")
    if raw_type is None:
        ship_type = None
    else:
        ship_type = _SHIP_TYPE_BY_LOWER.get(raw_type.lower(), UNKNOWN_SHIP_TYPE)

    raw_mobile = _row_value(row, mapping, "mobile_class")
    if raw_mobile is not None:
        raw_mobile = raw_mobile.lower()
        if raw_mobile in (MOBILE_SHIP, MOBILE_BASE_STATION, MOBILE_OTHER):
            mobile_class = raw_mobile
        else:
            mobile_class = MOBILE_OTHER
    else:
        mobile_class = mobile_class_from_mmsi(mmsi)

    return AisRecord(
        timestamp=timestamp, mmsi=mmsi, lat=lat, lon=lon,
        sog=sog, cog=cog, nav_status=nav_status, ship_type=ship_type,
        length=length, width=width, mobile_class=mobile_class,
    )


def parse_csv(source: IO, mapping: Optional[ColumnMapping] = None):
    """Parse an AIS contact CSV.

    Returns ``(records, rejects)`` where rejects carry the 1-based data-row
    number and a reason string. Input order is preserved and
    ``len(records) + len(rejects)`` equals the number of data rows.

    Raises :class:`DataError` if the stream is unreadable or the header is
    missing a mapped required column.
    """
    mapping = mapping or ColumnMapping()
    if isinstance(source, (bytes, bytearray)):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        source = io.StringIO(source)

    try:
        reader = csv.DictReader(source)
        header = reader.fieldnames
    except (UnicodeDecodeError, csv.Error) as exc:
        raise DataError(f"unreadable CSV stream: {exc}")
    if header is None:
        raise DataError("empty CSV: no header row")

    for f in ColumnMapping.REQUIRED:
        col = mapping.columns[f]
        if col not in header:
            raise DataError(f"mapped column {col!r} (field {f!r}) not in header")

    records: list[AisRecord] = []
    rejects: list[RowReject] = []
    try:
        for i, row in enumerate(reader, start=1):
            try:
                records.append(_parse_row(row, mapping))
            except ValueError as exc:
                rejects.append(RowReject(row=i, reason=str(exc)))
    except (UnicodeDecodeError, csv.Error) as exc:
        raise DataError(f"unreadable CSV stream: {exc}")
    return records, rejects


def write_csv(records: Iterable[AisRecord], sink: IO, mapping: Optional[ColumnMapping] = None) -> None:
    """Write records back to CSV under the same mapping.

    Round-trips with :func:`parse_csv`: re-parsing the output reproduces the
    records exactly. Only mapped fields are written; absent values become
    empty cells.
    """
    mapping = mapping or ColumnMapping()
    fields = [f for f in DEFAULT_COLUMNS if f in mapping.columns]
    header = [mapping.columns[f] for f in fields]
    writer = csv.writer(sink)
    writer.writerow(header)
    for rec in records:
        row = []
        for f in fields:
            value = getattr(rec, f)
            if value is None:
                row.append("")
            elif f == "timestamp":
                row.append(_format_timestamp(value, mapping))
            elif isinstance(value, float):
                text = repr(value)
                if mapping.decimal_separator != ".":
                    text = text.replace(".", mapping.decimal_separator)
                row.append(text)
            else:
                row.append(str(value))
        writer.writerow(row)


def write_reject_log(rejects: Iterable[RowReject], sink: IO) -> None:
    """Reject log CSV: columns ``row,reason``."""
    writer = csv.writer(sink)
    writer.writerow(["row", "reason"])
    for r in rejects:
        writer.writerow([r.row, r.reason])


def relabel(record: AisRecord, **changes) -> AisRecord:
    return replace(record, **changes)
