"""Track reconstruction and cleaning of raw AIS contacts.

Contacts are grouped per MMSI into candidate tracks, cut at transmission
gaps, stripped of extreme position noise, and screened against validity
rules (unlabeled, non-ship, motionless, status-inconsistent). The full
rule set is used by the complete pipeline; a reduced "minimum" set keeps
only what downstream algorithms need to function at all.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .errors import DataError
from .estimation.frame import LocalFrame, haversine_m, project
from .ingest import (
    FISHING,
    MOBILE_SHIP,
    NON_FISHING,
    UNLABELED,
    AisRecord,
    to_binary_class,
)

# nav_status values that declare the vessel stationary
STATIONARY_STATUSES = frozenset({"moored", "at anchor", "anchored", "aground"})


@dataclass(frozen=True)
class CleaningConfig:
    max_gap_s: int = 11            # slowest moving-ship AIS refresh (10 s) + 1 s slack
    min_points: int = 50
    extreme_speed_mps: float = 55.0
    motionless_diag_m: float = 100.0
    status_fraction: float = 0.9
    displacement_m: float = 500.0
    full: bool = True

    def __post_init__(self):
        if self.max_gap_s <= 0 or self.min_points <= 0:
            raise DataError("max_gap_s and min_points must be positive")
        if self.extreme_speed_mps <= 0 or self.motionless_diag_m <= 0 or self.displacement_m <= 0:
            raise DataError("cleaning thresholds must be positive")
        if not (0.0 < self.status_fraction <= 1.0):
            raise DataError("status_fraction must be in (0, 1]")


@dataclass
class StaticExtras:
    """Per-track static descriptors carried through to feature extraction."""
    nav_status: Optional[str] = None   # most frequent reported status
    length: Optional[float] = None
    width: Optional[float] = None


@dataclass
class Track:
    mmsi: int
    points: list  # time-ordered AisRecord list
    label: str = UNLABELED
    ship_type: Optional[str] = None
    static_extras: StaticExtras = field(default_factory=StaticExtras)

    def __len__(self):
        return len(self.points)

    @property
    def timestamps(self):
        return [p.timestamp for p in self.points]

    def check_invariants(self, cfg: CleaningConfig) -> None:
        """Assert the contract every cleaned track must satisfy."""
        ts = self.timestamps
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise AssertionError(f"track {self.mmsi}: timestamps not strictly increasing")
        if any(b - a > cfg.max_gap_s for a, b in zip(ts, ts[1:])):
            raise AssertionError(f"track {self.mmsi}: gap above {cfg.max_gap_s}s")
        if len(self.points) < cfg.min_points:
            raise AssertionError(f"track {self.mmsi}: below minimum size")
        if self.label not in (FISHING, NON_FISHING):
            raise AssertionError(f"track {self.mmsi}: unlabeled")


def _most_common(values):
    """Most frequent non-null value, earliest occurrence breaking ties."""
    present = [v for v in values if v is not None]
    if not present:
        return None
    counts = Counter(present)
    best = max(counts.values())
    for v in present:  # first occurrence among the modal values
        if counts[v] == best:
            return v
    return None


def _make_track(mmsi: int, points: list) -> Track:
    ship_type = _most_common(p.ship_type for p in points)
    extras = StaticExtras(
        nav_status=_most_common(p.nav_status for p in points),
        length=_most_common(p.length for p in points),
        width=_most_common(p.width for p in points),
    )
    return Track(
        mmsi=mmsi,
        points=points,
        label=to_binary_class(ship_type),
        ship_type=ship_type,
        static_extras=extras,
    )


def split_tracks(records: list, cfg: Optional[CleaningConfig] = None) -> list:
    """Divide contacts into per-MMSI track candidates.

    Groups by MMSI, sorts by time, collapses duplicate timestamps to the
    first occurrence, cuts wherever consecutive contacts are more than
    ``max_gap_s`` apart, and discards fragments shorter than ``min_points``.
    Output is ordered by (mmsi, first timestamp).
    """
    cfg = cfg or CleaningConfig()
    groups: dict[int, list] = {}
    for rec in records:
        groups.setdefault(rec.mmsi, []).append(rec)

    tracks = []
    for mmsi in sorted(groups):
        pts = sorted(groups[mmsi], key=lambda p: p.timestamp)
        deduped = []
        last_ts = None
        for p in pts:
            if p.timestamp != last_ts:
                deduped.append(p)
                last_ts = p.timestamp
        fragment = []
        for p in deduped:
            if fragment and p.timestamp - fragment[-1].timestamp > cfg.max_gap_s:
                if len(fragment) >= cfg.min_points:
                    tracks.append(_make_track(mmsi, fragment))
                fragment = []
            fragment.append(p)
        if len(fragment) >= cfg.min_points:
            tracks.append(_make_track(mmsi, fragment))
    return tracks


def remove_extreme_noise(track: Track, cfg: Optional[CleaningConfig] = None) -> Optional[Track]:
    """Drop points whose implied speed from the previous kept point is absurd.

    Rechecking against the new predecessor after each removal is equivalent
    to a single forward pass that keeps a running "last kept" point. Returns
    None when the survivor count falls below the minimum track size.
    """
    cfg = cfg or CleaningConfig()
    pts = track.points
    if not pts:
        return None
    kept = [pts[0]]
    for p in pts[1:]:
        prev = kept[-1]
        dt = p.timestamp - prev.timestamp
        dist = haversine_m(prev.lat, prev.lon, p.lat, p.lon)
        if dist / dt > cfg.extreme_speed_mps:
            continue
        kept.append(p)
    if len(kept) < cfg.min_points:
        return None
    if len(kept) == len(pts):
        return track
    return _make_track(track.mmsi, kept)


def _bbox_diag_m(track: Track) -> float:
    frame = LocalFrame(track.points[0].lat, track.points[0].lon)
    lats = [p.lat for p in track.points]
    lons = [p.lon for p in track.points]
    x, y = project(lats, lons, frame)
    return math.hypot(float(x.max() - x.min()), float(y.max() - y.min()))


def _net_displacement_m(track: Track) -> float:
    a, b = track.points[0], track.points[-1]
    return haversine_m(a.lat, a.lon, b.lat, b.lon)


def drop_invalid(tracks: list, cfg: Optional[CleaningConfig] = None) -> list:
    """Screen candidate tracks against the validity rules.

    Always applied: (a) no usable ship type -> unlabeled, (c) motionless
    (bounding-box diagonal below threshold). Applied only under full
    cleaning: (b) non-ship transmitters, (d) stationary-status tracks that
    nevertheless displace, which indicate a misconfigured transmitter.
    """
    cfg = cfg or CleaningConfig()
    kept = []
    for t in tracks:
        if t.label == UNLABELED:
            continue
        if _bbox_diag_m(t) < cfg.motionless_diag_m:
            continue
        if cfg.full:
            if any(p.mobile_class != MOBILE_SHIP for p in t.points):
                continue
            n_stationary = sum(1 for p in t.points if p.nav_status in STATIONARY_STATUSES)
            if (n_stationary >= cfg.status_fraction * len(t.points)
                    and _net_displacement_m(t) > cfg.displacement_m):
                continue
        kept.append(t)
    return kept


def clean(records: list, cfg: Optional[CleaningConfig] = None) -> list:
    """Full cleaning pipeline: split, de-noise, screen.

    Deterministic: output sorted by (mmsi, first timestamp). Idempotent:
    re-cleaning the flattened output reproduces it.
    """
    cfg = cfg or CleaningConfig()
    candidates = split_tracks(records, cfg)
    denoised = []
    for t in candidates:
        t2 = remove_extreme_noise(t, cfg)
        if t2 is not None:
            denoised.append(t2)
    tracks = drop_invalid(denoised, cfg)
    for t in tracks:
        t.check_invariants(cfg)
    return tracks


def flatten(tracks: list) -> list:
    """Concatenate track points back into a record list (for idempotence checks)."""
    records = []
    for t in tracks:
        records.extend(t.points)
    return records
