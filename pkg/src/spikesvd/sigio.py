"""Recordings, event lists and run configuration on disk.

A recording is stored as ``<name>.csv`` (header row of channel names, one row
per sample) plus a JSON sidecar ``<name>.csv.meta.json`` holding ``fs`` and
the channel list.  Event lists are CSV files with columns
``channel_index,sample,label``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

# 17 significant digits: every float64 survives the text round trip exactly
FLOAT_FMT = "%.17g"
META_SUFFIX = ".meta.json"
EVENT_COLUMNS = ("channel_index", "sample", "label")


class ValidationError(ValueError):
    """Raised when a recording, event list or config breaks an invariant."""


@dataclass(frozen=True)
class ChannelMeta:
    name: str
    pos2d: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name.strip():
            raise ValidationError("empty channel name")
        if self.pos2d is not None:
            pos = tuple(float(v) for v in self.pos2d)
            if len(pos) != 2 or not all(math.isfinite(v) for v in pos):
                raise ValidationError(f"invalid sensor position for {self.name!r}")
            if math.hypot(*pos) > 1.05:
                raise ValidationError(f"sensor {self.name!r} lies outside the head circle")
            object.__setattr__(self, "pos2d", pos)


@dataclass(frozen=True, eq=False)
class Recording:
    """Multichannel sampled signal.

    ``data`` has shape (n_samples, n_channels) and is stored read-only.
    """

    fs: float
    channels: tuple[ChannelMeta, ...]
    data: np.ndarray

    def __post_init__(self):
        fs = float(self.fs)
        if not math.isfinite(fs) or fs <= 0:
            raise ValidationError("invalid sampling rate")
        channels = tuple(c if isinstance(c, ChannelMeta) else ChannelMeta(c) for c in self.channels)
        if len(channels) == 0:
            raise ValidationError("recording has no channels")
        names = [c.name for c in channels]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate channel names")
        data = np.array(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise ValidationError("data must be a 2-D samples x channels matrix")
        if data.shape[0] < 1:
            raise ValidationError("recording has no samples")
        if data.shape[1] != len(channels):
            raise ValidationError(
                f"channel-count mismatch: data has {data.shape[1]} columns, "
                f"metadata lists {len(channels)} channels")
        if not np.all(np.isfinite(data)):
            raise ValidationError("non-finite sample value")
        data.flags.writeable = False
        object.__setattr__(self, "fs", fs)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "data", data)

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.channels]

    def with_data(self, data) -> "Recording":
        """Same fs and channels, new sample matrix."""
        return Recording(self.fs, self.channels, data)

    def positions(self) -> np.ndarray:
        """(n_channels, 2) sensor positions; NaN rows for unpositioned channels."""
        pos = np.full((self.n_channels, 2), np.nan)
        for i, c in enumerate(self.channels):
            if c.pos2d is not None:
                pos[i] = c.pos2d
        return pos

    def __eq__(self, other):
        if not isinstance(other, Recording):
            return NotImplemented
        return (self.fs == other.fs and self.channels == other.channels
                and np.array_equal(self.data, other.data))


@dataclass(frozen=True)
class EventList:
    """Per-channel event markers, kept sorted by (channel_index, sample)."""

    entries: tuple[tuple[int, int, Optional[str]], ...] = ()

    def __post_init__(self):
        norm = []
        for entry in self.entries:
            ch, s, *rest = entry
            label = rest[0] if rest else None
            if label == "":
                label = None
            norm.append((int(ch), int(s), label))
        if any(ch < 0 or s < 0 for ch, s, _ in norm):
            raise ValidationError("negative channel index or sample")
        norm.sort(key=lambda e: (e[0], e[1]))
        object.__setattr__(self, "entries", tuple(norm))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def samples(self, channel: int) -> np.ndarray:
        return np.array([s for ch, s, _ in self.entries if ch == channel], dtype=int)

    def validate(self, rec: Recording) -> "EventList":
        for ch, s, _ in self.entries:
            if ch >= rec.n_channels:
                raise ValidationError(f"channel index {ch} out of range for {rec.n_channels} channels")
            if s >= rec.n_samples:
                raise ValidationError(f"sample {s} out of range for {rec.n_samples} samples")
        return self

    @classmethod
    def from_samples(cls, per_channel: Sequence[Iterable[int]], label: Optional[str] = None):
        return cls(tuple((ch, int(s), label) for ch, ss in enumerate(per_channel) for s in ss))


@dataclass(frozen=True)
class RunConfig:
    d: float = 3.0
    refractory_ms: float = 10.0
    epoch_ms: float = 300.0
    rank: int = 3
    match_tol_ms: float = 50.0
    seed: int = 0

    def __post_init__(self):
        if not self.d > 0:
            raise ValidationError("d must be positive")
        if not self.refractory_ms > 0:
            raise ValidationError("refractory_ms must be positive")
        if not self.epoch_ms > self.refractory_ms:
            raise ValidationError("epoch_ms must exceed refractory_ms")
        if int(self.rank) != self.rank or self.rank < 1:
            raise ValidationError("rank must be an integer >= 1")
        if not self.match_tol_ms >= 0:
            raise ValidationError("match_tol_ms must be non-negative")

    @classmethod
    def from_json(cls, path, **overrides) -> "RunConfig":
        """Load a JSON config; keyword overrides that are not None win."""
        values = json.loads(Path(path).read_text()) if path is not None else {}
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> dict:
        return asdict(self)


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + META_SUFFIX)


def write_recording(rec: Recording, path) -> None:
    path = Path(path)
    meta = {
        "fs": rec.fs,
        "channels": [
            {"name": c.name} if c.pos2d is None else {"name": c.name, "pos2d": list(c.pos2d)}
            for c in rec.channels
        ],
    }
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerow(rec.names)
        np.savetxt(fh, rec.data, fmt=FLOAT_FMT, delimiter=",")
    _meta_path(path).write_text(json.dumps(meta, indent=2) + "\n")


def read_recording(path) -> Recording:
    path = Path(path)
    meta_path = _meta_path(path)
    if not path.is_file():
        raise FileNotFoundError(f"recording not found: {path}")
    if not meta_path.is_file():
        raise FileNotFoundError(f"metadata sidecar not found: {meta_path}")
    try:
        meta = json.loads(meta_path.read_text())
        fs = float(meta["fs"])
        channels = tuple(ChannelMeta(c["name"], c.get("pos2d")) for c in meta["channels"])
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"unparsable metadata {meta_path}: {exc}") from exc
    if not math.isfinite(fs) or fs <= 0:
        raise ValidationError("invalid sampling rate")

    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
        if header is None:
            raise ValidationError(f"empty recording file: {path}")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ValidationError(f"unparsable recording {path}: {exc}") from exc
    if len(header) != len(channels) or (data.size and data.shape[1] != len(channels)):
        raise ValidationError(
            f"channel-count mismatch: CSV has {len(header)} columns, "
            f"metadata lists {len(channels)} channels")
    names = [c.name for c in channels]
    if sorted(header) != sorted(names):
        raise ValidationError("CSV header does not match metadata channel names")
    if header != names:
        data = data[:, [header.index(n) for n in names]]
    return Recording(fs, channels, data)


def write_events(events: EventList, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVENT_COLUMNS)
        for ch, s, label in events.entries:
            writer.writerow((ch, s, "" if label is None else label))


def read_events(path, rec: Optional[Recording] = None) -> EventList:
    """Read an event CSV; rows come back sorted.  Validated against ``rec`` if given."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"event file not found: {path}")
    entries = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return EventList()
        if tuple(h.strip() for h in header) != EVENT_COLUMNS:
            raise ValidationError(f"event file header must be {','.join(EVENT_COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                ch, s = int(row[0]), int(row[1])
            except (ValueError, IndexError) as exc:
                raise ValidationError(f"{path}:{lineno}: bad event row {row!r}") from exc
            entries.append((ch, s, row[2] if len(row) > 2 and row[2] != "" else None))
    events = EventList(tuple(entries))
    return events.validate(rec) if rec is not None else events
