"""Stream records, the text stream format, and synthetic drift streams.

The on-disk format is deliberately plain text so fixtures stay inspectable:

    #ohfs-stream v1 d=<dim> k=<classes>
    frame_id,label_or_?,supervised_flag,feat_1,...,feat_d

``?`` marks unknown ground truth (e.g. injected outliers).  Floats are
written with repr precision, so a write/load round trip reproduces records
exactly.
"""

import re
from dataclasses import dataclass

import numpy as np

HEADER_RE = re.compile(r"#ohfs-stream v1 d=(\d+) k=(\d+)\s*$")


class StreamFormatError(ValueError):
    """Malformed stream file; the message carries the 1-based line number."""


@dataclass
class StreamRecord:
    """One frame's feature vector with optional truth and supervision flag."""

    frame_id: int
    features: np.ndarray
    true_label: int = None
    supervised: bool = False

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.frame_id < 0:
            raise ValueError("frame_id must be non-negative")
        if self.supervised and self.true_label is None:
            raise ValueError("supervised records must carry a label")


def save_stream(path, records, n_classes=None):
    records = list(records)
    if n_classes is None:
        n_classes = len({r.true_label for r in records if r.true_label is not None})
    dim = records[0].features.shape[0] if records else 0
    with open(path, "w") as fh:
        fh.write(f"#ohfs-stream v1 d={dim} k={n_classes}\n")
        for rec in records:
            label = "?" if rec.true_label is None else str(int(rec.true_label))
            feats = ",".join(repr(float(v)) for v in rec.features)
            fh.write(f"{rec.frame_id},{label},{int(rec.supervised)},{feats}\n")


def load_stream(path):
    """Parse a stream file; raises StreamFormatError with the offending line."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        return []
    match = HEADER_RE.match(lines[0])
    if match is None:
        raise StreamFormatError(f"line 1: missing or malformed #ohfs-stream header")
    dim = int(match.group(1))

    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3 + dim:
            raise StreamFormatError(
                f"line {lineno}: expected {3 + dim} fields for d={dim}, got {len(parts)}")
        try:
            frame_id = int(parts[0])
            label = None if parts[1] == "?" else int(parts[1])
            supervised = bool(int(parts[2]))
            feats = np.array([float(v) for v in parts[3:]])
        except ValueError as exc:
            raise StreamFormatError(f"line {lineno}: {exc}") from None
        if not np.isfinite(feats).all():
            raise StreamFormatError(f"line {lineno}: non-finite feature value")
        try:
            records.append(StreamRecord(frame_id, feats, label, supervised))
        except ValueError as exc:
            raise StreamFormatError(f"line {lineno}: {exc}") from None
    return records


@dataclass(frozen=True)
class DriftStreamSpec:
    """Synthetic stream: drifting class clusters plus injected far outliers.

    ``drift`` is one of 'none', 'rotate' (class means precess around the
    origin), 'shift' (means translate steadily) or 'relocate' (means jump at
    segment boundaries).  The first ``labeled_per_class`` records of each
    class open the stream and are flagged supervised; outliers are placed
    ``outlier_distance`` from the origin with unknown truth.
    """

    n: int
    n_classes: int = 2
    drift: str = "relocate"
    noise: float = 0.15
    outlier_fraction: float = 0.0
    seed: int = 0
    dim: int = 2
    labeled_per_class: int = 2
    segments: int = 2
    separation: float = 2.0
    drift_magnitude: float = 2.0
    outlier_distance: float = 50.0

    def __post_init__(self):
        if self.n < 1 or self.n_classes < 1 or self.dim < 2:
            raise ValueError("need n >= 1, n_classes >= 1, dim >= 2")
        if self.drift not in ("none", "rotate", "shift", "relocate"):
            raise ValueError(f"unknown drift kind {self.drift!r}")
        if not 0 <= self.outlier_fraction < 1:
            raise ValueError("outlier_fraction must be in [0, 1)")
        if self.segments < 1:
            raise ValueError("segments must be >= 1")


def _class_directions(spec, rng):
    if spec.dim == 2:
        angles = 2.0 * np.pi * np.arange(spec.n_classes) / max(spec.n_classes, 1)
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    raw = rng.standard_normal((spec.dim, max(spec.n_classes, 2)))
    q, _ = np.linalg.qr(raw)
    return q[:, : spec.n_classes].T


def _mean_at(spec, directions, drift_dir, cls, t):
    base = spec.separation * directions[cls]
    frac = t / max(spec.n - 1, 1)
    if spec.drift == "rotate":
        angle = 2.0 * np.pi * spec.drift_magnitude * frac
        rotated = base.copy()
        c, s = np.cos(angle), np.sin(angle)
        rotated[0] = c * base[0] - s * base[1]
        rotated[1] = s * base[0] + c * base[1]
        return rotated
    if spec.drift == "shift":
        return base + spec.drift_magnitude * frac * drift_dir
    if spec.drift == "relocate":
        segment = min(int(t * spec.segments / spec.n), spec.segments - 1)
        return base + spec.drift_magnitude * segment * drift_dir
    return base


def generate_drift_stream(spec):
    """Deterministic synthetic stream; returns (records, supervised seed set)."""
    rng = np.random.default_rng(spec.seed)
    directions = _class_directions(spec, rng)
    drift_raw = rng.standard_normal(spec.dim)
    drift_dir = drift_raw / np.linalg.norm(drift_raw)

    prefix = spec.labeled_per_class * spec.n_classes
    records = []
    for t in range(spec.n):
        if t < prefix:
            cls = t % spec.n_classes
            mean = _mean_at(spec, directions, drift_dir, cls, t)
            x = mean + spec.noise * rng.standard_normal(spec.dim)
            records.append(StreamRecord(t, x, cls, supervised=True))
            continue
        if spec.outlier_fraction > 0 and rng.random() < spec.outlier_fraction:
            direction = rng.standard_normal(spec.dim)
            direction /= np.linalg.norm(direction)
            x = spec.outlier_distance * (1.0 + rng.random()) * direction
            records.append(StreamRecord(t, x, None, supervised=False))
            continue
        cls = int(rng.integers(spec.n_classes))
        mean = _mean_at(spec, directions, drift_dir, cls, t)
        x = mean + spec.noise * rng.standard_normal(spec.dim)
        records.append(StreamRecord(t, x, cls, supervised=False))
    seeds = [r for r in records if r.supervised]
    return records, seeds
