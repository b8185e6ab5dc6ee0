"""Per-step orchestration: ingest, score, predict or abstain, quantize.

Each incoming example is scored as its own temporary vertex on the graph of
labeled examples plus current representatives, so the prediction never
depends on the example's own insertion.  Outliers (no surviving edge into
the graph, or a numerically zero score) produce an abstention and leave the
quantizer untouched; everything else is handed to the quantizer afterwards.

Labeled examples never enter the quantizer and do not count against the
vertex budget.
"""

import struct
import time
from dataclasses import dataclass

import numpy as np

from .metric import EuclideanMetric, FaceMetric, KernelParams
from .quantizer import RepresentativeSet
from .solver import ABSTAIN, DEFAULT_ABSTAIN_TOL, build_graph, classify, solve

SNAPSHOT_MAGIC = b"OHFS"
SNAPSHOT_VERSION = 1


class SnapshotError(ValueError):
    """Base class for snapshot restore failures."""


class SnapshotVersionError(SnapshotError):
    pass


class SnapshotCorruptError(SnapshotError):
    pass


@dataclass(frozen=True)
class LearnerParams:
    """Kernel, regularization and budget configuration.

    ``gamma`` defaults to ten times epsilon when left unset: the larger the
    neighborhoods we extrapolate into, the smaller the penalty for doing so.
    """

    sigma: float = 0.025
    epsilon: float = 1e-5
    budget: int = 500
    gamma: float = None
    abstain_tol: float = DEFAULT_ABSTAIN_TOL

    def __post_init__(self):
        KernelParams(self.sigma, self.epsilon)  # validates ranges
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.gamma is not None and self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    @property
    def effective_gamma(self):
        return 10.0 * self.epsilon if self.gamma is None else self.gamma

    @property
    def kernel(self):
        return KernelParams(self.sigma, self.epsilon)


@dataclass(frozen=True)
class PredictionRecord:
    """One step's outcome.  An outlier always implies an abstention."""

    step: int
    prediction: object
    confidence: float
    score: float
    outlier: bool
    solve_seconds: float
    graph_size: int


class OnlineLearner:
    """Streaming semi-supervised classifier over a quantized graph."""

    def __init__(self, params, metric=None, dim=None):
        self.params = params
        self.metric = metric if metric is not None else EuclideanMetric()
        self.dim = dim
        self.quantizer = RepresentativeSet(params.budget, self.metric)
        self._labeled_x = []
        self._labeled_y = []
        self.t = 0

    @property
    def labeled_x(self):
        if not self._labeled_x:
            return np.empty((0, self.dim or 0))
        return np.vstack(self._labeled_x)

    @property
    def labeled_y(self):
        return list(self._labeled_y)

    @property
    def classes(self):
        return sorted(set(self._labeled_y))

    def _check(self, x):
        x = np.ascontiguousarray(x, dtype=float)
        if x.ndim != 1:
            raise ValueError("expected a 1-d feature vector")
        if self.dim is None:
            self.dim = x.shape[0]
        elif x.shape[0] != self.dim:
            raise ValueError(f"expected dimension {self.dim}, got {x.shape[0]}")
        if not np.isfinite(x).all():
            raise ValueError("feature vector must be finite")
        return x

    def add_labeled(self, x, y):
        """Store a labeled example; it is pinned in every later solve."""
        x = self._check(x)
        self._labeled_x.append(x)
        self._labeled_y.append(y)

    def _score_candidate(self, x):
        """Solve with x as a temporary unlabeled vertex; returns the record
        ingredients (prediction, confidence, signed score, outlier flag,
        graph size)."""
        n_l = len(self._labeled_x)
        k = len(self.quantizer)
        graph_size = n_l + k + 1

        if n_l == 0:
            # no boundary yet: abstain, and judge outlierness by edges alone
            if k == 0:
                return ABSTAIN, 0.0, 0.0, False, graph_size
            d_sq = self.metric.rowwise_sq(x, self.quantizer.centers)
            w = np.exp(-d_sq / (2.0 * self.params.sigma**2))
            connected = (w >= self.params.epsilon).any() if self.params.epsilon > 0 else True
            return ABSTAIN, 0.0, 0.0, not connected, graph_size

        unlabeled = np.vstack([self.quantizer.centers, x[None, :]]) if k else x[None, :]
        mult = np.concatenate([self.quantizer.multiplicities, [1]])
        graph = build_graph(self.labeled_x, unlabeled, mult, self.metric, self.params.kernel)
        solution = solve(graph, self._labeled_y, self.params.effective_gamma,
                         abstain_tol=self.params.abstain_tol)

        target = graph.n_unlabeled - 1
        row = solution.scores[target]
        connected = graph.weights[graph.n_labeled + target].any()
        outlier = (not connected) or np.abs(row).max() < self.params.abstain_tol

        if len(solution.classes) <= 2:
            signed = float(solution.binary_scores[target])
        else:
            signed = float(row.max())

        if outlier:
            return ABSTAIN, 0.0, signed, True, graph_size
        label, confidence = classify(solution, target)
        return label, confidence, signed, False, graph_size

    def step(self, x):
        """Score one unlabeled example, then quantize it unless it is an outlier."""
        x = self._check(x)
        t0 = time.perf_counter()
        label, confidence, signed, outlier, graph_size = self._score_candidate(x)
        elapsed = time.perf_counter() - t0
        if not outlier:
            self.quantizer.observe(x)
        self.t += 1
        return PredictionRecord(self.t, label, confidence, signed, outlier,
                                elapsed, graph_size)

    def step_supervised(self, x, y):
        """Score one example as if unlabeled, then reveal its label.

        The example joins the labeled store (never the quantizer), so this is
        the test-then-train path for supervised stream records.
        """
        x = self._check(x)
        t0 = time.perf_counter()
        label, confidence, signed, outlier, graph_size = self._score_candidate(x)
        elapsed = time.perf_counter() - t0
        self.add_labeled(x, y)
        self.t += 1
        return PredictionRecord(self.t, label, confidence, signed, outlier,
                                elapsed, graph_size)

    # --- snapshot / restore -------------------------------------------------

    def snapshot(self):
        """Serialize the full state: versioned, little-endian, length-prefixed."""
        out = bytearray()
        out += SNAPSHOT_MAGIC
        out += struct.pack("<I", SNAPSHOT_VERSION)
        dim = self.dim or 0
        out += struct.pack("<I", dim)
        params = self.params
        has_gamma = params.gamma is not None
        out += struct.pack("<dddB", params.sigma, params.epsilon,
                           params.gamma if has_gamma else 0.0, has_gamma)
        out += struct.pack("<Id", params.budget, params.abstain_tol)

        if isinstance(self.metric, FaceMetric):
            out += struct.pack("<B", 1)
            psi = self.metric.weights
            if psi is None:
                out += struct.pack("<I", 0)
            else:
                out += struct.pack("<I", psi.shape[0])
                out += psi.astype("<f8").tobytes()
        else:
            out += struct.pack("<B", 0)

        out += struct.pack("<Qd", self.t, self.quantizer.radius)

        out += struct.pack("<I", len(self._labeled_x))
        for vec, y in zip(self._labeled_x, self._labeled_y):
            out += struct.pack("<q", int(y))
            out += vec.astype("<f8").tobytes()

        out += struct.pack("<I", len(self.quantizer))
        for vec, m in zip(self.quantizer._centers, self.quantizer._multiplicities):
            out += struct.pack("<Q", int(m))
            out += vec.astype("<f8").tobytes()
        return bytes(out)

    @classmethod
    def restore(cls, payload):
        """Rebuild a learner whose future outputs match the snapshotted one."""
        reader = _Reader(payload)
        if reader.take(4) != SNAPSHOT_MAGIC:
            raise SnapshotCorruptError("bad magic bytes")
        (version,) = reader.unpack("<I")
        if version != SNAPSHOT_VERSION:
            raise SnapshotVersionError(f"unsupported snapshot version {version}")
        (dim,) = reader.unpack("<I")
        sigma, epsilon, gamma, has_gamma = reader.unpack("<dddB")
        budget, abstain_tol = reader.unpack("<Id")
        params = LearnerParams(sigma, epsilon, budget,
                               gamma if has_gamma else None, abstain_tol)

        (metric_kind,) = reader.unpack("<B")
        if metric_kind == 1:
            (n_psi,) = reader.unpack("<I")
            psi = reader.vector(n_psi) if n_psi else None
            metric = FaceMetric(psi)
        elif metric_kind == 0:
            metric = EuclideanMetric()
        else:
            raise SnapshotCorruptError(f"unknown metric kind {metric_kind}")

        t, radius = reader.unpack("<Qd")
        learner = cls(params, metric=metric, dim=dim or None)
        learner.t = int(t)
        learner.quantizer.radius = float(radius)

        (n_labeled,) = reader.unpack("<I")
        for _ in range(n_labeled):
            (y,) = reader.unpack("<q")
            learner._labeled_x.append(reader.vector(dim))
            learner._labeled_y.append(int(y))

        (n_centers,) = reader.unpack("<I")
        for _ in range(n_centers):
            (m,) = reader.unpack("<Q")
            learner.quantizer._centers.append(reader.vector(dim))
            learner.quantizer._multiplicities.append(int(m))
        reader.expect_end()
        return learner


def run_stream(learner, records):
    """Feed a stream through a learner, test-then-train.

    Every record is scored first; supervised records then reveal their label
    (and never touch the quantizer).  Returns one PredictionRecord per input.
    """
    out = []
    for rec in records:
        if rec.supervised:
            out.append(learner.step_supervised(rec.features, rec.true_label))
        else:
            out.append(learner.step(rec.features))
    return out


class _Reader:
    def __init__(self, payload):
        if not isinstance(payload, (bytes, bytearray, memoryview)):
            raise SnapshotCorruptError("snapshot payload must be bytes")
        self.buf = bytes(payload)
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise SnapshotCorruptError("truncated snapshot payload")
        chunk = self.buf[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def vector(self, dim):
        raw = self.take(8 * dim)
        return np.frombuffer(raw, dtype="<f8").astype(float)

    def expect_end(self):
        if self.pos != len(self.buf):
            raise SnapshotCorruptError("trailing bytes after snapshot payload")
