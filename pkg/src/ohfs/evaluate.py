"""Per-frame precision/recall evaluation and report containers.

Statistics are computed per frame: a frame counts as predicted when at least
one of its records got a non-abstaining prediction, and a predicted frame is
correct only if all its non-abstaining predictions agree with each other and
with the frame's ground truth.  Conflicting predictions on one frame are
automatically incorrect.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .learner import OnlineLearner, run_stream
from .solver import ABSTAIN
from .streams import DriftStreamSpec, generate_drift_stream


@dataclass
class EvalReport:
    """Per-frame quality plus per-step latency statistics."""

    precision: float
    recall: float
    abstention_rate: float
    frames: int
    predicted_frames: int
    correct_frames: int
    truth_frames: int
    latency_mean: float = None
    latency_p95: float = None
    fps: float = None
    axis: str = None
    axis_value: float = None
    regret: dict = field(default=None, repr=False)

    @property
    def f1(self):
        if self.precision + self.recall == 0:
            return 0.0
        return 2.0 * self.precision * self.recall / (self.precision + self.recall)

    def to_dict(self):
        out = {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "abstention_rate": self.abstention_rate,
            "frames": self.frames,
            "predicted_frames": self.predicted_frames,
            "correct_frames": self.correct_frames,
            "truth_frames": self.truth_frames,
            "latency_mean": self.latency_mean,
            "latency_p95": self.latency_p95,
            "fps": self.fps,
        }
        if self.axis is not None:
            out["axis"] = self.axis
            out["axis_value"] = self.axis_value
        if self.regret is not None:
            out["regret"] = self.regret
        return out


def _prediction_of(entry):
    return getattr(entry, "prediction", entry)


def evaluate(stream, predictions, axis=None, axis_value=None):
    """Score aligned predictions against a stream, grouped by frame.

    ``predictions`` may be PredictionRecord objects (their solve times feed
    the latency statistics) or plain labels/ABSTAIN.  Empty denominators are
    reported as the vacuous 1.0 with the underlying counts exposed, except
    recall under all-abstention, which is 0 whenever any truth frame exists.
    """
    stream = list(stream)
    predictions = list(predictions)
    if len(stream) != len(predictions):
        raise ValueError(
            f"stream and predictions differ in length: {len(stream)} vs {len(predictions)}")

    frames = {}
    abstained = 0
    for rec, entry in zip(stream, predictions):
        label = _prediction_of(entry)
        if label is ABSTAIN:
            abstained += 1
        truths, preds = frames.setdefault(rec.frame_id, ([], []))
        if rec.true_label is not None:
            truths.append(rec.true_label)
        if label is not ABSTAIN:
            preds.append(label)

    predicted = correct = truth_frames = 0
    for truths, preds in frames.values():
        if truths:
            truth_frames += 1
        if not preds:
            continue
        predicted += 1
        agree = all(p == preds[0] for p in preds)
        if agree and len(set(truths)) == 1 and preds[0] == truths[0]:
            correct += 1

    precision = correct / predicted if predicted else 1.0
    recall = correct / truth_frames if truth_frames else 1.0

    latencies = [e.solve_seconds for e in predictions if hasattr(e, "solve_seconds")]
    latency_mean = latency_p95 = fps = None
    if latencies:
        latency_mean = float(np.mean(latencies))
        latency_p95 = float(np.percentile(latencies, 95))
        fps = 1.0 / latency_mean if latency_mean > 0 else None

    return EvalReport(
        precision=precision,
        recall=recall,
        abstention_rate=abstained / len(stream) if stream else 0.0,
        frames=len(frames),
        predicted_frames=predicted,
        correct_frames=correct,
        truth_frames=truth_frames,
        latency_mean=latency_mean,
        latency_p95=latency_p95,
        fps=fps,
        axis=axis,
        axis_value=axis_value,
    )


SWEEP_AXES = ("epsilon", "n_g")


def _materialize(stream):
    if isinstance(stream, DriftStreamSpec):
        records, _ = generate_drift_stream(stream)
        return records
    return list(stream)


def sweep(axis, values, stream, base_params, metric=None):
    """Independent evaluation runs along an epsilon or graph-budget grid.

    Each grid value gets a fresh learner over the same stream (a record list
    or a DriftStreamSpec, regenerated per run with its fixed seed).  On the
    epsilon axis, gamma keeps following 10 * epsilon unless the base
    parameters pin it explicitly.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")

    reports = []
    for value in values:
        if axis == "epsilon":
            params = replace(base_params, epsilon=float(value))
        else:
            params = replace(base_params, budget=int(value))
        records = _materialize(stream)
        learner = OnlineLearner(params, metric=metric)
        predictions = run_stream(learner, records)
        reports.append(evaluate(records, predictions, axis=axis, axis_value=value))
    return reports
