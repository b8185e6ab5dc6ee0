"""Reference paths that validate the main pipeline.

* a similarity-weighted nearest-neighbor vote over the labeled store,
* the harmonic solution on the full, unquantized graph of everything seen,
* a Monte-Carlo absorbing-random-walk estimator for single-vertex scores,
* a decomposition of the streaming squared error into the offline-solution,
  online-learning and quantization terms.

These are desk-scale tools: the full-graph solve recomputes per prefix and is
capped, and walk counts in the millions are only fast on the compiled
backend.
"""

from dataclasses import dataclass, field

import numpy as np

from .backend import get_kernels
from .learner import OnlineLearner
from .metric import EuclideanMetric
from .solver import ABSTAIN, DEFAULT_ABSTAIN_TOL, HarmonicSolution, build_graph, classify, label_matrix, solve


class OracleCapError(ValueError):
    """Input exceeds the desk-scale safety cap of an oracle."""


class WalkCutoffError(RuntimeError):
    """A walk exceeded the step budget (possible when gamma = 0)."""


def nn_classify(x, labeled_x, labeled_y, metric, params):
    """Similarity-weighted vote over labeled examples within the epsilon radius.

    Returns the class with the largest summed similarity among labeled
    examples whose similarity is at least epsilon, ties to the lowest class
    id; ABSTAIN when no labeled example is within reach.
    """
    labeled_y = list(labeled_y)
    if not labeled_y:
        return ABSTAIN
    labeled_x = np.atleast_2d(np.asarray(labeled_x, dtype=float))
    x = np.asarray(x, dtype=float)
    d_sq = metric.rowwise_sq(x, labeled_x)
    w = np.exp(-d_sq / (2.0 * params.sigma**2))
    w = np.where(w >= params.epsilon, w, 0.0)
    classes = sorted(set(labeled_y))
    votes = np.zeros(len(classes))
    for j, c in enumerate(classes):
        votes[j] = w[[i for i, y in enumerate(labeled_y) if y == c]].sum()
    if not votes.any():
        return ABSTAIN
    return classes[int(np.argmax(votes))]


@dataclass
class FullSolveResult:
    """Full-graph harmonic solution, addressable by original stream position."""

    classes: tuple
    solution: HarmonicSolution
    labeled_positions: np.ndarray
    unlabeled_positions: np.ndarray
    targets: np.ndarray  # one-vs-all rows for the labeled positions

    def _row(self, position):
        hit = np.flatnonzero(self.unlabeled_positions == position)
        if hit.size:
            return self.solution.scores[hit[0]]
        hit = np.flatnonzero(self.labeled_positions == position)
        if hit.size:
            return self.targets[hit[0]]
        raise KeyError(f"position {position} not in the solved set")

    def binary_score(self, position):
        """Signed score; labeled positions return their pinned +-1 target."""
        if len(self.classes) > 2:
            raise ValueError("binary scores are undefined for more than 2 classes")
        return float(self._row(position)[-1]) if self.classes else 0.0

    def classify_at(self, position):
        hit = np.flatnonzero(self.unlabeled_positions == position)
        if hit.size:
            return classify(self.solution, int(hit[0]))
        row = self._row(position)
        return self.classes[int(np.argmax(row))], 1.0


def full_graph_solve(X, y, metric, params, gamma, classes=None,
                     max_vertices=2000, abstain_tol=DEFAULT_ABSTAIN_TOL):
    """Harmonic solution on the unquantized graph of all examples seen so far.

    ``y`` holds a class id per row of X, None where unlabeled.  With no
    labeled example every score is zero (no boundary).  ``classes`` fixes the
    column order so scores from different prefixes are comparable.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    if n > max_vertices:
        raise OracleCapError(f"{n} vertices exceed the oracle cap {max_vertices}")
    y = list(y)
    if len(y) != n:
        raise ValueError("y must have one entry (or None) per example")

    labeled_pos = np.array([i for i, label in enumerate(y) if label is not None], dtype=np.int64)
    unlabeled_pos = np.array([i for i, label in enumerate(y) if label is None], dtype=np.int64)
    labels = [y[i] for i in labeled_pos]

    if classes is None:
        classes = tuple(sorted(set(labels)))
    if labeled_pos.size == 0:
        k = max(len(classes), 1)
        empty = HarmonicSolution(tuple(classes), np.zeros((n, k)), abstain_tol,
                                 isolated=np.ones(n, dtype=bool))
        return FullSolveResult(tuple(classes), empty, labeled_pos, unlabeled_pos,
                               np.zeros((0, k)))

    graph = build_graph(X[labeled_pos], X[unlabeled_pos] if unlabeled_pos.size else None,
                        None, metric, params)
    solution = solve(graph, labels, gamma, classes=list(classes), abstain_tol=abstain_tol)
    targets, _ = label_matrix(labels, list(classes))
    return FullSolveResult(tuple(classes), solution, labeled_pos, unlabeled_pos, targets)


def mc_walk_estimate(graph, labeled_values, gamma, start, n_walks, seed,
                     max_steps=100_000, backend="auto"):
    """Monte-Carlo estimate of one vertex's harmonic score.

    Walks move from vertex i to j with probability w_ij / (d_i + s_i) and
    terminate at the sink (value 0) with probability s_i / (d_i + s_i),
    where the weights, degrees and sink masses s_i = gamma * v_i are those of
    the multiplicity-weighted graph.  Reaching a labeled vertex stops the
    walk with that vertex's value.  Returns (mean, standard error).

    With gamma = 0 a walk may never reach a label; exceeding ``max_steps``
    raises WalkCutoffError.
    """
    if n_walks < 1:
        raise ValueError("n_walks must be >= 1")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    n = graph.n_vertices
    if not 0 <= start < n:
        raise ValueError("start vertex out of range")

    n_l = graph.n_labeled
    labeled_values = np.asarray(labeled_values, dtype=float)
    if labeled_values.shape != (n_l,):
        raise ValueError("labeled_values must have one value per labeled vertex")

    weighted = graph.weighted()
    sink_mass = gamma * graph.multiplicities.astype(float)
    denom = weighted.sum(axis=1) + sink_mass

    outcome = np.zeros((n, n + 1))
    live = denom > 0
    outcome[live, :n] = weighted[live] / denom[live, None]
    outcome[live, n] = sink_mass[live] / denom[live]
    dead = np.flatnonzero(~live)
    outcome[dead, dead] = 1.0   # stuck vertices loop until the step cutoff

    cdf = np.cumsum(outcome, axis=1)
    absorbing = np.zeros(n, dtype=np.uint8)
    absorbing[:n_l] = 1
    values = np.zeros(n)
    values[:n_l] = labeled_values

    kernels = get_kernels(backend)
    total, total_sq, completed = kernels.absorbing_walks(
        np.ascontiguousarray(cdf), absorbing, values, int(start), int(n_walks),
        int(seed) & 0xFFFFFFFFFFFFFFFF, int(max_steps))
    if not completed:
        raise WalkCutoffError(
            f"a walk exceeded {max_steps} steps without reaching a label; "
            "the graph may have no labeled vertex reachable at gamma = 0")

    n_walks = int(n_walks)
    mean = total / n_walks
    if n_walks == 1:
        return mean, 0.0
    var = max(total_sq - n_walks * mean * mean, 0.0) / (n_walks - 1)
    return mean, float(np.sqrt(var / n_walks))


@dataclass
class RegretReport:
    """Streaming squared error split into its three sources.

    ``total_lhs`` is the mean squared prediction error of the online learner;
    the three terms bound it (scaled by 9/2) via the offline full-graph
    solution, the per-prefix online solution and the quantized solution.
    """

    term_hfs: float
    term_online: float
    term_quant: float
    total_lhs: float
    sq_hfs: list = field(repr=False, default_factory=list)
    sq_online: list = field(repr=False, default_factory=list)
    sq_quant: list = field(repr=False, default_factory=list)
    sq_total: list = field(repr=False, default_factory=list)
    n_steps: int = 0

    @property
    def bound_holds(self):
        return self.total_lhs <= self.term_hfs + self.term_online + self.term_quant

    def to_dict(self):
        return {
            "term_hfs": self.term_hfs,
            "term_online": self.term_online,
            "term_quant": self.term_quant,
            "total_lhs": self.total_lhs,
            "bound_holds": bool(self.bound_holds),
            "n_steps": self.n_steps,
            "per_step": {
                "sq_hfs": list(self.sq_hfs),
                "sq_online": list(self.sq_online),
                "sq_quant": list(self.sq_quant),
                "sq_total": list(self.sq_total),
            },
        }


def _signed(record, classes):
    """Reconstruct the global signed score from a prediction record."""
    if record.prediction is ABSTAIN:
        return 0.0
    if record.prediction == classes[-1]:
        return record.confidence
    return -record.confidence


def regret_decompose(stream, params, metric=None, max_stream=500):
    """Run the learner and the full-graph oracles over a binary stream.

    Every record must carry a ground-truth label (used for evaluation; only
    records flagged supervised reveal it to the learner).  Returns the three
    error terms of the decomposition, their per-step squared trajectories and
    the learner's mean squared error.
    """
    stream = list(stream)
    n = len(stream)
    if n == 0:
        raise ValueError("empty stream")
    if n > max_stream:
        raise OracleCapError(f"stream length {n} exceeds the oracle cap {max_stream}")
    for rec in stream:
        if rec.true_label is None:
            raise ValueError(f"record {rec.frame_id} is missing its ground-truth label")

    classes = tuple(sorted({rec.true_label for rec in stream}))
    if len(classes) > 2:
        raise ValueError("the regret decomposition is defined for binary streams")
    encode = {c: (1.0 if c == classes[-1] else -1.0) for c in classes}

    metric = metric if metric is not None else EuclideanMetric()
    learner = OnlineLearner(params, metric=metric)
    gamma = params.effective_gamma

    X = np.vstack([rec.features for rec in stream])
    revealed = [None] * n

    quantized_scores = np.zeros(n)
    online_scores = np.zeros(n)
    for t, rec in enumerate(stream):
        prefix_y = list(revealed[:t]) + [None]
        prefix = full_graph_solve(X[:t + 1], prefix_y, metric, params.kernel,
                                  gamma, classes=classes, max_vertices=max_stream + 1)
        online_scores[t] = prefix.binary_score(t)
        if rec.supervised:
            record = learner.step_supervised(rec.features, rec.true_label)
            revealed[t] = rec.true_label
        else:
            record = learner.step(rec.features)
        quantized_scores[t] = _signed(record, classes)

    final = full_graph_solve(X, revealed, metric, params.kernel, gamma,
                             classes=classes, max_vertices=max_stream + 1)
    offline_scores = np.array([final.binary_score(t) for t in range(n)])
    truth = np.array([encode[rec.true_label] for rec in stream])

    sq_hfs = (offline_scores - truth) ** 2
    sq_online = (online_scores - offline_scores) ** 2
    sq_quant = (quantized_scores - online_scores) ** 2
    sq_total = (quantized_scores - truth) ** 2

    scale = 9.0 / (2.0 * n)
    return RegretReport(
        term_hfs=float(scale * sq_hfs.sum()),
        term_online=float(scale * sq_online.sum()),
        term_quant=float(scale * sq_quant.sum()),
        total_lhs=float(sq_total.mean()),
        sq_hfs=sq_hfs.tolist(),
        sq_online=sq_online.tolist(),
        sq_quant=sq_quant.tolist(),
        sq_total=sq_total.tolist(),
        n_steps=n,
    )
