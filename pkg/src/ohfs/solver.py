"""Graph assembly and the regularized harmonic labeling on it.

The graph spans the labeled examples plus the quantized representatives,
with Gaussian similarities thresholded at epsilon.  Multiplicities enter
through the multiplicity-weighted matrix ``V W V``: merging identical
vertices sums their edge conductances, so solving on the compact graph with
the multiplicity-scaled sink term reproduces the solution on the expanded
graph exactly (``expand_equivalence_check`` verifies this).

For each class column, the solver factorizes the SPD system

    (L_uu + gamma * V_uu) s_u = W_ul y_l       (all on the weighted matrix)

where L is the Laplacian.  The sink rate gamma damps extrapolation: a random
walk started at an unlabeled vertex terminates at the sink (score 0) with
probability gamma * v_i / (d_i + gamma * v_i) at each hop.  Structurally
disconnected vertices get score exactly 0, which is the abstention signal.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse import csgraph, csr_matrix

from .metric import similarity, sparsify

DEFAULT_ABSTAIN_TOL = 1e-12


class _AbstainType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ABSTAIN"

    def __reduce__(self):
        return (_AbstainType, ())


ABSTAIN = _AbstainType()


class SingularSystemError(np.linalg.LinAlgError):
    """gamma = 0 with an unlabeled component that no labeled vertex reaches."""

    def __init__(self, component):
        self.component = tuple(int(i) for i in component)
        super().__init__(
            "singular harmonic system: unlabeled component "
            f"{self.component} is disconnected from every labeled vertex "
            "and gamma is 0"
        )


class ExpansionCapError(ValueError):
    """Expanded graph would exceed the safety cap."""


@dataclass
class QuantizedGraph:
    """Symmetric similarity matrix with vertex multiplicities.

    Vertices are ordered labeled-first; ``weights`` has a zero diagonal and
    entries in {0} or [epsilon, 1].  Labeled vertices carry multiplicity 1.
    """

    weights: np.ndarray
    multiplicities: np.ndarray
    n_labeled: int

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.multiplicities = np.asarray(self.multiplicities, dtype=np.int64)
        n = self.weights.shape[0]
        if self.weights.shape != (n, n):
            raise ValueError("weights must be square")
        if self.multiplicities.shape != (n,):
            raise ValueError("multiplicities must match the vertex count")
        if (self.multiplicities < 1).any():
            raise ValueError("multiplicities must be positive integers")
        if not 0 <= self.n_labeled <= n:
            raise ValueError("labeled count out of range")
        if (np.diag(self.weights) != 0).any():
            raise ValueError("weights must have a zero diagonal")
        if not np.array_equal(self.weights, self.weights.T):
            raise ValueError("weights must be symmetric")

    @property
    def n_vertices(self):
        return self.weights.shape[0]

    @property
    def n_unlabeled(self):
        return self.n_vertices - self.n_labeled

    @property
    def labeled_index(self):
        return np.arange(self.n_labeled)

    @property
    def unlabeled_index(self):
        return np.arange(self.n_labeled, self.n_vertices)

    def weighted(self):
        """Multiplicity-weighted similarity matrix V W V."""
        v = self.multiplicities.astype(float)
        return self.weights * v[:, None] * v[None, :]


def build_graph(labeled_x, unlabeled_x, multiplicities, metric, params):
    """Assemble the quantized graph over labeled + representative vertices.

    Similarities come from the metric through the Gaussian kernel and are
    sparsified at epsilon; the diagonal is zeroed.  At least one labeled
    vertex is required, otherwise the system has no boundary to propagate
    labels from.
    """
    labeled_x = np.atleast_2d(np.asarray(labeled_x, dtype=float))
    if labeled_x.shape[0] == 0:
        raise ValueError("at least one labeled vertex is required")
    if unlabeled_x is None or np.size(unlabeled_x) == 0:
        unlabeled_x = np.empty((0, labeled_x.shape[1]))
    unlabeled_x = np.atleast_2d(np.asarray(unlabeled_x, dtype=float))

    n_l = labeled_x.shape[0]
    n_u = unlabeled_x.shape[0]
    if multiplicities is None:
        multiplicities = np.ones(n_u, dtype=np.int64)
    multiplicities = np.asarray(multiplicities, dtype=np.int64)
    if multiplicities.shape != (n_u,):
        raise ValueError("multiplicities must have one entry per unlabeled vertex")

    vertices = np.vstack([labeled_x, unlabeled_x]) if n_u else labeled_x
    d_sq = metric.pairwise_sq(vertices, vertices)
    np.fill_diagonal(d_sq, 0.0)
    weights = np.exp(-d_sq / (2.0 * params.sigma**2))
    weights = np.where(weights < params.epsilon, 0.0, weights)
    np.fill_diagonal(weights, 0.0)
    # pairwise_sq is symmetric up to fp noise in the BLAS path; make it exact
    weights = np.minimum(weights, weights.T)

    mult = np.concatenate([np.ones(n_l, dtype=np.int64), multiplicities])
    return QuantizedGraph(weights, mult, n_l)


def label_matrix(labels, classes=None):
    """+1/-1 one-vs-all target matrix, one column per class.

    For two classes the second column is the exact negation of the first,
    which reduces to the single signed column of the binary case.
    """
    labels = list(labels)
    if classes is None:
        classes = sorted(set(labels))
    classes = list(classes)
    if not classes:
        raise ValueError("no classes")
    index = {c: j for j, c in enumerate(classes)}
    mat = -np.ones((len(labels), len(classes)))
    for i, y in enumerate(labels):
        mat[i, index[y]] = 1.0
    return mat, tuple(classes)


@dataclass
class HarmonicSolution:
    """Per-class scores on the unlabeled vertices plus the decision rule."""

    classes: tuple
    scores: np.ndarray
    abstain_tol: float = DEFAULT_ABSTAIN_TOL
    isolated: np.ndarray = None

    @property
    def n_unlabeled(self):
        return self.scores.shape[0]

    @property
    def binary_scores(self):
        """Signed score per vertex; positive means the second (higher) class."""
        if len(self.classes) > 2:
            raise ValueError("binary scores are undefined for more than 2 classes")
        return self.scores[:, -1]

    @property
    def confidences(self):
        return np.abs(self.scores).max(axis=1)

    def classify(self, vertex):
        return classify(self, vertex)


def classify(solution, vertex):
    """Predicted class and confidence for one unlabeled vertex, or ABSTAIN.

    Binary: the sign of the score decides, its magnitude is the confidence,
    and a (numerically) zero score abstains -- that is the outlier signal of
    a disconnected vertex.  Multi-class: argmax of the one-vs-all scores,
    abstaining when no class is positive or all scores are numerically zero.
    """
    row = solution.scores[vertex]
    tol = solution.abstain_tol
    if len(solution.classes) <= 2:
        s = float(row[-1])
        if abs(s) < tol:
            return ABSTAIN, 0.0
        label = solution.classes[-1] if s > 0 else solution.classes[0]
        return label, min(abs(s), 1.0)
    if (row <= 0).all() or np.abs(row).max() < tol:
        return ABSTAIN, 0.0
    best = int(np.argmax(row))
    return solution.classes[best], min(float(row[best]), 1.0)


def _assert_solvable(weighted, n_labeled):
    # every unlabeled component must reach a labeled vertex when gamma = 0
    adj = csr_matrix(weighted > 0)
    n_comp, comp = csgraph.connected_components(adj, directed=False)
    for c in range(n_comp):
        members = np.flatnonzero(comp == c)
        if (members >= n_labeled).any() and not (members < n_labeled).any():
            raise SingularSystemError(members)


def solve(graph, labels, gamma, classes=None, abstain_tol=DEFAULT_ABSTAIN_TOL):
    """Regularized harmonic solution on a quantized graph.

    ``labels`` are class ids for the labeled vertices, in vertex order.  One
    SPD system is factorized and solved for all one-vs-all columns at once.
    Vertices with no surviving edge get score exactly 0.
    """
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    labels = list(labels)
    if len(labels) != graph.n_labeled:
        raise ValueError("labels must match the labeled vertex count")
    targets, classes = label_matrix(labels, classes)

    n_l = graph.n_labeled
    n_u = graph.n_unlabeled
    if n_u == 0:
        return HarmonicSolution(classes, np.zeros((0, len(classes))), abstain_tol,
                                isolated=np.zeros(0, dtype=bool))

    weighted = graph.weighted()
    v_u = graph.multiplicities[n_l:].astype(float)
    if gamma == 0:
        _assert_solvable(weighted, n_l)

    degrees = weighted.sum(axis=1)
    w_uu = weighted[n_l:, n_l:]
    w_ul = weighted[n_l:, :n_l]
    system = np.diag(degrees[n_l:] + gamma * v_u) - w_uu
    rhs = w_ul @ targets

    factor = scipy.linalg.cho_factor(system)
    scores = scipy.linalg.cho_solve(factor, rhs)

    isolated = degrees[n_l:] == 0.0
    scores[isolated] = 0.0
    return HarmonicSolution(classes, scores, abstain_tol, isolated=isolated)


def expand_equivalence_check(graph, labels, gamma, max_expanded=2000,
                             abstain_tol=DEFAULT_ABSTAIN_TOL):
    """Max |compact - expanded| over the representatives' scores.

    Expands every vertex into as many identical copies as its multiplicity
    (copies inherit the vertex's edges; no intra-group edges are needed),
    solves the plain solution with a per-copy sink on the expanded graph and
    compares it to the compact multiplicity-weighted solution.
    """
    counts = graph.multiplicities
    total = int(counts.sum())
    if total > max_expanded:
        raise ExpansionCapError(
            f"expanded graph has {total} vertices, cap is {max_expanded}"
        )

    compact = solve(graph, labels, gamma, abstain_tol=abstain_tol)

    # expanded vertex order: all labeled copies first, then unlabeled copies
    n_l = graph.n_labeled
    labeled_src = [i for i in range(n_l) for _ in range(counts[i])]
    unlabeled_src = [i for i in range(n_l, graph.n_vertices) for _ in range(counts[i])]
    src = np.array(labeled_src + unlabeled_src, dtype=np.int64)

    big = graph.weights[np.ix_(src, src)]
    same = src[:, None] == src[None, :]
    big[same] = 0.0   # copies of one vertex are not connected to each other

    expanded_labels = [labels[i] for i in labeled_src]
    expanded = QuantizedGraph(big, np.ones(len(src), dtype=np.int64), len(labeled_src))
    full = solve(expanded, expanded_labels, gamma, classes=compact.classes,
                 abstain_tol=abstain_tol)

    compact_rows = compact.scores[src[len(labeled_src):] - n_l]
    return float(np.abs(full.scores - compact_rows).max())
