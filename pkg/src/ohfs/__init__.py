"""Streaming semi-supervised classification on a quantized adjacency graph.

The learner keeps a budgeted set of representative vertices with
multiplicities, scores every incoming example through a regularized harmonic
labeling of the graph over labeled examples plus representatives, abstains on
outliers, and folds non-outliers back into the representation.  Oracle
modules (full-graph solve, Monte-Carlo walks, error decomposition) and an
evaluation harness verify the pipeline end to end.
"""

from .backend import active_backend, available_backends, get_kernels
from .evaluate import EvalReport, evaluate, sweep
from .learner import (
    LearnerParams,
    OnlineLearner,
    PredictionRecord,
    SnapshotCorruptError,
    SnapshotError,
    SnapshotVersionError,
    run_stream,
)
from .metric import (
    EuclideanMetric,
    FaceMetric,
    KernelParams,
    ZeroMeanWarning,
    face_distance,
    radial_center_weights,
    similarity,
    sparsify,
    uniform_weights,
    weighted_l2,
)
from .oracles import (
    FullSolveResult,
    OracleCapError,
    RegretReport,
    WalkCutoffError,
    full_graph_solve,
    mc_walk_estimate,
    nn_classify,
    regret_decompose,
)
from .quantizer import (
    AssignmentOutcome,
    CoverageTracker,
    RepresentativeSet,
    coverage_audit,
)
from .solver import (
    ABSTAIN,
    HarmonicSolution,
    QuantizedGraph,
    SingularSystemError,
    build_graph,
    classify,
    expand_equivalence_check,
    label_matrix,
    solve,
)
from .streams import (
    DriftStreamSpec,
    StreamFormatError,
    StreamRecord,
    generate_drift_stream,
    load_stream,
    save_stream,
)

__version__ = "0.1.0"
