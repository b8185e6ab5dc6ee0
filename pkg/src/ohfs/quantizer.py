"""Budgeted online quantization of the unlabeled stream.

Maintains at most ``budget`` representative points with multiplicities.  A
new point merges into the nearest representative strictly closer than the
current radius; otherwise it becomes a representative itself.  When the
budget overflows the radius doubles and the representatives are greedily
re-merged, which keeps every absorbed point within twice the radius of its
representative.

Representatives are always original data points, never averaged centroids,
so any symmetric non-negative dissimilarity with d(x, x) = 0 works here.
"""

from dataclasses import dataclass

import numpy as np

MERGED = "merged"
CREATED = "created"
REPARTITIONED = "repartitioned_then_assigned"


@dataclass(frozen=True)
class AssignmentOutcome:
    """What observe() did with a point.

    ``index`` is the representative the point ended up at, valid in the
    post-state.  ``remap`` maps pre-repartition indices to post-repartition
    ones when this step triggered a repartition, else None.
    """

    kind: str
    index: int
    remap: tuple | None = None


class RepresentativeSet:
    """Centers, multiplicities, current radius and the vertex budget."""

    def __init__(self, budget, metric, radius=0.0):
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.budget = int(budget)
        self.metric = metric
        self.radius = float(radius)
        self._centers = []
        self._multiplicities = []

    def __len__(self):
        return len(self._centers)

    @property
    def multiplicities(self):
        return np.array(self._multiplicities, dtype=np.int64)

    @property
    def centers(self):
        if not self._centers:
            return np.empty((0, 0))
        return np.vstack(self._centers)

    def total_mass(self):
        return int(sum(self._multiplicities))

    def copy(self):
        dup = RepresentativeSet(self.budget, self.metric, self.radius)
        dup._centers = [c.copy() for c in self._centers]
        dup._multiplicities = list(self._multiplicities)
        return dup

    def _distances_to(self, x):
        return self.metric.rowwise(x, self.centers)

    def _merge_target(self, x):
        # nearest center strictly within the radius; exact duplicates always
        # merge (the radius starts at 0, where d < R can never hold)
        if not self._centers:
            return None
        d = self._distances_to(x)
        eligible = (d < self.radius) | (d == 0.0)
        if not eligible.any():
            return None
        d = np.where(eligible, d, np.inf)
        return int(np.argmin(d))

    def observe(self, x):
        """Absorb one point; repartition first if the budget is overflowing."""
        x = np.ascontiguousarray(x, dtype=float)
        remap = None
        if len(self._centers) > self.budget:
            remap = self.repartition()
        target = self._merge_target(x)
        if target is None:
            self._centers.append(x)
            self._multiplicities.append(1)
            target = len(self._centers) - 1
            kind = CREATED
        else:
            self._multiplicities[target] += 1
            kind = MERGED
        if remap is not None:
            return AssignmentOutcome(REPARTITIONED, target, remap)
        return AssignmentOutcome(kind, target)

    def repartition(self):
        """Double the radius and greedily re-merge the centers.

        Earlier centers absorb later ones (nearest surviving center wins,
        ties to the lowest index).  Afterwards no two survivors are closer
        than the radius and every absorbed center was within the radius of
        its survivor.  Returns the old-index -> new-index mapping.

        The radius is seeded with the smallest pairwise center distance the
        first time around: doubling from the initial 0 would never enable a
        merge.
        """
        k = len(self._centers)
        if k < 2:
            self.radius *= 2.0
            return tuple(range(k))
        dist = np.sqrt(self.metric.pairwise_sq(self.centers, self.centers))
        if self.radius == 0.0:
            off_diag = ~np.eye(k, dtype=bool)
            self.radius = float(dist[off_diag].min())
        self.radius *= 2.0

        survivors = []          # indices into the old lists
        remap = [0] * k
        new_mult = []
        for i in range(k):
            absorbed = False
            if survivors:
                row = dist[i, survivors]
                close = row < self.radius
                if close.any():
                    j = int(np.argmin(np.where(close, row, np.inf)))
                    new_mult[j] += self._multiplicities[i]
                    remap[i] = j
                    absorbed = True
            if not absorbed:
                survivors.append(i)
                new_mult.append(self._multiplicities[i])
                remap[i] = len(survivors) - 1
        self._centers = [self._centers[s] for s in survivors]
        self._multiplicities = new_mult
        return tuple(remap)


def coverage_audit(points, assignments, rep_set):
    """Max distance from any absorbed point to its current representative.

    ``points`` and ``assignments`` track each absorbed point and the index of
    the representative currently covering it (see CoverageTracker).  The
    doubling guarantee puts this at most 2R.
    """
    if len(points) != len(assignments):
        raise ValueError("points and assignments differ in length")
    if not points:
        return 0.0
    stacked = np.vstack(points)
    assigned = np.asarray(assignments)
    centers = rep_set.centers
    worst = 0.0
    for idx in np.unique(assigned):
        group = stacked[assigned == idx]
        d_sq = rep_set.metric.rowwise_sq(centers[idx], group)
        worst = max(worst, float(np.sqrt(d_sq.max())))
    return worst


class CoverageTracker:
    """Feeds a RepresentativeSet while recording who represents each point."""

    def __init__(self, rep_set):
        self.rep_set = rep_set
        self.points = []
        self.assignments = []

    def observe(self, x):
        outcome = self.rep_set.observe(x)
        if outcome.remap is not None:
            self.assignments = [outcome.remap[a] for a in self.assignments]
        self.points.append(np.asarray(x, dtype=float))
        self.assignments.append(outcome.index)
        return outcome

    def audit(self):
        return coverage_audit(self.points, self.assignments, self.rep_set)
