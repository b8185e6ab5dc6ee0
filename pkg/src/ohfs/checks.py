"""Randomized self-verification suites.

Three independent routes through the math are cross-checked on seeded random
instances: the compact multiplicity-weighted solve against brute-force vertex
expansion, the neighbor-averaging property of the unregularized solution, and
the Monte-Carlo absorbing-walk estimate against the closed form.  The CLI's
``oracle-check`` runs these; the acceptance tests assert on them.
"""

import time
from dataclasses import dataclass

import numpy as np

from .oracles import mc_walk_estimate
from .solver import QuantizedGraph, expand_equivalence_check, label_matrix, solve


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def random_quantized_graph(rng, max_vertices=12, max_multiplicity=5,
                           keep_connected=True, unit_multiplicities=False):
    """Random symmetric graph with 1-2 labeled vertices and a spanning tree.

    The spanning tree guarantees every vertex reaches a label; when
    ``keep_connected`` is False a few tree edges may be dropped (only safe
    with gamma > 0).  Returns (graph, labels) with labels in {-1, +1}.
    """
    n = int(rng.integers(4, max_vertices + 1))
    n_l = int(rng.integers(1, 3))
    weights = np.zeros((n, n))
    for i in range(1, n):
        j = int(rng.integers(0, i))
        weights[i, j] = weights[j, i] = rng.uniform(0.1, 1.0)
    extra = rng.random((n, n)) < 0.3
    for i in range(n):
        for j in range(i + 1, n):
            if extra[i, j] and weights[i, j] == 0.0:
                weights[i, j] = weights[j, i] = rng.uniform(0.1, 1.0)
    if not keep_connected and n > 5:
        drop = int(rng.integers(0, 2))
        for _ in range(drop):
            i = int(rng.integers(1, n))
            weights[i, :] = 0.0
            weights[:, i] = 0.0

    if unit_multiplicities:
        mult = np.ones(n, dtype=np.int64)
    else:
        mult = rng.integers(1, max_multiplicity + 1, size=n).astype(np.int64)
        mult[:n_l] = 1
    labels = [1] if n_l == 1 else [1, -1]
    return QuantizedGraph(weights, mult, n_l), labels


def proposition_exactness_suite(n_graphs=200, seed=1337, tol=1e-10):
    """Compact solve vs. brute-force expanded solve on random instances."""
    rng = np.random.default_rng(seed)
    gammas = [0.0, 0.1, 1.0]
    start = time.perf_counter()
    worst = 0.0
    for i in range(n_graphs):
        gamma = gammas[i % len(gammas)]
        graph, labels = random_quantized_graph(rng, keep_connected=(gamma == 0.0))
        worst = max(worst, expand_equivalence_check(graph, labels, gamma))
    elapsed = time.perf_counter() - start
    return SuiteResult(
        "compact-vs-expanded", worst <= tol,
        f"max |compact - expanded| = {worst:.3e} over {n_graphs} graphs (tol {tol:g})",
        elapsed)


def harmonic_property_suite(n_graphs=100, seed=2024, tol=1e-8):
    """Each unregularized score equals its neighbors' weighted average."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(n_graphs):
        graph, labels = random_quantized_graph(rng, keep_connected=True,
                                               unit_multiplicities=True)
        solution = solve(graph, labels, 0.0)
        targets, _ = label_matrix(labels, solution.classes)
        values = np.vstack([targets, solution.scores])
        weights = graph.weights
        degrees = weights.sum(axis=1)
        for u in range(graph.n_unlabeled):
            i = graph.n_labeled + u
            avg = weights[i] @ values / degrees[i]
            worst = max(worst, float(np.abs(solution.scores[u] - avg).max()))
    elapsed = time.perf_counter() - start
    return SuiteResult(
        "harmonic-property", worst <= tol,
        f"max |score - neighbor average| = {worst:.3e} over {n_graphs} graphs (tol {tol:g})",
        elapsed)


def mc_agreement_suite(n_graphs=20, n_walks=1_000_000, seed=777,
                       required_rate=0.95, backend="auto"):
    """Monte-Carlo estimate within 4 standard errors of the closed form."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    hits = 0
    worst = 0.0
    for _ in range(n_graphs):
        graph, labels = random_quantized_graph(rng, keep_connected=True)
        gamma = float(rng.uniform(0.05, 1.0))
        solution = solve(graph, labels, gamma)
        u = int(rng.integers(0, graph.n_unlabeled))
        closed = float(solution.binary_scores[u])
        targets, _ = label_matrix(labels, solution.classes)
        estimate, stderr = mc_walk_estimate(
            graph, targets[:, -1], gamma, graph.n_labeled + u, n_walks,
            seed=int(rng.integers(0, 2**63)), backend=backend)
        sigmas = abs(estimate - closed) / stderr if stderr > 0 else np.inf
        worst = max(worst, sigmas)
        if sigmas <= 4.0:
            hits += 1
    elapsed = time.perf_counter() - start
    rate = hits / n_graphs
    return SuiteResult(
        "walk-vs-closed-form", rate >= required_rate,
        f"{hits}/{n_graphs} within 4 stderr (worst {worst:.2f} stderr, "
        f"{n_walks} walks each)", elapsed)


def run_all(seed=1337, n_walks=1_000_000, backend="auto"):
    return [
        proposition_exactness_suite(seed=seed),
        harmonic_property_suite(seed=seed + 1),
        mc_agreement_suite(seed=seed + 2, n_walks=n_walks, backend=backend),
    ]
