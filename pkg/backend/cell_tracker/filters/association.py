"""
Marginal association probabilities for the PMB update.

Every legacy Bernoulli component ``j`` either does not exist, exists but is
missed, or claims one detected cell ``d``. Every detected cell has one new
component that is active exactly when no legacy component claims that
cell. The joint weight of a valid assignment is the product of the
per-component weights; the filters need the marginals of that pmf.

All missed-cell hypotheses of a legacy component are aggregated into one
``miss`` weight. One-to-one exclusion is enforced over detected cells only;
``measure_relaxation_error`` measures what that costs on small problems.

Two solvers share one input/output layout:
    exact_marginals: brute-force enumeration, guarded by size
    bp_marginals: loopy belief propagation (sum-product) with damping on
        graphs that contain cycles; undamped, and exact, on forests
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from cell_tracker.core.errors import AssociationError, AssociationSizeError
from cell_tracker.core.logging import get_logger

logger = get_logger(__name__)

MAX_EXACT_SIZE = 12
MAX_RELAXATION_COMPONENTS = 3
MAX_RELAXATION_MISSED_CELLS = 3
PMF_TOL = 1e-9
_TINY = 1e-300


@dataclass(frozen=True)
class AssociationProblem:
    """
    Association weights.

    Attributes:
        nonexist: ``(J,)`` weight that legacy component j does not exist
        miss: ``(J,)`` aggregated weight that j exists and is not detected
        detect: ``(J, D)`` weight that j generated detection d
        new_active: ``(D,)`` weight that detection d comes from an undetected
            object or clutter; the inactive weight is exactly 1
    """

    nonexist: np.ndarray
    miss: np.ndarray
    detect: np.ndarray
    new_active: np.ndarray

    def __post_init__(self) -> None:
        nonexist = np.asarray(self.nonexist, dtype=float).reshape(-1)
        miss = np.asarray(self.miss, dtype=float).reshape(-1)
        new_active = np.asarray(self.new_active, dtype=float).reshape(-1)
        detect = np.asarray(self.detect, dtype=float).reshape(nonexist.size, new_active.size)
        if miss.shape != nonexist.shape:
            raise AssociationError("Legacy weight arrays differ in length")
        for name, arr in (
            ("nonexist", nonexist),
            ("miss", miss),
            ("detect", detect),
            ("new_active", new_active),
        ):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise AssociationError(
                    "Association weights must be finite and nonnegative", field=name
                )
        object.__setattr__(self, "nonexist", nonexist)
        object.__setattr__(self, "miss", miss)
        object.__setattr__(self, "detect", detect)
        object.__setattr__(self, "new_active", new_active)

    @property
    def n_legacy(self) -> int:
        return int(self.nonexist.size)

    @property
    def n_detections(self) -> int:
        return int(self.new_active.size)


@dataclass(frozen=True)
class MarginalTable:
    """Marginal probabilities in the same layout as ``AssociationProblem``."""

    nonexist: np.ndarray
    miss: np.ndarray
    detect: np.ndarray
    new_active: np.ndarray

    @property
    def n_legacy(self) -> int:
        return int(self.nonexist.size)

    @property
    def n_detections(self) -> int:
        return int(self.new_active.size)

    def legacy_pmf(self, j: int) -> np.ndarray:
        """pmf of component j over ``[nonexist, miss, d_0, ..., d_{D-1}]``."""
        return np.concatenate([[self.nonexist[j], self.miss[j]], self.detect[j]])

    def existence(self) -> np.ndarray:
        """Posterior existence of each legacy component: miss plus all detections."""
        return np.asarray(self.miss + self.detect.sum(axis=1))

    def check_normalized(self, tol: float = PMF_TOL) -> None:
        legacy = self.nonexist + self.miss + self.detect.sum(axis=1)
        if legacy.size and np.max(np.abs(legacy - 1.0)) > tol:
            raise AssociationError("Legacy association pmf not normalized")
        if np.any(self.new_active < -tol) or np.any(self.new_active > 1 + tol):
            raise AssociationError("New-component association probability outside [0, 1]")

    def matches(self, problem: AssociationProblem) -> bool:
        return (
            self.n_legacy == problem.n_legacy and self.n_detections == problem.n_detections
        )


def _legacy_only(problem: AssociationProblem) -> MarginalTable:
    total = problem.nonexist + problem.miss
    if np.any(total <= 0):
        raise AssociationError("Legacy component with zero total weight")
    return MarginalTable(
        nonexist=problem.nonexist / total,
        miss=problem.miss / total,
        detect=np.zeros((problem.n_legacy, 0)),
        new_active=np.zeros(0),
    )


def exact_marginals(problem: AssociationProblem) -> MarginalTable:
    """
    Marginals by enumerating every valid assignment.

    Raises:
        AssociationSizeError: if ``J + D`` exceeds ``MAX_EXACT_SIZE``
        AssociationError: if every valid assignment has zero weight
    """
    n_legacy, n_det = problem.n_legacy, problem.n_detections
    if n_legacy + n_det > MAX_EXACT_SIZE:
        raise AssociationSizeError(
            "Exact enumeration size guard exceeded",
            n_legacy=n_legacy,
            n_detections=n_det,
            limit=MAX_EXACT_SIZE,
        )

    acc_nonexist = np.zeros(n_legacy)
    acc_miss = np.zeros(n_legacy)
    acc_detect = np.zeros((n_legacy, n_det))
    acc_new = np.zeros(n_det)
    claimed = np.zeros(n_det, dtype=bool)
    choice = [0] * n_legacy  # -2 nonexist, -1 miss, d >= 0 detection
    total = 0.0

    def visit(j: int, weight: float) -> None:
        nonlocal total
        if weight == 0.0:
            return
        if j == n_legacy:
            w = weight * float(np.prod(problem.new_active[~claimed]))
            if w == 0.0:
                return
            total += w
            for i, c in enumerate(choice):
                if c == -2:
                    acc_nonexist[i] += w
                elif c == -1:
                    acc_miss[i] += w
                else:
                    acc_detect[i, c] += w
            acc_new[~claimed] += w
            return
        choice[j] = -2
        visit(j + 1, weight * problem.nonexist[j])
        choice[j] = -1
        visit(j + 1, weight * problem.miss[j])
        for d in range(n_det):
            if not claimed[d]:
                claimed[d] = True
                choice[j] = d
                visit(j + 1, weight * problem.detect[j, d])
                claimed[d] = False

    visit(0, 1.0)
    if total <= 0.0:
        raise AssociationError("All valid association vectors have zero weight")
    return MarginalTable(
        nonexist=acc_nonexist / total,
        miss=acc_miss / total,
        detect=acc_detect / total,
        new_active=acc_new / total,
    )


def _is_forest(detect: np.ndarray) -> bool:
    n_legacy, n_det = detect.shape
    rows, cols = np.nonzero(detect > 0)
    n_nodes = n_legacy + n_det
    graph = coo_matrix(
        (np.ones(rows.size), (rows, cols + n_legacy)), shape=(n_nodes, n_nodes)
    )
    n_components, _ = connected_components(graph, directed=False)
    return bool(rows.size == n_nodes - n_components)


def bp_marginals(
    problem: AssociationProblem,
    tol: float = 1e-6,
    max_iter: int = 200,
    damping: float = 0.5,
) -> MarginalTable:
    """
    Approximate marginals by iterative message passing.

    Messages ``nu`` flow from legacy components to detections and ``mu``
    back; iteration stops when the largest change of ``mu`` falls below
    ``tol`` or after ``max_iter`` sweeps. Damping is applied only when the
    legacy/detection graph has a cycle.
    """
    if tol <= 0:
        raise AssociationError("Convergence tolerance must be positive", tol=tol)
    n_legacy, n_det = problem.n_legacy, problem.n_detections
    if n_det == 0:
        return _legacy_only(problem)
    if n_legacy == 0:
        return MarginalTable(
            nonexist=np.zeros(0),
            miss=np.zeros(0),
            detect=np.zeros((0, n_det)),
            new_active=np.ones(n_det),
        )

    w0 = problem.nonexist + problem.miss
    weights = problem.detect
    w_new = problem.new_active
    alpha = 0.0 if _is_forest(weights) else damping

    mu = np.ones((n_legacy, n_det))
    iterations = 0
    for iterations in range(1, max_iter + 1):  # noqa: B007
        prd = weights * mu
        legacy_total = w0 + prd.sum(axis=1)
        nu = weights / np.maximum(legacy_total[:, None] - prd, _TINY)
        det_total = w_new + nu.sum(axis=0)
        mu_new = 1.0 / np.maximum(det_total[None, :] - nu, _TINY)
        if alpha > 0.0:
            mu_new = (1.0 - alpha) * mu_new + alpha * mu
        delta = float(np.max(np.abs(mu_new - mu)))
        mu = mu_new
        if delta < tol:
            break

    prd = weights * mu
    legacy_total = np.maximum(w0 + prd.sum(axis=1), _TINY)
    nu = weights / np.maximum(legacy_total[:, None] - prd, _TINY)
    det_total = np.maximum(w_new + nu.sum(axis=0), _TINY)

    logger.debug(
        "BP converged",
        iterations=iterations,
        n_legacy=n_legacy,
        n_detections=n_det,
        damped=alpha > 0.0,
    )
    return MarginalTable(
        nonexist=problem.nonexist / legacy_total,
        miss=problem.miss / legacy_total,
        detect=prd / legacy_total[:, None],
        new_active=w_new / det_total,
    )


@dataclass(frozen=True)
class RelaxationReport:
    """TV distance between full-exclusion and relaxed marginals, per component."""

    legacy_tv: np.ndarray
    new_tv: np.ndarray

    @property
    def max_tv(self) -> float:
        values = np.concatenate([self.legacy_tv, self.new_tv])
        return float(values.max()) if values.size else 0.0


def _full_exclusion_marginals(
    problem: AssociationProblem, missed_weights: Sequence[Mapping[int, float]]
) -> MarginalTable:
    n_legacy, n_det = problem.n_legacy, problem.n_detections
    acc_nonexist = np.zeros(n_legacy)
    acc_miss = np.zeros(n_legacy)
    acc_detect = np.zeros((n_legacy, n_det))
    acc_new = np.zeros(n_det)
    claimed = np.zeros(n_det, dtype=bool)
    occupied: set[int] = set()
    choice: list[tuple[str, int]] = [("nonexist", -1)] * n_legacy
    total = 0.0

    def visit(j: int, weight: float) -> None:
        nonlocal total
        if weight == 0.0:
            return
        if j == n_legacy:
            w = weight * float(np.prod(problem.new_active[~claimed]))
            if w == 0.0:
                return
            total += w
            for i, (kind, idx) in enumerate(choice):
                if kind == "nonexist":
                    acc_nonexist[i] += w
                elif kind == "miss":
                    acc_miss[i] += w
                else:
                    acc_detect[i, idx] += w
            acc_new[~claimed] += w
            return
        choice[j] = ("nonexist", -1)
        visit(j + 1, weight * problem.nonexist[j])
        for cell, beta in missed_weights[j].items():
            if beta > 0 and cell not in occupied:
                occupied.add(cell)
                choice[j] = ("miss", cell)
                visit(j + 1, weight * beta)
                occupied.discard(cell)
        for d in range(n_det):
            if not claimed[d]:
                claimed[d] = True
                choice[j] = ("detect", d)
                visit(j + 1, weight * problem.detect[j, d])
                claimed[d] = False

    visit(0, 1.0)
    if total <= 0.0:
        raise AssociationError("All valid association vectors have zero weight")
    return MarginalTable(
        nonexist=acc_nonexist / total,
        miss=acc_miss / total,
        detect=acc_detect / total,
        new_active=acc_new / total,
    )


def measure_relaxation_error(
    problem: AssociationProblem, missed_weights: Sequence[Mapping[int, float]]
) -> RelaxationReport:
    """
    Compare the relaxed marginals with those that also forbid two objects in one missed cell.

    Args:
        problem: Relaxed problem; ``problem.miss[j]`` must equal the sum of
            ``missed_weights[j]``
        missed_weights: Per legacy component, the weight of each occupied
            missed cell

    Raises:
        AssociationSizeError: more than 3 components or 3 occupied missed cells
    """
    n_legacy = problem.n_legacy
    occupied = {c for weights in missed_weights for c, w in weights.items() if w > 0}
    if (
        n_legacy > MAX_RELAXATION_COMPONENTS
        or len(occupied) > MAX_RELAXATION_MISSED_CELLS
        or len(missed_weights) != n_legacy
    ):
        raise AssociationSizeError(
            "Relaxation error size guard exceeded",
            n_legacy=n_legacy,
            occupied_missed_cells=len(occupied),
        )
    for j, weights in enumerate(missed_weights):
        if not np.isclose(sum(weights.values()), problem.miss[j], rtol=1e-9, atol=0.0):
            raise AssociationError("Missed-cell weights do not sum to the miss weight", j=j)

    relaxed = exact_marginals(problem)
    full = _full_exclusion_marginals(problem, missed_weights)
    legacy_tv = np.array(
        [
            0.5 * float(np.abs(relaxed.legacy_pmf(j) - full.legacy_pmf(j)).sum())
            for j in range(n_legacy)
        ]
    )
    new_tv = np.abs(relaxed.new_active - full.new_active)
    report = RelaxationReport(legacy_tv=legacy_tv, new_tv=new_tv)
    logger.info("Relaxation error", max_tv=report.max_tv, n_legacy=n_legacy)
    return report
