"""Integration tests for exact and message-passing association marginals."""

import numpy as np
import pytest

from cell_tracker.core.errors import AssociationError, AssociationSizeError
from cell_tracker.filters.association import (
    AssociationProblem,
    MarginalTable,
    bp_marginals,
    exact_marginals,
    measure_relaxation_error,
)


def _random_problem(
    rng: np.random.Generator, n_legacy: int, n_det: int, density: float = 1.0
) -> AssociationProblem:
    r = rng.uniform(0.2, 0.95, size=n_legacy)
    detect = rng.gamma(1.0, 1.0, size=(n_legacy, n_det))
    detect *= rng.random((n_legacy, n_det)) < density
    return AssociationProblem(
        nonexist=1.0 - r,
        miss=r * rng.uniform(0.05, 0.5, size=n_legacy),
        detect=r[:, None] * detect,
        new_active=rng.gamma(1.0, 1.0, size=n_det) + 0.05,
    )


def _forest_problem(rng: np.random.Generator, n_legacy: int) -> AssociationProblem:
    """Each legacy component sees its own detection plus a detection shared with the next one (a chain)."""
    n_det = n_legacy + 1
    detect = np.zeros((n_legacy, n_det))
    for j in range(n_legacy):
        detect[j, j] = rng.uniform(0.5, 3.0)
        detect[j, j + 1] = rng.uniform(0.5, 3.0)
    r = rng.uniform(0.3, 0.9, size=n_legacy)
    return AssociationProblem(
        nonexist=1.0 - r,
        miss=0.2 * r,
        detect=r[:, None] * detect,
        new_active=rng.uniform(0.2, 2.0, size=n_det),
    )


def _uniform_problem(seed: int) -> AssociationProblem:
    """Three legacy components and three detections, every weight from Uniform(0, 2)."""
    rng = np.random.default_rng(seed)
    return AssociationProblem(
        nonexist=rng.uniform(0.0, 2.0, size=3),
        miss=rng.uniform(0.0, 2.0, size=3),
        detect=rng.uniform(0.0, 2.0, size=(3, 3)),
        new_active=rng.uniform(0.0, 2.0, size=3),
    )


def _tv(a: MarginalTable, b: MarginalTable) -> float:
    legacy = [0.5 * np.abs(a.legacy_pmf(j) - b.legacy_pmf(j)).sum() for j in range(a.n_legacy)]
    new = list(np.abs(a.new_active - b.new_active))
    return float(max(legacy + new, default=0.0))


def _assert_exclusion(marginals: MarginalTable, atol: float) -> None:
    np.testing.assert_allclose(
        marginals.new_active + marginals.detect.sum(axis=0), 1.0, atol=atol
    )


class TestExactMarginalsIntegration:
    """Brute-force marginals on small problems."""

    def test_single_legacy_single_detection(self) -> None:
        """
        Test the hand-enumerated one-component, one-detection problem.

        Scenario:
            nonexist 0.3, miss 0.5, detect 2.0, new active 1.0

        Expected:
            Valid vectors weigh 0.3, 0.5 and 2.0; p(claim) = 2.0 / 2.8
        """
        problem = AssociationProblem(
            nonexist=np.array([0.3]),
            miss=np.array([0.5]),
            detect=np.array([[2.0]]),
            new_active=np.array([1.0]),
        )

        marginals = exact_marginals(problem)

        assert marginals.detect[0, 0] == pytest.approx(2.0 / 2.8, abs=1e-12)
        assert marginals.nonexist[0] == pytest.approx(0.3 / 2.8, abs=1e-12)
        assert marginals.miss[0] == pytest.approx(0.5 / 2.8, abs=1e-12)
        assert marginals.new_active[0] == pytest.approx(0.8 / 2.8, abs=1e-12)

    def test_no_legacy_components_activates_every_new_component(self) -> None:
        """Test that unclaimed detections always belong to their new component."""
        problem = AssociationProblem(
            nonexist=np.zeros(0),
            miss=np.zeros(0),
            detect=np.zeros((0, 1)),
            new_active=np.array([3.0]),
        )

        assert exact_marginals(problem).new_active[0] == pytest.approx(1.0)

    def test_no_detections(self) -> None:
        problem = AssociationProblem(
            nonexist=np.array([0.25]),
            miss=np.array([0.75]),
            detect=np.zeros((1, 0)),
            new_active=np.zeros(0),
        )

        marginals = exact_marginals(problem)

        assert marginals.existence()[0] == pytest.approx(0.75)

    def test_every_detection_claimed_or_new(self, rng: np.random.Generator) -> None:
        """Test that claims and the new component of each detection sum to one."""
        for _ in range(20):
            marginals = exact_marginals(_random_problem(rng, 3, 4))
            marginals.check_normalized()
            _assert_exclusion(marginals, atol=1e-12)

    def test_size_guard(self) -> None:
        """Test that more than twelve legacy components plus detections is refused."""
        problem = AssociationProblem(
            nonexist=np.full(7, 0.5),
            miss=np.full(7, 0.5),
            detect=np.ones((7, 6)),
            new_active=np.ones(6),
        )

        with pytest.raises(AssociationSizeError):
            exact_marginals(problem)

    def test_all_zero_weights_rejected(self) -> None:
        problem = AssociationProblem(
            nonexist=np.zeros(1),
            miss=np.zeros(1),
            detect=np.zeros((1, 1)),
            new_active=np.zeros(1),
        )

        with pytest.raises(AssociationError):
            exact_marginals(problem)

    @pytest.mark.parametrize("bad", [-1.0, float("nan"), float("inf")])
    def test_invalid_weights_rejected(self, bad: float) -> None:
        with pytest.raises(AssociationError):
            AssociationProblem(
                nonexist=np.array([0.5]),
                miss=np.array([bad]),
                detect=np.array([[1.0]]),
                new_active=np.array([1.0]),
            )

    def test_row_and_column_scaling_invariance(self, rng: np.random.Generator) -> None:
        """
        Test that marginals ignore per-component and per-detection weight scales.

        Scenario:
            Scale one legacy row by 7 and one detection column (claims and
            new weight together) by 0.1

        Expected:
            Identical marginals
        """
        problem = _random_problem(rng, 3, 3)
        detect = problem.detect.copy()
        new_active = problem.new_active.copy()
        detect[1] *= 7.0
        detect[:, 2] *= 0.1
        new_active[2] *= 0.1
        scaled = AssociationProblem(
            nonexist=problem.nonexist * np.array([1.0, 7.0, 1.0]),
            miss=problem.miss * np.array([1.0, 7.0, 1.0]),
            detect=detect,
            new_active=new_active,
        )

        assert _tv(exact_marginals(problem), exact_marginals(scaled)) < 1e-12


class TestBpMarginalsIntegration:
    """Message passing against brute force."""

    def test_matches_hand_example(self) -> None:
        """Test that the loop-free one-by-one problem is solved exactly."""
        problem = AssociationProblem(
            nonexist=np.array([0.3]),
            miss=np.array([0.5]),
            detect=np.array([[2.0]]),
            new_active=np.array([1.0]),
        )

        assert bp_marginals(problem).detect[0, 0] == pytest.approx(2.0 / 2.8, abs=1e-9)

    @pytest.mark.parametrize("n_legacy", [1, 2, 4, 5])
    def test_exact_on_forests(self, rng: np.random.Generator, n_legacy: int) -> None:
        """
        Test that BP is exact when the association graph has no cycle.

        Scenario:
            Chains of legacy components linked through shared detections

        Expected:
            Agreement with enumeration within 1e-6
        """
        for _ in range(5):
            problem = _forest_problem(rng, n_legacy)

            assert _tv(bp_marginals(problem, tol=1e-12, max_iter=2000), exact_marginals(problem)) < 1e-6

    def test_close_to_exact_on_uniform_three_by_three(self) -> None:
        """
        Test the approximation quality of damped BP on dense graphs with cycles.

        Scenario:
            100 seeded problems with three legacy components and three detections,
            every weight drawn from Uniform(0, 2)

        Expected:
            Mean per-component TV below 0.02, at most 40% of instances above 0.02
            and no instance above 0.075
        """
        distances = np.array(
            [_tv(bp_marginals(p), exact_marginals(p)) for p in map(_uniform_problem, range(100))]
        )

        assert float(distances.mean()) < 0.02
        assert float(np.mean(distances > 0.02)) <= 0.4
        assert float(distances.max()) < 0.075

    def test_converged_beliefs_respect_exclusion(self, rng: np.random.Generator) -> None:
        for _ in range(10):
            marginals = bp_marginals(_random_problem(rng, 4, 5), tol=1e-10, max_iter=5000)
            marginals.check_normalized()
            _assert_exclusion(marginals, atol=1e-4)

    def test_trivial_shapes(self) -> None:
        """Test closed-form answers without legacy components or without detections."""
        no_legacy = AssociationProblem(
            nonexist=np.zeros(0), miss=np.zeros(0), detect=np.zeros((0, 2)), new_active=np.ones(2)
        )
        no_detections = AssociationProblem(
            nonexist=np.array([0.5]), miss=np.array([1.5]), detect=np.zeros((1, 0)), new_active=np.zeros(0)
        )

        np.testing.assert_allclose(bp_marginals(no_legacy).new_active, [1.0, 1.0])
        assert bp_marginals(no_detections).miss[0] == pytest.approx(0.75)

    def test_nonpositive_tolerance_rejected(self) -> None:
        problem = AssociationProblem(
            nonexist=np.array([0.5]), miss=np.array([0.5]), detect=np.ones((1, 1)), new_active=np.ones(1)
        )

        with pytest.raises(AssociationError):
            bp_marginals(problem, tol=0.0)


class TestRelaxationErrorIntegration:
    """Cost of aggregating missed-cell hypotheses."""

    def test_single_component_has_no_error(self) -> None:
        problem = AssociationProblem(
            nonexist=np.array([0.4]), miss=np.array([0.6]), detect=np.zeros((1, 0)), new_active=np.zeros(0)
        )

        report = measure_relaxation_error(problem, [{3: 0.6}])

        assert report.max_tv == pytest.approx(0.0, abs=1e-12)

    def test_shared_missed_cell(self) -> None:
        """
        Test two components competing for the same missed cell.

        Scenario:
            Both have nonexist 0.5 and miss 0.5 in cell 0

        Expected:
            Relaxed p(miss) = 1/2, full exclusion gives 1/3, TV = 1/6
        """
        problem = AssociationProblem(
            nonexist=np.array([0.5, 0.5]),
            miss=np.array([0.5, 0.5]),
            detect=np.zeros((2, 0)),
            new_active=np.zeros(0),
        )

        report = measure_relaxation_error(problem, [{0: 0.5}, {0: 0.5}])

        np.testing.assert_allclose(report.legacy_tv, [1.0 / 6.0, 1.0 / 6.0], atol=1e-12)

    def test_inconsistent_missed_weights_rejected(self) -> None:
        problem = AssociationProblem(
            nonexist=np.array([0.5]), miss=np.array([0.5]), detect=np.zeros((1, 0)), new_active=np.zeros(0)
        )

        with pytest.raises(AssociationError):
            measure_relaxation_error(problem, [{0: 0.2}])

    def test_size_guard(self) -> None:
        problem = AssociationProblem(
            nonexist=np.full(4, 0.5), miss=np.full(4, 0.5), detect=np.zeros((4, 0)), new_active=np.zeros(0)
        )

        with pytest.raises(AssociationSizeError):
            measure_relaxation_error(problem, [{0: 0.5}] * 4)
