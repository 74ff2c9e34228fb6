"""Integration tests for the sectioned experiment configuration file."""

from pathlib import Path

import pytest

from cell_tracker.config.experiment import (
    DESK_SCALE_RUNS,
    FULL_SCALE_RUNS,
    CliConfig,
    dump_config,
    load_config,
    parse_config,
)
from cell_tracker.core.errors import ConfigurationError, ParseError
from cell_tracker.models import AssociationMethod, FilterKind, PositionLikelihood
from cell_tracker.services.harness import ExperimentSpec

EXAMPLE = """
[scenario]
n_rows = 16
n_cols = 8
n_objects = 4
n_steps = 50
birth_window_end = 10
death_window_start = 40

[measurement]
sigma_n_sq = 2.0
position_likelihood = cell_uniform

[filter.pmb_cm]
particles_per_bernoulli = 500
association = exact

[harness]
filters = pmb-cm, pmb_am
etas = 2, 4.5
n_runs = 12
master_seed = 99
gospa_c = 10
"""


class TestParseConfigIntegration:
    """Parsing and validation."""

    def test_example_file(self) -> None:
        """
        Test a configuration touching every section.

        Scenario:
            Grid, scenario, measurement, one filter section and harness options

        Expected:
            Typed values; the harness seed reaches the scenario
        """
        config = parse_config(EXAMPLE)

        assert config.scenario.roi.n_rows == 16
        assert config.scenario.roi.n_cols == 8
        assert config.scenario.n_objects == 4
        assert config.scenario.master_seed == 99
        assert config.measurement.sigma_n_sq == 2.0
        assert config.measurement.position_likelihood is PositionLikelihood.CELL_UNIFORM
        assert config.filters[FilterKind.PMB_CM].particles_per_bernoulli == 500
        assert config.filters[FilterKind.PMB_CM].association is AssociationMethod.EXACT
        assert config.filters[FilterKind.PMB].particles_per_bernoulli == 3000
        assert config.harness.filters == [FilterKind.PMB_CM, FilterKind.PMB_AM]
        assert config.harness.etas == [2.0, 4.5]
        assert config.harness.n_runs == 12
        assert config.harness.gospa_c == 10.0

    def test_empty_text_gives_defaults(self) -> None:
        config = parse_config("")

        assert config == CliConfig()
        assert config.harness.effective_runs == DESK_SCALE_RUNS

    def test_full_scale_run_count(self) -> None:
        config = parse_config("[harness]\nfull_scale = true\n")

        assert config.harness.effective_runs == FULL_SCALE_RUNS

    def test_round_trip(self) -> None:
        """Test that dumping and parsing again gives an equal configuration."""
        config = parse_config(EXAMPLE)

        assert parse_config(dump_config(config)) == config

    def test_default_round_trip(self) -> None:
        assert parse_config(dump_config(CliConfig())) == CliConfig()

    def test_filter_section_reaches_experiment_params(self) -> None:
        """Test that a filter section overrides defaults at every threshold of the experiment."""
        spec = ExperimentSpec.from_config(parse_config(EXAMPLE))

        params = spec.params_for(FilterKind.PMB_CM, 4.5)

        assert params.eta == 4.5
        assert params.particles_per_bernoulli == 500
        assert params.association is AssociationMethod.EXACT

    @pytest.mark.parametrize(
        ("text", "fragment"),
        [
            ("[scenario]\nn_objectz = 3\n", "scenario"),
            ("[filter.pmb_xx]\np_s = 0.9\n", "pmb_xx"),
            ("[filter.pmb]\neta = 3\n", "eta"),
            ("[scenario]\nmaster_seed = 3\n", "harness"),
            ("[plotting]\ncolor = red\n", "plotting"),
            ("[harness]\netas = 2, -1\n", "harness"),
            ("[harness]\nfilters = kalman\n", "harness"),
            ("[scenario]\nbirth_window_end = 50\ndeath_window_start = 40\n", "scenario"),
        ],
    )
    def test_invalid_content_rejected(self, text: str, fragment: str) -> None:
        """Test that unknown keys, sections and invalid values are configuration errors."""
        with pytest.raises(ConfigurationError) as info:
            parse_config(text)

        assert fragment in info.value.message

    def test_malformed_text_reports_line(self) -> None:
        """
        Test that INI syntax errors become ParseError with a line number.

        Scenario:
            A duplicated key on line 3

        Expected:
            ParseError with line 3
        """
        with pytest.raises(ParseError) as info:
            parse_config("[harness]\nn_runs = 5\nn_runs = 6\n")

        assert info.value.line == 3


class TestLoadConfigIntegration:
    def test_load_from_file(self, tmp_path: Path) -> None:
        path = tmp_path / "experiment.ini"
        path.write_text(EXAMPLE)

        assert load_config(path) == parse_config(EXAMPLE)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "absent.ini")

    def test_shipped_configurations_valid(self) -> None:
        """Test that the configurations in experiments/ parse."""
        root = Path(__file__).resolve().parents[3] / "experiments"

        for path in sorted(root.glob("*.ini")):
            load_config(path)
