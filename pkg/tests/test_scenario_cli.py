"""
Tests for scenario parsing, artifacts and the command line
"""

import json
from typing import get_args

import pytest

import kktower.cli.verify as verify_cli
from kktower import __version__
from kktower.core.errors import PreconditionError, ScenarioError
from kktower.main import main
from kktower.schemas.params import ModelParams
from kktower.schemas.scenario import CheckName
from kktower.services import io_service
from kktower.services.scenario_service import CHECKS, bundled_scenario_path, load_scenario, parse_scenario, prepare
from tests.conftest import make_runner_args

BUNDLED = [
    "brane_grav",
    "em_decay",
    "em_lacuna",
    "em_mirror",
    "finite_speed",
    "generic_decay",
    "grav_brane_spectrum",
    "grav_lacuna",
    "grav_strichartz",
    "hankel_roundtrip",
    "negative_controls",
    "oracle_brane",
    "oracle_halfline",
]

SMALL = {
    "name": "small",
    "geometry": "halfline",
    "mu": 0.75,
    "datum": {"kind": "gaussian_bump", "z_center": 4.0, "width": 0.5},
    "grids": {"m_max": 12.0},
    "times": [0.0, 1.0],
}


def write_scenario(tmp_path, document, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document, indent=2), encoding="utf-8")
    return path


class TestParseScenario:
    """Test validation and line-precise errors"""

    def test_trailing_comma(self):
        """Test that JSON syntax errors point at their line"""
        text = '{\n  "name": "x",\n  "geometry": "brane",\n}\n'
        with pytest.raises(ScenarioError) as info:
            parse_scenario(text)
        assert info.value.line == 4

    def test_mu_below_bound(self):
        """Test that mu <= -1/4 is reported on the line of mu"""
        text = '{\n  "name": "x",\n  "geometry": "halfline",\n  "mu": -1.0,\n  "datum": {"kind": "hankel_self_reciprocal"}\n}\n'
        with pytest.raises(ScenarioError, match="-1/4 < mu") as info:
            parse_scenario(text)
        assert info.value.line == 4

    def test_unknown_key(self):
        """Test that unknown keys are rejected with their line"""
        text = (
            '{\n  "name": "x",\n  "geometry": "halfline",\n  "mu": 0.75,\n'
            '  "datum": {"kind": "hankel_self_reciprocal"},\n  "bogus": 1\n}\n'
        )
        with pytest.raises(ScenarioError) as info:
            parse_scenario(text)
        assert info.value.line == 6

    def test_nested_field(self):
        """Test that errors inside the datum point at the offending key"""
        text = (
            '{\n  "name": "x",\n  "geometry": "halfline",\n  "mu": 0.75,\n  "datum": {\n'
            '    "kind": "gaussian_bump",\n    "z_center": 4.0,\n    "width": -0.5\n  }\n}\n'
        )
        with pytest.raises(ScenarioError) as info:
            parse_scenario(text)
        assert info.value.line == 8

    def test_not_an_object(self):
        """Test that the document must be a JSON object"""
        with pytest.raises(ScenarioError):
            parse_scenario("[1, 2]")

    def test_cosmological_mass(self):
        """Test mu = 15/4 + lambda"""
        document = dict(SMALL, lambda_cosmological=0.0)
        del document["mu"]
        scenario = parse_scenario(json.dumps(document))
        assert scenario.effective_mu == 3.75

    def test_mu_and_lambda_exclusive(self):
        """Test that only one mass specification is accepted"""
        with pytest.raises(ScenarioError):
            parse_scenario(json.dumps(dict(SMALL, lambda_cosmological=0.0)))

    def test_lacuna_needs_even_nu(self):
        """Test the hypothesis check at load time"""
        document = dict(SMALL, mu=1.0, checks=[{"name": "lacuna"}])
        with pytest.raises(ScenarioError, match="nu"):
            parse_scenario(json.dumps(document))

    def test_lacuna_negative_control_allowed(self):
        """Test that negative controls may run outside the hypotheses"""
        document = dict(SMALL, mu=1.0, checks=[{"name": "lacuna", "negative_control": True}])
        scenario = parse_scenario(json.dumps(document))
        assert not scenario.checks[0].enforces_hypothesis

    def test_pure_mode_only_on_brane(self):
        """Test that the half-line has no pure modes"""
        document = dict(SMALL, datum={"kind": "pure_mode", "n": 0})
        with pytest.raises(ScenarioError):
            parse_scenario(json.dumps(document))


class TestBundledScenarios:
    """Test the scenarios shipped with the package"""

    @pytest.mark.parametrize("name", BUNDLED)
    def test_parses(self, name):
        """Test that every bundled scenario validates"""
        scenario = load_scenario(bundled_scenario_path(name))
        assert scenario.name == name

    def test_unknown_name(self):
        """Test that a missing bundled scenario raises"""
        with pytest.raises(ScenarioError):
            bundled_scenario_path("no_such_scenario")

    def test_every_check_is_registered(self):
        """Test that the registry covers every check name"""
        assert set(CHECKS) == set(get_args(CheckName))

    def test_pure_mode_needs_enough_modes(self):
        """Test the mode count precondition"""
        document = {
            "name": "short",
            "geometry": "brane",
            "mu": 3.75,
            "datum": {"kind": "pure_mode", "n": 5},
            "grids": {"mode_count": 3},
        }
        with pytest.raises(PreconditionError):
            prepare(parse_scenario(json.dumps(document)))


class TestArtifacts:
    """Test the CSV and JSON writers"""

    def test_csv_round_trip(self, tmp_path):
        """Test metadata line, 17 significant digits and LF endings"""
        path = io_service.write_csv(tmp_path / "a.csv", {"b": 1, "a": "x"}, ["i", "v"], [[0, 1.0 / 3.0], [1, 2.5]])
        raw = path.read_bytes()
        assert b"\r\n" not in raw
        assert raw.splitlines()[0] == b'# {"a": "x", "b": 1}'
        meta, header, rows = io_service.read_csv(path)
        assert meta == {"a": "x", "b": 1}
        assert header == ["i", "v"]
        assert rows[0] == ["0", "0.33333333333333331"]

    def test_read_requires_metadata(self, tmp_path):
        """Test that foreign CSV files are refused"""
        path = tmp_path / "plain.csv"
        path.write_text("i,v\n0,1\n", encoding="utf-8")
        with pytest.raises(ValueError):
            io_service.read_csv(path)


class TestCommandLine:
    """Test subcommands and exit codes"""

    def test_brane_spectrum(self, tmp_path):
        """Test the spectrum file and the eigenvalue-condition diagnostic"""
        out = tmp_path / "out"
        code = main(make_runner_args(bundled_scenario_path("grav_brane_spectrum"), out, "spectrum"))
        assert code == 0
        meta, header, rows = io_service.read_csv(out / "spectrum.csv")
        assert header == ["n", "lambda_n", "C_n", "robin_residual"]
        assert len(rows) == 10
        assert abs(float(rows[0][1]) - 3.8317059702075125) < 1e-10
        diagnostic = json.loads((out / "eigen_condition.json").read_text())
        assert diagnostic["conditions_agree"]
        assert (out / "run_metadata.json").exists()

    def test_halfline_spectrum(self, tmp_path):
        """Test the mass quadrature with the derived parameters"""
        out = tmp_path / "out"
        code = main(make_runner_args(write_scenario(tmp_path, SMALL), out, "spectrum"))
        assert code == 0
        meta, header, rows = io_service.read_csv(out / "spectrum.csv")
        assert header == ["index", "m", "weight"]
        assert meta["params"]["lambda_index"] == 1.0
        assert meta["params"]["alpha_plus"] == 0.5
        assert float(rows[-1][1]) < 12.0

    def test_evolve(self, tmp_path):
        """Test tower, snapshots and energy series"""
        out = tmp_path / "out"
        assert main(make_runner_args(write_scenario(tmp_path, SMALL), out, "evolve")) == 0
        assert (out / "tower.csv").exists()
        assert (out / "snapshot_000.csv").exists()
        assert (out / "snapshot_001.csv").exists()
        _, header, rows = io_service.read_csv(out / "energy.csv")
        assert header[-1] == "total"
        assert len(rows) == 2
        assert abs(float(rows[1][-1]) - float(rows[0][-1])) < 1e-6 * float(rows[0][-1])

    def test_snapshot_columns(self, tmp_path):
        """Test the snapshot header and one row per z node"""
        out = tmp_path / "out"
        assert main(make_runner_args(write_scenario(tmp_path, SMALL), out, "evolve")) == 0
        meta, header, rows = io_service.read_csv(out / "snapshot_001.csv")
        assert header == ["t", "r", "z", "re_phi", "im_phi", "re_dphi", "im_dphi"]
        assert all(float(row[0]) == 1.0 for row in rows)
        assert all(len(row) == 7 for row in rows)

    def test_run_metadata_version(self, tmp_path):
        """Test that the metadata carries the package version and no version setting"""
        out = tmp_path / "out"
        assert main(make_runner_args(write_scenario(tmp_path, SMALL), out, "spectrum")) == 0
        metadata = json.loads((out / "run_metadata.json").read_text())
        assert metadata["version"] == __version__
        assert "VERSION" not in metadata["settings"]

    def test_verify_oracle(self, tmp_path):
        """Test that the half-line oracle scenario passes"""
        out = tmp_path / "out"
        assert main(make_runner_args(bundled_scenario_path("oracle_halfline"), out)) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["all_ok"]
        assert [r["check_name"] for r in report["reports"]] == ["oracle", "convergence"]

    def test_verify_failure_exits_one(self, tmp_path):
        """Test that a check outside the light cone fails the run"""
        document = dict(SMALL, times=[0.0, 2.0], checks=[{"name": "finite_speed", "options": {"R": 1.0}}])
        out = tmp_path / "out"
        assert main(make_runner_args(write_scenario(tmp_path, document), out)) == 1
        report = json.loads((out / "report.json").read_text())
        assert not report["all_ok"]

    def test_reports_are_reproducible(self, tmp_path):
        """Test byte-identical reports across two runs"""
        scenario = bundled_scenario_path("grav_brane_spectrum")
        assert main(make_runner_args(scenario, tmp_path / "a")) == 0
        assert main(make_runner_args(scenario, tmp_path / "b")) == 0
        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()

    def test_oracle_compare(self, tmp_path):
        """Test the oracle artifacts"""
        out = tmp_path / "out"
        assert main(make_runner_args(bundled_scenario_path("oracle_halfline"), out, "oracle-compare")) == 0
        for name in ("fd_final.csv", "spectral_final.csv", "fd_energy.csv", "report.json"):
            assert (out / name).exists()

    def test_invalid_mu_exits_two(self, tmp_path):
        """Test that validation errors map to exit code 2"""
        path = write_scenario(tmp_path, dict(SMALL, mu=-1.0))
        assert main(make_runner_args(path, tmp_path / "out")) == 2

    def test_model_validation_error_exits_two(self, tmp_path, monkeypatch):
        """Test that a pydantic ValidationError raised while preparing maps to exit code 2"""

        def invalid_prepare(scenario):
            return ModelParams(mu=0.75, lambda_index=3.0, alpha_plus=0.0, alpha_minus=0.0)

        monkeypatch.setattr(verify_cli, "prepare", invalid_prepare)
        path = write_scenario(tmp_path, SMALL)
        assert main(make_runner_args(path, tmp_path / "out")) == 2

    def test_malformed_json_exits_two(self, tmp_path):
        """Test that syntax errors map to exit code 2"""
        path = tmp_path / "bad.json"
        path.write_text('{"name": "x",', encoding="utf-8")
        assert main(make_runner_args(path, tmp_path / "out")) == 2

    def test_missing_file_exits_two(self, tmp_path):
        """Test that unreadable scenarios map to exit code 2"""
        assert main(make_runner_args(tmp_path / "missing.json", tmp_path / "out")) == 2

    def test_threads_must_be_positive(self, tmp_path):
        """Test the --threads guard"""
        args = make_runner_args(bundled_scenario_path("grav_brane_spectrum"), tmp_path / "out") + ["--threads", "0"]
        assert main(args) == 2


@pytest.fixture(scope="module")
def bundled_run(tmp_path_factory):
    """Verify a bundled scenario once per module; returns (exit code, report.json)"""
    cache = {}

    def run(name):
        if name not in cache:
            out = tmp_path_factory.mktemp(name)
            code = main(make_runner_args(bundled_scenario_path(name), out))
            cache[name] = (code, json.loads((out / "report.json").read_text()))
        return cache[name]

    return run


def reports_named(report, check_name):
    return [r for r in report["reports"] if r["check_name"] == check_name]


@pytest.mark.slow
class TestBundledRuns:
    """Test that every bundled scenario passes its own checks end to end"""

    @pytest.mark.parametrize(
        "name",
        [
            "brane_grav",
            "em_decay",
            "em_lacuna",
            "em_mirror",
            "finite_speed",
            "generic_decay",
            "grav_lacuna",
            "grav_strichartz",
            "hankel_roundtrip",
            "negative_controls",
            "oracle_brane",
        ],
    )
    def test_all_ok(self, bundled_run, name):
        """Test exit code 0 and all_ok for the scenario"""
        code, report = bundled_run(name)
        assert code == 0
        assert report["all_ok"]

    @pytest.mark.parametrize("name", ["em_lacuna", "grav_lacuna"])
    def test_lacuna_in_unit_ball(self, bundled_run, name):
        """Test the interior sup below 1e-5 of the peak at t = 3 for annulus data with R = 1"""
        _, report = bundled_run(name)
        (lacuna,) = reports_named(report, "lacuna")
        assert lacuna["measured"]["t"] == 3.0
        assert lacuna["measured"]["interior_sup_ratio"] < 1e-5

    @pytest.mark.parametrize("name", ["em_lacuna", "grav_lacuna"])
    def test_equipartition_from_r(self, bundled_run, name):
        """Test |E_kin - E_pot| / E below 1e-5 from t = R on, and a full gap at rest"""
        _, report = bundled_run(name)
        (equipartition,) = reports_named(report, "equipartition")
        assert equipartition["measured"]["max_gap_after_R"] < 1e-5
        assert abs(equipartition["measured"]["gap_t0"] - 1.0) < 1e-9

    def test_odd_nu_controls(self, bundled_run):
        """Test that mu = 2 leaves an interior sup above 1e-2 and a visible equipartition gap"""
        _, report = bundled_run("negative_controls")
        (lacuna,) = reports_named(report, "lacuna")
        (equipartition,) = reports_named(report, "equipartition")
        assert lacuna["measured"]["interior_sup_ratio"] > 1e-2
        assert equipartition["measured"]["max_gap_after_R"] > 1e-5
        assert all(r["negative_control"] and not r["passed"] for r in report["reports"])

    @pytest.mark.parametrize(
        "name, expected, tolerance",
        [("em_decay", -3.0, 0.2), ("generic_decay", -1.5, 0.15), ("brane_grav", -1.5, 0.2)],
    )
    def test_sharp_decay_over_4_to_64(self, bundled_run, name, expected, tolerance):
        """Test the fitted exponent of the sharp decay check over t in [4, 64]"""
        _, report = bundled_run(name)
        decay = reports_named(report, "decay")[0]
        assert decay["notes"].startswith("sharp mode over window [4, 64]")
        assert abs(decay["measured"]["exponent"] - expected) <= tolerance
        assert decay["measured"]["r_squared"] >= 0.98

    def test_strichartz_saturates_at_64(self, bundled_run):
        """Test I(128) / I(64) - 1 < 0.05 for both admissible pairs and exact homogeneity"""
        _, report = bundled_run("grav_strichartz")
        strichartz = reports_named(report, "strichartz")
        assert len(strichartz) == 2
        for r in strichartz:
            assert 0.0 <= r["measured"]["saturation"] < 0.05
            assert r["measured"]["homogeneity"] < 1e-10
            assert r["tolerance"] == 0.05

    def test_mirror(self, bundled_run):
        """Test the bounce at t = 5, outgoing speed 1 and energy drift through the bounce"""
        _, report = bundled_run("em_mirror")
        (packet,) = reports_named(report, "packet")
        assert abs(packet["measured"]["bounce_time"] - 5.0) <= 0.25
        assert abs(packet["measured"]["v_out"] - 1.0) < 0.05
        assert packet["measured"]["energy_drift"] < 1e-8

    def test_finite_speed_bump(self, bundled_run):
        """Test the bump in 1 <= z <= 2 at t = 3: no mass beyond z = 5, mass beyond the halved cone"""
        _, report = bundled_run("finite_speed")
        inside, halved = reports_named(report, "finite_speed")
        assert inside["measured"]["relative_mass_outside"] < 1e-6
        assert 5.0 < inside["measured"]["cut"] < 5.1
        assert halved["negative_control"] and not halved["passed"]
