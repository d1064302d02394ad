import json

import pytest

from modeswitch import io as mio
from modeswitch import presets
from modeswitch.designer import build_commuting_tasks, commuting_plan, ReferenceTrip
from modeswitch.estimator import EstimationSettings, estimate
from modeswitch.model import CurrentMode, DatasetKind, ParameterVector, ValidationError
from modeswitch.simulator import substitution_table

from conftest import tiny_dataset, tiny_spec


class TestDatasetRoundTrip:
    def test_save_load_save_is_byte_identical(self, tmp_path):
        ds = tiny_dataset(n_individuals=12, n_tasks=3, seed=5)
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        mio.save_dataset(ds, first)
        loaded = mio.load_dataset(first)
        mio.save_dataset(loaded, second)
        assert first.read_bytes() == second.read_bytes()

    def test_loaded_dataset_matches_original(self, tmp_path):
        ds = tiny_dataset(n_individuals=6, n_tasks=2, seed=1)
        path = tmp_path / "ds.csv"
        mio.save_dataset(ds, path)
        loaded = mio.load_dataset(path)
        assert loaded.kind is ds.kind
        assert loaded.n_individuals == ds.n_individuals
        assert loaded.n_observations == ds.n_observations
        for a, b in zip(ds.individuals, loaded.individuals):
            assert a.persona == b.persona
            for ta, tb in zip(a.tasks, b.tasks):
                assert ta.chosen is tb.chosen
                assert ta.attributes == tb.attributes

    def test_synthesized_noncommute_round_trip(self, tmp_path):
        from modeswitch.cli import synthesize_dataset

        truth = presets.bundled_estimates(DatasetKind.NONCOMMUTE)
        ds = synthesize_dataset(DatasetKind.NONCOMMUTE, 15, 3, truth)
        path = tmp_path / "nc.csv"
        mio.save_dataset(ds, path)
        again = tmp_path / "nc2.csv"
        mio.save_dataset(mio.load_dataset(path), again)
        assert path.read_bytes() == again.read_bytes()

    def test_header_mismatch_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("foo,bar\n1,2\n")
        with pytest.raises(ValidationError):
            mio.load_dataset(bad)


class TestParamsRoundTrip:
    def test_round_trip(self, tmp_path):
        params = ParameterVector({"a": -1.25, "b": 0.5}, fixed=frozenset({"b"}))
        path = tmp_path / "params.csv"
        mio.save_params(params, path)
        loaded = mio.load_params(path)
        assert loaded == params
        second = tmp_path / "params2.csv"
        mio.save_params(loaded, second)
        assert path.read_bytes() == second.read_bytes()

    def test_bundled_estimates_survive(self, tmp_path):
        params = presets.bundled_estimates(DatasetKind.COMMUTE)
        path = tmp_path / "bundled.csv"
        mio.save_params(params, path)
        assert mio.load_params(path) == params


@pytest.fixture(scope="module")
def small_result():
    spec = tiny_spec(n_components=1)
    ds = tiny_dataset(n_individuals=60, n_tasks=3, spec=spec)
    result = estimate(
        ds, spec, settings=EstimationSettings(n_draws=48, seed=2, draw_block=48)
    )
    return spec, result


class TestReports:
    def test_results_text_sections(self, small_result):
        spec, result = small_result
        text = mio.format_results_text(result, spec)
        assert "Alternative specific constants" in text
        assert "Mode attributes" in text
        assert "Model summary" in text
        assert "Null log-likelihood" in text
        assert "Pseudo rho-square" in text
        assert "Convergence: converged" in text

    def test_results_files_written(self, small_result, tmp_path):
        spec, result = small_result
        mio.save_results(result, spec, tmp_path)
        assert (tmp_path / "results.txt").exists()
        lines = (tmp_path / "results.csv").read_text().strip().splitlines()
        assert lines[0] == "section,name,estimate,std_error,p_value"
        assert len(lines) == 1 + len(spec.coefficient_names)
        reloaded = mio.load_params(tmp_path / "estimates.csv")
        assert reloaded == result.estimates

    def test_share_table_emission(self, tmp_path, noncommute_estimates, noncommute_spec):
        grid = presets.substitution_grid(DatasetKind.NONCOMMUTE, seed=0, n_draws=500)
        table = substitution_table(grid, noncommute_estimates, noncommute_spec)
        mio.save_share_table(table, tmp_path, excluded=["walk 10 km (undefined cell)"])
        text = (tmp_path / "shares.txt").read_text()
        assert "Excluded cells: walk 10 km" in text
        lines = (tmp_path / "shares.csv").read_text().strip().splitlines()
        assert len([l for l in lines if not l.startswith("#")]) == 1 + 11

    def test_policy_table_emission(self, tmp_path):
        from modeswitch.model import Alternative

        shares = {"base": [77.0, 11.5, 11.5], "cheaper": [76.0, 11.0, 13.0]}
        deltas = {
            "cheaper": {
                Alternative.STATUS_QUO: -1.0,
                Alternative.SHARED_EV: -0.5,
                Alternative.SHARED_EBIKE: 1.5,
            }
        }
        mio.save_policy_table(shares, deltas, tmp_path)
        lines = (tmp_path / "policies.csv").read_text().strip().splitlines()
        assert len(lines) == 3
        assert lines[1].startswith("base,77.0")


class TestDesignFiles:
    def test_design_csv_and_codebook(self, tmp_path):
        ref = ReferenceTrip(
            mode=CurrentMode.BIKE, distance_km=5.0, travel_time_min=20.0
        )
        tasks = build_commuting_tasks(ref)
        mio.save_design(tasks, tmp_path)
        mio.save_codebook(commuting_plan(ref), "bike commute battery", tmp_path)
        lines = (tmp_path / "design.csv").read_text().strip().splitlines()
        assert lines[0] == "task_id,alternative,attribute,value"
        assert len(lines) == 1 + 27 * 3 * 7
        codebook = (tmp_path / "codebook.txt").read_text()
        assert "ehub_access" in codebook


class TestManifest:
    def test_manifest_contents(self, tmp_path):
        data = tmp_path / "input.csv"
        data.write_text("name,value,fixed\n")
        mio.write_manifest(tmp_path, "estimate", {"seed": 3, "draws": 100}, [data])
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["command"] == "estimate"
        assert manifest["config"]["seed"] == 3
        assert "modeswitch" in manifest["versions"]
        assert list(manifest["inputs"].values())[0]
