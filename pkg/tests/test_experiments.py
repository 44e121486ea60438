import json
import re

import numpy as np
import pytest

from mapper_forge import (
    ClustererSpec, LensSpec, PipelineConfig, failure_mode_bench, get_preset, preset_configs, run_pipeline, save_csv,
)
from mapper_forge.exceptions import ConfigurationError, PipelineError, PresetNotFoundError
from mapper_forge.experiments import compare_fiber_counts, lens_values_csv

REFERENCE = get_preset("fig1-circle")


class TestConfig:
    def test_json_round_trip(self):
        for config in preset_configs().values():
            again = PipelineConfig.from_json(config.to_json())
            assert again == config
            assert again.to_json() == config.to_json()

    def test_short_clusterer_string(self):
        data = json.loads(REFERENCE.to_json())
        data["clusterer"] = "kmeans:2:3471"
        assert PipelineConfig.from_dict(data).clusterer == ClustererSpec("kmeans", {"k": 2, "seed": 3471})

    def test_frozen(self):
        with pytest.raises(Exception):
            REFERENCE.seed = 3
        with pytest.raises(TypeError):
            REFERENCE.dataset["n"] = 3

    @pytest.mark.parametrize("patch", [
        {"overlap_frac": 1.0},
        {"n_intervals": (0,)},
        {"max_dim": 0},
        {"seed": -1},
        {"outputs": {"plot": "x.png"}},
        {"dataset": {"generator": "torus", "n": 3}},
        {"dataset": {"generator": "circle"}},
        {"dataset": {"generator": "circle", "n": 4, "colour": 1}},
    ])
    def test_invalid_fields(self, patch):
        kwargs = dict(dataset=dict(REFERENCE.dataset), **{k: v for k, v in patch.items() if k != "dataset"})
        if "dataset" in patch:
            kwargs["dataset"] = patch["dataset"]
        with pytest.raises(ConfigurationError):
            PipelineConfig(**kwargs)

    def test_unknown_top_level_field(self):
        data = json.loads(REFERENCE.to_json())
        data["colour"] = "red"
        with pytest.raises(ConfigurationError, match="colour"):
            PipelineConfig.from_dict(data)

    def test_invalid_json(self):
        with pytest.raises(ConfigurationError):
            PipelineConfig.from_json("{not json")

    def test_load_resolves_relative_csv(self, tmp_path, circle):
        (tmp_path / "data").mkdir()
        save_csv(circle, tmp_path / "data" / "circle.csv")
        data = json.loads(REFERENCE.to_json())
        data["dataset"] = {"csv": "data/circle.csv"}
        (tmp_path / "cfg.json").write_text(json.dumps(data))
        config = PipelineConfig.load(tmp_path / "cfg.json")
        assert config.dataset["csv"] == str(tmp_path / "data" / "circle.csv")
        assert run_pipeline(config, write=False).betti.betti == (1, 1)


class TestPresets:
    def test_names(self):
        assert set(preset_configs()) == {"kepler-lens-demo", "tda-mapper-digits-shape", "fig1-circle"}

    def test_kepler_parameters(self):
        cfg = get_preset("kepler-lens-demo")
        assert (cfg.n_intervals, cfg.overlap_frac) == ((15,), 0.7)
        assert cfg.clusterer == ClustererSpec("kmeans", {"k": 2, "seed": 3471})

    def test_digits_parameters(self):
        cfg = get_preset("tda-mapper-digits-shape")
        assert (cfg.n_intervals, cfg.overlap_frac, cfg.clusterer.params["k"]) == ((10,), 0.65, 10)

    def test_unknown(self):
        with pytest.raises(PresetNotFoundError, match="fig1-circle"):
            get_preset("nope")

    def test_read_only(self):
        with pytest.raises(TypeError):
            preset_configs()["mine"] = REFERENCE

    @pytest.mark.parametrize("name", sorted(preset_configs()))
    def test_each_preset_runs(self, name):
        result = run_pipeline(get_preset(name), write=False)
        assert result.betti.betti[0] >= 1


class TestRunPipeline:
    def test_reference(self):
        result = run_pipeline(REFERENCE, write=False)
        assert result.betti.betti == (1, 1)
        assert result.cluster_counts() == {(0,): 1, (1,): 2, (2,): 2, (3,): 1}
        assert result.dropped_noise == 0

    def test_deterministic(self):
        assert run_pipeline(REFERENCE, write=False).to_json() == run_pipeline(REFERENCE, write=False).to_json()

    def test_threads_do_not_change_output(self):
        assert (run_pipeline(REFERENCE, write=False, n_jobs=1).to_json()
                == run_pipeline(REFERENCE, write=False, n_jobs=4).to_json())

    def test_writes_outputs(self, tmp_path):
        names = {"result": "r.json", "fiber_stats": "f.csv", "labels": "l.csv", "dot": "g.dot", "svg": "g.svg"}
        config = PipelineConfig.from_dict(dict(json.loads(REFERENCE.to_json()),
                                               outputs={k: str(tmp_path / v) for k, v in names.items()}))
        result = run_pipeline(config)
        assert all((tmp_path / v).exists() for v in names.values())
        assert (tmp_path / "r.json").read_text() == result.to_json()
        stats = (tmp_path / "f.csv").read_text().splitlines()
        assert stats[0] == "fiber_index,fiber_size,num_clusters,noise_count"
        assert [row.split(",")[2] for row in stats[1:]] == ["1", "2", "2", "1"]
        labels = (tmp_path / "l.csv").read_text().splitlines()
        assert len(labels) - 1 == int(result.mapper.pullback_.multiplicity().sum())

    def test_lens_csv(self, tmp_path):
        base = run_pipeline(REFERENCE, write=False)
        (tmp_path / "lens.csv").write_text(lens_values_csv(base))
        config = PipelineConfig.from_dict(dict(json.loads(REFERENCE.to_json()), lens_csv=str(tmp_path / "lens.csv")))
        assert run_pipeline(config, write=False).graph.to_dict() == base.graph.to_dict()

    def test_lens_csv_length_mismatch(self, tmp_path):
        (tmp_path / "lens.csv").write_text("0.0\n1.0\n")
        config = PipelineConfig.from_dict(dict(json.loads(REFERENCE.to_json()), lens_csv=str(tmp_path / "lens.csv")))
        with pytest.raises(ConfigurationError, match=r"^\[lens\]"):
            run_pipeline(config, write=False)

    def test_clusterer_error_names_stage_and_fiber(self):
        config = REFERENCE.with_clusterer(ClustererSpec("kmeans", {"k": 500}))
        with pytest.raises(ConfigurationError) as info:
            run_pipeline(config, write=False)
        assert re.match(r"\[mapper\] fiber \(0,\)", str(info.value))

    def test_missing_csv_is_dataset_stage(self, tmp_path):
        config = PipelineConfig(dataset={"csv": str(tmp_path / "absent.csv")})
        with pytest.raises(PipelineError) as info:
            run_pipeline(config, write=False)
        assert info.value.stage == "dataset"

    def test_horizontal_lens_also_finds_cycle(self):
        config = PipelineConfig(dataset=dict(REFERENCE.dataset), lens=LensSpec("coordinate", axis=0),
                                n_intervals=(5,), overlap_frac=0.3, seed=7)
        assert run_pipeline(config, write=False).betti.betti == (1, 1)


class TestBench:
    def test_single_entry_is_its_own_reference(self):
        report = failure_mode_bench(REFERENCE, ["gap"])
        [entry] = report.entries
        assert entry["matches_reference"] and entry["overproduced_fibers"] == entry["underproduced_fibers"] == []
        assert entry["matches_ground_truth"] is True

    def test_duplicate_entries_agree(self):
        report = failure_mode_bench(REFERENCE, ["kmeans:3", "kmeans:3"])
        a, b = report.entries
        assert a == b and b["matches_reference"]

    def test_empty_list(self):
        with pytest.raises(ConfigurationError):
            failure_mode_bench(REFERENCE, [])

    def test_verdicts_are_consistent(self):
        report = failure_mode_bench(REFERENCE, ["gap", "kmeans:2:3471", "kmeans:4", "dbscan:0.15:3", "adaptive"])
        ref = report.entries[0]["per_fiber_clusters"]
        for e in report.entries:
            counts = e["per_fiber_clusters"]
            over = [f for f, c, r in zip(report.fibers, counts, ref) if c > r]
            under = [f for f, c, r in zip(report.fibers, counts, ref) if c < r]
            assert e["overproduced_fibers"] == over and e["underproduced_fibers"] == under
            assert e["n_vertices"] == sum(counts)
            assert e["matches_ground_truth"] == (e["betti"][:2] == [1, 1])
            assert e["fixed_count"] == (e["clusterer"]["kind"] == "kmeans")

    def test_report_json_is_stable(self):
        a = failure_mode_bench(REFERENCE, ["gap", "kmeans:4"]).to_json()
        b = failure_mode_bench(REFERENCE, ["gap", "kmeans:4"]).to_json()
        assert a == b


def test_compare_fiber_counts():
    over, under = compare_fiber_counts({(0,): 3, (1,): 1, (2,): 2}, {(0,): 1, (1,): 2, (2,): 2})
    assert (over, under) == ([[0]], [[1]])


def test_blobs_pipeline_finds_components():
    config = PipelineConfig(
        dataset={"generator": "blobs", "centers": [[0, 0], [10, 0], [0, 10]], "n_per": 30, "sigma": 0.5, "seed": 2},
        lens=LensSpec("coordinate", axis=0), n_intervals=(1,), overlap_frac=0.0,
    )
    result = run_pipeline(config, write=False)
    # a single fiber holds everything, so the clusterer alone must separate the blobs
    assert result.betti.betti[:2] == result.dataset.expected_betti == (3, 0)
    assert np.all(result.mapper.pullback_.multiplicity() == 1)
