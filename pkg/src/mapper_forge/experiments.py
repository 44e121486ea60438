"""Pipeline configs, end-to-end runs and the fixed-count distortion benchmark."""

from __future__ import annotations

import json
import types
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .clustering import ClustererSpec
from .cover import CubicalCover
from .datasets import Dataset, dumps_csv, generate_blobs, generate_circle, load_csv
from .exceptions import ConfigurationError, MapperForgeError, PipelineError, PresetNotFoundError
from .lens import LensSpec
from .mapper import Mapper

OUTPUT_KEYS = ("result", "fiber_stats", "labels", "dot", "svg", "report")
_GENERATORS = {
    "circle": ({"n", "radius", "noise_sigma", "seed"}, {"n"}),
    "blobs": ({"centers", "n_per", "sigma", "seed"}, {"centers", "n_per"}),
}


def _freeze(value):
    if isinstance(value, dict):
        return types.MappingProxyType({k: _freeze(v) for k, v in value.items()})
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    return value


def _thaw(value):
    if isinstance(value, types.MappingProxyType | dict):
        return {k: _thaw(v) for k, v in value.items()}
    if isinstance(value, tuple):
        return [_thaw(v) for v in value]
    return value


def _check_dataset_source(source):
    if "csv" in source:
        if set(source) != {"csv"}:
            raise ConfigurationError(f"csv dataset source takes only 'csv', got {sorted(source)}")
        return
    gen = source.get("generator")
    if gen not in _GENERATORS:
        raise ConfigurationError(f"dataset needs 'csv' or a generator in {sorted(_GENERATORS)}, got {gen!r}")
    allowed, required = _GENERATORS[gen]
    params = set(source) - {"generator"}
    if params - allowed:
        raise ConfigurationError(f"unknown {gen} parameters {sorted(params - allowed)}")
    if required - params:
        raise ConfigurationError(f"missing {gen} parameters {sorted(required - params)}")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a Mapper run depends on.

    ``dataset`` is ``{"generator": "circle" | "blobs", ...params}`` or
    ``{"csv": path}``. ``lens_csv`` optionally replaces the lens with
    precomputed values (one CSV row per point). ``seed`` seeds generators
    and k-means clusterers that do not carry their own seed. ``outputs``
    maps any of ``result, fiber_stats, labels, dot, svg, report`` to paths.
    """

    dataset: dict
    lens: LensSpec = field(default_factory=LensSpec)
    n_intervals: tuple = (10,)
    overlap_frac: float = 0.5
    clusterer: ClustererSpec = field(default_factory=lambda: ClustererSpec("single_linkage_gap"))
    max_dim: int = 2
    seed: int = 0
    lens_csv: str | None = None
    outputs: dict = field(default_factory=dict)
    name: str = ""
    description: str = ""

    def __post_init__(self):
        if not isinstance(self.dataset, types.MappingProxyType | dict):
            raise ConfigurationError("dataset must be a mapping")
        _check_dataset_source(self.dataset)
        object.__setattr__(self, "dataset", _freeze(dict(self.dataset)))
        n = self.n_intervals
        n = (n,) if np.ndim(n) == 0 else tuple(n)
        if not n or any(isinstance(k, bool) or int(k) != k or k < 1 for k in n):
            raise ConfigurationError(f"n_intervals must be positive integers, got {self.n_intervals!r}")
        object.__setattr__(self, "n_intervals", tuple(int(k) for k in n))
        if not 0 <= float(self.overlap_frac) < 1:
            raise ConfigurationError(f"overlap_frac must lie in [0, 1), got {self.overlap_frac}")
        object.__setattr__(self, "overlap_frac", float(self.overlap_frac))
        if isinstance(self.max_dim, bool) or int(self.max_dim) != self.max_dim or self.max_dim < 1:
            raise ConfigurationError(f"max_dim must be an integer >= 1, got {self.max_dim!r}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        unknown = set(self.outputs) - set(OUTPUT_KEYS)
        if unknown:
            raise ConfigurationError(f"unknown outputs {sorted(unknown)}; expected some of {OUTPUT_KEYS}")
        object.__setattr__(self, "outputs", _freeze(dict(self.outputs)))

    def with_clusterer(self, spec: ClustererSpec) -> "PipelineConfig":
        return replace(self, clusterer=spec)

    def to_dict(self):
        out = {
            "name": self.name,
            "description": self.description,
            "dataset": _thaw(self.dataset),
            "lens": self.lens.to_dict(),
            "cover": {"n_intervals": list(self.n_intervals), "overlap_frac": self.overlap_frac},
            "clusterer": self.clusterer.to_dict(),
            "max_dim": self.max_dim,
            "seed": self.seed,
            "outputs": _thaw(self.outputs),
        }
        if self.lens_csv is not None:
            out["lens_csv"] = self.lens_csv
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = {"name", "description", "dataset", "lens", "cover", "clusterer", "max_dim", "seed",
                 "outputs", "lens_csv"}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config fields {sorted(unknown)}")
        if "dataset" not in data:
            raise ConfigurationError("config needs a 'dataset'")
        cover = dict(data.get("cover", {}))
        if set(cover) - {"n_intervals", "overlap_frac"}:
            raise ConfigurationError(f"unknown cover fields {sorted(set(cover) - {'n_intervals', 'overlap_frac'})}")
        clusterer = data.get("clusterer", {"kind": "single_linkage_gap"})
        clusterer = ClustererSpec.parse(clusterer) if isinstance(clusterer, str) else ClustererSpec.from_dict(clusterer)
        return cls(
            dataset=data["dataset"],
            lens=LensSpec.from_dict(data.get("lens", {})),
            n_intervals=cover.get("n_intervals", (10,)),
            overlap_frac=cover.get("overlap_frac", 0.5),
            clusterer=clusterer,
            max_dim=data.get("max_dim", 2),
            seed=data.get("seed", 0),
            lens_csv=data.get("lens_csv"),
            outputs=data.get("outputs", {}),
            name=data.get("name", ""),
            description=data.get("description", ""),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        config = cls.from_json(Path(path).read_text(encoding="utf-8"))
        base = Path(path).resolve().parent
        # relative input paths are taken relative to the config file
        dataset = _thaw(config.dataset)
        if "csv" in dataset:
            dataset["csv"] = str(base / dataset["csv"])
        lens_csv = None if config.lens_csv is None else str(base / config.lens_csv)
        return replace(config, dataset=dataset, lens_csv=lens_csv)


def make_dataset(config: PipelineConfig) -> Dataset:
    source = _thaw(config.dataset)
    if "csv" in source:
        return load_csv(source["csv"])
    gen = source.pop("generator")
    source.setdefault("seed", config.seed)
    if gen == "circle":
        return generate_circle(**source)
    return generate_blobs(**source)


@dataclass
class PipelineResult:
    config: PipelineConfig
    dataset: Dataset
    mapper: Mapper

    @property
    def graph(self):
        return self.mapper.graph_

    @property
    def nerve(self):
        return self.mapper.nerve_

    @property
    def betti(self):
        return self.mapper.betti_

    @property
    def lens_values(self):
        return self.mapper.lens_values_

    @property
    def fiber_stats(self):
        return self.mapper.refinement_.stats

    @property
    def dropped_noise(self) -> int:
        """Points that end up in no vertex of the complex."""
        covered = set()
        for e in self.mapper.refinement_.elements:
            covered |= e.members
        return len(self.dataset) - len(covered)

    def cluster_counts(self):
        return {tuple(s.cover_index): s.num_clusters for s in self.fiber_stats}

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "cover": self.mapper.cover_.to_dict(),
            "graph": self.graph.to_dict(),
            "nerve": self.nerve.to_dict(),
            "betti": self.betti.to_dict(),
            "expected_betti": None if self.dataset.expected_betti is None else list(self.dataset.expected_betti),
            "fibers": [
                {"cover_index": list(s.cover_index), "fiber_size": s.fiber_size,
                 "num_clusters": s.num_clusters, "noise_count": s.noise_count}
                for s in self.fiber_stats
            ],
            "dropped_noise": self.dropped_noise,
            "n_points": len(self.dataset),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def fiber_stats_csv(self) -> str:
        lines = ["fiber_index,fiber_size,num_clusters,noise_count"]
        for s in self.fiber_stats:
            lines.append(f"{_fiber_name(s.cover_index)},{s.fiber_size},{s.num_clusters},{s.noise_count}")
        return "\n".join(lines) + "\n"

    def labels_csv(self) -> str:
        lines = ["point_index,fiber_index,label"]
        rows = []
        for idx, labels in self.mapper.refinement_.labels.items():
            for point, label in labels.items():
                rows.append((point, idx, label))
        for point, idx, label in sorted(rows):
            lines.append(f"{point},{_fiber_name(idx)},{label}")
        return "\n".join(lines) + "\n"

    def write_outputs(self):
        from .export import export_dot, export_svg

        outputs = self.config.outputs
        writers = {
            "result": self.to_json,
            "fiber_stats": self.fiber_stats_csv,
            "labels": self.labels_csv,
            "dot": lambda: export_dot(self.graph),
            "svg": lambda: export_svg(self.graph, self.dataset, self.lens_values, self.mapper.pullback_),
        }
        written = []
        for key, render in writers.items():
            if key in outputs:
                path = Path(outputs[key])
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(render(), encoding="utf-8", newline="\n")
                written.append(path)
        return written


def _fiber_name(index) -> str:
    return "-".join(str(i) for i in index)


def run_pipeline(config: PipelineConfig, write=True, n_jobs=None) -> PipelineResult:
    """Run the full Mapper pipeline for ``config``.

    The run is a pure function of the config; errors carry the stage that
    raised them (and the fiber, for clustering configuration errors).
    """
    stage = "dataset"
    try:
        dataset = make_dataset(config)
        stage = "lens"
        lens_values = None
        if config.lens_csv is not None:
            lens_values = load_csv(config.lens_csv).points
            if lens_values.shape[0] != len(dataset):
                raise ConfigurationError(
                    f"{lens_values.shape[0]} lens rows for {len(dataset)} points in {config.lens_csv}")
        stage = "mapper"
        # a single interval count applies to every lens axis
        n_intervals = config.n_intervals[0] if len(config.n_intervals) == 1 else list(config.n_intervals)
        mapper = Mapper(
            lens=config.lens.build(),
            cover=CubicalCover(n_intervals, config.overlap_frac),
            clusterer=config.clusterer.build(default_seed=config.seed),
            max_dim=config.max_dim,
            n_jobs=n_jobs,
        ).fit(dataset.points, lens_values=lens_values)
        result = PipelineResult(config, dataset, mapper)
        if write:
            stage = "outputs"
            result.write_outputs()
        return result
    except ConfigurationError as exc:
        raise ConfigurationError(f"[{stage}] {exc}") from exc
    except (MapperForgeError, OSError, ValueError) as exc:
        raise PipelineError(str(exc), stage=stage) from exc


# --------------------------------------------------------------------------
# distortion benchmark


@dataclass
class DistortionReport:
    """Per-clusterer outcome of a benchmark, judged against the first (reference) entry."""

    reference: str
    ground_truth_betti: list | None
    fibers: list
    entries: list

    def entry(self, name):
        for e in self.entries:
            if e["name"] == name:
                return e
        raise KeyError(name)

    def to_dict(self):
        return {
            "reference": self.reference,
            "ground_truth_betti": self.ground_truth_betti,
            "fibers": self.fibers,
            "entries": self.entries,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def compare_fiber_counts(counts, reference):
    """Fibers with more (over) and fewer (under) clusters than the reference."""
    over = [list(i) for i in sorted(counts) if counts[i] > reference[i]]
    under = [list(i) for i in sorted(counts) if counts[i] < reference[i]]
    return over, under


def failure_mode_bench(base_config: PipelineConfig, clusterers, n_jobs=None) -> DistortionReport:
    """Run the pipeline once per clusterer on the same data and cover.

    The first clusterer is the reference: a fiber is overproduced when a
    run finds more clusters there than the reference, underproduced when
    it finds fewer.
    """
    specs = [ClustererSpec.parse(c) if isinstance(c, str) else c for c in clusterers]
    if not specs:
        raise ConfigurationError("clusterer list must be nonempty")
    runs = [run_pipeline(base_config.with_clusterer(s), write=False, n_jobs=n_jobs) for s in specs]
    ref_counts = runs[0].cluster_counts()
    ref_betti = list(runs[0].betti.betti)
    truth = runs[0].dataset.expected_betti
    entries = []
    for spec, run in zip(specs, runs):
        counts = run.cluster_counts()
        over, under = compare_fiber_counts(counts, ref_counts)
        betti = list(run.betti.betti)
        entries.append({
            "name": spec.name,
            "clusterer": spec.to_dict(),
            "fixed_count": spec.fixed_count,
            "betti": betti,
            "euler": run.betti.euler,
            "n_vertices": len(run.graph.vertices),
            "n_edges": len(run.graph.edges),
            "n_triangles": run.nerve.count(2),
            "per_fiber_clusters": [counts[i] for i in sorted(counts)],
            "dropped_noise": run.dropped_noise,
            "overproduced_fibers": over,
            "underproduced_fibers": under,
            "matches_reference": betti == ref_betti,
            "matches_ground_truth": None if truth is None else betti[: len(truth)] == list(truth),
        })
    return DistortionReport(
        reference=specs[0].name,
        ground_truth_betti=None if truth is None else list(truth),
        fibers=[list(i) for i in sorted(ref_counts)],
        entries=entries,
    )


# --------------------------------------------------------------------------
# presets

_CIRCLE = {"generator": "circle", "n": 400, "radius": 1.0, "noise_sigma": 0.05, "seed": 7}

_PRESETS = {
    "fig1-circle": PipelineConfig(
        name="fig1-circle",
        description="Noisy circle under a height lens: the expected output is a single cycle.",
        dataset=_CIRCLE,
        lens=LensSpec("coordinate", axis=1),
        n_intervals=(4,),
        overlap_frac=0.35,
        clusterer=ClustererSpec("single_linkage_gap", {"num_bins": 10}),
        max_dim=2,
        seed=7,
    ),
    "kepler-lens-demo": PipelineConfig(
        name="kepler-lens-demo",
        description="Cover of 15 cubes at 70% overlap with 2-means (random_state 3471), "
                    "as in a widely copied lens demo; applied to the noisy circle.",
        dataset=_CIRCLE,
        lens=LensSpec("coordinate", axis=1),
        n_intervals=(15,),
        overlap_frac=0.7,
        clusterer=ClustererSpec("kmeans", {"k": 2, "seed": 3471}),
        max_dim=2,
        seed=7,
    ),
    "tda-mapper-digits-shape": PipelineConfig(
        name="tda-mapper-digits-shape",
        description="10 intervals at 65% overlap with a fixed count of 10 clusters. The original "
                    "example uses fixed-count agglomerative clustering; k-means with k=10 stands in "
                    "for it here, on the noisy circle instead of the digits data.",
        dataset=_CIRCLE,
        lens=LensSpec("coordinate", axis=1),
        n_intervals=(10,),
        overlap_frac=0.65,
        clusterer=ClustererSpec("kmeans", {"k": 10}),
        max_dim=2,
        seed=7,
    ),
}
PRESETS = types.MappingProxyType(_PRESETS)


def preset_configs():
    """Read-only mapping of preset name to :class:`PipelineConfig`."""
    return PRESETS


def get_preset(name: str) -> PipelineConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise PresetNotFoundError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}") from None


def lens_values_csv(result: PipelineResult) -> str:
    return dumps_csv(result.lens_values)
