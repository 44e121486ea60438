"""Mapper complexes with pluggable per-fiber clusterers and distortion benchmarks."""

__version__ = "0.1.0"

from .clustering import (
    DBSCAN,
    NOISE,
    AdaptiveKMeans,
    ClusterLabeling,
    ClustererSpec,
    KMeans,
    SingleLinkageGap,
    adaptive_kmeans,
    dbscan,
    kmeans_lloyd,
    largest_gap_cut,
    silhouette_score,
    single_linkage_gap,
    single_linkage_merge_distances,
)
from .cover import CubicalCover, PullbackCover, build_cover, pullback
from .datasets import Dataset, Metric, generate_blobs, generate_circle, load_csv, pairwise_distances, save_csv
from .experiments import (
    DistortionReport,
    PipelineConfig,
    PipelineResult,
    failure_mode_bench,
    get_preset,
    preset_configs,
    run_pipeline,
)
from .export import export_dot, export_json, export_svg
from .homology import BettiProfile, betti_gf2, connected_components, graph_cycle_rank
from .lens import CoordinateLens, EccentricityLens, LensSpec, apply_lens
from .mapper import Mapper
from .nerve import MapperGraph, NerveComplex, RefinedElement, build_nerve, mapper_graph, refine, refine_cover

__all__ = [name for name in dir() if not name.startswith("_") and name not in {
    "clustering", "cover", "datasets", "exceptions", "experiments", "export", "homology", "lens", "mapper", "nerve",
}]
