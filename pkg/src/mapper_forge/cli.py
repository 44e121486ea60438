"""Command-line entry point: ``mapper-forge <command> ...``.

Exit codes: 0 success, 1 configuration/usage error, 2 runtime error.
Diagnostics go to stderr; artifacts go to the configured paths (or stdout
when no path is configured).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from ._validation import resolve_threads
from .clustering import ClustererSpec
from .datasets import dumps_csv, generate_blobs, generate_circle, save_csv
from .exceptions import ConfigurationError, MapperForgeError
from .experiments import PipelineConfig, PRESETS, failure_mode_bench, get_preset, run_pipeline
from .export import FORMATS, export_dot, export_json, export_svg
from .nerve import MapperGraph

log = logging.getLogger("mapper_forge")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(text, path):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
        log.info("wrote %s", path)


def _load_config(path):
    if not Path(path).exists():
        try:
            return get_preset(path)
        except KeyError:
            raise ConfigurationError(f"config file {path} not found and not a preset name") from None
    return PipelineConfig.load(path)


def cmd_run(args):
    config = _load_config(args.config)
    result = run_pipeline(config, n_jobs=resolve_threads())
    log.info("betti %s, %d vertices, %d edges",
             list(result.betti.betti), len(result.graph.vertices), len(result.graph.edges))
    if args.output or "result" not in config.outputs:
        _emit(result.to_json(), args.output)
    return 0


def cmd_bench(args):
    config = _load_config(args.config)
    specs = [ClustererSpec.parse(tok) for tok in args.clusterers.split(",") if tok.strip()]
    report = failure_mode_bench(config, specs, n_jobs=resolve_threads())
    for entry in report.entries:
        log.info("%-32s betti=%s over=%s under=%s", entry["name"], entry["betti"],
                 entry["overproduced_fibers"], entry["underproduced_fibers"])
    _emit(report.to_json(), args.output or config.outputs.get("report"))
    return 0


def cmd_generate(args):
    if args.shape == "circle":
        data = generate_circle(args.n, args.radius, args.noise_sigma, args.seed)
    else:
        if not args.centers:
            raise ConfigurationError("blobs need --centers, e.g. '0,0;10,0'")
        try:
            centers = [[float(c) for c in block.split(",")] for block in args.centers.split(";")]
        except ValueError:
            raise ConfigurationError(f"cannot parse centers {args.centers!r}") from None
        data = generate_blobs(centers, args.n_per, args.sigma, args.seed)
    if args.output in (None, "-"):
        sys.stdout.write(dumps_csv(data.points))
    else:
        save_csv(data, args.output)
        log.info("wrote %d points to %s", len(data), args.output)
    return 0


def cmd_presets(args):
    if args.show:
        sys.stdout.write(get_preset(args.show).to_json())
        return 0
    for name in sorted(PRESETS):
        print(name)
    return 0


def cmd_export(args):
    try:
        data = json.loads(Path(args.result).read_text(encoding="utf-8"))
        graph = MapperGraph.from_dict(data["graph"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigurationError(f"cannot read result file {args.result}: {exc}") from None
    if args.format == "dot":
        text = export_dot(graph)
    elif args.format == "json":
        text = export_json(graph)
    else:
        dataset = lens_values = pullback = None
        try:
            run = run_pipeline(PipelineConfig.from_dict(dict(data["config"], outputs={})), write=False)
            dataset, lens_values, pullback = run.dataset, run.lens_values, run.mapper.pullback_
        except (MapperForgeError, KeyError, OSError) as exc:
            log.warning("data panel omitted: cannot rebuild the run (%s)", exc)
        text = export_svg(graph, dataset, lens_values, pullback)
    _emit(text, args.output)
    return 0


def build_parser():
    parser = _Parser(prog="mapper-forge", description="Mapper complexes and clusterer distortion benchmarks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("run", help="run the pipeline for a config file or preset")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="write the result JSON here as well")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="compare clusterers on one config")
    p.add_argument("config")
    p.add_argument("--clusterers", required=True,
                   help="comma list, first is the reference, e.g. gap,kmeans:2,kmeans:4")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("generate", help="write a synthetic point cloud as CSV")
    p.add_argument("shape", choices=("circle", "blobs"))
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--centers", help="semicolon-separated centers, e.g. '0,0;10,0'")
    p.add_argument("--n-per", type=int, default=50)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("presets", help="list preset configs")
    p.add_argument("--show", metavar="NAME", help="print one preset as JSON")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("export", help="render a result JSON as dot, json or svg")
    p.add_argument("result")
    p.add_argument("--format", choices=FORMATS, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"mapper-forge: configuration error: {exc}", file=sys.stderr)
        return 1
    except (MapperForgeError, OSError, ValueError) as exc:
        print(f"mapper-forge: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
