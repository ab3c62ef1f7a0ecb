"""Command-line front end.

Subcommands: pipeline (one run), ablate (source/reducer/classifier
grids), sweep (dimension sweep), extract (write per-source feature
blocks), export-fixtures (regenerate the bundled desk-scale fixtures).
Exit codes: 0 ok, 1 validation error, 2 runtime error.
"""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig
from .errors import ConfigError, FerfuseError
from .fixtures_gen import write_fixtures
from .fusion import save_deep_features
from .pipeline import (
    ablation_csv,
    expected_fused_dim,
    extract_source,
    run_ablation,
    run_dim_sweep,
    run_pipeline,
)
from .dataset import load_fer_csv, train_stats

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_json(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def _cmd_pipeline(args):
    cfg = _load_config(args)
    report = run_pipeline(cfg, use_cache=not args.no_cache)
    print(f"accuracy: {report.accuracy:.4f}")
    print(f"canonical hash: {report.canonical_hash}")
    print(f"report: {Path(cfg.out_dir)}/run_{report.canonical_hash[:10]}/report.json")
    return EXIT_OK


def _parse_grid_values(axis, raw):
    values = [v.strip() for v in raw.split(";") if v.strip()]
    if not values:
        raise ConfigError(f"empty value list for axis {axis}")
    return values


def _apply_axis(cfg: RunConfig, axis: str, value: str) -> RunConfig:
    if axis == "sources":
        return replace(cfg, sources=tuple(s.strip() for s in value.split(",") if s.strip()))
    if axis == "reducer_method":
        if value == "none":
            return replace(cfg, reducer=None)
        base = cfg.reducer
        if base is None:
            raise ConfigError("config has no reducer block to vary")
        return replace(cfg, reducer=replace(base, method=value))
    if axis == "reducer_dim":
        return replace(cfg, reducer=replace(cfg.reducer, dim=int(value)))
    if axis == "classifier":
        return replace(cfg, classifier=value)
    raise ConfigError(f"unknown axis {axis}")


def _cmd_ablate(args):
    cfg = _load_config(args)
    axes = []
    value_lists = []
    for spec in args.vary:
        if "=" not in spec:
            raise ConfigError(f"--vary wants axis=v1;v2;..., got {spec!r}")
        axis, raw = spec.split("=", 1)
        axes.append(axis.strip())
        value_lists.append(_parse_grid_values(axis, raw))
    configs = [cfg]
    for axis, values in zip(axes, value_lists):
        configs = [_apply_axis(c, axis, v) for c in configs for v in values]
    rows = run_ablation(
        configs, axes=tuple(axes), use_cache=not args.no_cache, workers=args.workers
    )
    csv_text = ablation_csv(rows, tuple(axes))
    out = Path(args.table or (Path(cfg.out_dir) / "ablation.csv"))
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(csv_text)
    print(csv_text, end="")
    print(f"table: {out}")
    return EXIT_OK


def _cmd_sweep(args):
    cfg = _load_config(args)
    dims = [int(v) for v in args.dims.split(",")]
    methods = args.methods.split(",") if args.methods else None
    rows = run_dim_sweep(cfg, dims, methods=methods, use_cache=not args.no_cache)
    header = ["reducer_method", "reducer_dim", "accuracy", "hash"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(row[h]) for h in header))
    csv_text = "\n".join(lines) + "\n"
    out = Path(args.table or (Path(cfg.out_dir) / "dim_sweep.csv"))
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(csv_text)
    print(csv_text, end="")
    print(f"table: {out}")
    return EXIT_OK


def _cmd_extract(args):
    cfg = _load_config(args)
    cfg.validate()
    ds = load_fer_csv(cfg.dataset)
    mean, std = train_stats(ds)
    out_dir = Path(args.out or cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ids = [str(i) for i in range(len(ds))]
    for source in cfg.sources:
        block = extract_source(source, ds, cfg, mean, std)
        path = out_dir / f"features_{source}.hyf"
        save_deep_features(path, ids, block.astype(np.float32))
        print(f"{source}: {block.shape[0]} rows x {block.shape[1]} -> {path}")
    return EXIT_OK


def _cmd_export_fixtures(args):
    paths = write_fixtures(args.out)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="ferfuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="run config JSON")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default=None, help="override output directory")
        p.add_argument("--no-cache", action="store_true", help="bypass the artifact cache")

    p = sub.add_parser("pipeline", help="run one configuration end to end")
    common(p)
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("ablate", help="run a grid over sources/reducers/classifiers")
    common(p)
    p.add_argument(
        "--vary",
        action="append",
        required=True,
        metavar="AXIS=V1;V2;...",
        help="axis to vary (sources, reducer_method, reducer_dim, classifier); repeatable",
    )
    p.add_argument("--table", default=None, help="where to write the CSV table")
    p.add_argument("--workers", type=int, default=1, help="grid cells run in parallel processes")
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("sweep", help="accuracy per target dimension")
    common(p)
    p.add_argument("--dims", default="2,4,8,16,32", help="comma-separated target dims")
    p.add_argument("--methods", default=None, help="comma-separated reducer methods")
    p.add_argument("--table", default=None, help="where to write the CSV table")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("extract", help="write per-source feature blocks as HYF1 files")
    common(p)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("export-fixtures", help="regenerate the bundled fixtures")
    p.add_argument("--out", default="fixtures", help="output directory")
    p.set_defaults(func=_cmd_export_fixtures)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except FerfuseError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
