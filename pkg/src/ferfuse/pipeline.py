"""The four-stage pipeline and its ablation/sweep harnesses.

Stages: per-source extraction -> descriptor pooling -> per-block
standardization + fusion -> dimensionality reduction (fit on the
configured scope, both splits transformed) -> classifier training on the
train split and evaluation on the test split.  Every random choice flows
from the config seed; extracted blocks, fitted reducers, and trained
models are cached under the output directory keyed by content hashes, so
re-runs (with or without cache) reproduce identical reports.
"""

import hashlib
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import orb, sift
from .classify import (
    knn_predict,
    load_forest,
    load_mlp,
    mlp_predict,
    mlp_train,
    rf_predict,
    rf_train,
    save_forest,
    save_mlp,
)
from .config import RunConfig
from .dataset import N_CLASSES, load_fer_csv, normalize, train_stats
from .errors import ConfigError, DimTooLargeError, FerfuseError, InconsistentGridError
from .fusion import (
    BlockScaler,
    SOURCE_ORDER,
    flatten,
    fuse,
    load_deep_features,
    unpack_bits,
)
from .metrics import confusion
from .reduction import ReducerSpec, fit_reducer, load_reducer, save_reducer, transform
from .report import RunReport, build_report, canonical_json
from .selection import pool_descriptors

SIFT_DIM = 128
ORB_DIM = 256
_SOURCE_SALT = {"vgg": 1, "sift": 2, "orb": 3, "pixels": 4}


def _file_hash(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def _params_hash(params: dict):
    return hashlib.sha256(canonical_json(params).encode()).hexdigest()[:16]


class StageError(FerfuseError):
    """A module error tagged with the pipeline stage it came from."""

    def __init__(self, stage, err):
        self.stage = stage
        self.cause = err
        super().__init__(f"[{stage}] {err}")


def extract_source(source, ds, cfg: RunConfig, mean, std):
    """One feature row per image for the given source."""
    n = len(ds)
    if source == "pixels":
        rows = [normalize(img, mean, std).ravel() for img in ds.images]
        return np.asarray(rows)
    if source == "vgg":
        table = load_deep_features(cfg.deep_features)
        index = {ident: i for i, ident in enumerate(table.ids)}
        missing = [str(i) for i in range(n) if str(i) not in index]
        if missing:
            raise ConfigError(
                f"deep-feature file lacks ids for rows {missing[:5]}"
                + ("..." if len(missing) > 5 else "")
            )
        order = [index[str(i)] for i in range(n)]
        return table.vectors[order].astype(np.float64)
    if source == "sift":
        k_pool, dim = cfg.k_sift, SIFT_DIM
    elif source == "orb":
        k_pool, dim = cfg.k_orb, ORB_DIM
    else:
        raise ConfigError(f"unknown source {source!r}")
    rows = np.empty((n, k_pool * dim))
    for i, img in enumerate(ds.images):
        if source == "sift":
            dset = sift.sift_detect_describe(img, max_keypoints=cfg.max_keypoints)
            mat = dset.vectors
        else:
            dset = orb.detect_and_describe(img, max_keypoints=cfg.max_keypoints)
            mat = unpack_bits(dset.vectors) if len(dset) else np.empty((0, ORB_DIM))
        pool_seed = np.random.SeedSequence([cfg.seed, _SOURCE_SALT[source], i]).generate_state(1)[0]
        pooled = pool_descriptors(mat, k_pool, seed=int(pool_seed)) if len(dset) else np.zeros((k_pool, dim))
        rows[i] = flatten(pooled)
    return rows


def _atomic_write(path: Path, write_fn):
    """Write via a unique temp file + rename so concurrent grid cells never
    observe a partial cache entry."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + f".tmp{os.getpid()}")
    write_fn(tmp)
    os.replace(tmp, path)


def _extract_with_cache(source, ds, cfg, mean, std, cache_dir):
    params = {
        "source": source,
        "k_sift": cfg.k_sift,
        "k_orb": cfg.k_orb,
        "max_keypoints": cfg.max_keypoints,
        "seed": cfg.seed if source in ("sift", "orb") else 0,
        "mean": mean,
        "std": std,
        "dataset": _file_hash(cfg.dataset),
        "deep": _file_hash(cfg.deep_features) if source == "vgg" else None,
    }
    key = _params_hash(params)
    if cache_dir is None:
        return extract_source(source, ds, cfg, mean, std)
    path = Path(cache_dir) / f"block_{source}_{key}.npz"
    if path.is_file():
        return np.load(path)["block"]
    block = extract_source(source, ds, cfg, mean, std)

    def write(tmp):
        with open(tmp, "wb") as fh:
            np.savez_compressed(fh, block=block)

    _atomic_write(path, write)
    return block


def expected_fused_dim(cfg: RunConfig):
    """Fused width, computable without running extraction."""
    total = 0
    for source in cfg.sources:
        if source == "pixels":
            total += 48 * 48
        elif source == "sift":
            total += cfg.k_sift * SIFT_DIM
        elif source == "orb":
            total += cfg.k_orb * ORB_DIM
        elif source == "vgg":
            total += load_deep_features(cfg.deep_features).dim
    return total


def run_pipeline(cfg: RunConfig, use_cache: bool = True) -> RunReport:
    cfg.validate()
    timings = {}
    notes = {}
    t0 = time.perf_counter()
    try:
        ds = load_fer_csv(cfg.dataset)
    except FerfuseError as err:
        raise StageError("load", err) from err
    timings["load"] = time.perf_counter() - t0
    train_mask = ds.train_mask
    test_mask = ds.test_mask
    if not train_mask.any() or not test_mask.any():
        raise ConfigError("dataset needs both train and test rows")

    mean, std = train_stats(ds)
    cache_dir = Path(cfg.out_dir) / "cache" if use_cache else None

    t0 = time.perf_counter()
    blocks = {}
    scalers = {}
    try:
        for source in cfg.sources:
            block = _extract_with_cache(source, ds, cfg, mean, std, cache_dir)
            blocks[source] = block
            scalers[source] = BlockScaler.fit(block[train_mask])
    except FerfuseError as err:
        raise StageError("extract", err) from err
    timings["extract"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        fused = fuse(blocks, cfg.sources, scalers)
    except FerfuseError as err:
        raise StageError("fuse", err) from err
    timings["fuse"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    dr_diag = {"method": None}
    if cfg.reducer is not None:
        if cfg.reducer.dim >= fused.shape[1]:
            raise StageError(
                "reduce",
                DimTooLargeError(
                    f"reducer dim {cfg.reducer.dim} >= fused dimension {fused.shape[1]}"
                ),
            )
        fit_rows = fused[train_mask] if cfg.dr_scope == "train_only" else fused
        try:
            fit = _fit_reducer_with_cache(fit_rows, cfg.reducer, cache_dir)
            train_emb = transform(fit, fused[train_mask])
            test_emb = transform(fit, fused[test_mask])
        except FerfuseError as err:
            raise StageError("reduce", err) from err
        dr_diag = {"method": cfg.reducer.method, **fit.diagnostics}
        # large array diagnostics stay out of the report
        dr_diag = {k: v for k, v in dr_diag.items() if not isinstance(v, np.ndarray)}
    else:
        train_emb = fused[train_mask]
        test_emb = fused[test_mask]
        notes["reducer"] = "disabled (features fed to the classifier unreduced)"
    timings["reduce"] = time.perf_counter() - t0

    y_train = ds.labels[train_mask]
    y_test = ds.labels[test_mask]
    t0 = time.perf_counter()
    try:
        y_pred = _classify_with_cache(cfg, train_emb, y_train, test_emb, cache_dir)
    except FerfuseError as err:
        raise StageError("classify", err) from err
    timings["classify"] = time.perf_counter() - t0

    cm = confusion(y_test, y_pred, N_CLASSES)
    report = build_report(
        cfg_dict=cfg.to_dict(),
        cm=cm,
        dr_diag=dr_diag,
        normalization={"pixel_mean": mean, "pixel_std": std},
        timings=timings,
        notes=notes,
    )
    run_dir = Path(cfg.out_dir) / f"run_{report.canonical_hash[:10]}"
    report.write(run_dir)
    return report


def _fit_reducer_with_cache(rows, spec: ReducerSpec, cache_dir):
    if cache_dir is None:
        return fit_reducer(rows, spec)
    key = _params_hash(
        {
            "spec": spec.__dict__,
            "rows": hashlib.sha256(np.ascontiguousarray(rows).tobytes()).hexdigest()[:16],
        }
    )
    path = Path(cache_dir) / f"reducer_{spec.method}_{key}.blob"
    if path.is_file():
        return load_reducer(path)
    fit = fit_reducer(rows, spec)
    _atomic_write(path, lambda tmp: save_reducer(fit, tmp))
    return fit


def _classify_with_cache(cfg: RunConfig, train_emb, y_train, test_emb, cache_dir):
    params = dict(cfg.classifier_params)
    if cfg.classifier == "knn":
        return knn_predict(train_emb, y_train, test_emb, k=params.get("k", 5))
    key = None
    if cache_dir is not None:
        key = _params_hash(
            {
                "classifier": cfg.classifier,
                "params": params,
                "seed": cfg.seed,
                "x": hashlib.sha256(np.ascontiguousarray(train_emb).tobytes()).hexdigest()[:16],
                "y": hashlib.sha256(np.ascontiguousarray(y_train).tobytes()).hexdigest()[:16],
            }
        )
    if cfg.classifier == "rf":
        model = None
        path = Path(cache_dir) / f"model_rf_{key}.blob" if key else None
        if path is not None and path.is_file():
            model = load_forest(path)
        if model is None:
            model = rf_train(
                train_emb,
                y_train,
                n_trees=params.get("n_trees", 100),
                max_depth=params.get("max_depth", 16),
                m_try=params.get("m_try"),
                seed=cfg.seed,
            )
            if path is not None:
                _atomic_write(path, lambda tmp: save_forest(model, tmp))
        return rf_predict(model, test_emb)
    if cfg.classifier == "mlp":
        model = None
        path = Path(cache_dir) / f"model_mlp_{key}.blob" if key else None
        if path is not None and path.is_file():
            model = load_mlp(path)
        if model is None:
            model = mlp_train(
                train_emb,
                y_train,
                hidden=tuple(params.get("hidden", (64,))),
                epochs=params.get("epochs", 100),
                lr=params.get("lr", 0.01),
                batch_size=params.get("batch_size", 32),
                seed=cfg.seed,
                n_classes=N_CLASSES,
            )
            if path is not None:
                _atomic_write(path, lambda tmp: save_mlp(model, tmp))
        return mlp_predict(model, test_emb)
    raise ConfigError(f"unknown classifier {cfg.classifier!r}")


# ---------------------------------------------------------------------------
# ablation grid and dimension sweep


GRID_AXES = ("sources", "reducer_method", "reducer_dim", "classifier")


def _axis_value(cfg: RunConfig, axis: str):
    if axis == "sources":
        return "+".join(cfg.sources)
    if axis == "reducer_method":
        return cfg.reducer.method if cfg.reducer else "none"
    if axis == "reducer_dim":
        return cfg.reducer.dim if cfg.reducer else "none"
    if axis == "classifier":
        return cfg.classifier
    raise InconsistentGridError(f"unknown grid axis {axis!r}")


def _off_axis_echo(cfg: RunConfig, axes):
    """Config echo with the declared axes blanked out.

    The reducer_method axis exempts the whole reducer block (switching
    methods legitimately switches the method's own hyperparameters, and a
    no-reducer baseline row reads as method "none"); likewise the
    classifier axis exempts the classifier params.
    """
    echo = cfg.to_dict()
    if "sources" in axes:
        echo.pop("sources")
    if "classifier" in axes:
        echo.pop("classifier")
    if "reducer_method" in axes:
        echo.pop("reducer")
    elif "reducer_dim" in axes and echo["reducer"] is not None:
        echo["reducer"].pop("dim")
    return canonical_json(echo)


def _run_cell(args):
    cfg, use_cache = args
    return run_pipeline(cfg, use_cache=use_cache)


def run_ablation(configs, axes=("sources",), use_cache: bool = True, workers: int = 1):
    """One pipeline run per config; configs may differ only on the declared
    axes.  Returns a row dict per cell, in grid order.

    Cells are isolated deterministic pipelines, so ``workers > 1`` fans
    them out over processes; cache writes are atomic and results identical
    to a sequential run.
    """
    if not configs:
        raise InconsistentGridError("empty grid")
    for axis in axes:
        if axis not in GRID_AXES:
            raise InconsistentGridError(f"unknown grid axis {axis!r}")
    reference = _off_axis_echo(configs[0], axes)
    for cfg in configs[1:]:
        if _off_axis_echo(cfg, axes) != reference:
            raise InconsistentGridError(
                "grid configs differ outside the declared axes"
            )
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_cell, [(cfg, use_cache) for cfg in configs]))
    else:
        reports = [run_pipeline(cfg, use_cache=use_cache) for cfg in configs]
    rows = []
    for cfg, report in zip(configs, reports):
        row = {axis: _axis_value(cfg, axis) for axis in axes}
        row["accuracy"] = report.accuracy
        row["hash"] = report.canonical_hash
        rows.append(row)
    return rows


def ablation_csv(rows, axes):
    header = list(axes) + ["accuracy", "hash"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(row[h]) for h in header))
    return "\n".join(lines) + "\n"


def run_dim_sweep(base: RunConfig, dims, methods=None, use_cache: bool = True):
    """Accuracy per dimension per reducer method."""
    base.validate()
    if base.reducer is None:
        raise ConfigError("dimension sweep needs a reducer")
    fused_dim = expected_fused_dim(base)
    bad = [d for d in dims if d >= fused_dim]
    if bad:
        raise DimTooLargeError(f"dims {bad} >= fused dimension {fused_dim}")
    if methods is None:
        methods = [base.reducer.method]
    rows = []
    for method in methods:
        for d in dims:
            cfg = replace(base, reducer=replace(base.reducer, method=method, dim=d))
            report = run_pipeline(cfg, use_cache=use_cache)
            rows.append(
                {
                    "reducer_method": method,
                    "reducer_dim": d,
                    "accuracy": report.accuracy,
                    "hash": report.canonical_hash,
                }
            )
    return rows
