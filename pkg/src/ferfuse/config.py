"""Run configuration: JSON schema, validation, derived seeds."""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .fusion import SOURCE_ORDER
from .reduction import ReducerSpec

SCHEMA_VERSION = 1
CLASSIFIERS = ("rf", "knn", "mlp")


@dataclass(frozen=True)
class RunConfig:
    dataset: str
    deep_features: str | None = None
    sources: tuple = ("vgg", "sift", "orb")
    k_sift: int = 16
    k_orb: int = 16
    max_keypoints: int | None = None
    reducer: ReducerSpec | None = field(default_factory=ReducerSpec)
    classifier: str = "rf"
    classifier_params: dict = field(default_factory=dict)
    seed: int = 0
    dr_scope: str = "train_only"
    out_dir: str = "runs"

    def validate(self):
        if not self.sources:
            raise ConfigError("at least one source must be enabled")
        unknown = [s for s in self.sources if s not in SOURCE_ORDER]
        if unknown:
            raise ConfigError(f"unknown sources {unknown}; valid: {list(SOURCE_ORDER)}")
        if len(set(self.sources)) != len(self.sources):
            raise ConfigError("duplicate sources")
        if not Path(self.dataset).is_file():
            raise ConfigError(f"dataset file not found: {self.dataset}")
        if "vgg" in self.sources:
            if self.deep_features is None:
                raise ConfigError(
                    "the vgg source needs a deep-feature file (deep_features); "
                    "produce one with the standalone exporter: "
                    "fer-deep-export export --dataset <csv> --out <file.hyf>"
                )
            if not Path(self.deep_features).is_file():
                raise ConfigError(f"deep-feature file not found: {self.deep_features}")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(f"unknown classifier {self.classifier!r}")
        if self.dr_scope not in ("train_only", "transductive"):
            raise ConfigError(f"dr_scope must be train_only or transductive")
        if self.k_sift < 1 or self.k_orb < 1:
            raise ConfigError("selection sizes must be >= 1")
        return self

    def with_seed(self, seed: int):
        reducer = replace(self.reducer, seed=seed) if self.reducer else None
        return replace(self, seed=seed, reducer=reducer)

    def seed_sequence(self):
        return np.random.SeedSequence(self.seed)

    def to_dict(self):
        reducer = None
        if self.reducer is not None:
            reducer = {
                k: v for k, v in self.reducer.__dict__.items()
            }
        return {
            "schema_version": SCHEMA_VERSION,
            "dataset": self.dataset,
            "deep_features": self.deep_features,
            "sources": list(self.sources),
            "selection": {
                "k_sift": self.k_sift,
                "k_orb": self.k_orb,
                "max_keypoints": self.max_keypoints,
            },
            "reducer": reducer,
            "classifier": {"name": self.classifier, "params": self.classifier_params},
            "seed": self.seed,
            "dr_scope": self.dr_scope,
            "out_dir": self.out_dir,
        }

    @classmethod
    def from_dict(cls, data: dict):
        if data.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {data.get('schema_version')}")
        try:
            selection = data.get("selection", {})
            reducer_data = data.get("reducer", {})
            reducer = ReducerSpec(**reducer_data) if reducer_data is not None else None
            classifier = data.get("classifier", {})
            return cls(
                dataset=data["dataset"],
                deep_features=data.get("deep_features"),
                sources=tuple(data.get("sources", ("vgg", "sift", "orb"))),
                k_sift=selection.get("k_sift", 16),
                k_orb=selection.get("k_orb", 16),
                max_keypoints=selection.get("max_keypoints"),
                reducer=reducer,
                classifier=classifier.get("name", "rf"),
                classifier_params=classifier.get("params", {}),
                seed=data.get("seed", 0),
                dr_scope=data.get("dr_scope", "train_only"),
                out_dir=data.get("out_dir", "runs"),
            )
        except (KeyError, TypeError, ValueError) as err:
            raise ConfigError(f"bad config: {err}") from err

    @classmethod
    def from_json(cls, path):
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        return cls.from_dict(data)

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
