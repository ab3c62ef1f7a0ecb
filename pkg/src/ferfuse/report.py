"""Run reports: canonical JSON with a timing-independent content hash."""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .metrics import ConfusionMatrix, accuracy, confusion_csv, per_class_stats


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass
class RunReport:
    config: dict
    accuracy: float
    confusion: list  # (C, C) nested lists
    per_class: list
    dr_diagnostics: dict
    normalization: dict
    timings: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def core_dict(self):
        """Everything that participates in the canonical hash (timings are
        environment noise and stay out)."""
        return {
            "config": self.config,
            "accuracy": self.accuracy,
            "confusion": self.confusion,
            "per_class": self.per_class,
            "dr_diagnostics": self.dr_diagnostics,
            "normalization": self.normalization,
            "notes": self.notes,
        }

    @property
    def canonical_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.core_dict()).encode()).hexdigest()

    def to_dict(self):
        out = self.core_dict()
        out["timings"] = self.timings
        out["canonical_hash"] = self.canonical_hash
        return out

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        cm = ConfusionMatrix(counts=np.asarray(self.confusion))
        (out / "confusion.csv").write_text(confusion_csv(cm))
        return out / "report.json"


def build_report(cfg_dict, cm: ConfusionMatrix, dr_diag, normalization, timings, notes=None) -> RunReport:
    return RunReport(
        config=cfg_dict,
        accuracy=accuracy(cm),
        confusion=cm.counts.tolist(),
        per_class=per_class_stats(cm),
        dr_diagnostics=dr_diag,
        normalization=normalization,
        timings=timings,
        notes=notes or {},
    )
