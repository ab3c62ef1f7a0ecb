"""Standalone exporter: pretrained-CNN features for FER CSVs, written as
HYF1 feature files plus a JSON manifest."""

__version__ = "0.1.0"
