"""Orientation recognition for cardiac MR slices."""

from ._geonet import (
    Model,
    apply,
    clahe,
    compose,
    count_3d,
    entropy,
    histogram,
    inverse,
    synth_phantom,
    train,
    transforms,
)

__all__ = [
    "Model",
    "apply",
    "clahe",
    "compose",
    "count_3d",
    "entropy",
    "histogram",
    "inverse",
    "synth_phantom",
    "train",
    "transforms",
]
