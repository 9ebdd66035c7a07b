"""
Trained-model files.

A model file is a JSON document with ``format``/``version`` headers,
the feature schema, kernel descriptor, optional scaling bounds, support
vectors, dual coefficients and bias. Floats are written with Python's
shortest round-trip representation, so loading reproduces every double
bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .features import FeatureScaler
from .svm import KernelModel, KernelSpec

FORMAT = "sgcat-svm-model"
VERSION = 1


def model_to_dict(model: KernelModel) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "schema": model.schema,
        "kernel": model.kernel.to_dict(),
        "C": model.C,
        "scaler": model.scaler,
        "bias": model.bias,
        "support_vectors": model.support_vectors.tolist(),
        "dual_coefs": model.dual_coefs.tolist(),
    }


def model_from_dict(d: dict) -> KernelModel:
    if d.get("format") != FORMAT:
        raise ValueError(f"not a model file (format={d.get('format')!r})")
    if d.get("version") != VERSION:
        raise ValueError(f"unsupported model version {d.get('version')!r}")
    sv = np.asarray(d["support_vectors"], dtype=float)
    return KernelModel(
        support_vectors=sv.reshape(len(d["dual_coefs"]), -1),
        dual_coefs=np.asarray(d["dual_coefs"], dtype=float),
        bias=float(d["bias"]),
        kernel=KernelSpec.from_dict(d["kernel"]),
        C=float(d["C"]),
        schema=d.get("schema"),
        scaler=d.get("scaler"),
    )


def save_model(model: KernelModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def load_model(path) -> KernelModel:
    return model_from_dict(json.loads(Path(path).read_text()))


def model_scaler(model: KernelModel) -> FeatureScaler | None:
    return None if model.scaler is None else FeatureScaler.from_dict(model.scaler)
