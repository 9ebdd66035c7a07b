"""Latin hypercube designs over attack parameters."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import qmc


@dataclass(frozen=True)
class Parameter:
    """One design dimension. ``unit`` is the unit of ``lo``/``hi`` and of the
    sampled values (see ``batch.DESIGN_UNITS``)."""

    name: str
    lo: float
    hi: float
    unit: str | None = None

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or not self.lo < self.hi:
            raise ValueError(f"parameter {self.name!r}: need finite lo < hi, got ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class LhsDesign:
    parameters: tuple[Parameter, ...]
    matrix: np.ndarray  # n_samples x n_params, unit cube

    @property
    def n_samples(self) -> int:
        return self.matrix.shape[0]

    @property
    def bounds(self) -> list[tuple[float, float]]:
        return [(p.lo, p.hi) for p in self.parameters]

    @property
    def samples(self) -> np.ndarray:
        lo = np.array([p.lo for p in self.parameters])
        hi = np.array([p.hi for p in self.parameters])
        return lo + self.matrix * (hi - lo)

    def to_dict(self) -> dict:
        return {
            "kind": "lhs",
            "parameters": [_param_dict(p) for p in self.parameters],
            "matrix": self.matrix.tolist(),
            "samples": self.samples.tolist(),
        }


def _param_dict(p: Parameter) -> dict:
    d = {"name": p.name, "lo": p.lo, "hi": p.hi}
    if p.unit is not None:
        d["unit"] = p.unit
    return d


def parse_parameters(data) -> tuple[Parameter, ...]:
    """Accept ``{"parameters": [{"name", "lo", "hi", "unit"?}, ...]}`` or a
    bare list of those objects."""
    items = data["parameters"] if isinstance(data, dict) else data
    params = []
    for item in items:
        extra = set(item) - {"name", "lo", "hi", "unit"}
        if extra:
            raise ValueError(f"unknown bound field(s) {sorted(extra)}")
        params.append(Parameter(str(item["name"]), float(item["lo"]), float(item["hi"]), item.get("unit")))
    names = [p.name for p in params]
    if len(set(names)) != len(names):
        raise ValueError("duplicate parameter names in bounds")
    return tuple(params)


def lhs_sample(bounds, n: int, rng: np.random.Generator | None = None) -> LhsDesign:
    """Draw an ``n``-point Latin hypercube scaled to ``bounds``.

    ``bounds`` is a sequence of ``Parameter`` or of ``(lo, hi)`` pairs.
    Positions within each stratum are uniform (scrambled LHS).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    params = tuple(
        b if isinstance(b, Parameter) else Parameter(f"x{i}", float(b[0]), float(b[1]))
        for i, b in enumerate(bounds)
    )
    if not params:
        raise ValueError("at least one parameter is required")
    rng = np.random.default_rng() if rng is None else rng
    sampler = qmc.LatinHypercube(d=len(params), scramble=True, seed=rng)
    return LhsDesign(params, sampler.random(n))


def latin_ok(matrix) -> bool:
    """Counting check: every column puts exactly one point in each of the
    n equal-width strata of [0, 1)."""
    m = np.asarray(matrix, dtype=float)
    n = m.shape[0]
    if n == 0 or np.any(m < 0) or np.any(m >= 1):
        return False
    strata = np.floor(m * n).astype(int)
    return all(np.array_equal(np.bincount(col, minlength=n), np.ones(n, dtype=int)) for col in strata.T)


def load_bounds(path) -> tuple[Parameter, ...]:
    return parse_parameters(json.loads(Path(path).read_text()))
