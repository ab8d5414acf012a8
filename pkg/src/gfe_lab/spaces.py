"""Carrier descriptions with their metrics.

Every space is metric; uniform-space entourages are realized as the balls
``{(y, z) : dist(y, z) < eps}``.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

KINDS = (
    "real-line",
    "real-box",
    "complex-halfplane",
    "naturals",
    "natural-pairs",
    "integers",
    "finite-set",
)

_DISCRETE = {"naturals", "natural-pairs", "finite-set"}

# Above this magnitude float64 can no longer hold every integer exactly.
_EXACT_FLOAT_LIMIT = 2**53


def _is_int(v) -> bool:
    return isinstance(v, numbers.Integral) and not isinstance(v, bool)


@dataclass(frozen=True)
class SpaceDesc:
    name: str
    kind: str
    dim: int = 1
    min_real_part: float = -math.inf
    elements: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == "real-box" and self.dim < 1:
            raise ValueError("real-box needs dim >= 1")
        if self.kind == "finite-set" and not self.elements:
            raise ValueError("finite-set needs at least one element")

    # -- constructors ---------------------------------------------------
    @classmethod
    def reals(cls, name="R"):
        return cls(name, "real-line")

    @classmethod
    def real_box(cls, dim, name=None):
        return cls(name or f"R^{dim}", "real-box", dim=dim)

    @classmethod
    def complex_halfplane(cls, min_real_part=-math.inf, name=None):
        if name is None:
            name = "C" if min_real_part == -math.inf else f"C[Re>={min_real_part:g}]"
        return cls(name, "complex-halfplane", min_real_part=min_real_part)

    @classmethod
    def naturals(cls, name="N"):
        return cls(name, "naturals")

    @classmethod
    def natural_pairs(cls, name="N^2"):
        return cls(name, "natural-pairs")

    @classmethod
    def integers(cls, name="Z"):
        return cls(name, "integers")

    @classmethod
    def finite_set(cls, elements, name="F"):
        return cls(name, "finite-set", elements=tuple(elements))

    # -- properties -----------------------------------------------------
    @property
    def exact(self) -> bool:
        """True when values are compared exactly (no rounding)."""
        return self.kind in ("naturals", "natural-pairs", "integers", "finite-set")

    @property
    def discrete(self) -> bool:
        return self.kind in _DISCRETE

    @property
    def additive(self) -> bool:
        """Whether real/complex additive noise makes sense on the carrier."""
        return self.kind in ("real-line", "real-box", "complex-halfplane")

    def contains(self, v) -> bool:
        k = self.kind
        if k == "real-line":
            return isinstance(v, numbers.Real) and not isinstance(v, bool) and math.isfinite(v)
        if k == "real-box":
            return (
                isinstance(v, tuple)
                and len(v) == self.dim
                and all(isinstance(c, numbers.Real) and math.isfinite(c) for c in v)
            )
        if k == "complex-halfplane":
            if not isinstance(v, numbers.Number) or isinstance(v, bool):
                return False
            z = complex(v)
            return math.isfinite(z.real) and math.isfinite(z.imag) and z.real >= self.min_real_part
        if k == "naturals":
            return _is_int(v) and v >= 0
        if k == "natural-pairs":
            return isinstance(v, tuple) and len(v) == 2 and all(_is_int(c) and c >= 0 for c in v)
        if k == "integers":
            return _is_int(v)
        return v in self.elements

    def distance(self, a, b) -> float:
        k = self.kind
        if k in _DISCRETE:
            return 0 if a == b else 1
        if k == "integers":
            return abs(a - b)
        if k == "real-box":
            return math.dist(a, b)
        return abs(a - b)

    # -- vectorized helpers used by the regularity scans ----------------
    def as_array(self, values: Sequence[Any]) -> np.ndarray:
        k = self.kind
        if k == "complex-halfplane":
            return np.asarray(values, dtype=complex)
        if k == "real-box":
            return np.asarray(values, dtype=float).reshape(len(values), self.dim)
        if k == "integers":
            if any(abs(v) >= _EXACT_FLOAT_LIMIT for v in values):
                return np.asarray(values, dtype=object)
            return np.asarray(values, dtype=float)
        if k in _DISCRETE:
            ids: dict = {}
            return np.asarray([ids.setdefault(v, len(ids)) for v in values], dtype=np.int64)
        return np.asarray(values, dtype=float)

    def distance_matrix(self, xs: Sequence[Any], ys: Sequence[Any]) -> np.ndarray:
        """Matrix of distances ``dist(xs[i], ys[j])`` as float64."""
        if self.discrete:
            both = self.as_array(list(xs) + list(ys))
            a, b = both[: len(xs)], both[len(xs):]
            return (a[:, None] != b[None, :]).astype(float)
        a = self.as_array(xs)
        b = self.as_array(ys)
        if self.kind == "real-box":
            diff = a[:, None, :] - b[None, :, :]
            return np.sqrt(np.sum(diff * diff, axis=-1))
        out = np.abs(a[:, None] - b[None, :])
        return out.astype(float)

    def describe(self) -> dict:
        d = {"name": self.name, "kind": self.kind}
        if self.kind == "real-box":
            d["dim"] = self.dim
        if self.kind == "complex-halfplane":
            d["min_real_part"] = None if self.min_real_part == -math.inf else self.min_real_part
        if self.kind == "finite-set":
            d["elements"] = list(self.elements)
        return d


REALS = SpaceDesc.reals()
NATURALS = SpaceDesc.naturals()
INTEGERS = SpaceDesc.integers()
NATURAL_PAIRS = SpaceDesc.natural_pairs()
COMPLEX = SpaceDesc.complex_halfplane()
