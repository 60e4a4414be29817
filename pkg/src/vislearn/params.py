"""Flat parameter vectors with a named-segment layout.

Optimizers and gradient estimators see one contiguous float64 array;
models address their pieces by name. pack/unpack are exact inverses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ParamVector:
    values: np.ndarray                              # flat, float64
    layout: tuple[tuple[str, tuple[int, ...]], ...]  # (name, shape) in order
    _offsets: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        offsets = {}
        off = 0
        for name, shape in self.layout:
            n = math.prod(shape)
            offsets[name] = (off, n, shape)
            off += n
        if off != self.values.size:
            raise ValueError(
                f"layout covers {off} entries but values has {self.values.size}"
            )
        object.__setattr__(self, "_offsets", offsets)

    @property
    def size(self) -> int:
        return self.values.size

    def segment(self, name: str) -> np.ndarray:
        """View of one segment, reshaped to its declared shape."""
        try:
            off, n, shape = self._offsets[name]
        except KeyError:
            raise KeyError(f"unknown parameter segment {name!r}") from None
        return self.values[off:off + n].reshape(shape)

    def segment_names(self) -> list[str]:
        return [name for name, _ in self.layout]

    def segment_of_index(self, i: int) -> str:
        """Name of the segment holding flat index i (for error messages)."""
        off = 0
        for name, shape in self.layout:
            off += math.prod(shape)
            if i < off:
                return name
        raise IndexError(i)

    def with_values(self, values: np.ndarray) -> "ParamVector":
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.values.shape:
            raise ValueError("replacement values have a different length")
        return ParamVector(values, self.layout)

    def zeros_like(self) -> "ParamVector":
        return ParamVector(np.zeros_like(self.values), self.layout)

    def copy(self) -> "ParamVector":
        return ParamVector(self.values.copy(), self.layout)


def pack(segments) -> ParamVector:
    """Concatenate named arrays into a ParamVector, recording the layout.

    segments: iterable of (name, array-like). Names must be unique;
    declaration order is preserved.
    """
    names = [name for name, _ in segments]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate segment name in {names}")
    arrays = [np.asarray(a, dtype=np.float64) for _, a in segments]
    layout = tuple((name, tuple(a.shape)) for name, a in zip(names, arrays))
    if arrays:
        values = np.concatenate([a.reshape(-1) for a in arrays])
    else:
        values = np.zeros(0)
    return ParamVector(values, layout)


def unpack(v: ParamVector, name: str) -> np.ndarray:
    """The named segment of v, in its declared shape."""
    return v.segment(name)
