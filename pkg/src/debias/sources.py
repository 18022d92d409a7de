"""Sample sources feeding the estimators.

A source hands out i.i.d. draws ``X_i`` with mean ``m`` (``draw``) or pairs
``(X_i, G_i)`` with ``E[G] = grad m`` (``draw_pairs``). Replay contract: the
draws are a deterministic function of the generator state passed in, so the
same ``(source, rng state)`` reproduces the same sample. Stream-backed sources
ignore the generator and consume their data in order.
"""
from __future__ import annotations

from typing import Callable, Iterable, Protocol, runtime_checkable

import numpy as np

from .errors import ResourceExceeded


@runtime_checkable
class SampleSource(Protocol):
    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray: ...


@runtime_checkable
class PairSource(Protocol):
    dim: int

    def draw_pairs(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]: ...


class GaussianSource:
    """X ~ Normal(m, var)."""

    def __init__(self, m: float, var: float):
        if var < 0:
            raise ValueError("variance must be non-negative")
        self.m = float(m)
        self.var = float(var)

    def draw(self, n, rng):
        if self.var == 0.0:
            return np.full(n, self.m)
        return self.m + np.sqrt(self.var) * rng.standard_normal(n)

    def __repr__(self):
        return f"GaussianSource(m={self.m}, var={self.var})"


class ConstantSource:
    """Zero-variance source, X = value always."""

    def __init__(self, value: float):
        self.value = float(value)

    def draw(self, n, rng):
        return np.full(n, self.value)


class FunctionSource:
    """Adapter for any ``fn(n, rng) -> array`` sampler."""

    def __init__(self, fn: Callable[[int, np.random.Generator], np.ndarray]):
        self.fn = fn

    def draw(self, n, rng):
        return np.asarray(self.fn(n, rng), dtype=float).reshape(n)


class StreamSource:
    """Finite, ordered sample stream (e.g. numbers read from stdin).

    Running out of data raises ``ResourceExceeded`` naming the shortfall.
    """

    def __init__(self, values: Iterable[float]):
        self.values = np.asarray(list(values), dtype=float)
        self.position = 0

    @property
    def remaining(self) -> int:
        return self.values.size - self.position

    def draw(self, n, rng=None):
        if n > self.remaining:
            raise ResourceExceeded(
                f"sample stream exhausted: requested {n} samples, {self.remaining} "
                f"remain (short by {n - self.remaining})"
            )
        out = self.values[self.position:self.position + n]
        self.position += n
        return out.copy()


class PairStreamSource:
    """Finite stream of ``(X, g_1..g_d)`` rows."""

    def __init__(self, rows):
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[1] < 2:
            raise ValueError("pair rows need X followed by at least one gradient entry")
        self.rows = rows
        self.dim = rows.shape[1] - 1
        self.position = 0

    @property
    def remaining(self) -> int:
        return self.rows.shape[0] - self.position

    def draw_pairs(self, n, rng=None):
        if n > self.remaining:
            raise ResourceExceeded(
                f"pair stream exhausted: requested {n} rows, {self.remaining} "
                f"remain (short by {n - self.remaining})"
            )
        block = self.rows[self.position:self.position + n]
        self.position += n
        return block[:, 0].copy(), block[:, 1:].copy()

    def draw(self, n, rng=None):
        return self.draw_pairs(n, rng)[0]


class FunctionPairSource:
    def __init__(self, fn, dim: int):
        self.fn = fn
        self.dim = int(dim)

    def draw_pairs(self, n, rng):
        x, g = self.fn(n, rng)
        return np.asarray(x, dtype=float).reshape(n), np.asarray(g, dtype=float).reshape(n, self.dim)

    def draw(self, n, rng):
        return self.draw_pairs(n, rng)[0]
