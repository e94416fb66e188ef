"""Grouped samples, probability grids and left-continuous empirical quantiles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DataError, DomainError

__all__ = [
    "GroupedSample",
    "ProbabilityGrid",
    "order_index",
    "empirical_quantile",
    "quantile_vector",
    "pool",
]


@dataclass(frozen=True)
class GroupedSample:
    """``k >= 2`` independent samples, each with at least two finite values."""

    groups: tuple
    labels: tuple

    def __init__(self, groups: Sequence, labels: Sequence | None = None):
        arrs = tuple(np.asarray(g, dtype=float).ravel() for g in groups)
        if labels is None:
            labels = tuple(str(i + 1) for i in range(len(arrs)))
        labels = tuple(labels)
        if len(labels) != len(arrs):
            raise DataError("number of labels does not match number of groups")
        if len(arrs) < 2:
            raise DataError(f"need at least 2 groups, got {len(arrs)}")
        for lab, a in zip(labels, arrs):
            if a.size < 2:
                raise DataError(f"group {lab!r} has {a.size} observation(s); need >= 2")
            if not np.all(np.isfinite(a)):
                raise DataError(f"group {lab!r} contains non-finite values")
        object.__setattr__(self, "groups", arrs)
        object.__setattr__(self, "labels", labels)

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(g.size for g in self.groups)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    def map(self, fn) -> "GroupedSample":
        return GroupedSample([fn(g) for g in self.groups], self.labels)

    def reorder(self, first_label) -> "GroupedSample":
        """Move the group labelled ``first_label`` to position 0."""
        if first_label not in self.labels:
            raise DataError(f"reference group {first_label!r} not found")
        i = self.labels.index(first_label)
        order = [i] + [j for j in range(self.k) if j != i]
        return GroupedSample([self.groups[j] for j in order], [self.labels[j] for j in order])


@dataclass(frozen=True)
class ProbabilityGrid:
    probs: tuple

    def __init__(self, probs):
        if isinstance(probs, (int, float)):
            probs = (probs,)
        ps = tuple(float(p) for p in probs)
        if not ps:
            raise DomainError("probability grid is empty")
        if any(not 0.0 < p < 1.0 for p in ps):
            raise DomainError(f"probabilities must lie in (0, 1): {ps}")
        if any(b <= a for a, b in zip(ps, ps[1:])):
            raise DomainError(f"probabilities must be strictly increasing: {ps}")
        object.__setattr__(self, "probs", ps)

    @property
    def m(self) -> int:
        return len(self.probs)

    def __iter__(self):
        return iter(self.probs)

    def __len__(self):
        return len(self.probs)


def order_index(n: int, p: float) -> int:
    """Zero-based index of the ``ceil(n p)``-th order statistic.

    A small tolerance keeps ``n * p`` values such as ``10 * 0.3`` from rounding
    up past an exact integer.
    """
    j = math.ceil(n * p - 1e-9)
    return min(max(j, 1), n) - 1


def empirical_quantile(sample, p: float) -> float:
    """Smallest ``x`` with ``F_n(x) >= p``."""
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("empirical quantile of an empty sample")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    j = order_index(x.size, p)
    return float(np.partition(x, j)[j])


def quantile_vector(data: GroupedSample, grid: ProbabilityGrid) -> np.ndarray:
    """Group-major vector ``(q_11, ..., q_1m, q_21, ..., q_km)``."""
    grid = grid if isinstance(grid, ProbabilityGrid) else ProbabilityGrid(grid)
    out = np.empty(data.k * grid.m)
    for i, g in enumerate(data.groups):
        s = np.sort(g)
        out[i * grid.m:(i + 1) * grid.m] = [s[order_index(s.size, p)] for p in grid]
    return out


def pool(data: GroupedSample) -> np.ndarray:
    return np.concatenate(data.groups)
