"""Contrast matrices and hypothesis families."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .quantiles import ProbabilityGrid

__all__ = [
    "Family",
    "Direction",
    "ContrastMatrix",
    "HypothesisFamily",
    "validate",
    "dunnett",
    "tukey",
    "grand_mean",
    "custom",
    "kron_with_effect",
    "MEDIAN_IQR_EFFECT",
    "build",
]

MEDIAN_IQR_EFFECT = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
MEDIAN_IQR_GRID = (0.25, 0.5, 0.75)


class Family(str, enum.Enum):
    DUNNETT = "dunnett"
    TUKEY = "tukey"
    GRAND_MEAN = "grand-mean"
    CUSTOM = "custom"
    KRONECKER = "kronecker"


class Direction(str, enum.Enum):
    TWO_SIDED = "two-sided"
    NONINFERIORITY = "noninferiority"
    EQUIVALENCE = "equivalence"


@dataclass(frozen=True)
class ContrastMatrix:
    """Rows ``h_l`` of length ``k * m`` (group-major columns)."""

    rows: np.ndarray
    k: int
    family: Family
    labels: tuple

    @property
    def r(self) -> int:
        return self.rows.shape[0]

    @property
    def m(self) -> int:
        return self.rows.shape[1] // self.k

    def negate(self) -> "ContrastMatrix":
        return ContrastMatrix(-self.rows, self.k, self.family, self.labels)

    def relabel(self, group_labels) -> "ContrastMatrix":
        """Rebuild row labels from actual group names (builders use 1..k)."""
        names = [str(g) for g in group_labels]
        if len(names) != self.k:
            raise DomainError("label count does not match k")
        subst = {str(i + 1): n for i, n in enumerate(names)}
        out = []
        for lab in self.labels:
            parts = lab.split(" ")
            out.append(" ".join(subst.get(p, p) for p in parts))
        return ContrastMatrix(self.rows, self.k, self.family, tuple(out))


def validate(cm: ContrastMatrix, tol: float = 1e-12) -> ContrastMatrix:
    rows = np.asarray(cm.rows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise DomainError("contrast matrix needs at least one row")
    if rows.shape[1] % cm.k:
        raise DomainError(f"{rows.shape[1]} columns is not a multiple of k={cm.k}")
    if np.any(np.all(rows == 0, axis=1)):
        raise DomainError("contrast matrix has an all-zero row")
    sums = rows.reshape(rows.shape[0], cm.k, -1).sum(axis=1)
    bad = np.argwhere(np.abs(sums) > tol)
    if bad.size:
        l, j = bad[0]
        raise DomainError(
            f"row {l + 1} violates the contrast property at probability index {j + 1}"
        )
    if len(cm.labels) != rows.shape[0]:
        raise DomainError("one label per contrast row is required")
    return cm


def _need_k(k):
    if int(k) != k or k < 2:
        raise DomainError(f"k must be an integer >= 2, got {k}")
    return int(k)


def dunnett(k: int) -> ContrastMatrix:
    """Many-to-one: row l is ``e_{l+1} - e_1``."""
    k = _need_k(k)
    rows = np.zeros((k - 1, k))
    rows[:, 0] = -1
    rows[np.arange(k - 1), np.arange(1, k)] = 1
    labels = tuple(f"{j + 1} - 1" for j in range(1, k))
    return validate(ContrastMatrix(rows, k, Family.DUNNETT, labels))


def tukey(k: int) -> ContrastMatrix:
    """All pairs ``e_b - e_a`` for ``a < b``, ordered by ``a`` then ``b``."""
    k = _need_k(k)
    rows, labels = [], []
    for a in range(k):
        for b in range(a + 1, k):
            h = np.zeros(k)
            h[a], h[b] = -1, 1
            rows.append(h)
            labels.append(f"{b + 1} - {a + 1}")
    return validate(ContrastMatrix(np.array(rows), k, Family.TUKEY, tuple(labels)))


def grand_mean(k: int) -> ContrastMatrix:
    """Each group against the unweighted mean of all groups."""
    k = _need_k(k)
    rows = np.eye(k) - 1.0 / k
    labels = tuple(f"{j + 1} - mean" for j in range(k))
    return validate(ContrastMatrix(rows, k, Family.GRAND_MEAN, labels))


def custom(rows, k: int, labels=None) -> ContrastMatrix:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if labels is None:
        labels = tuple(f"c{l + 1}" for l in range(rows.shape[0]))
    return validate(ContrastMatrix(rows, _need_k(k), Family.CUSTOM, tuple(labels)))


def kron_with_effect(base: ContrastMatrix, effect, effect_labels=None) -> ContrastMatrix:
    """``base ⊗ effect``; ``base`` must be a single-probability (m = 1) matrix."""
    effect = np.atleast_2d(np.asarray(effect, dtype=float))
    if base.rows.shape[1] != base.k:
        raise DomainError("Kronecker base must have exactly k columns (m = 1)")
    if effect.ndim != 2 or effect.shape[1] < 1:
        raise DomainError("effect must be a 2-d matrix")
    if effect_labels is None:
        if effect.shape == MEDIAN_IQR_EFFECT.shape and np.array_equal(effect, MEDIAN_IQR_EFFECT):
            effect_labels = ("median", "IQR")
        else:
            effect_labels = tuple(f"e{j + 1}" for j in range(effect.shape[0]))
    if len(effect_labels) != effect.shape[0]:
        raise DomainError("one label per effect row is required")
    rows = np.kron(base.rows, effect)
    labels = tuple(f"{b} [{e}]" for b in base.labels for e in effect_labels)
    return validate(ContrastMatrix(rows, base.k, Family.KRONECKER, labels))


_BUILDERS = {Family.DUNNETT: dunnett, Family.TUKEY: tukey, Family.GRAND_MEAN: grand_mean}


def build(family, k: int, effect: str = "median") -> tuple[ContrastMatrix, ProbabilityGrid]:
    """Named family plus its default grid; ``effect`` is ``median`` or ``median-iqr``."""
    fam = Family(family)
    if fam not in _BUILDERS:
        raise DomainError(f"family {fam.value!r} has no builder")
    base = _BUILDERS[fam](k)
    if effect == "median":
        return base, ProbabilityGrid((0.5,))
    if effect == "median-iqr":
        return kron_with_effect(base, MEDIAN_IQR_EFFECT), ProbabilityGrid(MEDIAN_IQR_GRID)
    raise DomainError(f"unknown effect {effect!r}")


@dataclass(frozen=True)
class HypothesisFamily:
    """Contrasts, margins, direction and grid.

    For ``TWO_SIDED`` and ``NONINFERIORITY`` the margins are the constants
    ``eps_l`` of ``H0: h'q = eps`` / ``H0: h'q <= eps``; for ``EQUIVALENCE``
    they are the positive half-widths ``delta_l`` of ``H0: |h'q| >= delta``.
    """

    matrix: ContrastMatrix
    margins: np.ndarray
    direction: Direction
    grid: ProbabilityGrid

    def __init__(self, matrix, margins=0.0, direction=Direction.TWO_SIDED, grid=(0.5,)):
        grid = grid if isinstance(grid, ProbabilityGrid) else ProbabilityGrid(grid)
        direction = Direction(direction)
        validate(matrix)
        if matrix.rows.shape[1] != matrix.k * grid.m:
            raise DomainError(
                f"contrast matrix has {matrix.rows.shape[1]} columns, expected k*m = {matrix.k * grid.m}"
            )
        eps = np.broadcast_to(np.asarray(margins, dtype=float), (matrix.r,)).copy() \
            if np.ndim(margins) == 0 else np.asarray(margins, dtype=float)
        if eps.shape != (matrix.r,):
            raise DomainError(f"need {matrix.r} margins, got {eps.size}")
        if direction is Direction.EQUIVALENCE and np.any(eps <= 0):
            raise DomainError("equivalence margins must be positive")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "margins", eps)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "grid", grid)

    @property
    def r(self) -> int:
        return self.matrix.r

    @property
    def H(self) -> np.ndarray:
        return self.matrix.rows

    def reversed(self) -> "HypothesisFamily":
        """Map ``H0: g'q >= eps`` (g = these rows) onto ``H0: (-g)'q <= -eps``."""
        if self.direction is not Direction.NONINFERIORITY:
            raise DomainError("only non-inferiority families can be reversed")
        return HypothesisFamily(self.matrix.negate(), -self.margins, self.direction, self.grid)
