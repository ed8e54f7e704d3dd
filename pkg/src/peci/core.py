"""IGCI scoring with the uniform reference measure.

The estimator compares the mean log-slope of the data sorted by ``x``
(``e_x``) with the mean log-slope of the data sorted by ``y`` (``e_y``);
``e_x < e_y`` points to ``x -> y``.  Repeated sort keys are merged before
slopes are taken and each merged run is weighted by its multiplicity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConstantInput, DegenerateData, InvalidPairs

__all__ = [
    "Direction",
    "SamplePairs",
    "IgciScore",
    "SlopeTerms",
    "normalize_unit_interval",
    "slope_terms",
    "slope_entropy",
    "igci_score",
]


class Direction(enum.Enum):
    X_CAUSES_Y = 1
    Y_CAUSES_X = -1
    UNDECIDED = 0

    @classmethod
    def from_sign(cls, value: float) -> "Direction":
        if value > 0:
            return cls.X_CAUSES_Y
        if value < 0:
            return cls.Y_CAUSES_X
        return cls.UNDECIDED

    @classmethod
    def parse(cls, text: str) -> "Direction":
        try:
            return _LABELS_INV[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown direction {text!r}") from None

    @property
    def label(self) -> str:
        return _LABELS[self]

    def mirrored(self) -> "Direction":
        return Direction(-self.value)


_LABELS = {
    Direction.X_CAUSES_Y: "x->y",
    Direction.Y_CAUSES_X: "y->x",
    Direction.UNDECIDED: "undecided",
}
_LABELS_INV = {v: k for k, v in _LABELS.items()}
_LABELS_INV.update({"xy": Direction.X_CAUSES_Y, "yx": Direction.Y_CAUSES_X})


@dataclass(frozen=True, eq=False)
class SamplePairs:
    """Paired observations ``(x_i, y_i)``, ``i = 1..m``, with ``m >= 3``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64)
        y = np.array(self.y, dtype=np.float64)
        if x.ndim != 1 or y.ndim != 1:
            raise InvalidPairs("x and y must be one-dimensional")
        if x.shape != y.shape:
            raise InvalidPairs(f"length mismatch: {x.size} x values, {y.size} y values")
        if x.size < 3:
            raise InvalidPairs(f"need at least 3 pairs, got {x.size}")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise InvalidPairs("non-finite value in pairs")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.x.size

    @property
    def m(self) -> int:
        return self.x.size

    def swap(self) -> "SamplePairs":
        return SamplePairs(self.y, self.x)

    def take(self, indices) -> "SamplePairs":
        return SamplePairs(self.x[indices], self.y[indices])

    def prefix(self, length: int) -> "SamplePairs":
        return SamplePairs(self.x[:length], self.y[:length])

    def normalized(self) -> "SamplePairs":
        """Both columns rescaled to [0, 1]; raises ConstantInput on a flat column."""
        return SamplePairs(normalize_unit_interval(self.x), normalize_unit_interval(self.y))


@dataclass(frozen=True)
class IgciScore:
    e_x: float
    e_y: float
    delta: float
    decision: Direction
    # Multiplicity of the slope terms dropped for a zero numerator.
    skipped_x: int = 0
    skipped_y: int = 0

    @classmethod
    def from_entropies(cls, e_x: float, e_y: float, skipped_x: int = 0, skipped_y: int = 0) -> "IgciScore":
        if e_x < e_y:
            decision = Direction.X_CAUSES_Y
        elif e_x > e_y:
            decision = Direction.Y_CAUSES_X
        else:
            decision = Direction.UNDECIDED
        return cls(e_x, e_y, e_y - e_x, decision, skipped_x, skipped_y)


def normalize_unit_interval(values: Sequence[float]) -> np.ndarray:
    """Affinely map ``values`` onto [0, 1] (min -> 0, max -> 1)."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("need a 1-d sequence of at least 2 values")
    lo = v.min()
    hi = v.max()
    if not hi > lo:
        raise ConstantInput("variable is constant and cannot be normalized")
    out = (v - lo) / (hi - lo)
    # Pin the endpoints; (hi - lo) / (hi - lo) is 1 anyway, this guards overflow in hi - lo.
    out[v == lo] = 0.0
    out[v == hi] = 1.0
    return out


@dataclass(frozen=True)
class SlopeTerms:
    """Per-gap log slopes after duplicate merging.

    ``terms[i]`` is ``log(|o[i+1] - o[i]| / |k[i+1] - k[i]|)`` over merged keys
    ``k`` with representatives ``o``; ``weights[i]`` is the multiplicity of the
    left key.  Gaps with a zero numerator are already removed and their
    multiplicity is accumulated in ``skipped``.
    """

    terms: np.ndarray
    weights: np.ndarray
    skipped: int

    def mean(self) -> float:
        total = int(self.weights.sum())
        if total == 0:
            raise DegenerateData("every slope term has a zero numerator")
        if total == self.terms.size:
            return math.fsum(self.terms.tolist()) / total
        return math.fsum((self.weights * self.terms).tolist()) / total


def slope_terms(sort_key, other) -> SlopeTerms:
    key = np.asarray(sort_key, dtype=np.float64)
    oth = np.asarray(other, dtype=np.float64)
    if key.shape != oth.shape or key.ndim != 1:
        raise InvalidPairs("sort_key and other must be paired 1-d sequences")
    if key.size < 2:
        raise DegenerateData("need at least 2 observations")

    order = np.argsort(key)
    ks = key[order]
    same = ks[1:] == ks[:-1]
    if same.any():
        # Ties in the key: order each tied run by `other` so the kept
        # representative (first of the run) does not depend on input order.
        order = np.lexsort((oth, key))
        ks = key[order]
        first = np.empty(ks.size, dtype=bool)
        first[0] = True
        np.not_equal(ks[1:], ks[:-1], out=first[1:])
        starts = np.flatnonzero(first)
        counts = np.diff(np.append(starts, ks.size))
        kx = ks[starts]
        ky = oth[order][starts]
    else:
        kx = ks
        ky = oth[order]
        counts = np.ones(ks.size, dtype=np.int64)

    if kx.size < 2:
        raise DegenerateData("sort key has a single distinct value")

    num = np.abs(np.diff(ky))
    den = np.diff(kx)
    weights = counts[:-1]
    usable = num > 0
    skipped = int(weights[~usable].sum())
    if not usable.all():
        num = num[usable]
        den = den[usable]
        weights = weights[usable]
    terms = np.log(num / den)
    return SlopeTerms(terms, weights, skipped)


def slope_entropy(sort_key, other) -> float:
    """Multiplicity-weighted mean log slope of ``other`` against ``sort_key``.

    Raises DegenerateData when no gap has a nonzero change in ``other``.
    """
    return slope_terms(sort_key, other).mean()


def igci_score(pairs: SamplePairs) -> IgciScore:
    """Score both directions on data already rescaled to [0, 1]."""
    tx = slope_terms(pairs.x, pairs.y)
    ty = slope_terms(pairs.y, pairs.x)
    return IgciScore.from_entropies(tx.mean(), ty.mean(), tx.skipped, ty.skipped)


def _normalize_rows(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo = v.min(axis=1, keepdims=True)
    hi = v.max(axis=1, keepdims=True)
    flat = (hi <= lo)[:, 0]
    span = np.where(hi > lo, hi - lo, 1.0)
    out = (v - lo) / span
    out[v == lo] = 0.0
    out[v == hi] = 1.0
    return out, flat


def _row_slope_means(key: np.ndarray, other: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise ``slope_entropy``; returns ``(means, has_ties)``.

    Rows with tied keys are not evaluated (left NaN) and flagged instead.
    """
    order = np.argsort(key, axis=1)
    ks = np.take_along_axis(key, order, axis=1)
    os_ = np.take_along_axis(other, order, axis=1)
    den = np.diff(ks, axis=1)
    ties = (den == 0).any(axis=1)
    num = np.abs(np.diff(os_, axis=1))
    usable = (num > 0) & (den > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.log(num / den)
    # Exact zeros do not change an exactly rounded sum.
    terms[~usable] = 0.0
    counts = usable.sum(axis=1)
    means = np.full(key.shape[0], np.nan)
    for i, row in enumerate(terms.tolist()):
        if not ties[i] and counts[i]:
            means[i] = math.fsum(row) / counts[i]
    return means, ties


def igci_deltas(x_rows, y_rows) -> np.ndarray:
    """``e_y - e_x`` of IGCI on each row pair after per-row rescaling to [0, 1].

    Row ``i`` gives bitwise the same value as
    ``igci_score(SamplePairs(x_rows[i], y_rows[i]).normalized()).delta``;
    rows that cannot be scored (flat column, no usable slope) give NaN.
    """
    X = np.asarray(x_rows, dtype=np.float64)
    Y = np.asarray(y_rows, dtype=np.float64)
    if X.ndim != 2 or X.shape != Y.shape:
        raise InvalidPairs("x_rows and y_rows must be 2-d arrays of equal shape")
    Xn, flat_x = _normalize_rows(X)
    Yn, flat_y = _normalize_rows(Y)
    e_x, ties_x = _row_slope_means(Xn, Yn)
    e_y, ties_y = _row_slope_means(Yn, Xn)
    out = e_y - e_x
    for i in np.flatnonzero((ties_x | ties_y) & ~(flat_x | flat_y)):
        try:
            out[i] = igci_score(SamplePairs(Xn[i], Yn[i])).delta
        except DegenerateData:
            out[i] = np.nan
    out[flat_x | flat_y] = np.nan
    return out
