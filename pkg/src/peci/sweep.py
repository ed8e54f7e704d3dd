"""Replicated accuracy sweeps over the subsample size ``k`` or the task count ``T``.

Every grid point reuses the same ``R`` datasets and the same per-replicate
ensemble seed.  Because task ``t``'s subsample depends only on ``(seed, t)``,
an ensemble of ``T`` tasks is exactly the first ``T`` tasks of a larger one;
a ``T`` sweep therefore scores ``max(T)`` tasks once and reads off prefixes.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .core import igci_score
from .datagen import ExpGenParams, gen_exp_pairs
from .ensemble import WeightingScheme, decide, derive_seed, ensemble_deltas
from .errors import DegenerateData
from .theory import ensemble_error_bound, estimate_c

SCHEMES = (WeightingScheme.MAJORITY, WeightingScheme.SIGMOID, WeightingScheme.TANH)

SWEEP_FIELDS = (
    "sweep", "value", "k", "T", "replicates",
    "acc_base", "acc_majority", "acc_sigmoid", "acc_tanh",
    "c_hat", "bound",
)


@dataclass
class SweepResult:
    sweep: str
    grid: list[int]
    ks: list[int]
    Ts: list[int]
    base_correct: np.ndarray  # (R,)
    correct: dict[WeightingScheme, np.ndarray] = field(default_factory=dict)  # scheme -> (G, R)
    c_hats: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def replicates(self) -> int:
        return self.base_correct.size

    @property
    def c_hat(self) -> float:
        """Mean moment estimate of ``c`` over the replicates that allowed one."""
        finite = self.c_hats[np.isfinite(self.c_hats)]
        return float(finite.mean()) if finite.size else math.nan

    def accuracy(self, scheme: WeightingScheme | None = None) -> np.ndarray:
        if scheme is None:
            return np.full(len(self.grid), self.base_correct.mean())
        return self.correct[scheme].mean(axis=1)

    def bound(self, i: int) -> float:
        c = self.c_hat
        if not c > 0:
            return math.nan
        return ensemble_error_bound(c, self.ks[i], self.Ts[i])

    def rows(self) -> list[dict]:
        base = float(self.base_correct.mean())
        out = []
        for i, value in enumerate(self.grid):
            row = {
                "sweep": self.sweep, "value": value, "k": self.ks[i], "T": self.Ts[i],
                "replicates": self.replicates, "acc_base": base,
            }
            for s in SCHEMES:
                row[f"acc_{s.value}"] = float(self.correct[s][i].mean())
            row["c_hat"] = self.c_hat
            row["bound"] = self.bound(i)
            out.append(row)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=SWEEP_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        return buf.getvalue()


def replicate_dataset(seed: int, r: int, m: int, noise_var: float):
    return gen_exp_pairs(ExpGenParams(m=m, noise_var=noise_var, seed=derive_seed(seed, 0, r)))


def run_sweep(
    sweep: str,
    grid: list[int],
    *,
    m: int = 2000,
    noise_var: float = 40.0,
    k: int | None = None,
    T: int = 100,
    replicates: int = 100,
    seed: int = 0,
    workers: int = 1,
    progress=None,
) -> SweepResult:
    """Accuracy of the base learner and the three ensembles on each grid point.

    ``sweep="k"`` varies the subsample size at fixed ``T``; ``sweep="T"``
    varies the task count at fixed ``k`` (default ``m // 2``).
    """
    if sweep not in ("k", "T"):
        raise ValueError("sweep must be 'k' or 'T'")
    grid = [int(g) for g in grid]
    if sweep == "k":
        ks, Ts = grid, [T] * len(grid)
    else:
        kk = m // 2 if k is None else k
        ks, Ts = [kk] * len(grid), grid
    G, R = len(grid), replicates
    base_correct = np.zeros(R, dtype=bool)
    correct = {s: np.zeros((G, R), dtype=bool) for s in SCHEMES}
    c_hats = np.full(R, np.nan)

    for r in range(R):
        pairs, truth = replicate_dataset(seed, r, m, noise_var)
        base_correct[r] = igci_score(pairs).decision is truth
        try:
            c_hats[r] = estimate_c(pairs, truth).c
        except DegenerateData:
            pass
        ens_seed = derive_seed(seed, 1, r)
        if sweep == "T":
            deltas = ensemble_deltas(pairs, ks[0], max(Ts), ens_seed, workers=workers)
            per_point = [deltas[:t] for t in Ts]
        else:
            per_point = [ensemble_deltas(pairs, kk, T, ens_seed, workers=workers) for kk in ks]
        for i, d in enumerate(per_point):
            for s in SCHEMES:
                correct[s][i, r] = decide(d, s).direction is truth
        if progress is not None:
            progress(r + 1, R)

    return SweepResult(sweep, grid, ks, Ts, base_correct, correct, c_hats)
