"""Synthetic cause-effect pairs with known direction ``x -> y``.

Two families are provided: an explicit exponential link observed through
heavy additive noise, and Gaussian-process draws in the style of the SIM /
SIM-c benchmarks (optionally confounded by a shared latent input).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Direction, SamplePairs
from .errors import FactorizationFailure

__all__ = [
    "ExpGenParams",
    "GpGenParams",
    "GP_PRESETS",
    "gen_exp_pairs",
    "gen_gp_pairs",
    "additive_noise",
    "rbf_gram",
    "sample_gp",
    "write_pair_file",
]

MAX_GP_LENGTH = 5000


@dataclass(frozen=True)
class ExpGenParams:
    m: int = 2000
    noise_var: float = 40.0
    seed: int | None = 0
    normalize: bool = True

    def __post_init__(self):
        if self.m < 3:
            raise ValueError(f"m must be >= 3, got {self.m}")
        if self.noise_var < 0:
            raise ValueError("noise_var must be non-negative")


@dataclass(frozen=True)
class GpGenParams:
    m: int = 1000
    confounded: bool = False
    tau: float = 1e-4
    seed: int | None = 0
    # Median length-scale multiplier (relative to the input's std).
    lengthscale_sigma: float = 1.0
    normalize: bool = True

    def __post_init__(self):
        if self.m < 3:
            raise ValueError(f"m must be >= 3, got {self.m}")
        if self.m > MAX_GP_LENGTH:
            raise ValueError(f"m={self.m} too large for a dense covariance factorization (max {MAX_GP_LENGTH})")
        if not self.tau > 0:
            raise ValueError("tau must be positive")


# Rough stand-ins for the benchmark sub-regimes; not reproductions of them.
GP_PRESETS = {
    "sim": dict(confounded=False, tau=1e-4),
    "sim-ln": dict(confounded=False, tau=1e-5),
    "sim-g": dict(confounded=False, tau=1e-4, lengthscale_sigma=0.25),
    "sim-c": dict(confounded=True, tau=1e-4),
}


def additive_noise(rng: np.random.Generator, size: int, noise_var: float) -> np.ndarray:
    """Zero-mean Gaussian noise with variance ``noise_var``."""
    return rng.normal(0.0, np.sqrt(noise_var), size)


def gen_exp_pairs(params: ExpGenParams) -> tuple[SamplePairs, Direction]:
    """``x = u + e_x``, ``y = exp(u) + e_y`` with ``u ~ N(0, 1)``."""
    rng = np.random.default_rng(params.seed)
    u = rng.standard_normal(params.m)
    x = u + additive_noise(rng, params.m, params.noise_var)
    y = np.exp(u) + additive_noise(rng, params.m, params.noise_var)
    pairs = SamplePairs(x, y)
    if params.normalize:
        pairs = pairs.normalized()
    return pairs, Direction.X_CAUSES_Y


def rbf_gram(inputs: np.ndarray, lengthscales) -> np.ndarray:
    """Sum-over-dimensions RBF Gram matrix, ``sum_d exp(-(u_d - v_d)^2 / l_d^2)``.

    ``inputs`` has shape ``(m, d)``.  The result is exactly symmetric with
    diagonal ``d``.
    """
    u = np.asarray(inputs, dtype=np.float64)
    if u.ndim == 1:
        u = u[:, None]
    ls = np.broadcast_to(np.asarray(lengthscales, dtype=np.float64), (u.shape[1],))
    m = u.shape[0]
    gram = np.zeros((m, m))
    for d in range(u.shape[1]):
        diff = u[:, d, None] - u[None, :, d]
        gram += np.exp(-(diff * diff) / ls[d] ** 2)
    # (a - b)^2 == (b - a)^2 bitwise, but keep the guarantee explicit.
    return np.triu(gram) + np.triu(gram, 1).T


def sample_gp(rng: np.random.Generator, gram: np.ndarray, tau: float) -> np.ndarray:
    """Draw ``N(0, gram + tau^2 I)`` through a Cholesky factor.

    A failed factorization is retried once with ten times the jitter.
    """
    m = gram.shape[0]
    z = rng.standard_normal(m)
    jitter = tau**2
    for _ in range(2):
        try:
            chol = np.linalg.cholesky(gram + jitter * np.eye(m))
        except np.linalg.LinAlgError:
            jitter *= 10.0
            continue
        return chol @ z
    raise FactorizationFailure(f"covariance not positive definite even with jitter {jitter / 10.0:g}")


def _lengthscales(rng: np.random.Generator, inputs: np.ndarray, sigma: float) -> np.ndarray:
    scale = inputs.std(axis=0)
    scale[scale == 0] = 1.0
    return np.exp(sigma * rng.standard_normal(inputs.shape[1])) * scale


def gen_gp_pairs(params: GpGenParams) -> tuple[SamplePairs, Direction]:
    rng = np.random.default_rng(params.seed)
    m = params.m
    e1 = rng.standard_normal(m)
    e2 = rng.standard_normal(m)
    e3 = rng.standard_normal(m) if params.confounded else None

    cause_in = np.column_stack([e1, e3]) if params.confounded else e1[:, None]
    gram = rbf_gram(cause_in, _lengthscales(rng, cause_in, params.lengthscale_sigma))
    x = sample_gp(rng, gram, params.tau)

    cols = [x, e2] + ([e3] if params.confounded else [])
    effect_in = np.column_stack(cols)
    gram = rbf_gram(effect_in, _lengthscales(rng, effect_in, params.lengthscale_sigma))
    y = sample_gp(rng, gram, params.tau)

    pairs = SamplePairs(x, y)
    if params.normalize:
        pairs = pairs.normalized()
    return pairs, Direction.X_CAUSES_Y


def write_pair_file(path, pairs: SamplePairs) -> None:
    """Write a two-column whitespace pair file readable by ``dataio.load_pair_file``."""
    lines = [f"{a!r} {b!r}\n" for a, b in zip(pairs.x.tolist(), pairs.y.tolist())]
    Path(path).write_text("".join(lines))
