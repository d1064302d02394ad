"""Modified Latin hypercube draws for simulated integration.

Each (individual, dimension) pair gets one stratified uniform per
equal-width subinterval of (0, 1): the grid i/R is shifted by a single
uniform and shuffled. Individuals own independent substreams derived from
the master seed, so generation order cannot change the draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from .model import ValidationError


@dataclass(frozen=True)
class DrawMatrix:
    """Dense draw array indexed (individual, draw, dimension)."""

    values: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        if self.values.ndim != 3:
            raise ValidationError("draw values must be a 3-d array")

    @property
    def n_individuals(self) -> int:
        return self.values.shape[0]

    @property
    def n_draws(self) -> int:
        return self.values.shape[1]

    @property
    def n_dims(self) -> int:
        return self.values.shape[2]


def _substream(seed: int, key: int) -> np.random.Generator:
    # SeedSequence spawn keys give order-independent per-individual streams.
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))


def _open_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    u = rng.random(size)
    while (u == 0.0).any():  # keep the shift strictly inside (0, 1)
        u[u == 0.0] = rng.random(int((u == 0.0).sum()))
    return u


def mlhs_uniform(
    n_individuals: int,
    n_draws: int,
    n_dims: int,
    seed: int,
    individual_ids: Sequence[int] | None = None,
) -> DrawMatrix:
    """Stratified uniforms in (0, 1), one per subinterval per (individual, dim).

    ``individual_ids`` keys the substreams; by default individuals are keyed
    by position. Passing stable ids makes the draws invariant to the order
    of individuals in a dataset.
    """
    if n_individuals < 1 or n_draws < 1 or n_dims < 1:
        raise ValidationError("draw counts must all be at least 1")
    if individual_ids is None:
        individual_ids = range(n_individuals)
    else:
        individual_ids = list(individual_ids)
        if len(individual_ids) != n_individuals:
            raise ValidationError("individual_ids length must match n_individuals")

    grid = np.arange(n_draws, dtype=float)
    out = np.empty((n_individuals, n_draws, n_dims))
    for row, ind_id in enumerate(individual_ids):
        ind_id = int(ind_id)
        if ind_id < 0:
            raise ValidationError("individual ids must be non-negative integers")
        rng = _substream(seed, ind_id)
        shifts = _open_uniform(rng, n_dims)
        for dim in range(n_dims):
            values = (grid + shifts[dim]) / n_draws
            out[row, :, dim] = rng.permutation(values)
    return DrawMatrix(out, seed=seed)


def to_standard_normal(uniform: DrawMatrix) -> DrawMatrix:
    """Map uniform draws through the inverse standard-normal CDF."""
    values = uniform.values
    if (values <= 0.0).any() or (values >= 1.0).any():
        raise ValidationError("uniform draws must lie strictly inside (0, 1)")
    return DrawMatrix(ndtri(values), seed=uniform.seed)


def standard_normal_mlhs(
    n_individuals: int,
    n_draws: int,
    n_dims: int,
    seed: int,
    individual_ids: Sequence[int] | None = None,
) -> DrawMatrix:
    return to_standard_normal(
        mlhs_uniform(n_individuals, n_draws, n_dims, seed, individual_ids)
    )


def save_draws_csv(draws: DrawMatrix, path) -> None:
    """Flat debugging dump: one row per (individual, draw, dim, value)."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("individual,draw,dim,value\n")
        for i in range(draws.n_individuals):
            for r in range(draws.n_draws):
                for d in range(draws.n_dims):
                    handle.write(f"{i},{r},{d},{draws.values[i, r, d]!r}\n")
