"""Simulated panel log-likelihood, analytic gradient, and fit statistics.

The panel probability of an individual is the average over draws of the
product of per-task logit probabilities; utilities are linear in every
parameter once draws are fixed, which gives the gradient in closed form.
The same draw matrix is reused for every evaluation within a run (common
random numbers), so the simulated objective is smooth.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import ChoiceDataset, CompiledData, Individual, compile_dataset, split_params
from .draws import DrawMatrix
from .model import ModelSpec, ParameterVector, ValidationError, availability

_P_CACHE_BYTES = 512 * 1024 * 1024  # keep per-draw probabilities between passes below this


@dataclass(frozen=True)
class FitStatistics:
    null_ll: float
    final_ll: float
    rho_square: float
    n_parameters: int
    n_observations: int
    n_individuals: int


def task_choice_prob(v: np.ndarray, avail: np.ndarray) -> np.ndarray:
    """Softmax over the available alternatives; unavailable ones get exactly 0."""
    v = np.asarray(v, dtype=float)
    avail = np.asarray(avail, dtype=bool)
    if not avail.any():
        raise ValidationError("a task needs at least one available alternative")
    shifted = np.where(avail, v - v[avail].max(), -np.inf)
    expv = np.exp(shifted)
    return expv / expv.sum()


def null_loglik(dataset: ChoiceDataset) -> float:
    """Log-likelihood of the equal-shares model: sum of -ln(available count)."""
    total = 0.0
    for ind in dataset.individuals:
        persona = ind.persona
        for obs in ind.tasks:
            n_avail = sum(
                1
                for alt, flag in obs.availability.items()
                if flag and availability(obs, alt, persona)
            )
            if n_avail == 0:
                raise ValidationError(f"task {obs.task_id} has no available alternative")
            total -= np.log(n_avail)
    return float(total)


def rho_square(final_ll: float, null_ll: float) -> float:
    if null_ll == 0.0:
        raise ValidationError("null log-likelihood of zero leaves rho-square undefined")
    return 1.0 - final_ll / null_ll


class ZeroProbabilityError(ValidationError):
    def __init__(self, individual_id: int):
        self.individual_id = individual_id
        super().__init__(
            f"individual {individual_id} has zero simulated probability; "
            f"the likelihood is undefined at these parameters"
        )


class EvaluationContext:
    """Precomputed tensors binding compiled data to one draw matrix.

    Holding the per-observation draw view (``z_obs``) costs memory
    proportional to n_obs x n_draws x n_components but saves a gather on
    every likelihood evaluation, which dominates estimation runtime.
    Draw blocks are processed in a fixed order (optionally on a thread
    pool) and reduced sequentially, so repeated evaluations are
    bit-identical.
    """

    def __init__(
        self,
        compiled: CompiledData,
        draws: DrawMatrix,
        draw_block: int = 500,
        threads: int = 1,
    ):
        if draws.n_individuals != compiled.n_individuals:
            raise ValidationError(
                f"draw matrix covers {draws.n_individuals} individuals, "
                f"data has {compiled.n_individuals}"
            )
        if draws.n_dims != compiled.n_components:
            raise ValidationError(
                f"draw matrix has {draws.n_dims} dimensions, the model declares "
                f"{compiled.n_components} error components"
            )
        self.compiled = compiled
        self.n_draws = draws.n_draws
        self.draw_block = max(1, int(draw_block))
        self.threads = max(1, int(threads))
        # (n_obs, n_draws, n_components) view of the panel draws
        self.z_obs = np.ascontiguousarray(draws.values[compiled.obs_individual])
        self.onehot = np.zeros((compiled.n_obs, 3))
        self._rows = np.arange(compiled.n_obs)
        self.onehot[self._rows, compiled.chosen] = 1.0
        self.neg_inf_pad = np.where(compiled.avail, 0.0, -np.inf)
        self._blocks = [
            (start, min(start + self.draw_block, self.n_draws))
            for start in range(0, self.n_draws, self.draw_block)
        ]
        p_bytes = compiled.n_obs * 3 * self.n_draws * 8
        self._cache_probs = p_bytes <= _P_CACHE_BYTES

    def _map_blocks(self, func):
        """Apply ``func(start, stop)`` per draw block, results in block order."""
        if self.threads == 1 or len(self._blocks) == 1:
            return [func(start, stop) for start, stop in self._blocks]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(lambda b: func(*b), self._blocks))

    def _chunk_probs(self, v: np.ndarray, abs_sigma: np.ndarray, start: int, stop: int):
        """Choice probabilities (n_obs, D, 3) for one draw block."""
        compiled = self.compiled
        z = self.z_obs[:, start:stop, :]
        weighted = (compiled.loadings * abs_sigma).T  # (C, 3)
        n_obs, depth, n_comp = z.shape
        if n_comp:
            u = (z.reshape(-1, n_comp) @ weighted).reshape(n_obs, depth, 3)
            u += (v + self.neg_inf_pad)[:, None, :]
        else:
            u = np.broadcast_to((v + self.neg_inf_pad)[:, None, :], (n_obs, depth, 3)).copy()
        u -= np.max(u, axis=2, keepdims=True)
        np.exp(u, out=u)
        u /= u.sum(axis=2, keepdims=True)
        return u

    def _panel_matrix(self, v, abs_sigma, keep_probs: bool):
        """Per-(individual, draw) products of task probabilities.

        Returns (panel, prob_chunks); prob_chunks is None unless requested
        and small enough to hold.
        """
        compiled = self.compiled
        panel = np.empty((compiled.n_individuals, self.n_draws))
        keep = keep_probs and self._cache_probs

        def work(start, stop):
            p = self._chunk_probs(v, abs_sigma, start, stop)
            p_chosen = p[self._rows, :, compiled.chosen]
            with np.errstate(divide="ignore"):
                logp = np.log(p_chosen)
            block_panel = np.exp(np.add.reduceat(logp, compiled.obs_starts, axis=0))
            return block_panel, (p if keep else None)

        chunks = self._map_blocks(work)
        prob_chunks = [] if keep else None
        for (start, stop), (block_panel, p) in zip(self._blocks, chunks):
            panel[:, start:stop] = block_panel
            if keep:
                prob_chunks.append(p)
        return panel, prob_chunks

    def loglik(self, params: ParameterVector) -> float:
        ll, _ = self._loglik_impl(params, want_gradient=False)
        return ll

    def loglik_and_gradient(self, params: ParameterVector):
        """Simulated log-likelihood and its gradient over the free parameters."""
        return self._loglik_impl(params, want_gradient=True)

    def _loglik_impl(self, params: ParameterVector, want_gradient: bool):
        compiled = self.compiled
        beta, sigma = split_params(compiled, params)
        abs_sigma = np.abs(sigma)
        v = compiled.design @ beta

        panel, prob_chunks = self._panel_matrix(v, abs_sigma, keep_probs=want_gradient)
        prob = panel.mean(axis=1)
        if (prob <= 0.0).any():
            bad = int(np.argmax(prob <= 0.0))
            raise ZeroProbabilityError(compiled.individual_ids[bad])
        ll = float(np.log(prob).sum())
        if not want_gradient:
            return ll, None

        # Draw weights w[n, d] sum to one per individual, so the
        # chosen-alternative part of the score collapses to the one-hot
        # matrix and only the probability-weighted parts need the draws.
        w = panel / panel.sum(axis=1, keepdims=True)
        w_obs_full = w[compiled.obs_individual]
        n_comp = compiled.n_components

        def work(index_start_stop):
            index, (start, stop) = index_start_stop
            if prob_chunks is not None:
                p = prob_chunks[index]
            else:
                p = self._chunk_probs(v, abs_sigma, start, stop)
            w_obs = w_obs_full[:, start:stop]
            pw = p * w_obs[:, :, None]  # (n_obs, D, 3)
            sum_wp = pw.sum(axis=1)
            if n_comp:
                z = self.z_obs[:, start:stop, :]
                a_z = np.matmul(w_obs[:, None, :], z)[:, 0, :]
                b_z = np.matmul(pw.transpose(0, 2, 1), z)
            else:
                a_z = b_z = None
            return sum_wp, a_z, b_z

        if self.threads == 1 or len(self._blocks) == 1:
            pieces = [work(item) for item in enumerate(self._blocks)]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                pieces = list(pool.map(work, enumerate(self._blocks)))

        sum_wp = np.zeros((compiled.n_obs, 3))
        a_z = np.zeros((compiled.n_obs, n_comp))
        b_z = np.zeros((compiled.n_obs, 3, n_comp))
        for piece in pieces:
            sum_wp += piece[0]
            if n_comp:
                a_z += piece[1]
                b_z += piece[2]

        g_obs = self.onehot - sum_wp
        grad_beta = np.einsum("oj,ojp->p", g_obs, compiled.design)

        grad_sigma = np.zeros(n_comp)
        if n_comp:
            sign = np.sign(sigma)
            chosen_load = compiled.loadings[compiled.chosen]
            pos = (a_z * chosen_load).sum(axis=0)
            neg = np.einsum("ojc,jc->c", b_z, compiled.loadings)
            grad_sigma = sign * (pos - neg)

        full = dict(zip(compiled.parameter_names, np.concatenate([grad_beta, grad_sigma])))
        grad_free = np.array([full[name] for name in params.free_names])
        return ll, grad_free


def simulated_loglik(
    dataset: ChoiceDataset | CompiledData,
    spec: ModelSpec,
    params: ParameterVector,
    draws: DrawMatrix,
    draw_block: int = 500,
) -> float:
    compiled = dataset if isinstance(dataset, CompiledData) else compile_dataset(dataset, spec)
    return EvaluationContext(compiled, draws, draw_block).loglik(params)


def gradient(
    dataset: ChoiceDataset | CompiledData,
    spec: ModelSpec,
    params: ParameterVector,
    draws: DrawMatrix,
    draw_block: int = 500,
) -> np.ndarray:
    compiled = dataset if isinstance(dataset, CompiledData) else compile_dataset(dataset, spec)
    _, grad = EvaluationContext(compiled, draws, draw_block).loglik_and_gradient(params)
    return grad


def panel_probability(
    individual: Individual,
    spec: ModelSpec,
    params: ParameterVector,
    individual_draws: np.ndarray,
) -> float:
    """Simulated probability of one individual's observed choice sequence.

    ``individual_draws`` has shape (n_draws, n_components): the error
    components are drawn once per individual and shared by all tasks.
    """
    individual_draws = np.atleast_2d(np.asarray(individual_draws, dtype=float))
    if individual_draws.shape[1] != len(spec.error_components):
        raise ValidationError(
            f"draws have {individual_draws.shape[1]} dimensions, the model declares "
            f"{len(spec.error_components)} error components"
        )
    dataset = ChoiceDataset(spec.kind, (individual,))
    compiled = compile_dataset(dataset, spec)
    draws = DrawMatrix(np.ascontiguousarray(individual_draws[None, :, :]), seed=0)
    context = EvaluationContext(compiled, draws)
    beta, sigma = split_params(compiled, params)
    panel, _ = context._panel_matrix(compiled.design @ beta, np.abs(sigma), keep_probs=False)
    return float(panel.mean())
