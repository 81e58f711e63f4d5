"""Divergences and estimation objectives, all under a minimization convention.

Exact KL and Fisher divergences serve as oracles on grids and enumerable
discrete spaces; the empirical objectives (score matching, the discrete
ratio-form objective, ratio matching, pseudo-likelihood, exact MLE) are the
quantities the estimators minimize.  Every objective except exact MLE is
partition-free: it only sees log q~ through derivatives or conditional ratios.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from .grids import GridDensity, log_values, quad, require_same_geometry, support_mask
from .operators import DiscreteJoint, grid_gradient, marginalize
from .models import (
    Dataset,
    Model,
    ModelKind,
    conditional_table,
    gaussian_parts,
    grad_x_log,
    laplacian_x_log,
    log_unnorm,
)


class ObjectiveKind(Enum):
    SM_CONTINUOUS = "sm"
    GSM_DISCRETE = "gsm"
    RATIO_MATCHING = "rm"
    PSEUDO_LIKELIHOOD = "pl"
    EXACT_MLE = "mle"


DISCRETE_OBJECTIVES = {
    ObjectiveKind.GSM_DISCRETE,
    ObjectiveKind.RATIO_MATCHING,
    ObjectiveKind.PSEUDO_LIKELIHOOD,
    ObjectiveKind.EXACT_MLE,
}


@dataclass(frozen=True)
class ObjectiveValue:
    value: float
    grad_theta: np.ndarray | None = None


def objective_record(kind: ObjectiveKind, theta, result: ObjectiveValue) -> dict:
    """JSON-serializable log record for one objective evaluation."""
    rec = {
        "objective": kind.value,
        "theta": np.asarray(theta, dtype=float).tolist(),
        "value": result.value,
    }
    if result.grad_theta is not None:
        rec["grad"] = np.asarray(result.grad_theta, dtype=float).tolist()
    return rec


# ---------------------------------------------------------------------------
# Exact divergences

def kl_exact(p, q) -> float:
    """KL divergence between two normalized densities on a shared support."""
    if isinstance(p, GridDensity) and isinstance(q, GridDensity):
        require_same_geometry(p, q)
        if np.any(q.values[p.values > 0] <= 0):
            raise ValueError("q vanishes where p is positive")
        lp, lq = log_values(p), log_values(q)
        integrand = np.where(p.values > 0, p.values * (lp - lq), 0.0)
        return quad(p, integrand)
    if isinstance(p, DiscreteJoint) and isinstance(q, DiscreteJoint):
        if p.m != q.m or p.d != q.d:
            raise ValueError("joint shapes do not match")
        mask = p.probs > 0
        if np.any(q.probs[mask] <= 0):
            raise ValueError("q vanishes where p is positive")
        return float(np.sum(p.probs[mask] * np.log(p.probs[mask] / q.probs[mask])))
    raise TypeError("p and q must both be GridDensity or both DiscreteJoint")


def fisher_exact(p: GridDensity, q: GridDensity) -> float:
    """Density-weighted squared distance between the two score fields."""
    require_same_geometry(p, q)
    mask = support_mask(p)
    if np.any(q.values[mask] <= 0):
        raise ValueError("q vanishes on the support of p")
    sp = grid_gradient(log_values(p), p.spacing)
    sq = grid_gradient(log_values(q), q.spacing)
    sq_dist = np.zeros_like(p.values)
    for a, b in zip(sp, sq):
        sq_dist += (a - b) ** 2
    return quad(p, np.where(mask, p.values * sq_dist, 0.0))


# ---------------------------------------------------------------------------
# Shared helpers

def _check_continuous_pair(model: Model, data: Dataset) -> None:
    if model.kind not in (ModelKind.GAUSSIAN, ModelKind.GEN_GAUSS_1D):
        raise ValueError("objective requires a continuous model")
    if data.kind != "continuous" or data.dim != model.dim:
        raise ValueError("dataset is not continuous data of matching dimension")


def _check_discrete_pair(model: Model, data: Dataset) -> None:
    if model.alphabet_size is None:
        raise ValueError("objective requires a discrete model")
    if (
        data.kind != "discrete"
        or data.dim != model.dim
        or data.alphabet_size != model.alphabet_size
    ):
        raise ValueError("dataset is not discrete data of matching shape")


def _weighted_states(data: Dataset, weights) -> tuple[np.ndarray, np.ndarray]:
    """Collapse a discrete dataset to unique states with empirical weights.

    Averaging is linear in the samples, so the weighted form agrees with the
    file-order mean up to roundoff while making repeated-state datasets cheap.
    """
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.shape != (data.n,):
            raise ValueError("weights length does not match dataset")
        return data.values, w / w.sum()
    states, counts = np.unique(data.values, axis=0, return_counts=True)
    return states, counts / counts.sum()


def _log_table(model: Model, theta) -> np.ndarray:
    """log q~ on the full state cube, shape (m,)*d."""
    mod = model.with_params(theta)
    m, d = mod.alphabet_size, mod.dim
    states = np.indices((m,) * d).reshape(d, -1).T
    return np.asarray(log_unnorm(mod, states)).reshape((m,) * d)


def _conditionals_from_table(table: np.ndarray, log_space: bool) -> np.ndarray:
    """Per-axis singleton conditionals on the state cube, shape (d,)+cube."""
    d = table.ndim
    out = np.empty((d,) + table.shape)
    for i in range(d):
        if log_space:
            t = table - table.max(axis=i, keepdims=True)
            e = np.exp(t)
        else:
            e = table
        out[i] = e / e.sum(axis=i, keepdims=True)
    return out


def joint_singleton_conditionals(p: DiscreteJoint) -> np.ndarray:
    return _conditionals_from_table(p.probs, log_space=False)


# ---------------------------------------------------------------------------
# Continuous score matching (empirical)

def sm_objective(model: Model, theta, data: Dataset) -> ObjectiveValue:
    """Mean of |grad_x log q~|^2 + 2 * laplacian_x log q~ over the samples."""
    _check_continuous_pair(model, data)
    mod = model.with_params(theta)
    g = grad_x_log(mod, data.values)
    lap = laplacian_x_log(mod, data.values)
    value = float(np.mean(np.sum(g * g, axis=1) + 2.0 * lap))
    grad = None
    if mod.kind is ModelKind.GAUSSIAN:
        grad = _gaussian_sm_grad(mod, data.values)
    return ObjectiveValue(value, grad)


def _gaussian_sm_grad(model: Model, X: np.ndarray) -> np.ndarray:
    mu, cov = gaussian_parts(model)
    d = model.dim
    P = np.linalg.inv(cov)
    xbar = X.mean(axis=0)
    centered = X - mu
    M = centered.T @ centered / X.shape[0]
    grad_mu = -2.0 * P @ P @ (xbar - mu)
    A = -(P @ P @ M @ P + P @ M @ P @ P) + 2.0 * P @ P
    rows, cols = np.tril_indices(d)
    grad_tril = np.where(rows == cols, A[rows, cols], 2.0 * A[rows, cols])
    return np.concatenate([grad_mu, grad_tril])


# ---------------------------------------------------------------------------
# Discrete empirical objectives

def gsm_discrete_objective(
    model: Model, theta, data: Dataset, weights=None
) -> ObjectiveValue:
    """Ratio-form discrete objective: mean of sum_i sum_xi
    (q(~xi|x)/q(xi|x))^2, minus the constant m*d.

    Note: each inner term depends on the sample only through the off-coordinate
    context, and is minimized by uniform conditionals regardless of the data.
    """
    _check_discrete_pair(model, data)
    states, w = _weighted_states(data, weights)
    table = conditional_table(model.with_params(theta), states)
    per_sample = (((1.0 - table) / table) ** 2).sum(axis=(1, 2))
    value = float(w @ per_sample) - model.alphabet_size * model.dim
    return ObjectiveValue(value)


def ratio_matching_objective(
    model: Model, theta, data: Dataset, weights=None
) -> ObjectiveValue:
    """Mean of sum_i sum_xi (1 - q(xi|x^{\\i}))^2 over the samples."""
    _check_discrete_pair(model, data)
    states, w = _weighted_states(data, weights)
    table = conditional_table(model.with_params(theta), states)
    per_sample = ((1.0 - table) ** 2).sum(axis=(1, 2))
    return ObjectiveValue(float(w @ per_sample))


def pseudo_likelihood_objective(
    model: Model, theta, data: Dataset, weights=None
) -> ObjectiveValue:
    """Negative mean log product of singleton conditionals."""
    _check_discrete_pair(model, data)
    states, w = _weighted_states(data, weights)
    table = conditional_table(model.with_params(theta), states)
    obs = np.take_along_axis(table, states[:, :, None], axis=2)[:, :, 0]
    per_sample = -np.log(np.maximum(obs, 1e-300)).sum(axis=1)
    return ObjectiveValue(float(w @ per_sample))


def exact_mle_objective(
    model: Model, theta, data: Dataset, weights=None
) -> ObjectiveValue:
    """Negative mean log *normalized* likelihood (brute-force partition)."""
    mod = model.with_params(theta)
    if mod.kind is ModelKind.GAUSSIAN:
        _check_continuous_pair(model, data)
        mu, cov = gaussian_parts(mod)
        sign, logdet = np.linalg.slogdet(cov)
        if sign <= 0:
            raise ValueError("covariance is not positive definite")
        logq = np.asarray(log_unnorm(mod, data.values))
        const = 0.5 * (mod.dim * np.log(2.0 * np.pi) + logdet)
        return ObjectiveValue(float(-np.mean(logq) + const))
    _check_discrete_pair(model, data)
    states, w = _weighted_states(data, weights)
    table = _log_table(model, theta)
    log_z = float(logsumexp(table))
    logq = np.asarray(log_unnorm(mod, states))
    return ObjectiveValue(float(-(w @ logq) + log_z))


# ---------------------------------------------------------------------------
# Discrete population objectives (enumeration oracles)

def gsm_discrete_population(p: DiscreteJoint, model: Model, theta) -> float:
    """Exact squared-conditional-difference divergence:
    sum_x p(x) sum_i sum_xi (p(xi|x^{\\i}) - q(xi|x^{\\i}))^2.
    """
    _check_population(p, model)
    pc = joint_singleton_conditionals(p)
    qc = _conditionals_from_table(_log_table(model, theta), log_space=True)
    total = 0.0
    for i in range(p.d):
        inner = ((pc[i] - qc[i]) ** 2).sum(axis=i, keepdims=True)
        total += float(np.sum(p.probs * inner))
    return total


def ratio_matching_population(p: DiscreteJoint, model: Model, theta) -> float:
    """Population ratio-matching divergence via phi(u) = 1/(1+u) applied to
    leave-one-out joint ratios; independent route to the same divergence as
    gsm_discrete_population.
    """
    _check_population(p, model)
    log_q = _log_table(model, theta)
    q_table = np.exp(log_q - log_q.max())
    total = 0.0
    for i, (fp, fq) in enumerate(zip(_phi_of_ratios(p.probs), _phi_of_ratios(q_table))):
        inner = ((fp - fq) ** 2).sum(axis=i, keepdims=True)
        total += float(np.sum(p.probs * inner))
    return total


def _phi_of_ratios(table: np.ndarray):
    """phi(f(xi,x)/f(~xi,x)) per coordinate, with phi(u) = 1/(1+u)."""
    marg = marginalize(table)
    for i in range(table.ndim):
        rest = marg[i] - table  # f(~xi, x^{\i})
        yield rest / marg[i]


def pseudo_likelihood_population(p: DiscreteJoint, model: Model, theta) -> float:
    _check_population(p, model)
    qc = _conditionals_from_table(_log_table(model, theta), log_space=True)
    logs = np.log(np.maximum(qc, 1e-300)).sum(axis=0)
    return float(-np.sum(p.probs * logs))


def exact_mle_population(p: DiscreteJoint, model: Model, theta) -> float:
    """Cross entropy of p against the exactly normalized model."""
    _check_population(p, model)
    table = _log_table(model, theta)
    return float(-np.sum(p.probs * (table - logsumexp(table))))


def _check_population(p: DiscreteJoint, model: Model) -> None:
    if model.alphabet_size is None:
        raise ValueError("population objective requires a discrete model")
    if p.m != model.alphabet_size or p.d != model.dim:
        raise ValueError("joint shape does not match the model")
