"""t-distributed stochastic neighbor embedding, plain gradient descent.

High-dimensional affinities use Gaussian kernels whose per-point
bandwidth is binary-searched to hit the requested perplexity; the
embedding minimizes the KL divergence to student-t affinities with
momentum (0.5 until iteration 250, then 0.8), per-element adaptive gains,
and 12x early exaggeration for the first 250 iterations.
"""

import numpy as np

from .. import kernels
from ..errors import PerplexityTooLargeError
from ..numerics import as_matrix
from .base import FittedReducer, ReducerSpec
from .pca import pca_fit

KL_LOG_EVERY = 50
MIN_GAIN = 0.01


def conditional_probs(sq_dists, perplexity, tol=1e-5, max_steps=50):
    """Row-stochastic p(j|i) at the requested perplexity (diagonal 0)."""
    n = sq_dists.shape[0]
    p = np.zeros((n, n))
    target = np.log(perplexity)
    for i in range(n):
        di = np.delete(sq_dists[i], i)
        beta_lo, beta_hi = 0.0, np.inf
        beta = 1.0
        for _ in range(max_steps):
            w = np.exp(-di * beta)
            s = w.sum()
            if s <= 0:
                entropy = 0.0
                probs = np.zeros_like(w)
            else:
                probs = w / s
                entropy = float(np.log(s) + beta * (di * w).sum() / s)
            if abs(entropy - target) < tol:
                break
            if entropy > target:
                beta_lo = beta
                beta = beta * 2.0 if beta_hi == np.inf else 0.5 * (beta + beta_hi)
            else:
                beta_hi = beta
                beta = 0.5 * (beta + beta_lo)
        row = np.insert(probs, i, 0.0)
        p[i] = row
    return p


def joint_probs(x, perplexity):
    sq = kernels.pairwise_sq(x, x)
    cond = conditional_probs(sq, perplexity)
    n = x.shape[0]
    return (cond + cond.T) / (2.0 * n)


def _pca_init(x, spec):
    init_spec = ReducerSpec(method="pca", dim=min(spec.dim, min(x.shape[1], x.shape[0] - 1)))
    y = pca_fit(x, init_spec).embedding
    if y.shape[1] < spec.dim:
        y = np.pad(y, ((0, 0), (0, spec.dim - y.shape[1])))
    std = y.std()
    if std > 0:
        y = y / std * 1e-4
    else:
        y = np.random.default_rng(spec.seed).normal(0.0, 1e-4, size=y.shape)
    return y


def tsne_fit(x, spec: ReducerSpec) -> FittedReducer:
    m = as_matrix(x, "tsne input")
    n = m.shape[0]
    if spec.perplexity >= (n - 1) / 3.0:
        raise PerplexityTooLargeError(
            f"perplexity {spec.perplexity} needs more than {int(3 * spec.perplexity) + 1} points"
        )
    p = joint_probs(m, spec.perplexity)
    y = _pca_init(m, spec)
    inc = np.zeros_like(y)
    gains = np.ones_like(y)
    _, kl_initial = kernels.tsne_grad(y, p)
    kl_trace = [(0, float(kl_initial))]
    for it in range(1, spec.n_iter + 1):
        exaggerate = it <= spec.exaggeration_iters
        p_eff = p * spec.early_exaggeration if exaggerate else p
        grad, _ = kernels.tsne_grad(y, p_eff)
        momentum = 0.5 if it < 250 else 0.8
        flip = np.sign(grad) != np.sign(inc)
        gains = np.where(flip, gains + 0.2, gains * 0.8)
        np.maximum(gains, MIN_GAIN, out=gains)
        inc = momentum * inc - spec.learning_rate * gains * grad
        y = y + inc
        y = y - y.mean(axis=0)
        if it % KL_LOG_EVERY == 0 or it == spec.n_iter:
            _, kl = kernels.tsne_grad(y, p)
            kl_trace.append((it, float(kl)))
    final_kl = kl_trace[-1][1]
    return FittedReducer(
        spec=spec,
        train_x=m,
        embedding=y,
        diagnostics={
            "kl_initial": float(kl_initial),
            "kl_final": final_kl,
            "kl_trace": [[it, v] for it, v in kl_trace],
        },
    )
