"""NumPy implementations of the chain dynamic programs.

Drop-in twin of the compiled ``_ckernels`` extension; selected as a
fallback when the extension is not built.  All inputs are float64 arrays:
``scores`` is (T, K) emission log-scores, ``trans`` (K, K) transition
log-scores, ``start``/``end`` (K,) boundary log-scores.  T >= 1 is the
caller's responsibility.
"""

from __future__ import annotations

import numpy as np


def _lse(values: np.ndarray, axis=None):
    """log(sum(exp(values))) with max-shift; tolerates -inf slices."""
    shift = np.max(values, axis=axis, keepdims=True)
    shift = np.where(np.isfinite(shift), shift, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(values - shift), axis=axis)) + np.squeeze(shift, axis=axis)
    return out


def logz(scores, trans, start, end) -> float:
    """Log-partition over all K^T paths via the forward recursion."""
    T = scores.shape[0]
    alpha = start + scores[0]
    for t in range(1, T):
        alpha = scores[t] + _lse(alpha[:, None] + trans, axis=0)
    final = alpha + end
    shift = final.max()
    return float(shift + np.log(np.exp(final - shift).sum()))


def posteriors(scores, trans, start, end):
    """Forward-backward pass.

    Returns ``(logz, unary, pairwise)`` where ``unary[t, k]`` is the
    posterior tag probability and ``pairwise[i, j]`` the expected number of
    i->j transitions, summed over positions.
    """
    T, K = scores.shape
    alpha = np.empty((T, K))
    beta = np.empty((T, K))
    alpha[0] = start + scores[0]
    for t in range(1, T):
        alpha[t] = scores[t] + _lse(alpha[t - 1][:, None] + trans, axis=0)
    beta[T - 1] = end
    for t in range(T - 2, -1, -1):
        beta[t] = _lse(trans + (scores[t + 1] + beta[t + 1])[None, :], axis=1)
    final = alpha[T - 1] + end
    shift = final.max()
    log_z = float(shift + np.log(np.exp(final - shift).sum()))

    unary = np.exp(alpha + beta - log_z)
    pairwise = np.zeros((K, K))
    for t in range(T - 1):
        pairwise += np.exp(
            alpha[t][:, None] + trans + (scores[t + 1] + beta[t + 1])[None, :] - log_z
        )
    return log_z, unary, pairwise


def viterbi(scores, trans, start, end, allowed, allowed_start, allowed_end):
    """Best path under the transition legality masks.

    Masks are uint8/bool arrays; forbidden entries score -inf.  Returns
    ``(path, score)`` with ``score == -inf`` when no legal path exists
    (path contents are then meaningless).  Ties resolve to the lowest tag
    index, matching the compiled kernel.
    """
    T, K = scores.shape
    neg = -np.inf
    masked_trans = np.where(allowed.astype(bool), trans, neg)
    delta = np.where(allowed_start.astype(bool), start + scores[0], neg)
    backptr = np.zeros((T, K), dtype=np.int64)
    for t in range(1, T):
        cand = delta[:, None] + masked_trans
        backptr[t] = np.argmax(cand, axis=0)
        delta = scores[t] + cand[backptr[t], np.arange(K)]
    final = np.where(allowed_end.astype(bool), delta + end, neg)
    best_last = int(np.argmax(final))
    best_score = float(final[best_last])
    path = np.empty(T, dtype=np.int64)
    path[T - 1] = best_last
    for t in range(T - 1, 0, -1):
        path[t - 1] = backptr[t, path[t]]
    return path, best_score
