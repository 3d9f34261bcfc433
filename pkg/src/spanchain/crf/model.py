"""Linear-chain CRF over tag sequences.

A path y_1..y_T scores ``start[y_1] + sum_t emissions[t, y_t] +
sum_{t>=2} transitions[y_{t-1}, y_t] + end[y_T]``.  All recursions run in
log-space.  Decoding may be constrained by a transition legality mask so
that the best path always re-encodes to a well-formed tag sequence.

Positions flagged by an emission matrix's ``ignore_mask`` are bridged:
they contribute no emission or transition score, and decoded paths carry
the nearest active tag through them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import DecodeError, TrainingError, ValidationError
from ..tagcodec import (
    EncodingScheme,
    END,
    START,
    Tag,
    TagSequence,
    check_tag,
    legal_transition,
    validate as validate_tags,
)
from . import kernels


def parse_tag_order(tag_order: Sequence[str], scheme: EncodingScheme | str) -> list[Tag]:
    scheme = EncodingScheme(scheme)
    tags = [Tag.parse(t) for t in tag_order]
    for tag in tags:
        check_tag(tag, scheme)
    if len(set(tag_order)) != len(tags):
        raise ValidationError("tag_order contains duplicates")
    return tags


@dataclass
class EmissionMatrix:
    """Per-token, per-tag log-scores for one document."""

    doc_id: str
    scores: np.ndarray
    tag_order: tuple[str, ...]
    ignore_mask: Optional[np.ndarray] = None
    tokens: Optional[list] = None

    def __post_init__(self):
        self.tag_order = tuple(self.tag_order)
        if not self.tag_order:
            raise ValidationError("tag_order must be non-empty")
        self.scores = np.asarray(self.scores, dtype=np.float64).reshape(-1, len(self.tag_order))
        if not np.isfinite(self.scores).all():
            raise ValidationError(f"emission scores for doc {self.doc_id!r} contain non-finite values")
        if self.ignore_mask is not None:
            self.ignore_mask = np.asarray(self.ignore_mask, dtype=bool)
            if self.ignore_mask.shape != (self.scores.shape[0],):
                raise ValidationError(
                    f"ignore_mask length {self.ignore_mask.shape} does not match "
                    f"T={self.scores.shape[0]} for doc {self.doc_id!r}"
                )

    @property
    def n_tokens(self) -> int:
        return self.scores.shape[0]

    @property
    def n_tags(self) -> int:
        return self.scores.shape[1]

    def active_indices(self) -> np.ndarray:
        if self.ignore_mask is None:
            return np.arange(self.n_tokens)
        return np.flatnonzero(~self.ignore_mask)


@dataclass
class CrfModel:
    transitions: np.ndarray
    start: np.ndarray
    end: np.ndarray
    tag_order: tuple[str, ...]
    scheme: EncodingScheme

    def __post_init__(self):
        self.tag_order = tuple(self.tag_order)
        self.scheme = EncodingScheme(self.scheme)
        k = len(self.tag_order)
        self.transitions = np.ascontiguousarray(self.transitions, dtype=np.float64)
        self.start = np.ascontiguousarray(self.start, dtype=np.float64)
        self.end = np.ascontiguousarray(self.end, dtype=np.float64)
        if self.transitions.shape != (k, k) or self.start.shape != (k,) or self.end.shape != (k,):
            raise ValidationError("model parameter shapes are inconsistent with tag_order")
        for arr in (self.transitions, self.start, self.end):
            if not np.isfinite(arr).all():
                raise ValidationError("model parameters must be finite")
        parse_tag_order(self.tag_order, self.scheme)

    @classmethod
    def zeros(cls, tag_order: Sequence[str], scheme: EncodingScheme | str) -> "CrfModel":
        k = len(tag_order)
        return cls(np.zeros((k, k)), np.zeros(k), np.zeros(k), tuple(tag_order), EncodingScheme(scheme))

    @property
    def n_tags(self) -> int:
        return len(self.tag_order)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 20
    l2: float = 0.0
    seed: int = 0
    batch_size: int = 8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")
        if self.l2 < 0:
            raise ValidationError("l2 must be non-negative")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")


@dataclass(frozen=True)
class TransitionMask:
    """Boolean legality of pair transitions and chain boundary tags."""

    pairs: np.ndarray
    start: np.ndarray
    end: np.ndarray


def legality_mask(tag_order: Sequence[str], scheme: EncodingScheme | str) -> TransitionMask:
    """Mask derived from the encoding scheme's transition table."""
    scheme = EncodingScheme(scheme)
    tags = parse_tag_order(tag_order, scheme)
    k = len(tags)
    pairs = np.zeros((k, k), dtype=np.uint8)
    start = np.zeros(k, dtype=np.uint8)
    end = np.zeros(k, dtype=np.uint8)
    for i, a in enumerate(tags):
        start[i] = legal_transition(START, a, scheme)
        end[i] = legal_transition(a, END, scheme)
        for j, b in enumerate(tags):
            pairs[i, j] = legal_transition(a, b, scheme)
    return TransitionMask(pairs=pairs, start=start, end=end)


def _open_mask(k: int) -> TransitionMask:
    return TransitionMask(
        pairs=np.ones((k, k), dtype=np.uint8),
        start=np.ones(k, dtype=np.uint8),
        end=np.ones(k, dtype=np.uint8),
    )


def _check_compatible(model: CrfModel, emissions: EmissionMatrix) -> None:
    if tuple(emissions.tag_order) != model.tag_order:
        raise ValidationError(
            f"emission tag order {emissions.tag_order} does not match model {model.tag_order}"
        )


def score_path(model: CrfModel, emissions: EmissionMatrix, path: Sequence[int]) -> float:
    """Log-score of one tag-index path (masked positions skipped)."""
    _check_compatible(model, emissions)
    if len(path) != emissions.n_tokens:
        raise ValidationError(f"path length {len(path)} != T={emissions.n_tokens}")
    path = np.asarray(path, dtype=np.int64)
    if path.size and (path.min() < 0 or path.max() >= model.n_tags):
        raise ValidationError("path contains out-of-range tag indices")
    active = emissions.active_indices()
    if active.size == 0:
        return 0.0
    y = path[active]
    scores = emissions.scores[active]
    total = model.start[y[0]] + model.end[y[-1]]
    total += scores[np.arange(y.size), y].sum()
    total += model.transitions[y[:-1], y[1:]].sum()
    return float(total)


def log_partition(model: CrfModel, emissions: EmissionMatrix) -> float:
    """log sum over all paths of exp(score_path)."""
    _check_compatible(model, emissions)
    active = emissions.active_indices()
    if active.size == 0:
        return 0.0
    scores = np.ascontiguousarray(emissions.scores[active])
    return float(kernels.logz(scores, model.transitions, model.start, model.end))


def _expand_path(path: np.ndarray, active: np.ndarray, n_tokens: int) -> list[int]:
    """Carry each active tag through the ignored positions that follow it;
    leading ignored positions take the first active tag."""
    full = np.zeros(n_tokens, dtype=np.int64)
    if active.size:
        full[: active[0]] = path[0]
        for idx in range(active.size):
            lo = active[idx]
            hi = active[idx + 1] if idx + 1 < active.size else n_tokens
            full[lo:hi] = path[idx]
    return [int(v) for v in full]


def viterbi(
    model: CrfModel,
    emissions: EmissionMatrix,
    transition_mask: Optional[TransitionMask] = None,
) -> tuple[list[int], float]:
    """Highest-scoring path and its score; masked transitions are excluded."""
    _check_compatible(model, emissions)
    active = emissions.active_indices()
    if active.size == 0:
        return ([0] * emissions.n_tokens if emissions.n_tokens else [], 0.0)
    mask = transition_mask or _open_mask(model.n_tags)
    scores = np.ascontiguousarray(emissions.scores[active])
    path, best = kernels.viterbi(
        scores,
        model.transitions,
        model.start,
        model.end,
        np.ascontiguousarray(mask.pairs, dtype=np.uint8),
        np.ascontiguousarray(mask.start, dtype=np.uint8),
        np.ascontiguousarray(mask.end, dtype=np.uint8),
    )
    if not np.isfinite(best):
        raise DecodeError(f"no legal path exists for doc {emissions.doc_id!r} under the given mask")
    return _expand_path(np.asarray(path), active, emissions.n_tokens), float(best)


def marginals(model: CrfModel, emissions: EmissionMatrix) -> np.ndarray:
    """Posterior tag probabilities, one row per token (rows sum to 1)."""
    _check_compatible(model, emissions)
    active = emissions.active_indices()
    t, k = emissions.n_tokens, model.n_tags
    if active.size == 0:
        return np.full((t, k), 1.0 / k) if t else np.zeros((0, k))
    scores = np.ascontiguousarray(emissions.scores[active])
    _, unary, _ = kernels.posteriors(scores, model.transitions, model.start, model.end)
    if active.size == t:
        return np.asarray(unary)
    out = np.empty((t, k))
    out[: active[0]] = unary[0]
    for idx in range(active.size):
        lo = active[idx]
        hi = active[idx + 1] if idx + 1 < active.size else t
        out[lo:hi] = unary[idx]
    return out


@dataclass
class Gradients:
    transitions: np.ndarray
    start: np.ndarray
    end: np.ndarray
    emissions: Optional[list[np.ndarray]] = None


def _check_gold_path(model: CrfModel, emissions: EmissionMatrix, path: Sequence[int]) -> np.ndarray:
    if len(path) != emissions.n_tokens:
        raise ValidationError(
            f"gold path length {len(path)} != T={emissions.n_tokens} for doc {emissions.doc_id!r}"
        )
    y = np.asarray(path, dtype=np.int64)
    if y.size and (y.min() < 0 or y.max() >= model.n_tags):
        raise ValidationError("gold path contains out-of-range tag indices")
    active = emissions.active_indices()
    tags = [Tag.parse(model.tag_order[i]) for i in y[active]]
    seq = TagSequence(tuple(tags), model.scheme)
    violations = validate_tags(seq)
    if violations:
        raise ValidationError(
            f"gold path for doc {emissions.doc_id!r} is illegal: "
            + "; ".join(str(v) for v in violations)
        )
    return y


def nll_and_gradient(
    model: CrfModel,
    batch: Sequence[tuple[EmissionMatrix, Sequence[int]]],
    l2: float = 0.0,
    with_emission_grads: bool = False,
) -> tuple[float, Gradients]:
    """Negative log-likelihood of the batch plus l2 penalty, with gradients
    (expected minus observed sufficient statistics)."""
    k = model.n_tags
    grads = Gradients(np.zeros((k, k)), np.zeros(k), np.zeros(k), [] if with_emission_grads else None)
    loss = 0.0
    for emissions, gold in batch:
        _check_compatible(model, emissions)
        y_full = _check_gold_path(model, emissions, gold)
        active = emissions.active_indices()
        if with_emission_grads:
            grads.emissions.append(np.zeros_like(emissions.scores))
        if active.size == 0:
            continue
        y = y_full[active]
        scores = np.ascontiguousarray(emissions.scores[active])
        log_z, unary, pairwise = kernels.posteriors(scores, model.transitions, model.start, model.end)
        unary = np.asarray(unary)
        pairwise = np.asarray(pairwise)
        gold_score = model.start[y[0]] + model.end[y[-1]]
        gold_score += scores[np.arange(y.size), y].sum()
        gold_score += model.transitions[y[:-1], y[1:]].sum()
        loss += log_z - gold_score

        grads.start += unary[0]
        grads.start[y[0]] -= 1.0
        grads.end += unary[-1]
        grads.end[y[-1]] -= 1.0
        observed = np.zeros((k, k))
        np.add.at(observed, (y[:-1], y[1:]), 1.0)
        grads.transitions += pairwise - observed
        if with_emission_grads:
            em_grad = unary.copy()
            em_grad[np.arange(y.size), y] -= 1.0
            grads.emissions[-1][active] = em_grad
    if l2:
        loss += l2 * (
            np.square(model.transitions).sum()
            + np.square(model.start).sum()
            + np.square(model.end).sum()
        )
        grads.transitions += 2.0 * l2 * model.transitions
        grads.start += 2.0 * l2 * model.start
        grads.end += 2.0 * l2 * model.end
    return float(loss), grads


def dataset_nll(
    model: CrfModel, dataset: Sequence[tuple[EmissionMatrix, Sequence[int]]], l2: float = 0.0
) -> float:
    loss, _ = nll_and_gradient(model, dataset, l2=l2)
    return loss


def train(
    dataset: Sequence[tuple[EmissionMatrix, Sequence[int]]],
    scheme: EncodingScheme | str,
    config: TrainConfig = TrainConfig(),
    tag_order: Optional[Sequence[str]] = None,
) -> CrfModel:
    """Fit transition/start/end parameters by mini-batch gradient descent.

    Deterministic for a fixed seed.  Raises TrainingError on divergence
    (non-finite loss) naming the epoch.
    """
    if not dataset:
        raise ValidationError("training dataset is empty")
    if tag_order is None:
        tag_order = dataset[0][0].tag_order
    for emissions, _ in dataset:
        if tuple(emissions.tag_order) != tuple(tag_order):
            raise ValidationError("all emission matrices must share one tag_order")
    model = CrfModel.zeros(tag_order, scheme)
    rng = np.random.default_rng(config.seed)
    order = np.arange(len(dataset))
    for epoch in range(config.epochs):
        rng.shuffle(order)
        for lo in range(0, len(order), config.batch_size):
            batch = [dataset[i] for i in order[lo : lo + config.batch_size]]
            loss, grads = nll_and_gradient(model, batch, l2=config.l2)
            if not np.isfinite(loss):
                raise TrainingError(f"training diverged at epoch {epoch}: loss={loss}")
            step = config.learning_rate / len(batch)
            model.transitions -= step * grads.transitions
            model.start -= step * grads.start
            model.end -= step * grads.end
    return model
