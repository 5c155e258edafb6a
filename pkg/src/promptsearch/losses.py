"""Classification losses computed from vocabulary logits.

Both losses operate on a bundle of logits over the full vocabulary together
with a set of verbalizer token ids.  Cross-entropy normalizes only over the
verbalizer set; the confidence-regularized variant additionally penalizes
low total probability mass on the verbalizers relative to the whole
vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidBundleError(ValueError):
    """Raised when a logit bundle violates its structural invariants."""


@dataclass(frozen=True)
class LogitBundle:
    """Logits over the vocabulary plus the verbalizer subset and gold label.

    Attributes
    ----------
    logits : np.ndarray
        Shape (vocab_size,), one logit per vocabulary token.
    verbalizer_ids : tuple[int, ...]
        Distinct indices into the vocabulary acting as class candidates.
    label_id : int
        The gold verbalizer; must be a member of ``verbalizer_ids``.
    """

    logits: np.ndarray
    verbalizer_ids: tuple[int, ...]
    label_id: int

    def __post_init__(self):
        logits = np.asarray(self.logits, dtype=np.float64)
        object.__setattr__(self, "logits", logits)
        object.__setattr__(self, "verbalizer_ids", tuple(int(v) for v in self.verbalizer_ids))
        if logits.ndim != 1:
            raise InvalidBundleError("logits must be a 1-d array")
        if not np.all(np.isfinite(logits)):
            raise InvalidBundleError("logits must be finite")
        if len(self.verbalizer_ids) == 0:
            raise InvalidBundleError("verbalizer set is empty")
        if len(set(self.verbalizer_ids)) != len(self.verbalizer_ids):
            raise InvalidBundleError("duplicate verbalizer ids")
        if any(v < 0 or v >= logits.shape[0] for v in self.verbalizer_ids):
            raise InvalidBundleError("verbalizer id out of vocabulary range")
        if self.label_id not in self.verbalizer_ids:
            raise InvalidBundleError(
                f"label id {self.label_id} not in verbalizer set {self.verbalizer_ids}"
            )


def _logsumexp(a: np.ndarray) -> float:
    m = np.max(a)
    return float(m + np.log(np.sum(np.exp(a - m))))


def cross_entropy_loss(bundle: LogitBundle) -> float:
    """Negative log-softmax of the gold verbalizer, normalized over the
    verbalizer set only.  Always >= 0."""
    a_w = bundle.logits[list(bundle.verbalizer_ids)]
    a_z = float(bundle.logits[bundle.label_id])
    return _logsumexp(a_w) - a_z


def confidence_regularized_loss(bundle: LogitBundle, beta: float) -> float:
    """Cross-entropy plus ``beta`` times the negative log of the verbalizer
    probability mass within the full vocabulary.

    The regularizer is -log(sum_W exp(a) / sum_V exp(a)) >= 0, so the result
    dominates the plain cross-entropy for any beta >= 0 and reduces to it
    exactly at beta = 0.
    """
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    ce = cross_entropy_loss(bundle)
    if beta == 0.0:
        return ce
    a_w = bundle.logits[list(bundle.verbalizer_ids)]
    regularizer = _logsumexp(bundle.logits) - _logsumexp(a_w)
    return ce + beta * regularizer
