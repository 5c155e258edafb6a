"""Masked-LM scoring of continuous prompts.

The prompt vector is reshaped to (prompt_length, embed_dim) and prepended
before the templated input embeddings; the attention mask covers the prompt
positions, so the prompt participates as ordinary embeddings.  Evaluation is
mode-eval, full-batch, and deterministic for a fixed (model seed, task).
"""

from __future__ import annotations

import numpy as np
import torch
from transformers import BertConfig, BertForMaskedLM

from .task import PAD, TaskTemplate

MODEL_PRESETS = {
    "tiny-64": dict(hidden_size=64, num_hidden_layers=2, num_attention_heads=2,
                    intermediate_size=128),
    "small-128": dict(hidden_size=128, num_hidden_layers=4, num_attention_heads=4,
                      intermediate_size=256),
}

MAX_PARAMETERS = 150_000_000


class ScorerError(ValueError):
    """Invalid scorer configuration."""


def _logsumexp(values: np.ndarray) -> float:
    peak = float(np.max(values))
    return peak + float(np.log(np.sum(np.exp(values - peak))))


def cross_entropy(logits: np.ndarray, verbalizer_ids: tuple[int, ...], label_id: int) -> float:
    return _logsumexp(logits[list(verbalizer_ids)]) - float(logits[label_id])


def confidence_regularized(
    logits: np.ndarray, verbalizer_ids: tuple[int, ...], label_id: int, beta: float
) -> float:
    ce = cross_entropy(logits, verbalizer_ids, label_id)
    return ce - beta * (_logsumexp(logits[list(verbalizer_ids)]) - _logsumexp(logits))


class MaskedLMScorer:
    def __init__(self, task: TaskTemplate, model_id: str = "tiny-64", seed: int = 0):
        if model_id not in MODEL_PRESETS:
            raise ScorerError(f"unknown model id {model_id!r}; options: {sorted(MODEL_PRESETS)}")
        preset = MODEL_PRESETS[model_id]
        self.task = task
        self.model_id = model_id
        config = BertConfig(
            vocab_size=task.vocab_size,
            max_position_embeddings=256,
            pad_token_id=PAD,
            **preset,
        )
        torch.manual_seed(seed)
        self.model = BertForMaskedLM(config).eval()
        n_params = sum(p.numel() for p in self.model.parameters())
        if n_params > MAX_PARAMETERS:
            raise ScorerError(f"model has {n_params} parameters (limit {MAX_PARAMETERS})")
        self.embed_dim = config.hidden_size

        ids, mask_positions = task.encode_all()
        width = max(len(row) for row in ids)
        padded = torch.full((len(ids), width), PAD, dtype=torch.long)
        attention = torch.zeros((len(ids), width), dtype=torch.long)
        for i, row in enumerate(ids):
            padded[i, : len(row)] = torch.tensor(row)
            attention[i, : len(row)] = 1
        self.input_ids = padded
        self.text_attention = attention
        self.mask_positions = torch.tensor(mask_positions)
        self.labels = task.labels

    @property
    def prompt_dim(self) -> int:
        return self.task.prompt_length * self.embed_dim

    def mask_logits(self, prompt: np.ndarray) -> np.ndarray:
        """Mask-position logits per example, shape (n_examples, vocab_size)."""
        prompt = np.asarray(prompt, dtype=np.float64)
        if prompt.shape != (self.prompt_dim,):
            raise ScorerError(
                f"prompt must have {self.prompt_dim} entries "
                f"(= embed_dim {self.embed_dim} x prompt_length {self.task.prompt_length}), "
                f"got {prompt.size}"
            )
        n, length = self.input_ids.shape
        prompt_block = (
            torch.from_numpy(prompt)
            .to(torch.float32)
            .reshape(self.task.prompt_length, self.embed_dim)
            .unsqueeze(0)
            .expand(n, -1, -1)
        )
        with torch.no_grad():
            word_embeds = self.model.bert.embeddings.word_embeddings(self.input_ids)
            inputs_embeds = torch.cat([prompt_block, word_embeds], dim=1)
            attention = torch.cat(
                [torch.ones((n, self.task.prompt_length), dtype=torch.long),
                 self.text_attention],
                dim=1,
            )
            logits = self.model(inputs_embeds=inputs_embeds, attention_mask=attention).logits
        positions = self.mask_positions + self.task.prompt_length
        selected = logits[torch.arange(n), positions]
        return selected.double().numpy()

    def evaluate(self, prompt: np.ndarray, loss: str = "ce", beta: float = 0.0) -> dict:
        logits = self.mask_logits(prompt)
        verbalizers = self.task.verbalizer_ids
        if loss == "ce":
            values = [
                cross_entropy(row, verbalizers, z) for row, z in zip(logits, self.labels)
            ]
        elif loss == "cr":
            values = [
                confidence_regularized(row, verbalizers, z, beta)
                for row, z in zip(logits, self.labels)
            ]
        else:
            raise ScorerError(f"loss must be 'ce' or 'cr', got {loss!r}")
        return {
            "loss": float(np.mean(values)),
            "n_examples": len(values),
            "logits": logits,
            "labels": list(self.labels),
        }
