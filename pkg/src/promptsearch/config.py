"""Experiment configuration: TOML (primary) or JSON files.

A config names exactly one objective block, an optimizer block, an optional
projection block (search then happens in the projected subspace), a budget
block, a seed list, and an output directory.  Configs are never mutated;
matrices are regenerated from seeds, never stored.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .objectives import (
    BlackBoxObjective,
    LogitLandscapeObjective,
    LogitLandscapeSpec,
    QuadraticObjective,
    SyntheticObjective,
    SyntheticObjectiveSpec,
    WeightedQuadraticObjective,
)
from .optimizers import BudgetSpec
from .projection import SubspaceProjection
from .runner import OptimizerConfig

DEFAULT_SEEDS = (0, 1, 42, 43, 100)


class ConfigError(ValueError):
    """Invalid or malformed experiment config."""


@dataclass(frozen=True)
class ProjectionBlock:
    d_tilde: int
    seed: int = 0
    x_init_source: str = "zero"  # zero | seeded_normal
    x_init_scale: float = 1.0

    def build(self, d: int) -> SubspaceProjection:
        if self.x_init_source == "zero":
            x_init = None
        elif self.x_init_source == "seeded_normal":
            rng = np.random.default_rng(self.seed + 1)
            x_init = self.x_init_scale * rng.standard_normal(d)
        else:
            raise ConfigError(f"unknown x_init_source {self.x_init_source!r}")
        return SubspaceProjection(d, self.d_tilde, seed=self.seed, x_init=x_init)


@dataclass(frozen=True)
class ExperimentConfig:
    objective: dict
    optimizer: OptimizerConfig
    budget: BudgetSpec
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    projection: ProjectionBlock | None = None
    output_dir: str = "runs"
    name: str = "experiment"
    id_sweep: dict | None = None
    study: dict | None = None


def _load_raw(path: str | Path) -> dict:
    path = Path(path)
    text = path.read_bytes()
    if path.suffix == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    try:
        return tomllib.loads(text.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc


def load_config(path: str | Path) -> ExperimentConfig:
    raw = _load_raw(path)
    if "objective" not in raw:
        raise ConfigError("missing [objective] block")
    objective = raw["objective"]
    if "kind" not in objective:
        raise ConfigError("[objective] block must name a kind")

    opt_raw = dict(raw.get("optimizer", {}))
    if "lambda" in opt_raw:  # TOML-friendly alias for the keyword
        opt_raw["lam"] = opt_raw.pop("lambda")
    algorithm = opt_raw.pop("algorithm", "saes")
    try:
        optimizer = OptimizerConfig(algorithm=algorithm, **opt_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[optimizer] block invalid: {exc}") from exc

    budget_raw = raw.get("budget", {})
    try:
        budget = BudgetSpec(
            max_evals=int(budget_raw.get("max_evals", 5000)),
            target_loss=budget_raw.get("target_loss"),
        )
    except ValueError as exc:
        raise ConfigError(f"[budget] block invalid: {exc}") from exc

    seeds = tuple(int(s) for s in raw.get("seeds", DEFAULT_SEEDS))
    if not seeds or len(set(seeds)) != len(seeds):
        raise ConfigError("seeds must be nonempty and distinct")

    projection = None
    if "projection" in raw:
        proj_raw = raw["projection"]
        try:
            projection = ProjectionBlock(
                d_tilde=int(proj_raw["d_tilde"]),
                seed=int(proj_raw.get("seed", 0)),
                x_init_source=proj_raw.get("x_init_source", "zero"),
                x_init_scale=float(proj_raw.get("x_init_scale", 1.0)),
            )
        except KeyError as exc:
            raise ConfigError(f"[projection] block missing {exc}") from exc

    return ExperimentConfig(
        objective=objective,
        optimizer=optimizer,
        budget=budget,
        seeds=seeds,
        projection=projection,
        output_dir=raw.get("output_dir", "runs"),
        name=raw.get("name", Path(path).stem),
        id_sweep=raw.get("id_sweep"),
        study=raw.get("study"),
    )


def build_objective(block: dict, seed_offset: int = 0) -> BlackBoxObjective:
    """Construct the objective named by a config block.

    Remote objectives are constructed lazily by the CLI (they need a live
    endpoint); this covers the local kinds.
    """
    kind = block["kind"]
    if kind == "synthetic":
        spec = SyntheticObjectiveSpec(
            ambient_dim=int(block["ambient_dim"]),
            true_id=int(block["true_id"]),
            inner_function=block.get("inner_function", "sphere"),
            seed=int(block.get("seed", 0)) + seed_offset,
            shift_scale=float(block.get("shift_scale", 0.0)),
        )
        return SyntheticObjective(spec)
    if kind == "logit_landscape":
        spec = LogitLandscapeSpec(
            ambient_dim=int(block["ambient_dim"]),
            vocab_size=int(block["vocab_size"]),
            verbalizer_ids=tuple(int(v) for v in block["verbalizer_ids"]),
            hidden_rank=int(block["hidden_rank"]),
            n_examples=int(block.get("n_examples", 16)),
            hidden_dim=int(block.get("hidden_dim", 32)),
            distractor_bias=float(block.get("distractor_bias", 3.0)),
            seed=int(block.get("seed", 0)) + seed_offset,
        )
        return LogitLandscapeObjective(
            spec, loss=block.get("loss", "ce"), beta=float(block.get("beta", 0.0))
        )
    if kind in ("quadratic", "weighted_quadratic"):
        d = int(block["d"])
        rng = np.random.default_rng(int(block.get("seed", 0)) + seed_offset)
        scale = float(block.get("scale", 1.0))
        x_opt = scale * rng.standard_normal(d)
        if kind == "quadratic":
            return QuadraticObjective(x_opt)
        weights = np.ones(d)
        heavy = int(block.get("heavy_count", 30))
        weights[:heavy] = float(block.get("heavy_weight", 100.0))
        return WeightedQuadraticObjective(x_opt, weights)
    if kind == "remote":
        raise ConfigError("remote objectives are built by the CLI, not here")
    raise ConfigError(f"unknown objective kind {kind!r}")
