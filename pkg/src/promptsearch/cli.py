"""Command-line experiment runner.

Subcommands: optimize (multi-seed search runs with trajectory logging),
estimate-id (intrinsic-dimension sweeps), subspace-study (full-space vs
subspace comparison), align-check (step-size alignment Monte Carlo), and
report (re-aggregate existing run directories).

Exit codes: 0 success, 2 invalid config, 3 remote failure after retries.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from .config import ConfigError, ExperimentConfig, build_objective, load_config
from .intrinsic_dim import id_sweep, report_to_csv_rows
from .objectives import SyntheticObjective, SyntheticObjectiveSpec
from .optimizers import BudgetSpec, InvalidSpecError
from .projection import monte_carlo_alignment
from .analysis import run_subspace_study
from .remote import RemoteObjective, RemoteObjectiveClient, TransportError
from .runner import RunResult, run_optimizer

EXIT_CONFIG = 2
EXIT_REMOTE = 3

STUDY_HEADER = ["task", "f_ps", "f_bbt", "gamma_op", "gamma_pi", "seed"]


def _fail_config(message: str):
    click.echo(f"config error: {message}", err=True)
    sys.exit(EXIT_CONFIG)


def _load(config_path: str) -> ExperimentConfig:
    try:
        return load_config(config_path)
    except (ConfigError, InvalidSpecError, FileNotFoundError, ValueError) as exc:
        _fail_config(str(exc))


def _make_objective(config: ExperimentConfig):
    block = config.objective
    if block["kind"] == "remote":
        client = RemoteObjectiveClient(
            block["endpoint"],
            timeout=float(block.get("timeout", 30.0)),
            retries=int(block.get("retries", 3)),
        )
        return RemoteObjective(
            client, loss=block.get("loss", "ce"), beta=float(block.get("beta", 0.0))
        )
    try:
        return build_objective(block)
    except (ConfigError, KeyError, ValueError) as exc:
        _fail_config(f"[objective] block invalid: {exc}")


def write_trajectory(path: Path, result: RunResult):
    with path.open("w") as fh:
        for rec in result.trajectory:
            fh.write(
                json.dumps(
                    {
                        "eval_index": rec.eval_index,
                        "best_loss": rec.best_loss,
                        "sigma": rec.sigma,
                        "wall_ms": rec.wall_ms,
                    }
                )
                + "\n"
            )


def read_trajectory(path: Path) -> list[dict]:
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


def summarize_trajectories(trajectories: list[list[dict]]) -> list[dict]:
    """Median/IQR of best_loss per shared eval checkpoint across seeds."""
    n = min(len(t) for t in trajectories)
    rows = []
    for i in range(n):
        losses = np.array([t[i]["best_loss"] for t in trajectories])
        rows.append(
            {
                "eval_index": trajectories[0][i]["eval_index"],
                "median_best_loss": float(np.median(losses)),
                "q25_best_loss": float(np.percentile(losses, 25)),
                "q75_best_loss": float(np.percentile(losses, 75)),
            }
        )
    return rows


def _write_csv(path: Path, rows: list[dict], header: list[str]):
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        writer.writerows(rows)


@click.group()
def main():
    """Projection-free black-box optimization experiment runner."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
def optimize(config_path):
    """Run the configured optimizer for every seed; write per-seed trajectory
    JSONL files and an aggregate summary.csv."""
    config = _load(config_path)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    trajectories = []
    for seed in config.seeds:
        objective = _make_objective(config)
        x0 = None
        if config.projection is not None:
            projection = config.projection.build(objective.ambient_dim)
            objective = projection.wrap_objective(objective)
        opt_config = config.optimizer.__class__(
            **{**config.optimizer.__dict__, "seed": seed}
        )
        try:
            result = run_optimizer(opt_config, objective, config.budget, x0=x0)
        except TransportError as exc:
            click.echo(f"remote failure: {exc}", err=True)
            sys.exit(EXIT_REMOTE)
        path = out / f"trajectory_seed{seed}.jsonl"
        write_trajectory(path, result)
        trajectories.append([r.__dict__ for r in result.trajectory])
        click.echo(f"seed {seed}: best loss {result.best_loss:.6g} in {result.evals} evals")
    rows = summarize_trajectories(trajectories)
    _write_csv(out / "summary.csv", rows,
               ["eval_index", "median_best_loss", "q25_best_loss", "q75_best_loss"])
    click.echo(f"wrote {len(config.seeds)} trajectories and summary.csv to {out}")


@main.command("estimate-id")
@click.option("--config", "config_path", required=True, type=click.Path())
def estimate_id(config_path):
    """Sweep intrinsic-dimension estimates over (prompt length, k) and emit
    id_report.csv."""
    config = _load(config_path)
    block = config.objective
    sweep = config.id_sweep or {}
    if block.get("kind") != "synthetic":
        _fail_config("estimate-id needs a synthetic [objective] block")
    for key in ("lengths", "ks", "n"):
        if key not in sweep:
            _fail_config(f"[id_sweep] block missing {key!r}")
    embed_width = int(sweep.get("embed_width", 100))
    true_id = int(block["true_id"])
    seed = int(block.get("seed", 0))

    def factory(length: int):
        spec = SyntheticObjectiveSpec(
            ambient_dim=length * embed_width,
            true_id=true_id,
            inner_function=block.get("inner_function", "sphere"),
            seed=seed,
            shift_scale=float(block.get("shift_scale", 0.0)),
        )
        return SyntheticObjective(spec)

    report = id_sweep(
        factory,
        lengths=[int(v) for v in sweep["lengths"]],
        ks=[int(v) for v in sweep["ks"]],
        n=int(sweep["n"]),
        sampler=sweep.get("sampler", "seeded_normal"),
        mode=sweep.get("mode", "analytic"),
        seed=int(sweep.get("seed", 0)),
    )
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = report_to_csv_rows(report)
    _write_csv(out / "id_report.csv", rows,
               ["l", "k", "n_samples", "d_hat", "dropped_duplicates", "zero_variance_coords"])
    for row in rows:
        click.echo(f"l={row['l']} k={row['k']} d_hat={row['d_hat']:.2f}")
    click.echo(f"wrote {out / 'id_report.csv'}")


@main.command("subspace-study")
@click.option("--config", "config_path", required=True, type=click.Path())
def subspace_study(config_path):
    """Compare full-space vs subspace CMA-ES per seed; emit a study CSV."""
    config = _load(config_path)
    if config.projection is None:
        _fail_config("subspace-study needs a [projection] block")
    study = config.study or {}
    block = config.objective
    if block.get("kind") not in ("quadratic", "weighted_quadratic"):
        _fail_config("subspace-study supports the quadratic objective family")
    d = int(block["d"])
    scale = float(block.get("scale", 1.0))
    x_opt_mode = study.get("x_opt_mode", "random")
    full_budget = BudgetSpec(max_evals=int(study.get("full_max_evals", 10_000)),
                             target_loss=study.get("target_loss"))
    sub_budget = BudgetSpec(max_evals=int(study.get("sub_max_evals", 5_000)),
                            target_loss=study.get("target_loss"))
    rows = []
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for seed in config.seeds:
        projection = config.projection.__class__(
            d_tilde=config.projection.d_tilde,
            seed=config.projection.seed + seed,
            x_init_source=config.projection.x_init_source,
            x_init_scale=config.projection.x_init_scale,
        ).build(d)
        if x_opt_mode == "in_span":
            rng = np.random.default_rng(int(block.get("seed", 0)) + seed)
            x_opt = projection.lift(scale * rng.standard_normal(projection.d_tilde))
            from .objectives import QuadraticObjective

            objective = QuadraticObjective(x_opt)
        elif x_opt_mode == "random":
            objective = build_objective(block, seed_offset=seed)
        else:
            _fail_config(f"unknown x_opt_mode {x_opt_mode!r}")
        result = run_subspace_study(
            objective, projection, full_budget, sub_budget,
            sigma0_full=float(study.get("sigma0_full", 1.0)),
            sigma0_sub=float(study.get("sigma0_sub", 1.0)),
            seed=seed,
        )
        rows.append(
            {
                "task": config.name,
                "f_ps": result.f_ps,
                "f_bbt": result.f_bbt,
                "gamma_op": result.gamma_op,
                "gamma_pi": result.gamma_pi,
                "seed": seed,
            }
        )
        click.echo(
            f"seed {seed}: f_ps={result.f_ps:.4g} f_bbt={result.f_bbt:.4g} "
            f"gamma_op={result.gamma_op:.4f} gamma_pi={result.gamma_pi:.4f}"
        )
    _write_csv(out / "subspace_study.csv", rows, STUDY_HEADER)
    click.echo(f"wrote {out / 'subspace_study.csv'}")


@main.command("align-check")
@click.option("--d", default=1000, show_default=True)
@click.option("--d-tilde", default=100, show_default=True)
@click.option("--samples", default=100_000, show_default=True)
@click.option("--seed", default=0, show_default=True)
def align_check(d, d_tilde, samples, seed):
    """Monte Carlo verification of the sigma/sqrt(3) step-size alignment."""
    stats = monte_carlo_alignment(d, d_tilde, n_samples=samples, seed=seed)
    click.echo(f"E||delta_ES||^2  = {stats['es_energy']:.4f}")
    click.echo(f"E||delta_BBT||^2 = {stats['bbt_energy']:.4f}")
    click.echo(f"relative gap     = {stats['relative_gap']:.4%}")
    click.echo(
        f"E[A_ij^2] = {stats['second_moment']:.6f} "
        f"(target {stats['second_moment_target']:.6f}, "
        f"{stats['second_moment_se_units']:.2f} standard errors)"
    )


@main.command()
@click.argument("run_dirs", nargs=-1, type=click.Path(exists=True))
def report(run_dirs):
    """Re-aggregate existing run directories into summary.csv files."""
    if not run_dirs:
        _fail_config("no run directories given")
    for run_dir in run_dirs:
        run_dir = Path(run_dir)
        files = sorted(run_dir.glob("trajectory_seed*.jsonl"))
        if not files:
            click.echo(f"{run_dir}: no trajectory files, skipping", err=True)
            continue
        trajectories = [read_trajectory(f) for f in files]
        rows = summarize_trajectories(trajectories)
        _write_csv(run_dir / "summary.csv", rows,
                   ["eval_index", "median_best_loss", "q25_best_loss", "q75_best_loss"])
        click.echo(f"{run_dir}: aggregated {len(files)} trajectories")


if __name__ == "__main__":
    main()
