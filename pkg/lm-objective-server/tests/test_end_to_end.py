"""End-to-end: the optimization client talking to a live served model."""

import socket
import threading
import time

import numpy as np
import pytest
import uvicorn

from lmserver import MaskedLMScorer, create_app, default_task_path, load_task
from promptsearch.optimizers import BudgetSpec
from promptsearch.remote import RemoteObjective, RemoteObjectiveClient
from promptsearch.runner import OptimizerConfig, run_optimizer


@pytest.fixture(scope="module")
def endpoint():
    scorer = MaskedLMScorer(load_task(default_task_path()), seed=0)
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
    server = uvicorn.Server(
        uvicorn.Config(create_app(scorer), host="127.0.0.1", port=port, log_level="error")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_remote_objective_over_live_server(endpoint):
    objective = RemoteObjective(RemoteObjectiveClient(endpoint), loss="cr", beta=0.5)
    assert objective.ambient_dim == 64 * 8
    x = np.random.default_rng(0).standard_normal(objective.ambient_dim)
    assert objective.evaluate(x) == objective.evaluate(x)
    assert objective.n_evals == 2


def test_short_optimization_run_improves_loss(endpoint):
    objective = RemoteObjective(RemoteObjectiveClient(endpoint))
    baseline = objective.evaluate(np.zeros(objective.ambient_dim))
    config = OptimizerConfig(
        "saes", damping="id_aware", d_tilde=20, sigma0=1.0, lam=10, mu=3, seed=0
    )
    result = run_optimizer(config, objective, BudgetSpec(120))
    assert result.best_loss <= baseline
