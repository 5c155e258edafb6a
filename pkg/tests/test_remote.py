import json

import httpx
import numpy as np
import pytest

from promptsearch.remote import (
    RemoteConfigError,
    RemoteObjective,
    RemoteObjectiveClient,
    TransportError,
)

INFO = {
    "embed_dim": 4,
    "prompt_length": 2,
    "vocab_size": 10,
    "verbalizer_ids": [0, 1],
    "task": "toy",
}


def make_stub(fail_first=0, losses=None):
    """Deterministic in-process server: loss = sum(prompt^2)."""
    state = {"calls": 0, "failures_left": fail_first}

    def handler(request: httpx.Request) -> httpx.Response:
        state["calls"] += 1
        if request.url.path == "/info":
            return httpx.Response(200, json=INFO)
        assert request.url.path == "/evaluate"
        if state["failures_left"] > 0:
            state["failures_left"] -= 1
            return httpx.Response(500, text="model failure")
        body = json.loads(request.content)
        prompt = body["prompt"]
        if len(prompt) != INFO["embed_dim"] * INFO["prompt_length"]:
            return httpx.Response(422, text="dimension mismatch")
        loss = float(sum(v * v for v in prompt))
        payload = {"loss": loss, "n_examples": 3}
        if body.get("return_logits"):
            payload["logits"] = [[float(i) for i in range(INFO["vocab_size"])]] * 3
            payload["labels"] = [0, 1, 0]
        return httpx.Response(200, json=payload)

    return httpx.MockTransport(handler), state


def make_client(transport, retries=3):
    client = RemoteObjectiveClient(
        "http://server", retries=retries, backoff_base=0.001, transport=transport
    )
    return client


def test_happy_path():
    transport, _ = make_stub()
    objective = RemoteObjective(make_client(transport))
    assert objective.ambient_dim == 8
    x = np.arange(8.0)
    assert objective.evaluate(x) == float(np.sum(x**2))
    assert objective.n_evals == 1


def test_dimension_mismatch_is_config_error_no_retry():
    transport, state = make_stub()
    client = make_client(transport)
    client.info()
    calls_before = state["calls"]
    with pytest.raises(RemoteConfigError):
        client.evaluate(np.zeros(5))
    assert state["calls"] == calls_before + 1  # zero retries


def test_retries_then_success():
    transport, state = make_stub(fail_first=2)
    objective = RemoteObjective(make_client(transport), info=None)
    assert objective.evaluate(np.zeros(8)) == 0.0


def test_transport_error_after_retries():
    transport, _ = make_stub(fail_first=100)
    client = make_client(transport, retries=2)
    with pytest.raises(TransportError) as err:
        client.evaluate(np.zeros(8))
    assert err.value.attempts == 3


def test_replay_determinism():
    transport, _ = make_stub()
    objective = RemoteObjective(make_client(transport))
    x = np.random.default_rng(0).standard_normal(8)
    assert objective.evaluate(x) == objective.evaluate(x)


def test_logits_roundtrip():
    transport, _ = make_stub()
    objective = RemoteObjective(make_client(transport))
    loss, bundles = objective.evaluate_with_logits(np.zeros(8))
    assert loss == 0.0
    assert len(bundles) == 3
    assert bundles[1].label_id == 1
    np.testing.assert_array_equal(bundles[0].logits, np.arange(10.0))
