"""HTTP objective server.

GET /info advertises the evaluation contract; POST /evaluate scores a
continuous prompt against the task's frozen example set.  422 signals a
request-shape problem (dimension mismatch, bad loss name); 500 signals a
model failure.  Requests are serialized through one model lock, so
concurrent clients are safe but evaluation order is unspecified.
"""

from __future__ import annotations

import os
import threading

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .scorer import MaskedLMScorer, ScorerError
from .task import TaskError, default_task_path, load_task

ENV_MODEL_ID = "LMSERVER_MODEL_ID"
ENV_TASK_PATH = "LMSERVER_TASK_PATH"
ENV_PORT = "LMSERVER_PORT"
ENV_SEED = "LMSERVER_SEED"


class EvaluateRequest(BaseModel):
    prompt: list[float]
    beta: float = 0.0
    loss: str = Field(default="ce", pattern="^(ce|cr)$")
    return_logits: bool = False


class EvaluateResponse(BaseModel):
    loss: float
    n_examples: int
    logits: list[list[float]] | None = None
    labels: list[int] | None = None


class InfoResponse(BaseModel):
    embed_dim: int
    prompt_length: int
    vocab_size: int
    verbalizer_ids: list[int]
    task: str


def create_app(scorer: MaskedLMScorer) -> FastAPI:
    app = FastAPI(title="lm-objective-server")
    lock = threading.Lock()

    @app.get("/info", response_model=InfoResponse)
    def info() -> InfoResponse:
        return InfoResponse(
            embed_dim=scorer.embed_dim,
            prompt_length=scorer.task.prompt_length,
            vocab_size=scorer.task.vocab_size,
            verbalizer_ids=list(scorer.task.verbalizer_ids),
            task=scorer.task.name,
        )

    @app.post("/evaluate", response_model=EvaluateResponse, response_model_exclude_none=True)
    def evaluate(request: EvaluateRequest) -> EvaluateResponse:
        prompt = np.asarray(request.prompt, dtype=np.float64)
        if prompt.shape != (scorer.prompt_dim,):
            raise HTTPException(
                status_code=422,
                detail=f"prompt must have {scorer.prompt_dim} entries, got {prompt.size}",
            )
        try:
            with lock:
                result = scorer.evaluate(prompt, loss=request.loss, beta=request.beta)
        except ScorerError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except Exception as exc:  # model failure
            raise HTTPException(status_code=500, detail=f"model failure: {exc}") from exc
        return EvaluateResponse(
            loss=result["loss"],
            n_examples=result["n_examples"],
            logits=result["logits"].tolist() if request.return_logits else None,
            labels=result["labels"] if request.return_logits else None,
        )

    return app


def app_from_env() -> FastAPI:
    task_path = os.environ.get(ENV_TASK_PATH) or default_task_path()
    task = load_task(task_path)
    scorer = MaskedLMScorer(
        task,
        model_id=os.environ.get(ENV_MODEL_ID, "tiny-64"),
        seed=int(os.environ.get(ENV_SEED, "0")),
    )
    return create_app(scorer)


def main():
    import uvicorn

    try:
        app = app_from_env()
    except (TaskError, ScorerError, FileNotFoundError) as exc:
        raise SystemExit(f"config error: {exc}")
    uvicorn.run(app, host="127.0.0.1", port=int(os.environ.get(ENV_PORT, "8000")))


if __name__ == "__main__":
    main()
