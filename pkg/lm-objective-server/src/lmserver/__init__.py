from .app import app_from_env, create_app
from .scorer import MaskedLMScorer, ScorerError
from .task import TaskError, TaskTemplate, default_task_path, load_task

__all__ = [
    "MaskedLMScorer",
    "ScorerError",
    "TaskError",
    "TaskTemplate",
    "app_from_env",
    "create_app",
    "default_task_path",
    "load_task",
]
