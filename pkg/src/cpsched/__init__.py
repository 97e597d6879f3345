"""
Constraint-programming solver for machine and project scheduling.

Build an instance with :class:`Model`, then call :func:`solve`:

>>> from cpsched import Model
>>> model = Model()
>>> machine = model.add_machine()
>>> job = model.add_job()
>>> for duration in (3, 4):
...     _ = model.add_mode(model.add_task(job=job), machine, duration)
>>> result = model.solve(time_limit=5)
>>> result.status.value, result.objective
('Optimal', 7)
"""

from .engine import SearchParams, Status
from .formulation import EngineModel, UnsupportedModel, build_model, build_naive_fjsp_model
from .model import (
    ConstraintKind,
    ConstraintSet,
    Job,
    Mode,
    Model,
    Objective,
    ObjectiveSpec,
    ProblemData,
    Resource,
    ResourceKind,
    Task,
    default_horizon,
    validate,
)
from .solution import Result, Solution, Violation, check, evaluate, evaluate_flagged
from .solve import solve

__version__ = "0.1.0"

__all__ = [
    "ConstraintKind",
    "ConstraintSet",
    "EngineModel",
    "Job",
    "Mode",
    "Model",
    "Objective",
    "ObjectiveSpec",
    "ProblemData",
    "Resource",
    "ResourceKind",
    "Result",
    "SearchParams",
    "Solution",
    "Status",
    "Task",
    "UnsupportedModel",
    "Violation",
    "build_model",
    "build_naive_fjsp_model",
    "check",
    "default_horizon",
    "evaluate",
    "evaluate_flagged",
    "solve",
    "validate",
]
