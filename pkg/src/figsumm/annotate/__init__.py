"""Human annotation: durable blinded task serving and export."""

from .store import (
    ASPECTS,
    AnnotationStore,
    Candidate,
    StoreError,
    Task,
    build_tasks,
    load_tasks,
    write_tasks,
)
from .service import create_app

__all__ = [
    "ASPECTS",
    "AnnotationStore",
    "Candidate",
    "StoreError",
    "Task",
    "build_tasks",
    "load_tasks",
    "write_tasks",
    "create_app",
]
