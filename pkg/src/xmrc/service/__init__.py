"""Job-submission HTTP service: storage, workers, and the FastAPI app."""

from .app import create_app
from .config import ServiceConfig
from .store import Store
from .workers import WorkerPool, execute_job

__all__ = ["ServiceConfig", "Store", "WorkerPool", "create_app", "execute_job"]
