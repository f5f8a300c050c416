"""In-process reconstruction workers.

Each worker thread loops: claim the oldest runnable job, execute the
solver with a progress callback that doubles as a lease heartbeat, persist
the result, move on. Any exception inside a job lands on that JobRecord as
`failed` with the typed error name; the worker itself never dies with it.
"""

import logging
import threading

from ..container import read_container, write_container
from ..demo import acs_rows_of
from ..errors import KindMismatch, MissingACS
from ..metrics import error_map, error_map_to_pgm, rlne
from ..phantoms import estimate_coil_maps
from ..solver import SolverParams, pfista_parallel, pfista_single
from .store import Store

log = logging.getLogger("xmrc.service")

IDLE_POLL_SECONDS = 0.05


def execute_job(store: Store, job, heartbeat=None) -> None:
    """Run one job to completion; all persistence goes through the store."""
    try:
        params = SolverParams.from_dict(job.params)
        y = read_container(store.read_blob(job.data_id))
        mask = read_container(store.read_blob(job.mask_id))
        if not hasattr(mask, "cells"):
            raise KindMismatch("mask_id does not reference a MASK container")
        truth = None
        if job.truth_id:
            truth = read_container(store.read_blob(job.truth_id))

        def progress(k, change):
            if heartbeat is not None:
                heartbeat(k, change)

        if job.method == "pfista":
            result = pfista_single(y, mask, params, progress=progress)
        else:
            if job.maps_id:
                maps = read_container(store.read_blob(job.maps_id))
            else:
                acs = acs_rows_of(mask)
                if acs == 0:
                    raise MissingACS("no fully sampled center rows to calibrate from")
                maps = estimate_coil_maps(y, acs)
            result = pfista_parallel(y, mask, maps, params, progress=progress)

        errmap_payload = None
        quality = None
        if truth is not None:
            quality = rlne(truth, result.image)
            errmap_payload = error_map_to_pgm(error_map(truth, result.image))
        payload = write_container(result.image)
        dims = (1, result.image.ny, result.image.nx)
        store.finalize_done(job.job_id, payload, dims, errmap_payload, quality)
    except Exception as exc:  # noqa: BLE001 - a job failure must not kill the worker
        log.warning("job %s failed: %s", job.job_id, exc)
        store.finalize_failed(job.job_id, f"{type(exc).__name__}: {exc}")


class WorkerPool:
    def __init__(self, store: Store, worker_count: int, lease_seconds: float):
        self.store = store
        self.worker_count = worker_count
        self.lease_seconds = lease_seconds
        self._stop = threading.Event()
        self._threads = []

    def start(self):
        for i in range(self.worker_count):
            t = threading.Thread(target=self._loop, args=(f"worker-{i}",), daemon=True)
            t.start()
            self._threads.append(t)

    def stop(self, timeout=5.0):
        self._stop.set()
        for t in self._threads:
            t.join(timeout=timeout)
        self._threads.clear()

    def _loop(self, worker_id):
        while not self._stop.is_set():
            job = self.store.claim_next(worker_id, self.lease_seconds)
            if job is None:
                self._stop.wait(IDLE_POLL_SECONDS)
                continue

            def heartbeat(k, change, _job_id=job.job_id):
                self.store.renew_progress(
                    _job_id, worker_id, self.lease_seconds, k, change
                )

            execute_job(self.store, job, heartbeat)
