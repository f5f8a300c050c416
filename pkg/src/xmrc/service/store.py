"""Durable metadata + blob storage and the job state machine.

Blobs are plain files under ``<data_dir>/blobs``; metadata is an
append-only JSONL journal replayed at startup. Writes are two-phase
(blob file first, then the journal record) so a record never points at a
missing blob; deletes journal first, then unlink, and replay re-attempts
any unlink that a crash interrupted.

All mutation goes through one lock: a single writer for the journal, and
job claims are an atomic check-and-set on status under the same lock.
Job status may only move queued->running, queued->failed (cancellation),
running->done, running->failed; anything else raises IllegalTransition
and every transition is recorded for auditing.
"""

import json
import os
import time
import uuid
from dataclasses import asdict, dataclass
from pathlib import Path
from threading import RLock

from ..errors import IllegalTransition, Unauthorized, UnknownDataId, UnknownJob

JOB_STATUSES = ("queued", "running", "done", "failed")

_ALLOWED_TRANSITIONS = {
    ("queued", "running"),
    ("queued", "failed"),
    ("running", "done"),
    ("running", "failed"),
}

# blob meta kind for error-map images (not a container kind; internal only)
KIND_ERRMAP = 0


@dataclass
class DataBlobMeta:
    data_id: str
    owner: str
    kind: int
    nc: int
    ny: int
    nx: int
    size_bytes: int
    created: float


@dataclass
class JobRecord:
    job_id: str
    owner: str
    method: str
    status: str
    params: dict
    data_id: str
    mask_id: str
    maps_id: str = None
    truth_id: str = None
    progress_iteration: int = 0
    progress_change: float = None
    recon_id: str = None
    errmap_id: str = None
    rlne: float = None
    failure_reason: str = None
    created: float = 0.0
    updated: float = 0.0
    seq: int = 0

    def input_ids(self):
        return [i for i in (self.data_id, self.mask_id, self.maps_id, self.truth_id) if i]


class Store:
    def __init__(self, data_dir):
        self.root = Path(data_dir)
        self.blob_dir = self.root / "blobs"
        self.blob_dir.mkdir(parents=True, exist_ok=True)
        self.journal_path = self.root / "journal.jsonl"
        self._lock = RLock()
        self._data: dict[str, DataBlobMeta] = {}
        self._jobs: dict[str, JobRecord] = {}
        self._seq = 0
        self._leases: dict[str, tuple[str, float]] = {}  # job_id -> (worker, expiry)
        self._purge_on_complete: set[str] = set()
        self.transition_log: list[tuple[str, str, str]] = []  # (job_id, from, to)
        self._replay()
        self._journal_fh = open(self.journal_path, "a", encoding="utf-8")

    # ------------------------------------------------------------------ journal

    def _replay(self):
        if not self.journal_path.exists():
            return
        with open(self.journal_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                op = rec.pop("op")
                if op == "data":
                    meta = DataBlobMeta(**rec)
                    self._data[meta.data_id] = meta
                elif op == "del_data":
                    self._data.pop(rec["data_id"], None)
                    self._unlink_blob(rec["data_id"])
                elif op == "job":
                    job = JobRecord(**rec)
                    self._jobs[job.job_id] = job
                    self._seq = max(self._seq, job.seq)
                elif op == "job_status":
                    job = self._jobs.get(rec["job_id"])
                    if job is not None:
                        job.status = rec["status"]
                        job.updated = rec["updated"]
                        job.failure_reason = rec.get("failure_reason")
                        job.recon_id = rec.get("recon_id")
                        job.errmap_id = rec.get("errmap_id")
                        job.rlne = rec.get("rlne")
                elif op == "del_job":
                    self._jobs.pop(rec["job_id"], None)

    def _append(self, op, **fields):
        line = json.dumps({"op": op, **fields}, separators=(",", ":"))
        self._journal_fh.write(line + "\n")
        self._journal_fh.flush()
        os.fsync(self._journal_fh.fileno())

    def close(self):
        with self._lock:
            self._journal_fh.close()

    # ------------------------------------------------------------------ blobs

    def _blob_path(self, data_id) -> Path:
        return self.blob_dir / data_id

    def _unlink_blob(self, data_id):
        try:
            os.unlink(self._blob_path(data_id))
        except FileNotFoundError:
            pass

    def put_blob(self, owner, kind, dims, payload: bytes) -> DataBlobMeta:
        """Persist bytes + metadata; blob hits disk before the journal record."""
        nc, ny, nx = dims
        data_id = uuid.uuid4().hex
        with self._lock:
            tmp = self._blob_path(data_id + ".tmp")
            with open(tmp, "wb") as fh:
                fh.write(payload)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self._blob_path(data_id))
            meta = DataBlobMeta(
                data_id=data_id,
                owner=owner,
                kind=kind,
                nc=nc,
                ny=ny,
                nx=nx,
                size_bytes=len(payload),
                created=time.time(),
            )
            self._data[data_id] = meta
            self._append("data", **asdict(meta))
            return meta

    def get_meta(self, data_id, owner) -> DataBlobMeta:
        with self._lock:
            meta = self._data.get(data_id)
            if meta is None:
                raise UnknownDataId(f"no data {data_id}")
            if meta.owner != owner:
                raise Unauthorized("not the owner of this data")
            return meta

    def read_blob(self, data_id) -> bytes:
        with self._lock:
            if data_id not in self._data:
                raise UnknownDataId(f"no data {data_id}")
            path = self._blob_path(data_id)
        try:
            with open(path, "rb") as fh:
                return fh.read()
        except FileNotFoundError:
            # deleted between the meta check and the read
            raise UnknownDataId(f"no data {data_id}") from None

    def delete_data(self, data_id, owner):
        """Remove meta + bytes; cancel queued jobs and doom running ones."""
        with self._lock:
            self.get_meta(data_id, owner)
            self._append("del_data", data_id=data_id)
            del self._data[data_id]
            self._unlink_blob(data_id)
            for job in list(self._jobs.values()):
                if data_id in job.input_ids():
                    if job.status == "queued":
                        self._transition(job, "failed", failure_reason="cancelled: input data deleted")
                    elif job.status == "running":
                        self._purge_on_complete.add(job.job_id)

    def list_data(self, owner):
        with self._lock:
            return [m for m in self._data.values() if m.owner == owner]

    # ------------------------------------------------------------------ jobs

    def create_job(self, owner, method, params: dict, data_id, mask_id, maps_id=None, truth_id=None) -> JobRecord:
        with self._lock:
            self._seq += 1
            now = time.time()
            job = JobRecord(
                job_id=uuid.uuid4().hex,
                owner=owner,
                method=method,
                status="queued",
                params=params,
                data_id=data_id,
                mask_id=mask_id,
                maps_id=maps_id,
                truth_id=truth_id,
                created=now,
                updated=now,
                seq=self._seq,
            )
            self._jobs[job.job_id] = job
            self._append("job", **asdict(job))
            return job

    def get_job(self, job_id, owner) -> JobRecord:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                raise UnknownJob(f"no job {job_id}")
            if job.owner != owner:
                raise Unauthorized("not the owner of this job")
            return job

    def _transition(self, job: JobRecord, new_status, failure_reason=None,
                    recon_id=None, errmap_id=None, rlne=None):
        if (job.status, new_status) not in _ALLOWED_TRANSITIONS:
            raise IllegalTransition(f"{job.status} -> {new_status} on job {job.job_id}")
        self.transition_log.append((job.job_id, job.status, new_status))
        job.status = new_status
        job.updated = time.time()
        job.failure_reason = failure_reason
        job.recon_id = recon_id
        job.errmap_id = errmap_id
        job.rlne = rlne
        self._append(
            "job_status",
            job_id=job.job_id,
            status=new_status,
            updated=job.updated,
            failure_reason=failure_reason,
            recon_id=recon_id,
            errmap_id=errmap_id,
            rlne=rlne,
        )

    def claim_next(self, worker_id, lease_seconds) -> JobRecord:
        """Atomically claim the oldest queued job, or re-claim a running job
        whose lease expired (its worker died); None when nothing is claimable."""
        now = time.monotonic()
        with self._lock:
            queued = [j for j in self._jobs.values() if j.status == "queued"]
            if queued:
                job = min(queued, key=lambda j: j.seq)
                self._transition(job, "running")
                self._leases[job.job_id] = (worker_id, now + lease_seconds)
                return job
            stale = [
                j
                for j in self._jobs.values()
                if j.status == "running"
                and (j.job_id not in self._leases or self._leases[j.job_id][1] < now)
            ]
            if stale:
                job = min(stale, key=lambda j: j.seq)
                self._leases[job.job_id] = (worker_id, now + lease_seconds)
                return job
            return None

    def renew_progress(self, job_id, worker_id, lease_seconds, iteration, change):
        """Progress update from a worker; also renews its lease. In-memory only."""
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None or job.status != "running":
                return False
            job.progress_iteration = iteration
            job.progress_change = change
            job.updated = time.time()
            self._leases[job_id] = (worker_id, time.monotonic() + lease_seconds)
            return True

    def finalize_done(self, job_id, recon_payload: bytes, recon_dims,
                      errmap_payload: bytes = None, rlne: float = None):
        """Persist results and mark done; discards everything if the job was
        deleted mid-run or its inputs were deleted (privacy: results of doomed
        jobs never reach disk)."""
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None or job.status != "running":
                # deleted, or finished by another worker after a lease takeover
                return None
            if job_id in self._purge_on_complete:
                self._purge_on_complete.discard(job_id)
                self._leases.pop(job_id, None)
                self._transition(job, "failed", failure_reason="cancelled: input data deleted during run")
                return job
            from ..container import KIND_IMAGE

            recon_meta = self.put_blob(job.owner, KIND_IMAGE, recon_dims, recon_payload)
            errmap_id = None
            if errmap_payload is not None:
                em = self.put_blob(job.owner, KIND_ERRMAP, (1, recon_dims[1], recon_dims[2]), errmap_payload)
                errmap_id = em.data_id
            self._leases.pop(job_id, None)
            self._transition(job, "done", recon_id=recon_meta.data_id, errmap_id=errmap_id, rlne=rlne)
            return job

    def finalize_failed(self, job_id, reason: str):
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                return None
            self._purge_on_complete.discard(job_id)
            self._leases.pop(job_id, None)
            if job.status == "running":
                self._transition(job, "failed", failure_reason=reason)
            return job

    def delete_job(self, job_id, owner):
        """Remove the record and any result blobs. A running job keeps
        computing but its results are discarded at finalize time."""
        with self._lock:
            job = self.get_job(job_id, owner)
            for rid in (job.recon_id, job.errmap_id):
                if rid and rid in self._data:
                    self._append("del_data", data_id=rid)
                    del self._data[rid]
                    self._unlink_blob(rid)
            self._append("del_job", job_id=job_id)
            del self._jobs[job_id]
            self._leases.pop(job_id, None)
            self._purge_on_complete.discard(job_id)

    def list_jobs(self, owner):
        with self._lock:
            return sorted(
                (j for j in self._jobs.values() if j.owner == owner),
                key=lambda j: j.seq,
            )
