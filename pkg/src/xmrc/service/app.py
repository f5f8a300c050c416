"""HTTP surface of the reconstruction service.

Routes (all JSON unless noted; auth is "Authorization: Bearer <token>"):

    POST   /api/login                  -> {token, expires_in}
    POST   /api/data                   octet-stream container -> {data_id, ...}
    GET    /api/data/{id}              -> container bytes
    DELETE /api/data/{id}
    POST   /api/jobs                   -> {job_id}
    GET    /api/jobs/{id}              -> job view (status, progress, rlne, ...)
    GET    /api/jobs/{id}/result       -> kind-1 container bytes
    GET    /api/jobs/{id}/errormap     -> P5 image bytes
    DELETE /api/jobs/{id}
    GET    /api/demo                   -> fixture manifest
    GET    /api/demo/{name}            -> fixture container bytes

Every route except /api/login requires a valid, unexpired token. Errors
are JSON {code, message}; the code is the typed error name. The optional
browser client is mounted read-only under /ui.
"""

import hashlib
import os
import secrets
import time
from contextlib import asynccontextmanager
from pathlib import Path
from threading import Lock

from fastapi import Depends, FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, RedirectResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict

from .. import __version__
from ..container import (
    HEADER,
    HEADER_SIZE,
    KIND_IMAGE,
    KIND_KSPACE,
    KIND_MASK,
    KIND_MULTICOIL_KSPACE,
    KIND_COILMAPS,
    read_container,
)
from ..demo import acs_rows_of, build_demo_containers
from ..errors import (
    JobFailed,
    KindMismatch,
    MalformedContainer,
    MissingACS,
    NoErrorMap,
    NotReady,
    ServiceError,
    TooLarge,
    Unauthorized,
    UnknownDataId,
    XmrcError,
)
from ..solver import SolverParams
from .config import ServiceConfig
from .store import Store
from .workers import WorkerPool

_METHOD_DATA_KIND = {"pfista": KIND_KSPACE, "pfista_parallel": KIND_MULTICOIL_KSPACE}


class Accounts:
    """Closed account list; passwords held only as salted scrypt hashes."""

    def __init__(self, pairs):
        self._entries = {}
        for username, password in pairs:
            salt = os.urandom(16)
            self._entries[username] = (salt, self._hash(password, salt))

    @staticmethod
    def _hash(password, salt):
        return hashlib.scrypt(password.encode(), salt=salt, n=2**14, r=8, p=1)

    def check(self, username, password) -> bool:
        entry = self._entries.get(username)
        if entry is None:
            # hash anyway so failures cost the same with or without an account
            self._hash(password, b"\x00" * 16)
            return False
        salt, expected = entry
        return secrets.compare_digest(self._hash(password, salt), expected)


class TokenTable:
    def __init__(self, ttl_seconds):
        self._ttl = ttl_seconds
        self._tokens = {}
        self._lock = Lock()

    def issue(self, username) -> str:
        token = secrets.token_hex(16)  # 128-bit bearer value
        with self._lock:
            self._tokens[token] = (username, time.monotonic() + self._ttl)
        return token

    def resolve(self, token) -> str:
        with self._lock:
            entry = self._tokens.get(token)
            if entry is None:
                raise Unauthorized("invalid or expired token")
            username, expiry = entry
            if time.monotonic() >= expiry:
                del self._tokens[token]
                raise Unauthorized("invalid or expired token")
            return username

    def expire_now(self, token):
        """Test hook: force a token to its expiry."""
        with self._lock:
            if token in self._tokens:
                username, _ = self._tokens[token]
                self._tokens[token] = (username, time.monotonic() - 1.0)


class LoginBody(BaseModel):
    username: str
    password: str


class JobBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method: str
    data_id: str
    mask_id: str
    maps_id: str = None
    truth_id: str = None
    params: dict = {}


def _job_view(job) -> dict:
    view = {
        "job_id": job.job_id,
        "method": job.method,
        "status": job.status,
        "params": job.params,
        "refs": {
            "data_id": job.data_id,
            "mask_id": job.mask_id,
            "maps_id": job.maps_id,
            "truth_id": job.truth_id,
        },
        "progress": {
            "iteration": job.progress_iteration,
            "iterate_change": job.progress_change,
        },
        "created": job.created,
        "updated": job.updated,
    }
    if job.status == "done":
        view["result"] = {
            "recon_id": job.recon_id,
            "errmap_id": job.errmap_id,
            "rlne": job.rlne,
        }
    if job.status == "failed":
        view["failure_reason"] = job.failure_reason
    return view


def create_app(config: ServiceConfig) -> FastAPI:
    store = Store(config.data_dir)
    accounts = Accounts(config.accounts)
    tokens = TokenTable(config.token_ttl_seconds)
    pool = WorkerPool(store, config.workers, config.lease_seconds)
    demo = build_demo_containers(config.demo_size, config.demo_seed)

    @asynccontextmanager
    async def lifespan(app):
        pool.start()
        try:
            yield
        finally:
            pool.stop()
            store.close()

    app = FastAPI(title="xmrc reconstruction service", version=__version__, lifespan=lifespan)
    app.state.store = store
    app.state.tokens = tokens
    app.state.pool = pool
    app.state.config = config

    @app.exception_handler(XmrcError)
    async def _xmrc_error(_req, exc: XmrcError):
        status = exc.http_status if isinstance(exc, ServiceError) else 400
        return JSONResponse(
            status_code=status,
            content={"code": type(exc).__name__, "message": str(exc)},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"code": "InvalidParams", "message": str(exc.errors())})

    def require_user(authorization: str = Header(default=None)) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise Unauthorized("missing bearer token")
        return tokens.resolve(authorization[len("Bearer "):])

    # ------------------------------------------------------------------ auth

    @app.post("/api/login")
    def login(body: LoginBody):
        if not accounts.check(body.username, body.password):
            raise Unauthorized("invalid credentials")
        token = tokens.issue(body.username)
        return {"token": token, "expires_in": config.token_ttl_seconds}

    # ------------------------------------------------------------------ data

    @app.post("/api/data")
    async def upload_data(request: Request, user: str = Depends(require_user)):
        declared = request.headers.get("content-length")
        if declared is not None and declared.isdigit() and int(declared) > config.max_upload_bytes:
            raise TooLarge(f"upload exceeds {config.max_upload_bytes} bytes")
        body = await request.body()
        if len(body) > config.max_upload_bytes:
            raise TooLarge(f"upload exceeds {config.max_upload_bytes} bytes")
        try:
            obj = read_container(body)
        except XmrcError as exc:
            raise MalformedContainer(f"{type(exc).__name__}: {exc}") from exc
        _, _, kind, _, nc, ny, nx = HEADER.unpack_from(body)
        meta = store.put_blob(user, kind, (nc, ny, nx), body)
        return {
            "data_id": meta.data_id,
            "kind": meta.kind,
            "nc": meta.nc,
            "ny": meta.ny,
            "nx": meta.nx,
            "size_bytes": meta.size_bytes,
        }

    @app.get("/api/data/{data_id}")
    def fetch_data(data_id: str, user: str = Depends(require_user)):
        store.get_meta(data_id, user)
        return Response(content=store.read_blob(data_id), media_type="application/octet-stream")

    @app.delete("/api/data/{data_id}")
    def delete_data(data_id: str, user: str = Depends(require_user)):
        store.delete_data(data_id, user)
        return {"deleted": data_id}

    # ------------------------------------------------------------------ jobs

    def _checked_meta(data_id, user, want_kind, what):
        meta = store.get_meta(data_id, user)
        if meta.kind != want_kind:
            raise KindMismatch(f"{what} must be container kind {want_kind}, got {meta.kind}")
        return meta

    @app.post("/api/jobs")
    def submit_job(body: JobBody, user: str = Depends(require_user)):
        if body.method not in _METHOD_DATA_KIND:
            raise KindMismatch(f"unknown method {body.method!r}")
        params = SolverParams.from_dict(body.params)  # raises InvalidParams
        _checked_meta(body.data_id, user, _METHOD_DATA_KIND[body.method], "data_id")
        _checked_meta(body.mask_id, user, KIND_MASK, "mask_id")
        if body.truth_id:
            _checked_meta(body.truth_id, user, KIND_IMAGE, "truth_id")
        if body.method == "pfista_parallel":
            if body.maps_id:
                _checked_meta(body.maps_id, user, KIND_COILMAPS, "maps_id")
            else:
                mask = read_container(store.read_blob(body.mask_id))
                if acs_rows_of(mask) == 0:
                    raise MissingACS(
                        "no coil maps supplied and the mask has no fully sampled center rows"
                    )
        elif body.maps_id:
            raise KindMismatch("maps_id only applies to pfista_parallel")
        job = store.create_job(
            user,
            body.method,
            params.to_dict(),
            body.data_id,
            body.mask_id,
            body.maps_id,
            body.truth_id,
        )
        return {"job_id": job.job_id, "status": job.status}

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str, user: str = Depends(require_user)):
        return _job_view(store.get_job(job_id, user))

    @app.get("/api/jobs/{job_id}/result")
    def job_result(job_id: str, user: str = Depends(require_user)):
        job = store.get_job(job_id, user)
        if job.status in ("queued", "running"):
            raise NotReady(f"job is {job.status}")
        if job.status == "failed":
            raise JobFailed(job.failure_reason or "job failed")
        return Response(content=store.read_blob(job.recon_id), media_type="application/octet-stream")

    @app.get("/api/jobs/{job_id}/errormap")
    def job_errormap(job_id: str, user: str = Depends(require_user)):
        job = store.get_job(job_id, user)
        if job.status in ("queued", "running"):
            raise NotReady(f"job is {job.status}")
        if job.status == "failed":
            raise JobFailed(job.failure_reason or "job failed")
        if not job.errmap_id:
            raise NoErrorMap("job ran without a ground-truth image")
        return Response(content=store.read_blob(job.errmap_id), media_type="image/x-portable-graymap")

    @app.delete("/api/jobs/{job_id}")
    def delete_job(job_id: str, user: str = Depends(require_user)):
        store.delete_job(job_id, user)
        return {"deleted": job_id}

    # ------------------------------------------------------------------ demo

    @app.get("/api/demo")
    def demo_manifest(user: str = Depends(require_user)):
        fixtures = []
        for name, payload in demo.items():
            _, _, kind, _, nc, ny, nx = HEADER.unpack_from(payload)
            fixtures.append(
                {
                    "name": name,
                    "kind": kind,
                    "nc": nc,
                    "ny": ny,
                    "nx": nx,
                    "size_bytes": len(payload),
                    "url": f"/api/demo/{name}",
                }
            )
        return {"fixtures": fixtures}

    @app.get("/api/demo/{name}")
    def demo_fixture(name: str, user: str = Depends(require_user)):
        if name not in demo:
            raise UnknownDataId(f"no demo fixture {name!r}")
        return Response(content=demo[name], media_type="application/octet-stream")

    # ------------------------------------------------------------------ UI

    ui_dir = config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

        @app.get("/")
        def index():
            return RedirectResponse("/ui/")

    else:

        @app.get("/")
        def index():
            return {"service": "xmrc", "version": __version__}

    return app
