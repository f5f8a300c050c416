import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from xmrc.container import KIND_KSPACE, read_container, write_container
from xmrc.demo import acs_rows_of
from xmrc.phantoms import shepp_logan
from xmrc.sampling import MaskParams, apply_mask, pseudo_radial_mask
from xmrc.service import ServiceConfig, Store, WorkerPool, create_app
from xmrc.errors import IllegalTransition
from xmrc.transforms import dft2_centered
from xmrc.types import ComplexImage, KSpaceGrid, SamplingMask

from conftest import random_complex

SIZE = 32


def make_config(tmp_path, **kwargs):
    defaults = dict(
        data_dir=str(tmp_path / "data"),
        workers=1,
        demo_size=64,
        lease_seconds=5.0,
        accounts=(("EMBC", "EMBC2021"), ("other", "hunter2")),
    )
    defaults.update(kwargs)
    return ServiceConfig(**defaults)


@pytest.fixture
def app(tmp_path):
    return create_app(make_config(tmp_path))


def login(client, username="EMBC", password="EMBC2021"):
    r = client.post("/api/login", json={"username": username, "password": password})
    assert r.status_code == 200, r.text
    return {"Authorization": f"Bearer {r.json()['token']}"}


def small_fixtures():
    truth = shepp_logan(SIZE, SIZE)
    mask = pseudo_radial_mask(SIZE, SIZE, MaskParams("pseudo-radial", 0.4))
    y = apply_mask(dft2_centered(truth), mask)
    return truth, mask, y


def upload(client, headers, obj):
    r = client.post("/api/data", headers=headers, content=write_container(obj))
    assert r.status_code == 200, r.text
    return r.json()["data_id"]


def submit(client, headers, **body):
    body.setdefault("params", {"max_iter": 10})
    r = client.post("/api/jobs", headers=headers, json=body)
    assert r.status_code == 200, r.text
    return r.json()["job_id"]


def wait_done(client, headers, job_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        status = client.get(f"/api/jobs/{job_id}", headers=headers).json()
        if status["status"] in ("done", "failed"):
            return status
        time.sleep(0.02)
    raise AssertionError("job did not finish in time")


# ---------------------------------------------------------------------------
# auth
# ---------------------------------------------------------------------------

def test_login_and_error_text_no_enumeration(app):
    with TestClient(app) as client:
        login(client)
        wrong_pw = client.post("/api/login", json={"username": "EMBC", "password": "x"})
        wrong_user = client.post("/api/login", json={"username": "ghost", "password": "x"})
        assert wrong_pw.status_code == wrong_user.status_code == 401
        assert wrong_pw.json() == wrong_user.json()


def test_every_api_route_requires_token(app):
    with TestClient(app) as client:
        checked = 0
        for route in app.routes:
            path = getattr(route, "path", "")
            if not path.startswith("/api") or path == "/api/login":
                continue
            for method in route.methods - {"HEAD", "OPTIONS"}:
                url = path.replace("{data_id}", "x").replace("{job_id}", "x").replace("{name}", "x")
                r = client.request(method, url)
                assert r.status_code == 401, f"{method} {url} -> {r.status_code}"
                assert r.json()["code"] == "Unauthorized"
                checked += 1
        assert checked >= 10  # all non-login API routes covered


def test_expired_token_rejected(app):
    with TestClient(app) as client:
        headers = login(client)
        token = headers["Authorization"].split()[1]
        app.state.tokens.expire_now(token)
        r = client.get("/api/demo", headers=headers)
        assert r.status_code == 401


def test_garbage_token_rejected(app):
    with TestClient(app) as client:
        r = client.get("/api/demo", headers={"Authorization": "Bearer deadbeef"})
        assert r.status_code == 401


# ---------------------------------------------------------------------------
# data
# ---------------------------------------------------------------------------

def test_upload_echoes_meta(app, rng):
    with TestClient(app) as client:
        headers = login(client)
        y = KSpaceGrid(random_complex(rng, 16, 24))
        r = client.post("/api/data", headers=headers, content=write_container(y))
        meta = r.json()
        assert meta["kind"] == KIND_KSPACE and (meta["ny"], meta["nx"]) == (16, 24)
        got = client.get(f"/api/data/{meta['data_id']}", headers=headers)
        assert got.content == write_container(y)


def test_upload_malformed(app):
    with TestClient(app) as client:
        headers = login(client)
        r = client.post("/api/data", headers=headers, content=b"XXXX not a container")
        assert r.status_code == 400
        assert r.json()["code"] == "MalformedContainer"
        assert "BadMagic" in r.json()["message"]


def test_upload_too_large(tmp_path, rng):
    app = create_app(make_config(tmp_path, max_upload_bytes=100))
    with TestClient(app) as client:
        headers = login(client)
        y = KSpaceGrid(random_complex(rng, 16, 16))
        r = client.post("/api/data", headers=headers, content=write_container(y))
        assert r.status_code == 413
        assert r.json()["code"] == "TooLarge"


def test_delete_data_then_not_found(app, rng):
    with TestClient(app) as client:
        headers = login(client)
        data_id = upload(client, headers, KSpaceGrid(random_complex(rng, 8, 8)))
        assert client.delete(f"/api/data/{data_id}", headers=headers).status_code == 200
        r = client.get(f"/api/data/{data_id}", headers=headers)
        assert r.status_code == 404 and r.json()["code"] == "UnknownDataId"
        r = client.delete(f"/api/data/{data_id}", headers=headers)
        assert r.status_code == 404


def test_foreign_data_unauthorized(app, rng):
    with TestClient(app) as client:
        headers = login(client)
        other = login(client, "other", "hunter2")
        data_id = upload(client, headers, KSpaceGrid(random_complex(rng, 8, 8)))
        r = client.get(f"/api/data/{data_id}", headers=other)
        assert r.status_code == 401


# ---------------------------------------------------------------------------
# jobs
# ---------------------------------------------------------------------------

def test_job_lifecycle_with_truth(app):
    truth, mask, y = small_fixtures()
    with TestClient(app) as client:
        headers = login(client)
        kid = upload(client, headers, y)
        mid = upload(client, headers, mask)
        tid = upload(client, headers, truth)
        job_id = submit(client, headers, method="pfista", data_id=kid, mask_id=mid, truth_id=tid)
        status = wait_done(client, headers, job_id)
        assert status["status"] == "done"
        assert 0.0 < status["result"]["rlne"] < 1.0
        assert status["progress"]["iteration"] == 10

        recon_bytes = client.get(f"/api/jobs/{job_id}/result", headers=headers).content
        recon = read_container(recon_bytes)
        assert isinstance(recon, ComplexImage) and recon.shape == (SIZE, SIZE)

        errmap = client.get(f"/api/jobs/{job_id}/errormap", headers=headers)
        assert errmap.content.startswith(b"P5\n")


def test_job_without_truth_has_no_rlne_or_errormap(app):
    _, mask, y = small_fixtures()
    with TestClient(app) as client:
        headers = login(client)
        kid = upload(client, headers, y)
        mid = upload(client, headers, mask)
        job_id = submit(client, headers, method="pfista", data_id=kid, mask_id=mid)
        status = wait_done(client, headers, job_id)
        assert status["status"] == "done"
        assert status["result"]["rlne"] is None
        r = client.get(f"/api/jobs/{job_id}/errormap", headers=headers)
        assert r.status_code == 404 and r.json()["code"] == "NoErrorMap"


def test_kind_mismatch_cases(app, rng):
    truth, mask, y = small_fixtures()
    with TestClient(app) as client:
        headers = login(client)
        kid = upload(client, headers, y)
        mid = upload(client, headers, mask)
        tid = upload(client, headers, truth)
        r = client.post("/api/jobs", headers=headers, json={
            "method": "pfista_parallel", "data_id": kid, "mask_id": mid})
        assert r.status_code == 400 and r.json()["code"] == "KindMismatch"
        r = client.post("/api/jobs", headers=headers, json={
            "method": "pfista", "data_id": kid, "mask_id": tid})
        assert r.status_code == 400 and r.json()["code"] == "KindMismatch"
        r = client.post("/api/jobs", headers=headers, json={
            "method": "xnet", "data_id": kid, "mask_id": mid})
        assert r.status_code == 400 and r.json()["code"] == "KindMismatch"


def test_invalid_params_rejected_at_submit(app):
    _, mask, y = small_fixtures()
    with TestClient(app) as client:
        headers = login(client)
        kid = upload(client, headers, y)
        mid = upload(client, headers, mask)
        r = client.post("/api/jobs", headers=headers, json={
            "method": "pfista", "data_id": kid, "mask_id": mid, "params": {"gamma": 2}})
        assert r.status_code == 400 and r.json()["code"] == "InvalidParams"


def test_unknown_refs(app):
    with TestClient(app) as client:
        headers = login(client)
        r = client.post("/api/jobs", headers=headers, json={
            "method": "pfista", "data_id": "nope", "mask_id": "nope"})
        assert r.status_code == 404 and r.json()["code"] == "UnknownDataId"
        r = client.get("/api/jobs/nope", headers=headers)
        assert r.status_code == 404 and r.json()["code"] == "UnknownJob"


def test_missing_acs(app, rng):
    with TestClient(app) as client:
        headers = login(client)
        cells = (rng.random((16, 16)) < 0.3).astype(np.uint8)
        cells[8, 3] = 0  # break the center row
        cells[0, 0] = 1
        mask = SamplingMask(cells)
        assert acs_rows_of(mask) == 0
        stack = np.stack([random_complex(rng, 16, 16) for _ in range(2)])
        from xmrc.types import MultiCoilKSpace

        kid = upload(client, headers, MultiCoilKSpace(stack))
        mid = upload(client, headers, mask)
        r = client.post("/api/jobs", headers=headers, json={
            "method": "pfista_parallel", "data_id": kid, "mask_id": mid})
        assert r.status_code == 400 and r.json()["code"] == "MissingACS"


def test_result_not_ready_when_queued(tmp_path):
    app = create_app(make_config(tmp_path, workers=0))
    _, mask, y = small_fixtures()
    with TestClient(app) as client:
        headers = login(client)
        kid = upload(client, headers, y)
        mid = upload(client, headers, mask)
        job_id = submit(client, headers, method="pfista", data_id=kid, mask_id=mid)
        r = client.get(f"/api/jobs/{job_id}/result", headers=headers)
        assert r.status_code == 409 and r.json()["code"] == "NotReady"


def test_foreign_job_unauthorized(app):
    _, mask, y = small_fixtures()
    with TestClient(app) as client:
        headers = login(client)
        other = login(client, "other", "hunter2")
        kid = upload(client, headers, y)
        mid = upload(client, headers, mask)
        job_id = submit(client, headers, method="pfista", data_id=kid, mask_id=mid)
        assert client.get(f"/api/jobs/{job_id}", headers=other).status_code == 401
        # and foreign inputs cannot be referenced at submit either
        r = client.post("/api/jobs", headers=other, json={
            "method": "pfista", "data_id": kid, "mask_id": mid})
        assert r.status_code == 401


def test_solver_fault_marks_job_failed_service_survives(app, rng):
    _, mask, y = small_fixtures()
    with TestClient(app) as client:
        headers = login(client)
        kid = upload(client, headers, KSpaceGrid(random_complex(rng, 16, 16)))
        mid = upload(client, headers, mask)  # 32x32 mask vs 16x16 data
        job_id = submit(client, headers, method="pfista", data_id=kid, mask_id=mid)
        status = wait_done(client, headers, job_id)
        assert status["status"] == "failed"
        assert "ShapeMismatch" in status["failure_reason"]
        r = client.get(f"/api/jobs/{job_id}/result", headers=headers)
        assert r.status_code == 409 and r.json()["code"] == "JobFailed"

        # the worker is still alive and completes the next job
        kid2 = upload(client, headers, y)
        job2 = submit(client, headers, method="pfista", data_id=kid2, mask_id=mid)
        assert wait_done(client, headers, job2)["status"] == "done"


def test_fifo_completion_order(app):
    _, mask, y = small_fixtures()
    with TestClient(app) as client:
        headers = login(client)
        kid = upload(client, headers, y)
        mid = upload(client, headers, mask)
        jobs = [submit(client, headers, method="pfista", data_id=kid, mask_id=mid)
                for _ in range(3)]
        for job_id in jobs:
            assert wait_done(client, headers, job_id)["status"] == "done"
        done_order = [jid for jid, _, to in app.state.store.transition_log if to == "done"]
        assert done_order == jobs


def test_delete_queued_job_input_cancels(tmp_path):
    app = create_app(make_config(tmp_path, workers=0))
    _, mask, y = small_fixtures()
    with TestClient(app) as client:
        headers = login(client)
        kid = upload(client, headers, y)
        mid = upload(client, headers, mask)
        job_id = submit(client, headers, method="pfista", data_id=kid, mask_id=mid)
        client.delete(f"/api/data/{kid}", headers=headers)
        status = client.get(f"/api/jobs/{job_id}", headers=headers).json()
        assert status["status"] == "failed"
        assert "cancelled" in status["failure_reason"]


def test_delete_job_removes_results(app):
    truth, mask, y = small_fixtures()
    with TestClient(app) as client:
        headers = login(client)
        kid = upload(client, headers, y)
        mid = upload(client, headers, mask)
        tid = upload(client, headers, truth)
        job_id = submit(client, headers, method="pfista", data_id=kid, mask_id=mid, truth_id=tid)
        status = wait_done(client, headers, job_id)
        recon_id = status["result"]["recon_id"]
        assert client.get(f"/api/data/{recon_id}", headers=headers).status_code == 200
        client.delete(f"/api/jobs/{job_id}", headers=headers)
        assert client.get(f"/api/jobs/{job_id}", headers=headers).status_code == 404
        assert client.get(f"/api/data/{recon_id}", headers=headers).status_code == 404


def test_demo_manifest_and_fixtures(app):
    with TestClient(app) as client:
        headers = login(client)
        manifest = client.get("/api/demo", headers=headers).json()["fixtures"]
        names = {f["name"] for f in manifest}
        assert names == {"phantom", "mask_radial_30", "mask_cartesian_25",
                         "kspace_single", "kspace_multi", "coil_maps"}
        for f in manifest:
            payload = client.get(f["url"], headers=headers).content
            assert len(payload) == f["size_bytes"]
            read_container(payload)  # parses


def test_config_from_file_with_overrides(tmp_path):
    import json

    cfg_path = tmp_path / "server.json"
    cfg_path.write_text(json.dumps({
        "data_dir": "/srv/xmrc",
        "port": 9000,
        "workers": 4,
        "accounts": [{"username": "EMBC", "password": "EMBC2021"},
                     ["ops", "s3cret"]],
        "max_upload_bytes": 1024,
    }))
    cfg = ServiceConfig.from_file(cfg_path, port=9999, data_dir=None)
    assert cfg.port == 9999  # flag override wins
    assert cfg.data_dir == "/srv/xmrc"
    assert cfg.workers == 4
    assert cfg.accounts == (("EMBC", "EMBC2021"), ("ops", "s3cret"))
    assert cfg.max_upload_bytes == 1024


def test_ui_mount_serves_static_assets(tmp_path):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>xmrc console</title>")
    app = create_app(make_config(tmp_path, ui_dir=str(ui)))
    with TestClient(app) as client:
        r = client.get("/ui/")
        assert r.status_code == 200 and "xmrc console" in r.text
        r = client.get("/", follow_redirects=False)
        assert r.status_code in (302, 307) and r.headers["location"] == "/ui/"


def test_root_without_ui(app):
    with TestClient(app) as client:
        body = client.get("/").json()
        assert body["service"] == "xmrc"


# ---------------------------------------------------------------------------
# durability / restart
# ---------------------------------------------------------------------------

def test_deletion_survives_restart(tmp_path, rng):
    config = make_config(tmp_path)
    app1 = create_app(config)
    with TestClient(app1) as client:
        headers = login(client)
        gone = upload(client, headers, KSpaceGrid(random_complex(rng, 8, 8)))
        kept = upload(client, headers, KSpaceGrid(random_complex(rng, 8, 8)))
        client.delete(f"/api/data/{gone}", headers=headers)

    app2 = create_app(config)
    with TestClient(app2) as client:
        headers = login(client)
        assert client.get(f"/api/data/{gone}", headers=headers).status_code == 404
        assert client.get(f"/api/data/{kept}", headers=headers).status_code == 200
    blob_dir = tmp_path / "data" / "blobs"
    assert not (blob_dir / gone).exists()
    assert (blob_dir / kept).exists()


# ---------------------------------------------------------------------------
# store-level contracts
# ---------------------------------------------------------------------------

def store_with_job(tmp_path, max_iter=5):
    store = Store(tmp_path / "store")
    truth, mask, y = small_fixtures()
    kid = store.put_blob("EMBC", 2, (1, SIZE, SIZE), write_container(y)).data_id
    mid = store.put_blob("EMBC", 4, (1, SIZE, SIZE), write_container(mask)).data_id
    job = store.create_job("EMBC", "pfista", {"max_iter": max_iter}, kid, mid)
    return store, job, kid


def test_illegal_transition_raises(tmp_path):
    store, job, _ = store_with_job(tmp_path)
    with pytest.raises(IllegalTransition):
        store._transition(job, "done")  # queued -> done skips running


def test_purge_on_complete_discards_results(tmp_path):
    store, job, kid = store_with_job(tmp_path)
    claimed = store.claim_next("w0", lease_seconds=60)
    assert claimed.job_id == job.job_id and claimed.status == "running"
    store.delete_data(kid, "EMBC")
    blobs_before = set(store._data)
    store.finalize_done(job.job_id, b"payload", (1, SIZE, SIZE), b"errmap", 0.5)
    assert store.get_job(job.job_id, "EMBC").status == "failed"
    assert "cancelled" in store.get_job(job.job_id, "EMBC").failure_reason
    assert set(store._data) == blobs_before  # no result blob persisted


def test_lease_reclaim_after_worker_death(tmp_path):
    store, job, _ = store_with_job(tmp_path)
    # a worker claims the job and dies without finishing
    claimed = store.claim_next("ghost", lease_seconds=0.2)
    assert claimed.job_id == job.job_id
    assert store.claim_next("w1", lease_seconds=0.2) is None  # lease still held
    time.sleep(0.25)
    pool = WorkerPool(store, worker_count=1, lease_seconds=30)
    pool.start()
    try:
        deadline = time.monotonic() + 30
        while time.monotonic() < deadline:
            if store.get_job(job.job_id, "EMBC").status == "done":
                break
            time.sleep(0.02)
        assert store.get_job(job.job_id, "EMBC").status == "done"
    finally:
        pool.stop()
    # the takeover must not have bent the state machine
    transitions = [(a, b) for _, a, b in store.transition_log]
    assert transitions == [("queued", "running"), ("running", "done")]


def test_running_job_reclaimable_after_restart(tmp_path):
    store, job, _ = store_with_job(tmp_path)
    store.claim_next("ghost", lease_seconds=1000)
    store.close()
    revived = Store(tmp_path / "store")  # same journal; running job, no lease
    claimed = revived.claim_next("w0", lease_seconds=60)
    assert claimed is not None and claimed.job_id == job.job_id
    assert claimed.status == "running"
