"""HTTP service: sessions, sync/async simulation, persistence, mesh parity."""

import time

import pytest
from fastapi.testclient import TestClient

from smocklab import fixtures
from smocklab.cli import main
from smocklab.io import pattern_to_doc, save_pattern
from smocklab.pattern import tile_unit
from smocklab.service import SYNC_NODE_LIMIT, create_app


@pytest.fixture
def client(tmp_path):
    return TestClient(create_app(store_dir=tmp_path / "store"))


def arrow_doc():
    return pattern_to_doc(fixtures.arrow())


def big_doc():
    # 240 smocked-graph nodes: over the synchronous limit
    return pattern_to_doc(tile_unit(fixtures.arrow_unit(), 6, 6, shift=1))


def make_session(client, doc=None):
    r = client.post("/sessions", json=doc or arrow_doc())
    assert r.status_code == 201
    return r.json()["id"]


def test_healthz(client):
    r = client.get("/healthz")
    assert r.status_code == 200
    assert r.text == "ok"


def test_create_rejects_bad_pattern(client):
    r = client.post("/sessions", json={"version": 7})
    assert r.status_code == 422
    body = r.json()
    assert body["pointer"] == "/version"
    assert "message" in body


def test_unknown_session_and_job(client):
    assert client.get("/sessions/nope").status_code == 404
    assert client.get("/jobs/nope").status_code == 404
    assert client.post("/sessions/nope/simulate").status_code == 404


def test_sync_simulation_round_trip(client):
    sid = make_session(client)
    r = client.post(f"/sessions/{sid}/simulate")
    assert r.status_code == 200
    body = r.json()
    assert body["converged"] is True
    assert body["constraints"]["classification"] == "well"
    assert 0 < body["shrinkage"]["ratio_x"] < 1
    assert "mesh" not in body

    diag = client.get(f"/sessions/{sid}/result/diagnostics")
    assert diag.status_code == 200
    assert diag.json()["embedding"]["underlay_energy"] < 1e-8

    mesh = client.get(f"/sessions/{sid}/result/mesh")
    assert mesh.status_code == 200
    assert mesh.text.startswith("v ")
    fine = client.get(f"/sessions/{sid}/result/mesh", params={"variant": "fine"})
    assert len(fine.text) > len(mesh.text)
    bad = client.get(f"/sessions/{sid}/result/mesh", params={"variant": "quads"})
    assert bad.status_code == 422


def test_mesh_matches_cli_export(client, tmp_path):
    sid = make_session(client)
    client.post(f"/sessions/{sid}/simulate")
    served = client.get(f"/sessions/{sid}/result/mesh").content

    pattern_file = tmp_path / "arrow.json"
    save_pattern(fixtures.arrow(), pattern_file)
    obj_file = tmp_path / "arrow.obj"
    assert main(["export", str(pattern_file), "--out", str(obj_file)]) == 0
    assert obj_file.read_bytes() == served


def test_put_pattern_invalidates_results(client):
    sid = make_session(client)
    client.post(f"/sessions/{sid}/simulate")
    assert client.get(f"/sessions/{sid}/result/mesh").status_code == 200
    r = client.put(f"/sessions/{sid}/pattern", json=pattern_to_doc(fixtures.p1()))
    assert r.status_code == 200
    assert client.get(f"/sessions/{sid}/result/mesh").status_code == 404
    assert client.get(f"/sessions/{sid}").json()["results"] is None


def test_session_report_omits_mesh(client):
    sid = make_session(client)
    client.post(f"/sessions/{sid}/simulate")
    doc = client.get(f"/sessions/{sid}").json()
    assert doc["results"] and "mesh" not in doc["results"]


def _poll(client, jid, timeout=60.0):
    t0 = time.time()
    while time.time() - t0 < timeout:
        body = client.get(f"/jobs/{jid}").json()
        if body["status"] != "running":
            return body
        time.sleep(0.2)
    raise TimeoutError("job did not finish")


def test_async_job_and_conflict(client):
    sid = make_session(client, big_doc())
    fast = {"params": {"subdivision": 1}}
    r = client.post(f"/sessions/{sid}/simulate", json=fast)
    assert r.status_code == 202
    jid = r.json()["job"]

    # second request while the job runs is refused
    r2 = client.post(f"/sessions/{sid}/simulate", json=fast)
    assert r2.status_code == 409

    body = _poll(client, jid)
    assert body["status"] == "done", body
    mesh = client.get(f"/sessions/{sid}/result/mesh")
    assert mesh.status_code == 200
    # and the lock is free again
    r3 = client.post(f"/sessions/{sid}/simulate", json=fast)
    assert r3.status_code in (200, 202)
    if r3.status_code == 202:
        _poll(client, r3.json()["job"])


def test_persistence_across_restart(tmp_path):
    store = tmp_path / "store"
    c1 = TestClient(create_app(store_dir=store))
    sid = make_session(c1, arrow_doc())
    c1.post(f"/sessions/{sid}/simulate")

    c2 = TestClient(create_app(store_dir=store))
    doc = c2.get(f"/sessions/{sid}")
    assert doc.status_code == 200
    assert doc.json()["results"]["converged"] is True
    assert c2.get(f"/sessions/{sid}/result/mesh").status_code == 200
