import json
import time

import pytest
from fastapi.testclient import TestClient

from strokeforge.config import config_from_dict
from strokeforge.imgio import image_from_bytes
from strokeforge.pipeline import run_plan_job
from strokeforge.planio import parse_plan
from strokeforge.service import create_app


@pytest.fixture
def client():
    return TestClient(create_app())


# small candidate set and identity refiner keep service tests snappy
FAST = {
    "features": {"candidate_count": 60},
    "hybrid": {"stroke_budget": 60},
    "refiner": "identity",
}


def fast_config(overrides=None):
    doc = json.loads(json.dumps(FAST))
    for key, value in (overrides or {}).items():
        if isinstance(value, dict) and isinstance(doc.get(key), dict):
            doc[key].update(value)
        else:
            doc[key] = value
    return doc


def submit(client, photo_bytes, config=None):
    r = client.post(
        "/api/jobs",
        files={"image": ("photo.png", photo_bytes, "image/png")},
        data={"config": json.dumps(fast_config(config))},
    )
    assert r.status_code == 200, r.text
    return r.json()["id"]


def wait_done(client, job_id, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        r = client.get(f"/api/jobs/{job_id}")
        body = r.json()
        if body["state"] in ("done", "failed"):
            return body
        time.sleep(0.05)
    raise AssertionError(f"job {job_id} did not finish")


class TestJobLifecycle:
    def test_submit_poll_fetch(self, client, photo_bytes):
        job_id = submit(client, photo_bytes, {"rng_seed": 7})
        body = wait_done(client, job_id)
        assert body["state"] == "done"
        assert body["result"]["stroke_count"] > 0
        png = client.get(f"/api/jobs/{job_id}/result.png")
        assert png.status_code == 200
        assert png.content[:8] == b"\x89PNG\r\n\x1a\n"
        strokes = client.get(f"/api/jobs/{job_id}/strokes")
        plan, dims = parse_plan(strokes.content)
        assert len(plan) == body["result"]["stroke_count"]
        assert dims == (48, 48)

    def test_http_matches_direct_pipeline(self, client, photo_bytes):
        config = {"rng_seed": 7}
        job_id = submit(client, photo_bytes, config)
        wait_done(client, job_id)
        png = client.get(f"/api/jobs/{job_id}/result.png").content
        plan = client.get(f"/api/jobs/{job_id}/strokes").content
        direct = run_plan_job(image_from_bytes(photo_bytes), config_from_dict(fast_config(config)))
        assert png == direct.png
        assert plan == direct.plan_json

    def test_unknown_id_404(self, client):
        r = client.get("/api/jobs/doesnotexist")
        assert r.status_code == 404
        assert r.json()["code"] == "not_found"

    def test_delete(self, client, photo_bytes):
        job_id = submit(client, photo_bytes)
        wait_done(client, job_id)
        assert client.delete(f"/api/jobs/{job_id}").status_code == 200
        assert client.get(f"/api/jobs/{job_id}").status_code == 404

    def test_result_before_done_409(self, client, photo_bytes):
        job_id = submit(client, photo_bytes)
        r = client.get(f"/api/jobs/{job_id}/result.png")
        assert r.status_code in (200, 409)  # may or may not have finished

    def test_invalid_config_422_with_pointer(self, client, photo_bytes):
        r = client.post(
            "/api/jobs",
            files={"image": ("photo.png", photo_bytes, "image/png")},
            data={"config": json.dumps({"hybrid": {"blend_gamma": 2.0}})},
        )
        assert r.status_code == 422
        body = r.json()
        assert body["code"] == "invalid_config"
        assert "/hybrid/blend_gamma" in body["message"]

    def test_payload_cap_413(self, client):
        blob = b"\x00" * (33 * 1024 * 1024)
        r = client.post(
            "/api/jobs",
            files={"image": ("big.png", blob, "image/png")},
            data={"config": "{}"},
        )
        assert r.status_code == 413
        assert r.json()["code"] == "payload_too_large"

    def test_bad_image_fails_job(self, client):
        job_id = submit(client, b"not an image at all")
        body = wait_done(client, job_id)
        assert body["state"] == "failed"
        assert body["error"]


class TestReplan:
    def test_replan_unchanged_config_is_byte_identical(self, client, photo_bytes):
        job_id = submit(client, photo_bytes, {"rng_seed": 3})
        wait_done(client, job_id)
        png1 = client.get(f"/api/jobs/{job_id}/result.png").content
        r = client.post(f"/api/jobs/{job_id}/replan", content=b"{}")
        assert r.status_code == 200
        new_id = r.json()["id"]
        wait_done(client, new_id)
        png2 = client.get(f"/api/jobs/{new_id}/result.png").content
        assert png1 == png2

    def test_replan_blend_gamma_zero_equals_heuristic_plan(self, client, photo_bytes):
        job_id = submit(client, photo_bytes, {"rng_seed": 3})
        wait_done(client, job_id)
        r = client.post(
            f"/api/jobs/{job_id}/replan", content=json.dumps({"hybrid": {"blend_gamma": 0.0}})
        )
        new_id = r.json()["id"]
        wait_done(client, new_id)
        via_api = client.get(f"/api/jobs/{new_id}/strokes").content
        direct = run_plan_job(
            image_from_bytes(photo_bytes),
            config_from_dict(fast_config({"rng_seed": 3, "hybrid": {"blend_gamma": 0.0}})),
        )
        assert via_api == direct.plan_json

    def test_replan_reuses_stage_cache(self, client, photo_bytes):
        job_id = submit(client, photo_bytes, {"rng_seed": 5})
        wait_done(client, job_id)
        r = client.post(
            f"/api/jobs/{job_id}/replan", content=json.dumps({"hybrid": {"blend_gamma": 0.9}})
        )
        new_id = r.json()["id"]
        body = wait_done(client, new_id)
        # cache hit: the prepare stage collapses to a lookup
        assert body["result"]["timings"]["prepare"] < 0.01

    def test_replan_invalid_patch_422(self, client, photo_bytes):
        job_id = submit(client, photo_bytes)
        wait_done(client, job_id)
        r = client.post(
            f"/api/jobs/{job_id}/replan", content=json.dumps({"hybrid": {"unknown_knob": 1}})
        )
        assert r.status_code == 422
        assert "/hybrid/unknown_knob" in r.json()["message"]

    def test_replan_unknown_job_404(self, client):
        assert client.post("/api/jobs/nope/replan", content=b"{}").status_code == 404


class TestExclusions:
    def test_excluded_stroke_changes_only_its_footprint(self, client, photo_bytes):
        job_id = submit(client, photo_bytes, {"rng_seed": 11})
        body = wait_done(client, job_id)
        plan_hash = body["result"]["plan_hash"]
        top = body["result"]["stroke_count"] - 1  # topmost stroke is visible
        baseline = client.get(f"/api/jobs/{job_id}/result.png").content
        r = client.post(
            f"/api/jobs/{job_id}/replan",
            content=json.dumps({"exclusions": {"plan_hash": plan_hash, "indices": [top]}}),
        )
        new_id = r.json()["id"]
        wait_done(client, new_id)
        toggled = client.get(f"/api/jobs/{new_id}/result.png").content
        assert toggled != baseline
        # same plan either way: exclusion only affects the rendering
        plan_a = client.get(f"/api/jobs/{job_id}/strokes").content
        plan_b = client.get(f"/api/jobs/{new_id}/strokes").content
        assert plan_a == plan_b

    def test_stale_plan_hash_ignored(self, client, photo_bytes):
        job_id = submit(client, photo_bytes, {"rng_seed": 11})
        wait_done(client, job_id)
        baseline = client.get(f"/api/jobs/{job_id}/result.png").content
        r = client.post(
            f"/api/jobs/{job_id}/replan",
            content=json.dumps({"exclusions": {"plan_hash": "deadbeef", "indices": [0]}}),
        )
        new_id = r.json()["id"]
        wait_done(client, new_id)
        assert client.get(f"/api/jobs/{new_id}/result.png").content == baseline
