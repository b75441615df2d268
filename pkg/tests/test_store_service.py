"""Model store durability and the HTTP JSON API."""

from __future__ import annotations

import concurrent.futures
import json

import pytest
from fastapi.testclient import TestClient

from bidscape.auction_log import dumps_log
from bidscape.errors import ModelIntegrityError, ModelNotFoundError
from bidscape.gsp_sim import generate_log
from bidscape.landscape import build_landscape, merge_landscapes
from bidscape.service import create_app
from bidscape.store import DEFAULT_ROOT, STORE_ENV_VAR, ModelStore

from conftest import duopoly_market, reference_observations


def make_landscape(group="ref", built_at=100):
    return build_landscape(
        reference_observations(), bin_size=0.01, group=group, built_at=built_at
    )


@pytest.fixture
def store(tmp_path):
    return ModelStore(tmp_path / "store")


@pytest.fixture
def client(store):
    with TestClient(create_app(store)) as c:
        yield c


@pytest.fixture
def seeded_client(store):
    store.save(make_landscape())
    with TestClient(create_app(store)) as c:
        yield c


class TestStore:
    def test_save_load_round_trip_is_field_exact(self, store):
        landscape = make_landscape(group="mobile|adv 12")
        store.save(landscape)
        loaded = store.load("mobile|adv 12")
        assert loaded == landscape
        assert loaded.pdf_cost_dn == landscape.pdf_cost_dn
        assert loaded.built_at == landscape.built_at

    def test_groups_lists_unquoted_names(self, store):
        store.save(make_landscape(group="b/slash"))
        store.save(make_landscape(group="a"))
        assert store.groups() == ["a", "b/slash"]
        # quoting keeps every model inside models/
        for p in store.models_dir.glob("*.json"):
            assert p.parent == store.models_dir

    def test_missing_group_raises(self, store):
        with pytest.raises(ModelNotFoundError):
            store.load("nope")

    def test_corrupt_model_raises_integrity_error(self, store):
        store.save(make_landscape())
        store.model_path("ref").write_text("{broken")
        with pytest.raises(ModelIntegrityError):
            store.load("ref")
        store.model_path("ref").write_text('{"valid": "json"}')
        with pytest.raises(ModelIntegrityError):
            store.load("ref")

    def test_resave_overwrites_atomically(self, store):
        store.save(make_landscape(built_at=1))
        store.save(make_landscape(built_at=2))
        assert store.load("ref").built_at == 2
        leftovers = [p for p in store.models_dir.iterdir() if p.suffix == ".tmp"]
        assert leftovers == []

    def test_concurrent_saves_of_two_groups(self, store):
        a = make_landscape(group="g-a")
        b = make_landscape(group="g-b")

        def hammer(landscape):
            for _ in range(25):
                store.save(landscape)
            return store.load(landscape.group)

        with concurrent.futures.ThreadPoolExecutor(max_workers=2) as pool:
            got_a, got_b = pool.map(hammer, [a, b])
        assert got_a == a and got_b == b
        assert store.groups() == ["g-a", "g-b"]

    def test_log_append_and_iteration(self, store):
        log = generate_log(duopoly_market(), 7)
        store.append_log(log[:4])
        store.append_log(log[4:])
        assert len(store.log_files()) == 2
        assert list(store.iter_log_snapshots()) == log

    def test_from_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(STORE_ENV_VAR, str(tmp_path / "env-store"))
        assert ModelStore.from_env().root == tmp_path / "env-store"
        override = tmp_path / "explicit"
        assert ModelStore.from_env(override).root == override
        monkeypatch.delenv(STORE_ENV_VAR)
        assert ModelStore.from_env().root.name == DEFAULT_ROOT


class TestHealthAndListing:
    def test_health(self, client):
        r = client.get("/v1/health")
        assert r.status_code == 200
        assert r.json() == {"status": "ok"}

    def test_listing_starts_empty_and_tracks_saves(self, client, store):
        assert client.get("/v1/landscape").json() == {"groups": []}
        store.save(make_landscape(group="g1"))
        assert client.get("/v1/landscape").json() == {"groups": ["g1"]}


class TestRecommendEndpoint:
    BASE = {
        "group": "ref",
        "impressions": 1_000_000,
        "pctr": 0.01,
        "pcvr": 0.1,
        "cpa_goal": 20.0,
        "budget": 1e9,
        "tolerance": 0.05,
    }

    def test_feasible_fixture(self, seeded_client):
        r = seeded_client.post("/v1/recommend", json=self.BASE)
        assert r.status_code == 200
        body = r.json()
        assert body["group"] == "ref"
        assert body["status"] == "feasible"
        assert body["bid"] == pytest.approx(0.03)
        assert body["conversions"] == pytest.approx(1000.0)
        assert body["adjusted_budget"] is None and body["adjusted_cpa"] is None

    def test_budget_limited_fixture(self, seeded_client):
        r = seeded_client.post("/v1/recommend", json={**self.BASE, "budget": 5000})
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "budget_limited"
        assert body["bid"] == pytest.approx(0.01)
        assert body["adjusted_budget"] == pytest.approx(43000 / 3)
        assert body["adjusted_cpa"] == pytest.approx(8.0)

    def test_invalid_pctr_yields_field_error(self, seeded_client):
        r = seeded_client.post("/v1/recommend", json={**self.BASE, "pctr": 0})
        assert r.status_code == 400
        assert r.json() == {
            "errors": [{"field": "pctr", "message": "pctr must be positive"}]
        }

    def test_multiple_field_errors_collected(self, seeded_client):
        r = seeded_client.post(
            "/v1/recommend", json={**self.BASE, "budget": -1, "cpa_goal": 0}
        )
        assert r.status_code == 400
        fields = {e["field"] for e in r.json()["errors"]}
        assert fields == {"budget", "cpa_goal"}

    def test_missing_field_is_a_400_not_422(self, seeded_client):
        payload = dict(self.BASE)
        del payload["pctr"]
        r = seeded_client.post("/v1/recommend", json=payload)
        assert r.status_code == 400
        assert any(e["field"] == "pctr" for e in r.json()["errors"])

    def test_unknown_group_is_404(self, seeded_client):
        r = seeded_client.post("/v1/recommend", json={**self.BASE, "group": "zz"})
        assert r.status_code == 404
        assert "zz" in r.json()["error"]


class TestCurvesEndpoint:
    def test_points_match_direct_queries(self, seeded_client):
        r = seeded_client.get(
            "/v1/landscape/ref/curves",
            params={
                "from": 0.01,
                "to": 0.05,
                "step": 0.01,
                "pctr": 0.01,
                "pcvr": 0.1,
                "impressions": 1_000_000,
            },
        )
        assert r.status_code == 200
        body = r.json()
        assert body["group"] == "ref"
        assert body["bin_size"] == 0.01
        points = body["points"]
        assert [p["bid"] for p in points] == pytest.approx(
            [0.01, 0.02, 0.03, 0.04, 0.05]
        )
        assert points[0]["winrate"] == pytest.approx(1 / 3)
        assert points[2]["clicks"] == pytest.approx(10_000.0)
        assert points[2]["cpa"] == pytest.approx(43 / 3)
        assert points[4]["winrate"] == 0.0
        assert points[4]["spend"] == 0.0

    def test_bad_step_is_400(self, seeded_client):
        r = seeded_client.get(
            "/v1/landscape/ref/curves",
            params={"from": 0.01, "to": 0.05, "step": 0, "pctr": 0.01, "pcvr": 0.1},
        )
        assert r.status_code == 400
        assert any(e["field"] == "step" for e in r.json()["errors"])

    def test_unknown_group_is_404(self, seeded_client):
        r = seeded_client.get(
            "/v1/landscape/zz/curves",
            params={"from": 0.01, "to": 0.02, "step": 0.01, "pctr": 0.01, "pcvr": 0.1},
        )
        assert r.status_code == 404


class TestIngestAndBuild:
    def test_ingest_then_build_then_recommend(self, client, store):
        market = duopoly_market(jitter=0.3)
        log = generate_log(market, 500)
        r = client.post(
            "/v1/logs",
            content=dumps_log(log, fmt="jsonl"),
            params={"fmt": "jsonl"},
        )
        assert r.status_code == 200
        assert r.json()["accepted"] == 500
        assert r.json()["rejected"] == 0

        r = client.post(
            "/v1/landscape/build",
            json={"group_by": "by_context", "bin_size": 0.001, "max_ecpm": 9.99},
        )
        assert r.status_code == 200
        assert r.json()["groups"] == ["ctx"]
        assert store.groups() == ["ctx"]

        r = client.post(
            "/v1/recommend",
            json={
                "group": "ctx",
                "impressions": 100_000,
                "pctr": 0.05,
                "pcvr": 0.1,
                "cpa_goal": 50.0,
                "budget": 1e9,
            },
        )
        assert r.status_code == 200
        assert r.json()["status"] in ("feasible", "budget_limited", "infeasible")

    def test_ingest_reports_bad_lines(self, client):
        good = dumps_log(generate_log(duopoly_market(), 2), fmt="jsonl")
        r = client.post("/v1/logs", content=good + "{bad json\n")
        assert r.json()["accepted"] == 2
        assert r.json()["rejected"] == 1
        assert r.json()["errors"][0]["line"] == 3

    def test_ingest_rejects_unknown_format(self, client):
        r = client.post("/v1/logs", content="x", params={"fmt": "xml"})
        assert r.status_code == 400

    def test_build_without_logs_is_400(self, client):
        r = client.post("/v1/landscape/build", json={})
        assert r.status_code == 400
        assert any(e["field"] == "logs" for e in r.json()["errors"])

    def test_build_rejects_bad_grouping(self, client):
        r = client.post("/v1/landscape/build", json={"group_by": "by_phase_of_moon"})
        assert r.status_code == 400
        assert any(e["field"] == "group_by" for e in r.json()["errors"])

    def test_csv_ingest(self, client):
        log = generate_log(duopoly_market(), 3)
        r = client.post(
            "/v1/logs", content=dumps_log(log, fmt="csv"), params={"fmt": "csv"}
        )
        assert r.json()["accepted"] == 3


class TestRebuildVisibility:
    def test_saved_update_is_picked_up_without_restart(self, seeded_client, store):
        before = seeded_client.post(
            "/v1/recommend", json=TestRecommendEndpoint.BASE
        ).json()
        updated = merge_landscapes(make_landscape(), make_landscape(), decay=1.0)
        store.save(updated)
        after = seeded_client.post(
            "/v1/recommend", json=TestRecommendEndpoint.BASE
        ).json()
        # doubled counts leave every ratio untouched
        assert after["bid"] == before["bid"]
        assert after["conversions"] == pytest.approx(before["conversions"])


class TestStaticUi:
    def test_ui_mounted_when_dir_exists(self, store, tmp_path):
        ui = tmp_path / "ui"
        ui.mkdir()
        (ui / "index.html").write_text("<!doctype html><title>planner</title>")
        with TestClient(create_app(store, ui_dir=ui)) as c:
            r = c.get("/ui/")
            assert r.status_code == 200
            assert "planner" in r.text

    def test_no_ui_dir_no_mount(self, client):
        assert client.get("/ui/").status_code == 404
