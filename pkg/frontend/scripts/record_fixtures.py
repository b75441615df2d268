"""Record HTTP fixtures for the planner UI tests from the real service.

Builds the small reference landscape the Python test suite uses, serves it
with the actual FastAPI app, replays the planner's request shapes, and
writes every response body verbatim into tests/fixtures/. The UI contract
tests then assert against these recordings, so every number the UI shows is
traceable to a real server response.

Run from the frontend/ directory: python3 scripts/record_fixtures.py
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from bidscape.landscape import RangeObservation, build_landscape
from bidscape.service import create_app
from bidscape.store import ModelStore

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

# (ecpm_up, ecpm_dn, ecpm_cost) of the three-observation reference landscape
REFERENCE_RANGES = [
    (0.04, 0.01, 0.008),
    (0.05, 0.02, 0.015),
    (0.05, 0.03, 0.02),
]

BASE_FORM = {
    "group": "ref",
    "impressions": 1_000_000,
    "pctr": 0.01,
    "pcvr": 0.1,
    "cpa_goal": 20.0,
    "budget": 50_000.0,
    "tolerance": 0.05,
}

CURVES_QUERY = {
    "from": "0.01",
    "to": "0.05",
    "step": "0.01",
    "pctr": "0.01",
    "pcvr": "0.1",
    "impressions": "1000000",
}

# payloads the client-side validator must reject identically
INVALID_FORMS = [
    {"pctr": 0},
    {"pctr": 2},
    {"pcvr": 0},
    {"pcvr": 1.5},
    {"impressions": 0},
    {"impressions": -5},
    {"cpa_goal": 0},
    {"budget": -1},
    {"tolerance": -0.1},
    {"group": ""},
    {"group": "", "pctr": 0, "budget": 0},
]


def write(name: str, payload: object) -> None:
    path = FIXTURES / name
    path.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {path.relative_to(FIXTURES.parent.parent)}")


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        store = ModelStore(Path(tmp))
        store.save(
            build_landscape(
                [
                    RangeObservation("a1", "ref", 1, up, dn, cost)
                    for up, dn, cost in REFERENCE_RANGES
                ],
                bin_size=0.01,
                group="ref",
                built_at=100,
            )
        )
        with TestClient(create_app(store)) as client:
            write("health.json", client.get("/v1/health").json())
            write("groups.json", client.get("/v1/landscape").json())

            r = client.get("/v1/landscape/ref/curves", params=CURVES_QUERY)
            assert r.status_code == 200, r.text
            write("curves_ref.json", r.json())

            dead = dict(CURVES_QUERY, **{"from": "0.001", "to": "0.004", "step": "0.001"})
            r = client.get("/v1/landscape/ref/curves", params=dead)
            assert r.status_code == 200, r.text
            body = r.json()
            assert all(p["winrate"] == 0 and p["cost"] is None for p in body["points"])
            write("curves_dead_range.json", body)

            r = client.get("/v1/landscape/nope/curves", params=CURVES_QUERY)
            assert r.status_code == 404, r.text
            write("curves_unknown_group.json", r.json())

            curves_cases = []
            for bad in [{"step": "0"}, {"to": "0.001"}]:
                r = client.get(
                    "/v1/landscape/ref/curves", params=dict(CURVES_QUERY, **bad)
                )
                assert r.status_code == 400, r.text
                curves_cases.append(
                    {"query": dict(CURVES_QUERY, **bad), "status": 400, "body": r.json()}
                )
            write("curves_validation_cases.json", curves_cases)

            r = client.post("/v1/recommend", json=BASE_FORM)
            assert r.status_code == 200 and r.json()["status"] == "feasible", r.text
            feasible = r.json()
            write("recommend_feasible.json", feasible)

            r = client.post("/v1/recommend", json={**BASE_FORM, "budget": 5000.0})
            assert r.status_code == 200 and r.json()["status"] == "budget_limited", r.text
            limited = r.json()
            write("recommend_budget_limited.json", limited)

            # clicking "raise budget to B'" re-queries with B' verbatim and
            # must land exactly on the feasible recommendation
            raised = {**BASE_FORM, "budget": limited["adjusted_budget"]}
            r = client.post("/v1/recommend", json=raised)
            assert r.status_code == 200, r.text
            after_raise = r.json()
            assert after_raise["status"] == "feasible"
            assert after_raise == feasible
            write("recommend_after_raise.json", after_raise)

            r = client.post("/v1/recommend", json={**BASE_FORM, "cpa_goal": 5.0})
            assert r.status_code == 200 and r.json()["status"] == "infeasible", r.text
            infeasible = r.json()
            write("recommend_infeasible.json", infeasible)

            # "relax CPA goal to C'" from either constrained status; the
            # result must not depend on which budget was in the form
            relaxed_payloads = [
                {**BASE_FORM, "budget": 5000.0, "cpa_goal": limited["adjusted_cpa"]},
                {**BASE_FORM, "cpa_goal": infeasible["adjusted_cpa"]},
            ]
            bodies = []
            for payload in relaxed_payloads:
                r = client.post("/v1/recommend", json=payload)
                assert r.status_code == 200 and r.json()["status"] == "feasible", r.text
                bodies.append(r.json())
            assert bodies[0] == bodies[1]
            write("recommend_relaxed.json", bodies[0])

            r = client.post("/v1/recommend", json={**BASE_FORM, "group": "nope"})
            assert r.status_code == 404, r.text
            write("recommend_unknown_group.json", r.json())

            cases = []
            for overrides in INVALID_FORMS:
                payload = {**BASE_FORM, **overrides}
                r = client.post("/v1/recommend", json=payload)
                assert r.status_code == 400, f"{overrides}: {r.status_code} {r.text}"
                cases.append({"payload": payload, "status": 400, "body": r.json()})
            cases.append({"payload": BASE_FORM, "status": 200})
            write("validation_cases.json", cases)
    return 0


if __name__ == "__main__":
    sys.exit(main())
