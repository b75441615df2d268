"""HTTP JSON API over the store, landscapes, and the optimizer.

All payloads are JSON with stable field names. Validation failures return
400 with {"errors": [{"field", "message"}]}; unknown groups return 404 with
{"error": ...}. Model reads go through the store on every request, so a
concurrent rebuild is picked up atomically (the store writes whole files
into place).
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .auction_log import GroupingKey, parse_log
from .errors import (
    BidscapeError,
    EmptyLandscapeError,
    ModelIntegrityError,
    ModelNotFoundError,
)
from .landscape import DEFAULT_BIN_SIZE, DEFAULT_MAX_ECPM, build_landscapes
from .optimizer import CampaignInputs, CpaGoal, bid_grid, curve_points, recommend_bid
from .store import ModelStore


class RecommendRequest(BaseModel):
    group: str
    impressions: float
    pctr: float
    pcvr: float
    cpa_goal: float
    budget: float
    tolerance: float = 0.05


class BuildRequest(BaseModel):
    group_by: str = "by_context"
    bin_size: float = DEFAULT_BIN_SIZE
    max_ecpm: float = DEFAULT_MAX_ECPM


def _field_errors(errors: list[tuple[str, str]]) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"errors": [{"field": f, "message": m} for f, m in errors]},
    )


def _validate_recommend(req: RecommendRequest) -> list[tuple[str, str]]:
    errors = []
    if not req.group:
        errors.append(("group", "group must be non-empty"))
    if not req.impressions > 0:
        errors.append(("impressions", "impressions must be positive"))
    if not req.pctr > 0:
        errors.append(("pctr", "pctr must be positive"))
    elif req.pctr > 1:
        errors.append(("pctr", "pctr must be at most 1"))
    if not req.pcvr > 0:
        errors.append(("pcvr", "pcvr must be positive"))
    elif req.pcvr > 1:
        errors.append(("pcvr", "pcvr must be at most 1"))
    if not req.cpa_goal > 0:
        errors.append(("cpa_goal", "cpa_goal must be positive"))
    if not req.budget > 0:
        errors.append(("budget", "budget must be positive"))
    if req.tolerance < 0:
        errors.append(("tolerance", "tolerance must be non-negative"))
    return errors


def create_app(store: ModelStore, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="bidscape", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        errors = []
        for e in exc.errors():
            loc = [str(part) for part in e.get("loc", []) if part != "body"]
            errors.append((".".join(loc) or "body", e.get("msg", "invalid value")))
        return _field_errors(errors)

    @app.exception_handler(ModelNotFoundError)
    async def on_model_not_found(request: Request, exc: ModelNotFoundError):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(BidscapeError)
    async def on_bidscape_error(request: Request, exc: BidscapeError):
        status = 500 if isinstance(exc, ModelIntegrityError) else 400
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.get("/v1/health")
    async def health() -> dict:
        return {"status": "ok"}

    @app.post("/v1/logs")
    async def ingest_logs(request: Request, fmt: str = Query(default="jsonl")):
        if fmt not in ("jsonl", "csv"):
            return _field_errors([("fmt", "fmt must be 'jsonl' or 'csv'")])
        body = (await request.body()).decode("utf-8", errors="replace")
        result = parse_log(body, fmt=fmt)
        if result.snapshots:
            store.append_log(result.snapshots)
        return {
            "accepted": len(result.snapshots),
            "rejected": len(result.errors),
            "errors": [{"line": e.line, "reason": e.reason} for e in result.errors],
        }

    @app.post("/v1/landscape/build")
    async def build(req: BuildRequest):
        try:
            key = GroupingKey(req.group_by)
        except ValueError:
            return _field_errors(
                [("group_by", f"group_by must be one of {[k.value for k in GroupingKey]}")]
            )
        errors = []
        if not req.bin_size > 0:
            errors.append(("bin_size", "bin_size must be positive"))
        if not req.max_ecpm > 0:
            errors.append(("max_ecpm", "max_ecpm must be positive"))
        if errors:
            return _field_errors(errors)
        snapshots = list(store.iter_log_snapshots())
        if not snapshots:
            return _field_errors([("logs", "no ingested snapshots to build from")])
        built = build_landscapes(
            snapshots, key=key, bin_size=req.bin_size, max_ecpm=req.max_ecpm
        )
        store.save_all(built.values())
        return {"groups": sorted(built)}

    @app.get("/v1/landscape")
    async def list_groups():
        return {"groups": store.groups()}

    @app.get("/v1/landscape/{group}/curves")
    async def curves(
        group: str,
        from_: float = Query(alias="from"),
        to: float = Query(),
        step: float = Query(),
        pctr: float = Query(),
        pcvr: float = Query(),
        impressions: float = Query(default=1.0),
    ):
        errors = []
        if not step > 0:
            errors.append(("step", "step must be positive"))
        if to < from_:
            errors.append(("to", "to must be >= from"))
        if not 0 < pctr <= 1:
            errors.append(("pctr", "pctr must be in (0, 1]"))
        if not 0 < pcvr <= 1:
            errors.append(("pcvr", "pcvr must be in (0, 1]"))
        if not impressions > 0:
            errors.append(("impressions", "impressions must be positive"))
        if errors:
            return _field_errors(errors)
        landscape = store.load(group)
        inputs = CampaignInputs(impressions=impressions, pctr=pctr, pcvr=pcvr)
        points = curve_points(landscape, inputs, bid_grid(from_, to, step))
        return {"group": group, "bin_size": landscape.bin_size, "points": points}

    @app.post("/v1/recommend")
    async def recommend(req: RecommendRequest):
        errors = _validate_recommend(req)
        if errors:
            return _field_errors(errors)
        landscape = store.load(req.group)
        inputs = CampaignInputs(
            impressions=req.impressions, pctr=req.pctr, pcvr=req.pcvr
        )
        goal = CpaGoal(
            target_cpa=req.cpa_goal, budget=req.budget, tolerance=req.tolerance
        )
        try:
            rec = recommend_bid(landscape, inputs, goal)
        except EmptyLandscapeError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        return {"group": req.group, **rec.to_dict()}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
