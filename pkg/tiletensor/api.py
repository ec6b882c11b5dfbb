from typing import Literal

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, ConfigDict, Field

from tiletensor.config_loader import describe_presets, load_presets
from tiletensor.geometry import EvalPoint
from tiletensor.scene import LENGTH_SCALE, SceneError, TileSpec, resolve_tiles
from tiletensor.storage import list_run_log, sanitize_error_message
from tiletensor.tensor import TensorEvaluationError, field_at, tensor_at

app = FastAPI(title="TileTensor API")


class TileQuery(BaseModel):
    model_config = ConfigDict(extra="forbid")

    units: Literal["mm", "m"] = "mm"
    radians: bool = False
    tiles: list[TileSpec] = Field(min_length=1)
    point: tuple[float, float, float]


def _resolve(query):
    try:
        tiles = resolve_tiles(query.tiles, query.units, query.radians, load_presets())
        point = EvalPoint.of([v * LENGTH_SCALE[query.units] for v in query.point])
    except (SceneError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=sanitize_error_message(str(exc))) from exc
    return tiles, point


def _evaluation_failed(exc):
    return HTTPException(status_code=500, detail=sanitize_error_message(str(exc)))


@app.get("/health")
def health():
    return {"status": "ok"}


@app.get("/api/presets")
def presets():
    try:
        return describe_presets()
    except SceneError as exc:
        raise HTTPException(status_code=500, detail=sanitize_error_message(str(exc))) from exc


@app.post("/api/tensor")
def tensor(query: TileQuery):
    tiles, point = _resolve(query)
    results = []
    try:
        for tile in tiles:
            result = tensor_at(tile, point)
            results.append(
                {
                    "n": result.n.tolist(),
                    "provenance": result.provenance.value,
                    "guard": result.guard.as_dict(),
                }
            )
    except TensorEvaluationError as exc:
        raise _evaluation_failed(exc) from exc
    return {"point_m": list(point.as_array()), "tiles": results}


@app.post("/api/field")
def field(query: TileQuery):
    tiles, point = _resolve(query)
    try:
        sample = field_at(tiles, point)
    except TensorEvaluationError as exc:
        raise _evaluation_failed(exc) from exc
    return {
        "point_m": list(point.as_array()),
        "b_tesla": sample.b.tolist(),
        "h_amps_per_meter": sample.h.tolist(),
        "h_norm": sample.h_norm,
        "n": sample.n.tolist(),
        "inside": sample.inside,
        "on_surface": sample.on_surface,
        "provenance": sample.provenance.value,
        "guards": [guard.as_dict() for guard in sample.guards],
    }


@app.get("/api/runs")
def runs(limit: int = Query(50, ge=1, le=500)):
    return list_run_log(limit=limit)
