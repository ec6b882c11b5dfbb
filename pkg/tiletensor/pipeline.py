"""Batch evaluation of scenes: field maps, oracle verification and timing."""

import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tiletensor.config_loader import load_presets
from tiletensor.geometry import EvalPoint
from tiletensor.oracle import oracle_b_charge, oracle_b_surface
from tiletensor.scene import build_tiles, load_scene
from tiletensor.settings import OUTPUT_DIR, get_verify_tol, get_workers
from tiletensor.storage import append_run_log, sanitize_error_message, write_rows
from tiletensor.tensor import field_at

ORACLES = {
    "surface": oracle_b_surface,
    "charge": oracle_b_charge,
}
COMPONENTS = ("Bx", "By", "Bz")
# Soft single-threaded throughput target, tensor evaluations per second.
BENCH_TARGET_RATE = 2000.0


@dataclass
class PointResult:
    index: int
    point: tuple
    sample: object = None
    error: str | None = None


def _evaluate_one(task):
    index, point, tiles = task
    try:
        sample = field_at(tiles, EvalPoint.of(point))
    except Exception as exc:
        return PointResult(index, tuple(point), error=sanitize_error_message(f"{type(exc).__name__}: {exc}"))
    return PointResult(index, tuple(point), sample=sample)


def _verify_one(task):
    index, point, tiles, oracles = task
    result = _evaluate_one((index, point, tiles))
    if result.error:
        return result, {}
    references = {}
    for name in oracles:
        try:
            references[name] = ORACLES[name](tiles, EvalPoint.of(point))
        except Exception as exc:
            result.error = sanitize_error_message(f"oracle {name}: {type(exc).__name__}: {exc}")
            return result, {}
    return result, references


def _map(function, tasks, workers):
    """Ordered map over ``tasks``; inline when a single worker is requested."""
    if workers <= 1 or len(tasks) <= 1:
        return [function(task) for task in tasks]
    chunksize = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(function, tasks, chunksize=chunksize))


def evaluate_points(tiles, points, workers=None):
    """Field samples for ``points`` (meters), in input order."""
    workers = workers or get_workers()
    tasks = [(index, tuple(float(v) for v in point), tiles) for index, point in enumerate(points)]
    return _map(_evaluate_one, tasks, workers)


def result_row(result, length_scale):
    x, y, z = (v / length_scale for v in result.point)
    row = {"x": x, "y": y, "z": z}
    if result.sample is None:
        row["error"] = result.error
        return row
    sample = result.sample
    row.update(
        {
            "Bx": float(sample.b[0]),
            "By": float(sample.b[1]),
            "Bz": float(sample.b[2]),
            "Hx": float(sample.h[0]),
            "Hy": float(sample.h[1]),
            "Hz": float(sample.h[2]),
            "H_norm": sample.h_norm,
            "inside": sample.inside,
            "on_surface": sample.on_surface,
            "provenance": sample.provenance.value,
            "error": None,
        }
    )
    return row


def output_paths(scene, scene_path, override=None):
    """One output path per sampling; named samplings get a ``_<name>`` suffix."""
    suffix = ".jsonl" if scene.output.format == "jsonl" else ".csv"
    if override:
        base = Path(override)
    elif scene.output.path:
        base = Path(scene.output.path)
    else:
        base = OUTPUT_DIR / f"{Path(scene_path).stem}{suffix}"
    paths = {}
    for name in scene.named_samplings():
        paths[name] = base if not name else base.with_name(f"{base.stem}_{name}{base.suffix or suffix}")
    return paths


def prepare_scene(scene_path, presets_path=None):
    scene = load_scene(scene_path)
    tiles = build_tiles(scene, load_presets(presets_path))
    return scene, tiles


def run_field(scene_path, output=None, workers=None, presets_path=None):
    started = time.perf_counter()
    scene, tiles = prepare_scene(scene_path, presets_path)
    paths = output_paths(scene, scene_path, output)
    written = []
    total_points = 0
    total_errors = 0
    provenance_counts = {}
    for name, points in scene.sample_points().items():
        results = evaluate_points(tiles, points, workers)
        rows = [result_row(result, scene.length_scale) for result in results]
        for result in results:
            if result.error:
                total_errors += 1
                print(f"[field] point {result.index} failed: {result.error}")
            else:
                key = result.sample.provenance.value
                provenance_counts[key] = provenance_counts.get(key, 0) + 1
        path = write_rows(paths[name], rows, scene.output.format)
        written.append(str(path))
        total_points += len(rows)
        print(f"[field] wrote {len(rows)} rows to {path}")
    elapsed = time.perf_counter() - started
    summary = {
        "command": "field",
        "scene": str(scene_path),
        "tiles": len(tiles),
        "points": total_points,
        "errors": total_errors,
        "provenance": provenance_counts,
        "outputs": written,
        "seconds": round(elapsed, 6),
        "outcome": "ok" if total_errors == 0 else "evaluation_errors",
    }
    append_run_log(summary)
    return summary


def _relative_errors(analytic, reference, scale):
    if scale == 0.0:
        return np.zeros(3)
    return np.abs(analytic - reference) / scale


def verify_results(pairs, oracles, tol):
    """Per-oracle, per-component max/mean relative error, normalized by max |B| over the points."""
    ok = [(result, references) for result, references in pairs if not result.error]
    failures = [
        {"index": result.index, "point": list(result.point), "error": result.error}
        for result, _ in pairs
        if result.error
    ]
    scale = max((float(np.linalg.norm(result.sample.b)) for result, _ in ok), default=0.0)
    report = {"points": len(pairs), "errors": len(failures), "tol": tol, "scale_tesla": scale, "oracles": {}}
    passed = not failures and bool(ok)
    for name in oracles:
        errors = np.array([_relative_errors(result.sample.b, refs[name], scale) for result, refs in ok])
        if errors.size == 0:
            errors = np.zeros((0, 3))
        per_component = {}
        for axis, component in enumerate(COMPONENTS):
            column = errors[:, axis]
            per_component[component] = {
                "max": float(column.max()) if column.size else 0.0,
                "mean": float(column.mean()) if column.size else 0.0,
            }
        worst = max((entry["max"] for entry in per_component.values()), default=0.0)
        # Strict comparison: a zero tolerance always fails.
        oracle_passed = worst < tol
        passed = passed and oracle_passed
        report["oracles"][name] = {"components": per_component, "max": worst, "passed": oracle_passed}
    report["passed"] = passed
    report["failures"] = failures[:20]
    return report


def run_verify(scene_path, oracle="both", tol=None, workers=None, presets_path=None):
    started = time.perf_counter()
    tol = get_verify_tol() if tol is None else tol
    oracles = ("surface", "charge") if oracle == "both" else (oracle,)
    scene, tiles = prepare_scene(scene_path, presets_path)
    workers = workers or get_workers()
    pairs = []
    index = 0
    for points in scene.sample_points().values():
        tasks = []
        for point in points:
            tasks.append((index, tuple(float(v) for v in point), tiles, oracles))
            index += 1
        pairs.extend(_map(_verify_one, tasks, workers))
    report = verify_results(pairs, oracles, tol)
    report.update(
        {
            "command": "verify",
            "scene": str(scene_path),
            "oracle": oracle,
            "provenance": _provenance_counts(result for result, _ in pairs),
            "seconds": round(time.perf_counter() - started, 6),
        }
    )
    if report["errors"]:
        outcome = "evaluation_errors"
    else:
        outcome = "passed" if report["passed"] else "failed"
    report["outcome"] = outcome
    append_run_log(
        {
            "command": "verify",
            "scene": str(scene_path),
            "points": report["points"],
            "errors": report["errors"],
            "tol": tol,
            "max_error": {name: entry["max"] for name, entry in report["oracles"].items()},
            "seconds": report["seconds"],
            "outcome": outcome,
        }
    )
    return report


def _provenance_counts(results):
    counts = {}
    for result in results:
        if result.sample is None:
            continue
        key = result.sample.provenance.value
        counts[key] = counts.get(key, 0) + 1
    return counts


def _timed(function):
    started = time.perf_counter()
    function()
    return time.perf_counter() - started


def run_bench(scene_path, repeat=5, workers=None, presets_path=None):
    scene, tiles = prepare_scene(scene_path, presets_path)
    points = np.concatenate(list(scene.sample_points().values()))
    workers = workers or get_workers()
    count = len(points)

    single = [_timed(lambda: evaluate_points(tiles, points, workers=1)) for _ in range(repeat)]
    parallel = [_timed(lambda: evaluate_points(tiles, points, workers=workers)) for _ in range(repeat)]

    def _summary(times):
        total = times[0] if len(times) == 1 else statistics.median(times)
        return {
            "runs": len(times),
            "total_seconds": total,
            "per_point_seconds": total / count,
            "tensor_evaluations_per_second": count * len(tiles) / total if total > 0 else math.inf,
        }

    report = {
        "command": "bench",
        "scene": str(scene_path),
        "points": count,
        "tiles": len(tiles),
        "workers": workers,
        "single_threaded": _summary(single),
        "parallel": _summary(parallel),
    }
    rate = report["single_threaded"]["tensor_evaluations_per_second"]
    report["meets_target"] = rate >= BENCH_TARGET_RATE
    if not report["meets_target"]:
        print(f"[bench] warning: {rate:.0f} tensor evaluations/s single-threaded, target {BENCH_TARGET_RATE:.0f}")
    append_run_log(
        {
            "command": "bench",
            "scene": str(scene_path),
            "points": count,
            "errors": 0,
            "seconds": report["single_threaded"]["total_seconds"],
            "parallel_seconds": report["parallel"]["total_seconds"],
            "outcome": "ok",
        }
    )
    return report


def dump_report(report):
    return json.dumps(report, ensure_ascii=True, indent=2, default=str)
