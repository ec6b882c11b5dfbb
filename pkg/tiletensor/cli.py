"""
Command-line front end.

field    evaluate B/H over a scene's samplings and write CSV/JSON-lines
verify   compare the analytic field with the quadrature oracles
bench    time single-threaded and parallel evaluation
history  show recent runs from the run log
"""

import argparse
import json
import sys

from tiletensor.pipeline import run_bench, run_field, run_verify
from tiletensor.scene import SceneError
from tiletensor.settings import get_verify_tol
from tiletensor.storage import list_run_log

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VERIFY_FAILED = 2
EXIT_EVALUATION = 3


def _print_json(payload):
    print(json.dumps(payload, ensure_ascii=True, indent=2, default=str))


def _cmd_field(args):
    summary = run_field(args.scene, output=args.output, workers=args.workers, presets_path=args.presets)
    _print_json(summary)
    return EXIT_EVALUATION if summary["errors"] else EXIT_OK


def _cmd_verify(args):
    report = run_verify(
        args.scene,
        oracle=args.oracle,
        tol=args.tol,
        workers=args.workers,
        presets_path=args.presets,
    )
    _print_json(report)
    if report["errors"]:
        print(f"[verify] {report['errors']} point(s) failed to evaluate")
        return EXIT_EVALUATION
    if not report["passed"]:
        print(f"[verify] FAILED at tol {report['tol']:g}")
        return EXIT_VERIFY_FAILED
    print(f"[verify] passed at tol {report['tol']:g}")
    return EXIT_OK


def _cmd_bench(args):
    report = run_bench(args.scene, repeat=args.repeat, workers=args.workers, presets_path=args.presets)
    _print_json(report)
    return EXIT_OK


def _cmd_history(args):
    _print_json(list_run_log(limit=args.limit, command=args.command_filter))
    return EXIT_OK


def _positive_int(value):
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return number


def _non_negative_float(value):
    number = float(value)
    if not number >= 0.0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return number


def build_parser():
    parser = argparse.ArgumentParser(prog="tiletensor", description="Fields of uniformly magnetized cylindrical tiles")
    sub = parser.add_subparsers(dest="command", required=True)

    def _scene_command(name, help_text):
        command = sub.add_parser(name, help=help_text)
        command.add_argument("scene", help="Scene JSON file")
        command.add_argument("--workers", type=_positive_int, default=None, help="Worker processes")
        command.add_argument("--presets", default=None, help="Tile preset YAML (default config/tiles.yaml)")
        return command

    field = _scene_command("field", "Write B/H along the scene's samplings")
    field.add_argument("-o", "--output", default=None, help="Output path (overrides the scene)")
    field.set_defaults(handler=_cmd_field)

    verify = _scene_command("verify", "Compare against the quadrature oracles")
    verify.add_argument("--oracle", choices=("surface", "charge", "both"), default="both")
    verify.add_argument("--tol", type=_non_negative_float, default=None, help=f"Relative tolerance (default {get_verify_tol():g})")
    verify.set_defaults(handler=_cmd_verify)

    bench = _scene_command("bench", "Time field evaluation")
    bench.add_argument("--repeat", type=_positive_int, default=5)
    bench.set_defaults(handler=_cmd_bench)

    history = sub.add_parser("history", help="Show recent runs")
    history.add_argument("--limit", type=_positive_int, default=20)
    history.add_argument("--command", dest="command_filter", choices=("field", "verify", "bench"), default=None)
    history.set_defaults(handler=_cmd_history)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # Usage errors share the validation exit code.
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        return args.handler(args)
    except SceneError as exc:
        print(f"[{args.command}] invalid scene: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
