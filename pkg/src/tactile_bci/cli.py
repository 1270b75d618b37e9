"""Command-line entry point.

Exit codes: 0 success, 1 decoding or replay-verification failure,
2 usage, configuration or file error. Progress goes to stderr; stdout holds
only the results summary.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import evaluation, robot, session_io
from .paradigm import check_command
from .session_io import Config, ConfigError
from .swlda import training_accuracy

log = logging.getLogger("tactile_bci")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _config(args) -> Config:
    config = session_io.load_config(args.config) if args.config else Config()
    changes = dict(session_io.parse_override(item) for item in args.set or ())
    if args.seed is not None:
        changes["seed"] = args.seed
    return config.replace(**changes) if changes else config


def cmd_calibrate(args) -> int:
    config = _config(args)
    record, data, model = session_io.record_calibration(config, args.record_raw)
    model_path = args.model or "model.json"
    out = args.out or "calibration.jsonl"
    session_io.save_model(model, model_path)
    session_io.save_session(record, out)
    print(f"epochs: {data.n} (target {data.n_targets} / nontarget {data.n - data.n_targets}), "
          f"features: {data.n_features}")
    print(f"selected features: {len(model.selected)}")
    print(f"training accuracy: {training_accuracy(model, data):.1%}")
    log.info("model written to %s, session to %s", model_path, out)
    return EXIT_OK


def _load_intents(path) -> list:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read intents file {path}: {e}") from None
    if not isinstance(data, list) or not data:
        raise UsageError(f"{path} must hold a non-empty JSON list of commands")
    intents = []
    for item in data:
        if isinstance(item, str):
            try:
                item = robot.RobotCommand[item.upper()]
            except KeyError:
                raise UsageError(f"unknown command name {item!r} in {path}") from None
        intents.append(check_command(item))
    return intents


def cmd_run(args) -> int:
    model_path = args.model or "model.json"
    if not Path(model_path).is_file():
        raise UsageError(f"model file {model_path} not found; run 'calibrate' first")
    model = session_io.load_model(model_path)
    config = _config(args)
    scripted = args.intents is None
    task = robot.DEFAULT_TASK
    intents = ([int(c) for c in robot.optimal_script(task)] if scripted
               else _load_intents(args.intents))

    record = session_io.record_online(config, model, intents, record_raw=args.record_raw)
    chosen = [r.chosen for r in record.selections]
    trace, success = robot.run_task(task, chosen)
    record.robot_trace = trace
    for i, r in enumerate(record.selections, 1):
        mark = "ok" if r.chosen == r.intended else "MISS"
        print(f"selection {i}: intended {robot.RobotCommand(r.intended).name}, "
              f"decoded {robot.RobotCommand(r.chosen).name} [{mark}] "
              f"-> {trace[i].last_action_effect}")
    if scripted:
        verdict = "SUCCESS in" if success else "FAILURE after"
        print(f"task: {verdict} {len(chosen)} selections")
    metrics = evaluation.summarize(record.selections)
    print(evaluation.format_report(metrics))
    out = args.out or "online.jsonl"
    session_io.save_session(record, out)
    log.info("session written to %s", out)
    if scripted:
        return EXIT_OK if success else EXIT_FAIL
    return EXIT_OK if metrics.n_correct == metrics.n_selections else EXIT_FAIL


def _parse_list(text: str, cast) -> list:
    try:
        return [cast(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse list {text!r}") from None


def cmd_sweep(args) -> int:
    """Accuracy table over ERP amplitude x rounds per selection."""
    config = _config(args)
    amplitudes = _parse_list(args.amplitudes, float)
    rounds_axis = _parse_list(args.rounds, int)
    n = args.selections
    if n < 1 or not amplitudes or not rounds_axis:
        raise UsageError("sweep needs amplitudes, rounds and at least one selection")
    intents = [i % 6 for i in range(n)]
    rows = []
    for amp in amplitudes:
        cfg = config.replace(target_amplitude=amp)
        _, _, model = session_io.record_calibration(cfg)
        for rounds in rounds_axis:
            record = session_io.record_online(cfg, model, intents, rounds=rounds)
            m = evaluation.summarize(record.selections)
            lo, hi = evaluation.clopper_pearson(m.n_correct, m.n_selections, 0.95)
            rows.append({"target_amplitude": amp, "rounds": rounds, "n": m.n_selections,
                         "correct": m.n_correct, "accuracy": m.accuracy,
                         "ci95_low": lo, "ci95_high": hi})
            log.info("amplitude %g, %d rounds: %.1f%%", amp, rounds, 100 * m.accuracy)

    print(f"{'amplitude':>9} {'rounds':>6} {'n':>5} {'accuracy':>8}  95% CI")
    for r in rows:
        print(f"{r['target_amplitude']:>9g} {r['rounds']:>6d} {r['n']:>5d} "
              f"{r['accuracy']:>8.1%}  [{r['ci95_low']:.1%}, {r['ci95_high']:.1%}]")
    out = args.out or "sweep.jsonl"
    header = {"record": "sweep", "format_version": session_io.FORMAT_VERSION,
              "config": config.to_dict(), "seed": config.seed, "amplitudes": amplitudes,
              "rounds": rounds_axis, "selections": n}
    lines = [json.dumps(header)] + [json.dumps({"record": "cell", **r}) for r in rows]
    Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


def _record_arg(args):
    path = args.record or args.out
    if not path:
        raise UsageError("a session record path is required")
    if not Path(path).is_file():
        raise UsageError(f"session record {path} not found")
    return session_io.load_session(path)


def cmd_evaluate(args) -> int:
    record = _record_arg(args)
    if not record.selections:
        raise UsageError("record holds no selections to evaluate")
    metrics = evaluation.summarize(record.selections)
    print(evaluation.format_report(metrics, evaluation.confusion(record.selections)))
    return EXIT_OK


def cmd_replay(args) -> int:
    record = _record_arg(args)
    report = session_io.verify_replay(record)
    print(("OK: " if report.ok else "MISMATCH: ") + report.message)
    return EXIT_OK if report.ok else EXIT_FAIL


COMMANDS = {
    "calibrate": cmd_calibrate,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "evaluate": cmd_evaluate,
    "replay": cmd_replay,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="output file")
    common.add_argument("--model", help="model file (written by calibrate, read by run)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    common.add_argument("--record-raw", action="store_true",
                        help="store raw EEG buffers in the session record")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="tactile-bci", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("calibrate", parents=[common], help="simulate calibration and train SWLDA")
    p = sub.add_parser("run", parents=[common], help="decode the pick-and-move task online")
    p.add_argument("--intents", help="JSON list of intended commands (default: 6-step task)")
    p = sub.add_parser("sweep", parents=[common], help="accuracy over amplitude x rounds")
    p.add_argument("--amplitudes", default="0,1,2,3", help="comma-separated ERP amplitudes (uV)")
    p.add_argument("--rounds", default="1,3,15", help="comma-separated rounds per selection")
    p.add_argument("--selections", type=int, default=200, help="selections per cell")
    for name, text in (("evaluate", "metrics and confusion matrix of a record"),
                       ("replay", "re-run a record and verify it reproduces")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("record", nargs="?", help="session record (default: --out)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
    except (UsageError, OSError, ValueError) as e:
        # SessionIOError and UnsupportedVersionError land here too
        print(f"error: {e}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
