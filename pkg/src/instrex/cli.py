"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 calibration not found, 3 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import sys

from . import metrics
from .channel import ChannelConfig
from .config import ConfigError, dump_operator, load_config
from .operators import CalibrationError, CalibrationTargets, calibrate
from .server import (DEFAULT_TCP_PORT, DEFAULT_WS_PORT, ServerConfig,
                     serve_session)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CALIBRATION = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="instrex",
        description="Deterministic teleoperated instrument-exchange simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the TCP + WebSocket session server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--tcp-port", type=int, default=DEFAULT_TCP_PORT)
    p.add_argument("--ws-port", type=int, default=DEFAULT_WS_PORT)
    p.add_argument("--latency-ms", type=float, default=0.0)
    p.add_argument("--jitter-ms", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None)

    p = sub.add_parser("run", help="run a scripted trial batch headlessly")
    p.add_argument("--task", choices=("attach", "detach", "cycle"),
                   required=True)
    p.add_argument("--operator", choices=("expert", "novice"), required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="JSON-lines log path")
    p.add_argument("--config", default=None)

    p = sub.add_parser("report", help="render CSV/plain-text reports")
    p.add_argument("--in", dest="log_in", required=True)
    p.add_argument("--out", dest="out_dir", required=True)

    p = sub.add_parser("calibrate",
                       help="grid-search operator params against target times")
    p.add_argument("--targets", default=None,
                   help="structured-text targets file ([targets] section)")
    p.add_argument("--out", default=None,
                   help="write report + chosen params here (default stdout)")
    p.add_argument("--config", default=None)
    return parser


def _load_targets(path: str | None) -> CalibrationTargets:
    if path is None:
        return CalibrationTargets()
    parser = configparser.ConfigParser()
    if not parser.read(path, encoding="utf-8"):
        raise ConfigError(f"targets file not found: {path}")
    sec = parser["targets"] if parser.has_section("targets") else {}
    fields = {f.name: f for f in dataclasses.fields(CalibrationTargets)}
    kwargs = {}
    for key, raw in dict(sec).items():
        if key not in fields:
            raise ConfigError(f"unknown target key {key!r}")
        kwargs[key] = int(raw) if key in ("trials", "seed") else float(raw)
    return CalibrationTargets(**kwargs)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(name)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    try:
        setup = load_config(getattr(args, "config", None))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.command == "serve":
        setup.channel = ChannelConfig(args.latency_ms, args.jitter_ms,
                                      setup.channel.drop_rate, args.seed)
        cfg = ServerConfig(host=args.host, tcp_port=args.tcp_port,
                           ws_port=args.ws_port, setup=setup)
        try:
            serve_session(cfg)
        except KeyboardInterrupt:
            pass
        return EXIT_OK

    if args.command == "run":
        if args.trials < 1:
            print("error: --trials must be >= 1", file=sys.stderr)
            return EXIT_USAGE
        params = setup.operator(args.operator)
        records, summary = metrics.run_batch(
            args.task, params, args.trials, args.seed,
            scene_cfg=setup.scene, mech=setup.mech)
        try:
            metrics.write_log(records, args.out)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"{args.trials} {args.task} trials ({args.operator}): "
              f"success {summary.p_success:.1f}%, log -> {args.out}")
        return EXIT_OK

    if args.command == "report":
        try:
            records, errors = metrics.read_log(args.log_in)
        except OSError as exc:
            print(f"error: cannot read {args.log_in}: {exc}", file=sys.stderr)
            return EXIT_IO
        for err in errors:
            print(f"warning: {args.log_in}:{err.line_number}: {err.reason}",
                  file=sys.stderr)
        if not records:
            print("error: no readable records", file=sys.stderr)
            return EXIT_USAGE
        try:
            paths = metrics.report(records, args.out_dir)
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return EXIT_IO
        for name, path in sorted(paths.items()):
            print(f"{name}: {path}")
        return EXIT_OK

    if args.command == "calibrate":
        try:
            targets = _load_targets(args.targets)
        except (ConfigError, KeyError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        try:
            result = calibrate(targets, scene_cfg=setup.scene,
                               mech=setup.mech)
        except CalibrationError as exc:
            print(f"calibration failed: {exc}", file=sys.stderr)
            return EXIT_CALIBRATION
        text = (result.report + "\n" + dump_operator(result.expert) + "\n"
                + dump_operator(result.novice))
        if args.out:
            try:
                with open(args.out, "w", encoding="utf-8") as f:
                    f.write(text)
            except OSError as exc:
                print(f"error: cannot write {args.out}: {exc}",
                      file=sys.stderr)
                return EXIT_IO
        else:
            print(text)
        return EXIT_OK

    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
