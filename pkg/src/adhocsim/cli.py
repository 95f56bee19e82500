"""Command line entry point.

Subcommands::

    adhocsim run      --config FILE | --preset NAME   [--seed N] [--out DIR] [--log-events]
    adhocsim matrix   --config FILE | --manifest FILE [--seed N] [--out DIR] [--log-events]
    adhocsim validate --config FILE | --schema
    adhocsim replay   EVENTS.ndjson [--include-control] [--out FILE]

Exit codes: 0 success, 1 configuration error, 2 run failure.
"""

import argparse
import json
import sys

from .engine import S
from .eventlog import read_ndjson, replay
from .scenario.config import (ConfigError, config_schema, load_config, load_document,
                              preset_config)
from .scenario.matrix import (expand_matrix, is_matrix_document, rerun_manifest, run_matrix,
                              with_overrides)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUN = 2


def _parser():
    p = argparse.ArgumentParser(prog="adhocsim", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario for its seeds")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="scenario document (YAML or JSON)")
    src.add_argument("--preset", choices=("controlledGrid", "randomWalk"))
    run.add_argument("--stack", default="ndn", help="stack for --preset")
    run.add_argument("--start", type=float, default=None,
                     help="consumer 2 start time (s) for --preset")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override a dotted config key, e.g. cache.cachePolicy=plru")
    _common(run)

    mat = sub.add_parser("matrix", help="run a sweep of scenarios")
    src = mat.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="matrix document (base + sweep, or configs list)")
    src.add_argument("--manifest", help="rerun the configs and seeds of a manifest.json")
    mat.add_argument("--workers", type=int, default=1)
    _common(mat)

    val = sub.add_parser("validate", help="check a scenario or matrix document")
    src = val.add_mutually_exclusive_group(required=True)
    src.add_argument("--config")
    src.add_argument("--schema", action="store_true", help="print the JSON schema")

    rep = sub.add_parser("replay", help="recompute metrics from an event log")
    rep.add_argument("events", help="newline-delimited JSON event log")
    rep.add_argument("--include-control", action="store_true",
                     help="count control frames in the loss rate")
    rep.add_argument("--out", help="write the JSON result here instead of stdout")
    return p


def _common(p):
    p.add_argument("--seed", type=int, action="append",
                   help="run only this seed (repeatable); default: the config's seeds")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--log-events", action="store_true",
                   help="also write the newline-delimited event log of every run")


def _print_manifest(manifest, out):
    for entry in manifest["configs"]:
        for r in entry["runs"]:
            line = f"{entry['name']} seed={r['seed']} {r['status']}"
            if r["status"] == "ok":
                line += f" end={r['endTimeS']:.1f}s replay={'ok' if r['replay']['match'] else 'MISMATCH'}"
            else:
                line += f" {r['error']}"
            print(line)
    print(f"results in {out}")


def _failed(manifest):
    bad = bool(manifest["failures"])
    for entry in manifest["configs"]:
        for r in entry["runs"]:
            if r["status"] == "ok" and not r["replay"]["match"]:
                bad = True
    return bad


def _cmd_run(args):
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = preset_config(args.preset, args.stack, args.start)
    if args.set:
        cfg = with_overrides(cfg, args.set)
    manifest = run_matrix([cfg], args.out, log_events=args.log_events, seeds=args.seed)
    _print_manifest(manifest, args.out)
    return EXIT_RUN if _failed(manifest) else EXIT_OK


def _cmd_matrix(args):
    if args.manifest:
        try:
            manifest = rerun_manifest(args.manifest, args.out, args.workers, args.log_events)
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot use manifest {args.manifest}: {exc}") from None
    else:
        doc = load_document(args.config)
        cfgs = expand_matrix(doc) if is_matrix_document(doc) else [load_config(args.config)]
        manifest = run_matrix(cfgs, args.out, args.workers, args.log_events, seeds=args.seed)
    _print_manifest(manifest, args.out)
    return EXIT_RUN if _failed(manifest) else EXIT_OK


def _cmd_validate(args):
    if args.schema:
        print(json.dumps(config_schema(), indent=2, sort_keys=True))
        return EXIT_OK
    doc = load_document(args.config)
    if is_matrix_document(doc):
        cfgs = expand_matrix(doc)
    else:
        cfgs = [load_config(args.config)]
    for cfg in cfgs:
        print(f"ok {cfg.name} stack={cfg.stack} topology={cfg.topology} "
              f"consumer2StartS={cfg.consumer2StartS:g} seeds={cfg.seeds}")
    return EXIT_OK


def _cmd_replay(args):
    try:
        records = read_ndjson(args.events)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.events}: {exc.strerror}") from None
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"malformed event log {args.events}: {exc}") from None
    result = replay(records, args.include_control)
    for f in result["flows"].values():
        f["delaysS"] = {str(c): d / S for c, d in sorted(f.pop("delaysNs").items())}
        f["hops"] = {str(c): h for c, h in sorted(f["hops"].items())}
        f["txAttempts"] = {str(c): n for c, n in sorted(f["txAttempts"].items())}
    text = json.dumps(result, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "matrix": _cmd_matrix, "validate": _cmd_validate,
            "replay": _cmd_replay}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
