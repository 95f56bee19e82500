"""Experiment matrix: expand a sweep document, run every (config, seed) pair
and lay the results out on disk.

Output directory layout::

    manifest.json                 resolved configs, PRNG identification, run status
    runs/<config>/seed<N>.csv     one per run (metrics CSV layout)
    events/<config>/seed<N>.ndjson  only with log_events
    aggregate/<config>.csv        mean/min/max over seeds, metric "<flow>.<name>"
    summary.csv                   every aggregate row in one long table
    plot_figures.py               grouped bars with min/max whiskers

Runs are independent, so they may go to a process pool; each worker writes
its own files and the aggregates are computed afterwards in seed order.
"""

import csv
import itertools
import json
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import yaml

from .. import __version__
from ..engine import PRNG_NAME, S
from ..eventlog import replay
from ..metrics import aggregate_seeds, write_aggregate_csv, write_run_csv
from .build import FLOWS, build_scenario
from .config import ConfigError, config_from_document, parse_config, set_path

SUMMARY_COLUMNS = ("config", "stack", "topology", "consumer2StartS", "flow", "metric",
                   "mean", "min", "max", "nRuns")

# metrics checked against the event log replay on every run
REPLAY_CHECKS = ("goodputBps", "meanDelay", "rxBytes", "completionFraction")


def expand_matrix(doc):
    """Configs described by a matrix document.

    Either ``{"configs": [doc, ...]}`` or ``{"base": doc, "sweep": {dotted.key:
    [values]}}``; the sweep is the cartesian product in key order and each
    config is named after its swept values.
    """
    if not isinstance(doc, dict):
        raise ConfigError("matrix document must be a mapping")
    unknown = set(doc) - {"name", "base", "sweep", "configs"}
    if unknown:
        raise ConfigError("unknown key", sorted(unknown)[0])
    if "configs" in doc:
        if "sweep" in doc or "base" in doc:
            raise ConfigError("use either configs or base/sweep", "configs")
        cfgs = []
        for i, item in enumerate(doc["configs"] or []):
            try:
                cfgs.append(config_from_document(item))
            except ConfigError as exc:
                raise ConfigError(str(exc), f"configs.{i}") from None
    else:
        base = doc.get("base") or {}
        sweep = doc.get("sweep") or {}
        if not isinstance(sweep, dict):
            raise ConfigError("must map dotted keys to value lists", "sweep")
        keys = list(sweep)
        for k in keys:
            if not isinstance(sweep[k], list) or not sweep[k]:
                raise ConfigError("must be a non-empty list", f"sweep.{k}")
        prefix = doc.get("name") or base.get("name") or "matrix"
        cfgs = []
        for values in itertools.product(*(sweep[k] for k in keys)):
            data = json.loads(json.dumps(base))
            for k, v in zip(keys, values):
                _put(data, k, v)
            parts = [f"{k.split('.')[-1]}={_label(v)}" for k, v in zip(keys, values)]
            data["name"] = "_".join([prefix] + parts)
            cfgs.append(config_from_document(data))
    if not cfgs:
        raise ConfigError("matrix has no configs")
    names = [c.name for c in cfgs]
    if len(set(names)) != len(names):
        raise ConfigError("config names must be unique", "name")
    return cfgs


def _put(data, dotted, value):
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError("not a section", dotted)
    node[keys[-1]] = value


def _label(v):
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    return str(v)


def is_matrix_document(doc):
    return isinstance(doc, dict) and bool({"sweep", "configs", "base"} & set(doc))


def _safe(name):
    return "".join(ch if ch.isalnum() or ch in "-_=." else "_" for ch in name)


def _run_one(job):
    """Worker body: one (config, seed) run. Never raises."""
    cfg_doc, seed, out, log_events = job
    name = _safe(cfg_doc["name"])
    info = {"seed": seed, "status": "ok", "error": None}
    try:
        cfg = parse_config(cfg_doc)
        inst = build_scenario(cfg, seed, log_events=True)
        res = inst.run()
        csv_path = Path(out, "runs", name, f"seed{seed}.csv")
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        write_run_csv(csv_path, res.records, res.epoch)
        info["csv"] = csv_path.relative_to(out).as_posix()
        if log_events:
            ev_path = Path(out, "events", name, f"seed{seed}.ndjson")
            ev_path.parent.mkdir(parents=True, exist_ok=True)
            res.log.write_ndjson(ev_path)
            info["events"] = ev_path.relative_to(out).as_posix()
        info["replay"] = _replay_check(res, cfg.includeControlInLoss)
        info["completed"] = res.completed
        info["endTimeS"] = (res.end_time - res.epoch) / S
        info["counters"] = res.counters
        info["summaries"] = res.summaries
    except Exception as exc:
        info["status"] = "failed"
        info["error"] = f"{type(exc).__name__}: {exc}"
        info["traceback"] = traceback.format_exc()
    return info


def _replay_check(res, include_control):
    """Compare reported metrics with an independent recount from the log."""
    rp = replay(res.log.records, include_control)
    mismatches = []
    for flow, summary in res.summaries.items():
        other = rp["flows"].get(flow)
        for key in REPLAY_CHECKS:
            theirs = None if other is None else other[key]
            if summary[key] != theirs:
                mismatches.append(f"{flow}.{key}")
        if summary["lossRate"] != rp["lossRate"]:
            mismatches.append(f"{flow}.lossRate")
    return {"match": not mismatches, "mismatches": mismatches}


def run_matrix(cfgs, out, workers=1, log_events=False, seeds=None):
    """Run every (config, seed) pair and write results under ``out``.

    ``seeds`` overrides each config's seed list. A failing run is recorded in
    the manifest and the rest carry on. Returns the manifest dict.
    """
    cfgs = list(cfgs)
    if not cfgs:
        raise ConfigError("run_matrix needs at least one config")
    names = [_safe(c.name) for c in cfgs]
    if len(set(names)) != len(names):
        raise ConfigError("config names must be unique within a matrix", "name")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = []
    for cfg in cfgs:
        for seed in (seeds or cfg.seeds):
            jobs.append((cfg.resolved(), seed, str(out), log_events))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]

    by_cfg = {}
    for (doc, _, _, _), info in zip(jobs, results):
        by_cfg.setdefault(doc["name"], []).append(info)

    manifest = {
        "tool": "adhocsim",
        "version": __version__,
        "prng": PRNG_NAME,
        "timeUnit": "ns internally; CSV times are seconds after the warm-up",
        "configs": [],
        "failures": [],
    }
    summary_rows = []
    (out / "aggregate").mkdir(exist_ok=True)
    for cfg in cfgs:
        runs = by_cfg[cfg.name]
        ok = [r for r in runs if r["status"] == "ok"]
        entry = {"name": cfg.name, "resolved": cfg.resolved(), "runs": []}
        for r in runs:
            entry["runs"].append({k: v for k, v in r.items() if k != "summaries"})
            if r["status"] != "ok":
                manifest["failures"].append({"config": cfg.name, "seed": r["seed"],
                                             "error": r["error"]})
        if ok:
            agg = {}
            for flow in FLOWS:
                flow_agg = aggregate_seeds([r["summaries"][flow] for r in ok])
                for metric, a in flow_agg.items():
                    agg[f"{flow}.{metric}"] = a
                    summary_rows.append([cfg.name, cfg.stack, cfg.topology,
                                         repr(float(cfg.consumer2StartS)), flow, metric,
                                         repr(float(a.mean)), repr(float(a.min)),
                                         repr(float(a.max)), str(a.n_runs)])
            path = out / "aggregate" / f"{_safe(cfg.name)}.csv"
            write_aggregate_csv(path, agg)
            entry["aggregate"] = path.relative_to(out).as_posix()
        manifest["configs"].append(entry)

    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        w.writerows(summary_rows)
    (out / "plot_figures.py").write_text(PLOT_SCRIPT)
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def rerun_manifest(manifest_path, out, workers=1, log_events=False):
    """Run again exactly the configs and seeds recorded in a manifest."""
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    cfgs = []
    seeds = {}
    for entry in manifest["configs"]:
        cfg = parse_config(entry["resolved"])
        seeds[cfg.name] = [r["seed"] for r in entry["runs"]]
        cfgs.append(cfg.with_overrides(seeds=seeds[cfg.name]))
    return run_matrix(cfgs, out, workers, log_events)


def with_overrides(cfg, pairs):
    """Apply ``key=value`` strings (values parsed as YAML scalars)."""
    data = cfg.model_dump()
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} is not key=value")
        key, raw = pair.split("=", 1)
        set_path(data, key.strip(), yaml.safe_load(raw))
    return parse_config(data)


PLOT_SCRIPT = '''"""Plot aggregate results written by adhocsim (needs matplotlib).

Usage: python plot_figures.py [summary.csv] [outdir]

One figure per (topology, stack, flow): grouped bars over consumer-2 start
times with min/max whiskers for delay, hop count, retransmissions, goodput
and loss rate.
"""

import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PANELS = [
    ("meanDelay", "retrieval delay (s)"),
    ("meanHopCount", "hop count"),
    ("meanTxAttempts", "transmissions per packet"),
    ("goodputBps", "goodput (bit/s)"),
    ("lossRate", "loss rate"),
]


def main():
    src = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).with_name("summary.csv"))
    outdir = Path(sys.argv[2] if len(sys.argv) > 2 else src.parent / "figures")
    outdir.mkdir(parents=True, exist_ok=True)
    table = defaultdict(dict)
    with open(src, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["topology"], row["flow"])
            start = float(row["consumer2StartS"])
            table[key].setdefault((row["stack"], start), {})[row["metric"]] = (
                float(row["mean"]), float(row["min"]), float(row["max"]))
    for (topology, flow), cells in sorted(table.items()):
        stacks = sorted({s for s, _ in cells})
        starts = sorted({t for _, t in cells})
        fig, axes = plt.subplots(1, len(PANELS), figsize=(4 * len(PANELS), 3.5))
        width = 0.8 / max(len(stacks), 1)
        for ax, (metric, label) in zip(axes, PANELS):
            for i, stack in enumerate(stacks):
                xs, ys, lo, hi = [], [], [], []
                for j, start in enumerate(starts):
                    v = cells.get((stack, start), {}).get(metric)
                    if v is None:
                        continue
                    xs.append(j + i * width)
                    ys.append(v[0])
                    lo.append(v[0] - v[1])
                    hi.append(v[2] - v[0])
                ax.bar(xs, ys, width, yerr=[lo, hi], capsize=3, label=stack)
            ax.set_xticks([j + width * (len(stacks) - 1) / 2 for j in range(len(starts))])
            ax.set_xticklabels([f"{s:g}" for s in starts])
            ax.set_xlabel("consumer 2 start (s)")
            ax.set_ylabel(label)
        axes[0].legend()
        fig.suptitle(f"{topology} {flow}")
        fig.tight_layout()
        fig.savefig(outdir / f"{topology}_{flow}.png", dpi=120)
        plt.close(fig)


if __name__ == "__main__":
    main()
'''
