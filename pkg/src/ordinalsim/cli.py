"""Command-line front end.

Subcommands
-----------
fit         fit one model to a delimited table with a ``y`` column
simulate    run (part of) the scenario grid and write CSV artifacts
report      turn simulate artifacts into plot-ready tables and a digest
grid        print the scenario count, per-DGP breakdown or the full list
thresholds  print the threshold reference table

Exit codes: 0 success, 1 fit did not converge, 2 validation error,
3 I/O error, 4 resume mismatch.
"""

import argparse
import csv
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, fields

import numpy as np

from . import __version__, kernels
from .artifacts import (
    REPLICATION_COLUMNS,
    SCENARIO_COLUMNS,
    SUMMARY_COLUMNS,
    ArtifactError,
    config_hash,
    fmt,
    format_replication,
    load_replications,
    parse_scenario_row,
    parse_summary_row,
    read_csv,
    read_json,
    write_csv,
    write_json,
)
from .datagen import target_distribution, thresholds_for
from .estimation import FitOptions, FitStatus, fit_model
from .models import Dataset, ModelKind
from .reporting import (
    ALPHA_COLUMNS,
    BIAS_COLUMNS,
    CORRELATION_COLUMNS,
    POWER_COLUMNS,
    alpha_table,
    bias_table,
    correlation_table,
    headline,
    power_table,
)
from .scenarios import (
    REFERENCE_GRID_COUNT,
    GridConfig,
    ScenarioSpec,
    ThetaSetting,
    enumerate_grid,
    grid_breakdown,
)
from .simulation import MODELS, aggregate, convergence_summary, iter_replications, rows_per_replication

log = logging.getLogger("ordinalsim")

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_RESUME = 4

THRESHOLD_COLUMNS = ("k", "theta_setting", "category", "probability", "threshold")
CONVERGENCE_COLUMNS = ("scenario_id", "model", "n_reps", "n_converged", "convergence_rate",
                       *("n_" + s.value for s in FitStatus if s is not FitStatus.CONVERGED),
                       "mean_observation_redraws", "total_dataset_redraws",
                       "max_dataset_redraws", "n_generation_aborted")


class CliError(Exception):
    def __init__(self, message, code=EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------- configuration

def _ints(text):
    return tuple(int(v) for v in _items(text))


def _floats(text):
    return tuple(float(v) for v in _items(text))


def _items(text):
    return [v.strip() for v in str(text).split(",") if v.strip()]


def _threads(text):
    if str(text).lower() == "auto":
        return "auto"
    return int(text)


# key -> parser; keys double as --config keys and (mostly) as flags
CONFIG_KEYS = {
    "reps": int,
    "alpha": float,
    "seed": int,
    "threads": _threads,
    "out_dir": str,
    "filter": str,
    "models": lambda t: tuple(m.upper() for m in _items(t)),
    "n_values": _ints,
    "p_values": _ints,
    "k_values": _ints,
    "informative_values": _ints,
    "effect_grid": _floats,
    "pair_values": _floats,
    "theta_settings": lambda t: tuple(ThetaSetting.parse(v).value for v in _items(t)),
    "dgps": lambda t: tuple(ModelKind.parse(v).value for v in _items(t)),
    "skew_floor": float,
    "unstructured_factor": float,
    "monotone_check": str,
    "max_iterations": int,
}
_ALIASES = {"master_seed": "seed", "out-dir": "out_dir"}


@dataclass(frozen=True)
class RunConfig:
    reps: int = 2000
    alpha: float = 0.05
    seed: int = 20240001
    threads: object = "auto"
    out_dir: str = "ordinalsim-run"
    filter: str = ""
    models: tuple = MODELS
    n_values: tuple = GridConfig.n_values
    p_values: tuple = GridConfig.p_values
    k_values: tuple = GridConfig.k_values
    informative_values: tuple = GridConfig.informative_values
    effect_grid: tuple = GridConfig.effect_grid
    pair_values: tuple = GridConfig.pair_values
    theta_settings: tuple = tuple(t.value for t in GridConfig.theta_settings)
    dgps: tuple = tuple(d.value for d in GridConfig.dgps)
    skew_floor: float = 0.06
    unstructured_factor: float = 2.2
    monotone_check: str = "centroid"
    max_iterations: int = 100

    def validate(self):
        if self.reps < 1:
            raise CliError("reps must be at least 1")
        if not 0 < self.alpha < 1:
            raise CliError("alpha must lie in (0, 1)")
        if self.threads != "auto" and self.threads < 1:
            raise CliError("threads must be a positive integer or 'auto'")
        if not self.models:
            raise CliError("models must name at least one model")
        bad = [m for m in self.models if m not in MODELS]
        if bad:
            raise CliError(f"unknown model(s) {bad}; choose from {', '.join(MODELS)}")
        if len(set(self.models)) != len(self.models):
            raise CliError("models must not repeat")
        try:
            self.fit_options()
            self.grid().validate()
        except ValueError as exc:
            raise CliError(str(exc)) from None
        parse_filter(self.filter)

    def grid(self):
        return GridConfig(self.n_values, self.p_values, self.k_values, self.informative_values,
                          self.effect_grid, self.pair_values,
                          tuple(ThetaSetting.parse(t) for t in self.theta_settings),
                          tuple(ModelKind.parse(d) for d in self.dgps), self.seed,
                          self.skew_floor, self.unstructured_factor)

    def fit_options(self):
        return FitOptions(max_iterations=self.max_iterations, monotone_check=self.monotone_check)

    def worker_count(self):
        if self.threads != "auto":
            return self.threads
        try:
            return max(1, len(os.sched_getaffinity(0)))
        except AttributeError:  # pragma: no cover - non-Linux
            return max(1, os.cpu_count() or 1)

    def identity(self):
        """Fields that change results; hashed to guard resumed runs."""
        out = {}
        for f in fields(self):
            if f.name in ("threads", "out_dir"):
                continue
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


def read_config_file(path):
    """``key = value`` lines; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror}", EXIT_IO) from None
    values = {}
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{no}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in CONFIG_KEYS:
            raise CliError(f"{path}:{no}: unknown key {key!r}")
        values[key] = _convert(key, value, f"{path}:{no}")
    return values


def _convert(key, value, where):
    try:
        return CONFIG_KEYS[key](value)
    except ValueError as exc:
        raise CliError(f"{where}: bad value for {key}: {exc}") from None


def build_config(args):
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = _convert(key, flag, "--" + key.replace("_", "-"))
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:  # pragma: no cover - keys are checked above
        raise CliError(str(exc)) from None
    cfg.validate()
    return cfg


_SCENARIO_FIELDS = {f.name for f in fields(ScenarioSpec)}


def parse_filter(text):
    """``key=value,key=v1|v2`` into a criteria dict for :meth:`ScenarioSpec.matches`."""
    crit = {}
    for part in _items(text or ""):
        if "=" not in part:
            raise CliError(f"filter term {part!r} is not key=value")
        key, value = (s.strip() for s in part.split("=", 1))
        if key not in _SCENARIO_FIELDS:
            raise CliError(f"filter key {key!r} is not a scenario field "
                           f"({', '.join(sorted(_SCENARIO_FIELDS))})")
        alts = [v.strip() for v in value.split("|")]
        crit[key] = alts if len(alts) > 1 else alts[0]
    return crit


def select_scenarios(cfg):
    grid = enumerate_grid(cfg.grid())
    crit = parse_filter(cfg.filter)
    chosen = [s for s in grid if s.matches(**crit)]
    return grid, chosen


# ---------------------------------------------------------------- grid / thresholds

def threshold_rows(k_values=(3, 5, 7), settings=tuple(ThetaSetting), skew_floor=0.06,
                   unstructured_factor=2.2):
    rows = []
    for k in k_values:
        for setting in settings:
            setting = ThetaSetting.parse(setting)
            kw = dict(skew_floor=skew_floor, unstructured_factor=unstructured_factor)
            th = thresholds_for(k, setting, **kw)
            pr = target_distribution(k, setting, **kw)
            for r in range(k):
                rows.append({"k": k, "theta_setting": setting.value, "category": r + 1,
                             "probability": pr[r], "threshold": th[r] if r < k - 1 else None})
    return rows


def cmd_grid(args):
    cfg = build_config(args)
    grid, chosen = select_scenarios(cfg)
    if args.list:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(SCENARIO_COLUMNS)
        for s in chosen:
            row = s.as_row()
            w.writerow([fmt(row[c]) for c in SCENARIO_COLUMNS])
        return EXIT_OK
    print(f"total scenarios: {len(grid)}")
    for dgp, count in grid_breakdown(grid).items():
        print(f"  {dgp}: {count}")
    print(f"reference count: {REFERENCE_GRID_COUNT} (deviation {len(grid) - REFERENCE_GRID_COUNT:+d})")
    if cfg.filter:
        print(f"selected by filter: {len(chosen)}")
    return EXIT_OK


def cmd_thresholds(args):
    cfg = build_config(args)
    rows = threshold_rows(cfg.k_values, cfg.theta_settings, cfg.skew_floor,
                          cfg.unstructured_factor)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(THRESHOLD_COLUMNS)
    for r in rows:
        w.writerow([fmt(r[c]) for c in THRESHOLD_COLUMNS])
    return EXIT_OK


# ---------------------------------------------------------------- simulate

def _grid_note(count, default_grid):
    if count == REFERENCE_GRID_COUNT:
        return "enumerated count agrees with the reference count"
    text = (f"enumerated count {count} differs from the reference count {REFERENCE_GRID_COUNT} "
            f"by {count - REFERENCE_GRID_COUNT:+d}")
    if default_grid:
        text += ("; here zero-effect cells appear once per (dgp, n, p, k, theta) and "
                 "category-specific data exist only for k in {5, 7}")
    return text


def _ensure_out_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {path}: {exc.strerror}", EXIT_IO) from None
    if not os.access(path, os.W_OK | os.X_OK):
        raise CliError(f"output directory {path} is not writable", EXIT_IO)


def _check_resume(out_dir, cfg, digest):
    manifest = os.path.join(out_dir, "manifest.json")
    reps = os.path.join(out_dir, "replications.csv")
    if os.path.exists(manifest):
        try:
            old = read_json(manifest)
        except (ValueError, ArtifactError) as exc:
            raise CliError(f"unreadable manifest {manifest}: {exc}", EXIT_RESUME) from None
        if old.get("config_hash") != digest:
            prev = old.get("config", {})
            now = cfg.identity()
            diff = sorted(k for k in set(prev) | set(now) if prev.get(k) != now.get(k))
            raise CliError(
                f"{out_dir} holds a run with a different configuration "
                f"(differs in: {', '.join(diff) or 'unknown fields'}); "
                "use another --out-dir or the original settings", EXIT_RESUME)
        return True
    if os.path.exists(reps):
        raise CliError(f"{reps} exists without a manifest; refusing to mix runs", EXIT_RESUME)
    return False


def cmd_simulate(args):
    cfg = build_config(args)
    start = time.perf_counter()
    grid, chosen = select_scenarios(cfg)
    if not chosen:
        raise CliError(f"filter {cfg.filter!r} matches no scenario")
    out = cfg.out_dir
    _ensure_out_dir(out)
    digest = config_hash(cfg.identity())
    resumed = _check_resume(out, cfg, digest)
    default_grid = cfg.grid() == GridConfig(master_seed=cfg.seed)
    manifest = {
        "tool": "ordinalsim",
        "version": __version__,
        "status": "running",
        "config": cfg.identity(),
        "config_hash": digest,
        "master_seed": cfg.seed,
        "kernel_backend": kernels.BACKEND,
        "grid": {
            "count": len(grid),
            "breakdown": grid_breakdown(grid),
            "selected": len(chosen),
            "reference_count": REFERENCE_GRID_COUNT,
            "deviation": len(grid) - REFERENCE_GRID_COUNT,
            "default_grid": default_grid,
            "note": _grid_note(len(grid), default_grid),
        },
    }
    paths = {name: os.path.join(out, name) for name in (
        "scenarios.csv", "replications.csv", "summary.csv", "convergence.csv",
        "thresholds.csv", "manifest.json")}
    try:
        write_json(paths["manifest.json"], manifest)
        write_csv(paths["scenarios.csv"], SCENARIO_COLUMNS, (s.as_row() for s in chosen))
        write_csv(paths["thresholds.csv"], THRESHOLD_COLUMNS,
                  threshold_rows(sorted(set(cfg.k_values)), cfg.theta_settings,
                                 cfg.skew_floor, cfg.unstructured_factor))
        expected = {s.scenario_id: rows_per_replication(s, cfg.models) for s in chosen}
        existing = load_replications(paths["replications.csv"], expected) if resumed else []
        done = {(r.scenario_id, r.rep_index) for r in existing}
        # keep only complete replications before appending
        with open(paths["replications.csv"], "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(REPLICATION_COLUMNS) + "\n")
            for rec in existing:
                fh.writelines(format_replication(rec))
        tasks = [(s, [r for r in range(cfg.reps) if (s.scenario_id, r) not in done])
                 for s in chosen]
        todo = sum(len(t[1]) for t in tasks)
        log.info("%d scenarios, %d replications to run (%d already on disk), %d worker(s)",
                 len(chosen), todo, len(done), cfg.worker_count())
        finished = 0
        with open(paths["replications.csv"], "a", encoding="utf-8", newline="") as fh:
            for rec in iter_replications(tasks, cfg.models, cfg.alpha, cfg.fit_options(),
                                         cfg.worker_count()):
                fh.writelines(format_replication(rec))
                fh.flush()
                finished += 1
                if finished % 500 == 0:
                    log.info("%d / %d replications", finished, todo)
        _finalize(paths, cfg, chosen, expected, manifest, time.perf_counter() - start)
    except OSError as exc:
        raise CliError(f"I/O error: {exc}", EXIT_IO) from None
    print(f"wrote {len(chosen)} scenario(s) x {cfg.reps} replication(s) to {out}")
    return EXIT_OK


def _finalize(paths, cfg, chosen, expected, manifest, wall):
    """Rewrite replications in canonical order and derive summary and convergence.

    Aggregates are computed from the rows as stored, so a resumed run and an
    uninterrupted one produce the same bytes.
    """
    records = load_replications(paths["replications.csv"], expected)
    tmp = paths["replications.csv"] + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(REPLICATION_COLUMNS) + "\n")
        for rec in records:
            fh.writelines(format_replication(rec))
    os.replace(tmp, paths["replications.csv"])
    records = load_replications(paths["replications.csv"], expected)
    metrics = aggregate(records, n_reps=cfg.reps)
    n_summary = write_csv(paths["summary.csv"], SUMMARY_COLUMNS,
                          (m.__dict__ for m in metrics))
    n_conv = write_csv(paths["convergence.csv"], CONVERGENCE_COLUMNS,
                       convergence_summary(records))
    manifest = dict(manifest)
    manifest.update({
        "status": "complete",
        "wall_time_seconds": round(wall, 3),
        "rows": {
            "scenarios.csv": len(chosen),
            "replications.csv": sum(len(r.params) for r in records),
            "summary.csv": n_summary,
            "convergence.csv": n_conv,
        },
    })
    write_json(paths["manifest.json"], manifest)


# ---------------------------------------------------------------- report

def load_run(out_dir):
    """Scenarios, aggregate metrics and manifest of a (possibly partial) run."""
    spath = os.path.join(out_dir, "scenarios.csv")
    mpath = os.path.join(out_dir, "summary.csv")
    rpath = os.path.join(out_dir, "replications.csv")
    scenarios = {s.scenario_id: s for s in map(parse_scenario_row, read_csv(spath))}
    manifest = read_json(os.path.join(out_dir, "manifest.json"))
    if os.path.exists(mpath) and manifest.get("status") == "complete":
        metrics = [parse_summary_row(r) for r in read_csv(mpath)]
    elif os.path.exists(rpath):
        models = manifest.get("config", {}).get("models", MODELS)
        expected = {sid: rows_per_replication(s, models) for sid, s in scenarios.items()}
        metrics = aggregate(load_replications(rpath, expected))
    else:
        raise ArtifactError(f"missing artifact: {mpath} (and no {rpath} to rebuild it from)")
    return scenarios, metrics, manifest


def cmd_report(args):
    out = args.out_dir or RunConfig.out_dir
    try:
        scenarios, metrics, manifest = load_run(out)
    except ArtifactError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    except (KeyError, ValueError) as exc:
        raise CliError(f"unreadable artifact in {out}: {exc}", EXIT_IO) from None
    tables = (
        ("alpha_table.csv", ALPHA_COLUMNS, alpha_table(scenarios, metrics)),
        ("power_table.csv", POWER_COLUMNS, power_table(scenarios, metrics)),
        ("bias_table.csv", BIAS_COLUMNS, bias_table(scenarios, metrics)),
        ("bias_correlation.csv", CORRELATION_COLUMNS, correlation_table(scenarios, metrics)),
    )
    text = headline(scenarios, metrics, manifest)
    try:
        for name, cols, rows in tables:
            write_csv(os.path.join(out, name), cols, rows)
        with open(os.path.join(out, "headline.txt"), "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"I/O error: {exc}", EXIT_IO) from None
    sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- fit

def read_table(path, delimiter=None, k=None):
    """Parse a delimited table into ``(Dataset, covariate names)``.

    Raises :class:`CliError` naming the offending line and column.
    """
    if delimiter is None:
        delimiter = "\t" if path.endswith((".tsv", ".tab")) else ","
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh, delimiter=delimiter))
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None
    except (UnicodeDecodeError, csv.Error) as exc:
        raise CliError(f"{path}: malformed table: {exc}") from None
    rows = [(no, r) for no, r in enumerate(rows, 1) if any(c.strip() for c in r)]
    if not rows:
        raise CliError(f"{path}: empty table")
    header = [h.strip() for h in rows[0][1]]
    if "y" not in header:
        raise CliError(f"{path}: line {rows[0][0]}: no 'y' column in header {header}")
    if len(set(header)) != len(header):
        raise CliError(f"{path}: line {rows[0][0]}: duplicate column names")
    yi = header.index("y")
    names = [h for i, h in enumerate(header) if i != yi]
    if not names:
        raise CliError(f"{path}: need at least one covariate column besides 'y'")
    body = rows[1:]
    if not body:
        raise CliError(f"{path}: no data rows")
    y = np.empty(len(body), dtype=np.int64)
    X = np.empty((len(body), len(names)))
    for i, (no, r) in enumerate(body):
        if len(r) != len(header):
            raise CliError(f"{path}: line {no}: expected {len(header)} fields, got {len(r)}")
        cells = [c.strip() for c in r]
        try:
            yv = float(cells[yi])
        except ValueError:
            raise CliError(f"{path}: line {no}, column 'y': {cells[yi]!r} is not a number") from None
        if not yv.is_integer():
            raise CliError(f"{path}: line {no}, column 'y': {cells[yi]!r} is not an integer")
        y[i] = int(yv)
        j = 0
        for c, (h, v) in enumerate(zip(header, cells)):
            if c == yi:
                continue
            try:
                X[i, j] = float(v)
            except ValueError:
                raise CliError(f"{path}: line {no}, column {h!r}: {v!r} is not a number") from None
            if not math.isfinite(X[i, j]):
                raise CliError(f"{path}: line {no}, column {h!r}: {v!r} is not finite")
            j += 1
    kk = int(y.max()) if k is None else int(k)
    bad = np.flatnonzero((y < 1) | (y > kk))
    if bad.size:
        no = body[bad[0]][0]
        raise CliError(f"{path}: line {no}, column 'y': outcome {y[bad[0]]} outside 1..{kk}")
    return y, X, kk, names


def _labels_for(model, labels, names):
    out = []
    for block, cov, cat in labels:
        if block == "threshold":
            out.append(f"theta[{cat}]")
        elif block == "intercept":
            out.append("(Intercept)")
        elif block == "location":
            out.append(f"beta[{names[cov - 1]}]")
        elif block == "category":
            out.append(f"beta[{names[cov - 1]},{cat}]")
        else:
            out.append(f"gamma[{names[cov - 1]}]")
    return out


def cmd_fit(args):
    model = args.model.upper()
    if model not in MODELS:
        raise CliError(f"unknown model {args.model!r}; choose from {', '.join(MODELS)}")
    if not 0 < args.alpha < 1:
        raise CliError("alpha must lie in (0, 1)")
    y, X, k, names = read_table(args.input, args.delimiter, args.k)
    if model != "LM" and k < 3:
        raise CliError(f"{args.input}: column 'y': ordinal models need k >= 3 categories, got {k}")
    if model == "LM" and len(y) <= X.shape[1] + 1:
        raise CliError(f"{args.input}: linear model needs more rows than covariates + 1")
    data = Dataset(y, X, k)
    fit = fit_model(model, data, FitOptions(monotone_check=args.monotone_check))
    labels = _labels_for(model, fit.labels, names)
    est = fit.estimates
    tests = fit.tests(args.alpha) if fit.converged else None
    ref = "t(%d)" % fit.df if model == "LM" else "normal"
    print(f"model: {model}  n: {data.n}  p: {data.p}  k: {k}  reference: {ref}")
    width = max(12, max(len(s) for s in labels) + 2)
    print("%-*s %14s %14s %12s %12s" % (width, "parameter", "estimate", "std_error",
                                       "statistic", "p_value"))
    for i, name in enumerate(labels):
        e = "NA" if est is None else "%.8g" % est[i]
        if tests is None:
            print("%-*s %14s %14s %12s %12s" % (width, name, e, "NA", "NA", "NA"))
        else:
            t = tests[i]
            print("%-*s %14s %14.8g %12.6g %12.6g" % (width, name, e, t.std_error, t.statistic,
                                                      t.p_value))
    print(f"status: {fit.status.value}  iterations: {fit.iterations}  "
          f"log_likelihood: {fit.log_likelihood:.10g}")
    return EXIT_OK if fit.converged else EXIT_NOT_CONVERGED


# ---------------------------------------------------------------- entry point

def _run_options():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--reps", help="replications per scenario (default 2000)")
    p.add_argument("--seed", help="master seed (default 20240001)")
    p.add_argument("--alpha", help="test level (default 0.05)")
    p.add_argument("--threads", help="worker processes or 'auto' (default)")
    p.add_argument("--out-dir", dest="out_dir", help="artifact directory")
    p.add_argument("--filter", help="scenario filter, e.g. dgp=PO,n=250|500,k=3")
    p.add_argument("--models", help="comma-separated subset of LM,PO,CSO,LSH,LSC")
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="ordinalsim", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _run_options()

    f = sub.add_parser("fit", help="fit one model to a delimited table")
    f.add_argument("input", help="table with a 'y' column (1..k) and numeric covariates")
    f.add_argument("--model", required=True, help="LM, PO, CSO, LSH or LSC")
    f.add_argument("--k", type=int, help="number of categories (default: max of y)")
    f.add_argument("--alpha", type=float, default=0.05)
    f.add_argument("--delimiter", help="field separator (default ',' or tab for .tsv)")
    f.add_argument("--monotone-check", dest="monotone_check", default="centroid",
                   choices=("centroid", "observations", "none"))
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("simulate", parents=[common], help="run scenarios, write CSV artifacts")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="tables and digest from simulate artifacts")
    r.add_argument("--out-dir", dest="out_dir", help="artifact directory of a simulate run")
    r.set_defaults(func=cmd_report)

    g = sub.add_parser("grid", parents=[common], help="scenario count and breakdown")
    g.add_argument("--list", action="store_true", help="print the scenarios as CSV")
    g.set_defaults(func=cmd_grid)

    t = sub.add_parser("thresholds", parents=[common], help="threshold reference table")
    t.set_defaults(func=cmd_thresholds)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except KeyboardInterrupt:
        print("interrupted; rerun the same command to resume", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
