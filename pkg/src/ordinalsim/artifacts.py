"""Flat CSV persistence for simulation runs.

Numbers are written with 12 significant digits and a decimal point whatever
the locale; missing values are empty cells; booleans are ``true``/``false``.
"""

import csv
import hashlib
import json
import math
import numbers
import os
from collections import defaultdict
from enum import Enum

import numpy as np

from .datagen import GenDiagnostics
from .scenarios import ScenarioSpec
from .simulation import AggregateMetrics, ParamRecord, ReplicationRecord

SCENARIO_COLUMNS = ("scenario_id", "dgp", "n", "p", "informative", "k", "beta_value",
                    "gamma_value", "theta_setting", "master_seed", "skew_floor",
                    "unstructured_factor")
REPLICATION_COLUMNS = ("scenario_id", "rep_index", "model", "block", "covariate", "category",
                       "status", "estimate", "std_error", "true_value", "statistic", "p_value",
                       "rejected", "role", "observation_redraws", "dataset_redraws",
                       "generation_aborted")
SUMMARY_COLUMNS = ("scenario_id", "model", "block", "covariate", "category", "role",
                   "true_value", "n_reps", "n_converged", "convergence_rate", "mean_estimate",
                   "bias", "rejection_rate", "reported")


class ArtifactError(OSError):
    """A run directory is missing a file or holds something unreadable."""


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        v = float(value)
        if math.isnan(v):
            return ""
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.12g" % v
    return str(value)


def parse_float(text):
    return math.nan if text == "" else float(text)


def parse_bool(text):
    return text == "true"


def write_csv(path, columns, rows):
    """Write dict rows with a fixed column order; returns the row count."""
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row.get(c)) for c in columns])
            count += 1
    return count


def read_csv(path):
    if not os.path.exists(path):
        raise ArtifactError(f"missing artifact: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def replication_rows(record):
    d = record.diagnostics
    extra = {"observation_redraws": d.observation_redraws,
             "dataset_redraws": d.dataset_redraws,
             "generation_aborted": d.aborted}
    for r in record.params:
        row = {c: getattr(r, c) for c in REPLICATION_COLUMNS[:14]}
        row.update(extra)
        yield row


def format_replication(record):
    """CSV lines (with newline) for one replication record."""
    return ["%s\n" % ",".join(fmt(row[c]) for c in REPLICATION_COLUMNS)
            for row in replication_rows(record)]


def parse_param_row(row):
    return ParamRecord(
        int(row["scenario_id"]), int(row["rep_index"]), row["model"], row["block"],
        int(row["covariate"]), int(row["category"]), row["status"],
        parse_float(row["estimate"]), parse_float(row["std_error"]),
        parse_float(row["true_value"]), parse_float(row["statistic"]),
        parse_float(row["p_value"]), parse_bool(row["rejected"]), row["role"])


def load_replications(path, expected_rows=None):
    """Complete replication records stored in ``path``.

    ``expected_rows`` maps scenario id to the number of rows one replication
    produces; replications with fewer rows (an interrupted write) are dropped.
    A truncated final line is ignored.
    """
    groups = defaultdict(list)
    diags = {}
    if not os.path.exists(path):
        return []
    with open(path, newline="", encoding="utf-8") as fh:
        text = fh.read()
    if text and not text.endswith("\n"):
        text = text[: text.rfind("\n") + 1]
    reader = csv.DictReader(text.splitlines())
    if reader.fieldnames is not None and tuple(reader.fieldnames) != REPLICATION_COLUMNS:
        raise ArtifactError(f"{path}: unexpected columns {reader.fieldnames}")
    for row in reader:
        try:
            rec = parse_param_row(row)
            key = (rec.scenario_id, rec.rep_index)
            diags[key] = GenDiagnostics(int(row["observation_redraws"]),
                                        int(row["dataset_redraws"]),
                                        parse_bool(row["generation_aborted"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise ArtifactError(f"{path}: unreadable row {reader.line_num}: {exc}") from exc
        groups[key].append(rec)
    out = []
    for key in sorted(groups):
        rows = groups[key]
        if expected_rows is not None and len(rows) != expected_rows.get(key[0], -1):
            continue
        statuses = {}
        for r in rows:
            statuses.setdefault(r.model, r.status)
        out.append(ReplicationRecord(key[0], key[1], statuses, tuple(rows), diags[key]))
    return out


def config_hash(config):
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def write_json(path, payload):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    os.replace(tmp, path)


def read_json(path):
    if not os.path.exists(path):
        raise ArtifactError(f"missing artifact: {path}")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def parse_summary_row(row):
    return AggregateMetrics(
        int(row["scenario_id"]), row["model"], row["block"], int(row["covariate"]),
        int(row["category"]), row["role"], parse_float(row["true_value"]), int(row["n_reps"]),
        int(row["n_converged"]), parse_float(row["convergence_rate"]),
        parse_float(row["mean_estimate"]), parse_float(row["bias"]),
        parse_float(row["rejection_rate"]), parse_bool(row["reported"]))


def parse_scenario_row(row):
    gamma = row["gamma_value"]
    return ScenarioSpec(
        int(row["scenario_id"]), row["dgp"], int(row["n"]), int(row["p"]),
        int(row["informative"]), int(row["k"]), float(row["beta_value"]),
        None if gamma == "" else float(gamma), row["theta_setting"], int(row["master_seed"]),
        float(row["skew_floor"]), float(row["unstructured_factor"]))
