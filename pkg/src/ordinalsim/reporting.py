"""Plot-ready tables and a headline text summary from simulation aggregates."""

import math
from collections import defaultdict

from .scenarios import REFERENCE_GRID_COUNT
from .simulation import CorrelationUndefined, MODELS, bias_pairs, pearson

DESCRIPTOR_COLUMNS = ("scenario_id", "dgp", "n", "p", "k", "theta_setting", "informative",
                      "beta_value", "gamma_value")
ALPHA_COLUMNS = DESCRIPTOR_COLUMNS + ("model", "block", "n_params", "n_converged",
                                      "convergence_rate", "alpha_error", "reported")
POWER_COLUMNS = DESCRIPTOR_COLUMNS + ("model", "block", "effect", "n_params", "n_converged",
                                      "convergence_rate", "rejection_rate", "reported")
BIAS_COLUMNS = DESCRIPTOR_COLUMNS + ("model", "block", "covariate", "category", "true_value",
                                     "mean_estimate", "bias", "n_converged")
CORRELATION_COLUMNS = ("model", "scope", "n_settings", "correlation")


def _descriptor(s):
    return {"scenario_id": s.scenario_id, "dgp": s.dgp.value, "n": s.n, "p": s.p, "k": s.k,
            "theta_setting": s.theta_setting.value, "informative": s.informative,
            "beta_value": s.beta_value, "gamma_value": s.gamma_value}


def _mean(values):
    vals = [v for v in values if not math.isnan(v)]
    return math.fsum(vals) / len(vals) if vals else math.nan


def _blocks(metrics):
    groups = defaultdict(list)
    for m in metrics:
        groups[(m.scenario_id, m.model, m.block)].append(m)
    return groups


def alpha_table(scenarios, metrics):
    """Mean rejection rate of the true-zero tests per (scenario, model, block)."""
    rows = []
    for (sid, model, block), grp in _blocks(metrics).items():
        grp = [m for m in grp if m.role == "alpha"]
        if not grp:
            continue
        rows.append({**_descriptor(scenarios[sid]), "model": model, "block": block,
                     "n_params": len(grp), "n_converged": grp[0].n_converged,
                     "convergence_rate": grp[0].convergence_rate,
                     "alpha_error": _mean([m.rejection_rate for m in grp]),
                     "reported": grp[0].reported})
    return rows


def power_table(scenarios, metrics):
    """Rejection rate for the informative covariates per (scenario, model, block).

    ``effect`` is ``beta_value`` for location and category blocks and
    ``gamma_value`` for dispersion blocks. Without informative covariates the
    rate covers every covariate, so at effect zero it is the alpha error.
    """
    rows = []
    for (sid, model, block), grp in _blocks(metrics).items():
        s = scenarios[sid]
        if s.informative:
            grp = [m for m in grp if m.covariate <= s.informative]
        effect = s.gamma_value if block == "dispersion" else s.beta_value
        rows.append({**_descriptor(s), "model": model, "block": block,
                     "effect": effect or 0.0, "n_params": len(grp),
                     "n_converged": grp[0].n_converged,
                     "convergence_rate": grp[0].convergence_rate,
                     "rejection_rate": _mean([m.rejection_rate for m in grp]),
                     "reported": grp[0].reported})
    return rows


def bias_table(scenarios, metrics):
    """Per-coefficient bias, restricted to reported settings with a defined true value."""
    return [{**_descriptor(scenarios[m.scenario_id]), "model": m.model, "block": m.block,
             "covariate": m.covariate, "category": m.category, "true_value": m.true_value,
             "mean_estimate": m.mean_estimate, "bias": m.bias, "n_converged": m.n_converged}
            for m in metrics if m.reported and not math.isnan(m.bias)]


def correlation_table(scenarios, metrics):
    """Location-vs-dispersion bias correlation of LSH and LSC (covariate 1)."""
    rows = []
    for model in ("LSH", "LSC"):
        for scope, restrict in (("own_dgp", scenarios), ("all", None)):
            xs, _ = bias_pairs(metrics, model, 1, restrict)
            try:
                r = pearson(*bias_pairs(metrics, model, 1, restrict))
            except CorrelationUndefined:
                r = math.nan
            rows.append({"model": model, "scope": scope, "n_settings": len(xs),
                         "correlation": r})
    return rows


def _fmt(x, spec=".3f"):
    return "n/a" if x is None or (isinstance(x, float) and math.isnan(x)) else format(x, spec)


def headline(scenarios, metrics, manifest=None):
    """Short plain-text digest of the checks a reader looks at first."""
    lines = []
    if manifest:
        g = manifest.get("grid", {})
        lines.append("grid: %s scenarios enumerated (%s run); reference count %d, deviation %+d"
                     % (g.get("count"), g.get("selected"), REFERENCE_GRID_COUNT,
                        int(g.get("count", REFERENCE_GRID_COUNT)) - REFERENCE_GRID_COUNT))
    alpha = alpha_table(scenarios, metrics)

    lines.append("")
    lines.append("alpha error with all effects zero (PO data), mean over settings:")
    by = defaultdict(list)
    for r in alpha:
        if r["dgp"] == "PO" and r["informative"] == 0:
            by[(r["model"], r["block"], r["n"])].append(r["alpha_error"])
    if not by:
        lines.append("  no zero-effect PO settings in this run")
    for key in sorted(by, key=lambda t: (MODELS.index(t[0]) if t[0] in MODELS else 99, t[1], t[2])):
        lines.append("  %-4s %-10s n=%-5d %s" % (key[0], key[1], key[2], _fmt(_mean(by[key]))))

    lines.append("")
    lines.append("convergence rate by model:")
    conv = defaultdict(list)
    seen = set()
    for m in metrics:
        if (m.scenario_id, m.model) not in seen:
            seen.add((m.scenario_id, m.model))
            conv[m.model].append(m.convergence_rate)
    for model in sorted(conv, key=lambda x: MODELS.index(x) if x in MODELS else 99):
        lines.append("  %-4s %s" % (model, _fmt(_mean(conv[model]))))

    lines.append("")
    lines.append("mean bias of non-zero location effects on PO data:")
    bias = defaultdict(list)
    for m in metrics:
        s = scenarios[m.scenario_id]
        if (s.dgp.value == "PO" and m.role == "power" and m.reported
                and m.block in ("location", "category") and not math.isnan(m.bias)):
            bias[m.model].append(m.bias)
    if not bias:
        lines.append("  no non-zero PO settings in this run")
    for model in sorted(bias, key=lambda x: MODELS.index(x) if x in MODELS else 99):
        lines.append("  %-4s %s" % (model, _fmt(_mean(bias[model]), "+.4f")))

    lines.append("")
    lines.append("location/dispersion bias correlation (covariate 1):")
    for r in correlation_table(scenarios, metrics):
        lines.append("  %-4s %-8s settings=%-4d r=%s" % (r["model"], r["scope"], r["n_settings"],
                                                        _fmt(r["correlation"], "+.3f")))
    return "\n".join(lines) + "\n"
