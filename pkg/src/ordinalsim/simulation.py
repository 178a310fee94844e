"""Replications, aggregation and bias correlation for the Monte-Carlo study."""

import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .datagen import CSO_PATTERNS, GenDiagnostics, generate_dataset, replication_rng
from .estimation import FitOptions, FitStatus, fit_model
from .models import ModelKind, parameter_labels, shift_weights

MODELS = ("LM", "PO", "CSO", "LSH", "LSC")
REPORT_FRACTION = 0.05


@dataclass(frozen=True)
class ParamRecord:
    """One tested coefficient of one fitted model in one replication."""

    scenario_id: int
    rep_index: int
    model: str
    block: str
    covariate: int
    category: int
    status: str
    estimate: float
    std_error: float
    true_value: float
    statistic: float
    p_value: float
    rejected: bool
    role: str


@dataclass(frozen=True)
class ReplicationRecord:
    scenario_id: int
    rep_index: int
    statuses: dict
    params: tuple
    diagnostics: GenDiagnostics


@dataclass(frozen=True)
class AggregateMetrics:
    scenario_id: int
    model: str
    block: str
    covariate: int
    category: int
    role: str
    true_value: float
    n_reps: int
    n_converged: int
    convergence_rate: float
    mean_estimate: float
    bias: float
    rejection_rate: float
    reported: bool

    @property
    def metric(self):
        """``alpha`` for true-zero parameters, ``power`` otherwise."""
        return self.role


def _role(value):
    return "alpha" if value == 0 else "power"


def true_value(scenario, model, block, covariate, category=0):
    """``(value, role)`` for a tested coefficient.

    ``value`` is NaN when the fitted model does not nest the generating one
    and the coefficient has no comparable true value; ``role`` is ``alpha``,
    ``power`` or ``other``.
    """
    s = scenario
    dgp = s.dgp
    b = float(s.beta_value)
    g = float(s.gamma_value or 0.0)
    if covariate > s.informative or (b == 0 and g == 0):
        return 0.0, "alpha"
    if model == "CSO":
        r = category
        if dgp is ModelKind.CSO:
            v = CSO_PATTERNS[s.k][r - 1] * b
        elif dgp is ModelKind.LSH:
            v = b + shift_weights(s.k)[r - 1] * g
        elif dgp is ModelKind.LSC and g != 0:
            return math.nan, "power"
        else:
            v = b
        return v, _role(v)
    if dgp is ModelKind.CSO:
        return math.nan, "other"
    if block == "location":
        if model == "LM":
            return (0.0, "alpha") if b == 0 else (math.nan, "power")
        nested = model == dgp.value or dgp is ModelKind.PO or g == 0
        if nested or b == 0:
            return b, _role(b)
        return math.nan, "power"
    # dispersion block of LSH / LSC
    if dgp is ModelKind.PO or g == 0:
        return 0.0, "alpha"
    if model == dgp.value:
        return g, "power"
    return math.nan, "power"


def _tested(fit_labels):
    for i, (block, cov, cat) in enumerate(fit_labels):
        if block in ("location", "dispersion", "category"):
            yield i, block, cov, cat


def run_replication(scenario, rep_index, models=MODELS, alpha=0.05, options=None):
    """Generate one dataset, fit every model and test every location/dispersion coefficient."""
    rng = replication_rng(scenario.master_seed, scenario.scenario_id, rep_index)
    data, diag = generate_dataset(rng, scenario)
    options = options or FitOptions()
    statuses = {}
    rows = []
    p, k = scenario.p, scenario.k
    for model in models:
        fit = None
        if data is None:
            status = FitStatus.GENERATION_FAILED.value
            labels = _labels(model, p, k)
        else:
            fit = fit_model(model, data, options)
            status = fit.status.value
            labels = fit.labels
        statuses[model] = status
        tests = fit.tests(alpha) if fit is not None and fit.converged else None
        for i, block, cov, cat in _tested(labels):
            tv, role = true_value(scenario, model, block, cov, cat)
            if tests is None:
                rows.append(ParamRecord(scenario.scenario_id, rep_index, model, block, cov, cat,
                                        status, math.nan, math.nan, tv, math.nan, math.nan,
                                        False, role))
                continue
            t = tests[i]
            rows.append(ParamRecord(scenario.scenario_id, rep_index, model, block, cov, cat,
                                    status, t.estimate, t.std_error, tv, t.statistic,
                                    t.p_value, t.rejected, role))
    return ReplicationRecord(scenario.scenario_id, rep_index, statuses, tuple(rows), diag)


def _labels(model, p, k):
    if model == "LM":
        return [("intercept", 0, 0)] + [("location", j, 0) for j in range(1, p + 1)]
    return parameter_labels(model, p, k)


def rows_per_replication(scenario, models=MODELS):
    """Number of tested coefficients one replication records over ``models``."""
    return sum(len(list(_tested(_labels(m, scenario.p, scenario.k)))) for m in models)


def _run_chunk(args):
    scenario, reps, models, alpha, options = args
    return [run_replication(scenario, r, models, alpha, options) for r in reps]


def run_scenario(scenario, reps, models=MODELS, alpha=0.05, options=None, threads=1,
                 skip=()):
    """Yield replication records for ``rep_index`` in ``range(reps)`` in order.

    With ``threads > 1`` replications are computed in worker processes; the
    yield order is unchanged, so outputs do not depend on the thread count.
    """
    todo = [r for r in range(reps) if r not in skip]
    yield from iter_replications([(scenario, todo)], models, alpha, options, threads)


def iter_replications(tasks, models=MODELS, alpha=0.05, options=None, threads=1):
    """Run ``(scenario, rep_indices)`` tasks, yielding records in task order.

    One worker pool serves all tasks so that many small scenarios do not pay
    for a pool each.
    """
    tasks = [(s, list(reps)) for s, reps in tasks if len(reps)]
    if threads <= 1:
        for scenario, reps in tasks:
            for r in reps:
                yield run_replication(scenario, r, models, alpha, options)
        return
    chunks = []
    for scenario, reps in tasks:
        size = max(1, min(25, len(reps) // threads))
        chunks += [(scenario, reps[i:i + size], models, alpha, options)
                   for i in range(0, len(reps), size)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for batch in pool.map(_run_chunk, chunks):
            yield from batch


def _fmean(values):
    return math.fsum(values) / len(values) if values else math.nan


def aggregate(records, n_reps=None):
    """Per-coefficient bias, rejection rate and convergence over replications.

    ``records`` may be :class:`ReplicationRecord` or :class:`ParamRecord`
    objects, for one or several scenarios. Only converged fits enter the
    bias and rejection rate; sums are exact so record order is irrelevant.
    """
    rows = []
    reps_seen = defaultdict(set)
    for rec in records:
        if isinstance(rec, ReplicationRecord):
            reps_seen[rec.scenario_id].add(rec.rep_index)
            rows.extend(rec.params)
        else:
            reps_seen[rec.scenario_id].add(rec.rep_index)
            rows.append(rec)
    groups = defaultdict(list)
    for r in rows:
        groups[(r.scenario_id, r.model, r.block, r.covariate, r.category)].append(r)
    out = []
    for key in sorted(groups, key=_group_sort_key):
        grp = groups[key]
        sid = key[0]
        total = n_reps if n_reps is not None else len(reps_seen[sid])
        conv = [r for r in grp if r.status == FitStatus.CONVERGED.value]
        nc = len(conv)
        tv = grp[0].true_value
        est = [r.estimate for r in conv]
        mean_est = _fmean(est)
        bias = mean_est - tv if nc and not math.isnan(tv) else math.nan
        rate = sum(1 for r in conv if r.rejected) / nc if nc else math.nan
        out.append(AggregateMetrics(
            sid, key[1], key[2], key[3], key[4], grp[0].role, tv, total, nc,
            nc / total if total else math.nan, mean_est, bias, rate,
            nc >= math.ceil(REPORT_FRACTION * total)))
    return out


_MODEL_ORDER = {m: i for i, m in enumerate(MODELS)}
_BLOCK_ORDER = {"location": 0, "category": 1, "dispersion": 2}


def _group_sort_key(key):
    sid, model, block, cov, cat = key
    return sid, _MODEL_ORDER.get(model, 99), _BLOCK_ORDER.get(block, 9), cat, cov


def convergence_summary(records):
    """Per (scenario, model) status counts plus generation redraw statistics."""
    by = defaultdict(list)
    for rec in records:
        by[rec.scenario_id].append(rec)
    out = []
    for sid in sorted(by):
        recs = by[sid]
        diags = [r.diagnostics for r in recs]
        models = []
        for r in recs:
            for m in r.statuses:
                if m not in models:
                    models.append(m)
        for m in sorted(models, key=lambda x: _MODEL_ORDER.get(x, 99)):
            counts = defaultdict(int)
            for r in recs:
                if m in r.statuses:
                    counts[r.statuses[m]] += 1
            n = sum(counts.values())
            out.append({
                "scenario_id": sid,
                "model": m,
                "n_reps": n,
                "n_converged": counts[FitStatus.CONVERGED.value],
                "convergence_rate": counts[FitStatus.CONVERGED.value] / n if n else math.nan,
                **{f"n_{s.value}": counts[s.value] for s in FitStatus if s is not FitStatus.CONVERGED},
                "mean_observation_redraws": _fmean([d.observation_redraws for d in diags]),
                "total_dataset_redraws": sum(d.dataset_redraws for d in diags),
                "max_dataset_redraws": max(d.dataset_redraws for d in diags),
                "n_generation_aborted": sum(1 for d in diags if d.aborted),
            })
    return out


class CorrelationUndefined(ValueError):
    pass


def pearson(xs, ys):
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size != y.size or x.size < 3:
        raise CorrelationUndefined("need at least three paired settings")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = math.fsum(dx * dx)
    syy = math.fsum(dy * dy)
    if sxx == 0 or syy == 0:
        raise CorrelationUndefined("zero variance in one of the bias series")
    return math.fsum(dx * dy) / math.sqrt(sxx * syy)


def bias_pairs(metrics, model, covariate=1, scenarios=None):
    """Per-setting ``(location bias, dispersion bias)`` of ``model``.

    ``scenarios`` (id -> :class:`ScenarioSpec`) restricts the pairs to settings
    generated by ``model`` itself.
    """
    loc = {}
    disp = {}
    for m in metrics:
        if m.model != model or m.covariate != covariate or not m.reported or math.isnan(m.bias):
            continue
        if scenarios is not None and scenarios[m.scenario_id].dgp.value != model:
            continue
        if m.block == "location":
            loc[m.scenario_id] = m.bias
        elif m.block == "dispersion":
            disp[m.scenario_id] = m.bias
    keys = sorted(set(loc) & set(disp))
    return [loc[s] for s in keys], [disp[s] for s in keys]


def correlation_of_biases(metrics, model, covariate=1, scenarios=None):
    """Pearson correlation across settings between location and dispersion bias."""
    xs, ys = bias_pairs(metrics, model, covariate, scenarios)
    return pearson(xs, ys)
