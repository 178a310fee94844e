"""Scenario specifications and the simulation grid."""

from dataclasses import asdict, dataclass
from enum import Enum

from .models import ModelKind

REFERENCE_GRID_COUNT = 4032


class ThetaSetting(str, Enum):
    UNIFORM = "Uniform"
    SKEWED = "Skewed"
    UNSTRUCTURED = "Unstructured"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(f"unknown theta setting {value!r}")


@dataclass(frozen=True)
class ScenarioSpec:
    """One cell of the simulation grid.

    ``beta_value`` is the CSO magnitude ``u`` when ``dgp`` is CSO;
    ``gamma_value`` is ``None`` for PO and CSO.
    """

    scenario_id: int
    dgp: ModelKind
    n: int
    p: int
    informative: int
    k: int
    beta_value: float
    gamma_value: float = None
    theta_setting: ThetaSetting = ThetaSetting.UNIFORM
    master_seed: int = 20240001
    skew_floor: float = 0.06
    unstructured_factor: float = 2.2

    def __post_init__(self):
        object.__setattr__(self, "dgp", ModelKind.parse(self.dgp))
        object.__setattr__(self, "theta_setting", ThetaSetting.parse(self.theta_setting))
        problems = []
        if self.n < 1:
            problems.append("n")
        if self.p < 1:
            problems.append("p")
        if not 0 <= self.informative <= self.p:
            problems.append("informative")
        if self.k < 3:
            problems.append("k")
        if self.dgp in (ModelKind.PO, ModelKind.CSO) and self.gamma_value is not None:
            problems.append("gamma_value")
        if self.dgp in (ModelKind.LSH, ModelKind.LSC) and self.gamma_value is None:
            problems.append("gamma_value")
        if self.dgp is ModelKind.CSO and self.k not in (5, 7):
            problems.append("k (CSO data only for k in {5, 7})")
        if self.informative == 0 and (self.beta_value != 0 or (self.gamma_value or 0) != 0):
            problems.append("beta_value/gamma_value (must be 0 without informative covariates)")
        if problems:
            raise ValueError(f"invalid scenario {self.scenario_id}: " + ", ".join(problems))

    def as_row(self):
        row = asdict(self)
        row["dgp"] = self.dgp.value
        row["theta_setting"] = self.theta_setting.value
        return row

    def matches(self, **criteria):
        row = self.as_row()
        for key, want in criteria.items():
            if key not in row:
                raise ValueError(f"unknown scenario field {key!r}")
            have = row[key]
            if isinstance(want, (list, tuple, set, frozenset)):
                if not any(_same(have, w) for w in want):
                    return False
            elif not _same(have, want):
                return False
        return True


def _same(have, want):
    if have is None or want is None:
        return have is None and (want is None or str(want).lower() in ("", "none"))
    if isinstance(have, str):
        return have.lower() == str(want).lower()
    try:
        return float(have) == float(want)
    except (TypeError, ValueError):
        return False


@dataclass(frozen=True)
class GridConfig:
    n_values: tuple = (250, 500, 1000)
    p_values: tuple = (5, 35)
    k_values: tuple = (3, 5, 7)
    informative_values: tuple = (1, 4)
    effect_grid: tuple = (0.0, 0.1, 0.2, 0.5, 1.0, 2.0)
    pair_values: tuple = (0.0, 1.0)
    theta_settings: tuple = (ThetaSetting.UNIFORM, ThetaSetting.SKEWED, ThetaSetting.UNSTRUCTURED)
    dgps: tuple = (ModelKind.PO, ModelKind.CSO, ModelKind.LSH, ModelKind.LSC)
    master_seed: int = 20240001
    skew_floor: float = 0.06
    unstructured_factor: float = 2.2

    def validate(self):
        bad = []
        if not self.n_values or min(self.n_values) < 1:
            bad.append("n_values")
        if not self.p_values or min(self.p_values) < 1:
            bad.append("p_values")
        if not self.k_values or any(k not in (3, 5, 7) for k in self.k_values):
            bad.append("k_values")
        if not self.informative_values or min(self.informative_values) < 1:
            bad.append("informative_values")
        elif max(self.informative_values) > min(self.p_values):
            bad.append("informative_values (exceeds smallest p)")
        if 0 not in [float(v) for v in self.effect_grid] or min(self.effect_grid) < 0:
            bad.append("effect_grid (must contain 0, non-negative)")
        if not self.pair_values:
            bad.append("pair_values")
        if not self.theta_settings:
            bad.append("theta_settings")
        if not self.dgps:
            bad.append("dgps")
        if not 0 < self.skew_floor < 1 / max(self.k_values):
            bad.append("skew_floor")
        if not self.unstructured_factor > 0:
            bad.append("unstructured_factor")
        if bad:
            raise ValueError("invalid grid configuration: " + ", ".join(bad))


def dispersion_pairs(effect_grid, pair_values):
    """``(beta, gamma)`` pairs: every beta with each pair value of gamma and vice versa."""
    pairs = {(float(b), float(g)) for b in effect_grid for g in pair_values}
    pairs |= {(float(b), float(g)) for g in effect_grid for b in pair_values}
    return sorted(pairs)


def _effect_cells(dgp, config):
    grid = sorted({float(v) for v in config.effect_grid})
    if dgp in (ModelKind.PO, ModelKind.CSO):
        cells = [(0, 0.0, None)]
        cells += [(m, b, None) for m in config.informative_values for b in grid if b != 0]
        return cells
    pairs = dispersion_pairs(grid, config.pair_values)
    cells = [(0, 0.0, 0.0)]
    cells += [(m, b, g) for m in config.informative_values for b, g in pairs if (b, g) != (0, 0)]
    return cells


def enumerate_grid(config=None):
    """All scenarios in stable lexicographic order (dgp, n, p, k, theta, m, effects).

    Zero-effect cells appear once with ``informative = 0``; CSO data are
    generated only for ``k`` in {5, 7}.
    """
    config = config or GridConfig()
    config.validate()
    out = []
    sid = 0
    for dgp in config.dgps:
        dgp = ModelKind.parse(dgp)
        cells = _effect_cells(dgp, config)
        for n in config.n_values:
            for p in config.p_values:
                for k in config.k_values:
                    if dgp is ModelKind.CSO and k == 3:
                        continue
                    for theta in config.theta_settings:
                        for m, b, g in cells:
                            out.append(ScenarioSpec(
                                sid, dgp, n, p, m, k, b, g, ThetaSetting.parse(theta),
                                config.master_seed, config.skew_floor,
                                config.unstructured_factor))
                            sid += 1
    return out


def grid_breakdown(scenarios):
    counts = {}
    for s in scenarios:
        counts[s.dgp.value] = counts.get(s.dgp.value, 0) + 1
    return counts


def filter_scenarios(scenarios, **criteria):
    return [s for s in scenarios if s.matches(**criteria)]
