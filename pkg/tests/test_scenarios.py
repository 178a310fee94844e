import pytest

from ordinalsim.scenarios import (
    REFERENCE_GRID_COUNT,
    GridConfig,
    ScenarioSpec,
    dispersion_pairs,
    enumerate_grid,
    filter_scenarios,
    grid_breakdown,
)


def test_dispersion_pair_count():
    pairs = dispersion_pairs((0, 0.1, 0.2, 0.5, 1, 2), (0, 1))
    assert len(pairs) == 20
    brute = {(b, g) for b in (0, 0.1, 0.2, 0.5, 1, 2) for g in (0, 1)}
    brute |= {(b, g) for g in (0, 0.1, 0.2, 0.5, 1, 2) for b in (0, 1)}
    assert set(pairs) == {(float(b), float(g)) for b, g in brute}


def test_default_grid_count_and_breakdown():
    grid = enumerate_grid()
    assert len(grid) == 5202
    assert grid_breakdown(grid) == {"PO": 594, "CSO": 396, "LSH": 2106, "LSC": 2106}
    assert REFERENCE_GRID_COUNT == 4032


def test_grid_ids_unique_and_stable():
    a = enumerate_grid()
    b = enumerate_grid()
    assert [s.scenario_id for s in a] == list(range(len(a)))
    assert a == b


def test_cso_has_no_k3():
    assert not [s for s in enumerate_grid() if s.dgp.value == "CSO" and s.k == 3]


def test_zero_effect_cells_once():
    grid = enumerate_grid()
    zero = [s for s in grid if s.dgp.value == "LSH" and s.n == 250 and s.p == 5 and s.k == 3
            and s.theta_setting.value == "Uniform" and s.informative == 0]
    assert len(zero) == 1
    assert zero[0].beta_value == 0 and zero[0].gamma_value == 0


def test_grid_validation():
    with pytest.raises(ValueError):
        enumerate_grid(GridConfig(k_values=(4,)))
    with pytest.raises(ValueError):
        enumerate_grid(GridConfig(informative_values=(6,)))
    with pytest.raises(ValueError):
        enumerate_grid(GridConfig(effect_grid=(0.5, 1.0)))


def test_scenario_validation():
    with pytest.raises(ValueError):
        ScenarioSpec(0, "PO", 250, 5, 1, 3, 1.0, gamma_value=1.0)
    with pytest.raises(ValueError):
        ScenarioSpec(0, "LSH", 250, 5, 1, 3, 1.0)
    with pytest.raises(ValueError):
        ScenarioSpec(0, "CSO", 250, 5, 1, 3, 1.0)
    with pytest.raises(ValueError):
        ScenarioSpec(0, "PO", 250, 5, 0, 3, 1.0)
    with pytest.raises(ValueError):
        ScenarioSpec(0, "PO", 250, 5, 6, 3, 1.0)


def test_filter():
    grid = enumerate_grid()
    sel = filter_scenarios(grid, dgp="po", n=250, k=[3, 5], theta_setting="Uniform")
    assert sel and all(s.dgp.value == "PO" and s.n == 250 and s.k in (3, 5) for s in sel)
    assert filter_scenarios(grid, gamma_value="none", dgp="PO") == [s for s in grid
                                                                   if s.dgp.value == "PO"]
    with pytest.raises(ValueError):
        filter_scenarios(grid, colour="red")
