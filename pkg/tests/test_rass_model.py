import numpy as np
import pytest

from rass.errors import ParameterError, ShapeError
from rass.milp_solver import solve_lp
from rass.rass_model import (
    RiskParams,
    assemble_cvar_lp,
    assemble_rass,
    charging_costs,
    cvar_discrete,
    expected_profit,
    solve_rass,
)
from rass.storage import DispatchPoint, StorageSpec, check_feasible
from rass.time_market import ScenarioSet, TimeGrid
from tests.rass_cases import TIGHT, random_case, random_scenarios, random_spec, single

COSTS = [10.0, 20.0, 30.0, 40.0]


def test_risk_params_validation():
    with pytest.raises(ParameterError):
        RiskParams(alpha=1.0)
    with pytest.raises(ParameterError):
        RiskParams(alpha=-0.1)
    with pytest.raises(ParameterError):
        RiskParams(beta=-1.0)
    assert RiskParams(alpha=0.95).tail_factor == pytest.approx(20.0)


def test_cvar_fixtures():
    uniform = [0.25] * 4
    assert cvar_discrete(COSTS, uniform, 0.5).value == pytest.approx(35.0)
    assert cvar_discrete(COSTS, uniform, 0.75).value == pytest.approx(40.0)
    assert cvar_discrete(COSTS, uniform, 0.0).value == pytest.approx(25.0)
    assert cvar_discrete([7.5], [1.0], 0.99).value == pytest.approx(7.5)


def test_var_is_smallest_minimizer():
    uniform = [0.25] * 4
    assert cvar_discrete(COSTS, uniform, 0.5).var == 20.0
    assert cvar_discrete(COSTS, uniform, 0.75).var == 30.0
    assert cvar_discrete([7.5], [1.0], 0.3).var == 7.5


def test_cvar_rejects_bad_input():
    with pytest.raises(ParameterError):
        cvar_discrete(COSTS, [0.25] * 4, 1.0)
    with pytest.raises(ParameterError):
        cvar_discrete(COSTS, [0.3] * 4, 0.5)
    with pytest.raises(ShapeError):
        cvar_discrete(COSTS, [0.5, 0.5], 0.5)


def test_cvar_matches_lp_on_random_distributions():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 13))
        costs = rng.uniform(-50.0, 50.0, n)
        probs = rng.uniform(0.05, 1.0, n)
        probs /= probs.sum()
        alpha = float(rng.choice([0.0, float(rng.uniform(0.0, 0.99))]))
        lp = solve_lp(assemble_cvar_lp(costs, probs, alpha))
        assert cvar_discrete(costs, probs, alpha).value == pytest.approx(lp.objective, abs=1e-8)


def test_cvar_dominates_expectation_and_grows_with_alpha():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(1, 10))
        costs = rng.normal(0.0, 20.0, n)
        probs = rng.dirichlet(np.ones(n))
        mean = float(probs @ costs)
        assert cvar_discrete(costs, probs, 0.0).value == pytest.approx(mean, abs=1e-9)
        previous = -np.inf
        for alpha in (0.0, 0.25, 0.5, 0.75, 0.9, 0.99):
            value = cvar_discrete(costs, probs, alpha).value
            assert value >= mean - 1e-9
            assert value >= previous - 1e-9
            previous = value


def test_expected_profit_examples():
    dispatch = [DispatchPoint(1.0, 0.0, 0, 1.0), DispatchPoint(0.0, 1.0, 1, 0.0)]
    scen = single([0.0, 10.0])
    assert expected_profit(dispatch, scen, TimeGrid(60, 2)) == pytest.approx(10.0)
    assert expected_profit(dispatch, scen, TimeGrid(30, 2)) == pytest.approx(5.0)
    idle = [DispatchPoint(0.0, 0.0, 0, 0.0)] * 2
    assert expected_profit(idle, scen, TimeGrid(60, 2)) == 0.0
    with pytest.raises(ShapeError):
        expected_profit(idle[:1], scen, TimeGrid(60, 2))


def test_charging_costs_per_scenario():
    dispatch = [DispatchPoint(2.0, 0.0, 0, 1.0), DispatchPoint(0.0, 0.0, 0, 1.0)]
    scen = ScenarioSet([[10.0, 0.0], [30.0, 5.0]], [0.5, 0.5])
    np.testing.assert_allclose(charging_costs(dispatch, scen, TimeGrid(30, 2)), [10.0, 30.0])


def test_full_day_instance_size():
    rng = np.random.default_rng(3)
    scen = random_scenarios(rng, 48, 100)
    inst = assemble_rass(random_spec(rng), TimeGrid(30, 48), scen, RiskParams(0.95, 0.3))
    assert inst.n_columns == 293
    assert inst.n_rows == 244
    assert len(inst.integral_columns) == 48
    for w in range(1, 101):
        col = inst.columns[inst.column(f"z[{w}]")]
        assert col.cost == pytest.approx(0.3 * float(scen.probabilities[w - 1]) * 20.0, rel=1e-12)
        assert col.lb == 0.0
    zeta = inst.columns[inst.column("zeta")]
    assert zeta.lb == -np.inf and zeta.ub == np.inf and zeta.cost == 0.3


def test_roles_are_total_and_distinct():
    rng = np.random.default_rng(4)
    spec, grid, scen, risk = random_case(rng, 3, 2)
    inst = assemble_rass(spec, grid, scen, risk)
    assert sorted(inst.roles.values()) == list(range(inst.n_columns))
    assert inst.column("u[3]") in inst.integral_columns
    with pytest.raises(KeyError):
        inst.column("u[4]")


def test_zero_beta_has_no_risk_costs():
    rng = np.random.default_rng(5)
    spec, grid, scen, _ = random_case(rng, 4, 3)
    inst = assemble_rass(spec, grid, scen, RiskParams(0.95, 0.0))
    assert inst.columns[inst.column("zeta")].cost == 0.0
    assert all(inst.columns[inst.column(f"z[{w}]")].cost == 0.0 for w in (1, 2, 3))
    solution = solve_rass(spec, grid, scen, RiskParams(0.95, 0.0), TIGHT)
    assert solution.objective == pytest.approx(-solution.expected_profit, abs=1e-6)


def test_objective_identity_and_tight_tail_slacks():
    rng = np.random.default_rng(11)
    for _ in range(8):
        spec, grid, scen, _ = random_case(rng, 4, 4)
        risk = RiskParams(alpha=0.8, beta=float(rng.uniform(0.1, 1.0)))
        sol = solve_rass(spec, grid, scen, risk, TIGHT)
        assert check_feasible(spec, grid, sol.dispatch) == []
        assert sol.objective == pytest.approx(-sol.expected_profit + risk.beta * sol.cvar_cost, abs=1e-6)
        costs = charging_costs(sol.dispatch, scen, grid)
        np.testing.assert_allclose(sol.z, np.maximum(costs - sol.zeta, 0.0), atol=1e-6)


@pytest.mark.parametrize("scale", [2.0, 4.0])
def test_scale_equivariance(scale):
    rng = np.random.default_rng(21)
    for _ in range(5):
        spec, grid, scen, risk = random_case(rng, 5, 3)
        scaled = ScenarioSet(scen.prices * scale, scen.probabilities)
        base = solve_rass(spec, grid, scen, risk, TIGHT)
        big = solve_rass(spec, grid, scaled, risk, TIGHT)
        assert big.objective == pytest.approx(scale * base.objective, abs=1e-6 * max(1.0, abs(big.objective)))
        np.testing.assert_allclose(big.net_discharge, base.net_discharge, atol=1e-6)
        for a, b in zip(base.dispatch, big.dispatch):
            if abs(a.net_discharge) > 1e-6:
                assert a.u == b.u


def test_storage_spec_used_for_bounds():
    spec = StorageSpec(2.0, 3.0, 0.9, 1.0, 5.0, 2.0)
    inst = assemble_rass(spec, TimeGrid(60, 2), single([1.0, 2.0]), RiskParams())
    e1 = inst.columns[inst.column("e[1]")]
    assert (e1.lb, e1.ub) == (1.0, 5.0)
    assert inst.columns[inst.column("p_d[2]")].ub == 3.0
    balance = inst.rows[4]
    assert balance.name == "balance[1]" and balance.rhs == 2.0
