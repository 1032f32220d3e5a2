"""Test the simulation routine."""
import functools

import numpy as np
import pandas as pd
import pytest

import tsnswitch as ts
from tsnswitch.admission import Sc2Certificate
from tsnswitch.admission import check_sc2_certificate
from tsnswitch.admission import classify_flows
from tsnswitch.config import EXAMPLE_SCENARIOS
from tsnswitch.edf import TVector
from tsnswitch.edf import edf_trace
from tsnswitch.latin import cyclic_decomposition
from tsnswitch.latin import enumerate_decompositions
from tsnswitch.pre_processing.scenario_processing import process_scenario
from tsnswitch.scheduler import SchedulerMode
from tsnswitch.shared import ScenarioError
from tsnswitch.shared import TrafficSpec
from tsnswitch.simulate import SwitchState
from tsnswitch.simulate import compute_horizon
from tsnswitch.simulate import oracle_schedule_mtdma
from tsnswitch.simulate import step
from tsnswitch.tests.random_scenario import N_INSTANCES_PER_SEED
from tsnswitch.tests.random_scenario import full_horizon
from tsnswitch.tests.random_scenario import generate_sc1_spec
from tsnswitch.tests.random_scenario import generate_sc2_spec
from tsnswitch.tests.utils import assert_conservation
from tsnswitch.tests.utils import assert_crossbar_safety
from tsnswitch.tests.utils import process_scenario_or_seed
from tsnswitch.tests.utils import run_switch


@functools.lru_cache(maxsize=None)
def _decompositions(n):
    return tuple(enumerate_decompositions(n))


def _random_be_arrivals(rng, n, n_slots, rate=0.3):
    arrivals = {}
    for t, i, j in zip(*np.nonzero(rng.random((n_slots, n, n)) < rate)):
        arrivals.setdefault(int(t), []).append((int(i), int(j)))

    return arrivals


def _sort_cells(df):
    return df.sort_values(["input", "output", "seq"]).reset_index(drop=True)


@pytest.mark.end_to_end
@pytest.mark.parametrize(
    "scenario, expected", [("example1", 608), ("example2", 80), ("appendix_d", 60)]
)
def test_automatic_horizon_of_examples(scenario, expected):
    assert compute_horizon(process_scenario(scenario)) == expected


@pytest.mark.end_to_end
@pytest.mark.parametrize("scenario", EXAMPLE_SCENARIOS)
def test_examples_deliver_every_time_sensitive_cell(scenario):
    report = ts.run(scenario)

    assert report.rejected == []
    assert report.per_flow["expired"].sum() == 0
    assert (
        report.per_flow["arrivals"]
        == report.per_flow["delivered"] + report.per_flow["live"]
    ).all()


@pytest.mark.end_to_end
def test_example1_is_scheduled_by_mtdma():
    report = ts.run("example1")

    assert report.mode.variant == "mtdma"
    assert report.n_slots == 608
    assert len(report.per_flow) == 16
    assert report.to_dict()["mode"] == "mtdma"


@pytest.mark.end_to_end
@pytest.mark.precise
def test_example1_matches_closed_form():
    scenario = process_scenario("example1")
    spec = TrafficSpec.from_flows(scenario.n, scenario.ts_flows)
    d = cyclic_decomposition(4)

    state, _ = run_switch(spec, SchedulerMode.mtdma(d), 608)

    observed = state.metrics.transmissions_frame().drop(columns="delay")
    expected = oracle_schedule_mtdma(spec, d, 608)
    pd.testing.assert_frame_equal(_sort_cells(observed), _sort_cells(expected))


@pytest.mark.end_to_end
@pytest.mark.precise
def test_example2_follows_edf_sequence():
    scenario = ts.get_example_scenario("example2", as_dict=True)
    scenario["emit_trace"] = True
    report = ts.get_simulate_func(scenario)()

    assert report.mode.variant == "medf"
    assert report.mode.certificate.tvector.periods == (2, 4, 8, 8)
    assert report.trace["matching"].iloc[:8].tolist() == [1, 2, 1, 3, 1, 2, 1, 4]
    assert report.per_flow["expired"].sum() == 0
    assert report.to_dict()["certificate"]["utilization"] == "1"


@pytest.mark.end_to_end
@pytest.mark.precise
def test_appendix_d_example():
    report = ts.run("appendix_d")
    trace = report.trace.set_index("slot")

    assert pd.isna(trace.loc[4, "matching"])
    assert trace.loc[4, "ts_pairs"] == ""

    transfers = trace["be_transfers"]
    assert transfers[transfers != ""].to_dict() == {
        4: "1-1",
        5: "1-2",
        10: "1-3",
        11: "1-4",
    }

    assert report.be["delivered"].sum() == 4
    assert report.be["backlog"].sum() == 0
    assert report.per_flow["max_delay"].tolist() == [0, 1, 2]

    out = report.to_dict()
    assert out["per_flow"]["1,3"]["max_delay"] == 2
    assert out["be"]["delivered"] == 4


@pytest.mark.integration
@pytest.mark.precise
def test_mtdma_transmits_cells_as_predicted_by_closed_form(seed):
    rng = np.random.default_rng(seed)
    for _ in range(N_INSTANCES_PER_SEED):
        spec = generate_sc1_spec(rng)
        decompositions = _decompositions(spec.n)
        d = decompositions[rng.integers(len(decompositions))]
        order = tuple(int(k) for k in rng.permutation(spec.n) + 1)
        horizon = full_horizon(spec)
        be_arrivals = _random_be_arrivals(rng, spec.n, horizon)

        state, rows = run_switch(
            spec, SchedulerMode.mtdma(d, order), horizon, be_arrivals, voq_capacity=4
        )

        observed = state.metrics.transmissions_frame().drop(columns="delay")
        expected = oracle_schedule_mtdma(spec, d, horizon, order)
        pd.testing.assert_frame_equal(_sort_cells(observed), _sort_cells(expected))

        assert state.metrics.ts_expired.sum() == 0
        for row in rows:
            assert_crossbar_safety(row, spec.n)
        assert_conservation(state)


@pytest.mark.integration
@pytest.mark.precise
def test_medf_delivers_every_cell_in_time(seed):
    rng = np.random.default_rng(seed)
    for _ in range(N_INSTANCES_PER_SEED):
        spec, cert = generate_sc2_spec(rng)
        horizon = full_horizon(spec)
        be_arrivals = _random_be_arrivals(rng, spec.n, horizon)

        state, rows = run_switch(
            spec, SchedulerMode.medf(cert), horizon, be_arrivals, voq_capacity=4
        )

        assert state.metrics.ts_expired.sum() == 0
        transmissions = state.metrics.transmissions_frame()
        periods = spec.period[transmissions["input"] - 1, transmissions["output"] - 1]
        assert (transmissions["delay"] < periods).all()

        edf_tasks = edf_trace(cert.tvector, horizon).tasks
        for flow in classify_flows(spec, cert).itertuples():
            is_flow = (transmissions["input"] == flow.input) & (
                transmissions["output"] == flow.output
            )
            transmit = np.sort(transmissions.loc[is_flow, "transmit"].to_numpy())

            if flow.condition == "exact":
                # Served exactly when EDF serves the task of its matching.
                expected = np.flatnonzero(edf_tasks == flow.matching)
                np.testing.assert_array_equal(transmit, expected)
            else:
                assert flow.condition == "relaxed"
                offset, period = int(flow.offset), int(flow.period)
                n_windows = max(0, (horizon - offset) // period)
                windows = set(((transmit - offset) // period).tolist())
                assert set(range(n_windows)) <= windows

        for row in rows:
            assert_crossbar_safety(row, spec.n)
        assert_conservation(state)


@pytest.mark.integration
@pytest.mark.edge_case
def test_medf_with_large_coprime_periods():
    # Diagonal flows use M_1 and input 1 sends one flow in each other matching.
    flows = [(i, i, 0, 2) for i in range(4)] + [
        (0, 1, 0, 10_007),
        (0, 2, 0, 10_009),
        (0, 3, 0, 10_037),
    ]
    spec = TrafficSpec.from_flows(4, flows)
    tv = TVector((2, 10_007, 10_009, 10_037))
    cert = Sc2Certificate(cyclic_decomposition(4), tv)
    assert check_sc2_certificate(spec, cert)

    state, rows = run_switch(spec, SchedulerMode.medf(cert), 10)

    assert [row["matching"] for row in rows] == [1, 2, 1, 3, 1, 4, 1, None, 1, None]
    assert state.metrics.ts_expired.sum() == 0
    assert state.metrics.transmissions_frame().query("input == 1 and output > 1")[
        "transmit"
    ].tolist() == [1, 3, 5]


@pytest.mark.end_to_end
def test_random_scenarios(seed):
    scenario = process_scenario_or_seed(seed)

    report = ts.run(scenario)
    report_ = ts.run(scenario)

    assert report.rejected == []
    assert report.per_flow["expired"].sum() == 0
    pd.testing.assert_frame_equal(report.be, report_.be)
    pd.testing.assert_frame_equal(report.transmissions, report_.transmissions)

    be = report.be
    assert (be["arrivals"] == be["delivered"] + be["drops"] + be["backlog"]).all()
    assert len(report.trace) == report.n_slots


@pytest.mark.end_to_end
@pytest.mark.slow
def test_parallel_simulation_equals_serial_simulation(seed):
    scenarios = [process_scenario_or_seed(seed + i) for i in range(3)]

    serial = ts.simulate_scenarios(scenarios)
    parallel = ts.simulate_scenarios(scenarios, n_jobs=2)

    for report, report_ in zip(serial, parallel):
        pd.testing.assert_frame_equal(report.per_flow, report_.per_flow)
        pd.testing.assert_frame_equal(report.be, report_.be)


@pytest.mark.integration
def test_dynamic_subscription():
    scenario = {
        "n": 2,
        "ts_flows": [
            {"input": 1, "output": 1, "offset": 0, "period": 1},
            {"input": 1, "output": 2, "offset": 3, "period": 1, "start": 3},
            {"input": 2, "output": 2, "offset": 4, "period": 2, "start": 4},
        ],
        "subscription": "dynamic",
        "sim_slots": 12,
    }
    with pytest.warns(UserWarning, match="dynamic subscription"):
        report = ts.run(scenario)

    assert report.admitted == [(1, 1, 0, 1), (2, 2, 4, 2)]
    assert report.rejected == [(1, 2, 3, 1)]
    assert report.mode.variant == "medf"
    assert report.per_flow.loc[(2, 2), "arrivals"] == 4
    assert report.per_flow["expired"].sum() == 0
    assert report.to_dict()["rejected"] == [[1, 2]]


@pytest.mark.end_to_end
@pytest.mark.edge_case
def test_forced_mtdma_without_sc1_loses_cells():
    scenario = ts.get_example_scenario("example2", as_dict=True)
    scenario["mode"] = "mtdma"

    with pytest.warns(UserWarning, match="SC1 does not hold"):
        report = ts.run(scenario)

    assert report.rejected == []
    assert report.per_flow["expired"].sum() > 0


@pytest.mark.integration
@pytest.mark.edge_case
def test_full_voqs_drop_best_effort_cells():
    cell = {"slot": 0, "input": 1, "output": 2}
    scenario = {
        "n": 2,
        "be_traffic": {"explicit": [cell, cell, cell]},
        "voq_capacity": 1,
        "sim_slots": 3,
    }
    report = ts.run(scenario)

    assert report.per_flow.empty
    assert report.be.loc[(1, 2), "drops"] == 2
    assert report.be.loc[(1, 2), "delivered"] == 1
    assert report.to_dict()["be"] == {
        "arrivals": 3,
        "delivered": 1,
        "drops": 2,
        "mean_backlog": 0.0,
    }


@pytest.mark.unit
def test_best_effort_cell_outside_switch_raises():
    mode = SchedulerMode.mtdma(cyclic_decomposition(2))
    state = SwitchState(TrafficSpec.empty(2), mode, 4)
    with pytest.raises(ScenarioError, match="outside"):
        step(state, [(2, 0)])


@pytest.mark.unit
def test_step_serves_cells_in_arrival_slot():
    spec = TrafficSpec.from_flows(2, [(0, 1, 1, 2)])
    state = SwitchState(spec, SchedulerMode.mtdma(cyclic_decomposition(2)), 4)

    state, row = step(state)
    assert row["ts_pairs"] == []
    assert row["be_pairs"] == [(1, 1), (2, 2)]

    state, row = step(state)
    assert row["matching"] == 2
    assert row["ts_pairs"] == [(1, 2)]
    assert state.metrics.transmissions == [(1, 2, 0, 1, 1)]


@pytest.mark.unit
def test_oracle_requires_sc1():
    spec = TrafficSpec.from_flows(4, [(0, 0, 0, 2)])
    with pytest.raises(ValueError, match="SC1"):
        oracle_schedule_mtdma(spec, cyclic_decomposition(4), 10)
