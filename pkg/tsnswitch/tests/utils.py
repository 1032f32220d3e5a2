import numpy as np

import tsnswitch as ts
from tsnswitch.simulate import SwitchState
from tsnswitch.simulate import step
from tsnswitch.tests.random_scenario import generate_random_scenario


def process_scenario_or_seed(scenario_or_seed=None, **kwargs):
    """Return a scenario dictionary for an example name or a random seed."""
    if isinstance(scenario_or_seed, str):
        scenario = ts.get_example_scenario(scenario_or_seed, as_dict=True)
    elif isinstance(scenario_or_seed, int):
        rng = np.random.default_rng(scenario_or_seed)
        scenario = generate_random_scenario(rng, **kwargs)
    else:
        raise ValueError

    return scenario


def run_switch(spec, mode, n_slots, be_arrivals=None, voq_capacity=64):
    """Step a switch with fixed subscriptions and collect all trace rows."""
    be_arrivals = {} if be_arrivals is None else be_arrivals
    state = SwitchState(spec, mode, voq_capacity)

    rows = []
    for t in range(n_slots):
        state, row = step(state, be_arrivals.get(t, ()))
        rows.append(row)

    return state, rows


def assert_conservation(state):
    """Check that no cell is created or lost inside the switch."""
    metrics = state.metrics
    np.testing.assert_array_equal(
        metrics.ts_arrivals,
        metrics.ts_delivered + metrics.ts_expired + state.ts_live,
    )
    np.testing.assert_array_equal(
        metrics.be_arrivals,
        metrics.be_delivered + metrics.be_drops + state.voq_lengths(),
    )


def assert_crossbar_safety(row, n):
    """Check that both scheduling steps together form a perfect matching."""
    pairs = row["ts_pairs"] + row["be_pairs"]
    assert len(pairs) == n
    assert len({i for i, _ in pairs}) == n
    assert len({j for _, j in pairs}) == n
    assert set(row["be_transfers"]) <= set(row["be_pairs"])
