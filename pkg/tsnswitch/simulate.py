"""Everything related to the slot-level simulation of the switch.

Within every slot, the switch

1. lets the arbiter decide on new subscriptions (only with dynamic subscription),
2. stores arriving time-sensitive cells in the TS matrix,
3. enqueues arriving best-effort cells in their VOQ or drops them if the VOQ is full,
4. selects a matching for time-sensitive flows and masks it with the TS matrix,
5. selects best-effort pairs with iSLIP on the remaining ports,
6. transfers the selected cells through the crossbar,
7. and discards time-sensitive cells which reach the end of their lifetime.

"""
import collections
import functools
import logging
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from tsnswitch.admission import admit_flows
from tsnswitch.admission import arbiter_admit
from tsnswitch.admission import check_sc1
from tsnswitch.config import AUTO_HORIZON_HYPERPERIODS
from tsnswitch.config import IDLE
from tsnswitch.latin import decomposition_to_latin
from tsnswitch.parallelization import map_in_parallel
from tsnswitch.pre_processing.scenario_processing import process_scenario
from tsnswitch.scheduler import IslipState
from tsnswitch.scheduler import islip_select
from tsnswitch.scheduler import mask_by_ts_matrix
from tsnswitch.scheduler import resolve_scheduler_mode
from tsnswitch.shared import ScenarioError
from tsnswitch.shared import TrafficSpec
from tsnswitch.shared import create_ts_cell
from tsnswitch.shared import hyperperiod
from tsnswitch.shared import is_matching
from tsnswitch.shared import matching_to_pairs

logger = logging.getLogger(__name__)


class MetricsAccumulator:
    """Counters for time-sensitive and best-effort traffic.

    All matrices have shape (n, n) and are indexed by 0-indexed input and output.

    """

    def __init__(self, n):
        self.n = n
        self.ts_arrivals = np.zeros((n, n), dtype=np.int64)
        self.ts_delivered = np.zeros((n, n), dtype=np.int64)
        self.ts_expired = np.zeros((n, n), dtype=np.int64)
        self.transmissions = []
        self.be_arrivals = np.zeros((n, n), dtype=np.int64)
        self.be_delivered = np.zeros((n, n), dtype=np.int64)
        self.be_drops = np.zeros((n, n), dtype=np.int64)
        self.be_backlog = []

    def record_ts_delivery(self, cell, slot):
        self.ts_delivered[cell.input, cell.output] += 1
        self.transmissions.append(
            (cell.input + 1, cell.output + 1, cell.seq, cell.arrival_slot, slot)
        )

    def transmissions_frame(self):
        """Return a DataFrame with one row per delivered time-sensitive cell."""
        df = pd.DataFrame(
            self.transmissions,
            columns=["input", "output", "seq", "arrival", "transmit"],
            dtype=np.int64,
        )
        df["delay"] = df["transmit"] - df["arrival"]

        return df


class SwitchState:
    """The state of the switch at the beginning of a slot.

    Parameters
    ----------
    metadata : TrafficSpec
        The metadata table with all subscribed flows.
    mode : SchedulerMode
        Policy of the first scheduling step.
    voq_capacity : int
        Maximum number of cells in a VOQ.
    islip_iterations : int, optional
        Number of iSLIP iterations. Defaults to the number of ports.
    pending : dict, optional
        Maps slots to lists of ``(input, output, offset, period)`` which request their
        subscription at that slot.
    resolve_mode : callable, optional
        Function which maps a metadata table to a scheduler mode. It is called after
        each admission of a pending flow.

    """

    def __init__(
        self,
        metadata,
        mode,
        voq_capacity,
        islip_iterations=None,
        pending=None,
        resolve_mode=None,
    ):
        n = metadata.n
        self.slot = 0
        self.metadata = metadata
        self.mode = mode
        self.capacity = voq_capacity
        self.islip = IslipState.initial(n)
        self.islip_iterations = islip_iterations
        self.ts_live = np.zeros((n, n), dtype=np.uint8)
        self.ts_cells = {}
        self.voq = [[collections.deque() for _ in range(n)] for _ in range(n)]
        self.starts = np.zeros((n, n))
        self.pending = {} if pending is None else pending
        self.resolve_mode = resolve_mode
        self.admitted = []
        self.rejected = []
        self.metrics = MetricsAccumulator(n)

    @property
    def n(self):
        return self.metadata.n

    def voq_lengths(self):
        return np.array([[len(q) for q in row] for row in self.voq], dtype=np.int64)


def step(state, be_arrivals=()):
    """Advance the switch by one slot.

    Parameters
    ----------
    state : SwitchState
        The state is updated in-place.
    be_arrivals : iterable of tuple
        0-indexed ``(input, output)`` of best-effort cells arriving in this slot.

    Returns
    -------
    state : SwitchState
    row : dict
        Trace of the slot where all pairs are 1-indexed.

    """
    t = state.slot
    n = state.n
    metrics = state.metrics

    _process_pending_subscriptions(state)

    # Time-sensitive arrivals.
    for i, j in zip(*np.nonzero(_ts_arrivals(state.metadata, state.starts, t))):
        assert not state.ts_live[i, j], f"Cell of flow ({i + 1}, {j + 1}) overlaps."
        s = int((t - state.metadata.offset[i, j]) // state.metadata.period[i, j])
        state.ts_cells[i, j] = create_ts_cell(state.metadata, i, j, s)
        state.ts_live[i, j] = 1
        metrics.ts_arrivals[i, j] += 1

    # Best-effort arrivals.
    for i, j in be_arrivals:
        if not (0 <= i < n and 0 <= j < n):
            raise ScenarioError(
                f"Best-effort cell at slot {t} addressed to ({i + 1}, {j + 1}) is "
                f"outside of the {n}x{n} switch."
            )
        metrics.be_arrivals[i, j] += 1
        if len(state.voq[i][j]) < state.capacity:
            state.voq[i][j].append(t)
        else:
            metrics.be_drops[i, j] += 1

    # Step 1: time-sensitive flows.
    label, matching = state.mode.select(t)
    ts_matching = mask_by_ts_matrix(matching, state.ts_live)
    ts_pairs = matching_to_pairs(ts_matching)

    # Step 2: best-effort flows.
    be_matching, state.islip = islip_select(
        state.voq_lengths() > 0,
        busy_inputs=[i for i, _ in ts_pairs],
        busy_outputs=[j for _, j in ts_pairs],
        state=state.islip,
        iterations=state.islip_iterations,
    )
    be_pairs = matching_to_pairs(be_matching)

    union = ts_matching + be_matching
    assert is_matching(union) and union.sum() == n, "Crossbar constraint is violated."

    # Crossbar transfer.
    for i, j in ts_pairs:
        cell = state.ts_cells.pop((i, j))
        state.ts_live[i, j] = 0
        metrics.record_ts_delivery(cell, t)

    be_transfers = []
    for i, j in be_pairs:
        if state.voq[i][j]:
            state.voq[i][j].popleft()
            metrics.be_delivered[i, j] += 1
            be_transfers.append((i, j))

    # Expiry sweep.
    expired = [key for key, cell in state.ts_cells.items() if cell.deadline_slot == t]
    for i, j in expired:
        del state.ts_cells[i, j]
        state.ts_live[i, j] = 0
        metrics.ts_expired[i, j] += 1
    if expired:
        logger.warning("%d time-sensitive cells expired in slot %d.", len(expired), t)

    metrics.be_backlog.append(int(state.voq_lengths().sum()))
    state.slot += 1

    row = {
        "slot": t,
        "mode": state.mode.variant,
        "matching": None if label == IDLE else label,
        "ts_pairs": _to_external_pairs(ts_pairs),
        "be_pairs": _to_external_pairs(be_pairs),
        "be_transfers": _to_external_pairs(be_transfers),
        "expired": _to_external_pairs(sorted(expired)),
    }

    return state, row


def _ts_arrivals(metadata, starts, t):
    """Compute the mask of flows whose next cell arrives at slot t."""
    with np.errstate(invalid="ignore"):
        elapsed = t - metadata.offset
        is_release = np.fmod(elapsed, metadata.period) == 0

    return metadata.present & (elapsed >= 0) & is_release & (starts <= t)


def _process_pending_subscriptions(state):
    """Offer flows which request their subscription in this slot to the arbiter."""
    for flow in state.pending.pop(state.slot, []):
        i, j = flow[:2]
        decision = arbiter_admit(state.metadata, flow)
        if decision.is_admitted:
            state.metadata = decision.table
            state.starts[i, j] = state.slot
            state.mode = state.resolve_mode(state.metadata)
            state.admitted.append(flow)
        else:
            state.rejected.append(flow)


def _to_external_pairs(pairs):
    return [(int(i) + 1, int(j) + 1) for i, j in pairs]


@dataclass(frozen=True, eq=False)
class SimulationReport:
    """Results of a simulation.

    Attributes
    ----------
    admitted, rejected : list of tuple
        Requested flows as ``(input, output, offset, period)`` with 1-indexed ports.
    mode : SchedulerMode or None
        The policy at the end of the simulation.
    n_slots : int
    per_flow : pandas.DataFrame
        Arrivals, deliveries, expirations, delays and cells alive at the end for every
        admitted flow indexed by input and output.
    be : pandas.DataFrame
        Arrivals, deliveries, drops and backlog at the end for every VOQ.
    be_backlog : numpy.ndarray
        Number of cells in all VOQs at the end of every slot.
    transmissions : pandas.DataFrame
        One row per delivered time-sensitive cell.
    trace : pandas.DataFrame or None
        One row per slot if the trace was requested.

    """

    admitted: list
    rejected: list
    mode: object
    n_slots: int
    per_flow: pd.DataFrame
    be: pd.DataFrame
    be_backlog: np.ndarray
    transmissions: pd.DataFrame
    trace: pd.DataFrame = None

    def to_dict(self):
        """Convert the report to a JSON-serializable dictionary."""
        out = {
            "admitted": [list(flow[:2]) for flow in self.admitted],
            "rejected": [list(flow[:2]) for flow in self.rejected],
            "mode": None if self.mode is None else self.mode.variant,
        }
        if self.mode is not None and self.mode.certificate is not None:
            out["certificate"] = self.mode.certificate.to_dict()
        out["n_slots"] = self.n_slots

        out["per_flow"] = {}
        for (i, j), row in self.per_flow.iterrows():
            delivered = int(row["delivered"])
            out["per_flow"][f"{i},{j}"] = {
                "arrivals": int(row["arrivals"]),
                "delivered": delivered,
                "expired": int(row["expired"]),
                "max_delay": int(row["max_delay"]) if delivered else None,
                "mean_delay": float(row["mean_delay"]) if delivered else None,
            }

        out["be"] = {
            "arrivals": int(self.be["arrivals"].sum()),
            "delivered": int(self.be["delivered"].sum()),
            "drops": int(self.be["drops"].sum()),
            "mean_backlog": (
                float(self.be_backlog.mean()) if self.be_backlog.size else 0.0
            ),
        }

        return out


def get_simulate_func(scenario, n_jobs=1):
    """Get the simulation function.

    The scenario is processed, the flows are subscribed at slot 0 with static
    subscription and the scheduler mode is resolved once. The returned function runs a
    new simulation on every call.

    Parameters
    ----------
    scenario : Scenario, dict, pathlib.Path or str
        Anything :func:`~tsnswitch.pre_processing.scenario_processing.process_scenario`
        accepts.
    n_jobs : int
        Number of jobs for the search of an SC2 certificate.

    Returns
    -------
    simulate_function : :func:`simulate`
        Simulation function where all arguments except the number of slots are fixed.
        ``simulate_function(n_slots=None)`` uses the horizon of the scenario.

    """
    scenario = process_scenario(scenario)
    resolve_mode = functools.partial(
        resolve_scheduler_mode,
        mode=scenario.mode,
        decomposition=scenario.decomposition,
        tvector=scenario.tvector,
        order=scenario.mtdma_order,
        n_jobs=n_jobs,
    )

    if scenario.subscription == "static":
        table, admitted, rejected = admit_flows(
            scenario.n, list(scenario.ts_flows), n_jobs
        )
        pending = {}
    else:
        warnings.warn(
            "With dynamic subscription, policies might switch during the simulation "
            "and cells can expire.",
            category=UserWarning,
        )
        table, admitted, rejected = TrafficSpec.empty(scenario.n), [], []
        pending = collections.defaultdict(list)
        for flow in scenario.ts_flows:
            pending[scenario.starts.get(flow[:2], 0)].append(flow)

    mode = resolve_mode(table)
    assert mode is not None, "Admitted flows satisfy neither SC1 nor SC2."
    logger.info("Scheduling %r with %s.", table, mode.variant)

    simulate_function = functools.partial(
        simulate,
        scenario=scenario,
        table=table,
        mode=mode,
        admitted=admitted,
        rejected=rejected,
        pending=dict(pending),
        resolve_mode=resolve_mode,
    )

    return simulate_function


def simulate(
    n_slots=None,
    *,
    scenario,
    table,
    mode,
    admitted,
    rejected,
    pending,
    resolve_mode,
):
    """Simulate the switch slot by slot.

    Parameters
    ----------
    n_slots : int, optional
        Number of slots. Defaults to the horizon of the scenario.

    Returns
    -------
    report : SimulationReport

    """
    n_slots = compute_horizon(scenario) if n_slots is None else n_slots
    be_arrivals = create_be_arrivals(scenario, n_slots)

    state = SwitchState(
        table,
        mode,
        scenario.voq_capacity,
        scenario.islip_iterations,
        pending={slot: list(flows) for slot, flows in pending.items()},
        resolve_mode=resolve_mode,
    )
    state.admitted, state.rejected = list(admitted), list(rejected)

    rows = []
    for t in range(n_slots):
        state, row = step(state, be_arrivals.get(t, ()))
        if scenario.emit_trace:
            rows.append(row)

    report = _create_report(state, n_slots, rows if scenario.emit_trace else None)
    logger.info(
        "Simulated %d slots: %d time-sensitive cells delivered and %d expired.",
        n_slots,
        int(state.metrics.ts_delivered.sum()),
        int(state.metrics.ts_expired.sum()),
    )

    return report


def run(scenario, n_slots=None):
    """Process a scenario and simulate it over its horizon."""
    return get_simulate_func(scenario)(n_slots)


def simulate_scenarios(scenarios, n_jobs=1):
    """Simulate independent scenarios in parallel."""
    return map_in_parallel(run, scenarios, n_jobs)


def compute_horizon(scenario):
    """Compute the number of simulated slots of a scenario.

    With ``sim_slots="auto"``, the horizon covers the largest offset and ten
    hyperperiods of all requested flows.

    """
    if scenario.sim_slots != "auto":
        return scenario.sim_slots

    offsets = [flow[2] for flow in scenario.ts_flows]
    starts = list(scenario.starts.values())
    periods = [flow[3] for flow in scenario.ts_flows]

    n_hyperperiods = AUTO_HORIZON_HYPERPERIODS

    return max(offsets + starts, default=0) + n_hyperperiods * hyperperiod(periods)


def create_be_arrivals(scenario, n_slots):
    """Map slots to the 0-indexed ``(input, output)`` of arriving best-effort cells.

    Bernoulli traffic draws one cell per VOQ and slot with the given rate. The draws use
    the seed of the traffic or the scenario seed.

    """
    arrivals = collections.defaultdict(list)
    be_traffic = scenario.be_traffic

    if be_traffic is None:
        pass
    elif "explicit" in be_traffic:
        for slot, i, j in be_traffic["explicit"]:
            if slot < n_slots:
                arrivals[slot].append((i, j))
    else:
        bernoulli = be_traffic["bernoulli"]
        rng = np.random.default_rng(bernoulli.get("seed", scenario.seed))
        shape = (n_slots, scenario.n, scenario.n)
        draws = rng.random(shape) < np.asarray(bernoulli["rate"], dtype=float)
        for t, i, j in zip(*np.nonzero(draws)):
            arrivals[int(t)].append((int(i), int(j)))

    return dict(arrivals)


def _create_report(state, n_slots, rows):
    metrics = state.metrics
    transmissions = metrics.transmissions_frame()
    present = state.metadata.present

    inputs, outputs = np.nonzero(present)
    index = pd.MultiIndex.from_arrays(
        [inputs + 1, outputs + 1], names=["input", "output"]
    )
    per_flow = pd.DataFrame(
        {
            "arrivals": metrics.ts_arrivals[present],
            "delivered": metrics.ts_delivered[present],
            "expired": metrics.ts_expired[present],
            "live": state.ts_live[present].astype(np.int64),
        },
        index=index,
    )
    delays = transmissions.groupby(["input", "output"])["delay"].agg(["max", "mean"])
    per_flow = per_flow.join(
        delays.rename(columns={"max": "max_delay", "mean": "mean_delay"})
    )

    be_index = pd.MultiIndex.from_product(
        [range(1, state.n + 1)] * 2, names=["input", "output"]
    )
    be = pd.DataFrame(
        {
            "arrivals": metrics.be_arrivals.ravel(),
            "delivered": metrics.be_delivered.ravel(),
            "drops": metrics.be_drops.ravel(),
            "backlog": state.voq_lengths().ravel(),
        },
        index=be_index,
    )

    return SimulationReport(
        admitted=[_to_external_flow(flow) for flow in state.admitted],
        rejected=[_to_external_flow(flow) for flow in state.rejected],
        mode=state.mode,
        n_slots=n_slots,
        per_flow=per_flow,
        be=be,
        be_backlog=np.array(metrics.be_backlog, dtype=np.int64),
        transmissions=transmissions,
        trace=None if rows is None else trace_to_frame(rows),
    )


def _to_external_flow(flow):
    i, j, offset, period = flow
    return i + 1, j + 1, offset, period


def trace_to_frame(rows):
    """Convert trace rows to a DataFrame where pairs are written like ``1-2;3-4``."""
    df = pd.DataFrame(rows)
    for column in ["ts_pairs", "be_pairs", "be_transfers", "expired"]:
        df[column] = df[column].map(_format_pairs)
    df["matching"] = df["matching"].astype("Int64")

    return df


def _format_pairs(pairs):
    return ";".join(f"{i}-{j}" for i, j in pairs)


def oracle_schedule_mtdma(spec, d, horizon, order=None):
    """Compute the transmit slots of all cells under M-TDMA in closed form.

    Let matching :math:`M_k` be scheduled at position p of the order, i.e., at slots
    :math:`qN + p`. If SC1 holds, cell s of a flow in :math:`M_k` is transmitted at
    slot :math:`q(s) N + p` with :math:`q(s) = \\lceil (s T + offset - p) / N \\rceil`,
    the first such slot at or after its arrival.

    Parameters
    ----------
    spec : TrafficSpec
    d : FlowDecompositionSet
    horizon : int
        Only cells transmitted before this slot are returned.
    order : tuple of int, optional
        Order of the matchings. Defaults to ``1, ..., N``.

    Returns
    -------
    df : pandas.DataFrame
        One row per cell with 1-indexed ``input``, ``output`` and the columns ``seq``,
        ``arrival`` and ``transmit``.

    Raises
    ------
    ValueError
        If SC1 does not hold.

    """
    if not check_sc1(spec):
        raise ValueError("The closed form of M-TDMA requires SC1.")

    n = spec.n
    order = range(1, n + 1) if order is None else order
    position = {label: p for p, label in enumerate(order)}
    latin = decomposition_to_latin(d)

    rows = []
    for i, j, offset, period in spec.flows():
        p = position[int(latin.entries[i, j])]
        s = 0
        while offset + s * period < horizon:
            q = -(-(s * period + offset - p) // n)
            transmit = q * n + p
            if transmit < horizon:
                rows.append((i + 1, j + 1, s, offset + s * period, transmit))
            s += 1

    return pd.DataFrame(
        rows, columns=["input", "output", "seq", "arrival", "transmit"], dtype=np.int64
    )
