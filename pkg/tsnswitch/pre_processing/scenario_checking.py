"""Everything related to validate scenarios."""
import numpy as np

from tsnswitch.config import DEFAULT_OPTIONS
from tsnswitch.config import MIN_PORTS
from tsnswitch.config import SCHEDULER_MODES
from tsnswitch.config import SUBSCRIPTION_MODES
from tsnswitch.shared import ScenarioError
from tsnswitch.shared import parse_period

FLOW_KEYS = {"input", "output", "offset", "period"}
OPTIONAL_FLOW_KEYS = {"start"}
SCENARIO_KEYS = {"n", "ts_flows"} | set(DEFAULT_OPTIONS)


def validate_scenario(s):
    """Validate a scenario which is already merged with the default options.

    Raises
    ------
    ScenarioError
        The message starts with the path of the offending field, e.g.,
        ``ts_flows[2].period``.

    """
    if not isinstance(s, dict):
        raise ScenarioError(f"A scenario must be a mapping, got {type(s).__name__}.")

    unknown = set(s) - SCENARIO_KEYS
    if unknown:
        raise ScenarioError(f"Unknown fields: {sorted(unknown)}.")
    if "n" not in s:
        raise ScenarioError("n: The number of ports is missing.")

    _check(_is_integer(s["n"]) and s["n"] >= MIN_PORTS, "n", f"must be >= {MIN_PORTS}")
    n = s["n"]

    _validate_ts_flows(s.get("ts_flows", []), n)

    _check(_is_positive_integer(s["voq_capacity"]), "voq_capacity", "must be >= 1")
    _check(
        s["sim_slots"] == "auto" or _is_positive_integer(s["sim_slots"]),
        "sim_slots",
        "must be 'auto' or a positive integer",
    )
    _check(s["mode"] in SCHEDULER_MODES, "mode", f"must be in {SCHEDULER_MODES}")
    _check(
        s["subscription"] in SUBSCRIPTION_MODES,
        "subscription",
        f"must be in {SUBSCRIPTION_MODES}",
    )
    _check(isinstance(s["emit_trace"], bool), "emit_trace", "must be a boolean")
    _check(_is_nonnegative_integer(s["seed"]), "seed", "must be >= 0")
    _check(
        s["islip_iterations"] is None or _is_positive_integer(s["islip_iterations"]),
        "islip_iterations",
        "must be a positive integer",
    )

    if s["decomposition"] is not None:
        _check(
            _is_integer_matrix(s["decomposition"], n),
            "decomposition",
            f"must be a {n}x{n} matrix of integers",
        )
    if s["tvector"] is not None:
        _validate_tvector(s["tvector"], n)
    if s["mtdma_order"] is not None:
        order = s["mtdma_order"]
        _check(
            isinstance(order, list) and sorted(order) == list(range(1, n + 1)),
            "mtdma_order",
            f"must be a permutation of 1, ..., {n}",
        )
    if s["be_traffic"] is not None:
        _validate_be_traffic(s["be_traffic"], n)


def _validate_ts_flows(flows, n):
    _check(isinstance(flows, list), "ts_flows", "must be a list")

    seen = {}
    for idx, flow in enumerate(flows):
        path = f"ts_flows[{idx}]"
        _check(isinstance(flow, dict), path, "must be a mapping")

        missing = FLOW_KEYS - set(flow)
        unknown = set(flow) - FLOW_KEYS - OPTIONAL_FLOW_KEYS
        _check(not missing, path, f"misses {sorted(missing)}")
        _check(not unknown, path, f"has unknown fields {sorted(unknown)}")

        for port in ["input", "output"]:
            _check(
                _is_integer(flow[port]) and 1 <= flow[port] <= n,
                f"{path}.{port}",
                f"must be in [1, {n}]",
            )
        _check_nonnegative(flow["offset"], f"{path}.offset")
        _check(
            _is_positive_integer(flow["period"]),
            f"{path}.period",
            "must be a positive integer",
        )
        if "start" in flow:
            _check_nonnegative(flow["start"], f"{path}.start")

        key = (flow["input"], flow["output"])
        if key in seen:
            raise ScenarioError(
                f"{path}: Flow {key} is already listed in ts_flows[{seen[key]}]."
            )
        seen[key] = idx


def _validate_tvector(tvector, n):
    _check(
        isinstance(tvector, list) and len(tvector) == n,
        "tvector",
        f"must be a list of {n} periods",
    )
    for idx, period in enumerate(tvector):
        try:
            parse_period(period)
        except ValueError as e:
            raise ScenarioError(f"tvector[{idx}]: {e}") from e


def _validate_be_traffic(be_traffic, n):
    _check(
        isinstance(be_traffic, dict) and len(be_traffic) == 1,
        "be_traffic",
        "must have exactly one of 'explicit' or 'bernoulli'",
    )

    if "explicit" in be_traffic:
        cells = be_traffic["explicit"]
        _check(isinstance(cells, list), "be_traffic.explicit", "must be a list")
        for idx, cell in enumerate(cells):
            path = f"be_traffic.explicit[{idx}]"
            _check(
                isinstance(cell, dict) and set(cell) == {"slot", "input", "output"},
                path,
                "must have the fields 'slot', 'input' and 'output'",
            )
            _check_nonnegative(cell["slot"], f"{path}.slot")
            for port in ["input", "output"]:
                _check(
                    _is_integer(cell[port]) and 1 <= cell[port] <= n,
                    f"{path}.{port}",
                    f"must be in [1, {n}]",
                )

    elif "bernoulli" in be_traffic:
        bernoulli = be_traffic["bernoulli"]
        path = "be_traffic.bernoulli"
        _check(
            isinstance(bernoulli, dict)
            and "rate" in bernoulli
            and set(bernoulli) <= {"rate", "seed"},
            path,
            "must have the field 'rate' and optionally 'seed'",
        )
        rate = bernoulli["rate"]
        _check(
            _is_probability(rate) or _is_probability_matrix(rate, n),
            f"{path}.rate",
            f"must be a probability or a {n}x{n} matrix of probabilities",
        )
        if "seed" in bernoulli:
            _check_nonnegative(bernoulli["seed"], f"{path}.seed")

    else:
        raise ScenarioError(
            f"be_traffic: Unknown traffic type {sorted(be_traffic)[0]!r}. Use "
            "'explicit' or 'bernoulli'."
        )


def _check(condition, path, message):
    if not condition:
        raise ScenarioError(f"{path}: Value {message}.")


def _check_nonnegative(value, path):
    _check(_is_nonnegative_integer(value), path, "must be a non-negative integer")


def _is_integer(x):
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _is_positive_integer(x):
    return _is_integer(x) and x > 0


def _is_nonnegative_integer(x):
    return _is_integer(x) and x >= 0


def _is_probability(x):
    return (
        isinstance(x, (int, float, np.number))
        and not isinstance(x, bool)
        and 0 <= x <= 1
    )


def _is_integer_matrix(x, n):
    return (
        isinstance(x, list)
        and len(x) == n
        and all(
            isinstance(row, list) and len(row) == n and all(map(_is_integer, row))
            for row in x
        )
    )


def _is_probability_matrix(x, n):
    return (
        isinstance(x, list)
        and len(x) == n
        and all(
            isinstance(row, list) and len(row) == n and all(map(_is_probability, row))
            for row in x
        )
    )
