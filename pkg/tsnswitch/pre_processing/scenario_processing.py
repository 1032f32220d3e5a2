"""Process scenario files or objects.

A scenario describes a switch, the time-sensitive flows which request a subscription
and the best-effort traffic. Ports are 1-indexed in scenarios.

.. code-block:: yaml

    n: 4
    ts_flows:
      - {input: 1, output: 1, offset: 0, period: 3}
    be_traffic:
      explicit:
        - {slot: 0, input: 1, output: 2}
    mode: auto

Scenarios are read with :func:`yaml.safe_load` and thus, JSON documents are accepted
as well.

"""
import copy
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

import yaml

from tsnswitch.config import DEFAULT_OPTIONS
from tsnswitch.config import EXAMPLE_SCENARIO_ALIASES
from tsnswitch.config import EXAMPLE_SCENARIOS
from tsnswitch.config import TEST_RESOURCES_DIR
from tsnswitch.edf import TVector
from tsnswitch.latin import LatinSquare
from tsnswitch.latin import decomposition_to_latin
from tsnswitch.latin import latin_to_decomposition
from tsnswitch.pre_processing.scenario_checking import validate_scenario
from tsnswitch.shared import ScenarioError


@dataclass(frozen=True, eq=False)
class Scenario:
    """A validated scenario with 0-indexed ports.

    ``ts_flows`` contains ``(input, output, offset, period)`` tuples and ``starts`` maps
    the ports of a flow to the slot at which it requests its subscription. Flows
    without a start request it at slot 0.

    """

    n: int
    ts_flows: tuple
    starts: dict = field(default_factory=dict)
    be_traffic: dict = None
    voq_capacity: int = DEFAULT_OPTIONS["voq_capacity"]
    sim_slots: object = DEFAULT_OPTIONS["sim_slots"]
    mode: str = DEFAULT_OPTIONS["mode"]
    subscription: str = DEFAULT_OPTIONS["subscription"]
    emit_trace: bool = DEFAULT_OPTIONS["emit_trace"]
    seed: int = DEFAULT_OPTIONS["seed"]
    islip_iterations: int = DEFAULT_OPTIONS["islip_iterations"]
    decomposition: object = None
    tvector: TVector = None
    mtdma_order: tuple = None


def parse_scenario(text):
    """Parse a YAML or JSON document into a :class:`Scenario`.

    Raises
    ------
    ScenarioError
        If the document is malformed, with the line and column of the problem, or if it
        violates the schema, with the path of the offending field.

    """
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        if mark is None:
            location = ""
        else:
            location = f" at line {mark.line + 1}, column {mark.column + 1}"
        problem = getattr(e, "problem", None) or str(e)
        raise ScenarioError(f"Malformed document{location}: {problem}.") from e

    if not isinstance(raw, dict):
        raise ScenarioError("A scenario must be a mapping.")

    return process_scenario(raw)


def process_scenario(scenario):
    """Process a scenario given as a dictionary, a path or an example name.

    A string is interpreted as the name of a bundled example, e.g., ``"example1"`` or
    ``"appendixD.json"``, if it is one and as a path otherwise.

    """
    if isinstance(scenario, Scenario):
        return scenario
    elif isinstance(scenario, dict):
        raw = copy.deepcopy(scenario)
    elif isinstance(scenario, (str, Path)):
        return parse_scenario(_resolve_scenario_path(scenario).read_text())
    else:
        raise TypeError("scenario must be a dictionary, a pathlib.Path or a string.")

    if not isinstance(raw, dict):
        raise ScenarioError("A scenario must be a mapping.")
    raw = {**DEFAULT_OPTIONS, **raw}
    validate_scenario(raw)

    return _create_scenario(raw)


def _resolve_scenario_path(name_or_path):
    """Map the name of a bundled example to its resource and return other paths."""
    path = Path(name_or_path)
    name = EXAMPLE_SCENARIO_ALIASES.get(path.stem, path.stem)
    if name in EXAMPLE_SCENARIOS and not path.exists():
        path = TEST_RESOURCES_DIR / f"{name}.yaml"
    if not path.exists():
        raise ScenarioError(f"Scenario file {name_or_path} does not exist.")

    return path


def _create_scenario(raw):
    """Convert a validated dictionary to a :class:`Scenario`."""
    n = raw["n"]
    flows = raw.get("ts_flows", [])

    ts_flows = tuple(
        (f["input"] - 1, f["output"] - 1, f["offset"], f["period"]) for f in flows
    )
    starts = {
        (f["input"] - 1, f["output"] - 1): f["start"] for f in flows if "start" in f
    }

    if raw["decomposition"] is None:
        decomposition = None
    else:
        try:
            decomposition = latin_to_decomposition(LatinSquare(raw["decomposition"]))
        except ValueError as e:
            raise ScenarioError(f"decomposition: {e}") from e

    tvector = None if raw["tvector"] is None else TVector(tuple(raw["tvector"]))
    order = None if raw["mtdma_order"] is None else tuple(raw["mtdma_order"])

    return Scenario(
        n=n,
        ts_flows=ts_flows,
        starts=starts,
        be_traffic=_process_be_traffic(raw["be_traffic"]),
        voq_capacity=raw["voq_capacity"],
        sim_slots=raw["sim_slots"],
        mode=raw["mode"],
        subscription=raw["subscription"],
        emit_trace=raw["emit_trace"],
        seed=raw["seed"],
        islip_iterations=raw["islip_iterations"],
        decomposition=decomposition,
        tvector=tvector,
        mtdma_order=order,
    )


def _process_be_traffic(be_traffic):
    """Convert explicit best-effort cells to 0-indexed ``(slot, input, output)``."""
    if be_traffic is None:
        out = None
    elif "explicit" in be_traffic:
        cells = tuple(
            (c["slot"], c["input"] - 1, c["output"] - 1)
            for c in be_traffic["explicit"]
        )
        out = {"explicit": cells}
    else:
        out = {"bernoulli": copy.deepcopy(be_traffic["bernoulli"])}

    return out


def scenario_to_dict(scenario):
    """Serialize a scenario to a dictionary which :func:`process_scenario` accepts.

    All options are written explicitly so that the output does not depend on defaults.

    """
    flows = []
    for i, j, offset, period in scenario.ts_flows:
        flow = {"input": i + 1, "output": j + 1, "offset": offset, "period": period}
        if (i, j) in scenario.starts:
            flow["start"] = scenario.starts[i, j]
        flows.append(flow)

    be_traffic = scenario.be_traffic
    if be_traffic is not None and "explicit" in be_traffic:
        be_traffic = {
            "explicit": [
                {"slot": slot, "input": i + 1, "output": j + 1}
                for slot, i, j in be_traffic["explicit"]
            ]
        }

    decomposition = (
        None
        if scenario.decomposition is None
        else decomposition_to_latin(scenario.decomposition).to_rows()
    )

    return {
        "n": scenario.n,
        "ts_flows": flows,
        "be_traffic": copy.deepcopy(be_traffic),
        "voq_capacity": scenario.voq_capacity,
        "sim_slots": scenario.sim_slots,
        "mode": scenario.mode,
        "subscription": scenario.subscription,
        "emit_trace": scenario.emit_trace,
        "seed": scenario.seed,
        "islip_iterations": scenario.islip_iterations,
        "decomposition": decomposition,
        "tvector": None if scenario.tvector is None else scenario.tvector.to_list(),
        "mtdma_order": (
            None if scenario.mtdma_order is None else list(scenario.mtdma_order)
        ),
    }
