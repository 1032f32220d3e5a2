import json

import numpy as np
import pytest
import yaml

from tsnswitch.config import EXAMPLE_SCENARIOS
from tsnswitch.config import INFINITY
from tsnswitch.interface import get_example_scenario
from tsnswitch.latin import cyclic_decomposition
from tsnswitch.pre_processing.scenario_processing import Scenario
from tsnswitch.pre_processing.scenario_processing import parse_scenario
from tsnswitch.pre_processing.scenario_processing import process_scenario
from tsnswitch.pre_processing.scenario_processing import scenario_to_dict
from tsnswitch.shared import ScenarioError
from tsnswitch.tests.utils import process_scenario_or_seed


def _minimal_scenario(**kwargs):
    return {
        "n": 4,
        "ts_flows": [{"input": 1, "output": 2, "offset": 0, "period": 4}],
        **kwargs,
    }


@pytest.mark.unit
@pytest.mark.parametrize("scenario", EXAMPLE_SCENARIOS)
def test_round_trip_of_examples(scenario):
    processed = process_scenario(process_scenario_or_seed(scenario))
    processed_ = process_scenario(scenario_to_dict(processed))

    assert scenario_to_dict(processed_) == scenario_to_dict(processed)


@pytest.mark.unit
def test_round_trip_of_random_scenarios(seed):
    raw = process_scenario_or_seed(seed)
    for flow in raw["ts_flows"][:1]:
        flow["start"] = 2
    raw["tvector"] = [3, "inf"] + [4] * (raw["n"] - 2)
    raw["mtdma_order"] = list(range(raw["n"], 0, -1))

    processed = process_scenario(raw)
    processed_ = parse_scenario(json.dumps(scenario_to_dict(processed)))

    assert scenario_to_dict(processed_) == scenario_to_dict(processed)
    assert processed.tvector.period(2) == INFINITY


@pytest.mark.unit
def test_ports_are_converted_to_zero_based_indices():
    scenario = process_scenario(
        _minimal_scenario(
            be_traffic={"explicit": [{"slot": 3, "input": 4, "output": 1}]},
            decomposition=[[1, 2, 3, 4], [4, 1, 2, 3], [3, 4, 1, 2], [2, 3, 4, 1]],
        )
    )

    assert isinstance(scenario, Scenario)
    assert scenario.ts_flows == ((0, 1, 0, 4),)
    assert scenario.be_traffic == {"explicit": ((3, 3, 0),)}
    assert scenario.decomposition == cyclic_decomposition(4)


@pytest.mark.unit
def test_defaults_are_merged():
    scenario = process_scenario(_minimal_scenario())

    assert scenario.voq_capacity == 64
    assert scenario.sim_slots == "auto"
    assert scenario.mode == "auto"
    assert scenario.subscription == "static"
    assert scenario.be_traffic is None


@pytest.mark.unit
def test_json_documents_are_accepted():
    text = json.dumps(_minimal_scenario(mode="medf"))
    assert parse_scenario(text).mode == "medf"


@pytest.mark.unit
def test_malformed_document_reports_location():
    with pytest.raises(ScenarioError, match="line 2"):
        parse_scenario('{"n": 4,\n  "ts_flows": [}')


@pytest.mark.unit
@pytest.mark.parametrize(
    "update, path",
    [
        ({"n": 1}, "n"),
        ({"n": True}, "n"),
        ({"voq_capacity": 0}, "voq_capacity"),
        ({"sim_slots": "long"}, "sim_slots"),
        ({"mode": "fifo"}, "mode"),
        ({"subscription": "later"}, "subscription"),
        ({"emit_trace": "yes"}, "emit_trace"),
        ({"seed": -1}, "seed"),
        ({"islip_iterations": 0}, "islip_iterations"),
        ({"decomposition": [[1, 2]]}, "decomposition"),
        ({"tvector": [1, 2, 3]}, "tvector"),
        ({"tvector": [1, 2, 0, 4]}, r"tvector\[2\]"),
        ({"mtdma_order": [1, 1, 2, 3]}, "mtdma_order"),
        ({"be_traffic": {"poisson": {}}}, "be_traffic"),
        ({"be_traffic": {"bernoulli": {"rate": 1.5}}}, r"be_traffic.bernoulli.rate"),
        (
            {"be_traffic": {"explicit": [{"slot": 0, "input": 5, "output": 1}]}},
            r"be_traffic.explicit\[0\].input",
        ),
    ],
)
def test_invalid_options(update, path):
    with pytest.raises(ScenarioError, match=f"^{path}"):
        process_scenario(_minimal_scenario(**update))


@pytest.mark.unit
@pytest.mark.parametrize(
    "flow, path",
    [
        ({"input": 1, "output": 5, "offset": 0, "period": 4}, r"ts_flows\[1\].output"),
        ({"input": 1, "output": 3, "offset": -1, "period": 4}, r"ts_flows\[1\].offset"),
        ({"input": 1, "output": 3, "offset": 0, "period": 0}, r"ts_flows\[1\].period"),
        ({"input": 1, "output": 3, "offset": 0, "period": "inf"}, r"ts_flows\[1\]"),
        ({"input": 1, "output": 3, "offset": 0}, r"ts_flows\[1\]"),
        ({"input": 1, "output": 3, "offset": 0, "period": 4, "x": 1}, r"ts_flows\[1\]"),
        ({"input": 1, "output": 2, "offset": 1, "period": 5}, r"ts_flows\[1\]"),
    ],
)
def test_invalid_flows(flow, path):
    scenario = _minimal_scenario()
    scenario["ts_flows"].append(flow)

    with pytest.raises(ScenarioError, match=f"^{path}"):
        process_scenario(scenario)


@pytest.mark.unit
def test_duplicate_flows_name_both_entries():
    scenario = _minimal_scenario()
    scenario["ts_flows"].append({"input": 1, "output": 2, "offset": 1, "period": 5})

    with pytest.raises(ScenarioError, match=r"already listed in ts_flows\[0\]"):
        process_scenario(scenario)


@pytest.mark.unit
def test_invalid_latin_square_is_a_scenario_error():
    with pytest.raises(ScenarioError, match="^decomposition"):
        process_scenario(_minimal_scenario(decomposition=[[1, 2, 3, 4]] * 4))


@pytest.mark.unit
def test_unknown_fields_and_missing_size():
    with pytest.raises(ScenarioError, match="Unknown fields"):
        process_scenario(_minimal_scenario(speed=10))
    with pytest.raises(ScenarioError, match="^n"):
        process_scenario({"ts_flows": []})
    with pytest.raises(ScenarioError, match="mapping"):
        parse_scenario("- 1\n- 2")


@pytest.mark.unit
def test_missing_scenario_file_raises(tmp_path):
    with pytest.raises(ScenarioError, match="does not exist"):
        process_scenario(tmp_path / "missing.yaml")


@pytest.mark.unit
def test_scenario_files_are_read(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(yaml.safe_dump(_minimal_scenario(sim_slots=17)))

    assert process_scenario(path).sim_slots == 17
    assert process_scenario(str(path)).sim_slots == 17


@pytest.mark.unit
def test_bernoulli_rate_matrix():
    rate = np.full((4, 4), 0.25).tolist()
    scenario = process_scenario(
        _minimal_scenario(be_traffic={"bernoulli": {"rate": rate, "seed": 3}})
    )
    assert scenario.be_traffic["bernoulli"]["seed"] == 3


@pytest.mark.unit
def test_processed_example_is_returned_as_is():
    scenario = get_example_scenario("example1")
    assert process_scenario(scenario) is scenario


@pytest.mark.unit
@pytest.mark.parametrize(
    "name", ["appendix_d", "appendix_d.json", "appendixD", "appendixD.json"]
)
def test_bundled_scenario_names_are_resolved(name):
    scenario = process_scenario(name)

    assert scenario_to_dict(scenario) == scenario_to_dict(
        get_example_scenario("appendixD")
    )
    assert scenario.n == 4
    assert len(scenario.ts_flows) == 3
