"""General interface functions for tsnswitch."""
import yaml

from tsnswitch.config import EXAMPLE_SCENARIO_ALIASES
from tsnswitch.config import EXAMPLE_SCENARIOS
from tsnswitch.config import TEST_RESOURCES_DIR
from tsnswitch.pre_processing.scenario_processing import process_scenario


def get_example_scenario(scenario, as_dict=False):
    """Return a bundled example scenario.

    Parameters
    ----------
    scenario : str
        Choose one scenario name in ``{"example1", "example2", "appendix_d"}``. The
        alias ``"appendixD"`` is accepted as well.
        ``"example1"`` has periods of at least four slots on a 4x4 switch and is
        scheduled by M-TDMA. ``"example2"`` needs M-EDF with a T-vector of utilization
        one. ``"appendix_d"`` adds best-effort cells to three time-sensitive flows.
    as_dict : bool
        Whether to return the raw dictionary instead of a processed scenario.

    """
    scenario = EXAMPLE_SCENARIO_ALIASES.get(scenario, scenario)
    assert scenario in EXAMPLE_SCENARIOS, f"{scenario} is not in {EXAMPLE_SCENARIOS}."

    raw = yaml.safe_load((TEST_RESOURCES_DIR / f"{scenario}.yaml").read_text())

    return raw if as_dict else process_scenario(raw)
