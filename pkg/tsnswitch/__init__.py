"""This is the entrypoint to the tsnswitch package.

Include only imports which should be available using

.. code-block::

    import tsnswitch as ts

    ts.<func>

"""
import pytest

from tsnswitch.admission import admit_flows  # noqa: F401
from tsnswitch.admission import arbiter_admit  # noqa: F401
from tsnswitch.admission import check_sc1  # noqa: F401
from tsnswitch.admission import check_sc2_certificate  # noqa: F401
from tsnswitch.admission import search_sc2  # noqa: F401
from tsnswitch.config import ROOT_DIR
from tsnswitch.edf import TVector  # noqa: F401
from tsnswitch.edf import edf_trace  # noqa: F401
from tsnswitch.interface import get_example_scenario  # noqa: F401
from tsnswitch.latin import count_decompositions  # noqa: F401
from tsnswitch.latin import cyclic_decomposition  # noqa: F401
from tsnswitch.latin import enumerate_decompositions  # noqa: F401
from tsnswitch.pre_processing.scenario_processing import parse_scenario  # noqa: F401
from tsnswitch.shared import TrafficSpec  # noqa: F401
from tsnswitch.simulate import get_simulate_func  # noqa: F401
from tsnswitch.simulate import run  # noqa: F401
from tsnswitch.simulate import simulate_scenarios  # noqa: F401


__all__ = [
    "admit_flows",
    "arbiter_admit",
    "check_sc1",
    "check_sc2_certificate",
    "search_sc2",
    "TVector",
    "edf_trace",
    "get_example_scenario",
    "count_decompositions",
    "cyclic_decomposition",
    "enumerate_decompositions",
    "parse_scenario",
    "TrafficSpec",
    "get_simulate_func",
    "run",
    "simulate_scenarios",
]

__version__ = "0.1.0"


def test(*args, **kwargs):
    """Run basic tests of the package."""
    pytest.main([str(ROOT_DIR), *args], **kwargs)
