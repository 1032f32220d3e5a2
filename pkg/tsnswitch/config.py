"""General configuration for tsnswitch."""
from pathlib import Path

import numpy as np

# Obtain the root directory of the package. Do not import tsnswitch which creates a
# circular import.
ROOT_DIR = Path(__file__).parent

# Directory with additional resources for the testing harness and bundled scenarios.
TEST_RESOURCES_DIR = ROOT_DIR / "tests" / "resources"

INFINITY = np.inf
"""float : Marker for absent flows and tasks which never release requests.

Offsets and periods of absent flows are set to :data:`INFINITY`. It is a distinguished
value and not a large integer, so that ``1 / INFINITY == 0`` and every comparison with a
finite slot index is well-defined.

"""

IDLE = 0
"""int : Label of a slot in which EDF serves no task and M-EDF schedules no matching.

Tasks and matchings are labelled with 1, ..., N, so 0 is free.

"""

MIN_PORTS = 2
MAX_ENUMERATION_PORTS = 6
"""int : Largest switch size for which flow decomposition sets are enumerated.

There are 1,128,960 decomposition sets for six ports and 12,198,297,600 for seven.

"""
MAX_COUNT_PORTS = 7

REDUCED_LATIN_SQUARES = {
    1: 1,
    2: 1,
    3: 1,
    4: 4,
    5: 56,
    6: 9408,
    7: 16_942_080,
}
"""dict : Number of reduced Latin squares by order.

A reduced Latin square has its first row and first column in natural order. Fixing only
the first row multiplies the count by ``(n - 1)!``.

"""

AUTO_HORIZON_HYPERPERIODS = 10
"""int : Number of hyperperiods simulated after the largest offset if
``sim_slots="auto"``."""

SC2_SEARCH_BATCH_SIZE = 4096
"""int : Number of decomposition sets handed to the workers at once if the search for
an SC2 certificate runs in parallel."""

EDF_CHUNK_SIZE = 4096
"""int : Number of slots of the EDF schedule which M-EDF computes at once. The memory of
a schedule does not grow with the hyperperiod of the T-vector."""

SCHEDULER_MODES = ["auto", "mtdma", "medf"]
SUBSCRIPTION_MODES = ["static", "dynamic"]

DEFAULT_OPTIONS = {
    "voq_capacity": 64,
    "sim_slots": "auto",
    "mode": "auto",
    "subscription": "static",
    "emit_trace": False,
    "seed": 0,
    "islip_iterations": None,
    "decomposition": None,
    "tvector": None,
    "mtdma_order": None,
    "be_traffic": None,
}

EXAMPLE_SCENARIOS = ["example1", "example2", "appendix_d"]

EXAMPLE_SCENARIO_ALIASES = {"appendixD": "appendix_d"}
"""dict : Other names of bundled scenarios."""
