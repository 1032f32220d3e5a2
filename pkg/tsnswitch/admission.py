"""The feasibility logic of the arbiter.

A set of time-sensitive flows is admitted if one of two sufficient conditions holds.

- SC1: Every flow has a period of at least N slots. Then, M-TDMA with any flow
  decomposition set delivers every cell in time.
- SC2: There exists a flow decomposition set and a T-vector with utilization at most one
  such that every flow in matching :math:`M_k` either has period :math:`T_k` and offset
  zero or a period of at least :math:`2 T_k - 1`. Then, M-EDF delivers every cell in
  time.

Certificates for SC2 are found by a brute-force search over all decomposition sets.

"""
import enum
import functools
import logging
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from tsnswitch.config import INFINITY
from tsnswitch.config import MAX_ENUMERATION_PORTS
from tsnswitch.config import SC2_SEARCH_BATCH_SIZE
from tsnswitch.edf import TVector
from tsnswitch.edf import utilization
from tsnswitch.latin import decomposition_to_latin
from tsnswitch.latin import enumerate_decompositions
from tsnswitch.parallelization import find_first_in_order
from tsnswitch.shared import TrafficSpec
from tsnswitch.shared import UnsupportedSizeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Sc2Certificate:
    """A decomposition set and the T-vector with the scheduling period of each
    matching which together prove that SC2 holds."""

    decomposition: object
    tvector: TVector

    @property
    def utilization(self):
        return utilization(self.tvector)

    def to_dict(self):
        return {
            "latin_square": decomposition_to_latin(self.decomposition).to_rows(),
            "tvector": self.tvector.to_list(),
            "utilization": str(self.utilization),
        }

    def __repr__(self):
        return (
            f"Sc2Certificate(latin_square={decomposition_to_latin(self.decomposition)}"
            f", tvector=({self.tvector}))"
        )


def check_sc1(spec):
    """Check whether every present flow has a period of at least N slots.

    Examples
    --------
    >>> check_sc1(TrafficSpec.empty(4))
    True
    >>> check_sc1(TrafficSpec.from_flows(4, [(0, 0, 0, 3)]))
    False

    """
    return bool((spec.period[spec.present] >= spec.n).all())


def _satisfies_conditions(period, offset, matching_period):
    """Evaluate the exact and the relaxed condition of SC2 element-wise.

    Infinite matching periods satisfy neither condition for present flows.

    """
    is_exact = (period == matching_period) & (offset == 0)
    is_relaxed = period >= 2 * matching_period - 1

    return is_exact, is_relaxed


def _matching_periods(d, tv):
    """Create a matrix with the scheduling period of the matching of each flow."""
    latin = decomposition_to_latin(d)
    return np.array(tv.periods, dtype=float)[latin.entries - 1]


def check_sc2_certificate(spec, cert):
    """Check a certificate for SC2.

    Parameters
    ----------
    spec : TrafficSpec
    cert : Sc2Certificate

    Returns
    -------
    bool
        True if the utilization is at most one and every present flow satisfies the
        exact or the relaxed condition.

    Raises
    ------
    ValueError
        If the decomposition set or the T-vector does not match the switch size.

    """
    if cert.decomposition.n != spec.n or cert.tvector.n != spec.n:
        raise ValueError(
            f"The certificate has dimensions ({cert.decomposition.n}, "
            f"{cert.tvector.n}) but the switch has {spec.n} ports."
        )
    if not cert.tvector.is_feasible:
        return False

    matching_period = _matching_periods(cert.decomposition, cert.tvector)
    is_exact, is_relaxed = _satisfies_conditions(
        spec.period, spec.offset, matching_period
    )

    return bool((is_exact | is_relaxed)[spec.present].all())


def candidate_period(spec, matching):
    """Compute the scheduling period of a matching in the search for SC2.

    Let :math:`t_1` be the smallest period of present flows with offset zero in the
    matching and :math:`t_2` the smallest value of :math:`\\lfloor (T + 1) / 2 \\rfloor`
    over all present flows. :math:`t_1` is chosen if all present flows satisfy one of
    the two conditions with it. Otherwise, :math:`t_2` is chosen which satisfies the
    relaxed condition for all flows by construction.

    Examples
    --------
    >>> spec = TrafficSpec.from_flows(2, [(0, 0, 0, 2), (1, 1, 1, 5)])
    >>> candidate_period(spec, np.eye(2))
    2
    >>> candidate_period(spec, np.ones((2, 2)) - np.eye(2))
    inf

    Flow (1, 1) violates both conditions with :math:`t_1 = 6`.

    >>> spec = TrafficSpec.from_flows(2, [(0, 0, 1, 6), (1, 1, 0, 6)])
    >>> candidate_period(spec, np.eye(2))
    3

    """
    mask = np.asarray(matching, dtype=bool) & spec.present
    if not mask.any():
        return INFINITY

    period = spec.period[mask]
    offset = spec.offset[mask]

    zero_offset = period[offset == 0]
    if zero_offset.size:
        t1 = zero_offset.min()
        is_exact, is_relaxed = _satisfies_conditions(period, offset, t1)
        if (is_exact | is_relaxed).all():
            return int(t1)

    return int(np.floor((period + 1) / 2).min())


def certificate_for_decomposition(spec, d):
    """Build the T-vector for one decomposition set and return the certificate if its
    utilization is at most one."""
    tv = TVector(tuple(candidate_period(spec, m) for m in d))
    return Sc2Certificate(d, tv) if tv.is_feasible else None


def search_sc2(spec, n_jobs=1):
    """Search for a certificate of SC2 by enumerating all decomposition sets.

    The first certificate in the lexicographic order of the corresponding Latin
    squares is returned, independent of the number of jobs.

    Parameters
    ----------
    spec : TrafficSpec
    n_jobs : int
        Number of joblib workers evaluating decomposition sets.

    Returns
    -------
    certificate : Sc2Certificate or None
        None means that SC2 cannot be satisfied.

    Raises
    ------
    UnsupportedSizeError
        If the switch is too large to enumerate all decomposition sets.

    """
    if spec.n > MAX_ENUMERATION_PORTS:
        raise UnsupportedSizeError(
            f"The search for SC2 enumerates decomposition sets which is supported for "
            f"up to {MAX_ENUMERATION_PORTS} ports, got n={spec.n}."
        )

    cert = find_first_in_order(
        functools.partial(certificate_for_decomposition, spec),
        enumerate_decompositions(spec.n),
        n_jobs=n_jobs,
        batch_size=SC2_SEARCH_BATCH_SIZE,
    )

    if cert is None:
        logger.debug("No certificate for SC2 exists for %r.", spec)
    else:
        assert check_sc2_certificate(spec, cert), "Search returned invalid certificate."
        logger.debug("Found %r.", cert)

    return cert


def classify_flows(spec, cert):
    """Classify present flows by the condition of SC2 which they satisfy.

    Returns
    -------
    df : pandas.DataFrame
        One row per present flow with 1-indexed ports, its matching, the scheduling
        period of the matching and the condition which is ``"exact"``, ``"relaxed"`` or
        missing if none holds. Flows satisfying both are ``"exact"``.

    """
    matching_period = _matching_periods(cert.decomposition, cert.tvector)
    is_exact, is_relaxed = _satisfies_conditions(
        spec.period, spec.offset, matching_period
    )
    latin = decomposition_to_latin(cert.decomposition)

    rows = []
    for i, j, offset, period in spec.flows():
        if is_exact[i, j]:
            condition = "exact"
        elif is_relaxed[i, j]:
            condition = "relaxed"
        else:
            condition = None
        rows.append(
            {
                "input": i + 1,
                "output": j + 1,
                "offset": offset,
                "period": period,
                "matching": int(latin.entries[i, j]),
                "matching_period": matching_period[i, j],
                "condition": condition,
            }
        )

    columns = [
        "input",
        "output",
        "offset",
        "period",
        "matching",
        "matching_period",
        "condition",
    ]
    return pd.DataFrame(rows, columns=columns)


class Decision(enum.Enum):
    ADMIT_SC1 = "admit_sc1"
    ADMIT_SC2 = "admit_sc2"
    REJECT = "reject"


@dataclass(frozen=True, eq=False)
class AdmissionDecision:
    """The outcome of an admission request.

    ``table`` is the metadata table after the decision, i.e., extended by the flow if it
    was admitted and unchanged otherwise.

    """

    kind: Decision
    table: TrafficSpec
    certificate: Sc2Certificate = None

    @property
    def is_admitted(self):
        return self.kind is not Decision.REJECT


def _decide(table, n_jobs=1):
    """Apply SC1 and SC2 in this order to a candidate table."""
    if check_sc1(table):
        return Decision.ADMIT_SC1, None

    if table.n > MAX_ENUMERATION_PORTS:
        warnings.warn(
            f"SC1 does not hold and SC2 cannot be checked for {table.n} ports. The "
            "request is rejected.",
            category=UserWarning,
        )
        return Decision.REJECT, None

    cert = search_sc2(table, n_jobs)
    if cert is None:
        return Decision.REJECT, None

    return Decision.ADMIT_SC2, cert


def arbiter_admit(table, flow, n_jobs=1):
    """Decide on the subscription of a new time-sensitive flow.

    Parameters
    ----------
    table : TrafficSpec
        The metadata table of currently subscribed flows.
    flow : tuple
        ``(input, output, offset, period)`` with 0-indexed ports.

    Returns
    -------
    decision : AdmissionDecision

    Raises
    ------
    DuplicateFlowError
        If the flow is already subscribed.

    """
    i, j, offset, period = flow
    candidate = table.with_flow(i, j, offset, period)

    kind, cert = _decide(candidate, n_jobs)
    if kind is Decision.REJECT:
        logger.info("Flow (%d, %d) is rejected.", i + 1, j + 1)
        return AdmissionDecision(kind, table)

    logger.debug("Flow (%d, %d) is admitted with %s.", i + 1, j + 1, kind.name)
    return AdmissionDecision(kind, candidate, cert)


def admit_flows(n, flows, n_jobs=1):
    """Subscribe a set of flows at slot 0.

    Both conditions still hold after removing flows. Thus, if the whole set passes, all
    flows are admitted at once. Otherwise, flows are offered to the arbiter one at a
    time in the given order.

    Parameters
    ----------
    n : int
        Number of ports.
    flows : list of tuple
        ``(input, output, offset, period)`` with 0-indexed ports.

    Returns
    -------
    table : TrafficSpec
        Metadata table with all admitted flows.
    admitted : list of tuple
    rejected : list of tuple

    """
    # Raises for duplicates before any decision is made.
    table = TrafficSpec.from_flows(n, flows)

    kind, _ = _decide(table, n_jobs)
    if kind is not Decision.REJECT:
        logger.info("All %d flows are admitted with %s.", len(flows), kind.name)
        return table, list(flows), []

    table = TrafficSpec.empty(n)
    admitted, rejected = [], []
    for flow in flows:
        decision = arbiter_admit(table, flow, n_jobs)
        table = decision.table
        (admitted if decision.is_admitted else rejected).append(flow)

    logger.info("%d flows are admitted and %d rejected.", len(admitted), len(rejected))

    return table, admitted, rejected
