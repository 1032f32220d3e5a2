"""Selection of the crossbar configuration in every slot.

Scheduling happens in two steps. First, M-TDMA or M-EDF selects a perfect matching for
time-sensitive flows which is masked by the TS matrix so that only flows with a live
cell transmit. Second, iSLIP selects best-effort pairs among the remaining ports and
the rest is padded so that both steps together always use N pairs.

"""
import logging
import warnings
from dataclasses import dataclass

import numpy as np

from tsnswitch.admission import Sc2Certificate
from tsnswitch.admission import certificate_for_decomposition
from tsnswitch.admission import check_sc1
from tsnswitch.admission import check_sc2_certificate
from tsnswitch.admission import search_sc2
from tsnswitch.config import IDLE
from tsnswitch.edf import EdfSchedule
from tsnswitch.edf import edf_schedule
from tsnswitch.latin import cyclic_decomposition
from tsnswitch.shared import ScenarioError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SchedulerMode:
    """The policy of the first scheduling step.

    Use :meth:`mtdma` or :meth:`medf` to create an instance.

    Attributes
    ----------
    variant : {"mtdma", "medf"}
    decomposition : FlowDecompositionSet
    certificate : Sc2Certificate or None
        Only set for M-EDF.
    order : tuple of int
        Order in which M-TDMA cycles through the matchings :math:`M_k`. It is a
        permutation of ``1, ..., N``.
    schedule : EdfSchedule or None
        The lazy EDF schedule of the T-vector, only set for M-EDF. It advances with
        the slots of the simulation.

    """

    variant: str
    decomposition: object
    certificate: Sc2Certificate = None
    order: tuple = None
    schedule: EdfSchedule = None

    @classmethod
    def mtdma(cls, decomposition, order=None):
        n = decomposition.n
        order = tuple(range(1, n + 1)) if order is None else tuple(order)
        if sorted(order) != list(range(1, n + 1)):
            raise ValueError(f"The order {order} is no permutation of 1, ..., {n}.")

        return cls("mtdma", decomposition, None, order, None)

    @classmethod
    def medf(cls, certificate):
        schedule = EdfSchedule(certificate.tvector)
        return cls("medf", certificate.decomposition, certificate, None, schedule)

    @property
    def n(self):
        return self.decomposition.n

    def select(self, t):
        """Return the label and the matching of step one at slot t.

        In M-EDF idle slots, the label is :data:`~tsnswitch.config.IDLE` and the
        matching is None.

        """
        if self.variant == "mtdma":
            label = self.order[t % self.n]
        else:
            label = self.schedule.task_at(t)

        matching = None if label == IDLE else self.decomposition.matching(label)

        return label, matching

    def to_dict(self):
        out = {"variant": self.variant}
        if self.variant == "mtdma":
            out["order"] = list(self.order)
        else:
            out["certificate"] = self.certificate.to_dict()

        return out


def mtdma_matching(d, t, order=None):
    """Return the matching which M-TDMA schedules at slot t.

    The N matchings are scheduled one after another and the pattern repeats every N
    slots.

    Examples
    --------
    >>> from tsnswitch.latin import cyclic_decomposition
    >>> mtdma_matching(cyclic_decomposition(2), 3)
    array([[0, 1],
           [1, 0]], dtype=uint8)

    """
    label = t % d.n + 1 if order is None else order[t % d.n]
    return d.matching(label)


def medf_label(cert, t):
    """Return the index of the task which EDF serves at slot t."""
    return edf_schedule(cert.tvector).task_at(t)


def medf_matching(cert, t):
    """Return the matching which M-EDF schedules at slot t or None in idle slots."""
    label = medf_label(cert, t)
    return None if label == IDLE else cert.decomposition.matching(label)


def mask_by_ts_matrix(m, ts_live):
    """Keep only the flows of the matching which have a live cell.

    Examples
    --------
    >>> mask_by_ts_matrix(np.eye(2), np.array([[0, 0], [0, 1]]))
    array([[0, 0],
           [0, 1]], dtype=uint8)
    >>> int(mask_by_ts_matrix(None, np.ones((2, 2))).sum())
    0

    """
    ts_live = np.asarray(ts_live)
    if m is None:
        return np.zeros(ts_live.shape, dtype=np.uint8)

    return (np.asarray(m, dtype=bool) & ts_live.astype(bool)).astype(np.uint8)


@dataclass(frozen=True)
class IslipState:
    """Round-robin pointers of iSLIP.

    ``grant_pointer[j]`` is the input which output j prefers and ``accept_pointer[i]``
    the output which input i prefers. Both are 0-indexed.

    """

    grant_pointer: tuple
    accept_pointer: tuple

    @classmethod
    def initial(cls, n):
        return cls((0,) * n, (0,) * n)


def _round_robin_pick(candidates, pointer, n):
    """Return the first candidate at or after the pointer in cyclic order."""
    return min(candidates, key=lambda x: (x - pointer) % n)


def islip_select(voq_nonempty, busy_inputs, busy_outputs, state, iterations=None):
    """Select best-effort pairs on the ports which are not used by time-sensitive flows.

    Each iteration consists of three phases. Every unmatched input requests all
    unmatched outputs for which it holds cells. Every unmatched output grants the
    requesting input which comes next in round-robin order starting at its grant
    pointer. Every input accepts the granting output which comes next starting at its
    accept pointer. Pointers move one beyond the matched port but only for pairs
    accepted in the first iteration.

    Afterwards, free inputs are paired with the free output having the lowest index
    in increasing order of inputs. These padded pairs carry no cells if their VOQ is
    empty.

    Parameters
    ----------
    voq_nonempty : numpy.ndarray
        Boolean matrix with shape (n, n) which is true if VOQ (i, j) holds a cell.
    busy_inputs : iterable of int
    busy_outputs : iterable of int
    state : IslipState
    iterations : int, optional
        Number of iSLIP iterations which defaults to the number of ports.

    Returns
    -------
    matching : numpy.ndarray
        Matching with all selected and padded pairs.
    state : IslipState
        The updated pointers.

    """
    voq_nonempty = np.asarray(voq_nonempty, dtype=bool)
    n = voq_nonempty.shape[0]
    iterations = n if iterations is None else iterations

    grant_pointer = list(state.grant_pointer)
    accept_pointer = list(state.accept_pointer)
    free_inputs = set(range(n)) - set(busy_inputs)
    free_outputs = set(range(n)) - set(busy_outputs)

    matching = np.zeros((n, n), dtype=np.uint8)
    for iteration in range(iterations):
        requests = {
            j: [i for i in free_inputs if voq_nonempty[i, j]] for j in free_outputs
        }
        grants = {}
        for j, inputs in requests.items():
            if inputs:
                i = _round_robin_pick(inputs, grant_pointer[j], n)
                grants.setdefault(i, []).append(j)

        if not grants:
            break

        for i, outputs in grants.items():
            j = _round_robin_pick(outputs, accept_pointer[i], n)
            matching[i, j] = 1
            free_inputs.discard(i)
            free_outputs.discard(j)
            if iteration == 0:
                grant_pointer[j] = (i + 1) % n
                accept_pointer[i] = (j + 1) % n

    for i, j in zip(sorted(free_inputs), sorted(free_outputs)):
        matching[i, j] = 1

    return matching, IslipState(tuple(grant_pointer), tuple(accept_pointer))


def resolve_scheduler_mode(
    table, mode="auto", decomposition=None, tvector=None, order=None, n_jobs=1
):
    """Select the policy of the first scheduling step for the subscribed flows.

    The order of checks follows the arbiter. If SC1 holds, M-TDMA is used. Otherwise,
    M-EDF with a certificate for SC2. A given decomposition set and T-vector are used
    if they form a valid certificate. Without a decomposition set, the cyclic one is
    used.

    Parameters
    ----------
    table : TrafficSpec
        Metadata table of subscribed flows.
    mode : {"auto", "mtdma", "medf"}
    decomposition : FlowDecompositionSet, optional
    tvector : TVector, optional
    order : tuple of int, optional
        Order of matchings for M-TDMA.
    n_jobs : int
        Number of jobs for the search of a certificate.

    Returns
    -------
    mode : SchedulerMode or None
        None if no condition holds in ``"auto"`` mode.

    Raises
    ------
    ScenarioError
        If M-EDF is requested but no certificate exists.

    """
    if mode == "mtdma" or (mode == "auto" and check_sc1(table)):
        if not check_sc1(table):
            warnings.warn(
                "M-TDMA is forced although SC1 does not hold. Cells might expire.",
                category=UserWarning,
            )
        d = cyclic_decomposition(table.n) if decomposition is None else decomposition
        return SchedulerMode.mtdma(d, order)

    cert = _certificate_from_overrides(table, decomposition, tvector)
    if cert is None:
        cert = search_sc2(table, n_jobs)

    if cert is not None:
        return SchedulerMode.medf(cert)
    elif mode == "medf":
        raise ScenarioError("M-EDF is requested but SC2 does not hold.")
    else:
        return None


def _certificate_from_overrides(table, decomposition, tvector):
    """Build a certificate from user given parts or return None."""
    if decomposition is None and tvector is None:
        return None

    d = cyclic_decomposition(table.n) if decomposition is None else decomposition
    if tvector is None:
        cert = certificate_for_decomposition(table, d)
    else:
        cert = Sc2Certificate(d, tvector)
        if not check_sc2_certificate(table, cert):
            cert = None

    if cert is None:
        warnings.warn(
            "The given decomposition set and T-vector do not satisfy SC2. Searching "
            "for a certificate instead.",
            category=UserWarning,
        )
    else:
        logger.debug("Using the given %r.", cert)

    return cert
