"""The virtual single-processor system of periodic tasks and its EDF schedule.

Task k releases a request at slots ``0, T_k, 2 T_k, ...`` and each request must be
served before the next one arrives. Serving task k at slot t stands for scheduling
matching :math:`M_k` at slot t in M-EDF.

"""
import functools
from dataclasses import dataclass
from fractions import Fraction

import numba as nb
import numpy as np
import pandas as pd

from tsnswitch.config import EDF_CHUNK_SIZE
from tsnswitch.config import IDLE
from tsnswitch.config import INFINITY
from tsnswitch.shared import InfeasibleUtilizationError
from tsnswitch.shared import format_period
from tsnswitch.shared import parse_period


@dataclass(frozen=True)
class TVector:
    """Scheduling periods of the N matchings of a decomposition set.

    Entries are positive integers or :data:`~tsnswitch.config.INFINITY` for tasks which
    never release a request. A vector is only usable for EDF if its utilization is at
    most one, see :attr:`is_feasible`.

    Examples
    --------
    >>> tv = TVector.from_string("3,6,6,inf")
    >>> tv.periods
    (3, 6, 6, inf)
    >>> tv.is_feasible
    True

    """

    periods: tuple

    def __post_init__(self):
        periods = tuple(parse_period(p) for p in self.periods)
        if not periods:
            raise ValueError("A T-vector needs at least one period.")
        object.__setattr__(self, "periods", periods)

    @classmethod
    def from_string(cls, string):
        """Parse a comma-separated list like ``"2,4,8,8"`` or ``"3,6,6,inf"``."""
        return cls(tuple(part.strip() for part in string.split(",")))

    @property
    def n(self):
        return len(self.periods)

    @property
    def is_feasible(self):
        return utilization(self) <= 1

    def period(self, k):
        """Return :math:`T_k` for ``k`` in ``1, ..., N``."""
        return self.periods[k - 1]

    def to_list(self):
        """Return the external representation with ``"inf"`` for infinite periods."""
        return [format_period(p) for p in self.periods]

    def __str__(self):
        return ",".join(str(p) for p in self.to_list())


def utilization(tv):
    """Compute the exact utilization of a T-vector.

    Infinite periods contribute nothing.

    Examples
    --------
    >>> utilization(TVector((2, 4, 8, 8)))
    Fraction(1, 1)
    >>> utilization(TVector((3, 6, 6, np.inf)))
    Fraction(2, 3)

    """
    return sum(
        (Fraction(1, int(p)) for p in tv.periods if np.isfinite(p)), Fraction(0)
    )


@dataclass(frozen=True, eq=False)
class EdfTrace:
    """The task served in every slot or :data:`~tsnswitch.config.IDLE`."""

    tasks: np.ndarray

    @property
    def horizon(self):
        return len(self.tasks)

    def task_at(self, t):
        return int(self.tasks[t])

    def to_frame(self):
        """Convert the trace to a DataFrame where idle slots are missing values."""
        task = pd.Series(self.tasks, dtype="Int64").mask(self.tasks == IDLE)
        return pd.DataFrame({"slot": np.arange(self.horizon), "task": task})


def edf_trace(tv, horizon):
    """Simulate EDF over the virtual system of a T-vector.

    In every slot, the live request with the earliest deadline is served. Ties are
    broken in favor of the task with the smallest index.

    Parameters
    ----------
    tv : TVector
    horizon : int
        Number of slots starting from slot 0.

    Returns
    -------
    trace : EdfTrace

    Raises
    ------
    InfeasibleUtilizationError
        If the utilization of the T-vector exceeds one.

    Examples
    --------
    >>> edf_trace(TVector((2, 4, 8, 8)), 8).tasks
    array([1, 2, 1, 3, 1, 2, 1, 4])
    >>> edf_trace(TVector((3, 6, 6, np.inf)), 6).tasks
    array([1, 2, 3, 1, 0, 0])

    """
    if not tv.is_feasible:
        raise InfeasibleUtilizationError(
            f"The T-vector ({tv}) has utilization {utilization(tv)} > 1."
        )
    if horizon < 1:
        raise ValueError(f"The horizon must be positive, but is {horizon}.")

    tasks = _simulate_edf(_periods_to_array(tv), _initial_deadlines(tv), 0, horizon)
    tasks.setflags(write=False)

    return EdfTrace(tasks)


def _periods_to_array(tv):
    """Convert periods to integers where zero marks tasks without requests."""
    return np.array(
        [int(p) if np.isfinite(p) else 0 for p in tv.periods], dtype=np.int64
    )


def _initial_deadlines(tv):
    return np.full(tv.n, -1, dtype=np.int64)


@nb.njit
def _simulate_edf(periods, deadlines, start, length):
    """Run EDF slot by slot from slot ``start`` for ``length`` slots.

    ``deadlines[k]`` is the last slot of the pending request of task ``k + 1`` or -1.
    The array is updated in place so that a later call continues where this one stopped.

    """
    n_tasks = periods.shape[0]
    tasks = np.zeros(length, dtype=np.int64)

    for i in range(length):
        t = start + i
        for k in range(n_tasks):
            if periods[k] > 0 and t % periods[k] == 0:
                deadlines[k] = t + periods[k] - 1

        chosen = -1
        for k in range(n_tasks):
            if deadlines[k] >= t and (chosen == -1 or deadlines[k] < deadlines[chosen]):
                chosen = k

        if chosen != -1:
            tasks[i] = chosen + 1
            deadlines[chosen] = -1

    return tasks


class EdfSchedule:
    """The EDF schedule of a T-vector which is computed lazily in chunks of slots.

    Only the chunk containing the last requested slot is kept together with the
    deadlines of pending requests, so memory does not depend on the hyperperiod.
    Requesting slots in increasing order costs one EDF step per slot. Requesting an
    earlier slot than the current chunk restarts the schedule from slot 0.

    Examples
    --------
    >>> schedule = EdfSchedule(TVector((2, 10007, 10009, 10037)))
    >>> [schedule.task_at(t) for t in range(6)]
    [1, 2, 1, 3, 1, 4]

    """

    def __init__(self, tv, chunk_size=EDF_CHUNK_SIZE):
        if not tv.is_feasible:
            raise InfeasibleUtilizationError(
                f"The T-vector ({tv}) has utilization {utilization(tv)} > 1."
            )
        self.tv = tv
        self.chunk_size = chunk_size
        self._periods = _periods_to_array(tv)
        self._restart()

    def _restart(self):
        self._deadlines = _initial_deadlines(self.tv)
        self._start = 0
        self._tasks = np.zeros(0, dtype=np.int64)

    def task_at(self, t):
        """Return the task served at slot t or :data:`~tsnswitch.config.IDLE`."""
        if t < 0:
            raise ValueError(f"Slots start at 0, but got {t}.")
        if t < self._start:
            self._restart()

        while t >= self._start + len(self._tasks):
            self._start += len(self._tasks)
            self._tasks = _simulate_edf(
                self._periods, self._deadlines, self._start, self.chunk_size
            )

        return int(self._tasks[t - self._start])


@functools.lru_cache(maxsize=32)
def edf_schedule(tv):
    """Return a shared lazy EDF schedule of a T-vector."""
    return EdfSchedule(tv)


def verify_no_deadline_miss(tv, trace):
    """Check that every request is served exactly once within its lifetime.

    Only requests whose lifetime lies completely inside the horizon of the trace are
    checked. Serving a task which never releases requests counts as a violation.

    Examples
    --------
    >>> tv = TVector((2, 4, 8, 8))
    >>> verify_no_deadline_miss(tv, edf_trace(tv, 8))
    True
    >>> verify_no_deadline_miss(tv, EdfTrace(np.array([0, 2, 1, 3, 1, 2, 1, 4])))
    False

    """
    tasks = np.asarray(trace.tasks)
    if len(tv.periods) < tasks.max(initial=IDLE):
        return False

    for k, period in enumerate(tv.periods, start=1):
        if period == INFINITY:
            if (tasks == k).any():
                return False
            continue

        n_windows = trace.horizon // int(period)
        windows = tasks[: n_windows * int(period)].reshape(n_windows, int(period))
        if not ((windows == k).sum(axis=1) == 1).all():
            return False

    return True
