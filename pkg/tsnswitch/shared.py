"""Contains types and functions which are shared across other modules.

This module should only import from other packages or from :mod:`tsnswitch.config`.
This is to prevent circular imports.

Ports are 0-indexed inside all arrays. External formats, i.e., scenario files, reports
and the command line, use 1-indexed ports like the flow notation :math:`f_{i,j}` with
:math:`i, j \\in \\{1, \\dots, N\\}`.

"""
import functools
import math
from dataclasses import dataclass

import numpy as np

from tsnswitch.config import INFINITY
from tsnswitch.config import MIN_PORTS


class ScenarioError(ValueError):
    """Raised if a scenario violates its schema."""


class InfeasibleUtilizationError(ValueError):
    """Raised if a T-vector has a utilization larger than one."""


class UnsupportedSizeError(ValueError):
    """Raised if a switch size is outside of the supported range of an operation."""


class DuplicateFlowError(ValueError):
    """Raised if the arbiter is asked to subscribe an already subscribed flow."""


class TrafficSpec:
    """Offsets and periods of all :math:`N^2` potential time-sensitive flows.

    Absent flows have offset and period :data:`~tsnswitch.config.INFINITY`. Both
    matrices are stored as read-only float arrays so that the sentinel fits in.

    Parameters
    ----------
    offset : array_like
        Array with shape (n, n) containing the slot of the first cell of each flow.
    period : array_like
        Array with shape (n, n) containing the period of each flow in slots.

    Examples
    --------
    >>> spec = TrafficSpec.from_flows(2, [(0, 1, 0, 4)])
    >>> spec.period
    array([[inf,  4.],
           [inf, inf]])
    >>> list(spec.flows())
    [(0, 1, 0, 4)]

    """

    def __init__(self, offset, period):
        offset = np.array(offset, dtype=float)
        period = np.array(period, dtype=float)
        _validate_traffic_matrices(offset, period)

        offset.setflags(write=False)
        period.setflags(write=False)
        self.offset = offset
        self.period = period

    @classmethod
    def empty(cls, n):
        """Create a specification without any flow."""
        return cls(np.full((n, n), INFINITY), np.full((n, n), INFINITY))

    @classmethod
    def from_flows(cls, n, flows):
        """Create a specification from ``(input, output, offset, period)`` tuples."""
        offset = np.full((n, n), INFINITY)
        period = np.full((n, n), INFINITY)
        for i, j, offset_, period_ in flows:
            if np.isfinite(period[i, j]):
                raise DuplicateFlowError(f"Flow ({i + 1}, {j + 1}) is listed twice.")
            offset[i, j] = offset_
            period[i, j] = period_

        return cls(offset, period)

    @property
    def n(self):
        return self.offset.shape[0]

    @property
    def present(self):
        """numpy.ndarray : Boolean mask of flows which exist."""
        return np.isfinite(self.period)

    def has_flow(self, i, j):
        return bool(np.isfinite(self.period[i, j]))

    def flows(self):
        """Iterate over ``(input, output, offset, period)`` of present flows."""
        for i, j in zip(*np.nonzero(self.present)):
            yield int(i), int(j), int(self.offset[i, j]), int(self.period[i, j])

    def with_flow(self, i, j, offset, period):
        """Return a new specification extended by flow :math:`f_{i,j}`."""
        if self.has_flow(i, j):
            raise DuplicateFlowError(f"Flow ({i + 1}, {j + 1}) is already subscribed.")
        offset_ = self.offset.copy()
        period_ = self.period.copy()
        offset_[i, j] = offset
        period_[i, j] = period

        return TrafficSpec(offset_, period_)

    def __eq__(self, other):
        return (
            isinstance(other, TrafficSpec)
            and np.array_equal(self.offset, other.offset)
            and np.array_equal(self.period, other.period)
        )

    def __repr__(self):
        return f"TrafficSpec(n={self.n}, flows={int(self.present.sum())})"


def _validate_traffic_matrices(offset, period):
    """Validate the offset and period matrix of a :class:`TrafficSpec`."""
    if offset.ndim != 2 or offset.shape[0] != offset.shape[1]:
        raise ValueError(f"Offset matrix must be square, but has shape {offset.shape}.")
    if offset.shape != period.shape:
        raise ValueError("Offset and period matrix must have the same shape.")
    if offset.shape[0] < MIN_PORTS:
        raise ValueError(f"A switch needs at least {MIN_PORTS} ports.")
    if np.isnan(offset).any() or np.isnan(period).any():
        raise ValueError("Offsets and periods must not be NaN.")

    is_absent = np.isinf(period)
    if not np.array_equal(is_absent, np.isinf(offset)):
        raise ValueError("A flow is absent iff its offset and period are infinite.")

    finite_offset = offset[~is_absent]
    finite_period = period[~is_absent]
    if (finite_offset < 0).any() or (finite_offset != np.floor(finite_offset)).any():
        raise ValueError("Offsets must be non-negative integers.")
    if (finite_period < 1).any() or (finite_period != np.floor(finite_period)).any():
        raise ValueError("Periods must be positive integers.")


def _validate_binary_square(m):
    """Convert a candidate matching to an array and validate its shape and entries."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"A matching must be a square matrix, not of shape {m.shape}.")
    if not np.isin(m, [0, 1]).all():
        raise ValueError("A matching must only contain zeros and ones.")

    return m.astype(np.uint8)


def is_matching(m):
    """Check the crossbar constraint.

    A binary square matrix is a matching if and only if each row and each column
    contains at most one 1.

    Examples
    --------
    >>> is_matching(np.eye(4))
    True
    >>> is_matching([[1, 1], [0, 0]])
    False

    """
    m = _validate_binary_square(m)
    return bool((m.sum(axis=0) <= 1).all() and (m.sum(axis=1) <= 1).all())


def is_perfect_matching(m):
    """Check whether each row and each column contains exactly one 1.

    Examples
    --------
    >>> is_perfect_matching(np.zeros((4, 4)))
    False

    """
    m = _validate_binary_square(m)
    return bool((m.sum(axis=0) == 1).all() and (m.sum(axis=1) == 1).all())


def matching_to_pairs(m):
    """Convert a matching to a list of 0-indexed ``(input, output)`` pairs."""
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(m))]


def pairs_to_matching(pairs, n):
    """Convert 0-indexed ``(input, output)`` pairs to a binary matrix."""
    m = np.zeros((n, n), dtype=np.uint8)
    for i, j in pairs:
        m[i, j] = 1

    return m


@dataclass(frozen=True)
class Cell:
    """A fixed-size unit of data which needs one slot to cross the crossbar.

    The lifetime of a cell is ``[arrival_slot, deadline_slot]``. Best-effort cells never
    expire and have ``deadline_slot = INFINITY``.

    """

    input: int
    output: int
    arrival_slot: int
    deadline_slot: float
    kind: str
    seq: int

    @property
    def is_time_sensitive(self):
        return self.kind == "TS"


def cell_lifetime(spec, i, j, s):
    """Return the arrival and the last schedulable slot of cell ``s`` of flow (i, j).

    Cell ``s`` arrives at the beginning of slot ``offset + s * T`` and expires at the
    end of slot ``offset + (s + 1) * T - 1``.

    Examples
    --------
    >>> spec = TrafficSpec.from_flows(4, [(3, 0, 8, 4)])
    >>> cell_lifetime(spec, 3, 0, 0)
    (8, 11)
    >>> cell_lifetime(spec, 3, 0, 1)
    (12, 15)

    """
    if not spec.has_flow(i, j):
        raise ValueError(f"Flow ({i + 1}, {j + 1}) does not exist.")
    if s < 0:
        raise ValueError("The sequence number of a cell must be non-negative.")

    offset = int(spec.offset[i, j])
    period = int(spec.period[i, j])

    return offset + s * period, offset + (s + 1) * period - 1


def create_ts_cell(spec, i, j, s):
    """Create cell ``s`` of time-sensitive flow (i, j)."""
    arrival, deadline = cell_lifetime(spec, i, j, s)
    return Cell(i, j, arrival, deadline, "TS", s)


def hyperperiod(periods):
    """Compute the least common multiple of all finite periods.

    Examples
    --------
    >>> hyperperiod([2, 4, 8, np.inf])
    8
    >>> hyperperiod([np.inf])
    1

    """
    finite = [int(p) for p in np.ravel(periods) if np.isfinite(p)]
    return functools.reduce(lambda a, b: a * b // math.gcd(a, b), finite, 1)


def format_period(period):
    """Convert a period to its external representation with ``"inf"`` for absent."""
    return int(period) if np.isfinite(period) else "inf"


def parse_period(value):
    """Convert an external period, an integer or ``"inf"``, to the internal one."""
    if isinstance(value, str) and value.strip().lower() in ["inf", "infinity", "∞"]:
        return INFINITY
    if isinstance(value, (float, np.floating)):
        if np.isinf(value):
            return INFINITY
        if not float(value).is_integer():
            raise ValueError(f"Periods must be integers, but got {value!r}.")
    elif isinstance(value, bool) or not isinstance(value, (int, np.integer, str)):
        raise ValueError(f"Invalid period {value!r}.")

    period = int(value)
    if period < 1:
        raise ValueError(f"Periods must be positive, but got {period}.")

    return period
