"""Flow decomposition sets and their Latin squares.

A flow decomposition set consists of N perfect matchings which sum to the all-one
matrix, so that scheduling every matching once schedules every flow exactly once. The
matching containing flow :math:`f_{1,k}` is called :math:`M_k`. Writing k into entry
(i, j) whenever :math:`f_{i,j} \\in M_k` yields a Latin square whose first row is
``(1, ..., N)`` and every such Latin square defines a decomposition set. Thus, the
decomposition sets are enumerated by enumerating these Latin squares.

"""
import logging
import math

import numpy as np

from tsnswitch.config import MAX_COUNT_PORTS
from tsnswitch.config import MAX_ENUMERATION_PORTS
from tsnswitch.config import MIN_PORTS
from tsnswitch.config import REDUCED_LATIN_SQUARES
from tsnswitch.shared import UnsupportedSizeError
from tsnswitch.shared import is_perfect_matching

logger = logging.getLogger(__name__)


class LatinSquare:
    """A Latin square of order N whose first row is ``(1, ..., N)``.

    Symbol k stands for matching :math:`M_k`.

    """

    def __init__(self, entries):
        entries = np.array(entries)
        if entries.dtype.kind not in "iu":
            raise ValueError(
                f"The symbols of a Latin square must be integers, got {entries.dtype}."
            )
        entries = entries.astype(np.int64)
        _check_latin_square(entries)
        entries.setflags(write=False)
        self.entries = entries

    @classmethod
    def _from_valid_entries(cls, entries):
        """Create a square from entries which are known to be valid."""
        latin = cls.__new__(cls)
        entries = np.array(entries, dtype=np.int64)
        entries.setflags(write=False)
        latin.entries = entries

        return latin

    @property
    def n(self):
        return self.entries.shape[0]

    def to_rows(self):
        """Return the square as a list of rows with 1-indexed symbols."""
        return self.entries.tolist()

    def __eq__(self, other):
        return isinstance(other, LatinSquare) and np.array_equal(
            self.entries, other.entries
        )

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"LatinSquare({self.to_rows()})"


class FlowDecompositionSet:
    """N perfect matchings which partition all :math:`N^2` flows.

    Parameters
    ----------
    matchings : array_like
        Array with shape (n, n, n) where ``matchings[k - 1]`` is :math:`M_k`, the
        matching which contains flow :math:`f_{1,k}`.

    """

    def __init__(self, matchings):
        matchings = np.array(matchings, dtype=np.uint8)
        _check_decomposition(matchings)
        matchings.setflags(write=False)
        self.matchings = matchings

    @classmethod
    def _from_valid_matchings(cls, matchings):
        """Create a set from matchings which are known to be valid."""
        d = cls.__new__(cls)
        matchings = np.array(matchings, dtype=np.uint8)
        matchings.setflags(write=False)
        d.matchings = matchings

        return d

    @property
    def n(self):
        return self.matchings.shape[0]

    def matching(self, k):
        """Return :math:`M_k` for ``k`` in ``1, ..., N``."""
        if not 1 <= k <= self.n:
            raise IndexError(f"Matching index must be in [1, {self.n}], got {k}.")
        return self.matchings[k - 1]

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.matchings)

    def __eq__(self, other):
        return isinstance(other, FlowDecompositionSet) and np.array_equal(
            self.matchings, other.matchings
        )

    def __repr__(self):
        return f"FlowDecompositionSet({decomposition_to_latin(self).to_rows()})"


def _check_latin_square(entries):
    """Check that every row and column contains every symbol and the first row."""
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError(f"A Latin square must be square, got shape {entries.shape}.")

    n = entries.shape[0]
    if n < MIN_PORTS:
        raise ValueError(f"A Latin square needs order {MIN_PORTS} or more.")

    symbols = np.arange(1, n + 1)
    if not np.array_equal(entries[0], symbols):
        raise ValueError(f"The first row must be {symbols.tolist()}.")
    for i in range(n):
        if not np.array_equal(np.sort(entries[i]), symbols):
            raise ValueError(f"Row {i + 1} does not contain every symbol once.")
        if not np.array_equal(np.sort(entries[:, i]), symbols):
            raise ValueError(f"Column {i + 1} does not contain every symbol once.")


def _check_decomposition(matchings):
    """Check the sum constraint and the canonical labeling of a decomposition set."""
    if matchings.ndim != 3 or len(set(matchings.shape)) != 1:
        raise ValueError(
            f"Matchings must have shape (n, n, n), but have shape {matchings.shape}."
        )

    n = matchings.shape[0]
    if n < MIN_PORTS:
        raise ValueError(f"A decomposition set needs {MIN_PORTS} or more ports.")
    for k, m in enumerate(matchings, start=1):
        if not is_perfect_matching(m):
            raise ValueError(f"M_{k} is not a perfect matching.")
        if m[0, k - 1] != 1:
            raise ValueError(f"M_{k} must contain flow (1, {k}).")
    if not (matchings.sum(axis=0, dtype=np.int64) == 1).all():
        raise ValueError("The matchings do not sum to the all-one matrix.")


def decomposition_to_latin(d):
    """Construct the perfect-matching matrix of a decomposition set.

    Entry (i, j) is k if flow :math:`f_{i,j}` belongs to :math:`M_k`.

    Examples
    --------
    >>> decomposition_to_latin(cyclic_decomposition(2)).to_rows()
    [[1, 2], [2, 1]]

    """
    if not isinstance(d, FlowDecompositionSet):
        d = FlowDecompositionSet(d)
    labels = np.arange(1, d.n + 1).reshape(-1, 1, 1)

    return LatinSquare((d.matchings * labels).sum(axis=0))


def latin_to_decomposition(latin):
    """Extract the decomposition set from a Latin square with a fixed first row.

    :math:`M_k` collects all entries of the square whose value is k.

    """
    if not isinstance(latin, LatinSquare):
        latin = LatinSquare(latin)
    symbols = np.arange(1, latin.n + 1).reshape(-1, 1, 1)

    # A valid Latin square with a fixed first row always yields a valid set.
    return FlowDecompositionSet._from_valid_matchings(
        latin.entries[None, :, :] == symbols
    )


def cyclic_decomposition(n):
    """Create the decomposition set of cyclic shifts.

    :math:`M_k` contains flow (i, j) iff :math:`j - i \\equiv k - 1 \\pmod n`, so
    :math:`M_1` is the identity.

    Examples
    --------
    >>> decomposition_to_latin(cyclic_decomposition(3)).to_rows()
    [[1, 2, 3], [3, 1, 2], [2, 3, 1]]

    """
    if n < MIN_PORTS:
        raise ValueError(f"A decomposition set needs {MIN_PORTS} or more ports.")
    rows, columns = np.indices((n, n))
    shifts = (columns - rows) % n

    return FlowDecompositionSet([shifts == k for k in range(n)])


def enumerate_latin_squares(n):
    """Enumerate all Latin squares of order n with first row ``(1, ..., n)``.

    The squares are filled cell by cell in row-major order trying symbols in increasing
    order. Thus, squares are emitted in lexicographic order of their rows.

    Parameters
    ----------
    n : int
        Order of the squares.

    Returns
    -------
    latin_squares : generator of LatinSquare

    Raises
    ------
    UnsupportedSizeError
        If n is outside of ``[MIN_PORTS, MAX_ENUMERATION_PORTS]``.

    """
    _check_enumeration_size(n)

    return _generate_latin_squares(n)


def _generate_latin_squares(n):
    square = np.zeros((n, n), dtype=np.int64)
    square[0] = np.arange(1, n + 1)
    # Bit k of the masks is set if symbol k is already used in the row or column.
    row_used = [0] * n
    column_used = [1 << (j + 1) for j in range(n)]
    row_used[0] = sum(column_used)

    for filled in _fill_square(square, row_used, column_used, n, n):
        yield LatinSquare._from_valid_entries(filled)


def _fill_square(square, row_used, column_used, position, n):
    """Fill the square recursively starting from a flat position."""
    if position == n * n:
        yield square
        return

    i, j = divmod(position, n)
    for symbol in range(1, n + 1):
        bit = 1 << symbol
        if row_used[i] & bit or column_used[j] & bit:
            continue

        square[i, j] = symbol
        row_used[i] |= bit
        column_used[j] |= bit

        yield from _fill_square(square, row_used, column_used, position + 1, n)

        row_used[i] ^= bit
        column_used[j] ^= bit

    square[i, j] = 0


def enumerate_decompositions(n):
    """Enumerate all flow decomposition sets of an n-by-n switch.

    The stream follows the lexicographic order of the corresponding Latin squares and
    never materializes all sets at once.

    Returns
    -------
    decompositions : generator of FlowDecompositionSet

    """
    return (latin_to_decomposition(latin) for latin in enumerate_latin_squares(n))


def count_decompositions(n, method="table"):
    """Count the flow decomposition sets of an n-by-n switch.

    Parameters
    ----------
    n : int
        Number of ports.
    method : {"table", "enumerate"}
        ``"table"`` multiplies ``(n - 1)!`` with the number of reduced Latin squares.
        ``"enumerate"`` counts the enumerated sets which is feasible up to six ports.

    Examples
    --------
    >>> count_decompositions(6)
    1128960
    >>> count_decompositions(7)
    12198297600

    """
    if method == "table":
        if not MIN_PORTS <= n <= MAX_COUNT_PORTS:
            raise UnsupportedSizeError(
                f"Counting is supported for {MIN_PORTS} <= n <= {MAX_COUNT_PORTS}, "
                f"got n={n}."
            )
        count = math.factorial(n - 1) * REDUCED_LATIN_SQUARES[n]
    elif method == "enumerate":
        count = sum(1 for _ in enumerate_latin_squares(n))
    else:
        raise NotImplementedError(f"Method '{method}' is not implemented.")

    return count


def _check_enumeration_size(n):
    if not MIN_PORTS <= n <= MAX_ENUMERATION_PORTS:
        raise UnsupportedSizeError(
            f"Enumeration is supported for {MIN_PORTS} <= n <= "
            f"{MAX_ENUMERATION_PORTS}, got n={n}."
        )
    if n == MAX_ENUMERATION_PORTS:
        logger.info(
            "Enumerating %d decomposition sets for n=%d.", count_decompositions(n), n
        )
