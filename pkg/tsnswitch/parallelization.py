"""This module contains the code to control parallel execution."""
import itertools

import joblib


def find_first_in_order(func, iterable, n_jobs=1, batch_size=4096):
    """Return the first non-None result of ``func`` in the order of ``iterable``.

    With ``n_jobs=1`` the stream is evaluated lazily one item after another. Otherwise,
    the stream is cut into batches which are evaluated speculatively in parallel. The
    results of a batch are inspected in stream order before the next batch is started,
    so the returned value does not depend on the number of jobs.

    Parameters
    ----------
    func : callable
        Function which is applied to each item and returns None for a miss.
    iterable : iterable
        Stream of items. It is consumed only as far as necessary.
    n_jobs : int
        Number of joblib workers. ``-1`` uses all cores.
    batch_size : int
        Number of items evaluated per parallel batch.

    Returns
    -------
    result : object or None
        The first result which is not None or None if there is none.

    """
    if n_jobs == 1:
        for item in iterable:
            result = func(item)
            if result is not None:
                return result
        return None

    iterator = iter(iterable)
    with joblib.Parallel(n_jobs=n_jobs) as parallel:
        while True:
            batch = list(itertools.islice(iterator, batch_size))
            if not batch:
                return None

            out = parallel(
                joblib.delayed(_apply_to_chunk)(func, chunk)
                for chunk in _split_into_chunks(batch, parallel.n_jobs)
            )
            for result in out:
                if result is not None:
                    return result


def _apply_to_chunk(func, chunk):
    """Return the first hit inside a contiguous chunk of the stream."""
    for item in chunk:
        result = func(item)
        if result is not None:
            return result
    return None


def _split_into_chunks(batch, n_jobs):
    """Split a batch in contiguous chunks, one for each worker."""
    n_chunks = max(1, joblib.effective_n_jobs(n_jobs))
    chunk_size = -(-len(batch) // n_chunks)

    return [batch[i : i + chunk_size] for i in range(0, len(batch), chunk_size)]


def map_in_parallel(func, items, n_jobs=1):
    """Apply ``func`` to independent items and keep the order of results."""
    if n_jobs == 1:
        return [func(item) for item in items]

    return joblib.Parallel(n_jobs=n_jobs)(joblib.delayed(func)(item) for item in items)
