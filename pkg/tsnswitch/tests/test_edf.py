from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from tsnswitch.config import INFINITY
from tsnswitch.edf import EdfSchedule
from tsnswitch.edf import EdfTrace
from tsnswitch.edf import TVector
from tsnswitch.edf import edf_schedule
from tsnswitch.edf import edf_trace
from tsnswitch.edf import utilization
from tsnswitch.edf import verify_no_deadline_miss
from tsnswitch.shared import InfeasibleUtilizationError
from tsnswitch.shared import hyperperiod
from tsnswitch.tests.random_scenario import N_INSTANCES_PER_SEED
from tsnswitch.tests.random_scenario import generate_tvector


@pytest.mark.unit
@pytest.mark.precise
@pytest.mark.parametrize(
    "periods, expected",
    [
        ((2, 4, 8, 8), [1, 2, 1, 3, 1, 2, 1, 4]),
        ((3, 6, 6, INFINITY), [1, 2, 3, 1, 0, 0]),
        ((2, 2), [1, 2, 1, 2]),
        ((INFINITY, 4), [2, 0, 0, 0]),
    ],
)
def test_edf_trace_with_lowest_index_tie_break(periods, expected):
    trace = edf_trace(TVector(periods), len(expected))
    np.testing.assert_array_equal(trace.tasks, expected)


@pytest.mark.unit
def test_edf_trace_repeats_every_hyperperiod():
    tv = TVector((2, 4, 8, 8))
    trace = edf_trace(tv, 32)
    np.testing.assert_array_equal(
        trace.tasks.reshape(4, 8), np.tile(trace.tasks[:8], (4, 1))
    )


@pytest.mark.unit
@pytest.mark.parametrize("chunk_size", [1, 3, 8, 100])
def test_lazy_schedule_agrees_with_trace(chunk_size):
    tv = TVector((3, 6, 6, INFINITY))
    schedule = EdfSchedule(tv, chunk_size=chunk_size)
    expected = edf_trace(tv, 40).tasks

    assert [schedule.task_at(t) for t in range(40)] == expected.tolist()
    # Going back restarts the schedule.
    slots = [5, 0, 39, 7]
    assert [schedule.task_at(t) for t in slots] == expected[slots].tolist()


@pytest.mark.unit
def test_lazy_schedule_with_large_coprime_periods():
    tv = TVector((2, 10_007, 10_009, 10_037))
    schedule = EdfSchedule(tv, chunk_size=64)

    tasks = np.array([schedule.task_at(t) for t in range(20_100)])
    assert tasks[:6].tolist() == [1, 2, 1, 3, 1, 4]
    assert len(schedule._tasks) == 64
    assert verify_no_deadline_miss(tv, EdfTrace(tasks))
    assert edf_schedule(tv).task_at(10_007) == 2


@pytest.mark.unit
def test_lazy_schedule_rejects_infeasible_tvectors():
    with pytest.raises(InfeasibleUtilizationError):
        EdfSchedule(TVector((2, 2, 2, INFINITY)))
    with pytest.raises(ValueError, match="Slots start at 0"):
        EdfSchedule(TVector((2, 2))).task_at(-1)


@pytest.mark.unit
def test_infeasible_tvector_raises():
    with pytest.raises(InfeasibleUtilizationError, match="3/2"):
        edf_trace(TVector((2, 2, 2, INFINITY)), 8)


@pytest.mark.unit
def test_horizon_must_be_positive():
    with pytest.raises(ValueError):
        edf_trace(TVector((2, 2)), 0)


@pytest.mark.unit
@pytest.mark.parametrize(
    "periods, expected",
    [
        ((2, 4, 8, 8), Fraction(1)),
        ((3, 6, 6, INFINITY), Fraction(2, 3)),
        ((INFINITY, INFINITY), Fraction(0)),
        ((1, 2), Fraction(3, 2)),
    ],
)
def test_utilization_is_exact(periods, expected):
    assert utilization(TVector(periods)) == expected


@pytest.mark.unit
def test_tvector_from_string():
    tv = TVector.from_string("3, 6,6,inf")
    assert tv.periods == (3, 6, 6, INFINITY)
    assert tv.to_list() == [3, 6, 6, "inf"]
    assert str(tv) == "3,6,6,inf"
    assert tv.period(4) == INFINITY


@pytest.mark.unit
@pytest.mark.parametrize("string", ["", "0,2", "2,x", "2.5,3"])
def test_invalid_tvectors(string):
    with pytest.raises(ValueError):
        TVector.from_string(string)


@pytest.mark.unit
def test_trace_to_frame_marks_idle_slots():
    df = edf_trace(TVector((3, 6, 6, INFINITY)), 6).to_frame()
    assert df["slot"].tolist() == list(range(6))
    assert df["task"].iloc[:4].tolist() == [1, 2, 3, 1]
    assert df["task"].iloc[4:].isna().all()
    assert df["task"].dtype == pd.Int64Dtype()


@pytest.mark.unit
@pytest.mark.parametrize(
    "tasks",
    [
        [0, 2, 1, 3, 1, 2, 1, 4],
        [1, 1, 2, 3, 1, 2, 1, 4],
        [1, 2, 1, 3, 1, 2, 1, 5],
    ],
)
def test_verify_detects_deadline_misses(tasks):
    tv = TVector((2, 4, 8, 8))
    assert not verify_no_deadline_miss(tv, EdfTrace(np.array(tasks)))


@pytest.mark.unit
def test_verify_rejects_service_of_silent_task():
    tv = TVector((2, INFINITY))
    assert not verify_no_deadline_miss(tv, EdfTrace(np.array([1, 2])))


@pytest.mark.integration
@pytest.mark.precise
def test_edf_never_misses_deadlines(seed):
    rng = np.random.default_rng(seed)
    for _ in range(N_INSTANCES_PER_SEED):
        tv = generate_tvector(rng)
        horizon = 2 * hyperperiod(tv.periods)
        trace = edf_trace(tv, horizon)

        assert verify_no_deadline_miss(tv, trace)
        # Labels are IDLE or a task index.
        assert (trace.tasks >= 0).all() and trace.tasks.max() <= tv.n
