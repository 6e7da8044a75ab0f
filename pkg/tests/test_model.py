import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsasched.model import Task, Vm, Workload, WorkloadError, decode_position, validate_workload


def test_minimal_workload_accepted():
    w = Workload([Task(0, 1.0, 1.0)], [Vm(0, 1.0)])
    assert validate_workload(w) is w


def test_empty_vm_list_rejected():
    with pytest.raises(WorkloadError, match="empty VM list"):
        validate_workload(Workload([Task(0, 1.0, 1.0)], []))


def test_empty_task_list_rejected():
    with pytest.raises(WorkloadError, match="empty task list"):
        validate_workload(Workload([], [Vm(0, 1.0)]))


def test_zero_time_req_names_task():
    w = Workload([Task(0, 1.0, 1.0), Task(1, 0.0, 1.0)], [Vm(0, 1.0)])
    with pytest.raises(WorkloadError, match="task 1"):
        validate_workload(w)


@pytest.mark.parametrize(
    "vm, needle",
    [(Vm(0, 0.0), "capacity"), (Vm(0, 1.0, speed=-1.0), "speed")],
)
def test_bad_vm_fields_rejected(vm, needle):
    with pytest.raises(WorkloadError, match=needle):
        validate_workload(Workload([Task(0, 1.0, 1.0)], [vm]))


def test_default_speed_is_one():
    assert Vm(0, 10.0).speed == 1.0


@pytest.mark.parametrize(
    "pos, m, expected",
    [
        ([0.2, 1.7, 0.1], 2, [0, 1, 0]),
        ([-5.0, 99.0], 4, [0, 3]),
        ([0.0, 1.0, 2.0], 3, [0, 1, 2]),
        ([0.5, 1.5, 2.5], 4, [1, 2, 3]),  # halves round away from zero
    ],
)
def test_decode_examples(pos, m, expected):
    assert decode_position(np.array(pos), m).tolist() == expected


finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@given(st.lists(finite, min_size=1, max_size=30), st.integers(1, 20))
def test_decode_is_valid_and_idempotent(pos, m):
    a = decode_position(np.array(pos), m)
    assert a.shape == (len(pos),)
    assert a.min() >= 0 and a.max() <= m - 1
    assert np.array_equal(decode_position(a.astype(float), m), a)


@settings(max_examples=200)
@given(
    st.lists(st.tuples(st.floats(-2, 5), st.floats(-2, 5)), min_size=0, max_size=4),
    st.lists(st.tuples(st.floats(-2, 5), st.floats(-2, 5)), min_size=0, max_size=4),
)
def test_validate_accepts_iff_invariants_hold(task_vals, vm_vals):
    tasks = [Task(j, t, r) for j, (t, r) in enumerate(task_vals)]
    vms = [Vm(i, c, s) for i, (c, s) in enumerate(vm_vals)]
    valid = (
        bool(tasks)
        and bool(vms)
        and all(t.time_req > 0 and t.resource_req > 0 for t in tasks)
        and all(v.capacity > 0 and v.speed > 0 for v in vms)
    )
    w = Workload(tasks, vms)
    if valid:
        assert validate_workload(w) is w
    else:
        with pytest.raises(WorkloadError):
            validate_workload(w)


def test_ids_must_match_positions():
    with pytest.raises(WorkloadError, match="id"):
        validate_workload(Workload([Task(3, 1.0, 1.0)], [Vm(0, 1.0)]))


def test_workload_is_hashable_value():
    a = Workload.from_arrays([1, 2], [1, 1], [4])
    b = Workload.from_arrays([1, 2], [1, 1], [4])
    assert a == b and hash(a) == hash(b)
    assert a.etc.shape == (2, 1)
