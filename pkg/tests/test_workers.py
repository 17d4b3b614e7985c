import numpy as np
import pytest

from CIR_rates.checker import ValidationError
from CIR_rates.workers import chunks_of_n, run_tasks, task_rng


def test_task_streams():
    a = task_rng(1985, 3).random(5)
    np.testing.assert_array_equal(a, task_rng(1985, 3).random(5))
    assert not np.array_equal(a, task_rng(1985, 4).random(5))
    assert not np.array_equal(a, task_rng(1986, 3).random(5))


def test_run_tasks_keeps_order():
    tasks = list(range(-5, 5))
    assert run_tasks(abs, tasks, workers=1) == [abs(x) for x in tasks]
    assert run_tasks(abs, tasks, workers=3) == [abs(x) for x in tasks]
    assert run_tasks(abs, [], workers=2) == []
    with pytest.raises(ValidationError):
        run_tasks(abs, tasks, workers=0)


def test_chunks_of_n():
    assert list(chunks_of_n(list(range(7)), 3)) == [[0, 1, 2], [3, 4, 5], [6]]
