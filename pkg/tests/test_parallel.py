import threading
import time

import pytest

from fellmorita.parallel import map_indexed


def test_map_indexed_keeps_input_order():
    def slow_square(x):
        # later items finish first
        time.sleep(0.001 * (5 - x))
        return x * x

    assert map_indexed(slow_square, [0, 1, 2, 3, 4], max_workers=4) == [0, 1, 4, 9, 16]


def test_single_worker_runs_inline():
    seen = []
    map_indexed(lambda x: seen.append(threading.get_ident()), [1, 2, 3], max_workers=1)
    assert set(seen) == {threading.get_ident()}


def test_empty_input():
    assert map_indexed(lambda x: x, [], max_workers=3) == []


def test_failure_reports_the_index():
    def boom(x):
        if x == 2:
            raise ValueError("bad item")
        return x

    with pytest.raises(RuntimeError, match="index=2") as exc:
        map_indexed(boom, [0, 1, 2, 3], max_workers=2)
    assert isinstance(exc.value.__cause__, ValueError)
