"""Thread fan-out knob: order preservation and env validation."""

import pytest

from fracorder.concurrency import ordered_map, worker_count


def test_worker_count_defaults_to_sequential(monkeypatch):
    monkeypatch.delenv("FRACORDER_THREADS", raising=False)
    assert worker_count() == 0


def test_worker_count_reads_the_environment(monkeypatch):
    monkeypatch.setenv("FRACORDER_THREADS", "7")
    assert worker_count() == 7


def test_worker_count_rejects_bad_values(monkeypatch):
    monkeypatch.setenv("FRACORDER_THREADS", "many")
    with pytest.raises(ValueError, match="must be an integer"):
        worker_count()
    monkeypatch.setenv("FRACORDER_THREADS", "-2")
    with pytest.raises(ValueError, match=">= 0"):
        worker_count()


@pytest.mark.parametrize("threads", ["0", "1", "4"])
def test_ordered_map_preserves_input_order(monkeypatch, threads):
    monkeypatch.setenv("FRACORDER_THREADS", threads)
    items = list(range(40))
    assert ordered_map(lambda x: x * x, items) == [x * x for x in items]


def test_ordered_map_handles_empty_and_single_inputs(monkeypatch):
    monkeypatch.setenv("FRACORDER_THREADS", "4")
    assert ordered_map(lambda x: x + 1, []) == []
    assert ordered_map(lambda x: x + 1, [41]) == [42]
