import numpy as np
import pytest

from table_store import PackedTable, aggregate, cache_path, load_table, save_table, try_load_table


def test_lookup_hits_and_misses():
    keys = np.arange(0, 5000, dtype=np.int64) * 1024
    counts = np.arange(1, 5001, dtype=np.int64)
    table = PackedTable(keys, counts)
    assert len(table) == 5000
    assert table.load_factor <= 0.7
    assert np.array_equal(table.lookup(keys), counts)
    assert np.array_equal(table.lookup(keys + 1), np.zeros(5000, dtype=np.int64))


def test_entries_are_sorted_by_key():
    keys = np.array([40, 3, 17, 9], dtype=np.int64)
    table = PackedTable(keys, np.array([1, 2, 3, 4], dtype=np.int64))
    k, c = table.entries()
    assert k.tolist() == [3, 9, 17, 40]
    assert c.tolist() == [2, 4, 3, 1]


def test_empty_table():
    table = PackedTable(np.array([], dtype=np.int64), np.array([], dtype=np.int64))
    assert len(table) == 0
    assert table.lookup(np.array([5], dtype=np.int64)).tolist() == [0]


def test_aggregate_sums_equal_keys():
    keys, sums = aggregate(np.array([5, 1, 5, 2, 1, 5]), np.array([1, 2, 3, 4, 5, 6]))
    assert keys.tolist() == [1, 2, 5]
    assert sums.tolist() == [7, 4, 10]


def test_cache_file_round_trip(tmp_path):
    path = cache_path(str(tmp_path), 2, 3)
    keys = np.array([30, 10, 20], dtype=np.int64)
    save_table(path, 2, 3, keys, np.array([3, 1, 2], dtype=np.int64))
    k, c = load_table(path, 2, 3)
    assert k.tolist() == [10, 20, 30]
    assert c.tolist() == [1, 2, 3]
    with open(path, "rb") as fh:
        assert fh.read(8) == b"VINTAB01"


def test_cache_rejects_other_parameters(tmp_path):
    path = cache_path(str(tmp_path), 2, 3)
    save_table(path, 2, 3, np.array([1], dtype=np.int64), np.array([1], dtype=np.int64))
    with pytest.raises(ValueError):
        load_table(path, 2, 4)


def test_corrupted_cache_is_ignored_with_warning(tmp_path, capsys):
    path = cache_path(str(tmp_path), 2, 3)
    with open(path, "wb") as fh:
        fh.write(b"not a table at all")
    assert try_load_table(path, 2, 3) is None
    assert "ignoring" in capsys.readouterr().err
    assert try_load_table(str(tmp_path / "missing.vintab"), 2, 3) is None
