import numpy as np
import pytest

from metriclab.algebra import symmetric_handle
from metriclab.cayley import bfs_closure
from metriclab.graphio import (CacheFormatError, GraphCache, cache_key,
                               deserialize_graph, serialize_graph)


@pytest.fixture(scope="module")
def s4_graph():
    return bfs_closure(symmetric_handle(4))


def test_round_trip_byte_exact(s4_graph):
    raw = serialize_graph(s4_graph)
    back = deserialize_graph(raw)
    assert back.n == s4_graph.n
    assert back.element_bytes == s4_graph.element_bytes
    assert np.array_equal(back.indptr, s4_graph.indptr)
    assert np.array_equal(back.nbr, s4_graph.nbr)
    assert np.array_equal(back.lbl, s4_graph.lbl)
    assert back.edge_labels == s4_graph.edge_labels
    assert back.vertex_transitive == s4_graph.vertex_transitive
    assert serialize_graph(back) == raw


def test_crc_detects_corruption(s4_graph):
    raw = bytearray(serialize_graph(s4_graph))
    raw[20] ^= 0xFF
    with pytest.raises(CacheFormatError):
        deserialize_graph(bytes(raw))


def test_bad_magic(s4_graph):
    raw = b"NOPE" + serialize_graph(s4_graph)[4:]
    with pytest.raises(CacheFormatError):
        deserialize_graph(raw)


def test_cache_store_load(tmp_path, s4_graph):
    cache = GraphCache(tmp_path)
    key = cache_key("sym:4", [b"ab", b"cd"], 100)
    assert cache.load(key) is None
    cache.store(key, s4_graph)
    got = cache.load(key)
    assert got.element_bytes == s4_graph.element_bytes


def test_cache_key_sensitivity():
    a = cache_key("desc", [b"x"], 10)
    assert a == cache_key("desc", [b"x"], 10)
    assert a != cache_key("desc", [b"x"], 11)
    assert a != cache_key("desc2", [b"x"], 10)
    assert a != cache_key("desc", [b"y"], 10)
    # length-prefixing keeps generator lists unambiguous
    assert cache_key("d", [b"ab", b"c"], 1) != cache_key("d", [b"a", b"bc"], 1)
