import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vislearn.params import ParamVector, pack, unpack


def test_pack_example():
    v = pack([("b", [1.0]), ("W", [[2.0, 3.0]])])
    assert np.array_equal(v.values, [1.0, 2.0, 3.0])
    assert v.layout == (("b", (1,)), ("W", (1, 2)))


def test_unpack_shape_and_values():
    v = pack([("b", [1.0]), ("W", [[2.0, 3.0]])])
    w = unpack(v, "W")
    assert w.shape == (1, 2)
    assert np.array_equal(w, [[2.0, 3.0]])


def test_unpack_unknown_name():
    v = pack([("b", [1.0])])
    with pytest.raises(KeyError):
        unpack(v, "nope")


def test_pack_duplicate_names_rejected():
    with pytest.raises(ValueError):
        pack([("a", [1.0]), ("a", [2.0])])


def test_pack_empty_list():
    v = pack([])
    assert v.size == 0
    assert v.layout == ()


def test_matrix_roundtrip_preserves_shape():
    rng = np.random.default_rng(5)
    m = rng.standard_normal((4, 4))
    v = pack([("m", m)])
    assert unpack(v, "m").shape == (4, 4)
    assert np.array_equal(unpack(v, "m"), m)


@given(st.lists(st.integers(1, 6), min_size=1, max_size=4))
def test_pack_unpack_roundtrip_random_layouts(sizes):
    rng = np.random.default_rng(sum(sizes))
    segs = [(f"s{i}", rng.standard_normal(n)) for i, n in enumerate(sizes)]
    v = pack(segs)
    for name, arr in segs:
        assert np.array_equal(unpack(v, name), arr)
    assert v.size == sum(sizes)


def test_segment_of_index():
    v = pack([("a", [1.0, 2.0]), ("c", [[3.0], [4.0]])])
    assert v.segment_of_index(0) == "a"
    assert v.segment_of_index(1) == "a"
    assert v.segment_of_index(2) == "c"
    assert v.segment_of_index(3) == "c"


def test_layout_value_length_consistency_enforced():
    with pytest.raises(ValueError):
        ParamVector(np.zeros(3), (("a", (2,)),))


def test_with_values_keeps_layout():
    v = pack([("a", [1.0, 2.0])])
    w = v.with_values(np.array([5.0, 6.0]))
    assert w.layout == v.layout
    with pytest.raises(ValueError):
        v.with_values(np.zeros(3))
