import bisect
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperquad.avl import OrderedCollection

ops = st.lists(st.tuples(st.sampled_from(["ins", "del", "floor", "succ"]), st.integers(-50, 50)), max_size=300)


@settings(max_examples=200)
@given(ops)
def test_matches_sorted_list(seq):
    tree, model = OrderedCollection(), []
    for op, k in seq:
        i = bisect.bisect_left(model, k)
        present = i < len(model) and model[i] == k
        if op == "ins":
            if present:
                with pytest.raises(KeyError):
                    tree.insert(k, -k)
            else:
                tree.insert(k, -k)
                model.insert(i, k)
        elif op == "del":
            if present:
                assert tree.remove(k) == -k
                model.pop(i)
            else:
                with pytest.raises(KeyError):
                    tree.remove(k)
        elif op == "floor":
            j = bisect.bisect_right(model, k)
            assert tree.floor(k) == ((model[j - 1], -model[j - 1]) if j else None)
        else:
            j = bisect.bisect_right(model, k)
            assert tree.successor(k) == ((model[j], -model[j]) if j < len(model) else None)
        assert (k in tree) == (k in model)
    tree.check()
    assert tree.keys() == model
    assert len(tree) == len(model)
    if model:
        # AVL height bound
        assert tree.height <= 1.45 * math.log2(len(model) + 2)


@given(st.sets(st.integers(), max_size=500))
def test_from_sorted_is_balanced(keys):
    items = [(k, str(k)) for k in sorted(keys)]
    tree = OrderedCollection.from_sorted(items)
    tree.check()
    assert list(tree) == items
    assert tree.comparisons == 0


def test_from_sorted_rejects_unsorted_or_duplicates():
    with pytest.raises(ValueError):
        OrderedCollection.from_sorted([(2, None), (1, None)])
    with pytest.raises(ValueError):
        OrderedCollection.from_sorted([(1, None), (1, None)])


def test_empty_tree():
    tree = OrderedCollection()
    assert tree.floor(3) is None and tree.successor(3) is None
    assert len(tree) == 0 and tree.height == 0
    with pytest.raises(KeyError):
        tree.remove(3)


def test_search_costs_are_logarithmic():
    tree = OrderedCollection.from_sorted([(k, None) for k in range(1 << 12)])
    tree.comparisons = 0
    tree.floor(1234.5)
    assert tree.comparisons <= 13
