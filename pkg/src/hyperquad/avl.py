"""AVL tree keyed by totally ordered Python values, with a comparison counter."""

from __future__ import annotations

from typing import Any, Iterator


class _Node:
    __slots__ = ("key", "value", "left", "right", "height")

    def __init__(self, key, value, left=None, right=None, height=1):
        self.key = key
        self.value = value
        self.left = left
        self.right = right
        self.height = height


def _h(node) -> int:
    return node.height if node is not None else 0


def _fix(node: _Node) -> _Node:
    node.height = 1 + max(_h(node.left), _h(node.right))
    return node


def _rotate_right(node: _Node) -> _Node:
    top = node.left
    node.left = top.right
    top.right = _fix(node)
    return _fix(top)


def _rotate_left(node: _Node) -> _Node:
    top = node.right
    node.right = top.left
    top.left = _fix(node)
    return _fix(top)


def _balance(node: _Node) -> _Node:
    _fix(node)
    tilt = _h(node.left) - _h(node.right)
    if tilt > 1:
        if _h(node.left.left) < _h(node.left.right):
            node.left = _rotate_left(node.left)
        return _rotate_right(node)
    if tilt < -1:
        if _h(node.right.right) < _h(node.right.left):
            node.right = _rotate_right(node.right)
        return _rotate_left(node)
    return node


class OrderedCollection:
    """Sorted map with O(log n) insert, remove, floor and successor.

    ``comparisons`` counts three-way key comparisons made by searches and
    updates (building from sorted input makes none).
    """

    def __init__(self):
        self._root: _Node | None = None
        self._size = 0
        self.comparisons = 0

    @classmethod
    def from_sorted(cls, items) -> "OrderedCollection":
        """Balanced tree from ``(key, value)`` pairs in strictly increasing key order."""
        items = list(items)
        for a, b in zip(items, items[1:]):
            if not a[0] < b[0]:
                raise ValueError("keys must be strictly increasing")
        out = cls()

        def grow(lo: int, hi: int):
            if lo >= hi:
                return None
            mid = (lo + hi) // 2
            # a midpoint split of m items has height bit_length(m)
            return _Node(
                items[mid][0], items[mid][1], grow(lo, mid), grow(mid + 1, hi), (hi - lo).bit_length()
            )

        out._root = grow(0, len(items))
        out._size = len(items)
        return out

    def __len__(self) -> int:
        return self._size

    def __iter__(self) -> Iterator[tuple[Any, Any]]:
        stack = []
        node = self._root
        while stack or node is not None:
            while node is not None:
                stack.append(node)
                node = node.left
            node = stack.pop()
            yield node.key, node.value
            node = node.right

    def keys(self) -> list:
        return [k for k, _ in self]

    def values(self) -> list:
        return [v for _, v in self]

    @property
    def height(self) -> int:
        return _h(self._root)

    def insert(self, key, value=None) -> None:
        self._root = self._insert(self._root, key, value)
        self._size += 1

    def _insert(self, node, key, value):
        if node is None:
            return _Node(key, value)
        self.comparisons += 1
        if key == node.key:
            raise KeyError("key already present")
        if key < node.key:
            node.left = self._insert(node.left, key, value)
        else:
            node.right = self._insert(node.right, key, value)
        return _balance(node)

    def remove(self, key) -> Any:
        """Remove ``key`` and return its value; ``KeyError`` if absent."""
        box = []
        self._root = self._remove(self._root, key, box)
        self._size -= 1
        return box[0]

    def _remove(self, node, key, box):
        if node is None:
            raise KeyError("key not present")
        self.comparisons += 1
        if key == node.key:
            box.append(node.value)
            if node.left is None:
                return node.right
            if node.right is None:
                return node.left
            # replace with the in-order successor
            succ = node.right
            while succ.left is not None:
                succ = succ.left
            node.key, node.value = succ.key, succ.value
            node.right = self._pop_min(node.right)
        elif key < node.key:
            node.left = self._remove(node.left, key, box)
        else:
            node.right = self._remove(node.right, key, box)
        return _balance(node)

    def _pop_min(self, node):
        if node.left is None:
            return node.right
        node.left = self._pop_min(node.left)
        return _balance(node)

    def floor(self, key):
        """Entry with the largest key <= ``key``, or ``None``."""
        best = None
        node = self._root
        while node is not None:
            self.comparisons += 1
            if key == node.key:
                return node.key, node.value
            if key < node.key:
                node = node.left
            else:
                best = node
                node = node.right
        return None if best is None else (best.key, best.value)

    def successor(self, key):
        """Entry with the smallest key > ``key``, or ``None``."""
        best = None
        node = self._root
        while node is not None:
            self.comparisons += 1
            if key < node.key:
                best = node
                node = node.left
            else:
                node = node.right
        return None if best is None else (best.key, best.value)

    def __contains__(self, key) -> bool:
        node = self._root
        while node is not None:
            if key == node.key:
                return True
            node = node.left if key < node.key else node.right
        return False

    def check(self) -> None:
        """Raise ``AssertionError`` if ordering, balance or size is broken."""

        def walk(node, lo, hi):
            if node is None:
                return 0, 0
            assert lo is None or lo < node.key
            assert hi is None or node.key < hi
            hl, nl = walk(node.left, lo, node.key)
            hr, nr = walk(node.right, node.key, hi)
            assert abs(hl - hr) <= 1
            assert node.height == 1 + max(hl, hr)
            return node.height, nl + nr + 1

        _, n = walk(self._root, None, None)
        assert n == self._size
