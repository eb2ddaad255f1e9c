"""In-memory R-tree backing the LSM memory component.

Guttman insertion with quadratic split. Leaves hold ObjectRecords, internal
nodes hold children. Each leaf carries an update counter and the global
update number of its last clean, which the buffered and vacuum cleaners use.

The tree is not synchronized: the owning engine serializes writers and lets
readers in only between writes.
"""

from typing import Iterator, Sequence, Union

from .core import Location, ObjectId, ObjectRecord, Rect
from .update_memo import UpdateMemo

Box = tuple[float, float, float, float]

DEFAULT_NODE_CAPACITY = 32
DEFAULT_MIN_FILL_RATIO = 0.4


class RtreeError(Exception):
    pass


def _point_box(loc: Location) -> Box:
    return (loc.x, loc.y, loc.x, loc.y)


def _union(a: Box, b: Box) -> Box:
    return (
        a[0] if a[0] < b[0] else b[0],
        a[1] if a[1] < b[1] else b[1],
        a[2] if a[2] > b[2] else b[2],
        a[3] if a[3] > b[3] else b[3],
    )


def _area(b: Box) -> float:
    return (b[2] - b[0]) * (b[3] - b[1])


def _intersects(a: Box, b: Box) -> bool:
    return not (b[0] > a[2] or b[2] < a[0] or b[1] > a[3] or b[3] < a[1])


def _cover(boxes: Sequence[Box]) -> Box | None:
    if not boxes:
        return None
    return (
        min(b[0] for b in boxes),
        min(b[1] for b in boxes),
        max(b[2] for b in boxes),
        max(b[3] for b in boxes),
    )


Entry = Union[ObjectRecord, "RtreeNode"]


class RtreeNode:
    __slots__ = (
        "box",
        "entries",
        "is_leaf",
        "parent",
        "update_counter",
        "last_cleaned_at",
    )

    def __init__(self, is_leaf: bool, parent: "RtreeNode | None" = None) -> None:
        self.box: Box | None = None
        self.entries: list[Entry] = []
        self.is_leaf = is_leaf
        self.parent = parent
        self.update_counter = 0
        self.last_cleaned_at: int | None = None

    def __repr__(self) -> str:
        kind = "leaf" if self.is_leaf else "node"
        return f"RtreeNode({kind}, entries={len(self.entries)}, counter={self.update_counter})"

    @property
    def mbr(self) -> Rect | None:
        if self.box is None:
            return None
        return Rect.of(*self.box)

    @property
    def records(self) -> list[ObjectRecord]:
        if not self.is_leaf:
            raise RtreeError("records requested from an internal node")
        return self.entries  # type: ignore[return-value]

    @property
    def children(self) -> list["RtreeNode"]:
        if self.is_leaf:
            raise RtreeError("children requested from a leaf")
        return self.entries  # type: ignore[return-value]

    def entry_boxes(self) -> list[Box]:
        if self.is_leaf:
            return [_point_box(r.loc) for r in self.records]
        return [c.box for c in self.children if c.box is not None]

    def retighten(self) -> None:
        self.box = _cover(self.entry_boxes())


def _entry_box(entry: Entry) -> Box:
    if isinstance(entry, ObjectRecord):
        return _point_box(entry.loc)
    assert entry.box is not None
    return entry.box


class Rtree:
    def __init__(
        self,
        node_capacity: int = DEFAULT_NODE_CAPACITY,
        min_fill_ratio: float = DEFAULT_MIN_FILL_RATIO,
    ) -> None:
        if node_capacity < 2:
            raise ValueError("node_capacity must be at least 2")
        self.node_capacity = node_capacity
        self.min_fill = max(1, int(node_capacity * min_fill_ratio))
        self.root = RtreeNode(is_leaf=True)
        self.size = 0
        self.structure_version = 0
        self._leaves_cache: list[RtreeNode] | None = None
        self._leaves_version = -1

    def __len__(self) -> int:
        return self.size

    # --- insert ---------------------------------------------------------

    def insert(self, rec: ObjectRecord) -> RtreeNode:
        """Insert a record and return the leaf it landed in."""
        box = _point_box(rec.loc)
        leaf = self._choose_leaf(box)
        leaf.entries.append(rec)
        self.size += 1
        if len(leaf.entries) <= self.node_capacity:
            return leaf
        kept, sibling = self._split(leaf)
        return kept if any(e is rec for e in kept.entries) else sibling

    def _choose_leaf(self, box: Box) -> RtreeNode:
        node = self.root
        node.box = box if node.box is None else _union(node.box, box)
        while not node.is_leaf:
            best: RtreeNode | None = None
            best_growth = 0.0
            best_area = 0.0
            for child in node.children:
                assert child.box is not None
                area = _area(child.box)
                growth = _area(_union(child.box, box)) - area
                if (
                    best is None
                    or growth < best_growth
                    or (growth == best_growth and area < best_area)
                ):
                    best, best_growth, best_area = child, growth, area
            assert best is not None
            best.box = _union(best.box, box)  # type: ignore[arg-type]
            node = best
        return node

    def _split(self, node: RtreeNode) -> tuple[RtreeNode, RtreeNode]:
        group_a, group_b = self._quadratic_partition(node.entries)
        sibling = RtreeNode(is_leaf=node.is_leaf, parent=node.parent)
        node.entries = group_a
        sibling.entries = group_b
        if not node.is_leaf:
            for child in sibling.children:
                child.parent = sibling
        node.update_counter = 0
        sibling.update_counter = 0
        node.retighten()
        sibling.retighten()
        self.structure_version += 1

        parent = node.parent
        if parent is None:
            new_root = RtreeNode(is_leaf=False)
            new_root.entries = [node, sibling]
            node.parent = new_root
            sibling.parent = new_root
            new_root.retighten()
            self.root = new_root
        else:
            parent.entries.insert(parent.entries.index(node) + 1, sibling)
            if len(parent.entries) > self.node_capacity:
                self._split(parent)
        return node, sibling

    def _quadratic_partition(
        self, entries: list[Entry]
    ) -> tuple[list[Entry], list[Entry]]:
        boxes = [_entry_box(e) for e in entries]
        n = len(entries)

        seed_a, seed_b, worst = 0, 1, -1.0
        for i in range(n):
            for j in range(i + 1, n):
                waste = _area(_union(boxes[i], boxes[j])) - _area(boxes[i]) - _area(boxes[j])
                if waste > worst:
                    seed_a, seed_b, worst = i, j, waste

        group_a, group_b = [entries[seed_a]], [entries[seed_b]]
        box_a, box_b = boxes[seed_a], boxes[seed_b]
        remaining = [i for i in range(n) if i not in (seed_a, seed_b)]

        while remaining:
            if len(group_a) + len(remaining) == self.min_fill:
                group_a.extend(entries[i] for i in remaining)
                break
            if len(group_b) + len(remaining) == self.min_fill:
                group_b.extend(entries[i] for i in remaining)
                break

            pick, pick_pos, pick_diff = remaining[0], 0, -1.0
            grow_a = grow_b = 0.0
            for pos, i in enumerate(remaining):
                da = _area(_union(box_a, boxes[i])) - _area(box_a)
                db = _area(_union(box_b, boxes[i])) - _area(box_b)
                if abs(da - db) > pick_diff:
                    pick, pick_pos, pick_diff = i, pos, abs(da - db)
                    grow_a, grow_b = da, db
            remaining.pop(pick_pos)

            to_a = (
                grow_a < grow_b
                or (grow_a == grow_b and _area(box_a) < _area(box_b))
                or (
                    grow_a == grow_b
                    and _area(box_a) == _area(box_b)
                    and len(group_a) <= len(group_b)
                )
            )
            if to_a:
                group_a.append(entries[pick])
                box_a = _union(box_a, boxes[pick])
            else:
                group_b.append(entries[pick])
                box_b = _union(box_b, boxes[pick])

        return group_a, group_b

    # --- removal --------------------------------------------------------

    def remove_exact(self, loc: Location, oid: ObjectId) -> bool:
        target = _point_box(loc)
        for leaf in self._leaves_touching(target):
            for pos, rec in enumerate(leaf.records):
                if rec.oid == oid and rec.loc == loc:
                    del leaf.entries[pos]
                    self.size -= 1
                    self._condense(leaf)
                    return True
        return False

    def _leaves_touching(self, box: Box) -> Iterator[RtreeNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.box is None or not _intersects(node.box, box):
                continue
            if node.is_leaf:
                yield node
            else:
                stack.extend(node.children)

    def _condense(self, node: RtreeNode) -> None:
        current: RtreeNode | None = node
        while current is not None:
            parent = current.parent
            if not current.entries and parent is not None:
                parent.entries.remove(current)
                current.parent = None
                self.structure_version += 1
            else:
                current.retighten()
            current = parent

        root = self.root
        if not root.is_leaf and not root.entries:
            self.root = RtreeNode(is_leaf=True)
            self.structure_version += 1
        while not self.root.is_leaf and len(self.root.entries) == 1:
            child = self.root.children[0]
            child.parent = None
            self.root = child
            self.structure_version += 1

    # --- cleaning -------------------------------------------------------

    def clean_node(self, leaf: RtreeNode, memo: UpdateMemo, now: int = 0) -> int:
        """Drop every record the memo marks obsolete and settle its count."""
        if not leaf.is_leaf:
            raise RtreeError("clean_node only operates on leaves")
        records = leaf.records
        # decide the whole leaf against the memo before any count moves
        obsolete = [memo.is_obsolete(rec) for rec in records]
        kept: list[Entry] = [rec for rec, stale in zip(records, obsolete) if not stale]
        removed = len(records) - len(kept)
        for rec, stale in zip(records, obsolete):
            if stale:
                memo.settle(rec.oid)
        leaf.update_counter = 0
        leaf.last_cleaned_at = now
        if removed:
            leaf.entries = kept
            self.size -= removed
            self._condense(leaf)
        return removed

    # --- search ---------------------------------------------------------

    def range_search(self, window: Rect) -> list[ObjectRecord]:
        qbox: Box = (window.min.x, window.min.y, window.max.x, window.max.y)
        out: list[ObjectRecord] = []
        for leaf in self._leaves_touching(qbox):
            for rec in leaf.records:
                x, y = rec.loc.x, rec.loc.y
                if qbox[0] <= x <= qbox[2] and qbox[1] <= y <= qbox[3]:
                    out.append(rec)
        return out

    # --- traversal ------------------------------------------------------

    def leaves(self) -> list[RtreeNode]:
        if self._leaves_cache is None or self._leaves_version != self.structure_version:
            found: list[RtreeNode] = []
            stack = [self.root]
            while stack:
                node = stack.pop()
                if node.is_leaf:
                    found.append(node)
                else:
                    stack.extend(reversed(node.children))
            self._leaves_cache = found
            self._leaves_version = self.structure_version
        return self._leaves_cache

    def leaf_iter(self) -> "LeafCursor":
        return LeafCursor(self)

    def all_records(self) -> Iterator[ObjectRecord]:
        for leaf in self.leaves():
            yield from leaf.records

    def height(self) -> int:
        depth, node = 1, self.root
        while not node.is_leaf:
            node = node.children[0]
            depth += 1
        return depth

    def check_invariants(self) -> None:
        leaf_depths: set[int] = set()
        stack: list[tuple[RtreeNode, int]] = [(self.root, 1)]
        count = 0
        while stack:
            node, depth = stack.pop()
            if len(node.entries) > self.node_capacity:
                raise RtreeError(f"{node!r} exceeds capacity {self.node_capacity}")
            if node.box != _cover(node.entry_boxes()):
                raise RtreeError(f"{node!r} has a loose or stale MBR")
            if node.is_leaf:
                leaf_depths.add(depth)
                count += len(node.entries)
                if any(not isinstance(e, ObjectRecord) for e in node.entries):
                    raise RtreeError("leaf holds a non-record entry")
            else:
                for child in node.children:
                    if not isinstance(child, RtreeNode) or child.parent is not node:
                        raise RtreeError("internal node holds a foreign child")
                    stack.append((child, depth + 1))
        if len(leaf_depths) > 1:
            raise RtreeError(f"leaves at unequal depths {sorted(leaf_depths)}")
        if count != self.size:
            raise RtreeError(f"size {self.size} disagrees with {count} stored records")


class LeafCursor:
    """Cyclic cursor over the tree's leaves, for vacuum cleaning.

    After a structural change the cursor re-anchors just past the last leaf it
    handed out, or at the same position if that leaf is gone.
    """

    def __init__(self, tree: Rtree) -> None:
        self._tree = tree
        self._pos = 0
        self._last: RtreeNode | None = None
        self._version = tree.structure_version

    def next(self) -> RtreeNode:
        leaves = self._tree.leaves()
        if self._version != self._tree.structure_version:
            for i, leaf in enumerate(leaves):
                if leaf is self._last:
                    self._pos = i + 1
                    break
            self._version = self._tree.structure_version
        if self._pos >= len(leaves):
            self._pos = 0
        leaf = leaves[self._pos]
        self._pos += 1
        self._last = leaf
        return leaf

    def __iter__(self) -> Iterator[RtreeNode]:
        while True:
            yield self.next()
