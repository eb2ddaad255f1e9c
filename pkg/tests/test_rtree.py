import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsmrum.domain.core import Location, ObjectId, ObjectRecord, Rect, Timestamp
from lsmrum.domain.rtree import Rtree, RtreeError
from lsmrum.domain.update_memo import UpdateMemo

Points = st.lists(
    st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=0, max_size=150
)
Windows = st.tuples(
    st.integers(-60, 60), st.integers(-60, 60), st.integers(0, 60), st.integers(0, 60)
)


def _rec(x: float, y: float, oid: int, ts: int) -> ObjectRecord:
    return ObjectRecord(Location(x, y), ObjectId(oid), Timestamp(ts))


def _build(points, capacity: int = 4) -> tuple[Rtree, list[ObjectRecord]]:
    tree = Rtree(node_capacity=capacity)
    records = [_rec(x, y, i, i + 1) for i, (x, y) in enumerate(points)]
    for rec in records:
        tree.insert(rec)
    return tree, records


@given(Points, Windows)
@settings(max_examples=150, deadline=None)
def test_range_search_should_match_brute_force(points, window):
    tree, records = _build(points)
    x, y, w, h = window
    rect = Rect.of(x, y, x + w, y + h)

    found = sorted(r.key for r in tree.range_search(rect))

    assert found == sorted(r.key for r in records if rect.contains_point(r.loc))


@given(Points)
@settings(max_examples=100, deadline=None)
def test_insert_should_keep_invariants(points):
    tree, records = _build(points)

    tree.check_invariants()
    assert len(tree) == len(records)
    assert sorted(r.key for r in tree.all_records()) == sorted(r.key for r in records)


@given(Points, st.data())
@settings(max_examples=100, deadline=None)
def test_remove_exact_should_keep_invariants(points, data):
    tree, records = _build(points)
    doomed = data.draw(st.lists(st.sampled_from(records), unique_by=id)) if records else []

    for rec in doomed:
        assert tree.remove_exact(rec.loc, rec.oid)

    tree.check_invariants()
    survivors = [r for r in records if not any(r is d for d in doomed)]
    assert sorted(r.key for r in tree.all_records()) == sorted(r.key for r in survivors)


def test_insert_should_return_leaf_holding_the_record():
    tree = Rtree(node_capacity=4)

    for i in range(60):
        rec = _rec(i % 7, i // 7, i, i + 1)
        leaf = tree.insert(rec)

        assert leaf.is_leaf
        assert any(r is rec for r in leaf.records)
    assert tree.height() > 1


def test_remove_exact_should_return_false_when_missing():
    tree, _ = _build([(1, 1), (2, 2)])

    assert not tree.remove_exact(Location(1, 1), ObjectId(1))
    assert not tree.remove_exact(Location(9, 9), ObjectId(0))
    assert len(tree) == 2


def test_remove_exact_should_empty_tree_when_everything_removed():
    tree, records = _build([(i, i) for i in range(20)])

    for rec in records:
        tree.remove_exact(rec.loc, rec.oid)

    tree.check_invariants()
    assert len(tree) == 0
    assert tree.root.is_leaf
    assert tree.range_search(Rect.of(-100, -100, 100, 100)) == []


def test_check_invariants_should_raise_when_size_drifts():
    tree, _ = _build([(1, 1), (2, 2)])
    tree.size = 5

    with pytest.raises(RtreeError):
        tree.check_invariants()


def test_clean_node_should_drop_obsolete_records_and_settle_memo():
    tree = Rtree(node_capacity=8)
    leaf = tree.insert(_rec(1, 1, 1, 1))
    tree.insert(_rec(2, 2, 1, 2))
    tree.insert(_rec(3, 3, 2, 3))
    memo = UpdateMemo()
    memo.record_obsolete(ObjectId(1), Timestamp(2))
    leaf.update_counter = 3

    removed = tree.clean_node(leaf, memo, now=2)

    assert removed == 1
    assert memo.lookup(ObjectId(1)) is None
    assert sorted(r.ts for r in tree.all_records()) == [2, 3]
    assert leaf.update_counter == 0
    assert leaf.last_cleaned_at == 2
    tree.check_invariants()


def test_clean_node_should_raise_when_given_internal_node():
    tree, _ = _build([(i, i) for i in range(30)])

    with pytest.raises(RtreeError):
        tree.clean_node(tree.root, UpdateMemo())


def test_split_should_reset_update_counters():
    tree = Rtree(node_capacity=4)
    leaf = tree.insert(_rec(0, 0, 0, 1))
    for i in range(1, 4):
        tree.insert(_rec(i, i, i, i + 1))
    leaf.update_counter = 3

    tree.insert(_rec(4, 4, 4, 5))

    assert all(node.update_counter == 0 for node in tree.leaves())


def test_leaf_cursor_should_visit_every_leaf_then_wrap():
    tree, _ = _build([(i % 10, i // 10) for i in range(80)])
    leaves = tree.leaves()
    cursor = tree.leaf_iter()

    visited = [cursor.next() for _ in leaves]

    assert [id(leaf) for leaf in visited] == [id(leaf) for leaf in leaves]
    assert cursor.next() is leaves[0]


def test_leaf_cursor_should_continue_past_last_leaf_when_tree_changes():
    tree, _ = _build([(i % 10, i // 10) for i in range(80)])
    cursor = tree.leaf_iter()
    first = cursor.next()

    for i in range(80, 120):
        tree.insert(_rec(i % 10, i // 10, i, i + 1))

    leaves = tree.leaves()
    expected = leaves[(leaves.index(first) + 1) % len(leaves)]
    assert cursor.next() is expected


@pytest.mark.parametrize("steps_before_split", [1, 5, 11])
def test_leaf_cursor_should_visit_every_leaf_within_two_cycles_when_split_mid_cycle(
    steps_before_split,
):
    tree, _ = _build([(i % 10, i // 10) for i in range(80)])
    cursor = tree.leaf_iter()
    for _ in range(steps_before_split):
        cursor.next()
    before = len(tree.leaves())

    for i in range(80, 140):
        tree.insert(_rec(i % 10 + 0.5, i // 10, i, i + 1))

    leaves = tree.leaves()
    assert len(leaves) > before
    visited = {id(cursor.next()) for _ in range(2 * len(leaves))}
    assert visited == {id(leaf) for leaf in leaves}


def test_clean_node_should_drop_every_stale_copy_when_oid_inserted_twice():
    tree = Rtree(node_capacity=8)
    leaf = tree.insert(_rec(1, 1, 1, 1))
    tree.insert(_rec(2, 2, 1, 2))
    tree.insert(_rec(3, 3, 1, 3))
    memo = UpdateMemo()
    memo.record_obsolete(ObjectId(1), Timestamp(3))

    removed = tree.clean_node(leaf, memo, now=1)

    assert removed == 2
    assert list(tree.all_records()) == [_rec(3, 3, 1, 3)]
    assert memo.lookup(ObjectId(1)) is None
    assert memo.unsettled.get() == 1
    tree.check_invariants()
