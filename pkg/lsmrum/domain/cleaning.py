"""In-memory cleaning hooks fired after every update.

Buffered cleaning counts updates per leaf and cleans the leaf that crosses its
threshold. Vacuum cleaning counts updates globally and walks the leaves
round-robin, cleaning one leaf per ``threshold`` updates.
"""

import logging

from .rtree import LeafCursor, Rtree, RtreeNode
from .update_memo import UpdateMemo

logger = logging.getLogger(__name__)


class BufferedCleaner:
    def __init__(self, threshold: int = 4) -> None:
        if threshold < 1:
            raise ValueError("buffered threshold must be >= 1")
        self.threshold = threshold
        self.removed = 0
        self.cleanings = 0

    def on_update(
        self, tree: Rtree, leaf: RtreeNode, memo: UpdateMemo, now: int = 0
    ) -> int:
        leaf.update_counter += 1
        if leaf.update_counter < self.threshold:
            return 0
        removed = tree.clean_node(leaf, memo, now)
        self.removed += removed
        self.cleanings += 1
        return removed


class VacuumCleaner:
    def __init__(self, threshold: int = 8, skip_recent: bool = True) -> None:
        if threshold < 1:
            raise ValueError("vacuum threshold must be >= 1")
        self.threshold = threshold
        self.skip_recent = skip_recent
        self.global_counter = 0
        self.removed = 0
        self.cleanings = 0
        self.skipped = 0
        self._tree: Rtree | None = None
        self._cursor: LeafCursor | None = None

    def attach(self, tree: Rtree) -> None:
        """Point the cursor at the first leaf of a (new) memory tree."""
        self._tree = tree
        self._cursor = tree.leaf_iter()
        self.global_counter = 0

    def on_update(self, memo: UpdateMemo, now: int = 0) -> int:
        if self._tree is None or self._cursor is None:
            raise RuntimeError("VacuumCleaner used before attach()")
        self.global_counter += 1
        if self.global_counter < self.threshold:
            return 0
        self.global_counter = 0

        leaf = self._next_target(now)
        if leaf is None:
            return 0
        removed = self._tree.clean_node(leaf, memo, now)
        self.removed += removed
        self.cleanings += 1
        return removed

    def _next_target(self, now: int) -> RtreeNode | None:
        assert self._tree is not None and self._cursor is not None
        for _ in range(len(self._tree.leaves())):
            leaf = self._cursor.next()
            if not self._recently_cleaned(leaf, now):
                return leaf
            self.skipped += 1
        logger.debug("Vacuum pass at update %d found only recently cleaned leaves", now)
        return None

    def _recently_cleaned(self, leaf: RtreeNode, now: int) -> bool:
        if not self.skip_recent or leaf.last_cleaned_at is None:
            return False
        return now - leaf.last_cleaned_at < self.threshold
