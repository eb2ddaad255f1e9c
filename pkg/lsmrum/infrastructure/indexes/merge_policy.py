from typing import Sequence

from ..storage import DiskComponent


class PrefixMergePolicy:
    """Merge the newest run of small components once it is ``threshold`` long.

    A component is mergeable while it and the run collected so far stay within
    ``max_mergeable_bytes``; the first component that does not fit ends the run.
    """

    def __init__(self, threshold: int = 5, max_mergeable_bytes: int = 64 << 20) -> None:
        if threshold < 1:
            raise ValueError("merge threshold must be >= 1")
        self.threshold = threshold
        self.max_mergeable_bytes = max_mergeable_bytes

    def select(self, components: Sequence[DiskComponent]) -> list[DiskComponent] | None:
        run: list[DiskComponent] = []
        total = 0
        for component in reversed(components):
            size = component.file_size
            if total + size > self.max_mergeable_bytes:
                break
            run.append(component)
            total += size
        if len(run) < max(2, self.threshold):
            return None
        run.reverse()
        return run
