from threading import Lock


class AtomicInt:
    """Integer cell with atomic read-modify-write operations.

    CPython exposes no hardware compare-and-swap, so every read-modify-write
    is serialized by a per-cell lock; a plain read is a single attribute
    load. Callers still write their loops in CAS style (read, decide,
    compare_and_set) so the protocol reads the same as it would over real
    atomics.
    """

    __slots__ = ("_value", "_lock")

    def __init__(self, initial_value: int = 0) -> None:
        self._value = initial_value
        self._lock = Lock()

    def __repr__(self) -> str:
        return f"AtomicInt[value={self._value}]"

    def get(self) -> int:
        return self._value

    def set(self, value: int) -> None:
        with self._lock:
            self._value = value

    def increment_and_get(self) -> int:
        with self._lock:
            self._value += 1
            return self._value

    def decrement_and_get(self) -> int:
        with self._lock:
            self._value -= 1
            return self._value

    def add_and_get(self, delta: int) -> int:
        with self._lock:
            self._value += delta
            return self._value

    def compare_and_set(self, expected_value: int, new_value: int) -> bool:
        with self._lock:
            if self._value == expected_value:
                self._value = new_value
                return True
            return False

    def update_max(self, candidate: int) -> int:
        # Same spin shape as CILS: only ever raises the stored value.
        while True:
            current = self.get()
            if current >= candidate:
                return current
            if self.compare_and_set(current, candidate):
                return candidate
