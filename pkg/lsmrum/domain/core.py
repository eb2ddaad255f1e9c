import math
from dataclasses import dataclass
from enum import Enum
from typing import NewType

from .atomic import AtomicInt

ObjectId = NewType("ObjectId", int)
Timestamp = NewType("Timestamp", int)

NEVER = Timestamp(0)
_U64_MAX = (1 << 64) - 1


@dataclass(frozen=True, slots=True)
class Location:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Location coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True, slots=True)
class Rect:
    min: Location
    max: Location

    def __post_init__(self) -> None:
        if self.min.x > self.max.x or self.min.y > self.max.y:
            raise ValueError(f"Inverted rect: min={self.min} max={self.max}")

    @classmethod
    def of(cls, x1: float, y1: float, x2: float, y2: float) -> "Rect":
        return cls(Location(x1, y1), Location(x2, y2))

    @classmethod
    def point(cls, loc: Location) -> "Rect":
        return cls(loc, loc)

    @classmethod
    def from_center(cls, center: Location, area: float) -> "Rect":
        half = math.sqrt(max(area, 0.0)) / 2.0
        return cls.of(center.x - half, center.y - half, center.x + half, center.y + half)

    def contains_point(self, loc: Location) -> bool:
        # Closed bounds on all four edges.
        return (
            self.min.x <= loc.x <= self.max.x and self.min.y <= loc.y <= self.max.y
        )

    def contains(self, other: "Rect") -> bool:
        return (
            self.min.x <= other.min.x
            and self.min.y <= other.min.y
            and other.max.x <= self.max.x
            and other.max.y <= self.max.y
        )

    def intersects(self, other: "Rect") -> bool:
        return not (
            other.min.x > self.max.x
            or other.max.x < self.min.x
            or other.min.y > self.max.y
            or other.max.y < self.min.y
        )

    def union(self, other: "Rect") -> "Rect":
        return Rect.of(
            min(self.min.x, other.min.x),
            min(self.min.y, other.min.y),
            max(self.max.x, other.max.x),
            max(self.max.y, other.max.y),
        )

    def area(self) -> float:
        return (self.max.x - self.min.x) * (self.max.y - self.min.y)

    def enlargement(self, other: "Rect") -> float:
        return self.union(other).area() - self.area()


@dataclass(frozen=True, slots=True)
class ObjectRecord:
    loc: Location
    oid: ObjectId
    ts: Timestamp

    def __post_init__(self) -> None:
        if self.ts <= 0:
            raise ValueError(f"ObjectRecord timestamp must be > 0, got {self.ts}")

    @property
    def key(self) -> tuple[int, float, float]:
        return (self.oid, self.loc.x, self.loc.y)


class OpKind(str, Enum):
    INSERT = "I"
    DELETE = "D"
    UPDATE = "U"
    QUERY = "Q"


@dataclass(frozen=True, slots=True)
class WorkloadOp:
    kind: OpKind
    oid: ObjectId | None = None
    loc: Location | None = None
    window: Rect | None = None
    old_loc: Location | None = None

    def __post_init__(self) -> None:
        if self.kind is OpKind.QUERY:
            if self.window is None or self.oid is not None or self.loc is not None:
                raise ValueError("Query op needs a window and no oid/loc")
            return
        if self.oid is None:
            raise ValueError(f"{self.kind.name} op needs an oid")
        if self.window is not None:
            raise ValueError(f"{self.kind.name} op must not carry a window")
        if self.kind is OpKind.DELETE:
            if self.loc is not None:
                raise ValueError("Delete op must not carry a location")
        elif self.loc is None:
            raise ValueError(f"{self.kind.name} op needs a location")


class TimestampCounter:
    """Engine-local logical clock; 0 is reserved for 'never'."""

    def __init__(self) -> None:
        self._counter = AtomicInt(0)

    def next(self) -> Timestamp:
        value = self._counter.increment_and_get()
        if value > _U64_MAX:
            raise OverflowError("Timestamp counter exhausted")
        return Timestamp(value)

    def peek(self) -> Timestamp:
        return Timestamp(self._counter.get())
