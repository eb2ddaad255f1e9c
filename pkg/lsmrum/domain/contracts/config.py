from abc import ABC, abstractmethod
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Iterable

from ..core import Rect
from ..curve import DEFAULT_WORLD, Curve, World


class CleaningFlag(str, Enum):
    FLUSH = "F"
    MERGE = "M"
    BUFFERED = "B"
    VACUUM = "V"


def parse_flags(value: str | Iterable[str]) -> frozenset[CleaningFlag]:
    """Accept "FMBV", "fm", ["F", "M"] or "" and return the flag set."""
    if isinstance(value, str):
        letters = list(value.replace(",", "").replace(" ", ""))
    else:
        letters = list(value)
    try:
        return frozenset(CleaningFlag(letter.upper()) for letter in letters)
    except ValueError:
        raise ValueError(
            f"Invalid cleaning flags {value!r}. Use any of F, M, B, V"
        ) from None


def format_flags(flags: Iterable[CleaningFlag]) -> str:
    present = set(flags)
    return "".join(f.value for f in CleaningFlag if f in present)


@dataclass(frozen=True)
class EngineConfig:
    memory_budget_bytes: int = 4 * 1024 * 1024
    page_size_bytes: int = 2048
    merge_threshold: int = 5
    node_capacity: int = 32
    buffered_threshold: int = 4
    vacuum_threshold: int = 8
    cleaning_flags: frozenset[CleaningFlag] = field(default_factory=frozenset)
    curve: Curve = Curve.HILBERT
    world: World = DEFAULT_WORLD
    max_mergeable_factor: int = 16
    vacuum_skip_recent: bool = True
    strict_validation: bool = False
    record_bytes_estimate: int = 40

    def __post_init__(self) -> None:
        for name in (
            "memory_budget_bytes",
            "page_size_bytes",
            "merge_threshold",
            "buffered_threshold",
            "vacuum_threshold",
            "max_mergeable_factor",
            "record_bytes_estimate",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.node_capacity < 2:
            raise ValueError(f"node_capacity must be >= 2, got {self.node_capacity}")
        try:
            object.__setattr__(self, "curve", Curve(self.curve))
        except ValueError:
            names = ", ".join(c.value for c in Curve)
            raise ValueError(f"curve must be one of {names}, got {self.curve!r}") from None
        min_x, min_y, max_x, max_y = self.world
        if not (min_x < max_x and min_y < max_y):
            raise ValueError(f"world box is empty or inverted: {self.world}")

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @property
    def world_rect(self) -> Rect:
        return Rect.of(*self.world)

    @property
    def max_mergeable_bytes(self) -> int:
        return self.memory_budget_bytes * self.max_mergeable_factor

    def has(self, flag: CleaningFlag) -> bool:
        return flag in self.cleaning_flags

    def with_flags(self, flags: str | Iterable[str]) -> "EngineConfig":
        return replace(self, cleaning_flags=parse_flags(flags))


class ConfigLoaderContract(ABC):
    @abstractmethod
    def load(self, path: Path | None = None) -> EngineConfig:
        pass
