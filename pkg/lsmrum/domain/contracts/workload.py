from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

from ..core import WorkloadOp
from ..curve import DEFAULT_WORLD, World


class WorkloadKind(str, Enum):
    CHECKIN = "checkin"  # clustered around hotspots, fresh draw per visit
    MOVING = "moving"  # gradual random walk per object
    PICKUP = "pickup"  # uniform, uncorrelated


class TraceFormatError(Exception):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class WorkloadSpec:
    kind: WorkloadKind
    n_ops: int
    n_oids: int
    seed: int = 0
    query_ratio: float = 0.0
    delete_ratio: float = 0.0
    max_query_area: float = 0.0001  # fraction of the world box
    step_fraction: float = 0.0005  # moving: gaussian sigma as a fraction of world extent
    hotspots: int = 16
    world: World = DEFAULT_WORLD


class TraceStoreContract(ABC):
    @abstractmethod
    def write(self, path: Path, ops: Iterable[WorkloadOp]) -> int:
        pass

    @abstractmethod
    def read(self, path: Path) -> list[WorkloadOp]:
        pass
