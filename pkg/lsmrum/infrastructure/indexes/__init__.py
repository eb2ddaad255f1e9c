from .base import EngineError, LsmIndex
from .eager import EagerIndex
from .factory import UnknownStrategyError, get_index, known_strategies
from .rum import RumIndex
from .validation import ValidationIndex

__all__ = [
    "EagerIndex",
    "EngineError",
    "LsmIndex",
    "RumIndex",
    "UnknownStrategyError",
    "ValidationIndex",
    "get_index",
    "known_strategies",
]
