from pathlib import Path

from ...domain.contracts.config import EngineConfig
from ...domain.contracts.index import SpatialIndexContract

STRATEGY_FLAGS = {
    "um": "",
    "um_f": "F",
    "um_m": "M",
    "um_fm": "FM",
    "um_bv": "BV",
    "um_fmbv": "FMBV",
}


class UnknownStrategyError(ValueError):
    pass


def known_strategies() -> tuple[str, ...]:
    return ("eager", "validation", *STRATEGY_FLAGS)


def get_index(
    strategy: str, config: EngineConfig, data_dir: Path
) -> SpatialIndexContract:
    from .eager import EagerIndex
    from .rum import RumIndex
    from .validation import ValidationIndex

    if strategy == "eager":
        return EagerIndex(config, data_dir)
    if strategy == "validation":
        return ValidationIndex(config, data_dir)
    if strategy in STRATEGY_FLAGS:
        return RumIndex(config.with_flags(STRATEGY_FLAGS[strategy]), data_dir, strategy)

    raise UnknownStrategyError(
        f"Unknown strategy '{strategy}'. "
        f"Available: {', '.join(known_strategies())}"
    )
