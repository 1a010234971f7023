from .GameErrors import (
    GameError,
    IllegalMoveError,
    IllegalStakeError,
    PriorDomainError,
    FunctionalDomainError,
    InvariantViolationError,
    ConfigError,
)
from .IteratedLog import iterated_log, log_tower, log_tower_array, exp_tower, tower
from .SequenceSpec import SequenceSpec, parse_sequence

__all__ = [
    'GameError',
    'IllegalMoveError',
    'IllegalStakeError',
    'PriorDomainError',
    'FunctionalDomainError',
    'InvariantViolationError',
    'ConfigError',
    'iterated_log',
    'log_tower',
    'log_tower_array',
    'exp_tower',
    'tower',
    'SequenceSpec',
    'parse_sequence',
]
