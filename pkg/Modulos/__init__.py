from .GameEngine import GameVariant, GameState, RoundRecord, new_game, play_round, replay
from .PriorDensity import Prior, PriorFamily, StaircaseTilt, make_prior
from .PriorValidator import ValidationReport, validate_assumption1
from .MixtureQuadrature import QuadratureSpec, QuadratureNodes, build_nodes
from .SkepticStrategies import (
    SkepticStrategy,
    ConstantProportion,
    DiscreteMixture,
    BayesMixture,
    Kronecker,
)
from .RealityStrategies import RealityStrategy, ScriptedPath, IIDSampler, TargetTracking, PricePath
from .ComplyingAdversary import ComplyingAdversary
from .CapitalBounds import BoundQuery, BoundResult
from .UpperClassCalculus import UpperClassFunction, apply_F, apply_G, integral_test

__all__ = [
    'GameVariant',
    'GameState',
    'RoundRecord',
    'new_game',
    'play_round',
    'replay',
    'Prior',
    'PriorFamily',
    'StaircaseTilt',
    'make_prior',
    'ValidationReport',
    'validate_assumption1',
    'QuadratureSpec',
    'QuadratureNodes',
    'build_nodes',
    'SkepticStrategy',
    'ConstantProportion',
    'DiscreteMixture',
    'BayesMixture',
    'Kronecker',
    'RealityStrategy',
    'ScriptedPath',
    'IIDSampler',
    'TargetTracking',
    'PricePath',
    'ComplyingAdversary',
    'BoundQuery',
    'BoundResult',
    'UpperClassFunction',
    'apply_F',
    'apply_G',
    'integral_test',
]
