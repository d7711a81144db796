"""Explicit-state CSL model checking for continuous-time Markov chains."""

from .checker import ModelChecker, QueryResult, check
from .ctmc import Ctmc, RewardStructure, build_state_space
from .errors import ModelError, NotIrreducibleError, NumericalError, ParseError, SatmcError, StateSpaceError
from .lang import bind_constants, parse_model, parse_properties, parse_property
from .ram import RamParams, build_constellation_model, build_single_satellite_model
from .sim import Estimate, SimConfig

__version__ = "0.1.0"

__all__ = [
    "Ctmc",
    "Estimate",
    "ModelChecker",
    "ModelError",
    "NotIrreducibleError",
    "NumericalError",
    "ParseError",
    "RamParams",
    "QueryResult",
    "RewardStructure",
    "SatmcError",
    "SimConfig",
    "StateSpaceError",
    "bind_constants",
    "build_constellation_model",
    "build_single_satellite_model",
    "build_state_space",
    "check",
    "parse_model",
    "parse_properties",
    "parse_property",
]
