"""Constraint-programming solver for quantifier-free floating-point SMT-LIB
instances."""

from .domain import FpDomain, density, middle
from .errors import FpcpError, InputError, ValidationError
from .fp import BINARY16, BINARY32, BINARY64, FpFormat, FpValue
from .frontend import ModelM0, parse_file, parse_script
from .solver import PRESETS, RunReport, SolverConfig, preset, solve_file, solve_m0, solve_text

__version__ = "0.1.0"

__all__ = [
    "FpDomain",
    "FpFormat",
    "FpValue",
    "BINARY16",
    "BINARY32",
    "BINARY64",
    "density",
    "middle",
    "ModelM0",
    "parse_file",
    "parse_script",
    "SolverConfig",
    "RunReport",
    "PRESETS",
    "preset",
    "solve_file",
    "solve_m0",
    "solve_text",
    "FpcpError",
    "InputError",
    "ValidationError",
]
