"""Exact dynamics of a three-level lambda atom coupled to two cavity modes."""

from .atoms import AtomSpec, CouplingConfig, builtin_atom
from .config import ScenarioConfig, parse_config, preset_config
from .dressed import dressed_lattice
from .initial_state import AtomAmplitudes, FieldAmplitudes, build_packet, normalize_gamma
from .propagator import evolve, evolve_many
from .runner import run_scenario
from .state_space import BlockIndex, build_lattice

__version__ = "0.1.0"
