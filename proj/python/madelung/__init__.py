"""Python interface to the madelung C++ library."""

import json

from ._core import (
    Error,
    Grid,
    MadelungState,
    PhaseField,
    Potential,
    SimParams,
    TopologyError,
    Trajectory,
    WaveState,
    anchored_phase,
    bohm_force,
    classical_limit,
    coherent,
    decay,
    decompose,
    eigenstate,
    energy_probability,
    equivalence,
    evolve,
    from_array,
    gaussian,
    heisenberg,
    hydrogen_circulation,
    max_deviation_up_to_phase,
    nonlinearity_defect,
    quantum_potential,
    reconstruct_phase,
    reconstruct_wave,
    residuals,
    selftest,
    weber_residual,
)
from ._core import run_config as _run_config

__all__ = [
    "Error",
    "Grid",
    "MadelungState",
    "PhaseField",
    "Potential",
    "SimParams",
    "TopologyError",
    "Trajectory",
    "WaveState",
    "anchored_phase",
    "bohm_force",
    "classical_limit",
    "coherent",
    "decay",
    "decompose",
    "eigenstate",
    "energy_probability",
    "equivalence",
    "evolve",
    "from_array",
    "gaussian",
    "heisenberg",
    "hydrogen_circulation",
    "max_deviation_up_to_phase",
    "nonlinearity_defect",
    "quantum_potential",
    "reconstruct_phase",
    "reconstruct_wave",
    "residuals",
    "run_config",
    "selftest",
    "weber_residual",
]


def run_config(config):
    """Run a configuration given as a dict or JSON text.

    Returns (exit_code, report, files) where report is the parsed report.json.
    """
    text = config if isinstance(config, str) else json.dumps(config)
    return _run_config(text)
