"""Exciton energy transfer in the adiabatic basis: decoherence from energy-gap
fluctuations plus population relaxation from non-adiabatic coupling."""
from .dynamics import DensityTrajectory, Simulation, simulate
from .eigen import Eigensystem, diagonalize, overlap_products
from .errors import ConfigError, NumericalError
from .features import TrajectoryFeatures, extract_features
from .lineshape import PhiBase, dephasing_table, phi_base
from .model import (UNITS, AdolphsRenger, BathSpec, Drude, ExcitonHamiltonian,
                    SimulationConfig, config_from_dict, fmo_preset, load_config)
from .relaxation import gamma_rates

__version__ = "0.1.0"

__all__ = [
    "AdolphsRenger", "BathSpec", "ConfigError", "DensityTrajectory", "Drude",
    "Eigensystem", "ExcitonHamiltonian", "NumericalError", "PhiBase", "Simulation",
    "SimulationConfig", "TrajectoryFeatures", "UNITS", "config_from_dict",
    "dephasing_table", "diagonalize", "extract_features", "fmo_preset", "gamma_rates",
    "load_config", "overlap_products", "phi_base", "simulate",
]
