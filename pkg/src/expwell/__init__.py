"""Bound states of the symmetric exponential well V(x) = g^2 exp|x|."""
from .oracle import GeneralSolutionCoeffs, NumerovConfig, general_solution_value, numerov_endpoint, numerov_energy
from .rootfind import (
    EnergyBracket,
    LostSignChange,
    MissedRootError,
    SpectrumTable,
    assign_indices,
    detect_precision_loss,
    refine,
    scan_sign_changes,
    spectrum,
    sweep_g,
)
from .secular import (
    AsymptoticDecay,
    Parity,
    RegularMatch,
    SecularSpec,
    coupling,
    psi_asym,
    psi_regular,
    secular_asym,
    secular_regular,
)
from .specfun import PrecisionExhausted, PrecisionPolicy

__all__ = [
    "AsymptoticDecay", "EnergyBracket", "GeneralSolutionCoeffs", "LostSignChange",
    "MissedRootError", "NumerovConfig", "Parity", "PrecisionExhausted", "PrecisionPolicy",
    "RegularMatch", "SecularSpec", "SpectrumTable", "assign_indices", "coupling",
    "detect_precision_loss", "general_solution_value", "numerov_endpoint", "numerov_energy",
    "psi_asym", "psi_regular", "refine", "scan_sign_changes", "secular_asym",
    "secular_regular", "spectrum", "sweep_g",
]
