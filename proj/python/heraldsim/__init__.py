"""Heralded polarization-entanglement source simulator."""

from ._heraldsim import (
    ConfigError,
    Experiment,
    UndefinedEstimate,
    __version__,
    chsh_werner_threshold,
    coupling_from_rate,
    dark_count_ratio,
    eff_exp,
    eff_theory,
    pair_probability,
)

__all__ = [
    "ConfigError",
    "Experiment",
    "UndefinedEstimate",
    "__version__",
    "chsh_werner_threshold",
    "coupling_from_rate",
    "dark_count_ratio",
    "eff_exp",
    "eff_theory",
    "pair_probability",
]
