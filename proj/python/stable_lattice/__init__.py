"""Simulation and numerical verification of lattice systems driven by white
symmetric alpha-stable noise.

The heavy lifting lives in the :mod:`stable_lattice._core` extension; this
package re-exports its public surface.
"""

from ._core import (
    Model,
    empirical_char_fn,
    exp_decay_total_mass,
    exp_ou_uniform_bound,
    ks_statistic,
    matrix_power_bound,
    min_B_for_A,
    sample_increments,
    white_noise_path,
    __version__,
)

__all__ = [
    "Model",
    "empirical_char_fn",
    "exp_decay_total_mass",
    "exp_ou_uniform_bound",
    "ks_statistic",
    "matrix_power_bound",
    "min_B_for_A",
    "sample_increments",
    "white_noise_path",
    "__version__",
]
