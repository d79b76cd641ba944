"""hoferlab: desk-scale laboratory for higher-order length functionals on
Hamiltonian paths, displacement constructions, and the finite-group
snowflake transform."""

from . import corpus, expr, flow, grid, hampath, lengths, snowflake, verify
from .experiments import constants

__version__ = "0.1.0"

__all__ = ["corpus", "expr", "flow", "grid", "hampath", "lengths",
           "snowflake", "verify", "constants", "__version__"]
