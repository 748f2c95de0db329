"""Driven-dissipative hard-core photonic lattice (XY spin-1/2) simulator.

Subpackages:
  model         parameters, coupling topologies, pair-coupling conventions
  meanfield     Gutzwiller dynamics, steady states, phases, limit cycles
  stability     plane-wave linear stability of uniform steady states
  exact         dense Hilbert-space oracle (Hamiltonian, Liouvillian, gap)
  trajectories  quantum-jump Monte Carlo and switching statistics
  permsym       permutation-symmetric Liouvillian for all-to-all coupling
  cli           command-line entry point
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    CouplingSpec,
    InfiniteRange,
    MeanFieldZ,
    ModelParams,
    NearestNeighbor1D,
    ParameterError,
    pair_coupling,
)
