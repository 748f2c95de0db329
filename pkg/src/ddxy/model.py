"""Physical parameters and coupling topologies shared by all solvers.

Conventions (gamma = 1 sets the unit of time):
  * Each cavity is a hard-core site: occupation 0 or 1, photon operators map
    to spin-1/2 lowering/raising operators.
  * Spin Hamiltonian:  H = -(J/2z) sum_<i,j> (sx_i sx_j + sy_i sy_j)
                           + Omega sum_i sx_i - (mu/2) sum_i sz_i
    with <i,j> running over ordered neighbor pairs (each bond twice).
  * Infinite-range coupling replaces the hopping by a uniform all-to-all
    term with per-pair strength 2*J/(N-1) in photon language, chosen so the
    collective coupling scale stays 2*J independent of N.
  * Photon loss at rate gamma on every site (jump operator = lowering op).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "ParameterError",
    "NearestNeighbor1D",
    "InfiniteRange",
    "MeanFieldZ",
    "CouplingSpec",
    "ModelParams",
    "pair_coupling",
    "bonds",
    "site_count",
    "neighbor_table",
    "validate_bloch",
    "load_config",
    "params_from_config",
    "config_from_params",
]


class ParameterError(ValueError):
    """Raised for invalid physical parameters or coupling topologies."""


@dataclass(frozen=True)
class NearestNeighbor1D:
    """Chain of n sites with nearest-neighbor coupling (ring if periodic)."""

    n: int
    periodic: bool = True

    kind = "nn1d"

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError(f"chain needs at least 2 sites, got n={self.n}")


@dataclass(frozen=True)
class InfiniteRange:
    """All-to-all coupling over n sites, per-pair strength 2J/(n-1).

    n = 1 is allowed as a degenerate single-site limit (no pairs); pair
    quantities reject it.
    """

    n: int

    kind = "infinite"

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"all-to-all coupling needs n >= 1, got n={self.n}")


@dataclass(frozen=True)
class MeanFieldZ:
    """Abstract lattice with coordination number z; mean-field solvers only.

    There is no microscopic Hilbert space attached to this variant, so the
    exact / trajectory / permutation-symmetric solvers reject it.
    """

    z: int

    kind = "meanfield"

    def __post_init__(self):
        if self.z < 1:
            raise ParameterError(f"coordination number must be >= 1, got z={self.z}")


CouplingSpec = Union[NearestNeighbor1D, InfiniteRange, MeanFieldZ]


@dataclass(frozen=True)
class ModelParams:
    """Model parameters; all rates in units of gamma when gamma = 1.

    j      hopping rate
    mu     drive detuning (laser frequency minus cavity frequency)
    omega  drive strength
    gamma  photon loss rate, must be positive
    """

    j: float
    mu: float
    omega: float
    gamma: float = 1.0
    coupling: CouplingSpec = MeanFieldZ(z=2)

    def __post_init__(self):
        for name in ("j", "mu", "omega", "gamma"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v}")
        if self.gamma <= 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")

    @property
    def n_sites(self) -> int:
        return site_count(self.coupling)


def site_count(coupling: CouplingSpec) -> int:
    """Number of microscopic sites, or raise for mean-field-only topologies."""
    if isinstance(coupling, (NearestNeighbor1D, InfiniteRange)):
        return coupling.n
    raise ParameterError(
        "MeanFieldZ has no microscopic site count; use NearestNeighbor1D or InfiniteRange"
    )


def pair_coupling(params: ModelParams) -> float:
    """Per-pair coupling strength of the spin Hamiltonian.

    NearestNeighbor1D / MeanFieldZ: the J/(2z) prefactor of the ordered-pair
    sum (z = 2 for chains).  InfiniteRange: the strength multiplying
    (sx_i sx_j + sy_i sy_j) for each unordered pair, i.e. J/(N-1), half the
    photon-language pair hopping 2J/(N-1).
    """
    c = params.coupling
    if isinstance(c, NearestNeighbor1D):
        return params.j / 4.0
    if isinstance(c, InfiniteRange):
        if c.n < 2:
            raise ParameterError("pair coupling undefined for a single site")
        return params.j / (c.n - 1)
    if isinstance(c, MeanFieldZ):
        return params.j / (2.0 * c.z)
    raise ParameterError(f"unknown coupling spec {c!r}")


def bonds(params: ModelParams) -> list[tuple[int, int, float]]:
    """Unordered bonds (i, j, g) with H_bond = -g (sx_i sx_j + sy_i sy_j).

    Chains contribute g = J/2 per bond (two ordered pairs of J/4 each); a
    periodic 2-site chain carries the double bond of a 2-ring, g = J.
    Infinite range contributes g = J/(N-1) for every pair.
    """
    c = params.coupling
    if isinstance(c, NearestNeighbor1D):
        g = params.j / 2.0
        if c.periodic:
            out = {}
            for i in range(c.n):
                a, b = i, (i + 1) % c.n
                key = (min(a, b), max(a, b))
                out[key] = out.get(key, 0.0) + g
            return [(i, j, v) for (i, j), v in sorted(out.items())]
        return [(i, i + 1, g) for i in range(c.n - 1)]
    if isinstance(c, InfiniteRange):
        if c.n == 1:
            return []
        g = params.j / (c.n - 1)
        return [(i, j, g) for i in range(c.n) for j in range(i + 1, c.n)]
    raise ParameterError("no microscopic bonds for MeanFieldZ coupling")


def neighbor_table(coupling: CouplingSpec, n_sites: int | None = None):
    """CSR neighbor lists (indices, indptr) and per-site field prefactor 2J/z_i.

    The prefactor column is returned as coefficients relative to J = 1, i.e.
    2/z_i; callers multiply by J.  Supported layouts:

      MeanFieldZ + 1 site   uniform ansatz, the site is its own neighbor.
      MeanFieldZ + 2 sites  two-sublattice ansatz, each site sees the other.
      NearestNeighbor1D     chain sites see i-1, i+1 (ends: one neighbor).
      InfiniteRange         every site sees all others, prefactor 2/(N-1).
    """
    if isinstance(coupling, MeanFieldZ):
        if n_sites == 1:
            return np.array([0]), np.array([0, 1]), np.array([2.0])
        if n_sites == 2:
            return np.array([1, 0]), np.array([0, 1, 2]), np.array([2.0, 2.0])
        raise ParameterError(
            f"MeanFieldZ supports 1-site (uniform) or 2-site (two-sublattice) "
            f"states, got {n_sites}"
        )
    if isinstance(coupling, NearestNeighbor1D):
        n = coupling.n
        if n_sites is not None and n_sites != n:
            raise ParameterError(f"state has {n_sites} sites, coupling expects {n}")
        idx, ptr = [], [0]
        for i in range(n):
            nbrs = [(i - 1) % n, (i + 1) % n] if coupling.periodic else [
                j for j in (i - 1, i + 1) if 0 <= j < n
            ]
            idx.extend(nbrs)
            ptr.append(len(idx))
        counts = np.diff(ptr)
        return np.array(idx), np.array(ptr), 2.0 / counts
    if isinstance(coupling, InfiniteRange):
        n = coupling.n
        if n_sites is not None and n_sites != n:
            raise ParameterError(f"state has {n_sites} sites, coupling expects {n}")
        idx = [j for i in range(n) for j in range(n) if j != i]
        ptr = [i * (n - 1) for i in range(n + 1)]
        return np.array(idx), np.array(ptr), np.full(n, 2.0 / (n - 1))
    raise ParameterError(f"unknown coupling spec {coupling!r}")


def validate_bloch(field: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Check a (n_sites, 3) Bloch field: finite, per-site norm <= 1 + tol."""
    field = np.asarray(field, dtype=float)
    if field.ndim == 1 and field.shape == (3,):
        field = field[None, :]
    if field.ndim != 2 or field.shape[1] != 3:
        raise ParameterError(f"Bloch field must have shape (n_sites, 3), got {field.shape}")
    if not np.all(np.isfinite(field)):
        raise ParameterError("Bloch field contains non-finite entries")
    norms = np.linalg.norm(field, axis=1)
    worst = norms.max()
    if worst > 1.0 + tol:
        raise ParameterError(f"Bloch vector norm {worst} exceeds 1 + {tol}")
    return field


# ---------------------------------------------------------------------------
# Flat key-value configuration files.
#
# Schema (all keys optional unless noted):
#   j                 float, required
#   mu                float, required
#   omega             float, required
#   gamma             float, default 1.0
#   coupling.kind     one of nn1d | infinite | meanfield (default meanfield)
#   coupling.n        int, site count for nn1d / infinite
#   coupling.periodic bool for nn1d (default true)
#   coupling.z        int, coordination number for meanfield (default 2)
#
# Lines are `key = value`; blank lines and #-comments are ignored.
# ---------------------------------------------------------------------------

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ParameterError(f"cannot parse boolean from {s!r}")


def load_config(path) -> dict[str, str]:
    """Read a flat key-value config file into a string-valued dict."""
    cfg: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, val = line.split("=", 1)
            cfg[key.strip()] = val.strip()
    return cfg


def params_from_config(cfg: dict) -> ModelParams:
    """Build ModelParams from a flat config-dict (strings or typed values)."""
    def get(key, default=None):
        return cfg.get(key, default)

    missing = [k for k in ("j", "mu", "omega") if get(k) is None]
    if missing:
        raise ParameterError(f"config missing required keys: {', '.join(missing)}")
    kind = str(get("coupling.kind", "meanfield")).strip().lower()
    if kind == "nn1d":
        if get("coupling.n") is None:
            raise ParameterError("coupling.kind = nn1d requires coupling.n")
        periodic = get("coupling.periodic", True)
        if isinstance(periodic, str):
            periodic = _parse_bool(periodic)
        coupling: CouplingSpec = NearestNeighbor1D(int(get("coupling.n")), bool(periodic))
    elif kind == "infinite":
        if get("coupling.n") is None:
            raise ParameterError("coupling.kind = infinite requires coupling.n")
        coupling = InfiniteRange(int(get("coupling.n")))
    elif kind == "meanfield":
        coupling = MeanFieldZ(int(get("coupling.z", 2)))
    else:
        raise ParameterError(f"unknown coupling.kind {kind!r}")
    return ModelParams(
        j=float(get("j")),
        mu=float(get("mu")),
        omega=float(get("omega")),
        gamma=float(get("gamma", 1.0)),
        coupling=coupling,
    )


def config_from_params(params: ModelParams) -> dict:
    """Inverse of params_from_config, for manifests."""
    cfg = {
        "j": params.j,
        "mu": params.mu,
        "omega": params.omega,
        "gamma": params.gamma,
        "coupling.kind": params.coupling.kind,
    }
    c = params.coupling
    if isinstance(c, NearestNeighbor1D):
        cfg["coupling.n"] = c.n
        cfg["coupling.periodic"] = c.periodic
    elif isinstance(c, InfiniteRange):
        cfg["coupling.n"] = c.n
    elif isinstance(c, MeanFieldZ):
        cfg["coupling.z"] = c.z
    return cfg
