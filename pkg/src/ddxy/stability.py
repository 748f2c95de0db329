"""Linear stability of spatially uniform mean-field steady states.

A uniform state is perturbed by a plane wave of wave number k; linearizing
the mean-field equations for a 1D chain (coordination number 2) gives a
3x3 real matrix acting on the perturbation (dx, dy, dz):

    [ -g/2              mu - 2J z0 cos k          -2J y0            ]
    [ 2J z0 cos k - mu  -g/2                       2J x0 - 2 Omega  ]
    [ 2J y0 (1-cos k)   -2J x0 (1-cos k) + 2 Omega  -g              ]

with (x0, y0, z0) the steady state and g the loss rate.  An eigenvalue with
positive real part at some k flags an instability; the location of the most
unstable k separates global (k = 0), antiferromagnetic (k = pi), and
incommensurate (interior k) instabilities.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, ParameterError

__all__ = [
    "StabilityClass",
    "StabilityReport",
    "NotSteadyError",
    "uniform_rhs",
    "stability_matrix",
    "scan_stability",
]

#: residual tolerance for accepting sigma0 as a steady state
_STEADY_TOL = 1e-8
#: tie tolerance pushing an argmax near k = pi to the AF classification
_PI_TIE_TOL = 1e-12


class NotSteadyError(ValueError):
    """The supplied Bloch vector does not solve the uniform steady state."""


class StabilityClass(enum.Enum):
    STABLE = "STABLE"
    GLOBAL_K0 = "GLOBAL_K0"
    INCOMMENSURATE = "INCOMMENSURATE"
    AF_PI = "AF_PI"


@dataclass(frozen=True)
class StabilityReport:
    k_grid: np.ndarray          # wave numbers in [0, pi]
    eigenvalues: np.ndarray     # (n_k, 3) complex, unordered
    max_re_omega: np.ndarray    # (n_k,) max real part per k
    k_star: float               # argmax wave number
    classification: StabilityClass

    @property
    def max_growth_rate(self) -> float:
        return float(self.max_re_omega.max())


def uniform_rhs(sigma, params: ModelParams) -> np.ndarray:
    """Time derivative of a spatially uniform Bloch vector (x, y, z)."""
    x, y, z = float(sigma[0]), float(sigma[1]), float(sigma[2])
    j, mu, om, g = params.j, params.mu, params.omega, params.gamma
    return np.array([
        -2.0 * j * z * y + mu * y - 0.5 * g * x,
        2.0 * j * z * x - mu * x - 2.0 * om * z - 0.5 * g * y,
        2.0 * om * y - g * (z + 1.0),
    ])


def stability_matrix(sigma0, params: ModelParams, k: float) -> np.ndarray:
    """3x3 linear-response matrix at wave number k about a uniform steady state.

    Raises NotSteadyError unless sigma0 solves the uniform fixed-point
    equations to within 1e-8.
    """
    resid = np.abs(uniform_rhs(sigma0, params)).max()
    if resid > _STEADY_TOL:
        raise NotSteadyError(
            f"sigma0 is not a uniform steady state (residual {resid:.2e} > {_STEADY_TOL})"
        )
    return _stability_matrices(sigma0, params, np.atleast_1d(np.asarray(k, float)))[0]


def _stability_matrices(sigma0, params: ModelParams, ks: np.ndarray) -> np.ndarray:
    """(n_k, 3, 3) stack of response matrices, no steadiness check."""
    x0, y0, z0 = float(sigma0[0]), float(sigma0[1]), float(sigma0[2])
    j, mu, om, g = params.j, params.mu, params.omega, params.gamma
    ck = np.cos(ks)
    n = ks.size
    m = np.empty((n, 3, 3))
    m[:, 0, 0] = -0.5 * g
    m[:, 0, 1] = mu - 2.0 * j * z0 * ck
    m[:, 0, 2] = -2.0 * j * y0
    m[:, 1, 0] = 2.0 * j * z0 * ck - mu
    m[:, 1, 1] = -0.5 * g
    m[:, 1, 2] = 2.0 * j * x0 - 2.0 * om
    m[:, 2, 0] = 2.0 * j * y0 * (1.0 - ck)
    m[:, 2, 1] = -2.0 * j * x0 * (1.0 - ck) + 2.0 * om
    m[:, 2, 2] = -g
    return m


def scan_stability(
    sigma0,
    params: ModelParams,
    n_k: int = 1024,
    quantized_sites: int | None = None,
) -> StabilityReport:
    """Eigenvalue scan over wave numbers in [0, pi].

    n_k is the grid size (>= 256 so narrow unstable bands are resolved).
    With quantized_sites, the grid is instead the ring-allowed set
    k = 2 pi m / N restricted to [0, pi].
    """
    if quantized_sites is None:
        if n_k < 256:
            raise ParameterError(f"n_k must be >= 256, got {n_k}")
        ks = np.linspace(0.0, np.pi, n_k)
    else:
        n = int(quantized_sites)
        if n < 2:
            raise ParameterError("quantized_sites must be >= 2")
        ks = np.array(sorted({(2.0 * np.pi * m / n) % (2.0 * np.pi) for m in range(n)}))
        ks = ks[ks <= np.pi + 1e-12]
    resid = np.abs(uniform_rhs(sigma0, params)).max()
    if resid > _STEADY_TOL:
        raise NotSteadyError(
            f"sigma0 is not a uniform steady state (residual {resid:.2e} > {_STEADY_TOL})"
        )
    mats = _stability_matrices(sigma0, params, ks)
    evals = np.linalg.eigvals(mats)
    max_re = evals.real.max(axis=1)
    i_star = int(np.argmax(max_re))
    top = max_re[i_star]
    if top < 0.0:
        cls = StabilityClass.STABLE
    elif max_re[0] > 0.0:
        cls = StabilityClass.GLOBAL_K0
    else:
        spacing = ks[-1] - ks[-2] if len(ks) > 1 else np.pi
        # argmax within one bin of pi, or a value tie with pi, counts as AF
        if ks[-1] - ks[i_star] <= spacing + 1e-15 or max_re[-1] >= top - _PI_TIE_TOL:
            i_star = len(ks) - 1
            cls = StabilityClass.AF_PI
        else:
            cls = StabilityClass.INCOMMENSURATE
    return StabilityReport(
        k_grid=ks,
        eigenvalues=evals,
        max_re_omega=max_re,
        k_star=float(ks[i_star]),
        classification=cls,
    )
