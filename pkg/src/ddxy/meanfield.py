"""Site-decoupled (Gutzwiller) mean-field dynamics of the driven lattice.

Every inter-site correlator is factorized, leaving one Bloch vector per
site driven by the neighbor-averaged transverse field:

    d sx_i = -F_y sz_i + mu sy_i - (g/2) sx_i
    d sy_i =  F_x sz_i - mu sx_i - 2 Omega sz_i - (g/2) sy_i
    d sz_i =  F_y sx_i - F_x sy_i + 2 Omega sy_i - g (sz_i + 1)

with F_a = (2J/z_i) sum_nbr s_a.  Supported layouts: uniform (one site),
two-sublattice (two sites, mutual neighbors), 1D chains, and all-to-all.

The uniform steady states reduce to a cubic in sz whose real roots give
one or three coexisting solutions (collective bistability); time evolution
uses fixed-step RK4.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numba import njit

from . import stability as _stability
from .model import (
    MeanFieldZ,
    ModelParams,
    NearestNeighbor1D,
    ParameterError,
    neighbor_table,
)

__all__ = [
    "PhaseLabel",
    "MFTimeSeries",
    "LimitCycleInfo",
    "CycleDetection",
    "UniformRoot",
    "PhaseResult",
    "ChainResult",
    "IntegrationError",
    "mf_rhs",
    "evolve_mf",
    "evolve_mf_batch",
    "uniform_steady_states",
    "detect_limit_cycle",
    "classify_phase",
    "inhomogeneous_chain_steady",
    "phase_diagram_sweep",
]

MAX_DT_GAMMA = 0.01          # hard cap on dt * gamma for the RK4 integrator
DEFAULT_DT = 1e-3            # default step (units of 1/gamma)
FIXED_POINT_TOL = 1e-8       # sup-norm of the rhs at a fixed point
CYCLE_AMPLITUDE_TOL = 1e-4   # minimum peak-to-peak sy excursion of a cycle
CYCLE_PERIOD_RTOL = 0.01     # allowed spread of successive periods
ATTRACTOR_CLUSTER_TOL = 1e-4  # sup-norm distance merging fixed points
SUBLATTICE_SPLIT_TOL = 1e-3   # sup-norm A/B difference calling a state AF


class IntegrationError(RuntimeError):
    """RK4 integration diverged; carries the last valid time."""

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class PhaseLabel(enum.Enum):
    U1 = "U1"
    U2 = "U2"
    U1_U2 = "U1_U2"
    AF = "AF"
    U1_AF = "U1_AF"
    LC = "LC"
    U1_LC = "U1_LC"
    F_AF = "F_AF"
    UNCLASSIFIED = "UNCLASSIFIED"


@dataclass(frozen=True)
class MFTimeSeries:
    times: np.ndarray   # (n_samples,), strictly increasing
    states: np.ndarray  # (n_samples, n_sites, 3)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states length mismatch")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")


@dataclass(frozen=True)
class LimitCycleInfo:
    period: float
    amplitude: float                 # peak-to-peak sy excursion
    sublattice_orbits: np.ndarray    # (n_sites, n_orbit_samples, 3)


@dataclass(frozen=True)
class CycleDetection:
    kind: str                        # "fixed_point" | "limit_cycle" | "unclassified"
    final_state: np.ndarray          # (n_sites, 3)
    cycle: Optional[LimitCycleInfo] = None

    @property
    def is_fixed_point(self) -> bool:
        return self.kind == "fixed_point"

    @property
    def is_limit_cycle(self) -> bool:
        return self.kind == "limit_cycle"


@dataclass(frozen=True)
class UniformRoot:
    bloch: np.ndarray       # (3,)
    photon_n: float         # (sz + 1) / 2
    stable_k0: bool


@dataclass(frozen=True)
class Attractor:
    kind: str               # "U" | "AF" | "LC"
    bloch_a: np.ndarray
    bloch_b: np.ndarray
    n_a: float
    n_b: float
    cycle: Optional[LimitCycleInfo] = None
    members: int = 1


@dataclass(frozen=True)
class PhaseResult:
    label: PhaseLabel
    attractors: tuple
    n_attractors: int
    stability_refined: bool = False


@dataclass(frozen=True)
class ChainResult:
    profile: np.ndarray          # (n, 3) final Bloch field
    domain_id: np.ndarray        # (n,) contiguous-run index per site
    domain_kind: list            # per-domain "af" | "uniform"
    domains: list                # (start, length, kind) tuples
    converged: bool
    kind: str                    # "fixed_point" | "limit_cycle" | "none"
    series: Optional[MFTimeSeries] = None


# ---------------------------------------------------------------------------
# RK4 kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _rhs_kernel(s, nbr_idx, nbr_ptr, cj, mu, om, g, out):
    nb, m = s.shape[0], s.shape[1]
    for b in range(nb):
        for i in range(m):
            fx = 0.0
            fy = 0.0
            for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                q = nbr_idx[p]
                fx += s[b, q, 0]
                fy += s[b, q, 1]
            fx *= cj[i]
            fy *= cj[i]
            sx = s[b, i, 0]
            sy = s[b, i, 1]
            sz = s[b, i, 2]
            out[b, i, 0] = -fy * sz + mu * sy - 0.5 * g * sx
            out[b, i, 1] = fx * sz - mu * sx - 2.0 * om * sz - 0.5 * g * sy
            out[b, i, 2] = fy * sx - fx * sy + 2.0 * om * sy - g * (sz + 1.0)


@njit(cache=True)
def _rk4_evolve_kernel(s, nbr_idx, nbr_ptr, cj, mu, om, g, dt, n_steps,
                       store_every, out_states):
    """March n_steps of RK4 in place, storing every store_every steps.

    out_states[0] receives the initial state.  Returns the number of
    snapshots written; fewer than out_states.shape[0] signals divergence.
    """
    nb, m = s.shape[0], s.shape[1]
    k1 = np.empty_like(s)
    k2 = np.empty_like(s)
    k3 = np.empty_like(s)
    k4 = np.empty_like(s)
    tmp = np.empty_like(s)
    for b in range(nb):
        for i in range(m):
            for c in range(3):
                out_states[0, b, i, c] = s[b, i, c]
    si = 1
    for step in range(1, n_steps + 1):
        _rhs_kernel(s, nbr_idx, nbr_ptr, cj, mu, om, g, k1)
        for b in range(nb):
            for i in range(m):
                for c in range(3):
                    tmp[b, i, c] = s[b, i, c] + 0.5 * dt * k1[b, i, c]
        _rhs_kernel(tmp, nbr_idx, nbr_ptr, cj, mu, om, g, k2)
        for b in range(nb):
            for i in range(m):
                for c in range(3):
                    tmp[b, i, c] = s[b, i, c] + 0.5 * dt * k2[b, i, c]
        _rhs_kernel(tmp, nbr_idx, nbr_ptr, cj, mu, om, g, k3)
        for b in range(nb):
            for i in range(m):
                for c in range(3):
                    tmp[b, i, c] = s[b, i, c] + dt * k3[b, i, c]
        _rhs_kernel(tmp, nbr_idx, nbr_ptr, cj, mu, om, g, k4)
        for b in range(nb):
            for i in range(m):
                for c in range(3):
                    s[b, i, c] += dt / 6.0 * (
                        k1[b, i, c] + 2.0 * k2[b, i, c] + 2.0 * k3[b, i, c] + k4[b, i, c]
                    )
        if step % store_every == 0 or step == n_steps:
            for b in range(nb):
                for i in range(m):
                    for c in range(3):
                        v = s[b, i, c]
                        if not np.isfinite(v) or abs(v) > 10.0:
                            return si
            for b in range(nb):
                for i in range(m):
                    for c in range(3):
                        out_states[si, b, i, c] = s[b, i, c]
            si += 1
    return si


def _coupling_arrays(params: ModelParams, n_sites: int):
    idx, ptr, coef = neighbor_table(params.coupling, n_sites)
    return (
        np.ascontiguousarray(idx, dtype=np.int64),
        np.ascontiguousarray(ptr, dtype=np.int64),
        np.ascontiguousarray(coef * params.j, dtype=np.float64),
    )


def mf_rhs(state, params: ModelParams) -> np.ndarray:
    """Mean-field time derivative of a (n_sites, 3) Bloch field."""
    s = np.asarray(state, dtype=float)
    squeeze = False
    if s.ndim == 1:
        s = s[None, :]
    if s.ndim != 2 or s.shape[1] != 3:
        raise ParameterError(f"state must have shape (n_sites, 3), got {np.shape(state)}")
    idx, ptr, cj = _coupling_arrays(params, s.shape[0])
    out = np.empty_like(s[None, :, :])
    _rhs_kernel(np.ascontiguousarray(s[None, :, :]), idx, ptr, cj,
                params.mu, params.omega, params.gamma, out)
    return out[0]


def _check_dt(params: ModelParams, dt: float):
    if dt <= 0 or dt * params.gamma > MAX_DT_GAMMA + 1e-15:
        raise ParameterError(
            f"need 0 < dt*gamma <= {MAX_DT_GAMMA}, got dt*gamma = {dt * params.gamma}"
        )


def evolve_mf_batch(initial, params: ModelParams, t_final: float,
                    dt: float = DEFAULT_DT, store_every: int = 10):
    """RK4-evolve a (batch, n_sites, 3) stack of initial conditions.

    Returns (times, states) with states of shape (n_stored, batch, n_sites, 3).
    Raises IntegrationError on divergence.
    """
    _check_dt(params, dt)
    if t_final <= 0:
        raise ParameterError(f"t_final must be positive, got {t_final}")
    s = np.array(initial, dtype=np.float64, copy=True)
    if s.ndim == 2:
        s = s[None, :, :]
    if s.ndim != 3 or s.shape[2] != 3:
        raise ParameterError(f"initial batch must have shape (batch, n_sites, 3)")
    s = np.ascontiguousarray(s)
    idx, ptr, cj = _coupling_arrays(params, s.shape[1])
    n_steps = max(1, int(round(t_final / dt)))
    store_every = max(1, int(store_every))
    stored_steps = list(range(store_every, n_steps + 1, store_every))
    if not stored_steps or stored_steps[-1] != n_steps:
        stored_steps.append(n_steps)
    n_stored = 1 + len(stored_steps)
    out = np.empty((n_stored, *s.shape))
    written = _rk4_evolve_kernel(s, idx, ptr, cj, params.mu, params.omega,
                                 params.gamma, dt, n_steps, store_every, out)
    times = np.concatenate([[0.0], np.array(stored_steps, dtype=float) * dt])
    if written < n_stored:
        raise IntegrationError(
            f"mean-field integration diverged after t = {times[written - 1]:.6g}",
            last_valid_time=float(times[written - 1]),
        )
    return times, out


def evolve_mf(initial, params: ModelParams, t_final: float,
              dt: float = DEFAULT_DT, store_every: int = 10) -> MFTimeSeries:
    """RK4-evolve a single Bloch field; see evolve_mf_batch."""
    init = np.asarray(initial, dtype=float)
    if init.ndim == 1:
        init = init[None, :]
    times, states = evolve_mf_batch(init[None, :, :], params, t_final, dt, store_every)
    return MFTimeSeries(times=times, states=states[:, 0, :, :])


# ---------------------------------------------------------------------------
# Uniform steady states
# ---------------------------------------------------------------------------

def _steady_cubic_coeffs(params: ModelParams) -> np.ndarray:
    """Coefficients [a3, a2, a1, a0] of the sz cubic for uniform steady states.

    Eliminating sx, sy from the fixed-point equations leaves
    2 (mu - 2 J sz)^2 (sz + 1) + 4 Omega^2 sz + (g^2/2)(sz + 1) = 0.
    """
    j, mu, om, g = params.j, params.mu, params.omega, params.gamma
    return np.array([
        8.0 * j * j,
        8.0 * j * j - 8.0 * mu * j,
        2.0 * mu * mu - 8.0 * mu * j + 4.0 * om * om + 0.5 * g * g,
        2.0 * mu * mu + 0.5 * g * g,
    ])


def _reconstruct_uniform(sz: float, params: ModelParams) -> np.ndarray:
    j, mu, om, g = params.j, params.mu, params.omega, params.gamma
    mt = mu - 2.0 * j * sz
    sy = -4.0 * g * om * sz / (g * g + 4.0 * mt * mt)
    sx = 2.0 * mt * sy / g
    return np.array([sx, sy, sz])


def _polish_real_root(coeffs: np.ndarray, x: float, iters: int = 4) -> float:
    deriv = np.polyder(coeffs)
    for _ in range(iters):
        slope = np.polyval(deriv, x)
        if slope == 0.0:
            break
        x -= np.polyval(coeffs, x) / slope
    return x


def _real_cubic_roots(coeffs: np.ndarray, imag_tol: float = 1e-9) -> list[float]:
    """Real roots via companion matrix, with fold disambiguation.

    Companion eigenvalues of a nearly double root carry spurious imaginary
    parts of order sqrt(machine epsilon), much larger than imag_tol.  When a
    conjugate-looking pair sits in that ambiguous band, the polished single
    real root is deflated out and the remaining quadratic decides the pair's
    realness exactly.
    """
    nz = np.flatnonzero(np.abs(coeffs) > 0.0)
    if len(nz) == 0:
        return []
    coeffs = np.asarray(coeffs, dtype=float)[nz[0]:]
    roots = np.roots(coeffs)
    clean = [float(r.real) for r in roots if abs(r.imag) < imag_tol]
    suspect = [r for r in roots if imag_tol <= abs(r.imag) < 1e-4]
    if len(coeffs) == 4 and len(clean) == 1 and len(suspect) == 2:
        x0 = _polish_real_root(coeffs, clean[0])
        a3, a2, a1, _ = coeffs
        # synthetic division by (s - x0)
        qa = a3
        qb = a2 + a3 * x0
        qc = a1 + qb * x0
        disc = qb * qb - 4.0 * qa * qc
        if disc >= 0.0:
            root = np.sqrt(disc)
            return [x0, (-qb - root) / (2 * qa), (-qb + root) / (2 * qa)]
        return [x0]
    return [_polish_real_root(coeffs, x) for x in clean]


def count_real_roots(params: ModelParams, imag_tol: float = 1e-9) -> int:
    """Number of real roots of the uniform steady-state cubic."""
    return len(_real_cubic_roots(_steady_cubic_coeffs(params), imag_tol))


def uniform_steady_states(params: ModelParams, imag_tol: float = 1e-9) -> list[UniformRoot]:
    """All uniform steady states, sorted dark to bright.

    Roots come from the companion matrix of the sz cubic; a root counts as
    real when |Im| < imag_tol, with near-fold pairs resolved by deflation.
    Each returned root satisfies the fixed-point equations to better than
    1e-9 and carries a k = 0 linear stability flag.
    """
    coeffs = _steady_cubic_coeffs(params)
    out = []
    for r in _real_cubic_roots(coeffs, imag_tol):
        sz = min(0.0, max(-1.0, float(r)))
        bloch = _reconstruct_uniform(sz, params)
        resid = np.abs(_stability.uniform_rhs(bloch, params)).max()
        if resid > 1e-9:
            raise RuntimeError(
                f"steady-state root failed residual check ({resid:.2e}); "
                "cubic solve is inconsistent"
            )
        mat = _stability._stability_matrices(bloch, params, np.array([0.0]))[0]
        stable = bool(np.linalg.eigvals(mat).real.max() < 0.0)
        out.append(UniformRoot(bloch=bloch, photon_n=0.5 * (sz + 1.0), stable_k0=stable))
    out.sort(key=lambda r: r.photon_n)
    return out


# ---------------------------------------------------------------------------
# Limit-cycle detection
# ---------------------------------------------------------------------------

def detect_limit_cycle(series: MFTimeSeries, transient: float,
                       params: ModelParams) -> CycleDetection:
    """Classify the tail of a trajectory as fixed point, limit cycle, or neither.

    After discarding t < transient: fixed point when the rhs at the final
    state is below 1e-8 in sup norm; otherwise a limit cycle when the
    peak-to-peak sy excursion exceeds 1e-4 and successive upward
    zero-crossing intervals of (sy - mean) agree to 1%.
    """
    mask = series.times >= transient
    if mask.sum() < 8:
        raise ParameterError("series too short past the transient")
    times = series.times[mask]
    states = series.states[mask]
    final = states[-1]
    if np.abs(mf_rhs(final, params)).max() < FIXED_POINT_TOL:
        return CycleDetection(kind="fixed_point", final_state=final)
    # strongest oscillating site in sy
    sy = states[:, :, 1]
    p2p = sy.max(axis=0) - sy.min(axis=0)
    site = int(np.argmax(p2p))
    amplitude = float(p2p[site])
    if amplitude <= CYCLE_AMPLITUDE_TOL:
        return CycleDetection(kind="unclassified", final_state=final)
    x = sy[:, site] - sy[:, site].mean()
    crossings = _upward_crossings(times, x)
    if len(crossings) < 3:
        return CycleDetection(kind="unclassified", final_state=final)
    intervals = np.diff(crossings)
    period = float(intervals.mean())
    if np.abs(intervals - period).max() > CYCLE_PERIOD_RTOL * period:
        return CycleDetection(kind="unclassified", final_state=final)
    orbit = _extract_orbit(times, states, period)
    info = LimitCycleInfo(period=period, amplitude=amplitude, sublattice_orbits=orbit)
    return CycleDetection(kind="limit_cycle", final_state=final, cycle=info)


def _upward_crossings(times: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Interpolated times where x crosses zero going up."""
    s = np.sign(x)
    s[s == 0] = 1
    up = np.flatnonzero((s[:-1] < 0) & (s[1:] > 0))
    if len(up) == 0:
        return np.array([])
    frac = -x[up] / (x[up + 1] - x[up])
    return times[up] + frac * (times[up + 1] - times[up])


def _extract_orbit(times, states, period) -> np.ndarray:
    span = times[-1] - times[0]
    n_keep = len(times) if span <= period else max(2, int(np.ceil(
        len(times) * period / span)))
    tail = states[-n_keep:]
    return np.transpose(tail, (1, 0, 2)).copy()


# ---------------------------------------------------------------------------
# Phase classification (two-sublattice battery)
# ---------------------------------------------------------------------------

def _random_ball(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniform samples in the unit ball, shape (*shape, 3)."""
    v = rng.normal(size=(*shape, 3))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    r = rng.random(shape) ** (1.0 / 3.0)
    return v * r[..., None]


def _canonical_pair(a: np.ndarray, b: np.ndarray):
    """Order a two-sublattice state deterministically under A<->B swap."""
    if tuple(b.ravel()) < tuple(a.ravel()):
        return b, a
    return a, b


def _photon(bloch: np.ndarray) -> float:
    return 0.5 * (float(bloch[2]) + 1.0)


def classify_phase(
    params: ModelParams,
    seed: int = 2024,
    n_random: int = 32,
    t_total: float = 2000.0,
    transient: float = 500.0,
    dt: float = DEFAULT_DT,
    refine_with_stability: bool = True,
) -> PhaseResult:
    """Two-sublattice attractor census at one parameter point.

    Protocol: evolve a battery of initial conditions (vacuum, inverted spin,
    n_random seeded random two-sublattice states) for t_total, cluster the
    attractors, and name the phase from the set found.  Frustrated AF is
    flagged from the linear stability of the dark uniform branch
    (incommensurate-only instability), not from the two-sublattice ansatz.
    """
    if t_total <= transient:
        raise ParameterError("t_total must exceed the transient")
    mf_params = replace(params, coupling=MeanFieldZ(z=2)) \
        if not isinstance(params.coupling, MeanFieldZ) else params
    rng = np.random.default_rng(seed)
    ics = np.empty((n_random + 2, 2, 3))
    ics[0] = [[0.0, 0.0, -1.0], [0.0, 0.0, -1.0]]
    ics[1] = [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]
    ics[2:] = _random_ball(rng, (n_random, 2))

    # settle onto attractors without storing, then sample a short window for
    # cycle detection
    window = min(200.0, t_total - transient)
    _, settled = evolve_mf_batch(ics, mf_params, t_total - window, dt,
                                 store_every=10 ** 9)
    times, tail = evolve_mf_batch(settled[-1], mf_params, window, dt, store_every=10)

    fixed_points: list[list] = []   # [canonical state, count]
    cycles: list[list] = []         # [info, mean state, count]
    for b in range(tail.shape[1]):
        member = MFTimeSeries(times=times, states=tail[:, b])
        det = detect_limit_cycle(member, transient=0.0, params=mf_params)
        if det.is_fixed_point:
            a, bb = _canonical_pair(det.final_state[0], det.final_state[1])
            state = np.stack([a, bb])
            for entry in fixed_points:
                if np.abs(entry[0] - state).max() <= ATTRACTOR_CLUSTER_TOL:
                    entry[1] += 1
                    break
            else:
                fixed_points.append([state, 1])
        elif det.is_limit_cycle:
            mean_state = tail[:, b].mean(axis=0)
            a, bb = _canonical_pair(mean_state[0], mean_state[1])
            mean_state = np.stack([a, bb])
            for entry in cycles:
                same_period = abs(entry[0].period - det.cycle.period) <= 0.01 * entry[0].period
                same_locus = np.abs(entry[1] - mean_state).max() <= 1e-2
                if same_period and same_locus:
                    entry[2] += 1
                    break
            else:
                cycles.append([det.cycle, mean_state, 1])
        else:
            return PhaseResult(label=PhaseLabel.UNCLASSIFIED, attractors=(),
                               n_attractors=0)

    attractors = []
    for state, count in fixed_points:
        split = np.abs(state[0] - state[1]).max()
        kind = "AF" if split > SUBLATTICE_SPLIT_TOL else "U"
        attractors.append(Attractor(
            kind=kind, bloch_a=state[0], bloch_b=state[1],
            n_a=_photon(state[0]), n_b=_photon(state[1]), members=count,
        ))
    for info, mean_state, count in cycles:
        attractors.append(Attractor(
            kind="LC", bloch_a=mean_state[0], bloch_b=mean_state[1],
            n_a=_photon(mean_state[0]), n_b=_photon(mean_state[1]),
            cycle=info, members=count,
        ))

    label = _label_from_attractors(attractors)
    refined = False
    if refine_with_stability and label in (
            PhaseLabel.U1, PhaseLabel.U1_U2, PhaseLabel.U1_AF, PhaseLabel.U1_LC):
        new_label = _refine_frustrated(label, attractors, params)
        refined = new_label is not label
        label = new_label
    return PhaseResult(label=label, attractors=tuple(attractors),
                       n_attractors=len(attractors), stability_refined=refined)


def _label_from_attractors(attractors) -> PhaseLabel:
    kinds = sorted(a.kind for a in attractors)
    if len(attractors) == 1:
        a = attractors[0]
        if a.kind == "U":
            n = 0.5 * (a.n_a + a.n_b)
            return PhaseLabel.U1 if n <= 0.5 else PhaseLabel.U2
        return PhaseLabel.AF if a.kind == "AF" else PhaseLabel.LC
    if len(attractors) == 2:
        if kinds == ["U", "U"]:
            return PhaseLabel.U1_U2
        if kinds == ["AF", "U"]:
            return PhaseLabel.U1_AF
        if kinds == ["LC", "U"]:
            return PhaseLabel.U1_LC
    return PhaseLabel.UNCLASSIFIED


def _refine_frustrated(label: PhaseLabel, attractors, params: ModelParams) -> PhaseLabel:
    """Demote labels whose dark uniform member is incommensurate-unstable."""
    uniforms = [a for a in attractors if a.kind == "U"]
    if not uniforms:
        return label
    dark = min(uniforms, key=lambda a: a.n_a + a.n_b)
    roots = uniform_steady_states(params)
    match = None
    for root in roots:
        mean_bloch = 0.5 * (dark.bloch_a + dark.bloch_b)
        if np.abs(root.bloch - mean_bloch).max() <= 1e-3:
            match = root
            break
    if match is None:
        return label
    report = _stability.scan_stability(match.bloch, params)
    if report.classification is not _stability.StabilityClass.INCOMMENSURATE:
        return label
    return {
        PhaseLabel.U1: PhaseLabel.F_AF,
        PhaseLabel.U1_U2: PhaseLabel.U2,
        PhaseLabel.U1_AF: PhaseLabel.F_AF,
        PhaseLabel.U1_LC: PhaseLabel.LC,
    }[label]


# ---------------------------------------------------------------------------
# Inhomogeneous 1D chains
# ---------------------------------------------------------------------------

def inhomogeneous_chain_steady(
    params: ModelParams,
    seed: int = 7,
    t_final: float = 2000.0,
    dt: float = DEFAULT_DT,
    initial: Optional[np.ndarray] = None,
    af_bond_tol: float = 1e-2,
) -> ChainResult:
    """Evolve a randomly seeded N-site chain and decompose the result into domains.

    Sites are AF-like when the sy difference to the next site exceeds
    af_bond_tol, uniform-like otherwise; contiguous runs form domains.  If
    the final state is neither stationary nor periodic, the sampled tail
    series is attached and converged = False.
    """
    if not isinstance(params.coupling, NearestNeighbor1D):
        raise ParameterError("inhomogeneous_chain_steady needs NearestNeighbor1D coupling")
    n = params.coupling.n
    if initial is None:
        rng = np.random.default_rng(seed)
        initial = _random_ball(rng, (n,))
    initial = np.asarray(initial, dtype=float)
    _, settled = evolve_mf_batch(initial[None], params, t_final, dt, store_every=10 ** 9)
    times, tail = evolve_mf_batch(settled[-1], params, 100.0, dt, store_every=10)
    series = MFTimeSeries(times=times, states=tail[:, 0])
    det = detect_limit_cycle(series, transient=0.0, params=params)
    profile = det.final_state
    domain_id, domain_kind, domains = _decompose_domains(
        profile, params.coupling.periodic, af_bond_tol)
    return ChainResult(
        profile=profile,
        domain_id=domain_id,
        domain_kind=domain_kind,
        domains=domains,
        converged=det.kind != "unclassified",
        kind=det.kind if det.kind != "unclassified" else "none",
        series=None if det.is_fixed_point else series,
    )


def _decompose_domains(profile: np.ndarray, periodic: bool, tol: float):
    n = profile.shape[0]
    sy = profile[:, 1]
    nxt = np.roll(sy, -1) if periodic else np.append(sy[1:], sy[-1])
    af_like = np.abs(sy - nxt) > tol
    if not periodic:
        af_like[-1] = af_like[-2] if n > 1 else False
    domain_id = np.zeros(n, dtype=int)
    domains = []
    start = 0
    for i in range(1, n):
        if af_like[i] != af_like[i - 1]:
            domains.append((start, i - start, "af" if af_like[start] else "uniform"))
            start = i
        domain_id[i] = len(domains)
    domains.append((start, n - start, "af" if af_like[start] else "uniform"))
    kinds = [d[2] for d in domains]
    return domain_id, kinds, domains


# ---------------------------------------------------------------------------
# Phase-diagram sweeps
# ---------------------------------------------------------------------------

def write_profile_csv(result: ChainResult, path) -> None:
    """Chain profile CSV: site, sx, sy, sz, domain_id, domain_kind."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["site", "sx", "sy", "sz", "domain_id", "domain_kind"])
        for i, (sx, sy, sz) in enumerate(result.profile):
            did = int(result.domain_id[i])
            w.writerow([i, repr(float(sx)), repr(float(sy)), repr(float(sz)),
                        did, result.domains[did][2]])


def sweep_point_seed(master_seed: int, index: int) -> int:
    """Deterministic per-grid-point seed derived from a master seed."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def phase_diagram_sweep(
    mu_values,
    omega_values,
    params: ModelParams,
    master_seed: int = 2024,
    classify_kwargs: Optional[dict] = None,
):
    """Classify every (mu, omega) grid point; yields one row dict per point.

    Rows appear in row-major order (mu outer, omega inner) and carry the
    sweep CSV schema: mu_over_gamma, omega_over_gamma, phase_label, n_A,
    n_B, lc_period, lc_amplitude, n_attractors.  Per-point failures yield
    UNCLASSIFIED rows; the sweep continues.
    """
    kwargs = dict(classify_kwargs or {})
    index = 0
    for mu in mu_values:
        for om in omega_values:
            point = replace(params, mu=float(mu) * params.gamma,
                            omega=float(om) * params.gamma)
            seed = sweep_point_seed(master_seed, index)
            try:
                result = classify_phase(point, seed=seed, **kwargs)
                row = _sweep_row(mu, om, result)
            except (IntegrationError, ParameterError, RuntimeError):
                row = _sweep_row(mu, om, None)
            yield row
            index += 1


def _sweep_row(mu, om, result: Optional[PhaseResult]) -> dict:
    row = {
        "mu_over_gamma": float(mu),
        "omega_over_gamma": float(om),
        "phase_label": PhaseLabel.UNCLASSIFIED.value,
        "n_A": math.nan,
        "n_B": math.nan,
        "lc_period": math.nan,
        "lc_amplitude": math.nan,
        "n_attractors": 0,
    }
    if result is None:
        return row
    row["phase_label"] = result.label.value
    row["n_attractors"] = result.n_attractors
    if result.attractors:
        # report the attractor that names the phase: the non-dark member of
        # a bistable pair, otherwise the single attractor
        pick = max(result.attractors, key=lambda a: (a.kind != "U", a.n_a + a.n_b))
        row["n_A"] = pick.n_a
        row["n_B"] = pick.n_b
        if pick.cycle is not None:
            row["lc_period"] = pick.cycle.period
            row["lc_amplitude"] = pick.cycle.amplitude
    return row
