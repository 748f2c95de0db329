"""Quantum-jump Monte Carlo unraveling of the master equation.

Pure states evolve under the non-Hermitian H_eff = H - i(gamma/2) sum_i n_i
by fixed-step RK4; the norm loss of each step sets the jump probability dp.
With probability 1 - dp the normalized no-jump state is kept; otherwise a
photon is emitted from site i, chosen with probability proportional to
gamma dt <n_i> evaluated in the pre-step state, and the lowered state is
renormalized.  Steps auto-halve until dp < 0.1.

Randomness comes from counter-based Philox streams keyed by
(master_seed, trajectory_index): ensembles are embarrassingly parallel and
every record is bit-reproducible in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit
from numba import prange as numba_prange

from . import exact
from .model import ModelParams, ParameterError, site_count

__all__ = [
    "TrajectoryError",
    "InsufficientSwitchingError",
    "TrajectoryRecord",
    "EnsembleStats",
    "SwitchingTimes",
    "step_trajectory",
    "run_trajectory",
    "run_ensemble",
    "ensemble_stats",
    "extract_switching_times",
    "pooled_switching_times",
]

DEFAULT_DT = 1e-3
DP_LIMIT = 0.1      # per-step jump probability cap; steps halve above it
MAX_HALVINGS = 20
MAX_SITES = 14
_CHUNK = 4096       # uniform draws buffered per trajectory stream


class TrajectoryError(RuntimeError):
    """Jump-probability control failed; carries diagnostics."""


class InsufficientSwitchingError(RuntimeError):
    """Too few switching events; carries the observed count."""

    def __init__(self, message: str, n_switches: int):
        super().__init__(message)
        self.n_switches = n_switches


@dataclass(frozen=True)
class TrajectoryRecord:
    seed: tuple               # (master_seed, stream_index)
    times: np.ndarray         # (n_samples,)
    n_total: np.ndarray       # (n_samples,) <N>
    n_total_sq: np.ndarray    # (n_samples,) <N^2>
    n_sites: np.ndarray       # (n_samples, N) <n_i>
    sy_sites: np.ndarray      # (n_samples, N) <sy_i>
    sy_pairs: np.ndarray      # (n_samples, N//2 + 1) <sy_j sy_{j+i}>, j-averaged
    jumps: list               # [(time, site), ...]


@dataclass(frozen=True)
class EnsembleStats:
    separations: np.ndarray      # 0 .. N//2
    sigma_y_corr: np.ndarray     # connected <sy sy> per separation
    sigma_y_stderr: np.ndarray
    n_mean: float                # steady <N>
    n_stderr: float
    dn2_over_n: float            # (<N^2> - <N>^2) / <N>
    dn2_over_n_stderr: float
    n_records: int
    burn_in: float
    block_length: float


@dataclass(frozen=True)
class SwitchingTimes:
    tau1: float                  # mean dwell, dark state
    tau2: float                  # mean dwell, bright state
    tau1_stderr: float
    tau2_stderr: float
    n_dwell1: int
    n_dwell2: int
    n_switches: int

    @property
    def gamma_toy(self) -> float:
        return 1.0 / self.tau1 + 1.0 / self.tau2

    @property
    def gamma_toy_stderr(self) -> float:
        return float(np.hypot(self.tau1_stderr / self.tau1 ** 2,
                              self.tau2_stderr / self.tau2 ** 2))


# ---------------------------------------------------------------------------
# RK4 kernel on (dim, batch) state blocks
# ---------------------------------------------------------------------------

@njit(cache=True)
def _matvec(indptr, indices, data, v, out):
    dim, nb = v.shape
    for i in range(dim):
        for b in range(nb):
            out[i, b] = 0.0 + 0.0j
        for p in range(indptr[i], indptr[i + 1]):
            c = indices[p]
            d = data[p]
            for b in range(nb):
                out[i, b] += d * v[c, b]


@njit(cache=True, parallel=True)
def _matvec_par(indptr, indices, data, v, out):
    dim, nb = v.shape
    for i in numba_prange(dim):
        for b in range(nb):
            out[i, b] = 0.0 + 0.0j
        for p in range(indptr[i], indptr[i + 1]):
            c = indices[p]
            d = data[p]
            for b in range(nb):
                out[i, b] += d * v[c, b]


@njit(cache=True)
def _rk4_step(indptr, indices, data, psi, out, k1, k2, k3, k4, tmp, dt, norms2):
    """One RK4 step of dpsi/dt = A psi (A = -i H_eff, CSR); fills norms2."""
    dim, nb = psi.shape
    _matvec(indptr, indices, data, psi, k1)
    for i in range(dim):
        for b in range(nb):
            tmp[i, b] = psi[i, b] + 0.5 * dt * k1[i, b]
    _matvec(indptr, indices, data, tmp, k2)
    for i in range(dim):
        for b in range(nb):
            tmp[i, b] = psi[i, b] + 0.5 * dt * k2[i, b]
    _matvec(indptr, indices, data, tmp, k3)
    for i in range(dim):
        for b in range(nb):
            tmp[i, b] = psi[i, b] + dt * k3[i, b]
    _matvec(indptr, indices, data, tmp, k4)
    for b in range(nb):
        norms2[b] = 0.0
    c = dt / 6.0
    for i in range(dim):
        for b in range(nb):
            v = psi[i, b] + c * (k1[i, b] + 2.0 * k2[i, b] + 2.0 * k3[i, b] + k4[i, b])
            out[i, b] = v
            norms2[b] += v.real * v.real + v.imag * v.imag


@njit(cache=True, parallel=True)
def _rk4_step_par(indptr, indices, data, psi, out, k1, k2, k3, k4, tmp, dt, norms2):
    """Row-parallel variant of _rk4_step for large Hilbert dimensions."""
    dim, nb = psi.shape
    _matvec_par(indptr, indices, data, psi, k1)
    for i in numba_prange(dim):
        for b in range(nb):
            tmp[i, b] = psi[i, b] + 0.5 * dt * k1[i, b]
    _matvec_par(indptr, indices, data, tmp, k2)
    for i in numba_prange(dim):
        for b in range(nb):
            tmp[i, b] = psi[i, b] + 0.5 * dt * k2[i, b]
    _matvec_par(indptr, indices, data, tmp, k3)
    for i in numba_prange(dim):
        for b in range(nb):
            tmp[i, b] = psi[i, b] + dt * k3[i, b]
    _matvec_par(indptr, indices, data, tmp, k4)
    for b in range(nb):
        norms2[b] = 0.0
    c = dt / 6.0
    for i in range(dim):
        for b in range(nb):
            v = psi[i, b] + c * (k1[i, b] + 2.0 * k2[i, b] + 2.0 * k3[i, b] + k4[i, b])
            out[i, b] = v
            norms2[b] += v.real * v.real + v.imag * v.imag


class _StreamBank:
    """Per-trajectory uniform streams with vectorized chunked consumption.

    Each trajectory owns a Philox generator keyed by (master_seed, index);
    draws are buffered per stream so the consumption order seen by any one
    trajectory is independent of batching.
    """

    def __init__(self, gens: list):
        self.gens = gens
        nb = len(gens)
        self.buf = np.empty((nb, _CHUNK))
        self.pos = np.full(nb, _CHUNK, dtype=np.int64)

    @classmethod
    def keyed(cls, master_seed: int, indices: Sequence[int]) -> "_StreamBank":
        return cls([
            np.random.Generator(np.random.Philox(key=[int(master_seed), int(k)]))
            for k in indices
        ])

    def _refill(self):
        for b in np.flatnonzero(self.pos >= _CHUNK):
            self.buf[b] = self.gens[b].random(_CHUNK)
            self.pos[b] = 0

    def draw(self, mask: np.ndarray) -> np.ndarray:
        """One uniform per masked trajectory; others untouched."""
        self._refill()
        out = np.full(mask.shape, np.nan)
        sel = np.flatnonzero(mask)
        out[sel] = self.buf[sel, self.pos[sel]]
        self.pos[sel] += 1
        return out

    def draw_one(self, b: int) -> float:
        if self.pos[b] >= _CHUNK:
            self.buf[b] = self.gens[b].random(_CHUNK)
            self.pos[b] = 0
        v = self.buf[b, self.pos[b]]
        self.pos[b] += 1
        return float(v)


class _JumpEngine:
    """Shared tables and buffers for propagating a batch of trajectories."""

    def __init__(self, params: ModelParams, nb: int):
        n = site_count(params.coupling)
        if n > MAX_SITES:
            raise ParameterError(f"trajectories limited to N <= {MAX_SITES}")
        self.params = params
        self.n = n
        self.dim = 1 << n
        a = (-1j * exact.effective_hamiltonian_sparse(params)).tocsr()
        a.sort_indices()
        self.indptr = a.indptr.astype(np.int64)
        self.indices = a.indices.astype(np.int64)
        self.data = np.ascontiguousarray(a.data)
        states = np.arange(self.dim)
        self.lower_src = [np.flatnonzero((states >> i) & 1) for i in range(n)]
        self.lower_dst = [src ^ (1 << i) for i, src in enumerate(self.lower_src)]
        self.occ_masks = np.stack([((states >> i) & 1).astype(float) for i in range(n)])
        self.popcount = self.occ_masks.sum(axis=0)
        shape = (self.dim, nb)
        self.k1, self.k2, self.k3, self.k4, self.tmp, self.cand = (
            np.empty(shape, dtype=complex) for _ in range(6))
        self.norms2 = np.empty(nb)

    def occupations(self, psi_col: np.ndarray) -> np.ndarray:
        """Per-site <n_i> of one normalized state column."""
        prob = np.abs(psi_col) ** 2
        return self.occ_masks @ prob

    def lower(self, psi_col: np.ndarray, site: int) -> np.ndarray:
        out = np.zeros_like(psi_col)
        out[self.lower_dst[site]] = psi_col[self.lower_src[site]]
        nrm = np.linalg.norm(out)
        if nrm == 0.0:
            raise TrajectoryError(f"jump applied to site {site} with zero occupation")
        return out / nrm

    def rk4(self, psi: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
        """Candidate no-jump step for all columns; returns (cand, norms2)."""
        nb = psi.shape[1]
        step = _rk4_step_par if self.dim >= 1024 else _rk4_step
        step(self.indptr, self.indices, self.data, psi,
             self.cand[:, :nb], self.k1[:, :nb], self.k2[:, :nb],
             self.k3[:, :nb], self.k4[:, :nb], self.tmp[:, :nb],
             dt, self.norms2[:nb])
        return self.cand[:, :nb], self.norms2[:nb]

    def advance_column(self, psi_col: np.ndarray, dt: float, stream: _StreamBank,
                       b: int, t_now: float, jumps: list, depth: int = 0) -> np.ndarray:
        """Scalar step with recursive halving; consumes stream b in order."""
        if depth > MAX_HALVINGS:
            raise TrajectoryError(
                f"dp control failed after {MAX_HALVINGS} halvings "
                f"(t = {t_now}, dt = {dt})")
        col = psi_col[:, None]
        cand, norms2 = self.rk4(col, dt)
        dp = 1.0 - norms2[0]
        if dp >= DP_LIMIT:
            half = self.advance_column(psi_col, 0.5 * dt, stream, b, t_now,
                                       jumps, depth + 1)
            return self.advance_column(half, 0.5 * dt, stream, b, t_now + 0.5 * dt,
                                       jumps, depth + 1)
        u = stream.draw_one(b)
        if u < dp:
            weights = self.params.gamma * dt * self.occupations(psi_col)
            total = weights.sum()
            if total <= 0.0:
                raise TrajectoryError("jump selected with zero total weight")
            site = int(np.searchsorted(np.cumsum(weights / total),
                                       stream.draw_one(b)))
            site = min(site, self.n - 1)
            jumps.append((t_now + dt, site))
            return self.lower(psi_col, site)
        return np.ascontiguousarray(cand[:, 0] / np.sqrt(norms2[0]))


def step_trajectory(psi: np.ndarray, params: ModelParams, dt: float,
                    rng: np.random.Generator) -> np.ndarray:
    """One stochastic step from a normalized state; returns the next state.

    The supplied generator is consumed in a fixed order (jump decision, then
    site selection when a jump fires), so stepping is deterministic given
    (psi, params, dt, generator state).
    """
    psi = np.asarray(psi, dtype=complex)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-9:
        raise ParameterError(f"state must be normalized, |psi| = {nrm}")
    engine = _JumpEngine(params, 1)
    stream = _StreamBank([rng])
    return engine.advance_column(np.ascontiguousarray(psi), dt, stream, 0, 0.0, [])


def _resolve_seed(seed) -> tuple[int, int]:
    if isinstance(seed, (tuple, list)):
        master, idx = int(seed[0]), int(seed[1])
    else:
        master, idx = int(seed), 0
    return master, idx


def run_trajectory(params: ModelParams, seed, t_final: float,
                   sample_dt: float = 0.5, dt: float = DEFAULT_DT) -> TrajectoryRecord:
    """Single quantum trajectory from the vacuum; deterministic given seed.

    seed may be an integer master seed (stream 0) or a (master, stream)
    pair, reproducing one member of an ensemble bit-exactly.
    """
    master, idx = _resolve_seed(seed)
    return _run_batch(params, master, [idx], t_final, sample_dt, dt)[0]


def run_ensemble(params: ModelParams, master_seed: int, n_traj: int,
                 t_final: float, sample_dt: float = 0.5, dt: float = DEFAULT_DT,
                 max_batch: int = 512) -> list[TrajectoryRecord]:
    """Ensemble of independent trajectories with per-stream substreams."""
    records = []
    for start in range(0, n_traj, max_batch):
        idxs = list(range(start, min(start + max_batch, n_traj)))
        records.extend(_run_batch(params, master_seed, idxs, t_final, sample_dt, dt))
    return records


def _run_batch(params: ModelParams, master_seed: int, stream_ids: Sequence[int],
               t_final: float, sample_dt: float, dt: float) -> list[TrajectoryRecord]:
    if dt <= 0 or t_final <= 0:
        raise ParameterError("dt and t_final must be positive")
    steps_per_sample = max(1, int(round(sample_dt / dt)))
    sample_dt = steps_per_sample * dt
    n_samples = int(round(t_final / sample_dt))
    n_steps = n_samples * steps_per_sample

    nb = len(stream_ids)
    engine = _JumpEngine(params, nb)
    stream = _StreamBank.keyed(master_seed, stream_ids)
    n, dim = engine.n, engine.dim

    psi = np.zeros((dim, nb), dtype=complex)
    psi[0, :] = 1.0
    jumps: list[list] = [[] for _ in range(nb)]
    n_sep = n // 2 + 1

    times = np.arange(n_samples + 1) * sample_dt
    obs_n = np.empty((n_samples + 1, nb))
    obs_n2 = np.empty((n_samples + 1, nb))
    obs_sites = np.empty((n_samples + 1, nb, n))
    obs_sy = np.empty((n_samples + 1, nb, n))
    obs_pairs = np.empty((n_samples + 1, nb, n_sep))

    def sample(si):
        pt = np.ascontiguousarray(psi.T)
        obs_sites[si] = exact.state_site_occupations(pt)
        prob = np.abs(pt) ** 2
        # row-wise sums keep results independent of the batch width
        obs_n[si] = (prob * engine.popcount).sum(axis=-1)
        obs_n2[si] = (prob * engine.popcount ** 2).sum(axis=-1)
        obs_sy[si] = exact.state_sy_expectations(pt)
        for sep in range(n_sep):
            acc = np.zeros(nb)
            for j in range(n):
                acc += exact.state_sy_pair(pt, j, (j + sep) % n)
            obs_pairs[si, :, sep] = acc / n

    sample(0)
    si = 1
    inv = np.empty(nb)
    for step in range(1, n_steps + 1):
        t_pre = (step - 1) * dt
        pre = psi
        cand, norms2 = engine.rk4(psi, dt)
        dp = 1.0 - norms2
        needs_halving = dp >= DP_LIMIT
        normal = ~needs_halving
        u = stream.draw(normal)
        jump_mask = normal & (u < dp)
        special = np.flatnonzero(jump_mask | needs_halving)
        saved = {int(b): pre[:, b].copy() for b in special}
        # ping-pong buffers: the candidate becomes the state, the old state
        # becomes the engine's scratch; jump and halving columns are patched
        # from their saved pre-step copies afterwards
        engine.cand = pre
        psi = cand
        np.sqrt(norms2, out=inv)
        np.reciprocal(inv, out=inv)
        psi *= inv[None, :]
        for b in np.flatnonzero(jump_mask):
            col = saved[int(b)]
            weights = params.gamma * dt * engine.occupations(col)
            total = weights.sum()
            if total <= 0.0:
                raise TrajectoryError("jump selected with zero total weight")
            site = int(np.searchsorted(np.cumsum(weights / total),
                                       stream.draw_one(b)))
            site = min(site, n - 1)
            jumps[b].append((step * dt, site))
            psi[:, b] = engine.lower(col, site)
        for b in np.flatnonzero(needs_halving):
            psi[:, b] = engine.advance_column(saved[int(b)], dt, stream, b,
                                              t_pre, jumps[b])
        if step % steps_per_sample == 0:
            sample(si)
            si += 1

    records = []
    for k, sid in enumerate(stream_ids):
        records.append(TrajectoryRecord(
            seed=(int(master_seed), int(sid)),
            times=times.copy(),
            n_total=obs_n[:, k].copy(),
            n_total_sq=obs_n2[:, k].copy(),
            n_sites=obs_sites[:, k].copy(),
            sy_sites=obs_sy[:, k].copy(),
            sy_pairs=obs_pairs[:, k].copy(),
            jumps=list(jumps[k]),
        ))
    return records


# ---------------------------------------------------------------------------
# Ensemble statistics
# ---------------------------------------------------------------------------

def ensemble_stats(records: Sequence[TrajectoryRecord], burn_in: float = 50.0,
                   block_length: float = 10.0) -> EnsembleStats:
    """Connected sy correlators, <N>, and dN^2/N with block standard errors.

    Point estimates pool all post-burn-in samples over time, sites, and
    records; standard errors come from block averages (block_length >= 10)
    linearized about the pooled means, so slow inter-branch switching is
    counted rather than averaged away.
    """
    if len(records) < 2:
        raise ParameterError("ensemble_stats needs at least 2 records")
    if burn_in < 50.0:
        raise ParameterError("burn_in must be at least 50 (units of 1/gamma)")
    if block_length < 10.0:
        raise ParameterError("block_length must be at least 10 (units of 1/gamma)")
    n = records[0].n_sites.shape[1]
    n_sep = n // 2 + 1

    mean_blocks, pair_blocks, n1_blocks, n2_blocks = [], [], [], []
    for rec in records:
        mask = rec.times >= burn_in
        if mask.sum() < 2:
            raise ParameterError("no samples past burn_in")
        tt = rec.times[mask]
        m_site = rec.sy_sites[mask].mean(axis=1)     # site-averaged <sy>
        pairs = rec.sy_pairs[mask]
        n1 = rec.n_total[mask]
        n2 = rec.n_total_sq[mask]
        edges = np.arange(tt[0], tt[-1] + 1e-9, block_length)
        if len(edges) < 2:
            raise ParameterError("record shorter than one block past burn_in")
        which = np.clip(np.searchsorted(edges, tt, side="right") - 1,
                        0, len(edges) - 2)
        for blk in range(len(edges) - 1):
            sel = which == blk
            if sel.sum() < 2:
                continue
            mean_blocks.append(m_site[sel].mean())
            pair_blocks.append(pairs[sel].mean(axis=0))
            n1_blocks.append(n1[sel].mean())
            n2_blocks.append(n2[sel].mean())
    nb = len(mean_blocks)
    if nb < 2:
        raise ParameterError("need at least 2 full blocks past burn_in")
    mean_blocks = np.array(mean_blocks)
    pair_blocks = np.array(pair_blocks)
    n1_blocks = np.array(n1_blocks)
    n2_blocks = np.array(n2_blocks)

    m = mean_blocks.mean()
    pair_mean = pair_blocks.mean(axis=0)
    corr = pair_mean - m * m
    # delta-method block estimates: linear in block means around the pooled
    # values, so their spread is an honest standard error of the estimator
    lin = pair_blocks - 2.0 * m * mean_blocks[:, None]
    corr_se = lin.std(axis=0, ddof=1) / np.sqrt(nb)

    n_mean = n1_blocks.mean()
    n_se = n1_blocks.std(ddof=1) / np.sqrt(nb)
    dn2 = n2_blocks.mean() - n_mean ** 2
    lin_dn2 = n2_blocks - 2.0 * n_mean * n1_blocks
    dn2_se = lin_dn2.std(ddof=1) / np.sqrt(nb)

    return EnsembleStats(
        separations=np.arange(n_sep),
        sigma_y_corr=corr,
        sigma_y_stderr=corr_se,
        n_mean=float(n_mean),
        n_stderr=float(n_se),
        dn2_over_n=float(dn2 / n_mean) if n_mean > 0 else float("nan"),
        dn2_over_n_stderr=float(dn2_se / n_mean) if n_mean > 0 else float("nan"),
        n_records=len(records),
        burn_in=burn_in,
        block_length=block_length,
    )


# ---------------------------------------------------------------------------
# Switching-time extraction
# ---------------------------------------------------------------------------

def _dwell_times(times: np.ndarray, n_of_t: np.ndarray, n_lo: float, n_hi: float,
                 smooth_window: float):
    """Hysteresis dwell segmentation of a photon-number trace.

    Thresholds sit at 25% and 75% of the branch separation; the state flips
    only when the smoothed signal crosses the far threshold.  Returns
    (dark_dwells, bright_dwells, n_switches); first and last segments are
    censored and dropped.
    """
    if n_hi <= n_lo:
        raise ParameterError("need n_hi > n_lo")
    dt = times[1] - times[0]
    w = max(1, int(round(smooth_window / dt)))
    kernel = np.ones(w) / w
    x = np.convolve(n_of_t, kernel, mode="same")
    delta = n_hi - n_lo
    lo_th = n_lo + 0.25 * delta
    hi_th = n_lo + 0.75 * delta
    state = 0 if x[0] < n_lo + 0.5 * delta else 1
    switch_times = []
    states = []
    for t, v in zip(times, x):
        if state == 0 and v > hi_th:
            state = 1
            switch_times.append(t)
            states.append(1)
        elif state == 1 and v < lo_th:
            state = 0
            switch_times.append(t)
            states.append(0)
    dark, bright = [], []
    for k in range(len(switch_times) - 1):
        dur = switch_times[k + 1] - switch_times[k]
        # states[k] is the state entered at switch k
        (bright if states[k] == 1 else dark).append(dur)
    return dark, bright, len(switch_times)


def _mean_se(xs: list) -> tuple[float, float]:
    arr = np.asarray(xs, dtype=float)
    se = arr.std(ddof=1) / np.sqrt(len(arr)) if len(arr) > 1 else arr.mean() / np.sqrt(len(arr))
    return float(arr.mean()), float(se)


def extract_switching_times(record: TrajectoryRecord, n_lo: float, n_hi: float,
                            smooth_window: float = 5.0,
                            min_switches: int = 10) -> SwitchingTimes:
    """Dwell-time statistics of collective switching in one trajectory.

    n_lo / n_hi are the mean-field branch photon numbers (totals) that
    anchor the hysteresis thresholds.  Raises InsufficientSwitchingError
    when fewer than min_switches transitions are found.
    """
    dark, bright, n_sw = _dwell_times(record.times, record.n_total, n_lo, n_hi,
                                      smooth_window)
    if n_sw < min_switches or not dark or not bright:
        raise InsufficientSwitchingError(
            f"found {n_sw} switches (need >= {min_switches})", n_switches=n_sw)
    tau1, se1 = _mean_se(dark)
    tau2, se2 = _mean_se(bright)
    return SwitchingTimes(tau1=tau1, tau2=tau2, tau1_stderr=se1, tau2_stderr=se2,
                          n_dwell1=len(dark), n_dwell2=len(bright), n_switches=n_sw)


def pooled_switching_times(records: Sequence[TrajectoryRecord], n_lo: float,
                           n_hi: float, smooth_window: float = 5.0,
                           min_switches: int = 10) -> SwitchingTimes:
    """Switching statistics with dwell times pooled across records."""
    dark, bright, n_sw = [], [], 0
    for rec in records:
        d, b, s = _dwell_times(rec.times, rec.n_total, n_lo, n_hi, smooth_window)
        dark.extend(d)
        bright.extend(b)
        n_sw += s
    if n_sw < min_switches or not dark or not bright:
        raise InsufficientSwitchingError(
            f"found {n_sw} switches (need >= {min_switches})", n_switches=n_sw)
    tau1, se1 = _mean_se(dark)
    tau2, se2 = _mean_se(bright)
    return SwitchingTimes(tau1=tau1, tau2=tau2, tau1_stderr=se1, tau2_stderr=se2,
                          n_dwell1=len(dark), n_dwell2=len(bright), n_switches=n_sw)
