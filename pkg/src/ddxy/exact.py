"""Dense machinery on the full 2^N hard-core Hilbert space.

Basis: computational bitmasks, bit i = occupation of site i.  This module
is the correctness oracle for the stochastic and symmetry-reduced solvers,
so everything is assembled transparently and guarded to small N:

  apply_hamiltonian      matrix-free, N <= 14
  liouvillian_dense      full superoperator, N <= 7
  steady_state_dense     null vector of the superoperator, N <= 7
  liouvillian_gap_dense  dense spectrum, N <= 6

Vectorization convention: column stacking, vec(rho) = rho.flatten(order="F"),
so vec(A rho B) = kron(B.T, A) vec(rho).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import ModelParams, ParameterError, bonds, site_count

__all__ = [
    "DegenerateSteadyStateError",
    "apply_hamiltonian",
    "hamiltonian_dense",
    "hamiltonian_sparse",
    "effective_hamiltonian_sparse",
    "liouvillian_dense",
    "liouvillian_sparse",
    "master_rhs",
    "evolve_master",
    "steady_state_dense",
    "liouvillian_gap_dense",
    "site_occupations",
    "total_number_moments",
    "sy_expectations",
    "sy_pair_expectation",
    "state_site_occupations",
    "state_sy_expectations",
    "state_sy_pair",
    "vacuum_state",
    "vacuum_density_matrix",
]

MAX_SITES_STATE = 14
MAX_SITES_SUPEROP = 7
MAX_SITES_GAP = 6

#: eigenvalues closer to zero than this count as stationary modes
ZERO_MODE_TOL = 1e-10


class DegenerateSteadyStateError(RuntimeError):
    """The Liouvillian null space has dimension > 1."""


def _check_sites(params: ModelParams, limit: int, what: str) -> int:
    n = site_count(params.coupling)
    if n > limit:
        raise ParameterError(f"{what} limited to N <= {limit}, got N = {n}")
    return n


@lru_cache(maxsize=32)
def _tables(params: ModelParams):
    """Bitmask tables: populations, flip targets, bond hop index pairs."""
    n = site_count(params.coupling)
    dim = 1 << n
    states = np.arange(dim, dtype=np.int64)
    pop = np.zeros(dim, dtype=np.int64)
    for i in range(n):
        pop += (states >> i) & 1
    flips = [states ^ (1 << i) for i in range(n)]
    hop = []
    for a, b, g in bonds(params):
        mask = (1 << a) | (1 << b)
        occ = ((states >> a) & 1) ^ ((states >> b) & 1)
        src = states[occ == 1]
        hop.append((src, src ^ mask, -2.0 * g))
    diag = 0.5 * params.mu * n - params.mu * pop
    return n, dim, pop, flips, hop, diag


def vacuum_state(n: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    return psi


def vacuum_density_matrix(n: int) -> np.ndarray:
    rho = np.zeros((1 << n, 1 << n), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def apply_hamiltonian(psi: np.ndarray, params: ModelParams) -> np.ndarray:
    """H |psi> via bitmask traversal; psi has shape (..., 2^N)."""
    n, dim, pop, flips, hop, diag = _tables(params)
    if n > MAX_SITES_STATE:
        raise ParameterError(f"apply_hamiltonian limited to N <= {MAX_SITES_STATE}")
    psi = np.asarray(psi)
    if psi.shape[-1] != dim:
        raise ParameterError(f"state length {psi.shape[-1]} != 2^{n}")
    out = diag * psi
    if params.omega != 0.0:
        for fl in flips:
            out += params.omega * psi[..., fl]
    for src, dst, amp in hop:
        out[..., dst] += amp * psi[..., src]
    return out


def hamiltonian_sparse(params: ModelParams) -> sp.csr_matrix:
    """Sparse Hamiltonian; same physics as apply_hamiltonian."""
    n, dim, pop, flips, hop, diag = _tables(params)
    rows, cols, vals = [np.arange(dim)], [np.arange(dim)], [diag.astype(float)]
    if params.omega != 0.0:
        states = np.arange(dim)
        for fl in flips:
            rows.append(fl)
            cols.append(states)
            vals.append(np.full(dim, params.omega))
    for src, dst, amp in hop:
        rows.append(dst)
        cols.append(src)
        vals.append(np.full(len(src), amp))
    mat = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    mat.sum_duplicates()
    return mat


def hamiltonian_dense(params: ModelParams) -> np.ndarray:
    n = _check_sites(params, 12, "hamiltonian_dense")
    return hamiltonian_sparse(params).toarray().astype(complex)


def effective_hamiltonian_sparse(params: ModelParams) -> sp.csr_matrix:
    """Non-Hermitian H_eff = H - i (gamma/2) sum_i n_i, complex CSR."""
    n, dim, pop, flips, hop, diag = _tables(params)
    h = hamiltonian_sparse(params).astype(complex)
    h -= sp.diags(0.5j * params.gamma * pop.astype(float))
    return sp.csr_matrix(h)


def _lowering_sparse(n: int, site: int) -> sp.csr_matrix:
    dim = 1 << n
    states = np.arange(dim)
    src = states[(states >> site) & 1 == 1]
    return sp.csr_matrix(
        (np.ones(len(src)), (src ^ (1 << site), src)), shape=(dim, dim))


def liouvillian_sparse(params: ModelParams) -> sp.csr_matrix:
    """Lindblad superoperator on vec(rho) (column stacking), sparse."""
    n = _check_sites(params, MAX_SITES_SUPEROP, "liouvillian")
    dim = 1 << n
    h = hamiltonian_sparse(params).astype(complex)
    eye = sp.identity(dim, format="csr", dtype=complex)
    pop = _tables(params)[2].astype(float)
    p = sp.diags(pop).astype(complex)
    lv = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for i in range(n):
        sm = _lowering_sparse(n, i).astype(complex)
        lv = lv + params.gamma * sp.kron(sm, sm)
    lv = lv - 0.5 * params.gamma * (sp.kron(eye, p) + sp.kron(p, eye))
    return sp.csr_matrix(lv)


def liouvillian_dense(params: ModelParams) -> np.ndarray:
    """Dense 4^N x 4^N Lindblad superoperator (memory grows as 16^N)."""
    return liouvillian_sparse(params).toarray()


def master_rhs(rho: np.ndarray, params: ModelParams) -> np.ndarray:
    """d rho / dt of the master equation, evaluated densely."""
    n, dim, pop, flips, hop, diag = _tables(params)
    h = _dense_h_cached(params)
    out = -1j * (h @ rho - rho @ h)
    popf = pop.astype(float)
    out -= 0.5 * params.gamma * (popf[:, None] * rho + rho * popf[None, :])
    for i in range(n):
        bit = 1 << i
        src = np.flatnonzero((np.arange(dim) >> i) & 1)
        dst = src ^ bit
        out[np.ix_(dst, dst)] += params.gamma * rho[np.ix_(src, src)]
    return out


@lru_cache(maxsize=16)
def _dense_h_cached(params: ModelParams) -> np.ndarray:
    return hamiltonian_sparse(params).toarray().astype(complex)


def evolve_master(rho0: np.ndarray, params: ModelParams, t_final: float,
                  dt: float = 1e-3, store_every: int = 100):
    """Fixed-step RK4 of the master equation; returns (times, rhos)."""
    n = _check_sites(params, 8, "evolve_master")
    rho = np.array(rho0, dtype=complex, copy=True)
    n_steps = max(1, int(round(t_final / dt)))
    stored = [rho.copy()]
    times = [0.0]
    for step in range(1, n_steps + 1):
        k1 = master_rhs(rho, params)
        k2 = master_rhs(rho + 0.5 * dt * k1, params)
        k3 = master_rhs(rho + 0.5 * dt * k2, params)
        k4 = master_rhs(rho + dt * k3, params)
        rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % store_every == 0 or step == n_steps:
            stored.append(rho.copy())
            times.append(step * dt)
    return np.array(times), np.array(stored)


def steady_state_dense(params: ModelParams, check_unique: bool | None = None) -> np.ndarray:
    """Unique steady state: null vector of the superoperator, trace-normalized.

    check_unique (default: N <= 3) verifies via the dense spectrum that the
    null space is one-dimensional; degeneracy raises
    DegenerateSteadyStateError rather than silently averaging.
    """
    n = _check_sites(params, MAX_SITES_SUPEROP, "steady_state_dense")
    dim = 1 << n
    lv = liouvillian_sparse(params)
    if check_unique is None:
        check_unique = n <= 3
    if check_unique:
        evals = scipy.linalg.eigvals(lv.toarray())
        n_zero = int(np.sum(np.abs(evals) < ZERO_MODE_TOL))
        if n_zero != 1:
            raise DegenerateSteadyStateError(
                f"found {n_zero} stationary modes (|eig| < {ZERO_MODE_TOL})")
    # replace the vec(rho)[0,0] row with the trace constraint; that row is
    # linearly dependent on the other diagonal rows of any Lindblad generator
    lv_mod = lv.tolil(copy=True)
    diag_idx = np.arange(dim) * dim + np.arange(dim)
    lv_mod.rows[0] = list(diag_idx)
    lv_mod.data[0] = [1.0 + 0.0j] * dim
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    try:
        vec = spla.spsolve(sp.csc_matrix(lv_mod), rhs)
    except RuntimeError as err:  # singular factorization
        raise DegenerateSteadyStateError(str(err)) from err
    if not np.all(np.isfinite(vec)):
        raise DegenerateSteadyStateError("singular system: steady state not unique")
    rho = vec.reshape((dim, dim), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    resid = np.abs(lv @ rho.flatten(order="F")).max()
    if resid > 1e-10:
        raise DegenerateSteadyStateError(
            f"steady-state residual {resid:.2e} exceeds 1e-10")
    return rho


def liouvillian_gap_dense(params: ModelParams) -> float:
    """Relaxation gap: minus the largest nonzero real part of the spectrum."""
    n = _check_sites(params, MAX_SITES_GAP, "liouvillian_gap_dense")
    evals = scipy.linalg.eigvals(liouvillian_dense(params))
    zero = np.abs(evals) < ZERO_MODE_TOL
    if zero.sum() != 1:
        raise DegenerateSteadyStateError(
            f"found {int(zero.sum())} stationary modes; expected exactly one")
    gap = -evals[~zero].real.max()
    if gap <= 0:
        raise DegenerateSteadyStateError(f"non-positive gap {gap}")
    return float(gap)


# ---------------------------------------------------------------------------
# Observables (density matrices)
# ---------------------------------------------------------------------------

def _pop_bits(dim: int) -> np.ndarray:
    n = dim.bit_length() - 1
    states = np.arange(dim)
    return sum(((states >> i) & 1) for i in range(n))


def site_occupations(rho: np.ndarray) -> np.ndarray:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    diag = np.real(np.diag(rho))
    states = np.arange(dim)
    return np.array([diag[((states >> i) & 1) == 1].sum() for i in range(n)])


def total_number_moments(rho: np.ndarray) -> tuple[float, float]:
    """(<N>, <N^2>) of the total photon number."""
    dim = rho.shape[0]
    pop = _pop_bits(dim)
    diag = np.real(np.diag(rho))
    return float((pop * diag).sum()), float((pop * pop * diag).sum())


def sy_expectations(rho: np.ndarray) -> np.ndarray:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    states = np.arange(dim)
    out = np.empty(n)
    for i in range(n):
        bit = 1 << i
        phase = np.where((states >> i) & 1 == 1, -1j, 1j)
        out[i] = np.real(np.sum(phase * rho[states ^ bit, states]))
    return out


def sy_pair_expectation(rho: np.ndarray, i: int, j: int) -> float:
    """<sy_i sy_j> for i != j."""
    if i == j:
        return 1.0
    dim = rho.shape[0]
    states = np.arange(dim)
    mask = (1 << i) | (1 << j)
    phase = (np.where((states >> i) & 1 == 1, -1j, 1j)
             * np.where((states >> j) & 1 == 1, -1j, 1j))
    return float(np.real(np.sum(phase * rho[states ^ mask, states])))


# ---------------------------------------------------------------------------
# Observables (pure states, batched over leading axes)
# ---------------------------------------------------------------------------

def state_site_occupations(psi: np.ndarray) -> np.ndarray:
    """<n_i> per site; psi shape (..., 2^N) -> (..., N)."""
    dim = psi.shape[-1]
    n = dim.bit_length() - 1
    prob = np.abs(psi) ** 2
    states = np.arange(dim)
    cols = [(prob[..., ((states >> i) & 1) == 1]).sum(axis=-1) for i in range(n)]
    return np.stack(cols, axis=-1)


def state_sy_expectations(psi: np.ndarray) -> np.ndarray:
    """<sy_i> per site; psi shape (..., 2^N) -> (..., N)."""
    dim = psi.shape[-1]
    n = dim.bit_length() - 1
    states = np.arange(dim)
    cols = []
    for i in range(n):
        phase = np.where((states >> i) & 1 == 1, -1j, 1j)
        amp = (psi.conj() * phase * psi[..., states ^ (1 << i)]).sum(axis=-1)
        cols.append(np.real(amp))
    return np.stack(cols, axis=-1)


def state_sy_pair(psi: np.ndarray, i: int, j: int) -> np.ndarray:
    """<sy_i sy_j>; psi shape (..., 2^N) -> (...,)."""
    dim = psi.shape[-1]
    if i == j:
        return np.ones(psi.shape[:-1])
    states = np.arange(dim)
    mask = (1 << i) | (1 << j)
    phase = (np.where((states >> i) & 1 == 1, -1j, 1j)
             * np.where((states >> j) & 1 == 1, -1j, 1j))
    amp = (psi.conj() * phase * psi[..., states ^ mask]).sum(axis=-1)
    return np.real(amp)
