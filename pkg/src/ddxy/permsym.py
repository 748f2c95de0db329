"""Permutation-symmetric Liouvillian for all-to-all coupling.

When every pair of sites couples identically, dynamics started in a
permutation-symmetric density matrix stays in the O(N^3)-dimensional space
spanned by symmetrized Pauli strings

    M(n) = 2^-N * sum over distinct site assignments of
           (sigma^x at n_x sites) (sigma^y at n_y sites) (sigma^z at n_z sites)
           (identity elsewhere),       n = (n_x, n_y, n_z), |n| <= N.

M(0,0,0) has unit trace and all other elements are traceless, so a valid
state has c(0,0,0) = 1; a product state with uniform single-site Bloch
vector s has coefficients c(n) = s_x^n_x s_y^n_y s_z^n_z.

The Liouvillian acts within this space, L(M(n)) = sum_m L[m,n] M(m), and is
assembled combinatorially: every single-site superoperator and every
two-site bond term maps Pauli letters to Pauli letters; a transition's
matrix element is its single-site algebra coefficient times the number of
site slots it can strike, counted on the target composition.  No 2^N
object is ever materialized, so the reduced master equation d/dt c = L c
is tractable up to N of order 100.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import InfiniteRange, ModelParams, ParameterError

__all__ = [
    "SingularReductionError",
    "SymObservables",
    "basis_dimension",
    "enumerate_basis",
    "basis_index",
    "product_state_coeffs",
    "vacuum_coeffs",
    "liouvillian_coefficients",
    "evolve_coeffs",
    "steady_state_coeffs",
    "liouvillian_gap",
    "observables_from_coeffs",
    "dump_coefficients",
    "load_coefficients",
]

ZERO_MODE_TOL = 1e-10
MAX_SITES_GAP = 100


class SingularReductionError(RuntimeError):
    """The reduced coefficient system is singular (degenerate steady state)."""


# single-site Pauli letters in occupation order (index 0 = empty, 1 = occupied)
_PAULI = [
    np.eye(2, dtype=complex),                              # 0: identity
    np.array([[0, 1], [1, 0]], dtype=complex),             # 1: x
    np.array([[0, 1j], [-1j, 0]], dtype=complex),          # 2: y
    np.array([[-1, 0], [0, 1]], dtype=complex),            # 3: z
]
_LOWER = np.array([[0, 1], [0, 0]], dtype=complex)         # photon loss
_RAISE = _LOWER.conj().T


def _pauli_coords(m: np.ndarray) -> np.ndarray:
    """Decompose a 2x2 matrix over (identity, x, y, z)."""
    return np.array([np.trace(p.conj().T @ m) / 2.0 for p in _PAULI])


def _pauli_coords2(m: np.ndarray) -> np.ndarray:
    """Decompose a 4x4 two-site matrix over Pauli (x) Pauli."""
    out = np.empty((4, 4), dtype=complex)
    for a in range(4):
        for b in range(4):
            basis = np.kron(_PAULI[a], _PAULI[b])
            out[a, b] = np.trace(basis.conj().T @ m) / 4.0
    return out


def _single_site_table(params: ModelParams) -> np.ndarray:
    """s[b, a]: coefficient of letter b in the image of letter a under the
    per-site Liouvillian (drive + detuning commutators, photon-loss dissipator)."""
    h1 = params.omega * _PAULI[1] - 0.5 * params.mu * _PAULI[3]
    num = _RAISE @ _LOWER
    table = np.zeros((4, 4), dtype=complex)
    for a in range(4):
        x = _PAULI[a]
        img = -1j * (h1 @ x - x @ h1)
        img += params.gamma * (_LOWER @ x @ _RAISE - 0.5 * (num @ x + x @ num))
        table[:, a] = _pauli_coords(img)
    if np.abs(table.imag).max() > 1e-12:
        raise RuntimeError("single-site transition table has imaginary parts")
    return table.real


@lru_cache(maxsize=8)
def _bond_table() -> tuple:
    """Sparse transitions of -i[-(xx + yy), . ] on two-site Pauli letters.

    Returns ((a, b, a2, b2, coeff), ...) for unit bond strength; scaled by
    the per-pair coupling during assembly.
    """
    h = -(np.kron(_PAULI[1], _PAULI[1]) + np.kron(_PAULI[2], _PAULI[2]))
    entries = []
    for a in range(4):
        for b in range(4):
            x = np.kron(_PAULI[a], _PAULI[b])
            img = -1j * (h @ x - x @ h)
            coords = _pauli_coords2(img)
            if np.abs(coords.imag).max() > 1e-12:
                raise RuntimeError("bond transition table has imaginary parts")
            for a2 in range(4):
                for b2 in range(4):
                    v = coords.real[a2, b2]
                    if abs(v) > 1e-14:
                        entries.append((a, b, a2, b2, v))
    return tuple(entries)


def basis_dimension(n: int) -> int:
    """Number of non-identity symmetric basis elements."""
    return (n + 3) * (n + 2) * (n + 1) // 6 - 1


def enumerate_basis(n: int) -> list[tuple[int, int, int]]:
    """Lexicographic triples (n_x, n_y, n_z) with n_x + n_y + n_z <= n.

    The identity (0, 0, 0) comes first; the total count is
    basis_dimension(n) + 1.
    """
    if n < 1:
        raise ParameterError(f"need at least one site, got {n}")
    return [
        (nx, ny, nz)
        for nx in range(n + 1)
        for ny in range(n + 1 - nx)
        for nz in range(n + 1 - nx - ny)
    ]


@lru_cache(maxsize=64)
def _basis_maps(n: int):
    triples = enumerate_basis(n)
    index = {t: k for k, t in enumerate(triples)}
    return triples, index


def basis_index(n: int, triple: tuple[int, int, int]) -> int:
    return _basis_maps(n)[1][tuple(triple)]


def _infinite_range_sites(params: ModelParams) -> int:
    if not isinstance(params.coupling, InfiniteRange):
        raise ParameterError(
            "permutation-symmetric solver requires InfiniteRange coupling")
    return params.coupling.n


def liouvillian_coefficients(params: ModelParams) -> sp.csr_matrix:
    """Reduced Liouvillian on symmetric-basis coefficients, CSR, real.

    Row/column order follows enumerate_basis; row (0,0,0) is identically
    zero (trace preservation).  d/dt c = L c.
    """
    n = _infinite_range_sites(params)
    triples, index = _basis_maps(n)
    dim = len(triples)
    single = _single_site_table(params)
    rows, cols, vals = [], [], []

    def counts4(tr):
        return (n - sum(tr), tr[0], tr[1], tr[2])

    for col, tr in enumerate(triples):
        c4 = counts4(tr)
        # single-site superoperators: replace one letter a by b
        for a in range(4):
            if c4[a] == 0:
                continue
            for b in range(4):
                v = single[b, a]
                if v == 0.0:
                    continue
                tgt = list(tr)
                if a != b:
                    if a > 0:
                        tgt[a - 1] -= 1
                    if b > 0:
                        tgt[b - 1] += 1
                tgt = tuple(tgt)
                if sum(tgt) > n:
                    continue
                mult = counts4(tgt)[b]
                rows.append(index[tgt])
                cols.append(col)
                vals.append(v * mult)
        # pair bond term over unordered site pairs: half the ordered sum
        if n >= 2 and params.j != 0.0:
            g = params.j / (n - 1)
            for a, b, a2, b2, v in _bond_table():
                src = list(c4)
                src[a] -= 1
                src[b] -= 1
                if src[a] < 0 or src[b] < 0:
                    continue
                tgt = list(tr)
                for letter, sign in ((a, -1), (b, -1), (a2, +1), (b2, +1)):
                    if letter > 0:
                        tgt[letter - 1] += sign
                tgt = tuple(tgt)
                if min(tgt) < 0 or sum(tgt) > n:
                    continue
                t4 = counts4(tgt)
                mult = t4[a2] * t4[b2] if a2 != b2 else t4[a2] * (t4[a2] - 1)
                if mult == 0:
                    continue
                rows.append(index[tgt])
                cols.append(col)
                vals.append(0.5 * g * v * mult)

    mat = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    mat.sum_duplicates()
    return mat


def product_state_coeffs(params_or_n, bloch) -> np.ndarray:
    """Coefficients of a uniform product state with single-site Bloch vector."""
    n = params_or_n if isinstance(params_or_n, int) else _infinite_range_sites(params_or_n)
    sx, sy, sz = float(bloch[0]), float(bloch[1]), float(bloch[2])
    if sx * sx + sy * sy + sz * sz > 1.0 + 1e-9:
        raise ParameterError("Bloch vector outside the unit ball")
    triples, _ = _basis_maps(n)
    return np.array([sx ** t[0] * sy ** t[1] * sz ** t[2] for t in triples])


def vacuum_coeffs(n: int) -> np.ndarray:
    return product_state_coeffs(n, (0.0, 0.0, -1.0))


def evolve_coeffs(c0: np.ndarray, params: ModelParams, t_final: float,
                  dt: float = 1e-3, store_every: int = 100):
    """Fixed-step RK4 of d/dt c = L c; returns (times, coeff series)."""
    n = _infinite_range_sites(params)
    dim = basis_dimension(n) + 1
    c = np.array(c0, dtype=float, copy=True)
    if c.shape != (dim,):
        raise ParameterError(f"coefficient vector must have length {dim}")
    if abs(c[0] - 1.0) > 1e-12:
        raise ParameterError("c(0,0,0) must equal 1 for a valid state")
    lv = liouvillian_coefficients(params)
    n_steps = max(1, int(round(t_final / dt)))
    stored = [c.copy()]
    times = [0.0]
    for step in range(1, n_steps + 1):
        k1 = lv @ c
        k2 = lv @ (c + 0.5 * dt * k1)
        k3 = lv @ (c + 0.5 * dt * k2)
        k4 = lv @ (c + dt * k3)
        c += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(c)):
            raise RuntimeError(f"coefficient evolution diverged at t = {step * dt}")
        if step % store_every == 0 or step == n_steps:
            stored.append(c.copy())
            times.append(step * dt)
    return np.array(times), np.array(stored)


def steady_state_coeffs(params: ModelParams) -> np.ndarray:
    """Stationary coefficients: solve the reduced linear system with c0 = 1."""
    n = _infinite_range_sites(params)
    lv = liouvillian_coefficients(params).tocsc()
    dim = lv.shape[0]
    a = lv[1:, 1:]
    b = -np.asarray(lv[1:, [0]].todense()).ravel()
    try:
        if dim - 1 <= 400:
            x = scipy.linalg.solve(a.toarray(), b)
        else:
            x = spla.splu(a.tocsc()).solve(b)
    except (RuntimeError, scipy.linalg.LinAlgError) as err:
        raise SingularReductionError(str(err)) from err
    if not np.all(np.isfinite(x)):
        raise SingularReductionError("reduced system is singular")
    c = np.concatenate([[1.0], x])
    resid = np.abs(lv @ c).max()
    if resid > 1e-10:
        raise SingularReductionError(f"steady-state residual {resid:.2e} > 1e-10")
    return c


def liouvillian_gap(params: ModelParams) -> float:
    """Relaxation gap from the dense spectrum of the reduced Liouvillian.

    The trace row contributes one structural zero eigenvalue; a second
    near-zero mode means a degenerate steady state and raises.
    """
    n = _infinite_range_sites(params)
    if n > MAX_SITES_GAP:
        raise ParameterError(f"gap computation limited to N <= {MAX_SITES_GAP}")
    lv = liouvillian_coefficients(params).toarray()
    evals = scipy.linalg.eigvals(lv)
    zero = np.abs(evals) < ZERO_MODE_TOL
    if zero.sum() != 1:
        raise SingularReductionError(
            f"found {int(zero.sum())} stationary modes; expected exactly one")
    gap = -evals[~zero].real.max()
    if gap <= 0:
        raise SingularReductionError(f"non-positive gap {gap}")
    return float(gap)


def dump_coefficients(c: np.ndarray, n: int, path) -> None:
    """Write coefficients as text lines `n_x n_y n_z value` (exact repr)."""
    triples, _ = _basis_maps(n)
    if c.shape != (len(triples),):
        raise ParameterError("coefficient vector length mismatch")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# symmetric-basis coefficients, n_sites = {n}\n")
        for (nx, ny, nz), v in zip(triples, c):
            fh.write(f"{nx} {ny} {nz} {float(v)!r}\n")


def load_coefficients(path) -> tuple[np.ndarray, int]:
    """Inverse of dump_coefficients; returns (coefficients, n_sites)."""
    entries = {}
    n = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line.startswith("#"):
                if "n_sites" in line:
                    n = int(line.rsplit("=", 1)[1])
                continue
            if not line:
                continue
            nx, ny, nz, val = line.split()
            entries[(int(nx), int(ny), int(nz))] = float(val)
    if n is None:
        n = max(sum(t) for t in entries)
    triples, _ = _basis_maps(n)
    if set(triples) != set(entries):
        raise ParameterError(f"{path}: triples do not form a complete basis")
    return np.array([entries[t] for t in triples]), n


@dataclass(frozen=True)
class SymObservables:
    sigma: tuple          # (<sx>, <sy>, <sz>), site-independent
    photon_n: float       # per-site occupation
    n_total: float
    n_total_sq: float
    dn2: float
    pair: dict            # {'xx': <sx_i sx_j>, ..., 'yz': <sy_i sz_j>} for i != j


def observables_from_coeffs(c: np.ndarray, n: int) -> SymObservables:
    """Single-site and symmetric two-site moments read off the coefficients."""
    _, index = _basis_maps(n)
    if c.shape != (len(_basis_maps(n)[0]),):
        raise ParameterError("coefficient vector length mismatch")
    sx = c[index[(1, 0, 0)]]
    sy = c[index[(0, 1, 0)]]
    sz = c[index[(0, 0, 1)]]
    pair = {}
    if n >= 2:
        pair = {
            "xx": c[index[(2, 0, 0)]],
            "yy": c[index[(0, 2, 0)]],
            "zz": c[index[(0, 0, 2)]],
            "xy": c[index[(1, 1, 0)]],
            "xz": c[index[(1, 0, 1)]],
            "yz": c[index[(0, 1, 1)]],
        }
    photon = 0.5 * (sz + 1.0)
    n_tot = n * photon
    if n >= 2:
        nn = 0.25 * (1.0 + 2.0 * sz + pair["zz"])
        n_sq = n_tot + n * (n - 1) * nn
    else:
        n_sq = n_tot
    return SymObservables(
        sigma=(float(sx), float(sy), float(sz)),
        photon_n=float(photon),
        n_total=float(n_tot),
        n_total_sq=float(n_sq),
        dn2=float(n_sq - n_tot ** 2),
        pair={k: float(v) for k, v in pair.items()},
    )
