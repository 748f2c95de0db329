import itertools

import numpy as np
import pytest
import scipy.linalg

from ddxy import exact, permsym
from ddxy.model import InfiniteRange, ModelParams, NearestNeighbor1D, ParameterError

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SZ = np.array([[-1, 0], [0, 1]], dtype=complex)
ID = np.eye(2, dtype=complex)
PAULI = {0: ID, 1: SX, 2: SY, 3: SZ}


def mk(j, mu, omega, n, gamma=1.0):
    return ModelParams(j=j, mu=mu, omega=omega, gamma=gamma,
                       coupling=InfiniteRange(n))


def op_at(op, site, n):
    return np.kron(np.eye(1 << (n - 1 - site)), np.kron(op, np.eye(1 << site)))


def symmetric_basis_matrix(triple, n):
    """Dense M(n): 2^-N times the sum over distinct letter assignments."""
    letters = [1] * triple[0] + [2] * triple[1] + [3] * triple[2]
    letters += [0] * (n - len(letters))
    total = np.zeros((1 << n, 1 << n), dtype=complex)
    for assign in set(itertools.permutations(letters)):
        acc = np.ones((1, 1), dtype=complex)
        for site in range(n):
            acc = np.kron(PAULI[assign[site]], acc)  # site 0 = least significant
        total += acc
    return total / (1 << n)


def dense_from_coeffs(c, n):
    triples = permsym.enumerate_basis(n)
    rho = np.zeros((1 << n, 1 << n), dtype=complex)
    for coeff, tr in zip(c, triples):
        if coeff != 0.0:
            rho += coeff * symmetric_basis_matrix(tr, n)
    return rho


def product_density_matrix(bloch, n):
    one = 0.5 * (ID + bloch[0] * SX + bloch[1] * SY + bloch[2] * SZ)
    rho = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        rho = np.kron(one, rho)
    return rho


def test_basis_dimensions():
    assert permsym.basis_dimension(1) == 3
    assert permsym.basis_dimension(4) == 34
    assert permsym.basis_dimension(20) == 1770
    for n in range(1, 31):
        want = (n + 3) * (n + 2) * (n + 1) // 6 - 1
        assert len(permsym.enumerate_basis(n)) == want + 1
    assert permsym.basis_dimension(100) == 103 * 102 * 101 // 6 - 1


def test_requires_infinite_range():
    p = ModelParams(j=1.0, mu=0.0, omega=0.0, coupling=NearestNeighbor1D(4))
    with pytest.raises(ParameterError):
        permsym.liouvillian_coefficients(p)


def test_single_site_reduces_to_bloch_generator():
    p = mk(j=0.0, mu=1.3, omega=0.7, n=1)
    lv = permsym.liouvillian_coefficients(p).toarray()
    ix = permsym.basis_index(1, (1, 0, 0))
    iy = permsym.basis_index(1, (0, 1, 0))
    iz = permsym.basis_index(1, (0, 0, 1))
    i0 = permsym.basis_index(1, (0, 0, 0))
    g, mu, om = p.gamma, p.mu, p.omega
    want = np.zeros((4, 4))
    want[ix, ix] = -0.5 * g
    want[ix, iy] = mu
    want[iy, ix] = -mu
    want[iy, iy] = -0.5 * g
    want[iy, iz] = -2.0 * om
    want[iz, iy] = 2.0 * om
    want[iz, iz] = -g
    want[iz, i0] = -g
    assert np.abs(lv - want).max() < 1e-14


def test_trace_row_is_zero():
    rng = np.random.default_rng(0)
    for n in (2, 3, 5):
        p = mk(j=rng.uniform(0, 10), mu=rng.uniform(-5, 5),
               omega=rng.uniform(0, 5), n=n)
        lv = permsym.liouvillian_coefficients(p).toarray()
        assert np.abs(lv[0]).max() < 1e-14


def test_product_state_coefficients_reconstruct_density_matrix():
    rng = np.random.default_rng(1)
    n = 3
    for _ in range(3):
        v = rng.normal(size=3)
        v *= rng.random() ** (1 / 3) / np.linalg.norm(v)
        c = permsym.product_state_coeffs(n, v)
        assert c[0] == 1.0
        rho = dense_from_coeffs(c, n)
        want = product_density_matrix(v, n)
        assert np.abs(rho - want).max() < 1e-12


def test_vacuum_is_stationary_without_drive():
    p = mk(j=7.0, mu=2.0, omega=0.0, n=4)
    c = permsym.vacuum_coeffs(4)
    lv = permsym.liouvillian_coefficients(p)
    assert np.abs(lv @ c).max() < 1e-12
    ss = permsym.steady_state_coeffs(p)
    assert np.abs(ss - c).max() < 1e-10


def _dense_observables(rho, n):
    occ = exact.site_occupations(rho)
    n1, n2 = exact.total_number_moments(rho)
    sz = np.real(np.trace(op_at(SZ, 0, n) @ rho))
    zz = np.real(np.trace(op_at(SZ, 0, n) @ op_at(SZ, 1, n) @ rho))
    yy = np.real(np.trace(op_at(SY, 0, n) @ op_at(SY, 1, n) @ rho))
    return occ.mean(), n1, n2, sz, zz, yy


@pytest.mark.parametrize("n", [2, 3, 4])
def test_evolution_matches_dense_master_equation(n):
    # exact propagators on both sides (matrix exponentials), same product
    # initial state, observables compared at three times
    rng = np.random.default_rng(10 + n)
    for trial in range(3):
        p = mk(j=rng.uniform(1, 10), mu=rng.uniform(-5, 5),
               omega=rng.uniform(0.2, 4), n=n)
        v = rng.normal(size=3)
        v *= 0.9 * rng.random() ** (1 / 3) / np.linalg.norm(v)
        c0 = permsym.product_state_coeffs(n, v)
        rho0 = product_density_matrix(v, n)
        lv_red = permsym.liouvillian_coefficients(p).toarray()
        lv_full = exact.liouvillian_dense(p)
        for t in (1.0, 5.0, 20.0):
            c_t = scipy.linalg.expm(lv_red * t) @ c0
            obs = permsym.observables_from_coeffs(c_t, n)
            vec = (scipy.linalg.expm(lv_full * t)
                   @ rho0.flatten(order="F"))
            rho_t = vec.reshape((1 << n, 1 << n), order="F")
            occ, n1, n2, sz, zz, yy = _dense_observables(rho_t, n)
            assert abs(obs.photon_n - occ) < 1e-8
            assert abs(obs.n_total - n1) < 1e-8
            assert abs(obs.n_total_sq - n2) < 1e-8
            assert abs(obs.sigma[2] - sz) < 1e-8
            if n >= 2:
                assert abs(obs.pair["zz"] - zz) < 1e-8
                assert abs(obs.pair["yy"] - yy) < 1e-8


def test_rk4_evolution_consistent_with_exponential():
    n = 3
    p = mk(j=10.0, mu=-2.0, omega=2.0, n=n)
    c0 = permsym.vacuum_coeffs(n)
    times, series = permsym.evolve_coeffs(c0, p, t_final=2.0, dt=1e-4)
    lv = permsym.liouvillian_coefficients(p).toarray()
    want = scipy.linalg.expm(lv * times[-1]) @ c0
    assert np.abs(series[-1] - want).max() < 1e-8
    # trace coefficient pinned along the whole evolution
    assert np.abs(series[:, 0] - 1.0).max() < 1e-12


def test_long_time_evolution_reaches_steady_state():
    n = 4
    p = mk(j=10.0, mu=-5.0, omega=2.0, n=n)
    c0 = permsym.vacuum_coeffs(n)
    _, series = permsym.evolve_coeffs(c0, p, t_final=60.0, dt=1e-3)
    ss = permsym.steady_state_coeffs(p)
    assert np.abs(series[-1] - ss).max() < 1e-8


@pytest.mark.parametrize("n", [2, 3, 4])
def test_steady_state_matches_dense(n):
    rng = np.random.default_rng(20 + n)
    for _ in range(3):
        p = mk(j=rng.uniform(1, 10), mu=rng.uniform(-5, 5),
               omega=rng.uniform(0.2, 4), n=n)
        c = permsym.steady_state_coeffs(p)
        obs = permsym.observables_from_coeffs(c, n)
        rho = exact.steady_state_dense(p)
        occ, n1, n2, sz, zz, yy = _dense_observables(rho, n)
        assert abs(obs.photon_n - occ) < 1e-8
        assert abs(obs.n_total_sq - n2) < 1e-8
        assert abs(obs.pair["yy"] - yy) < 1e-8


def test_gap_single_site_zero_drive():
    p = mk(j=0.0, mu=0.0, omega=0.0, n=1)
    assert permsym.liouvillian_gap(p) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_gap_bounded_by_dense(n):
    # the symmetric sector is a subspace of the full Liouvillian, so its gap
    # can never undercut the full one
    rng = np.random.default_rng(30 + n)
    for _ in range(3):
        p = mk(j=rng.uniform(1, 10), mu=rng.uniform(-4, 4),
               omega=rng.uniform(0.3, 4), n=n)
        got = permsym.liouvillian_gap(p)
        want = exact.liouvillian_gap_dense(p)
        assert got >= want - 1e-8


@pytest.mark.parametrize("n,omega", [(3, 2.0), (3, 3.0), (4, 2.0), (4, 3.0)])
def test_gap_matches_dense_where_slow_mode_is_collective(n, omega):
    # when the slowest relaxation is the collective (symmetric) mode the
    # reduced gap reproduces the full spectrum exactly
    p = mk(j=10.0, mu=-5.0, omega=omega, n=n)
    got = permsym.liouvillian_gap(p)
    want = exact.liouvillian_gap_dense(p)
    assert got == pytest.approx(want, abs=1e-8)


def test_spectrum_left_half_plane():
    rng = np.random.default_rng(4)
    for _ in range(5):
        p = mk(j=rng.uniform(0, 12), mu=rng.uniform(-6, 6),
               omega=rng.uniform(0, 6), n=6)
        lv = permsym.liouvillian_coefficients(p).toarray()
        assert scipy.linalg.eigvals(lv).real.max() < 1e-10


def test_maximally_mixed_observables():
    n = 4
    c = np.zeros(permsym.basis_dimension(n) + 1)
    c[0] = 1.0
    obs = permsym.observables_from_coeffs(c, n)
    assert obs.sigma == (0.0, 0.0, 0.0)
    assert obs.n_total == pytest.approx(n / 2.0)


def test_vacuum_observables():
    n = 5
    obs = permsym.observables_from_coeffs(permsym.vacuum_coeffs(n), n)
    assert obs.n_total == pytest.approx(0.0)
    assert obs.dn2 == pytest.approx(0.0)


def test_coefficient_dump_roundtrip(tmp_path):
    p = mk(j=8.0, mu=-3.0, omega=2.0, n=4)
    c = permsym.steady_state_coeffs(p)
    path = tmp_path / "coeffs.txt"
    permsym.dump_coefficients(c, 4, path)
    loaded, n = permsym.load_coefficients(path)
    assert n == 4
    assert np.array_equal(loaded, c)
