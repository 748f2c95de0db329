import numpy as np
import pytest

from ddxy.meanfield import uniform_steady_states
from ddxy.model import ModelParams, MeanFieldZ
from ddxy.stability import (
    NotSteadyError,
    StabilityClass,
    scan_stability,
    stability_matrix,
    uniform_rhs,
)


def mk(j, mu, omega, gamma=1.0):
    return ModelParams(j=j, mu=mu, omega=omega, gamma=gamma, coupling=MeanFieldZ(2))


VACUUM = np.array([0.0, 0.0, -1.0])


def test_vacuum_spectrum_closed_form():
    # zero drive: spectrum is {-g/2 +- i(mu + 2J cos k), -g}
    p = mk(j=10.0, mu=3.0, omega=0.0, gamma=1.0)
    for k in (0.0, 0.7, np.pi / 2, np.pi):
        m = stability_matrix(VACUUM, p, k)
        ev = sorted(np.linalg.eigvals(m), key=lambda z: (z.real, z.imag))
        a = p.mu + 2.0 * p.j * np.cos(k)
        expected = sorted([-1.0, -0.5 + 1j * a, -0.5 - 1j * a],
                          key=lambda z: (z.real, z.imag))
        assert np.allclose(ev, expected, atol=1e-12)
        assert np.max(np.real(np.linalg.eigvals(m))) == pytest.approx(-0.5)


def _fd_jacobian(sigma, params, h=1e-4):
    """Central-difference Jacobian of the uniform rhs (exact: rhs is quadratic)."""
    jac = np.empty((3, 3))
    for c in range(3):
        e = np.zeros(3)
        e[c] = h
        jac[:, c] = (uniform_rhs(sigma + e, params) - uniform_rhs(sigma - e, params)) / (2 * h)
    return jac


def test_k0_matches_finite_difference_jacobian():
    rng = np.random.default_rng(1)
    for _ in range(10):
        p = mk(j=rng.uniform(0, 12), mu=rng.uniform(-8, 8), omega=rng.uniform(0, 8))
        for root in uniform_steady_states(p):
            m = stability_matrix(root.bloch, p, k=0.0)
            jac = _fd_jacobian(root.bloch, p)
            assert np.allclose(m, jac, atol=1e-10)


def test_rejects_non_steady_state():
    p = mk(j=10.0, mu=1.0, omega=2.0)
    with pytest.raises(NotSteadyError):
        stability_matrix(np.array([0.1, 0.2, -0.5]), p, k=0.0)


def test_trace_identity():
    rng = np.random.default_rng(2)
    for _ in range(10):
        p = mk(j=rng.uniform(0, 12), mu=rng.uniform(-8, 8), omega=rng.uniform(0, 8))
        for root in uniform_steady_states(p):
            for k in rng.uniform(0, np.pi, size=5):
                m = stability_matrix(root.bloch, p, k)
                assert np.trace(m) == pytest.approx(-2.0 * p.gamma, abs=1e-12)


def test_depends_on_k_only_through_cos():
    p = mk(j=10.0, mu=-5.0, omega=2.0)
    root = uniform_steady_states(p)[0]
    k = 1.1
    m1 = stability_matrix(root.bloch, p, k)
    m2 = stability_matrix(root.bloch, p, 2.0 * np.pi - k)
    assert np.allclose(m1, m2, atol=0)


def test_vacuum_scan_stable():
    p = mk(j=10.0, mu=3.0, omega=0.0)
    report = scan_stability(VACUUM, p)
    assert report.classification is StabilityClass.STABLE
    assert np.allclose(report.max_re_omega, -0.5, atol=1e-12)


def test_middle_branch_unstable_at_k0():
    # three coexisting uniform states: the middle one is globally unstable
    p = mk(j=10.0, mu=-5.0, omega=2.0)
    roots = uniform_steady_states(p)
    assert len(roots) == 3
    flags = [r.stable_k0 for r in roots]
    assert flags == [True, False, True]
    mid = roots[1]
    report = scan_stability(mid.bloch, p)
    assert report.classification is StabilityClass.GLOBAL_K0
    m0 = stability_matrix(mid.bloch, p, 0.0)
    assert np.linalg.eigvals(m0).real.max() > 0


def test_instability_taxonomy_dark_branch():
    # dark uniform branch: incommensurate instability at moderate drive,
    # antiferromagnetic (k = pi) instability at strong drive
    p6 = mk(j=10.0, mu=10.0, omega=6.0)
    dark6 = uniform_steady_states(p6)[0]
    rep6 = scan_stability(dark6.bloch, p6)
    assert rep6.classification is StabilityClass.INCOMMENSURATE
    assert 0.0 < rep6.k_star < np.pi

    p12 = mk(j=10.0, mu=10.0, omega=12.0)
    dark12 = uniform_steady_states(p12)[0]
    rep12 = scan_stability(dark12.bloch, p12)
    assert rep12.classification is StabilityClass.AF_PI
    assert rep12.k_star == pytest.approx(np.pi)


def test_quantized_grid():
    p = mk(j=10.0, mu=3.0, omega=0.0)
    report = scan_stability(VACUUM, p, quantized_sites=16)
    allowed = 2.0 * np.pi * np.arange(16) / 16.0
    allowed = np.unique(allowed[allowed <= np.pi + 1e-12])
    assert np.allclose(report.k_grid, allowed)
    assert report.classification is StabilityClass.STABLE


def test_unstable_branch_grows_in_chain_dynamics():
    # GLOBAL_K0 instability: a perturbed chain leaves the uniform state
    from ddxy import meanfield
    from ddxy.model import NearestNeighbor1D, ModelParams

    p = mk(j=10.0, mu=-5.0, omega=2.0)
    mid = uniform_steady_states(p)[1]
    rep = scan_stability(mid.bloch, p)
    assert rep.classification is StabilityClass.GLOBAL_K0

    n = 32
    chain = ModelParams(j=p.j, mu=p.mu, omega=p.omega, gamma=p.gamma,
                        coupling=NearestNeighbor1D(n))
    rng = np.random.default_rng(8)
    init = np.tile(mid.bloch, (n, 1)) + 1e-6 * rng.standard_normal((n, 3))
    dev0 = np.abs(init - mid.bloch).max()
    _, states = meanfield.evolve_mf_batch(init[None], chain, t_final=50.0,
                                          store_every=1000)
    dev = np.abs(states[:, 0] - mid.bloch[None, None, :]).max(axis=(1, 2))
    assert dev.max() >= 10.0 * dev0
