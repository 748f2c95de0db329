import numpy as np
import pytest

from ddxy.model import (
    InfiniteRange,
    MeanFieldZ,
    ModelParams,
    NearestNeighbor1D,
    ParameterError,
    bonds,
    config_from_params,
    load_config,
    neighbor_table,
    pair_coupling,
    params_from_config,
    validate_bloch,
)


def test_pair_coupling_nearest_neighbor_periodic():
    p = ModelParams(j=10.0, mu=0.0, omega=1.0, coupling=NearestNeighbor1D(8))
    assert pair_coupling(p) == pytest.approx(2.5)  # J / (2z), z = 2


def test_pair_coupling_infinite_range():
    p = ModelParams(j=10.0, mu=0.0, omega=1.0, coupling=InfiniteRange(21))
    # photon-language pair strength 2J/(N-1) = 1; spin-form per-pair is half
    assert 2.0 * pair_coupling(p) == pytest.approx(1.0)
    assert pair_coupling(p) == pytest.approx(0.5)


def test_pair_coupling_meanfield_z():
    p = ModelParams(j=10.0, mu=0.0, omega=1.0, coupling=MeanFieldZ(4))
    assert pair_coupling(p) == pytest.approx(1.25)


@pytest.mark.parametrize("coupling", [
    NearestNeighbor1D(6), InfiniteRange(6), MeanFieldZ(3),
])
def test_pair_coupling_homogeneous_in_j(coupling):
    rng = np.random.default_rng(0)
    for _ in range(20):
        j = rng.uniform(0.1, 20.0)
        c = rng.uniform(0.1, 5.0)
        base = pair_coupling(ModelParams(j=j, mu=1.0, omega=1.0, coupling=coupling))
        scaled = pair_coupling(ModelParams(j=c * j, mu=1.0, omega=1.0, coupling=coupling))
        assert scaled == pytest.approx(c * base, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5, 11, 21])
def test_infinite_range_total_coupling_scale(n):
    # sum over j != i of the photon pair strength is 2J independent of N
    p = ModelParams(j=10.0, mu=0.0, omega=1.0, coupling=InfiniteRange(n))
    per_site = {}
    for i, j, g in bonds(p):
        per_site[i] = per_site.get(i, 0.0) + 2.0 * g
        per_site[j] = per_site.get(j, 0.0) + 2.0 * g
    for total in per_site.values():
        assert total == pytest.approx(2.0 * p.j, rel=1e-12)


def test_parameter_errors():
    with pytest.raises(ParameterError):
        ModelParams(j=1.0, mu=0.0, omega=0.0, gamma=0.0)
    with pytest.raises(ParameterError):
        ModelParams(j=1.0, mu=0.0, omega=0.0, gamma=-1.0)
    with pytest.raises(ParameterError):
        NearestNeighbor1D(1)
    with pytest.raises(ParameterError):
        InfiniteRange(0)
    with pytest.raises(ParameterError):
        # a lone site has no pair coupling
        pair_coupling(ModelParams(j=1.0, mu=0.0, omega=0.0,
                                  coupling=InfiniteRange(1)))
    with pytest.raises(ParameterError):
        MeanFieldZ(0)
    with pytest.raises(ParameterError):
        ModelParams(j=float("nan"), mu=0.0, omega=0.0)


def test_bonds_open_chain():
    p = ModelParams(j=8.0, mu=0.0, omega=0.0,
                    coupling=NearestNeighbor1D(4, periodic=False))
    assert bonds(p) == [(0, 1, 4.0), (1, 2, 4.0), (2, 3, 4.0)]


def test_bonds_two_site_ring_doubles():
    p = ModelParams(j=8.0, mu=0.0, omega=0.0, coupling=NearestNeighbor1D(2))
    assert bonds(p) == [(0, 1, 8.0)]


def test_neighbor_table_counts():
    idx, ptr, coef = neighbor_table(NearestNeighbor1D(5, periodic=False))
    assert list(np.diff(ptr)) == [1, 2, 2, 2, 1]
    assert coef[0] == pytest.approx(2.0)      # end site, z = 1
    assert coef[2] == pytest.approx(1.0)      # bulk site, z = 2
    idx, ptr, coef = neighbor_table(InfiniteRange(4))
    assert list(np.diff(ptr)) == [3, 3, 3, 3]
    assert np.allclose(coef, 2.0 / 3.0)


def test_validate_bloch():
    ok = np.array([[0.0, 0.0, -1.0], [0.3, 0.4, 0.5]])
    validate_bloch(ok)
    with pytest.raises(ParameterError):
        validate_bloch(np.array([[1.1, 0.0, 0.0]]))
    with pytest.raises(ParameterError):
        validate_bloch(np.array([[np.nan, 0.0, 0.0]]))


def test_config_roundtrip(tmp_path):
    text = """
    # sample run
    j = 10.0
    mu = -2.5
    omega = 2.5
    gamma = 1.0
    coupling.kind = nn1d
    coupling.n = 12
    coupling.periodic = true
    """
    path = tmp_path / "run.conf"
    path.write_text(text)
    cfg = load_config(path)
    params = params_from_config(cfg)
    assert params.j == 10.0
    assert params.coupling == NearestNeighbor1D(12, periodic=True)
    again = params_from_config(config_from_params(params))
    assert again == params


def test_config_missing_keys(tmp_path):
    path = tmp_path / "bad.conf"
    path.write_text("j = 1.0\n")
    with pytest.raises(ParameterError):
        params_from_config(load_config(path))
