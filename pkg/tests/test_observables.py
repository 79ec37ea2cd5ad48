import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from floqflux import observables as obs
from floqflux.hamiltonians import build_heff
from floqflux.hilbert import build_basis
from floqflux.lattice import build_lattice
from floqflux.model import ModelSpec

from conftest import PI


def small_model(**kw):
    base = dict(Lx=2, Ly=4, boundary_x="open", boundary_y="open", phi=PI / 2, sector=(2, 2))
    base.update(kw)
    return ModelSpec(**base)


def test_low_spectrum_dense_matches_eigh():
    H = small_model().hamiltonian()
    w, v = obs.low_spectrum(H, 5)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(H.toarray())[:5], atol=1e-12)
    assert np.abs(v.conj().T @ v - np.eye(5)).max() < 1e-12


def test_low_spectrum_lanczos_path(monkeypatch):
    H = ModelSpec(phi=PI / 2, sector=(2, 2)).hamiltonian()
    ref = np.linalg.eigvalsh(H.toarray())[:6]
    monkeypatch.setattr(obs, "DENSE_LIMIT", 100)
    w, v = obs.low_spectrum(H, 6, seed=3)
    np.testing.assert_allclose(w, ref, atol=1e-10)
    assert np.abs(v.conj().T @ v - np.eye(6)).max() < 1e-10


def test_low_spectrum_seed_deterministic(monkeypatch):
    monkeypatch.setattr(obs, "DENSE_LIMIT", 100)
    H = ModelSpec(phi=PI / 2, sector=(2, 2)).hamiltonian()
    a = obs.low_spectrum(H, 3, seed=11)
    b = obs.low_spectrum(H, 3, seed=11)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_low_spectrum_rejects_non_hermitian():
    M = sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(ValueError, match="Hermitian"):
        obs.low_spectrum(M, 1)


@pytest.mark.parametrize("phi", [0.0, PI / 2])
def test_full_spectrum_matches_eigvalsh(phi):
    H = small_model(phi=phi, J_par=0.7).hamiltonian()
    np.testing.assert_allclose(obs.full_spectrum(H), np.linalg.eigvalsh(H.toarray()), atol=1e-12)


def test_full_spectrum_chiral_chain():
    spec, g, sites = obs.decoupled_chain(4)
    b = build_basis(spec, (2, 1), sites=sites)
    H = build_heff(spec, g, 0.0, 1.0, 4.0, 0.0, b)
    assert obs.bipartition(H.matrix) is not None
    np.testing.assert_allclose(obs.full_spectrum(H), np.linalg.eigvalsh(H.toarray()), atol=1e-12)


def test_ground_manifold_degeneracy():
    H = sp.diags([0.0, 0.0, 1.0, 2.0]).tocsr().astype(complex)
    E, V, w = obs.ground_manifold(H, 3)
    assert E == 0.0 and V.shape == (4, 2)
    assert obs.spectral_gap(sp.diags([0.0, 0.5, 2.0]).tocsr().astype(complex)) == 0.5


def _random_state(b, seed):
    r = np.random.default_rng(seed)
    psi = r.normal(size=b.dim) + 1j * r.normal(size=b.dim)
    return psi / np.linalg.norm(psi)


LAT = build_lattice("square", 2, 4, "open", "open")
BAS = build_basis(LAT, 3)


@given(st.sets(st.integers(0, 7), min_size=1, max_size=7), st.integers(0, 10 ** 6))
@settings(max_examples=40)
def test_entropy_complement_symmetry(part, seed):
    psi = _random_state(BAS, seed)
    rest = set(range(8)) - part
    assert math.isclose(obs.entanglement_entropy(psi, BAS, part),
                        obs.entanglement_entropy(psi, BAS, rest), abs_tol=1e-10)


def test_entropy_product_state_and_bounds():
    psi = np.zeros(BAS.dim, complex)
    psi[5] = 1
    assert obs.entanglement_entropy(psi, BAS, [0, 1, 2, 3]) == 0.0
    psi = _random_state(BAS, 1)
    S = obs.entanglement_entropy(psi, BAS, [0, 1, 2, 3])
    assert 0 < S <= 4 * math.log(2) + 1e-12
    assert obs.entanglement_entropy(psi, BAS, []) == 0.0
    assert obs.entanglement_entropy(psi, BAS, range(8)) == 0.0


def test_entropy_bell_pair():
    b = build_basis(LAT, 1)
    psi = np.zeros(b.dim, complex)
    psi[b.index_of(1 << 0)] = psi[b.index_of(1 << 7)] = 1 / math.sqrt(2)
    assert math.isclose(obs.entanglement_entropy(psi, b, [0]), math.log(2), rel_tol=1e-12)


def test_entropy_requires_normalization():
    with pytest.raises(ValueError):
        obs.entanglement_entropy(2 * _random_state(BAS, 0), BAS, [0])


def test_one_body_matrix_properties():
    psi = _random_state(BAS, 4)
    G = obs.one_body_matrix(psi, BAS, range(8))
    assert np.abs(G - G.conj().T).max() < 1e-13
    assert math.isclose(np.trace(G).real, 3.0, rel_tol=1e-12)
    ev = np.linalg.eigvalsh(G)
    assert ev.min() > -1e-12 and ev.max() < 1 + 1e-12


def test_momentum_distribution_sums_to_filling():
    spec, g, sites = obs.decoupled_chain(6)
    b = build_basis(spec, (2, 3), sites=sites)
    H = build_heff(spec, g, 0.0, 1.0, 4.0, 0.0, b)
    _, V, _ = obs.ground_manifold(H, 4)
    for sub, n in (("A", 2), ("B", 3)):
        k, nk = obs.momentum_distribution(V, b, spec, sub, 0)
        assert k.size == 6
        assert math.isclose(nk.sum(), n, rel_tol=1e-10)
        assert nk.min() > -1e-12


def test_correlation_map_kinds():
    H = small_model().hamiltonian()
    _, V, _ = obs.ground_manifold(H, 2)
    psi = V[:, 0]
    dd = obs.correlation_map(psi, H.basis, LAT, "density-density")
    assert math.isclose(sum(dd[(i, i)] for i in range(8)), 4.0, rel_tol=1e-12)
    aa = obs.correlation_map(psi, H.basis, LAT, "hop a†a")
    assert aa == obs.correlation_map(psi, H.basis, LAT, "hop-aa")
    with pytest.raises(ValueError):
        obs.correlation_map(psi, H.basis, LAT, "spin")


def test_uniform_torus_density_is_translation_invariant():
    m = ModelSpec(Lx=4, Ly=4, phi=0.0, sector=(2,), model="hopping", mu=0.0)
    H = m.hamiltonian()
    E, V, _ = obs.ground_manifold(H, 4)
    assert V.shape[1] == 1
    d = obs.correlation_map(V[:, 0], H.basis, m.lattice)
    dens = np.array([d[(i, i)] for i in range(16)])
    assert np.ptp(dens) < 1e-9
    # pair correlations depend only on the separation
    L = m.lattice
    seen = {}
    for (i, j), val in d.items():
        key = tuple((L.coords[j] - L.coords[i]) % 4)
        seen.setdefault(key, []).append(val)
    assert max(np.ptp(v) for v in seen.values()) < 1e-9


def test_correlation_length_exponential():
    r = np.arange(1, 8)
    assert math.isclose(obs.correlation_length(r, 3 * np.exp(-r / 2.5)), 2.5, rel_tol=1e-10)
    assert obs.correlation_length([1, 2], [1.0, 2.0]) == math.inf
    assert math.isnan(obs.correlation_length([1.0], [1.0]))


@pytest.mark.parametrize("L", [3, 4, 5])
def test_jordan_wigner_oracle_small(L):
    spec, g, sites = obs.decoupled_chain(L)
    for Na in range(L + 1):
        for Nb in range(L + 1):
            b = build_basis(spec, (Na, Nb), sites=sites)
            ed = np.linalg.eigvalsh(build_heff(spec, g, 0.0, 1.0, 4.0, 0.0, b).toarray())
            np.testing.assert_allclose(ed, obs.jw_chain_oracle(L, Na, Nb, 0.5), atol=1e-10)


def test_jw_oracle_guards():
    with pytest.raises(ValueError):
        obs.jw_chain_oracle(4, 1, 1, 1.0, "periodic")
    with pytest.raises(ValueError):
        obs.jw_chain_oracle(4, 5, 1, 1.0)


def test_free_chain_levels():
    np.testing.assert_allclose(obs.free_chain_levels(2, 1.0), [-1.0, 1.0], atol=1e-15)
