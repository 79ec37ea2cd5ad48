import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floqflux.model import ModelSpec
from floqflux.pump import (DegeneracyError, FlowSeries, PumpAbort, charge_pump, fukui_chern,
                           hofstadter_band_chern, hofstadter_bloch, left_charge_diag, many_body_chern,
                           spectral_flow, threaded_hamiltonian, write_chern_json)

from conftest import PI

HOF = ModelSpec(Lx=2, Ly=2, phi=PI / 2, sector=(1,), model="hopping")


def test_hofstadter_band_cherns():
    # q = 4: outer bands carry +1; the touching middle pair sums to -2
    assert hofstadter_band_chern(1, 4, 0, 12) == 1
    assert hofstadter_band_chern(1, 4, 3, 12) == 1
    assert hofstadter_band_chern(1, 3, 0, 12) == 1


def test_hofstadter_bloch_hermitian():
    H = hofstadter_bloch(1, 4, 0.3, 1.1)
    assert np.abs(H - H.conj().T).max() < 1e-15


@pytest.mark.parametrize("n", [6, 8])
def test_single_particle_chern_matches_bloch(n):
    c, info = many_body_chern(HOF, n, n, return_info=True)
    assert isinstance(c, int)
    assert c == hofstadter_band_chern(1, 4, 0, 12)
    assert info["min_gap"] > 0.1


def _grid_vectors(model, n):
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            H = model.hamiltonian((2 * PI * i / n, 2 * PI * j / n))
            row.append(np.linalg.eigh(H.toarray())[1][:, 0])
        out.append(row)
    return out


VECS = _grid_vectors(HOF, 6)


@given(st.lists(st.floats(-10, 10), min_size=36, max_size=36))
@settings(max_examples=30)
def test_chern_gauge_invariant(phases):
    c0, f0 = fukui_chern(VECS)
    vecs = [[VECS[i][j] * np.exp(1j * phases[6 * i + j]) for j in range(6)] for i in range(6)]
    c1, f1 = fukui_chern(vecs)
    assert c0 == c1
    np.testing.assert_allclose(f0, f1, atol=1e-9)


def test_chern_flux_sums_to_integer():
    c, f = fukui_chern(VECS)
    assert math.isclose(f.sum() / (2 * PI), c, abs_tol=1e-9)


def test_chern_needs_torus_and_grid():
    with pytest.raises(ValueError):
        many_body_chern(HOF.with_(boundary_x="open"), 6, 6)
    with pytest.raises(ValueError):
        many_body_chern(HOF, 3, 6)


def test_degenerate_ground_state_aborts():
    # 4x4 single particle at pi/2 is fourfold degenerate
    m = ModelSpec(phi=PI / 2, sector=(1,), model="hopping")
    with pytest.raises(DegeneracyError):
        many_body_chern(m, 4, 4)


def test_workers_do_not_change_result():
    a = many_body_chern(HOF, 6, 6, workers=1, return_info=True)
    b = many_body_chern(HOF, 6, 6, workers=3, return_info=True)
    assert a == b


@pytest.mark.parametrize("axis", ["x", "y"])
def test_threading_is_2pi_periodic(axis):
    m = ModelSpec(phi=PI / 2, sector=(2, 1))
    a = np.linalg.eigvalsh(threaded_hamiltonian(m, 0.4, axis).toarray())
    b = np.linalg.eigvalsh(threaded_hamiltonian(m, 0.4 + 2 * PI, axis).toarray())
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_spectral_flow_endpoints_agree():
    fs = spectral_flow(ModelSpec(phi=PI / 2, sector=(2, 1)), "y", 8)
    assert fs.grid[0] == 0 and math.isclose(fs.grid[-1], 2 * PI)
    assert math.isclose(fs.energies[0], fs.energies[-1], abs_tol=1e-10)
    assert np.all((fs.overlaps > 0) & (fs.overlaps <= 1))


def test_spectral_flow_guards():
    m = ModelSpec(phi=PI / 2, sector=(1, 1))
    with pytest.raises(ValueError):
        spectral_flow(m, "y", 5)
    with pytest.raises(ValueError):
        spectral_flow(m.with_(boundary_y="open"), "y", 8)


@given(st.floats(0.05, 1.0), st.sampled_from([(1, 1), (2, 1), (2, 2)]))
@settings(max_examples=10)
def test_alpha_sign_symmetry_balanced(alpha, sector):
    m = ModelSpec(phi=PI / 4, alpha=alpha, sector=sector)
    a = np.linalg.eigvalsh(m.hamiltonian().toarray())
    Na, Nb = sector
    b = np.linalg.eigvalsh(m.with_(alpha=-alpha, sector=(Nb, Na)).hamiltonian().toarray())
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_trivial_pump_small():
    m = ModelSpec(Lx=2, Ly=4, boundary_x="open", mu=10.0, J_par=2.0, phi=PI / 2, sector=(2, 2))
    fs = charge_pump(m, 9, return_path=True)
    assert abs(fs.charges[8]) < 0.05
    assert abs(fs.charges[-1]) < 1e-8
    assert fs.overlaps.min() > 0.9


def test_pump_guards():
    with pytest.raises(ValueError):
        charge_pump(ModelSpec(sector=(1, 1)), 9)
    with pytest.raises(ValueError):
        left_charge_diag(ModelSpec(Lx=3, Ly=4, boundary_x="open", sector=(1, 1)))


def test_pump_abort_on_tiny_floor_violation():
    m = ModelSpec(Lx=4, Ly=4, boundary_x="open", mu=10.0, J_par=2.0, phi=PI / 2, sector=(2, 2))
    with pytest.raises(PumpAbort, match="gap closing"):
        charge_pump(m, 9)


def test_flow_csv_and_chern_json(tmp_path):
    fs = FlowSeries([0.0, 1.0], [0.5, 0.25], [0.9], [0.0, 0.1])
    text = fs.write_csv(tmp_path / "f.csv").read_text().splitlines()
    assert text[0] == "phi[rad],energy[J],charge[1],overlap[1]"
    assert text[2] == "1,0.25,0.10000000000000001,0.90000000000000002"
    p = write_chern_json(tmp_path / "c.json", {"chern": 1})
    assert '"chern": 1' in p.read_text()
