import json
import os
import subprocess
import sys

import numpy as np
from hypothesis import given, settings, strategies as st

from floqflux import kernels
from floqflux.hamiltonians import nnn_terms
from floqflux.model import ModelSpec

M = ModelSpec(phi=np.pi / 4, alpha=0.2, sector=(2, 2))
STATES = M.basis.states
SRC, DST, CTRL, COEF = (np.ascontiguousarray(a) for a in nnn_terms(M.gauge, 1.0, 1.0, 10.0))
SRC, DST, CTRL = (a.astype(np.int64) for a in (SRC, DST, CTRL))


def _canon(out):
    r, c, v, lost = out
    k = np.lexsort((c, r))
    return r[k], c[k], v[k], lost


def test_hop_coo_parity():
    a = _canon(kernels._hop_coo_loop(STATES, SRC, DST, CTRL, COEF))
    b = _canon(kernels._hop_coo_numpy(STATES, SRC, DST, CTRL, COEF))
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    np.testing.assert_allclose(a[2], b[2], rtol=0, atol=0)
    assert a[3] == b[3]


def test_hop_coo_counts_lost_terms():
    # total-N state table; terms moving particles onto already-full targets never fire,
    # but hops whose image is absent from the table are counted as lost
    states = np.array([0b0011, 0b0101], dtype=np.uint64)
    out = kernels._hop_coo_loop(states, np.array([1]), np.array([2]), np.array([-1]),
                                np.array([1.0 + 0j]))
    ref = kernels._hop_coo_numpy(states, np.array([1]), np.array([2]), np.array([-1]),
                                 np.array([1.0 + 0j]))
    assert out[3] == ref[3] == 0
    assert out[0].tolist() == ref[0].tolist() == [1]
    out = kernels._hop_coo_loop(states, np.array([0]), np.array([3]), np.array([-1]),
                                np.array([1.0 + 0j]))
    assert out[3] == 2 and out[0].size == 0


@given(st.integers(0, 10 ** 6))
@settings(max_examples=20)
def test_hop_expect_parity(seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=STATES.size) + 1j * rng.normal(size=STATES.size)
    psi /= np.linalg.norm(psi)
    src = rng.integers(0, 16, 30).astype(np.int64)
    dst = rng.integers(0, 16, 30).astype(np.int64)
    np.testing.assert_allclose(kernels._hop_expect_loop(STATES, psi, src, dst),
                               kernels._hop_expect_numpy(STATES, psi, src, dst), atol=1e-13)


def test_occupations_parity():
    np.testing.assert_array_equal(kernels._occupations_loop(STATES, 16),
                                  kernels._occupations_numpy(STATES, 16))


@given(st.lists(st.integers(0, 400), min_size=1, max_size=80, unique=True),
       st.integers(0, 420), st.integers(-3, 90))
def test_find_matches_searchsorted(vals, x, hint):
    states = np.array(sorted(vals), dtype=np.uint64)
    i = int(np.searchsorted(states, np.uint64(x)))
    want = i if i < states.size and states[i] == x else -1
    assert kernels._find(states, np.uint64(x), hint) == want


_SCRIPT = """
import json, math
from floqflux import kernels
from floqflux.model import ModelSpec
from floqflux.observables import low_spectrum
m = ModelSpec(phi=math.pi / 2, sector=(2, 2))
H = m.hamiltonian()
w, _ = low_spectrum(H, 3)
print(json.dumps({"backend": kernels.BACKEND, "nnz": H.nnz, "w": w.tolist()}))
"""


def _run(flag):
    env = dict(os.environ, FLOQFLUX_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", _SCRIPT], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(out.stdout)


def test_env_flag_selects_backend_with_identical_physics():
    a, b = _run("1"), _run("0")
    assert a["backend"] == "numba" and b["backend"] == "numpy"
    assert a["nnz"] == b["nnz"]
    np.testing.assert_allclose(a["w"], b["w"], atol=1e-12)
