"""Eigensolvers and ground-state diagnostics.

Includes the free-fermion oracle for decoupled correlated chains: under
a Jordan-Wigner map each chain species becomes a free open chain with
hopping ``t_perp``.
"""
from __future__ import annotations

import itertools
import logging
import math

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.csgraph  # noqa: F401  (registers sp.csgraph)
import scipy.sparse.linalg as spla

from . import kernels
from .hamiltonians import SparseOperator

log = logging.getLogger(__name__)

DENSE_LIMIT = 4000
RESIDUAL_TOL = 1e-9
DEGENERACY_TOL = 1e-8


# --------------------------------------------------------------------------
# eigensolvers
# --------------------------------------------------------------------------

def _as_matrix(H):
    return H.matrix if isinstance(H, SparseOperator) else H


def low_spectrum(H, k: int = 1, seed: int = 0, tol: float = RESIDUAL_TOL):
    """Lowest ``k`` eigenpairs as ``(energies, vectors)`` with energies
    ascending and vectors in the columns.

    Dense ``eigh`` below ``DENSE_LIMIT``; ARPACK Lanczos with a seeded start
    vector above it.
    """
    M = _as_matrix(H)
    n = M.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    if sp.issparse(M):
        d = M - M.conj().T
        herm = float(abs(d).max()) if d.nnz else 0.0
        scale = float(abs(M).max()) if M.nnz else 0.0
    else:
        herm = float(np.abs(M - M.conj().T).max())
        scale = float(np.abs(M).max())
    if herm > 1e-12 * max(scale, 1.0):
        raise ValueError(f"operator is not Hermitian (defect {herm:.3e})")
    if n <= DENSE_LIMIT or k >= n - 1:
        A = M.toarray() if sp.issparse(M) else np.asarray(M)
        w, v = np.linalg.eigh(A)
        w, v = w[:k], v[:, :k]
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w, v = spla.eigsh(M.astype(np.complex128), k=k, which="SA", v0=v0, tol=1e-13,
                          ncv=max(2 * k + 1, 40))
        order = np.argsort(w)
        w, v = w[order], v[:, order]
        v, _ = np.linalg.qr(v)
        # rotate within the subspace so degenerate vectors are exact eigenvectors
        h = v.conj().T @ (M @ v)
        w, c = np.linalg.eigh(0.5 * (h + h.conj().T))
        v = v @ c
    res = np.linalg.norm(M @ v - v * w, axis=0)
    if res.size and res.max() > tol * max(1.0, float(np.abs(w).max())):
        raise RuntimeError(f"eigen residual {res.max():.3e} exceeds {tol:.1e}")
    return w, v


def real_gauge(M: sp.csr_matrix):
    """Diagonal phases ``d`` with ``D^* M D`` real, or ``None`` if the
    off-diagonal phases do not admit such a gauge."""
    M = sp.csr_matrix(M)
    n = M.shape[0]
    tree = sp.csgraph.breadth_first_order
    d = np.zeros(n, dtype=np.complex128)
    seen = np.zeros(n, dtype=bool)
    absM = abs(M)
    for root in range(n):
        if seen[root]:
            continue
        order, pred = tree(absM, root, directed=False, return_predecessors=True)
        d[root] = 1.0
        seen[order] = True
        for v in order[1:]:
            u = pred[v]
            h = M[v, u]
            # choose d_v so that conj(d_v) h d_u is real positive
            d[v] = d[u] * h / abs(h)
    R = sp.diags(d.conj()) @ M @ sp.diags(d)
    R = sp.csr_matrix(R)
    if R.nnz and np.abs(R.data.imag).max() > 1e-13 * max(1.0, np.abs(R.data).max()):
        return None
    return d


def bipartition(M: sp.csr_matrix):
    """Two-colouring of the matrix graph when the diagonal vanishes, else ``None``."""
    M = sp.csr_matrix(M)
    if np.any(M.diagonal() != 0):
        return None
    n = M.shape[0]
    color = -np.ones(n, dtype=np.int64)
    indptr, indices = M.indptr, M.indices
    for root in range(n):
        if color[root] >= 0:
            continue
        color[root] = 0
        stack = [root]
        while stack:
            u = stack.pop()
            for v in indices[indptr[u]:indptr[u + 1]]:
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    stack.append(v)
                elif color[v] == color[u]:
                    return None
    return color


def full_spectrum(H) -> np.ndarray:
    """All eigenvalues, ascending.

    Exploits a chiral (bipartite, zero-diagonal) structure through the
    singular values of the off-diagonal block, and a real diagonal gauge
    when one exists; otherwise falls back to dense ``eigvalsh``.
    """
    M = sp.csr_matrix(_as_matrix(H))
    n = M.shape[0]
    d = real_gauge(M)
    if d is not None:
        M = sp.csr_matrix((sp.diags(d.conj()) @ M @ sp.diags(d)).real)
    color = bipartition(M)
    if color is not None and n > 1:
        p = np.nonzero(color == 0)[0]
        q = np.nonzero(color == 1)[0]
        C = M[p][:, q].toarray()
        sv = sla.svdvals(C) if C.size else np.zeros(0)
        zeros = np.zeros(abs(len(p) - len(q)))
        return np.sort(np.concatenate([sv, -sv, zeros]))
    return np.linalg.eigvalsh(M.toarray())


def eigenpairs(H, k: int = 1, seed: int = 0) -> list:
    """``low_spectrum`` as a list of ``(energy, vector)`` tuples."""
    w, v = low_spectrum(H, k, seed)
    return [(float(w[i]), v[:, i]) for i in range(len(w))]


def ground_manifold(H, kmax: int = 6, tol: float = DEGENERACY_TOL, seed: int = 0):
    """Ground energy and an orthonormal basis of the degenerate ground space."""
    n = _as_matrix(H).shape[0]
    k = min(kmax, n)
    w, v = low_spectrum(H, k, seed)
    deg = int(np.count_nonzero(w - w[0] < tol))
    if deg == k and k < n:
        log.warning("ground manifold fills all %d requested states", k)
    return float(w[0]), v[:, :deg], w


def spectral_gap(H, seed: int = 0) -> float:
    w, _ = low_spectrum(H, min(2, _as_matrix(H).shape[0]), seed)
    return float(w[1] - w[0]) if len(w) > 1 else math.inf


# --------------------------------------------------------------------------
# entanglement
# --------------------------------------------------------------------------

def _compress(states, sites):
    out = np.zeros(states.shape[0], dtype=np.uint64)
    for a, s in enumerate(sites):
        out |= ((states >> np.uint64(s)) & np.uint64(1)) << np.uint64(a)
    return out


def schmidt_values(psi, basis, partition) -> np.ndarray:
    part = sorted({int(s) for s in partition})
    rest = [s for s in range(basis.nsites) if s not in set(part)]
    left = _compress(basis.states, part)
    right = _compress(basis.states, rest)
    lu, li = np.unique(left, return_inverse=True)
    ru, ri = np.unique(right, return_inverse=True)
    M = np.zeros((lu.size, ru.size), dtype=np.complex128)
    M[li, ri] = psi
    return np.linalg.svd(M, compute_uv=False)


def entanglement_entropy(psi, basis, partition) -> float:
    """Von Neumann entropy (nats) of the occupation-basis reduced state."""
    part = {int(s) for s in partition}
    if not part or len(part) >= basis.nsites:
        log.info("trivial partition (%d of %d sites): entropy 0", len(part), basis.nsites)
        return 0.0
    psi = np.asarray(psi, dtype=np.complex128)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1) > 1e-8:
        raise ValueError(f"state is not normalized (|psi| = {nrm:.6g})")
    s = schmidt_values(psi, basis, part)
    p = s[s > 1e-15] ** 2
    p = p / p.sum()
    return float(max(0.0, -np.sum(p * np.log(p))))


# --------------------------------------------------------------------------
# correlations
# --------------------------------------------------------------------------

def one_body_matrix(psi, basis, sites) -> np.ndarray:
    """``G[a, b] = <c_a^dag c_b>`` over the listed sites."""
    sites = np.asarray(sites, dtype=np.int64)
    n = sites.size
    src = np.repeat(sites, n)   # b
    dst = np.tile(sites, n)     # a
    vals = kernels.hop_expect(basis.states, np.asarray(psi, dtype=np.complex128), src, dst)
    # vals[b * n + a] = <c_a^dag c_b>
    return vals.reshape(n, n).T.copy()


def chain_sites(spec, sublattice: str, chain_index: int) -> np.ndarray:
    """Sites of one sublattice along column ``chain_index`` ordered by y."""
    if spec.kind != "square":
        raise ValueError("chains are defined on the square lattice")
    if not 0 <= chain_index < spec.Lx:
        raise IndexError(f"chain index {chain_index} outside [0, {spec.Lx})")
    sub = "AB".index(sublattice)
    col = [s for s in range(spec.nsites)
           if spec.coords[s, 0] == chain_index and spec.sublattice[s] == sub]
    return np.array(sorted(col, key=lambda s: spec.coords[s, 1]), dtype=np.int64)


def momentum_grid(L: int) -> np.ndarray:
    return 2 * math.pi * np.arange(L) / L


def momentum_distribution(psi, basis, spec, sublattice: str, chain_index: int = 0):
    """``(k, n(k))`` with ``n(k) = (1/L) sum e^{ik(l - l')} <s_l^dag s_l'>``.

    ``psi`` may be a vector or a matrix whose columns span a degenerate
    manifold; the latter is averaged with equal weights.
    """
    sites = chain_sites(spec, sublattice, chain_index)
    L = sites.size
    vecs = np.asarray(psi, dtype=np.complex128)
    if vecs.ndim == 1:
        vecs = vecs[:, None]
    G = np.zeros((L, L), dtype=np.complex128)
    for c in range(vecs.shape[1]):
        G += one_body_matrix(vecs[:, c], basis, sites)
    G /= vecs.shape[1]
    k = momentum_grid(L)
    ell = np.arange(L)
    ph = np.exp(1j * k[:, None] * ell[None, :])          # (nk, L)
    nk = np.einsum("ka,ab,kb->k", ph, G, ph.conj()) / L
    if np.abs(nk.imag).max() > 1e-9:
        raise AssertionError("momentum distribution has an imaginary part")
    return k, nk.real


def correlation_map(psi, basis, spec, kind: str = "density-density") -> dict:
    """Pair map ``(i, j) -> value`` for ``density-density``, ``hop a†a`` or
    ``hop b†b`` (ASCII spellings ``hop-aa`` / ``hop-bb`` accepted)."""
    psi = np.asarray(psi, dtype=np.complex128)
    key = kind.replace("†", "").replace(" ", "-").lower()
    if key == "density-density":
        occ = basis.occupations().astype(np.float64)
        p = np.abs(psi) ** 2
        C = occ.T @ (occ * p[:, None])
        n = C.shape[0]
        return {(i, j): float(C[i, j]) for i in range(n) for j in range(n)}
    if key in ("hop-aa", "hop-a-a", "hop-bb", "hop-b-b"):
        sub = "A" if "a" in key[4:] else "B"
        sites = spec.sublattice_sites(sub)
        G = one_body_matrix(psi, basis, sites)
        return {(int(a), int(b)): complex(G[x, y])
                for x, a in enumerate(sites) for y, b in enumerate(sites)}
    raise ValueError(f"unknown correlation kind {kind!r}")


def correlation_length(distances, values, rmin: float = 1.0) -> float:
    """Exponential-fit length of ``|values|`` against ``distances``.

    Finite-cluster stand-in for a transfer-matrix correlation length.
    """
    r = np.asarray(distances, float)
    v = np.abs(np.asarray(values))
    ok = (r >= rmin) & (v > 1e-14)
    if np.count_nonzero(ok) < 2:
        return math.nan
    slope = np.polyfit(r[ok], np.log(v[ok]), 1)[0]
    return math.inf if slope >= 0 else float(-1.0 / slope)


# --------------------------------------------------------------------------
# free-chain oracle
# --------------------------------------------------------------------------

def free_chain_levels(L: int, t: float) -> np.ndarray:
    m = np.arange(1, L + 1)
    return -2.0 * t * np.cos(m * math.pi / (L + 1))


def _subset_sums(eps, n):
    if n == 0:
        return np.zeros(1)
    return np.array([eps[list(c)].sum() for c in itertools.combinations(range(eps.size), n)])


def jw_chain_oracle(L: int, Na: int, Nb: int, t_perp: float, boundary: str = "open") -> np.ndarray:
    """Sorted many-body spectrum of two independent free open chains."""
    if boundary != "open":
        raise ValueError("the free-chain mapping is exact only for open chains")
    if not (0 <= Na <= L and 0 <= Nb <= L):
        raise ValueError(f"fillings ({Na}, {Nb}) outside [0, {L}]")
    eps = free_chain_levels(L, t_perp)
    ea, eb = _subset_sums(eps, Na), _subset_sums(eps, Nb)
    return np.sort((ea[:, None] + eb[None, :]).ravel())


def decoupled_chain(L: int, boundary: str = "open", phi: float = 0.0):
    """Column 0 of a ``2 x 2L`` square cluster as one correlated chain.

    Returns ``(spec, gauge, sites)``: chain site ``a_l`` is ``(0, 2l)`` and
    ``b_l`` is ``(0, 2l + 1)``. Pair with ``J_par = 0``.
    """
    from .lattice import assign_gauge, build_lattice
    spec = build_lattice("square", 2, 2 * L, "open", boundary)
    gauge = assign_gauge(spec, phi=phi, theta_scheme="square-red-bonds")
    sites = np.array([spec.site_index(0, y) for y in range(2 * L)], dtype=np.int64)
    return spec, gauge, sites
