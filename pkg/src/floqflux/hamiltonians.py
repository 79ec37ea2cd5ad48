"""Driven harmonics, effective correlated-hopping Hamiltonian and plain hopping.

A directed hop ``u -> v`` with phase ``beta`` is the operator
``e^{i beta} c_v^dag c_u``. The drive on bond ``b`` is
``H(t) = sum_b J_b [e^{i(Omega t + theta_b)} + e^{-i(Omega t + theta_b)}] X_b``
with ``X_b`` the Hermitian bond hopping, so that
``H_1 = sum_b J_b e^{i theta_b} X_b`` and ``H_-1 = H_1^dag``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import kernels
from .hilbert import FockBasis


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Complex sparse matrix acting on a :class:`FockBasis`."""

    matrix: sp.csr_matrix
    basis: FockBasis | None = None
    hermitian: bool = True

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def entries(self):
        """(row, col, value) triples in row-major order."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return list(zip(coo.row[order].tolist(), coo.col[order].tolist(), coo.data[order].tolist()))

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def hermiticity_defect(self) -> float:
        d = self.matrix - self.matrix.conj().T
        return float(abs(d).max()) if d.nnz else 0.0

    def _wrap(self, m, hermitian=None):
        m = sp.csr_matrix(m)
        m.eliminate_zeros()
        return SparseOperator(m, self.basis, self.hermitian if hermitian is None else hermitian)

    def __add__(self, other):
        if isinstance(other, SparseOperator):
            return self._wrap(self.matrix + other.matrix, self.hermitian and other.hermitian)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SparseOperator):
            return self._wrap(self.matrix - other.matrix, self.hermitian and other.hermitian)
        return NotImplemented

    def __mul__(self, c):
        c = complex(c)
        return self._wrap(self.matrix * c, self.hermitian and c.imag == 0)

    __rmul__ = __mul__

    def shift(self, c: float) -> "SparseOperator":
        return self._wrap(self.matrix + float(c) * sp.identity(self.dim, format="csr"))

    def save_coo(self, path) -> Path:
        """Write ``row col re im`` lines, 0-indexed."""
        path = Path(path)
        with path.open("w") as fh:
            fh.write(f"# dim {self.dim} nnz {self.nnz}\n")
            for r, c, v in self.entries():
                fh.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")
        return path


def load_coo(path, basis=None) -> SparseOperator:
    dim = None
    rows, cols, vals = [], [], []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            parts = line[1:].split()
            dim = int(parts[parts.index("dim") + 1])
            continue
        r, c, re_, im = line.split()
        rows.append(int(r))
        cols.append(int(c))
        vals.append(float(re_) + 1j * float(im))
    m = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(dim, dim))
    return SparseOperator(m, basis, hermitian=True)


# --------------------------------------------------------------------------
# assembly helpers
# --------------------------------------------------------------------------

def _assemble(basis: FockBasis, src, dst, ctrl, coef) -> sp.csr_matrix:
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    ctrl = np.asarray(ctrl, dtype=np.int64)
    coef = np.asarray(coef, dtype=np.complex128)
    n = basis.dim
    if src.size == 0:
        return sp.csr_matrix((n, n), dtype=np.complex128)
    rows, cols, vals, lost = kernels.hop_coo(basis.states, src, dst, ctrl, coef)
    if lost:
        raise ValueError(f"{lost} matrix elements leave the basis; the sector is not conserved")
    m = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    m.sum_duplicates()
    return m


def _active_terms(basis, src, dst):
    act = np.zeros(basis.nsites, dtype=bool)
    act[basis.active] = True
    return act[np.asarray(src, dtype=np.int64)] & act[np.asarray(dst, dtype=np.int64)]


def _hermitian_from_half(A: sp.csr_matrix, diag=None) -> sp.csr_matrix:
    H = (A + A.conj().T).tocsr()
    if diag is not None and np.any(diag):
        H = (H + sp.diags(diag.astype(np.complex128), format="csr")).tocsr()
    H.eliminate_zeros()
    H.sort_indices()
    return H


def bond_couplings(spec, J_par: float, J_perp: float) -> np.ndarray:
    """Per-bond J: horizontal bonds J_par, vertical bonds J_perp (square);
    every honeycomb bond uses J_perp."""
    if spec.kind == "honeycomb":
        return np.full(spec.nbonds, float(J_perp))
    return np.array([J_par if c == "h" else J_perp for c in spec.bond_class], dtype=float)


def _site_potential(gauge, mu, basis):
    if mu is None:
        mu = gauge.mu
    if mu == 0:
        return None
    from .lattice import stripe_pattern
    pot = stripe_pattern(gauge.lattice, mu)
    return basis.occupations().astype(np.float64) @ pot


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------

def build_harmonics(spec, gauge, J_par: float, J_perp: float, basis: FockBasis):
    """Return ``(H1, Hm1)`` as :class:`SparseOperator` (not Hermitian)."""
    if basis.split:
        raise ValueError("nearest-neighbour hops exchange A and B particles; "
                         "harmonics need a total-N basis")
    J = bond_couplings(spec, J_par, J_perp)
    hp = gauge.hop_phase
    src, dst = spec.bonds[:, 0], spec.bonds[:, 1]
    keep = (J != 0) & _active_terms(basis, src, dst)
    src, dst, J, hp, th = src[keep], dst[keep], J[keep], hp[keep], gauge.theta[keep]
    ctrl = -np.ones(src.size, dtype=np.int64)
    # X_b = e^{i beta} c_dst^dag c_src + h.c.
    fwd = _assemble(basis, src, dst, ctrl, J * np.exp(1j * th) * np.exp(1j * hp))
    bwd = _assemble(basis, dst, src, ctrl, J * np.exp(1j * th) * np.exp(-1j * hp))
    H1 = (fwd + bwd).tocsr()
    Hm1 = H1.conj().T.tocsr()
    for m in (H1, Hm1):
        m.eliminate_zeros()
        m.sort_indices()
    return SparseOperator(H1, basis, False), SparseOperator(Hm1, basis, False)


def time_hamiltonian(H1: SparseOperator, Hm1: SparseOperator, Omega: float, t: float) -> SparseOperator:
    """``H(t) = e^{i Omega t} H_1 + e^{-i Omega t} H_-1``."""
    ph = np.exp(1j * Omega * t)
    m = (ph * H1.matrix + np.conj(ph) * Hm1.matrix).tocsr()
    m.eliminate_zeros()
    return SparseOperator(m, H1.basis, True)


def nnn_terms(gauge, J_par: float, J_perp: float, Omega: float):
    """Correlated-hop table ``(src, dst, ctrl, coef)`` for one orientation of
    every active NNN path; the Hermitian partner is added by the caller."""
    spec = gauge.lattice
    J = bond_couplings(spec, J_par, J_perp)
    st = spec.nnn_steps
    amp = (2.0 / Omega) * J[st[:, 0]] * J[st[:, 2]] * gauge.nnn_sin
    phase = gauge.nnn_B + math.pi / 2 + gauge.nnn_alpha
    coef = amp * np.exp(1j * phase)
    keep = np.abs(amp) > 1e-15
    nn = spec.nnn[keep]
    return nn[:, 0], nn[:, 2], nn[:, 1], coef[keep]


def build_heff(spec, gauge, J_par: float, J_perp: float, Omega: float,
               mu: float | None = None, basis: FockBasis | None = None) -> SparseOperator:
    """Effective correlated-hopping Hamiltonian plus the striped potential.

    Every path ``i -> k -> j`` contributes
    ``(2/Omega) J_ik J_kj sin(theta_ik - theta_kj) e^{i(B_ij + pi/2 + alpha_ij)}
    (2 n_k - 1) c_j^dag c_i`` and its conjugate.
    """
    if basis is None:
        raise ValueError("a FockBasis is required")
    if spec.has_parallel_bonds():
        raise ValueError("lattice has parallel bonds; the correlated-hopping form needs a simple graph")
    src, dst, ctrl, coef = nnn_terms(gauge, J_par, J_perp, Omega)
    keep = _active_terms(basis, src, dst)
    A = _assemble(basis, src[keep], dst[keep], ctrl[keep], coef[keep])
    H = _hermitian_from_half(A, _site_potential(gauge, mu, basis))
    return SparseOperator(H, basis, True)


def build_hopping(spec, gauge, J: float = 1.0, basis: FockBasis | None = None,
                  mu: float | None = 0.0) -> SparseOperator:
    """Plain nearest-neighbour hopping ``-J sum e^{i beta} c_v^dag c_u + h.c.``."""
    if basis is None:
        raise ValueError("a FockBasis is required")
    src, dst = spec.bonds[:, 0], spec.bonds[:, 1]
    keep = _active_terms(basis, src, dst)
    coef = -float(J) * np.exp(1j * gauge.hop_phase[keep])
    ctrl = -np.ones(int(keep.sum()), dtype=np.int64)
    A = _assemble(basis, src[keep], dst[keep], ctrl, coef)
    H = _hermitian_from_half(A, _site_potential(gauge, mu, basis))
    return SparseOperator(H, basis, True)


def number_operator(basis: FockBasis, which: str = "total") -> SparseOperator:
    d = basis.number_operator_diag(which).astype(np.complex128)
    return SparseOperator(sp.diags(d, format="csr"), basis, True)
