"""Numerical checks of the high-frequency expansion: commutator, exact
one-period propagator, truncation defect and a heating probe."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .hamiltonians import SparseOperator

DENSE_GUARD = 5000


def magnus_first_order(H1: SparseOperator, Hm1: SparseOperator, Omega: float) -> SparseOperator:
    """``(1/Omega) [H_1, H_-1]``."""
    if H1.dim != Hm1.dim:
        raise ValueError(f"dimension mismatch: {H1.dim} vs {Hm1.dim}")
    a, b = H1.matrix, Hm1.matrix
    m = ((a @ b - b @ a) / Omega).tocsr()
    m.eliminate_zeros()
    m.sort_indices()
    op = SparseOperator(m, H1.basis, True)
    herm = op.hermiticity_defect()
    scale = max(float(abs(m).max()) if m.nnz else 0.0, 1.0)
    if herm > 1e-12 * scale:
        raise AssertionError(f"commutator is not Hermitian (defect {herm:.3e})")
    return op


def _dense(op):
    return op.toarray() if isinstance(op, SparseOperator) else np.asarray(op)


def _expm_herm(H: np.ndarray, tau: float) -> np.ndarray:
    """exp(-i H tau) for Hermitian H via eigendecomposition."""
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * tau)) @ v.conj().T


def one_period_propagator(H1: SparseOperator, Hm1: SparseOperator, Omega: float,
                          nsteps: int = 1024, t0: float = 0.0) -> np.ndarray:
    """Time-ordered midpoint product over one period ``T = 2 pi / Omega``."""
    n = H1.dim
    if n > DENSE_GUARD:
        raise ValueError(f"dimension {n} exceeds the dense guard {DENSE_GUARD}")
    if nsteps < 100:
        raise ValueError("nsteps must be at least 100")
    T = 2 * math.pi / Omega
    dt = T / nsteps
    A, B = _dense(H1), _dense(Hm1)
    U = np.eye(n, dtype=np.complex128)
    if not A.any() and not B.any():
        return U
    for m in range(nsteps):
        t = t0 + (m + 0.5) * dt
        ph = np.exp(1j * Omega * t)
        Ht = ph * A + np.conj(ph) * B
        Ht = 0.5 * (Ht + Ht.conj().T)
        U = _expm_herm(Ht, dt) @ U
    defect = np.abs(U.conj().T @ U - np.eye(n)).max()
    if defect > 1e-10:
        raise AssertionError(f"propagator unitarity defect {defect:.3e}")
    return U


def magnus_defect(U: np.ndarray, Heff, Omega: float) -> float:
    """Spectral norm of ``U - exp(-i Heff 2 pi / Omega)``."""
    U = np.asarray(U)
    H = _dense(Heff)
    if U.shape != H.shape:
        raise ValueError(f"shape mismatch {U.shape} vs {H.shape}")
    V = _expm_herm(0.5 * (H + H.conj().T), 2 * math.pi / Omega)
    return float(np.linalg.norm(U - V, 2))


def floquet_hamiltonian(U: np.ndarray, Omega: float) -> np.ndarray:
    """Principal-branch ``H_F = i log(U) / T``."""
    T = 2 * math.pi / Omega
    L = sla.logm(U)
    HF = 1j * L / T
    return 0.5 * (HF + HF.conj().T)


def heating_probe(H1: SparseOperator, Hm1: SparseOperator, Omega: float, state,
                  nperiods: int, Heff=None, nsteps: int = 1024) -> np.ndarray:
    """Stroboscopic ``<Heff>(m T)`` for ``m = 0 .. nperiods``."""
    if H1.dim > DENSE_GUARD:
        raise ValueError(f"dimension {H1.dim} exceeds the dense guard {DENSE_GUARD}")
    H = _dense(Heff if Heff is not None else magnus_first_order(H1, Hm1, Omega))
    psi = np.asarray(state, dtype=np.complex128)
    psi = psi / np.linalg.norm(psi)
    out = [float(np.real(psi.conj() @ H @ psi))]
    if nperiods == 0:
        return np.array(out)
    U = one_period_propagator(H1, Hm1, Omega, nsteps)
    for _ in range(nperiods):
        psi = U @ psi
        out.append(float(np.real(psi.conj() @ H @ psi)))
    return np.array(out)


def defect_scan(H1_builder, Heff_builder, omegas, nsteps: int = 1024) -> np.ndarray:
    """Defect for each Omega. Builders take Omega and return operators."""
    out = []
    for Om in omegas:
        H1, Hm1 = H1_builder(Om)
        U = one_period_propagator(H1, Hm1, Om, nsteps)
        out.append(magnus_defect(U, Heff_builder(Om), Om))
    return np.array(out)


def loglog_slope(x, y) -> float:
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(x, y, 1)[0])


def write_defect_csv(path, omegas, defects) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega[J]", "defect[1]"])
        for o, d in zip(omegas, defects):
            w.writerow([f"{o:.17g}", f"{d:.17g}"])
    return path
