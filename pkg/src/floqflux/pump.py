"""Flux threading: spectral flow, adiabatic charge pumping and twist-space
Chern numbers.

The threaded flux multiplies every hop crossing the chosen seam by
``e^{i Phi}``; in the effective model it enters NNN phases through the sum
of the two constituent hops.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .hamiltonians import SparseOperator
from .model import ModelSpec
from .observables import low_spectrum

log = logging.getLogger(__name__)

AXES = {"x": 0, "y": 1}


class PumpAbort(RuntimeError):
    """Adiabatic tracking lost the state (overlap below the floor)."""


class DegeneracyError(RuntimeError):
    """Ground state degenerate at a twist point."""


@dataclass
class FlowSeries:
    grid: np.ndarray
    energies: np.ndarray
    overlaps: np.ndarray
    charges: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, float)
        self.energies = np.asarray(self.energies, float)
        self.overlaps = np.asarray(self.overlaps, float)
        if self.charges is not None:
            self.charges = np.asarray(self.charges, float)

    @property
    def peak_to_peak(self) -> float:
        return float(np.ptp(self.energies))

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["phi[rad]", "energy[J]", "charge[1]", "overlap[1]"])
            for i, p in enumerate(self.grid):
                q = "" if self.charges is None else f"{self.charges[i]:.17g}"
                ov = f"{self.overlaps[i - 1]:.17g}" if i > 0 else "1"
                w.writerow([f"{p:.17g}", f"{self.energies[i]:.17g}", q, ov])
        return path


def _axis_index(model: ModelSpec, axis) -> int:
    if axis not in AXES:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    a = AXES[axis]
    if not model.lattice.periodic[a]:
        raise ValueError(f"cannot thread flux along open axis {axis}")
    return a


def threaded_hamiltonian(model: ModelSpec, Phi: float, axis: str = "y") -> SparseOperator:
    """Hamiltonian with flux ``Phi`` through the ``axis`` seam."""
    a = _axis_index(model, axis)
    twist = [0.0, 0.0]
    twist[a] = float(Phi)
    return model.hamiltonian(tuple(twist))


def _manifold_overlap(prev: np.ndarray, vecs: np.ndarray) -> float:
    """Norm of the projection of ``prev`` onto span(vecs)."""
    return float(np.linalg.norm(vecs.conj().T @ prev))


def _flux_grid(npoints: int) -> np.ndarray:
    return np.linspace(0.0, 2 * math.pi, npoints)


def spectral_flow(model: ModelSpec, axis: str = "y", npoints: int = 9, seed: int = 0,
                  workers: int = 1) -> FlowSeries:
    """Ground energy over ``Phi`` in ``[0, 2 pi]``."""
    if npoints < 8:
        raise ValueError("spectral flow needs at least 8 points")
    _axis_index(model, axis)
    grid = _flux_grid(npoints)

    def solve(Phi):
        H = threaded_hamiltonian(model, Phi, axis)
        w, v = low_spectrum(H, min(4, H.dim), seed)
        deg = int(np.count_nonzero(w - w[0] < 1e-8))
        return w[0], v[:, :deg]

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            res = list(ex.map(solve, grid))
    else:
        res = [solve(p) for p in grid]
    E = np.array([r[0] for r in res])
    ov = []
    for (_, a), (_, b) in zip(res, res[1:]):
        ov.append(min(1.0, _manifold_overlap(a[:, 0], b)))
    return FlowSeries(grid, E, np.array(ov), None, {"axis": axis, "peak_to_peak": float(np.ptp(E))})


def left_charge_diag(model: ModelSpec, axis_open: int = 0) -> np.ndarray:
    """Total boson number on the lower half of the open direction, per basis state."""
    L = model.lattice
    n = (L.Lx, L.Ly)[axis_open]
    if n % 2:
        raise ValueError(f"open length {n} is odd; the half-cylinder cut is ambiguous")
    left = L.coords[:, axis_open] < n // 2
    occ = model.basis.occupations()
    return occ[:, left].sum(axis=1).astype(float)


def charge_pump(model: ModelSpec, npoints: int = 17, floor: float = 0.5, nstates: int = 4,
                return_path: bool = False, seed: int = 0) -> FlowSeries:
    """Thread ``2 pi`` through y on an x-open cylinder and track the state.

    ``return_path`` appends the reversed grid so the pumped charge should
    come back to zero.
    """
    L = model.lattice
    if L.periodic != (False, True):
        raise ValueError("charge pumping needs boundary_x='open', boundary_y='periodic'")
    qdiag = left_charge_diag(model, 0)
    grid = _flux_grid(npoints)
    path = np.concatenate([grid, grid[-2::-1]]) if return_path else grid
    energies, charges, overlaps = [], [], []
    prev = None
    for i, Phi in enumerate(path):
        H = threaded_hamiltonian(model, Phi, "y")
        w, v = low_spectrum(H, min(nstates, H.dim), seed)
        if prev is None:
            pick = 0
            ov = 1.0
        else:
            amps = np.abs(v.conj().T @ prev)
            pick = int(np.argmax(amps))
            ov = float(amps[pick])
            if ov < floor:
                raise PumpAbort(f"overlap {ov:.3f} < {floor} at step {i} (Phi={Phi:.6g}); "
                                f"low levels {np.round(w, 8).tolist()} suggest a gap closing")
            overlaps.append(ov)
        psi = v[:, pick]
        # fix the phase against the previous state for smooth tracking
        if prev is not None:
            ph = np.vdot(prev, psi)
            psi = psi * (np.conj(ph) / abs(ph))
        prev = psi
        energies.append(float(w[pick]))
        charges.append(float(np.real(np.vdot(psi, qdiag * psi))))
    charges = np.array(charges) - charges[0]
    return FlowSeries(path, np.array(energies), np.array(overlaps), charges,
                      {"floor": floor, "return_path": return_path})


# --------------------------------------------------------------------------
# Chern number
# --------------------------------------------------------------------------

def fukui_chern(vecs) -> tuple:
    """Lattice Chern number from an ``(nx, ny)`` grid of normalized vectors.

    Each plaquette's Berry flux is the principal argument of the four-link
    product; the result is the sum of integer branch corrections, hence an
    exact integer. Returns ``(chern, plaquette_flux)``.
    """
    nx, ny = len(vecs), len(vecs[0])

    def link(a, b):
        z = np.vdot(a, b)
        if abs(z) < 1e-12:
            raise DegeneracyError("vanishing link overlap; grid too coarse or gap closed")
        return math.atan2(z.imag, z.real)

    Ax = np.array([[link(vecs[i][j], vecs[(i + 1) % nx][j]) for j in range(ny)] for i in range(nx)])
    Ay = np.array([[link(vecs[i][j], vecs[i][(j + 1) % ny]) for j in range(ny)] for i in range(nx)])
    flux = np.zeros((nx, ny))
    windings = 0
    for i in range(nx):
        for j in range(ny):
            raw = Ax[i, j] + Ay[(i + 1) % nx, j] - Ax[i, (j + 1) % ny] - Ay[i, j]
            n = -math.floor((raw + math.pi) / (2 * math.pi))
            flux[i, j] = raw + 2 * math.pi * n
            windings += n
    return int(windings), flux


def many_body_chern(model: ModelSpec, grid_nx: int = 6, grid_ny: int = 6, gap_tol: float = 1e-6,
                    seed: int = 0, workers: int = 1, return_info: bool = False):
    """Chern number of the ground state over the twist torus."""
    L = model.lattice
    if L.periodic != (True, True):
        raise ValueError("Chern numbers need a torus")
    if grid_nx < 4 or grid_ny < 4:
        raise ValueError("twist grid must be at least 4x4")
    if model.basis.dim == 1:
        return (0, {"min_gap": math.inf}) if return_info else 0
    pts = [(i, j) for i in range(grid_nx) for j in range(grid_ny)]

    def solve(p):
        i, j = p
        tw = (2 * math.pi * i / grid_nx, 2 * math.pi * j / grid_ny)
        H = model.hamiltonian(tw)
        w, v = low_spectrum(H, min(2, H.dim), seed)
        gap = float(w[1] - w[0]) if len(w) > 1 else math.inf
        return p, tw, gap, v[:, 0]

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            res = list(ex.map(solve, pts))
    else:
        res = [solve(p) for p in pts]
    vecs = [[None] * grid_ny for _ in range(grid_nx)]
    min_gap = math.inf
    for (i, j), tw, gap, v in res:
        if gap < gap_tol:
            raise DegeneracyError(f"ground state degenerate at twist ({tw[0]:.6g}, {tw[1]:.6g}): gap {gap:.3e}")
        min_gap = min(min_gap, gap)
        vecs[i][j] = v
    c, _ = fukui_chern(vecs)
    info = {"grid": [grid_nx, grid_ny], "chern": c, "min_gap": min_gap}
    return (c, info) if return_info else c


def hofstadter_bloch(p: int, q: int, kx: float, ky: float, J: float = 1.0) -> np.ndarray:
    """Bloch matrix of ``-J`` hopping at flux ``2 pi p / q`` on a ``q x 1``
    magnetic cell (Landau gauge, vertical phase ``phi * x``)."""
    phi = 2 * math.pi * p / q
    H = np.zeros((q, q), dtype=np.complex128)
    for x in range(q):
        H[x, x] = -2 * J * math.cos(phi * x + ky)
        dst = (x + 1) % q
        amp = -J * (np.exp(1j * kx) if x == q - 1 else 1.0)
        H[dst, x] += amp
        H[x, dst] += np.conj(amp)
    return H


def hofstadter_band_chern(p: int, q: int, band: int = 0, nk: int = 24) -> int:
    """Fukui Chern number of one Hofstadter band from the Bloch problem."""
    vecs = [[None] * nk for _ in range(nk)]
    for i in range(nk):
        for j in range(nk):
            _, v = np.linalg.eigh(hofstadter_bloch(p, q, 2 * math.pi * i / nk, 2 * math.pi * j / nk))
            vecs[i][j] = v[:, band]
    return fukui_chern(vecs)[0]


def write_chern_json(path, info: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(info, indent=2, sort_keys=True))
    return path
