"""Hard-core boson Fock bases in fixed particle-number sectors."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from math import comb

import numpy as np

from . import kernels

log = logging.getLogger(__name__)

MAX_SITES = 64


def _masks_from_combos(sites, n):
    """All bitmasks with exactly ``n`` bits chosen from ``sites``."""
    sites = [int(s) for s in sites]
    if n == 0:
        return np.zeros(1, dtype=np.uint64)
    out = np.empty(comb(len(sites), n), dtype=np.uint64)
    weights = [np.uint64(1) << np.uint64(s) for s in sites]
    for c, combo in enumerate(itertools.combinations(range(len(sites)), n)):
        m = np.uint64(0)
        for a in combo:
            m |= weights[a]
        out[c] = m
    return out


@dataclass(frozen=True, eq=False)
class FockBasis:
    nsites: int
    sector: tuple            # (N,) or (Na, Nb)
    states: np.ndarray       # uint64, ascending
    sublattice: np.ndarray   # (nsites,) 0 = A, 1 = B
    active: np.ndarray       # sites allowed to hold particles

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    @property
    def split(self) -> bool:
        return len(self.sector) == 2

    def __len__(self):
        return self.dim

    def index_of(self, mask) -> int:
        """Ordinal of ``mask``; raises KeyError if it is not in the basis."""
        m = np.uint64(mask)
        r = int(np.searchsorted(self.states, m))
        if r >= self.dim or self.states[r] != m:
            raise KeyError(f"state {int(mask):#x} not in basis")
        return r

    def lookup(self, masks: np.ndarray) -> np.ndarray:
        """Vectorised ordinals, -1 for masks outside the basis."""
        masks = np.asarray(masks, dtype=np.uint64)
        r = np.searchsorted(self.states, masks)
        ok = r < self.dim
        ok[ok] = self.states[r[ok]] == masks[ok]
        return np.where(ok, r, -1)

    def occupations(self) -> np.ndarray:
        """(dim, nsites) int8 occupation table."""
        return kernels.occupations(self.states, self.nsites)

    def counts(self, mask) -> tuple:
        m = int(mask)
        occ = np.array([(m >> i) & 1 for i in range(self.nsites)])
        return int(occ[self.sublattice == 0].sum()), int(occ[self.sublattice == 1].sum())

    def number_operator_diag(self, which: str = "total") -> np.ndarray:
        occ = self.occupations().astype(np.int64)
        if which == "total":
            return occ.sum(axis=1)
        idx = 0 if which == "A" else 1
        return occ[:, self.sublattice == idx].sum(axis=1)


def build_basis(spec, sector, sites=None) -> FockBasis:
    """Enumerate the sector. ``sector`` is an int (total N) or ``(Na, Nb)``.

    ``sites`` optionally restricts particles to a subset of the lattice (for
    example a single decoupled chain); other sites stay empty.
    """
    nsites = spec.nsites
    if nsites > MAX_SITES:
        raise ValueError(f"{nsites} sites exceed the {MAX_SITES}-bit state encoding")
    sub = np.asarray(spec.sublattice, dtype=np.int64)
    active = np.arange(nsites) if sites is None else np.unique(np.asarray(sites, dtype=np.int64))
    if active.size and (active.min() < 0 or active.max() >= nsites):
        raise ValueError("active site outside the lattice")
    if np.ndim(sector) == 0 or len(tuple(np.atleast_1d(sector))) == 1:
        N = int(np.atleast_1d(sector)[0])
        if not 0 <= N <= active.size:
            raise ValueError(f"N={N} outside [0, {active.size}]")
        states = _masks_from_combos(active, N)
        sector = (N,)
    else:
        Na, Nb = (int(v) for v in sector)
        A = active[sub[active] == 0]
        B = active[sub[active] == 1]
        if not (0 <= Na <= A.size and 0 <= Nb <= B.size):
            raise ValueError(f"sector (Na={Na}, Nb={Nb}) exceeds sublattice sizes ({A.size}, {B.size})")
        ma = _masks_from_combos(A, Na)
        mb = _masks_from_combos(B, Nb)
        states = (ma[:, None] | mb[None, :]).ravel()
        sector = (Na, Nb)
    states = np.sort(states)
    return FockBasis(nsites, sector, states, sub, active)


def apply_hop(basis: FockBasis, ordinal: int, src: int, dst: int) -> tuple:
    """Move a boson ``src -> dst``. Returns ``(new_ordinal, amplitude)``.

    The amplitude is 0 (and the ordinal -1) when ``src`` is empty, ``dst`` is
    occupied, or the result leaves the basis.
    """
    if not 0 <= ordinal < basis.dim:
        raise IndexError(f"ordinal {ordinal} out of range [0, {basis.dim})")
    if src == dst or not (0 <= src < basis.nsites and 0 <= dst < basis.nsites):
        raise ValueError(f"invalid hop {src} -> {dst}")
    s = int(basis.states[ordinal])
    if not (s >> src) & 1 or (s >> dst) & 1:
        return -1, 0
    new = s ^ (1 << src) ^ (1 << dst)
    r = basis.lookup(np.array([new], dtype=np.uint64))[0]
    if r < 0:
        return -1, 0
    return int(r), 1
