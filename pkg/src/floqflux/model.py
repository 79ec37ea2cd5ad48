"""Builder inputs: everything needed to rebuild a Hamiltonian at any twist."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np

from .hamiltonians import SparseOperator, build_heff, build_hopping
from .hilbert import FockBasis, build_basis
from .lattice import GaugeField, LatticeSpec, assign_gauge, build_lattice

MODEL_KINDS = ("heff", "hopping")


@dataclass(frozen=True)
class ModelSpec:
    """Lattice, gauge, couplings and sector of one Hamiltonian family.

    ``model="heff"`` is the correlated-hopping effective Hamiltonian,
    ``model="hopping"`` plain nearest-neighbour hopping with amplitude ``J_perp``.
    """

    kind: str = "square"
    Lx: int = 4
    Ly: int = 4
    boundary_x: str = "periodic"
    boundary_y: str = "periodic"
    phi: float = 0.0
    alpha: float = 0.0
    mu: float = 0.0
    J_par: float = 1.0
    J_perp: float = 1.0
    Omega: float = 10.0
    theta_scheme: str | None = None
    sector: tuple = (4, 4)
    model: str = "heff"
    alpha_sign: int = 1
    twist_species: str = "total"
    sites: tuple | None = None

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ValueError(f"model must be one of {MODEL_KINDS}, got {self.model!r}")
        sector = self.sector
        sector = (int(sector),) if np.ndim(sector) == 0 else tuple(int(v) for v in sector)
        object.__setattr__(self, "sector", sector)
        if self.sites is not None:
            object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelSpec":
        doc = dict(doc)
        if "dims" in doc:
            doc["Lx"], doc["Ly"] = doc.pop("dims")
        if "boundary" in doc:
            doc["boundary_x"], doc["boundary_y"] = doc.pop("boundary")
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise KeyError(f"unknown model keys: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sector"] = list(self.sector)
        if self.sites is not None:
            d["sites"] = list(self.sites)
        return d

    @cached_property
    def lattice(self) -> LatticeSpec:
        return build_lattice(self.kind, self.Lx, self.Ly, self.boundary_x, self.boundary_y)

    @cached_property
    def gauge(self) -> GaugeField:
        return assign_gauge(self.lattice, self.phi, self.alpha, self.mu, self.theta_scheme,
                            alpha_sign=self.alpha_sign).with_twist((0.0, 0.0), self.twist_species)

    @cached_property
    def basis(self) -> FockBasis:
        sector = self.sector[0] if len(self.sector) == 1 else self.sector
        return build_basis(self.lattice, sector, sites=self.sites)

    @property
    def t_perp(self) -> float:
        return 2.0 * self.J_perp ** 2 / self.Omega

    @property
    def t_par(self) -> float:
        return 2.0 * self.J_perp * self.J_par / self.Omega

    def hamiltonian(self, twist=(0.0, 0.0)) -> SparseOperator:
        g = self.gauge.with_twist(twist)
        if self.model == "heff":
            return build_heff(self.lattice, g, self.J_par, self.J_perp, self.Omega, self.mu, self.basis)
        return build_hopping(self.lattice, g, self.J_perp, self.basis, self.mu)

    def with_(self, **kw) -> "ModelSpec":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(kw)
        return ModelSpec(**d)
