"""Laser-assisted tunneling scheme for the square-lattice model.

Energies and frequencies are angular (hbar = 1): a frequency of ``f`` Hz
is ``2 pi f`` rad/s and an energy ``J/h = f`` Hz is ``J = 2 pi f``.
Site ``(m, n)`` sits at ``x = m a``, ``y = n a`` and ``k = pi / (2a)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

TWO_PI = 2 * math.pi
DEFAULT_BEAMS = (
    (0.0, math.pi / 4, math.pi / 2),          # red dashed
    (math.pi / 2, -math.pi / 4, math.pi / 2), # blue dashed
    (math.pi, 3 * math.pi / 4, 0.0),          # blue solid
    (math.pi / 2, math.pi / 4, 0.0),          # red solid
)


def hz(f: float) -> float:
    """Angular frequency of ``f`` Hz."""
    return TWO_PI * f


@dataclass(frozen=True)
class DriveParams:
    J: float
    Ex: float
    Ey: float
    Delta_y: float
    Delta_x: float
    omega: float
    Omega: float
    a: float = 1.0
    beams: tuple = DEFAULT_BEAMS      # (phi_x, phi_y, theta0) per gamma
    theta0_x: float = 0.0             # phase of the horizontal running pair

    @property
    def V0(self) -> float:
        return 16.0 * self.Ex * self.Ey

    @property
    def k(self) -> float:
        return math.pi / (2 * self.a)

    @property
    def resonant(self) -> bool:
        return math.isclose(self.omega, self.Delta_y, rel_tol=1e-12)

    @property
    def J_eff(self) -> float:
        return self.J * self.V0 / (math.sqrt(2) * self.Delta_y)

    @property
    def Jx_eff(self) -> float:
        return self.J * 2 * math.sqrt(2) * self.Ex * self.Ey / self.Delta_x

    @property
    def bessel_arg(self) -> float:
        """Largest modulation index ``sqrt(2) V0 / Delta_y``."""
        return math.sqrt(2) * self.V0 / self.Delta_y

    @property
    def perturbative_ratio(self) -> float:
        return self.V0 / self.omega


def rb87_preset() -> DriveParams:
    """omega = 2 pi x 5 kHz, Omega = 2 pi x 1 kHz, J/h = 1 kHz and a
    modulation index 0.2, giving J_eff / h = 100 Hz."""
    J = hz(1000.0)
    omega = hz(5000.0)
    V0 = 0.2 * omega / math.sqrt(2)
    E = math.sqrt(V0 / 16.0)
    return DriveParams(J=J, Ex=E, Ey=E, Delta_y=omega, Delta_x=omega, omega=omega, Omega=hz(1000.0))


def bessel_j(nu: int, x: float, terms: int = 30) -> float:
    """Power series of the Bessel function of the first kind."""
    s = 0.0
    for n in range(terms):
        s += (-1) ** n / (math.factorial(n) * math.factorial(n + nu)) * (x / 2) ** (2 * n + nu)
    return s


# --------------------------------------------------------------------------
# potentials
# --------------------------------------------------------------------------

def beam_potential(p: DriveParams, gamma: int, m: int, n: int, t: float) -> tuple:
    """``(V_cst, V_2Omega, V_cross)`` of beam pair ``gamma`` (1-based)."""
    if not 1 <= gamma <= len(p.beams):
        raise ValueError(f"gamma must be in 1..{len(p.beams)}")
    px, py, th = p.beams[gamma - 1]
    cx = math.cos(m * math.pi / 2 + px)
    cy = math.cos(n * math.pi / 2 + py)
    v_cst = 4 * p.Ex ** 2 * cx ** 2 + 8 * p.Ey ** 2 * cy ** 2
    v_2 = 8 * p.Ey ** 2 * math.cos(2 * p.Omega * t + 2 * th) * cy ** 2
    v_x = 16 * p.Ex * p.Ey * math.cos(p.omega * t) * math.cos(p.Omega * t + th) * cx * cy
    return v_cst, v_2, v_x


def summed_potential(p: DriveParams, m: int, n: int, t: float) -> tuple:
    parts = np.array([beam_potential(p, g, m, n, t) for g in range(1, len(p.beams) + 1)])
    return tuple(parts.sum(axis=0))


def cancellation_residuals(p: DriveParams, nsamples: int = 1000, seed: int = 0,
                           extent: int = 64) -> dict:
    """Largest deviations of the beam sums from their site-independent forms.

    Times are drawn within one slow period ``2 pi / Omega``; residuals are
    divided by the natural scales ``8 Ey^2`` and ``8 Ex^2 + 16 Ey^2``.
    """
    rng = np.random.default_rng(seed)
    cst_ref = 8 * p.Ex ** 2 + 16 * p.Ey ** 2
    scale_2 = 8 * p.Ey ** 2 or 1.0
    r2 = rc = 0.0
    for _ in range(nsamples):
        m, n = (int(v) for v in rng.integers(-extent, extent, size=2))
        t = float(rng.uniform(0.0, TWO_PI / p.Omega))
        v_cst, v_2, _ = summed_potential(p, m, n, t)
        r2 = max(r2, abs(v_2) / scale_2)
        rc = max(rc, abs(v_cst - cst_ref) / (cst_ref or 1.0))
    return {"v2omega_rel": r2, "vcst_rel": rc, "vcst_expected": cst_ref, "nsamples": nsamples}


def spatial_coefficient(p: DriveParams, gamma: int, m: int, n: int) -> float:
    """``cos(m pi/2 + phi_x) sin(n pi/2 + pi/4 + phi_y)`` for bond (m,n)-(m,n+1)."""
    px, py, _ = p.beams[gamma - 1]
    return math.cos(m * math.pi / 2 + px) * math.sin(n * math.pi / 2 + math.pi / 4 + py)


@dataclass
class OwnershipReport:
    owners: dict = field(default_factory=dict)       # (m, n) -> (gamma, sign, theta0)
    unowned: list = field(default_factory=list)
    multiple: list = field(default_factory=list)     # ((m, n), [gammas])
    non_unit: list = field(default_factory=list)     # ((m, n), gamma, value)

    @property
    def ok(self) -> bool:
        return not (self.unowned or self.multiple or self.non_unit)


def modulation_pattern(p: DriveParams, Lx: int = 4, Ly: int = 4, tol: float = 1e-12) -> OwnershipReport:
    """Which beam pair drives each vertical bond ``(m, n) - (m, n+1)``."""
    rep = OwnershipReport()
    for m in range(Lx):
        for n in range(Ly):
            hits = []
            for g in range(1, len(p.beams) + 1):
                c = spatial_coefficient(p, g, m, n)
                if abs(c) > tol:
                    hits.append((g, c))
            if not hits:
                rep.unowned.append((m, n))
            elif len(hits) > 1:
                rep.multiple.append(((m, n), [g for g, _ in hits]))
            else:
                g, c = hits[0]
                if abs(abs(c) - 1) > tol:
                    rep.non_unit.append(((m, n), g, c))
                else:
                    rep.owners[(m, n)] = (g, int(round(c)), p.beams[g - 1][2])
    return rep


# --------------------------------------------------------------------------
# effective hoppings and Peierls phases
# --------------------------------------------------------------------------

def site_phase(m: int, n: int) -> float:
    return (m - n + 1) * math.pi / 2


def peierls_phase(m: int, n: int) -> float:
    """Horizontal Peierls phase of the hop ``(m, n) -> (m+1, n)``."""
    s = site_phase(m + 1, n) + site_phase(m, n)
    return -s / 2 if m % 2 else s / 2 + math.pi


def effective_hoppings(p: DriveParams, t: float, Lx: int = 4, Ly: int = 4, exact_bessel: bool = False,
                       convention: str = "default") -> dict:
    """Complex amplitudes of the lowest-order Floquet Hamiltonian at time ``t``.

    Keys are ``("v", m, n)`` for ``(m, n) -> (m, n+1)`` and ``("h", m, n)``
    for ``(m, n) -> (m+1, n)``; values multiply ``a^dag_dst a_src``.
    ``exact_bessel`` replaces ``x/2`` by the series ``J_1(x)``; ``convention``
    is as in :func:`bond_phases`.
    """
    sgn = -1.0 if convention == "default" else 1.0
    rep = modulation_pattern(p, Lx, Ly)
    out = {}
    for m in range(Lx):
        for n in range(Ly):
            total = 0.0
            for g in range(1, len(p.beams) + 1):
                c = spatial_coefficient(p, g, m, n)
                if abs(c) < 1e-12:
                    continue
                th = p.beams[g - 1][2]
                if exact_bessel:
                    x = math.sqrt(2) * p.V0 * math.cos(p.Omega * t + th) * c / p.Delta_y
                    total += p.J * bessel_j(1, x)
                else:
                    total += p.J_eff * math.cos(p.Omega * t + th) * c
            out[("v", m, n)] = total
            amp = p.Jx_eff * math.cos(p.Omega * t + p.theta0_x)
            out[("h", m, n)] = amp * np.exp(1j * sgn * peierls_phase(m, n))
    out["_report"] = rep
    return out


def bond_phases(p: DriveParams, Lx: int, Ly: int, convention: str = "default") -> tuple:
    """Static hop phases ``(h[m, n], v[m, n])`` on forward bonds.

    ``default`` attaches the Peierls phase to the hop ``m+1 -> m`` and yields
    a homogeneous +pi/2; ``forward`` attaches it to ``m -> m+1`` and yields
    -pi/2. Vertical sign factors enter as ``pi``.
    """
    if convention not in ("default", "forward"):
        raise ValueError(f"unknown convention {convention!r}; expected 'default' or 'forward'")
    rep = modulation_pattern(p, Lx, Ly)
    if not rep.ok:
        raise ValueError(f"bond ownership is not a partition: {len(rep.unowned)} unowned, "
                         f"{len(rep.multiple)} multiply owned, {len(rep.non_unit)} non-unit")
    h = np.zeros((Lx, Ly))
    v = np.zeros((Lx, Ly))
    sgn = -1.0 if convention == "default" else 1.0
    for m in range(Lx):
        for n in range(Ly):
            h[m, n] = sgn * peierls_phase(m, n)
            v[m, n] = 0.0 if rep.owners[(m, n)][1] > 0 else math.pi
    return h, v


def flux_map_from_phases(h: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Counterclockwise flux of each plaquette with lower-left corner (m, n)."""
    Lx, Ly = h.shape
    F = np.zeros((Lx - 1, Ly - 1))
    for m in range(Lx - 1):
        for n in range(Ly - 1):
            F[m, n] = h[m, n] + v[m + 1, n] - h[m, n + 1] - v[m, n]
    return np.mod(F, TWO_PI)


class FluxInhomogeneity(AssertionError):
    def __init__(self, offending, target):
        self.offending = offending
        super().__init__(f"{len(offending)} plaquettes deviate from {target:.6g}: {offending[:8]}")


def peierls_flux_map(p: DriveParams, Lx: int = 4, Ly: int = 4, convention: str = "default",
                     staggering: bool = True, target: float | None = math.pi / 2,
                     tol: float = 1e-12) -> np.ndarray:
    """Plaquette flux grid; checks homogeneity against ``target`` when given.

    ``staggering=False`` drops the horizontal Peierls phases, leaving only
    the vertical sign pattern.
    """
    h, v = bond_phases(p, Lx + 1, Ly + 1, convention)
    if not staggering:
        h = np.zeros_like(h)
    F = flux_map_from_phases(h, v)
    if target is not None:
        d = np.abs(np.mod(F - target + math.pi, TWO_PI) - math.pi)
        bad = [(int(m), int(n), float(F[m, n])) for m, n in zip(*np.nonzero(d > tol))]
        if bad:
            raise FluxInhomogeneity(bad, target)
    return F


def drive_gauge(p: DriveParams, spec, convention: str = "default"):
    """GaugeField on an open square ``spec`` carrying the drive's bond
    phases and theta pattern."""
    from .lattice import GaugeField
    if spec.kind != "square" or any(spec.periodic):
        raise ValueError("the drive gauge is defined on open square clusters")
    h, v = bond_phases(p, spec.Lx, spec.Ly, convention)
    rep = modulation_pattern(p, spec.Lx, spec.Ly)
    B = np.zeros(spec.nbonds)
    theta = np.zeros(spec.nbonds)
    for b, (s, _) in enumerate(spec.bonds):
        m, n = spec.coords[s]
        if spec.bond_class[b] == "h":
            B[b] = h[m, n]
            theta[b] = p.theta0_x
        else:
            B[b] = v[m, n]
            theta[b] = rep.owners[(m, n)][2]
    return GaugeField(spec, B, theta, math.pi / 2, 0.0, 0.0, np.zeros(spec.nsites),
                      (0.0, 0.0), 1, "drive")


@dataclass
class HierarchyReport:
    ratios: dict
    thresholds: dict
    passed: dict

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def hierarchy_check(p: DriveParams, J_eff: float | None = None,
                    thresholds=(5.0, 5.0, 5.0)) -> HierarchyReport:
    """Ratios omega/J, omega/Omega and Omega/J_eff against thresholds."""
    J_eff = p.J_eff if J_eff is None else J_eff
    ratios = {
        "omega/J": p.omega / p.J if p.J else math.inf,
        "omega/Omega": p.omega / p.Omega,
        "Omega/J_eff": p.Omega / J_eff if J_eff else math.inf,
    }
    th = dict(zip(ratios, thresholds))
    passed = {k: bool(ratios[k] >= th[k] * (1 - 1e-12)) for k in ratios}
    return HierarchyReport(ratios, th, passed)


def with_beam(p: DriveParams, gamma: int, phi_x=None, phi_y=None, theta0=None) -> DriveParams:
    beams = [list(b) for b in p.beams]
    b = beams[gamma - 1]
    if phi_x is not None:
        b[0] = phi_x
    if phi_y is not None:
        b[1] = phi_y
    if theta0 is not None:
        b[2] = theta0
    return replace(p, beams=tuple(tuple(x) for x in beams))
