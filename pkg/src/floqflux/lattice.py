"""Square and honeycomb clusters, bond catalogs and background gauge fields.

Conventions
-----------
* A directed *hop* ``u -> v`` along bond ``b`` carries the phase ``beta``
  with ``beta = B[b]`` when ``(u, v) == bonds[b]`` and ``-B[b]`` otherwise,
  i.e. the operator ``e^{i beta} c_v^dag c_u`` appears in the Hamiltonian.
* Loop fluxes are sums of hop phases along the loop, counterclockwise
  loops enclosing positive area in lattice coordinates.
* Square sites are indexed row-major from the lower-left corner,
  ``s = y * Lx + x``; sublattice A is ``x + y`` even.
* Landau gauge: the upward vertical hop at column ``x`` carries ``phi * x``;
  on an x-periodic lattice the seam bond of row ``y`` carries
  ``-phi * Lx * y`` so every plaquette, including the seam, holds ``phi``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * math.pi
SUBLATTICE_NAMES = ("A", "B")
THETA_SCHEMES = ("square-red-bonds", "honeycomb-three-phase")


def wrap_phase(x):
    """Map angles to ``[0, 2 pi)``; values within 1e-12 of ``2 pi`` go to 0."""
    y = np.mod(x, TWO_PI)
    y = np.where(np.abs(y - TWO_PI) < 1e-12, 0.0, y)
    return float(y) if np.ndim(y) == 0 else y


def phase_distance(a, b):
    """Distance between two angles on the circle."""
    d = np.mod(np.asarray(a) - np.asarray(b) + math.pi, TWO_PI) - math.pi
    return np.abs(d)


@dataclass(frozen=True)
class Loop:
    """Closed path. ``sites`` is the visiting order, ``steps`` the directed
    edges (nn bond index or nnn path index, +1 along / -1 against the
    cataloged orientation)."""

    sites: tuple
    steps: tuple
    kind: str = "nn"
    label: str = ""


@dataclass(frozen=True)
class TriangleEdge:
    u: int
    v: int
    disp: tuple
    via: int | None = None


@dataclass(frozen=True)
class Triangle:
    """Three-site loop on one sublattice made of effective NNN hops.

    Square-lattice triangles are built counterclockwise and then reversed
    when exactly one of (base site on B, apex on the left) holds, so that
    every loop carries bare flux +pi/2. The label names the apex side."""

    sites: tuple
    edges: tuple
    label: str


@dataclass(frozen=True, eq=False)
class LatticeSpec:
    kind: str
    Lx: int
    Ly: int
    boundary_x: str
    boundary_y: str
    positions: np.ndarray      # (nsites, 2)
    coords: np.ndarray         # (nsites, 2) integer cell / site coordinates
    sublattice: np.ndarray     # (nsites,) 0 = A, 1 = B
    bonds: np.ndarray          # (nbonds, 2) src, dst
    bond_class: tuple          # 'h' / 'v' (square) or 0 / 1 / 2 (honeycomb)
    bond_disp: np.ndarray      # (nbonds, 2) displacement src -> dst
    bond_wrap: np.ndarray      # (nbonds, 2) seam crossings src -> dst
    nnn: np.ndarray            # (npath, 3) i, k, j : hop i -> j through k
    nnn_steps: np.ndarray      # (npath, 4) b1, d1, b2, d2
    nnn_disp: np.ndarray       # (npath, 2)
    plaquettes: tuple          # Loop objects over nn bonds
    triangles: tuple           # Triangle objects

    @property
    def nsites(self) -> int:
        return self.positions.shape[0]

    @property
    def nbonds(self) -> int:
        return self.bonds.shape[0]

    @property
    def periodic(self) -> tuple:
        return (self.boundary_x == "periodic", self.boundary_y == "periodic")

    @property
    def sites(self) -> list:
        """(index, position, sublattice label) triples."""
        return [(i, tuple(self.positions[i]), SUBLATTICE_NAMES[self.sublattice[i]])
                for i in range(self.nsites)]

    @property
    def nn_bonds(self) -> list:
        return [(int(i), int(k), c) for (i, k), c in zip(self.bonds, self.bond_class)]

    @property
    def nnn_hops(self) -> list:
        return [tuple(int(v) for v in row) for row in self.nnn]

    def sublattice_sites(self, which) -> np.ndarray:
        idx = SUBLATTICE_NAMES.index(which) if isinstance(which, str) else int(which)
        return np.nonzero(self.sublattice == idx)[0]

    def site_index(self, x: int, y: int, sub: int = 0) -> int:
        if self.kind == "square":
            return (y % self.Ly) * self.Lx + (x % self.Lx)
        return 2 * ((y % self.Ly) * self.Lx + (x % self.Lx)) + sub

    def has_parallel_bonds(self) -> bool:
        pairs = {tuple(sorted(map(int, b))) for b in self.bonds}
        return len(pairs) != self.nbonds

    def bonds_between(self, u: int, v: int) -> list:
        """Directed steps ``(bond, +-1)`` taking ``u`` to ``v``."""
        out = []
        for b, (s, d) in enumerate(self.bonds):
            if s == u and d == v:
                out.append((b, 1))
            elif s == v and d == u:
                out.append((b, -1))
        return out

    def incident(self) -> list:
        """Per site: list of ``(bond, direction, neighbor)`` leaving the site."""
        inc = [[] for _ in range(self.nsites)]
        for b, (s, d) in enumerate(self.bonds):
            inc[s].append((b, 1, int(d)))
            inc[d].append((b, -1, int(s)))
        return inc


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------

def _check_dims(kind, Lx, Ly, boundary_x, boundary_y):
    if kind not in ("square", "honeycomb"):
        raise ValueError(f"unknown lattice kind {kind!r}")
    for name, b in (("boundary_x", boundary_x), ("boundary_y", boundary_y)):
        if b not in ("open", "periodic"):
            raise ValueError(f"{name} must be 'open' or 'periodic', got {b!r}")
    if int(Lx) != Lx or int(Ly) != Ly or Lx < 2 or Ly < 2:
        raise ValueError(f"lattice dimensions must be integers >= 2, got {Lx}x{Ly}")
    if kind == "square":
        for L, b, ax in ((Lx, boundary_x, "x"), (Ly, boundary_y, "y")):
            if b == "periodic" and L % 2:
                raise ValueError(f"periodic {ax} needs an even length to stay bipartite (got {L})")
    elif (boundary_x, boundary_y) != ("periodic", "periodic"):
        raise ValueError("honeycomb clusters are supported on the torus only")


def build_lattice(kind: str, Lx: int, Ly: int,
                  boundary_x: str = "periodic", boundary_y: str = "periodic") -> LatticeSpec:
    """Build a square (Lx x Ly sites) or honeycomb (Lx x Ly unit cells) cluster."""
    _check_dims(kind, Lx, Ly, boundary_x, boundary_y)
    Lx, Ly = int(Lx), int(Ly)
    if kind == "square":
        geo = _square_geometry(Lx, Ly, boundary_x == "periodic", boundary_y == "periodic")
    else:
        geo = _honeycomb_geometry(Lx, Ly)
    positions, coords, sublattice, bonds, bclass, bdisp, bwrap, plaquettes = geo

    spec_partial = dict(kind=kind, Lx=Lx, Ly=Ly, boundary_x=boundary_x, boundary_y=boundary_y,
                        positions=positions, coords=coords, sublattice=sublattice,
                        bonds=bonds, bond_class=tuple(bclass), bond_disp=bdisp, bond_wrap=bwrap)
    nnn, steps, ndisp = _nnn_paths(len(positions), bonds, bdisp,
                                   skip_class="h" if kind == "square" else None, bclass=bclass)
    spec = LatticeSpec(**spec_partial, nnn=nnn, nnn_steps=steps, nnn_disp=ndisp,
                       plaquettes=tuple(plaquettes), triangles=())
    tris = _square_triangles(spec) if kind == "square" else _honeycomb_triangles(spec)
    object.__setattr__(spec, "triangles", tuple(tris))
    return spec


def _square_geometry(Lx, Ly, px, py):
    n = Lx * Ly
    positions = np.zeros((n, 2))
    coords = np.zeros((n, 2), dtype=np.int64)
    for y in range(Ly):
        for x in range(Lx):
            s = y * Lx + x
            positions[s] = (x, y)
            coords[s] = (x, y)
    sublattice = ((coords[:, 0] + coords[:, 1]) % 2).astype(np.int64)
    bonds, bclass, bdisp, bwrap = [], [], [], []
    hb = -np.ones((Lx, Ly), dtype=np.int64)
    vb = -np.ones((Lx, Ly), dtype=np.int64)
    for y in range(Ly):
        for x in range(Lx):
            s = y * Lx + x
            if x + 1 < Lx or px:
                hb[x, y] = len(bonds)
                bonds.append((s, y * Lx + (x + 1) % Lx))
                bclass.append("h")
                bdisp.append((1.0, 0.0))
                bwrap.append((1 if x + 1 == Lx else 0, 0))
    for y in range(Ly):
        for x in range(Lx):
            s = y * Lx + x
            if y + 1 < Ly or py:
                vb[x, y] = len(bonds)
                bonds.append((s, ((y + 1) % Ly) * Lx + x))
                bclass.append("v")
                bdisp.append((0.0, 1.0))
                bwrap.append((0, 1 if y + 1 == Ly else 0))
    plaquettes = []
    for y in range(Ly):
        for x in range(Lx):
            b0, b1 = hb[x, y], vb[(x + 1) % Lx, y]
            b2, b3 = hb[x, (y + 1) % Ly], vb[x, y]
            if x + 1 == Lx and not px or y + 1 == Ly and not py:
                continue
            s = y * Lx + x
            sites = (s, y * Lx + (x + 1) % Lx,
                     ((y + 1) % Ly) * Lx + (x + 1) % Lx, ((y + 1) % Ly) * Lx + x)
            plaquettes.append(Loop(sites, ((int(b0), 1), (int(b1), 1), (int(b2), -1), (int(b3), -1)),
                                   "nn", f"plaq({x},{y})"))
    return (positions, coords, sublattice, np.array(bonds, dtype=np.int64), bclass,
            np.array(bdisp), np.array(bwrap, dtype=np.int64), plaquettes)


_A1 = np.array([1.0, 0.0])
_A2 = np.array([0.5, math.sqrt(3) / 2])
_DELTA = np.array([0.0, 1.0 / math.sqrt(3)])


def _honeycomb_geometry(Lx, Ly):
    n = 2 * Lx * Ly
    positions = np.zeros((n, 2))
    coords = np.zeros((n, 2), dtype=np.int64)
    sublattice = np.zeros(n, dtype=np.int64)
    for y in range(Ly):
        for x in range(Lx):
            a = 2 * (y * Lx + x)
            r = x * _A1 + y * _A2
            positions[a], positions[a + 1] = r, r + _DELTA
            coords[a] = coords[a + 1] = (x, y)
            sublattice[a + 1] = 1
    # A(r) couples to B(r), B(r - a2), B(r + a1 - a2)
    offsets = ((0, 0), (0, -1), (1, -1))
    bonds, bclass, bdisp, bwrap = [], [], [], []
    for y in range(Ly):
        for x in range(Lx):
            a = 2 * (y * Lx + x)
            for c, (dx, dy) in enumerate(offsets):
                xb, yb = x + dx, y + dy
                b = 2 * ((yb % Ly) * Lx + xb % Lx) + 1
                bonds.append((a, b))
                bclass.append(c)
                bdisp.append(tuple(dx * _A1 + dy * _A2 + _DELTA))
                bwrap.append((xb // Lx, yb // Ly))
    # hexagons: A(x,y) B(x,y) A(x,y+1)... walk the six bonds of each hexagon
    return (positions, coords, sublattice, np.array(bonds, dtype=np.int64), bclass,
            np.array(bdisp), np.array(bwrap, dtype=np.int64), [])


def _nnn_paths(nsites, bonds, bdisp, skip_class=None, bclass=None):
    inc = [[] for _ in range(nsites)]
    for b, (s, d) in enumerate(bonds):
        inc[s].append((b, 1, int(d)))
        inc[d].append((b, -1, int(s)))
    paths, steps, disp = [], [], []
    for k in range(nsites):
        edges = inc[k]
        for a in range(len(edges)):
            for c in range(a + 1, len(edges)):
                b1, d1, i = edges[a]
                b2, d2, j = edges[c]
                if i == j:
                    continue
                # straight horizontal paths never survive the drive pattern
                if skip_class is not None and bclass[b1] == skip_class == bclass[b2]:
                    continue
                # i -> k runs against the step leaving k
                paths.append((i, k, j))
                steps.append((b1, -d1, b2, d2))
                disp.append(-d1 * bdisp[b1] + d2 * bdisp[b2])
    return (np.array(paths, dtype=np.int64).reshape(-1, 3),
            np.array(steps, dtype=np.int64).reshape(-1, 4),
            np.array(disp).reshape(-1, 2))


def _square_triangles(spec):
    tris = []
    Lx, Ly = spec.Lx, spec.Ly
    px, py = spec.periodic

    def valid(x, y):
        return (px or 0 <= x < Lx) and (py or 0 <= y < Ly)

    for y in range(Ly):
        for x in range(Lx):
            s = spec.site_index(x, y)
            # apex to the right, counterclockwise: bottom -> apex -> top
            if valid(x + 1, y + 1) and valid(x, y + 2):
                a, t = spec.site_index(x + 1, y + 1), spec.site_index(x, y + 2)
                if len({s, a, t}) == 3:
                    tris.append(Triangle((s, a, t), (TriangleEdge(s, a, (1, 1)), TriangleEdge(a, t, (-1, 1)),
                                                     TriangleEdge(t, s, (0, -2))), "right"))
            # apex to the left, counterclockwise: bottom -> top -> apex
            if valid(x - 1, y + 1) and valid(x, y + 2):
                a, t = spec.site_index(x - 1, y + 1), spec.site_index(x, y + 2)
                if len({s, a, t}) == 3:
                    tris.append(Triangle((s, t, a), (TriangleEdge(s, t, (0, 2)), TriangleEdge(t, a, (-1, -1)),
                                                     TriangleEdge(a, s, (1, -1))), "left"))
    # orient each loop along the direction whose bare correlated hops carry
    # +pi/2 under the red-bond pattern: flip B-based xor apex-left
    return [_reverse_triangle(t) if (spec.sublattice[t.sites[0]] == 1) != (t.label == "left") else t
            for t in tris]


def _reverse_triangle(t):
    edges = tuple(TriangleEdge(e.v, e.u, tuple(-np.asarray(e.disp)), e.via) for e in reversed(t.edges))
    return Triangle(tuple(reversed(t.sites)), edges, t.label)


def _honeycomb_triangles(spec):
    """Star triangles: the three neighbours of each site, counterclockwise."""
    tris = []
    for k, edges in enumerate(spec.incident()):
        if len(edges) != 3:
            continue
        ang = []
        for b, d, nb in edges:
            v = d * spec.bond_disp[b]
            ang.append(math.atan2(v[1], v[0]))
        order = np.argsort(ang)
        nbrs = [edges[o] for o in order]
        sites = tuple(e[2] for e in nbrs)
        tedges = []
        for a in range(3):
            (b1, d1, u), (b2, d2, v) = nbrs[a], nbrs[(a + 1) % 3]
            disp = tuple(np.round(-d1 * spec.bond_disp[b1] + d2 * spec.bond_disp[b2], 12))
            tedges.append(TriangleEdge(u, v, disp, via=k))
        tris.append(Triangle(sites, tuple(tedges), "star-" + SUBLATTICE_NAMES[spec.sublattice[k]]))
    return tris


# --------------------------------------------------------------------------
# gauge field
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaugeField:
    lattice: LatticeSpec
    B: np.ndarray              # per bond, hop phase src -> dst
    theta: np.ndarray          # per bond drive phase
    phi: float = 0.0
    alpha: float = 0.0
    mu: float = 0.0
    stripe_mu: np.ndarray = None
    twist: tuple = (0.0, 0.0)
    alpha_sign: int = 1
    theta_scheme: str = "custom"
    twist_species: str = "total"   # "total", "A" or "B" (NNN hops only)

    def with_twist(self, twist, species: str | None = None) -> "GaugeField":
        species = self.twist_species if species is None else species
        if species not in ("total", "A", "B"):
            raise ValueError(f"twist species must be total, A or B, got {species!r}")
        return replace(self, twist=(float(twist[0]), float(twist[1])), twist_species=species)

    def with_alpha(self, alpha) -> "GaugeField":
        if alpha and self.lattice.kind != "square":
            raise ValueError("staggered flux alpha is only supported on the square lattice")
        return replace(self, alpha=float(alpha))

    @property
    def hop_phase(self) -> np.ndarray:
        """Per-bond phase of the hop src -> dst including boundary twists."""
        w = self.lattice.bond_wrap
        return self.B + self.twist[0] * w[:, 0] + self.twist[1] * w[:, 1]

    def step_phase(self, bond: int, direction: int) -> float:
        return direction * self.hop_phase[bond]

    @property
    def nnn_sin(self) -> np.ndarray:
        """sin(theta_ik - theta_kj) for each cataloged path i -> k -> j."""
        st = self.lattice.nnn_steps
        return np.sin(self.theta[st[:, 0]] - self.theta[st[:, 2]])

    @property
    def nnn_alpha(self) -> np.ndarray:
        if self.alpha == 0.0:
            return np.zeros(len(self.lattice.nnn))
        d = self.lattice.nnn_disp
        vertical = (np.abs(d[:, 0]) < 1e-9) & (np.abs(np.abs(d[:, 1]) - 2) < 1e-9)
        return np.where(vertical, np.sign(d[:, 1]) * self.alpha * self.alpha_sign, 0.0)

    @property
    def nnn_B(self) -> np.ndarray:
        """B_ij = B_ik + B_kj accumulated along each path (with twists)."""
        L = self.lattice
        st = L.nnn_steps
        if self.twist_species == "total":
            hp = self.hop_phase
            return st[:, 1] * hp[st[:, 0]] + st[:, 3] * hp[st[:, 2]]
        w = st[:, 1:2] * L.bond_wrap[st[:, 0]] + st[:, 3:4] * L.bond_wrap[st[:, 2]]
        tw = w[:, 0] * self.twist[0] + w[:, 1] * self.twist[1]
        mine = L.sublattice[L.nnn[:, 0]] == SUBLATTICE_NAMES.index(self.twist_species)
        return st[:, 1] * self.B[st[:, 0]] + st[:, 3] * self.B[st[:, 2]] + np.where(mine, tw, 0.0)

    @property
    def nnn_phase(self) -> np.ndarray:
        """Phase of the correlated hop i -> j (NaN where the path is inactive).

        Includes the bare pi/2, a pi for a negative sin factor, and the
        staggered alpha.
        """
        s = self.nnn_sin
        ph = self.nnn_B + math.pi / 2 + self.nnn_alpha + np.where(s < 0, math.pi, 0.0)
        return np.where(np.abs(s) < 1e-12, np.nan, ph)

    def to_dict(self) -> dict:
        L = self.lattice
        return dict(kind=L.kind, dims=[L.Lx, L.Ly], boundary=[L.boundary_x, L.boundary_y],
                    phi=self.phi, alpha=self.alpha, mu=self.mu, theta_scheme=self.theta_scheme,
                    twist=list(self.twist), alpha_sign=self.alpha_sign)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def theta_pattern(spec: LatticeSpec, scheme: str) -> np.ndarray:
    """Drive phases per bond.

    ``square-red-bonds``: vertical bonds leaving an A site carry pi/2, all
    other bonds 0. ``honeycomb-three-phase``: 2 pi c / 3 for bond class c; on
    the square lattice horizontal bonds keep 0 and the vertical bond leaving
    ``(x, y)`` takes class ``(x + y) mod 3``.
    """
    if scheme not in THETA_SCHEMES:
        raise ValueError(f"unknown theta scheme {scheme!r}; expected one of {THETA_SCHEMES}")
    theta = np.zeros(spec.nbonds)
    if scheme == "square-red-bonds":
        if spec.kind != "square":
            raise ValueError("square-red-bonds needs a square lattice")
        for b, (s, _) in enumerate(spec.bonds):
            if spec.bond_class[b] == "v" and spec.sublattice[s] == 0:
                theta[b] = math.pi / 2
        return theta
    for b, (s, _) in enumerate(spec.bonds):
        if spec.kind == "honeycomb":
            c = spec.bond_class[b]
        else:
            x, y = spec.coords[s]
            c = (x + y) % 3 if spec.bond_class[b] == "v" else 0
        theta[b] = TWO_PI * c / 3
    return theta


def landau_B(spec: LatticeSpec, phi: float) -> np.ndarray:
    B = np.zeros(spec.nbonds)
    if phi == 0.0:
        return B
    if spec.kind != "square":
        raise ValueError("background plaquette flux is only implemented on the square lattice")
    px, py = spec.periodic
    if px and py:
        total = phi * spec.Lx * spec.Ly / TWO_PI
        if abs(total - round(total)) > 1e-9:
            raise ValueError(f"flux phi={phi} is not quantized on the {spec.Lx}x{spec.Ly} torus "
                             f"(total {total:.6g} flux quanta)")
    for b, (s, _) in enumerate(spec.bonds):
        x, y = spec.coords[s]
        if spec.bond_class[b] == "v":
            B[b] = phi * x
        elif spec.bond_wrap[b, 0]:
            B[b] = -phi * spec.Lx * y
    return B


def stripe_pattern(spec: LatticeSpec, mu: float) -> np.ndarray:
    """+mu on even columns, -mu on odd columns (vertical stripes)."""
    return np.where(spec.coords[:, 0] % 2 == 0, mu, -mu).astype(float)


def assign_gauge(spec: LatticeSpec, phi: float = 0.0, alpha: float = 0.0, mu: float = 0.0,
                 theta_scheme: str | None = None, twist=(0.0, 0.0), alpha_sign: int = 1) -> GaugeField:
    if theta_scheme is None:
        theta_scheme = "square-red-bonds" if spec.kind == "square" else "honeycomb-three-phase"
    if alpha and spec.kind != "square":
        raise ValueError("staggered flux alpha is only supported on the square lattice")
    if alpha_sign not in (1, -1):
        raise ValueError("alpha_sign must be +1 or -1")
    return GaugeField(spec, landau_B(spec, phi), theta_pattern(spec, theta_scheme), float(phi),
                      float(alpha), float(mu), stripe_pattern(spec, mu),
                      (float(twist[0]), float(twist[1])), alpha_sign, theta_scheme)


def gauge_from_dict(doc: dict) -> GaugeField:
    """Inverse of ``GaugeField.to_dict``."""
    kind = doc["kind"]
    Lx, Ly = doc["dims"]
    bx, by = doc.get("boundary", ["periodic", "periodic"])
    spec = build_lattice(kind, Lx, Ly, bx, by)
    return assign_gauge(spec, doc.get("phi", 0.0), doc.get("alpha", 0.0), doc.get("mu", 0.0),
                        doc.get("theta_scheme"), tuple(doc.get("twist", (0.0, 0.0))),
                        doc.get("alpha_sign", 1))


# --------------------------------------------------------------------------
# loop fluxes
# --------------------------------------------------------------------------

def _resolve_nn(spec, sites):
    steps = []
    for u, v in zip(sites, sites[1:] + sites[:1]):
        cand = spec.bonds_between(u, v)
        if not cand:
            raise ValueError(f"no bond between sites {u} and {v}")
        if len(cand) > 1:
            raise ValueError(f"sites {u} and {v} are joined by {len(cand)} bonds; pass a Loop")
        steps.append(cand[0])
    return steps


def _nnn_candidates(gauge, u, v, disp=None, via=None):
    spec = gauge.lattice
    active = ~np.isnan(gauge.nnn_phase)
    out = []
    for p, (i, k, j) in enumerate(spec.nnn):
        if via is not None and k != via:
            continue
        for a, b, sgn, dsgn in ((i, j, 1, 1.0), (j, i, -1, -1.0)):
            if a == u and b == v and active[p]:
                if disp is None or np.allclose(dsgn * spec.nnn_disp[p], disp, atol=1e-9):
                    out.append((p, sgn))
    return out


def loop_flux(gauge: GaugeField, loop, phase_source: str = "nn") -> float:
    """Oriented phase sum around ``loop``, wrapped to ``[0, 2 pi)``.

    ``loop`` is a :class:`Loop`, a :class:`Triangle`, or an ordered site list.
    ``phase_source`` is ``"nn"`` (background hop phases) or ``"nnn"``
    (effective correlated-hop phases).
    """
    spec = gauge.lattice
    if phase_source not in ("nn", "nnn"):
        raise ValueError(f"phase_source must be 'nn' or 'nnn', got {phase_source!r}")
    if phase_source == "nn":
        if isinstance(loop, Loop):
            steps = loop.steps
        else:
            steps = _resolve_nn(spec, list(loop))
        hp = gauge.hop_phase
        return wrap_phase(sum(d * hp[b] for b, d in steps))

    ph = gauge.nnn_phase
    if isinstance(loop, Triangle):
        pairs = [(e.u, e.v, e.disp, e.via) for e in loop.edges]
    else:
        sites = list(loop.sites if isinstance(loop, Loop) else loop)
        pairs = [(u, v, None, None) for u, v in zip(sites, sites[1:] + sites[:1])]
    total = 0.0
    for u, v, disp, via in pairs:
        cand = _nnn_candidates(gauge, u, v, disp, via)
        if not cand:
            raise ValueError(f"no active effective hop {u} -> {v}")
        if len(cand) > 1:
            raise ValueError(f"effective hop {u} -> {v} is ambiguous ({len(cand)} paths)")
        p, sgn = cand[0]
        total += sgn * ph[p]
    return wrap_phase(total)
