"""Coupled-wire predictions in exact rational arithmetic.

Angles are returned as :class:`fractions.Fraction` multiples of pi.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

BIQH_PQ = {(0, 0), (0, -1)}


def as_fraction(x) -> Fraction:
    """Exact rational from int / Fraction / str; floats snap to the nearest
    small-denominator rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10 ** 6)
    return Fraction(x)


@dataclass(frozen=True)
class KMatrix:
    p: int
    q: int

    @property
    def matrix(self) -> tuple:
        a, b = 2 * self.p, 2 * self.q + 1
        return ((a, b), (b, a))

    @property
    def charge_vector(self) -> tuple:
        return (1, 1)

    @property
    def det(self) -> int:
        (a, b), (c, d) = self.matrix
        return a * d - b * c

    @property
    def is_biqh(self) -> bool:
        return (self.p, self.q) in BIQH_PQ

    def inverse(self) -> tuple:
        if self.det == 0:
            raise ZeroDivisionError(f"K({self.p},{self.q}) is singular")
        (a, b), (c, d) = self.matrix
        det = Fraction(self.det)
        return ((d / det, -b / det), (-c / det, a / det))


def k_matrix(p: int, q: int) -> KMatrix:
    return KMatrix(int(p), int(q))


def hall_conductance(K: KMatrix) -> Fraction:
    """``t K^-1 t`` with charge vector ``t = (1, 1)``."""
    inv = K.inverse()
    t = K.charge_vector
    return sum(t[i] * inv[i][j] * t[j] for i in range(2) for j in range(2))


def _check_density(n):
    n = as_fraction(n)
    if not 0 < n < 1:
        raise ValueError(f"density {n} outside (0, 1)")
    return n


def commensurate_flux(p: int, q: int, na, nb) -> list:
    """Background flux (in units of pi, reduced mod 1) for both assignments
    of the species roles."""
    na, nb = _check_density(na), _check_density(nb)
    out = set()
    for ns, nbar in ((na, nb), (nb, na)):
        out.add((2 * p * ns + (2 * q + 1) * nbar) % 1)
    return sorted(out)


def main_relation_flux(p: int, q: int, n) -> Fraction:
    """``(2p + 2q + 1) <n>`` mod 1, in units of pi."""
    return ((2 * p + 2 * q + 1) * as_fraction(n)) % 1


def fold(x: Fraction) -> Fraction:
    """Reduce a multiple of pi to the interval (-1, 1]."""
    y = x % 2
    return y - 2 if y > 1 else y


def singularity_positions(na, nb) -> dict:
    """Momenta (units of pi) where the chain momentum distributions diverge."""
    na, nb = as_fraction(na), as_fraction(nb)
    for n in (na, nb):
        if not 0 <= n < 1:
            raise ValueError(f"density {n} outside [0, 1)")
    half = Fraction(1, 2)
    return {"A": [fold(half - nb), fold(half + nb)],
            "B": [fold(-half - na), fold(-half + na)]}


def wires_table(pairs, na=None, nb=None) -> list:
    """Rows of (p, q, K, sigma_xy, commensurate fluxes) for CLI output."""
    rows = []
    for p, q in pairs:
        K = k_matrix(p, q)
        sigma = hall_conductance(K) if K.det else None
        flux = commensurate_flux(p, q, na, nb) if na is not None and nb is not None else []
        rows.append({"p": p, "q": q, "K": [list(r) for r in K.matrix],
                     "sigma_xy": None if sigma is None else str(sigma),
                     "biqh": K.is_biqh, "flux_over_pi": [str(f) for f in flux]})
    return rows
