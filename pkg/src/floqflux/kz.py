"""Kibble-Zurek estimate of the coherent-domain length for a linear ramp
``mu(t) = mu_i - v t`` of the striped potential."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class KZParams:
    xi0: float = 1.5      # lattice units
    tau0: float = 0.2     # 1/J_perp
    nu: float = 0.5
    z: float = 1.0
    mu_i: float = 4.0     # J_perp
    mu_c: float = 2.0
    t_dec: float = 100.0  # 1/J_perp

    def __post_init__(self):
        if not (self.xi0 > 0 and self.tau0 > 0 and self.t_dec > 0):
            raise ValueError("xi0, tau0 and t_dec must be positive")
        if not self.mu_i > self.mu_c:
            raise ValueError("mu_i must exceed mu_c")
        if self.nu < 0 or self.z <= 0:
            raise ValueError("nu must be >= 0 and z > 0")

    @property
    def v(self) -> float:
        return (self.mu_i - self.mu_c) / self.t_dec


def freeze_out_time(p: KZParams) -> float:
    zn = p.z * p.nu
    return (p.tau0 * p.v ** (-zn)) ** (1.0 / (1.0 + zn))


def domain_length(p: KZParams) -> float:
    zn = p.z * p.nu
    l_dec = p.xi0 * (p.tau0 * (p.mu_i - p.mu_c) / p.t_dec) ** (-p.nu / (1.0 + zn))
    alt = p.xi0 * (p.v * freeze_out_time(p)) ** (-p.nu)
    if abs(l_dec - alt) > 1e-12 * max(1.0, abs(l_dec)):
        raise AssertionError(f"domain length identity violated: {l_dec} vs {alt}")
    return l_dec


def kz_sweep(p: KZParams, vary: str, grid) -> list:
    """``[(value, l_dec, monotone_so_far)]`` varying one field."""
    if vary not in KZParams.__dataclass_fields__:
        raise KeyError(f"unknown KZ field {vary!r}")
    rows = []
    prev = None
    sign = 0
    mono = True
    for val in grid:
        l = domain_length(replace(p, **{vary: float(val)}))
        if prev is not None:
            s = int(np.sign(l - prev))
            if sign == 0:
                sign = s
            mono = mono and s != 0 and s == sign
        rows.append((float(val), l, mono))
        prev = l
    return rows
