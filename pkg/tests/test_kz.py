import math

import pytest
from hypothesis import given, settings, strategies as st

from floqflux.kz import KZParams, domain_length, freeze_out_time, kz_sweep

pos = st.floats(1e-3, 1e3)


def test_preset_domain_length():
    assert abs(domain_length(KZParams()) - 9.45) <= 0.10
    assert math.isclose(domain_length(KZParams()), 1.5 * 250 ** (1 / 3), rel_tol=1e-12)


def test_preset_freeze_out():
    assert math.isclose(freeze_out_time(KZParams()), (0.2 * 0.02 ** -0.5) ** (2 / 3), rel_tol=1e-12)


def test_all_ones_freeze_out():
    p = KZParams(tau0=1.0, mu_i=2.0, mu_c=1.0, t_dec=1.0, nu=1.0, z=1.0)
    assert p.v == 1.0 and math.isclose(freeze_out_time(p), 1.0)


def test_small_exponent_limit():
    p = KZParams(nu=1e-12)
    assert math.isclose(freeze_out_time(p), p.tau0, rel_tol=1e-9)
    assert domain_length(KZParams(nu=0.0)) == 1.5


@given(pos, pos, st.floats(0.0, 3.0), st.floats(0.1, 3.0), st.floats(-5, 5), st.floats(1e-3, 10), pos)
@settings(max_examples=1000)
def test_exponent_identity(xi0, tau0, nu, z, mu_c, gap, t_dec):
    p = KZParams(xi0, tau0, nu, z, mu_c + gap, mu_c, t_dec)
    l = domain_length(p)  # raises on identity violation
    alt = p.xi0 * (p.v * freeze_out_time(p)) ** (-p.nu)
    assert math.isclose(l, alt, rel_tol=1e-12)


@given(pos, st.floats(1e-2, 1e2))
def test_scale_covariance(tau0, c):
    p = KZParams(tau0=tau0)
    q = KZParams(tau0=tau0 * c, t_dec=p.t_dec * c)
    assert math.isclose(domain_length(p), domain_length(q), rel_tol=1e-12)


def test_sweep_monotone_in_t_dec():
    rows = kz_sweep(KZParams(), "t_dec", [50, 100, 200])
    assert [r[1] for r in rows] == sorted(r[1] for r in rows)
    assert rows[-1][2] is True


def test_sweep_nu_and_empty():
    rows = kz_sweep(KZParams(), "nu", [0.4, 0.5, 0.6])
    assert all(math.isfinite(r[1]) and r[1] > 0 for r in rows)
    assert kz_sweep(KZParams(), "nu", []) == []
    with pytest.raises(KeyError):
        kz_sweep(KZParams(), "speed", [1])


def test_longer_ramps_grow_domains():
    ls = [domain_length(KZParams(t_dec=t)) for t in (1e2, 1e4, 1e6)]
    assert ls[0] < ls[1] < ls[2]


@pytest.mark.parametrize("kw", [dict(xi0=0), dict(tau0=-1), dict(t_dec=0), dict(mu_i=1.0), dict(z=0)])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        KZParams(**kw)
