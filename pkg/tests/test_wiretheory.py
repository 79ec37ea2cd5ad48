from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from floqflux.wiretheory import (as_fraction, commensurate_flux, fold, hall_conductance, k_matrix,
                                 main_relation_flux, singularity_positions, wires_table)


def test_k_matrices():
    assert k_matrix(0, 0).matrix == ((0, 1), (1, 0))
    assert k_matrix(1, 0).matrix == ((2, 1), (1, 2))
    assert k_matrix(0, 0).is_biqh and k_matrix(0, -1).is_biqh and not k_matrix(1, 0).is_biqh


def test_hall_conductances_exact():
    assert hall_conductance(k_matrix(0, 0)) == 2
    assert hall_conductance(k_matrix(1, 0)) == F(2, 3)
    assert hall_conductance(k_matrix(0, -1)) == -2
    assert isinstance(hall_conductance(k_matrix(1, 0)), F)


ints = st.integers(-6, 6)


@given(ints, ints)
def test_k_matrix_symmetric_odd_offdiagonal(p, q):
    K = k_matrix(p, q)
    (a, b), (c, d) = K.matrix
    assert b == c and a == d and b % 2 == 1
    assert K.det == 4 * p * p - (2 * q + 1) ** 2


@given(ints, ints)
def test_hall_conductance_odd_under_k_sign(p, q):
    # K(-p, -q-1) = -K(p, q)
    assert hall_conductance(k_matrix(-p, -q - 1)) == -hall_conductance(k_matrix(p, q))


@given(ints, ints)
def test_hall_conductance_closed_form(p, q):
    # t K^-1 t = 2 / (2p + 2q + 1)
    assert hall_conductance(k_matrix(p, q)) == F(2, 2 * p + 2 * q + 1)


def test_commensurate_examples():
    assert commensurate_flux(0, 0, "1/2", "1/2") == [F(1, 2)]
    assert commensurate_flux(0, 0, F(1, 4), F(1, 4)) == [F(1, 4)]


@given(ints, ints, st.integers(1, 11))
def test_commensurate_matches_main_relation_when_balanced(p, q, num):
    n = F(num, 12)
    assert commensurate_flux(p, q, n, n) == [main_relation_flux(p, q, n)]


def test_commensurate_unbalanced_gives_both_roles():
    out = commensurate_flux(1, 0, F(1, 4), F(1, 2))
    assert out == sorted({(2 * F(1, 4) + F(1, 2)) % 1, (2 * F(1, 2) + F(1, 4)) % 1})


def test_density_validation():
    with pytest.raises(ValueError):
        commensurate_flux(0, 0, 0, F(1, 2))
    with pytest.raises(ValueError):
        singularity_positions(1, 0)


def test_singularities_quarter_filling():
    s = singularity_positions(F(1, 4), F(1, 4))
    assert s["A"] == [F(1, 4), F(3, 4)]
    assert s["B"] == [F(-3, 4), F(-1, 4)]


@given(st.fractions(-10, 10))
def test_fold_range(x):
    y = fold(x)
    assert -1 < y <= 1 and (x - y) % 2 == 0


def test_as_fraction():
    assert as_fraction(0.25) == F(1, 4)
    assert as_fraction("2/3") == F(2, 3)


def test_singular_k_matrix():
    # 4p^2 = (2q+1)^2 never holds for integers, so every K is invertible
    for p in range(-5, 6):
        for q in range(-5, 6):
            assert k_matrix(p, q).det != 0


def test_wires_table_rows():
    rows = wires_table([(0, 0), (1, 0)], "1/4", "1/4")
    assert rows[0]["sigma_xy"] == "2" and rows[1]["sigma_xy"] == "2/3"
    assert rows[0]["flux_over_pi"] == ["1/4"]
