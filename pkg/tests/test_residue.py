"""Arithmetic in Z/p^N: direct values plus ring-axiom properties."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from iwacong.exact import ResidueInt, egcd, inverse_mod, p_valuation


def test_egcd_identity():
    for a, b in [(12, 18), (-5, 7), (0, 4), (35, 0), (-9, -6)]:
        g, x, y = egcd(a, b)
        assert g == a * x + b * y
        assert g >= 0


def test_inverse_mod_values():
    assert inverse_mod(2, 27) == 14
    assert inverse_mod(5, 27) * 5 % 27 == 1
    with pytest.raises(ValueError):
        inverse_mod(3, 27)


def test_p_valuation():
    assert p_valuation(27, 3) == 3
    assert p_valuation(18, 3) == 2
    assert p_valuation(5, 3) == 0
    with pytest.raises(ValueError):
        p_valuation(0, 3)


def test_basic_arithmetic():
    a = ResidueInt(2, 3, 3)
    b = ResidueInt(26, 3, 3)
    assert (a + b).value == 1
    assert (a - b).value == 3
    assert (a * b).value == 52 % 27
    assert (-a).value == 25
    assert (a ** 3).value == 8
    assert (1 + a).value == 3
    assert (1 - a).value == 26


def test_mixed_modulus_rejected():
    with pytest.raises(ValueError):
        ResidueInt(1, 3, 2) + ResidueInt(1, 3, 3)


def test_unit_and_valuation():
    assert ResidueInt(4, 3, 3).is_unit()
    assert not ResidueInt(6, 3, 3).is_unit()
    assert ResidueInt(18, 3, 3).valuation() == 2
    assert ResidueInt(0, 3, 3).valuation() == 3
    u = ResidueInt(7, 3, 3)
    assert (u * u.inverse()).value == 1
    assert (u ** -1).value == u.inverse().value


@given(st.integers(-200, 200), st.integers(-200, 200), st.integers(-200, 200),
       st.sampled_from([(2, 3), (3, 2), (5, 2), (7, 1)]))
def test_ring_axioms(a, b, c, pn):
    p, N = pn
    x, y, z = (ResidueInt(v, p, N) for v in (a, b, c))
    assert (x + y).value == (y + x).value
    assert ((x + y) + z).value == (x + (y + z)).value
    assert (x * (y + z)).value == (x * y + x * z).value
    assert (x * y).value == (y * x).value
    assert (x + (-x)).value == 0
    assert (x * y).value == (a * b) % p ** N


@given(st.integers(-100, 100), st.sampled_from([(2, 4), (3, 3), (5, 2)]))
def test_unit_inverse_roundtrip(a, pn):
    p, N = pn
    x = ResidueInt(a, p, N)
    if x.is_unit():
        assert (x * x.inverse()).value == 1
        assert (x ** -2).value == (x.inverse() ** 2).value
    else:
        with pytest.raises(ValueError):
            x.inverse()


def test_lift_is_canonical():
    x = ResidueInt(-1, 5, 2)
    assert x.lift() == 24
    assert Fraction(x.lift(), 1) == 24
