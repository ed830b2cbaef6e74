import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primerace.characters import DirichletCharacter, characters, phi


def test_phi_small():
    assert [phi(q) for q in range(3, 13)] == [2, 2, 4, 2, 6, 4, 6, 4, 10, 4]


def test_group_sizes():
    for q in [3, 4, 5, 8, 9, 12, 15, 16, 24, 45, 97]:
        chars = characters(q)
        assert len(chars) == phi(q)
        assert chars[0].is_principal
        assert sum(c.is_principal for c in chars) == 1


def test_characters_rejects_bad_moduli():
    with pytest.raises(ValueError):
        characters(2)
    with pytest.raises(ValueError):
        characters(10**6 + 1)


def test_principal_character_values():
    chi0 = characters(12)[0]
    for n in range(24):
        want = 1.0 if math.gcd(n, 12) == 1 else 0.0
        assert chi0.value(n) == pytest.approx(want)


def test_mod4_nonprincipal_is_the_alternating_character():
    chi = characters(4)[1]
    assert not chi.is_principal
    assert chi.is_real
    assert chi.parity == -1
    assert chi.value(1) == pytest.approx(1)
    assert chi.value(3) == pytest.approx(-1)
    assert chi.value(2) == 0


def test_mod3_nonprincipal():
    chi = characters(3)[1]
    assert chi.is_real and chi.parity == -1
    assert chi.value(1) == pytest.approx(1)
    assert chi.value(2) == pytest.approx(-1)


@settings(max_examples=30, deadline=None)
@given(q=st.integers(min_value=3, max_value=60))
def test_orthogonality_of_characters(q):
    chars = characters(q)
    units = [r for r in range(1, q) if math.gcd(r, q) == 1]
    for a in units[:4]:
        for b in units[:4]:
            s = sum(chi.value(a) * chi.value(b).conjugate() for chi in chars)
            want = phi(q) if a == b else 0.0
            assert abs(s - want) < 1e-9


@settings(max_examples=30, deadline=None)
@given(
    q=st.integers(min_value=3, max_value=60),
    m=st.integers(min_value=0, max_value=400),
    n=st.integers(min_value=0, max_value=400),
)
def test_complete_multiplicativity(q, m, n):
    for chi in characters(q)[:6]:
        assert chi.value(m * n) == pytest.approx(
            chi.value(m) * chi.value(n), abs=1e-12
        )


@settings(max_examples=20, deadline=None)
@given(q=st.integers(min_value=3, max_value=40))
def test_values_are_roots_of_unity_on_units(q):
    for chi in characters(q):
        for n in range(1, q):
            if math.gcd(n, q) == 1:
                assert abs(abs(chi.value(n)) - 1.0) < 1e-12
            else:
                assert chi.value(n) == 0


def test_conjugate_is_inverse_in_the_dual_group():
    for q in (5, 8, 12, 45):
        for chi in characters(q):
            bar = chi.conjugate()
            for n in range(q):
                if math.gcd(n, q) == 1:
                    assert chi.value(n) * bar.value(n) == pytest.approx(1.0)


def test_index_round_trip_and_canonical_order():
    for q in (5, 8, 12, 40):
        chars = characters(q)
        for i, chi in enumerate(chars):
            assert chi.index == i
        assert len(set(chars)) == len(chars)


def test_mod5_has_an_order_four_character():
    orders = sorted(chi.order for chi in characters(5))
    assert orders == [1, 2, 4, 4]
    chi = next(c for c in characters(5) if c.order == 4)
    assert chi.value(2) in (
        pytest.approx(1j), pytest.approx(-1j)
    )


def test_conductors_mod8():
    # one character lifted from mod 4, two genuinely mod 8, one principal
    conds = sorted(chi.conductor for chi in characters(8))
    assert conds == [1, 4, 8, 8]
    for chi in characters(8):
        assert chi.is_primitive == (chi.conductor == 8)


def test_conductors_mod9():
    conds = sorted(chi.conductor for chi in characters(9))
    assert conds == [1, 3, 9, 9, 9, 9]


def test_parity_splits_evenly():
    for q in (5, 8, 12, 15):
        parities = [chi.parity for chi in characters(q)]
        assert parities.count(1) == parities.count(-1)


def test_real_characters_square_to_principal():
    for q in (8, 12, 15, 24):
        for chi in characters(q):
            if not chi.is_real:
                continue
            for n in range(1, q):
                if math.gcd(n, q) == 1:
                    assert chi.value(n) in (pytest.approx(1.0), pytest.approx(-1.0))


def test_a_chi_flags_real_nonprincipal():
    chars = characters(12)
    for chi in chars:
        assert chi.A_chi == (chi.is_real and not chi.is_principal)


def test_period():
    for q in (5, 9, 16):
        for chi in characters(q)[:4]:
            for n in range(q):
                assert chi.value(n + q) == pytest.approx(chi.value(n), abs=1e-12)
