import itertools

import pytest

from lowrankbp.galois import (
    IRREDUCIBLE_GF2,
    BinaryField,
    PrimeField,
    field_for_order,
    usable_orders,
)


def gf2_poly_mod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def is_irreducible_by_trial_division(p: int) -> bool:
    deg = p.bit_length() - 1
    for q in range(2, 1 << (deg // 2 + 1)):
        if q.bit_length() >= 2 and q != p and gf2_poly_mod(p, q) == 0:
            return False
    return True


class TestPolynomialTable:
    def test_every_entry_is_irreducible(self):
        for m, poly in IRREDUCIBLE_GF2.items():
            assert poly.bit_length() - 1 == m
            assert is_irreducible_by_trial_division(poly), f"m={m}"


class TestFieldAxioms:
    @pytest.mark.parametrize("field", [PrimeField(2), PrimeField(5), PrimeField(11),
                                       BinaryField(2), BinaryField(3), BinaryField(4)])
    def test_axioms_exhaustive_small(self, field):
        elements = list(field.elements())
        sample = elements if len(elements) <= 8 else elements[:8]
        for a, b in itertools.product(sample, repeat=2):
            assert field.add(a, b) == field.add(b, a)
            assert field.mul(a, b) == field.mul(b, a)
        for a, b, c in itertools.product(sample, repeat=3):
            assert field.add(field.add(a, b), c) == field.add(a, field.add(b, c))
            assert field.mul(field.mul(a, b), c) == field.mul(a, field.mul(b, c))
            assert field.mul(a, field.add(b, c)) == field.add(
                field.mul(a, b), field.mul(a, c)
            )

    @pytest.mark.parametrize("field", [PrimeField(7), BinaryField(4), BinaryField(6)])
    def test_every_nonzero_element_inverts(self, field):
        for a in field.elements():
            if a == 0:
                continue
            assert field.mul(a, field.inv(a)) == 1

    def test_additive_inverse(self):
        f = PrimeField(7)
        for a in f.elements():
            assert f.add(a, f.neg(a)) == 0
        g = BinaryField(3)
        for a in g.elements():
            assert g.add(a, g.neg(a)) == 0


class TestPolynomialEvaluation:
    def test_matches_naive_power_sum(self):
        for field in (PrimeField(7), BinaryField(3)):
            for coeffs in itertools.product(field.elements(), repeat=2):
                for x in field.elements():
                    naive = 0
                    for power, c in enumerate(coeffs):
                        term = c
                        for _ in range(power):
                            term = field.mul(term, x)
                        naive = field.add(naive, term)
                    assert field.poly_eval(coeffs, x) == naive

    def test_degree_bound_agreement_count(self):
        # distinct polynomials of degree < 2 agree on at most 1 point
        field = PrimeField(5)
        for a, b in itertools.combinations(
            itertools.product(field.elements(), repeat=2), 2
        ):
            agreements = sum(
                1 for x in field.elements()
                if field.poly_eval(a, x) == field.poly_eval(b, x)
            )
            assert agreements <= 1


class TestElementSugar:
    def test_operators(self):
        f = PrimeField(7)
        a, b = f(3), f(5)
        assert int(a + b) == 1
        assert int(a - b) == 5
        assert int(a * b) == 1
        assert int(a / b) == int(f.mul(3, f.inv(5)))

    def test_cross_field_rejected(self):
        with pytest.raises(ValueError):
            PrimeField(5)(2) + PrimeField(7)(2)

    def test_canonical_range_checked(self):
        with pytest.raises(ValueError):
            BinaryField(3)(9)


class TestOrderLookup:
    def test_primes_and_two_powers(self):
        assert isinstance(field_for_order(7), PrimeField)
        assert isinstance(field_for_order(8), BinaryField)
        assert field_for_order(8).order == 8

    def test_unsupported_orders(self):
        with pytest.raises(ValueError):
            field_for_order(12)
        with pytest.raises(ValueError):
            field_for_order(9)  # odd prime power: not supported

    def test_usable_orders_listing(self):
        orders = usable_orders(16)
        assert orders == [2, 3, 4, 5, 7, 8, 11, 13, 16]

    def test_prime_validation(self):
        with pytest.raises(ValueError):
            PrimeField(6)
