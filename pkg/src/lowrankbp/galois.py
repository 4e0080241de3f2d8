"""Finite-field arithmetic for the polynomial packing construction.

Supports prime fields GF(p) directly and binary extensions GF(2^m) for
m <= 16 through a fixed table of irreducible polynomials.  Elements are
canonical integer representatives: residues for GF(p), polynomial bit masks
for GF(2^m).
"""

from __future__ import annotations

from dataclasses import dataclass

# lexicographically smallest irreducible polynomial of each degree over
# GF(2), as bit masks (x^4 + x + 1 -> 0b10011); verified by trial division
# in the test suite
IRREDUCIBLE_GF2 = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
    9: 0b1000000011,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000000001001,
    13: 0b10000000011011,
    14: 0b100000000100001,
    15: 0b1000000000000011,
    16: 0b10000000000101011,
}


class GFContext:
    """Shared interface of the two field implementations."""

    order: int

    def add(self, a: int, b: int) -> int:
        raise NotImplementedError

    def neg(self, a: int) -> int:
        raise NotImplementedError

    def mul(self, a: int, b: int) -> int:
        raise NotImplementedError

    def inv(self, a: int) -> int:
        raise NotImplementedError

    def elements(self):
        return range(self.order)

    def poly_eval(self, coeffs, x: int) -> int:
        """Evaluate sum_l coeffs[l] * x^l by Horner's scheme."""
        acc = 0
        for c in reversed(list(coeffs)):
            acc = self.add(self.mul(acc, x), c)
        return acc

    def __call__(self, value: int) -> "GFElement":
        v = int(value)
        if isinstance(self, PrimeField):
            v %= self.order
        if not 0 <= v < self.order:
            raise ValueError(f"{value} is not a canonical element of GF({self.order})")
        return GFElement(self, v)

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self).__name__, self.order))


class PrimeField(GFContext):
    """GF(p) with residue arithmetic."""

    def __init__(self, p: int):
        if p < 2 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.order = p

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, self.p - 2, self.p)


class BinaryField(GFContext):
    """GF(2^m) with polynomial arithmetic modulo a fixed irreducible."""

    def __init__(self, m: int, polynomial: int | None = None):
        if m not in IRREDUCIBLE_GF2 and polynomial is None:
            raise ValueError(f"no irreducible polynomial on file for m={m}")
        self.m = m
        self.polynomial = polynomial if polynomial is not None else IRREDUCIBLE_GF2[m]
        self.order = 1 << m

    def add(self, a, b):
        return a ^ b

    def neg(self, a):
        return a

    def mul(self, a, b):
        result = 0
        poly = self.polynomial
        top = 1 << self.m
        while b:
            if b & 1:
                result ^= a
            b >>= 1
            a <<= 1
            if a & top:
                a ^= poly
        return result

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        # a^(2^m - 2) by square-and-multiply
        result = 1
        exp = self.order - 2
        base = a
        while exp:
            if exp & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            exp >>= 1
        return result


@dataclass(frozen=True)
class GFElement:
    """A field element bound to its context, with operator sugar."""

    context: GFContext
    value: int

    def _coerce(self, other) -> int:
        if isinstance(other, GFElement):
            if other.context != self.context:
                raise ValueError("elements belong to different fields")
            return other.value
        return int(other)

    def __add__(self, other):
        return GFElement(self.context, self.context.add(self.value, self._coerce(other)))

    def __sub__(self, other):
        return GFElement(
            self.context,
            self.context.add(self.value, self.context.neg(self._coerce(other))),
        )

    def __mul__(self, other):
        return GFElement(self.context, self.context.mul(self.value, self._coerce(other)))

    def __truediv__(self, other):
        return GFElement(
            self.context,
            self.context.mul(self.value, self.context.inv(self._coerce(other))),
        )

    def __int__(self):
        return self.value


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % q for q in range(2, int(n**0.5) + 1))


def field_for_order(q: int) -> GFContext:
    """A field of the given order: prime, or a power of two up to 2^16."""
    if is_prime(q):
        return PrimeField(q)
    if q > 1 and q & (q - 1) == 0:
        m = q.bit_length() - 1
        if m in IRREDUCIBLE_GF2:
            return BinaryField(m)
    raise ValueError(f"unsupported field order {q} (prime or 2^m, m<=16)")


def usable_orders(limit: int):
    """All supported field orders up to ``limit``, ascending."""
    orders = [q for q in range(2, limit + 1) if is_prime(q)]
    m = 1
    while (1 << m) <= limit:
        if not is_prime(1 << m) and m in IRREDUCIBLE_GF2:
            orders.append(1 << m)
        m += 1
    return sorted(set(orders))
