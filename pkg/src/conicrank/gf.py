"""Finite fields F_q for odd prime powers q = p**e.

Elements are encoded as integers ``sum(c_i * p**i)`` over their coefficient
vectors, so integer order is the canonical enumeration order (prime subfield
first). All arithmetic runs through precomputed tables; the tables are numpy
arrays so geometry code can index them with whole arrays at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import product
from typing import Iterator, Sequence

import numpy as np


class FieldError(ValueError):
    """Base class for field construction and arithmetic errors."""


class NotPrime(FieldError):
    pass


class EvenCharacteristic(FieldError):
    pass


class ReducibleModulus(FieldError):
    pass


class NoBuiltinModulus(FieldError):
    pass


class FieldMismatch(FieldError):
    pass


class ZeroInput(FieldError):
    pass


class DivisionByZero(FieldError, ZeroDivisionError):
    pass


# Monic irreducibles, constant term first, for every odd p**e <= 128 with e > 1.
BUILTIN_MODULI: dict[tuple[int, int], tuple[int, ...]] = {
    (3, 2): (1, 0, 1),  # t^2 + 1
    (5, 2): (2, 0, 1),  # t^2 + 2
    (3, 3): (1, 2, 0, 1),  # t^3 + 2t + 1
    (7, 2): (1, 0, 1),  # t^2 + 1
    (3, 4): (2, 0, 0, 1, 1),  # t^4 + t^3 + 2
    (11, 2): (1, 0, 1),  # t^2 + 1
    (5, 3): (1, 1, 0, 1),  # t^3 + t + 1
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Return ``(p, e)`` with ``q == p**e``; raise NotPrime otherwise."""
    if q < 2:
        raise NotPrime(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    e, rest = 0, q
    while rest % p == 0:
        rest //= p
        e += 1
    if rest != 1:
        raise NotPrime(f"{q} is not a prime power")
    return p, e


# -- polynomial helpers over F_p (coefficient lists, constant term first) --

def _trim(poly: list[int]) -> list[int]:
    while poly and poly[-1] == 0:
        poly.pop()
    return poly


def _poly_mod(a: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    """Remainder of ``a`` modulo the monic polynomial ``m`` over F_p."""
    a = _trim([c % p for c in a])
    dm = len(m) - 1
    while len(a) - 1 >= dm and a:
        shift = len(a) - 1 - dm
        lead = a[-1]
        for i, c in enumerate(m):
            a[shift + i] = (a[shift + i] - lead * c) % p
        _trim(a)
    return a


def _monic_polys(p: int, degree: int) -> Iterator[tuple[int, ...]]:
    for low in product(range(p), repeat=degree):
        yield tuple(low) + (1,)


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """Exhaustive factor search: no monic factor of degree 1..deg//2."""
    deg = len(modulus) - 1
    if deg < 1 or modulus[-1] % p != 1:
        return False
    for d in range(1, deg // 2 + 1):
        for f in _monic_polys(p, d):
            if not _poly_mod(modulus, f, p):
                return False
    return True


@dataclass(frozen=True, eq=False)
class Field:
    """The field F_q, q = p**e, with arithmetic tables and a fixed non-square."""

    p: int
    e: int
    modulus: tuple[int, ...]
    q: int = dc_field(init=False)
    add_table: np.ndarray = dc_field(init=False, repr=False)
    mul_table: np.ndarray = dc_field(init=False, repr=False)
    neg_table: np.ndarray = dc_field(init=False, repr=False)
    inv_table: np.ndarray = dc_field(init=False, repr=False)
    # +1 for non-zero squares, -1 for non-squares, 0 for zero
    square_class: np.ndarray = dc_field(init=False, repr=False)
    xi_value: int = dc_field(init=False)

    def __post_init__(self) -> None:
        p, e = self.p, self.e
        q = p**e
        object.__setattr__(self, "q", q)
        digits = np.array([[(v // p**i) % p for i in range(e)] for v in range(q)], dtype=np.int64)
        weights = p ** np.arange(e, dtype=np.int64)

        add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
        neg = ((-digits) % p) @ weights

        if e == 1:
            vals = np.arange(q, dtype=np.int64)
            mul = np.outer(vals, vals) % p
        else:
            mul = np.zeros((q, q), dtype=np.int64)
            for a in range(q):
                for b in range(a, q):
                    prod = np.convolve(digits[a], digits[b]) % p
                    r = _poly_mod(prod.tolist(), self.modulus, p)
                    mul[a, b] = mul[b, a] = sum(c * p**i for i, c in enumerate(r))

        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.flatnonzero(mul[a] == 1)[0])

        sq = np.full(q, -1, dtype=np.int8)
        sq[0] = 0
        sq[mul[np.arange(1, q), np.arange(1, q)]] = 1

        for name, arr in (("add_table", add), ("mul_table", mul), ("neg_table", neg),
                          ("inv_table", inv), ("square_class", sq)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "xi_value", int(np.flatnonzero(sq == -1)[0]))

    # -- identity ---------------------------------------------------------

    def _key(self) -> tuple:
        return (self.p, self.e, self.modulus)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Field) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f"Field(q={self.q}, p={self.p}, e={self.e}, modulus={self.modulus})"

    # -- elements -----------------------------------------------------------

    def __call__(self, value: int | Sequence[int] | FieldElement) -> FieldElement:
        if isinstance(value, FieldElement):
            if value.field != self:
                raise FieldMismatch("element belongs to a different field")
            return value
        if isinstance(value, (int, np.integer)):
            # integers embed through the prime subfield
            return FieldElement(self, int(value) % self.p)
        coeffs = [int(c) % self.p for c in value]
        if len(coeffs) > self.e:
            coeffs = _poly_mod(coeffs, self.modulus, self.p)
        return FieldElement(self, sum(c * self.p**i for i, c in enumerate(coeffs)))

    def element(self, index: int) -> FieldElement:
        """Element with the given canonical index."""
        if not 0 <= index < self.q:
            raise IndexError(index)
        return FieldElement(self, int(index))

    def elements(self) -> list[FieldElement]:
        return [FieldElement(self, v) for v in range(self.q)]

    @property
    def zero(self) -> FieldElement:
        return FieldElement(self, 0)

    @property
    def one(self) -> FieldElement:
        return FieldElement(self, 1)

    @property
    def xi(self) -> FieldElement:
        return FieldElement(self, self.xi_value)

    # -- integer-level helpers used by the vectorised geometry code --------

    def add(self, a, b):
        return self.add_table[a, b]

    def sub(self, a, b):
        return self.add_table[a, self.neg_table[b]]

    def mul(self, a, b):
        return self.mul_table[a, b]

    def power(self, a: int, n: int) -> int:
        result, base = 1, int(a)
        while n:
            if n & 1:
                result = int(self.mul_table[result, base])
            base = int(self.mul_table[base, base])
            n >>= 1
        return result

    def from_int(self, n: int) -> int:
        """Index of the image of the integer ``n`` in F_q."""
        return n % self.p


def make_field(p: int, e: int = 1, modulus: Sequence[int] | None = None) -> Field:
    """Construct F_{p^e}.

    ``modulus`` lists the coefficients of a monic degree-e irreducible, constant
    term first. For e > 1 it defaults to the built-in table entry.
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if p == 2:
        raise EvenCharacteristic("characteristic 2 is not supported")
    if e < 1:
        raise ValueError("exponent must be positive")
    if e == 1:
        if modulus is not None and len(modulus) not in (0, 2):
            raise ReducibleModulus("a prime field takes no modulus (or a linear one)")
        return Field(p, 1, (0, 1))
    if modulus is None:
        try:
            modulus = BUILTIN_MODULI[(p, e)]
        except KeyError:
            raise NoBuiltinModulus(f"no built-in irreducible for q={p}^{e}; pass one explicitly") from None
    mod = tuple(int(c) % p for c in modulus)
    if len(mod) != e + 1 or mod[-1] != 1:
        raise ReducibleModulus(f"modulus must be monic of degree {e}: {tuple(modulus)}")
    if not is_irreducible(mod, p):
        raise ReducibleModulus(f"{tuple(modulus)} is reducible over F_{p}")
    return Field(p, e, mod)


def field_for_order(q: int, modulus: Sequence[int] | None = None) -> Field:
    p, e = prime_power(q)
    return make_field(p, e, modulus)


@dataclass(frozen=True)
class FieldElement:
    field: Field
    value: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        p = self.field.p
        return tuple((self.value // p**i) % p for i in range(self.field.e))

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch("operands belong to different fields")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.field.p
        return NotImplemented

    def __add__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.field, int(self.field.add_table[self.value, b]))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, int(self.field.neg_table[self.value]))

    def __sub__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.field, int(self.field.sub(self.value, b)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.field, int(self.field.mul_table[self.value, b]))

    __rmul__ = __mul__

    def inverse(self) -> FieldElement:
        if self.value == 0:
            raise DivisionByZero("inverse of zero")
        return FieldElement(self.field, int(self.field.inv_table[self.value]))

    def __truediv__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        if b == 0:
            raise DivisionByZero("division by zero in F_q")
        return self * FieldElement(self.field, int(self.field.inv_table[b]))

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int) -> FieldElement:
        if n < 0:
            return self.inverse() ** (-n)
        return FieldElement(self.field, self.field.power(self.value, n))

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        if self.field.e == 1:
            return f"{self.value}"
        terms = [f"{c}" if i == 0 else (f"{c}t" if i == 1 else f"{c}t^{i}")
                 for i, c in enumerate(self.coeffs) if c]
        return "+".join(reversed(terms)) or "0"


def field_arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Apply ``op`` in {'add', 'sub', 'mul', 'div'} to two elements."""
    if not isinstance(a, FieldElement) or not isinstance(b, FieldElement) or a.field != b.field:
        raise FieldMismatch("operands belong to different fields")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def is_square(x: FieldElement) -> bool:
    """Euler's criterion: x**((q-1)/2) == 1. Zero is rejected."""
    if x.value == 0:
        raise ZeroInput("zero is neither a square nor a non-square here")
    return x.field.power(x.value, (x.field.q - 1) // 2) == 1


def square_shift_counts(field: Field) -> tuple[int, int, int, int]:
    """Sizes of (Sq-1)&Sq, (Sq-1)&Nsq, (Nsq-1)&Sq, (Nsq-1)&Nsq by enumeration."""
    cls = field.square_class
    minus_one = field.neg_table[1]
    counts = {(a, b): 0 for a in (1, -1) for b in (1, -1)}
    for s in range(1, field.q):
        t = int(field.add_table[s, minus_one])
        if cls[t] != 0:
            counts[(int(cls[s]), int(cls[t]))] += 1
    return counts[(1, 1)], counts[(1, -1)], counts[(-1, 1)], counts[(-1, -1)]


def parse_modulus(text: str) -> tuple[int, ...]:
    """Parse a comma-separated coefficient list (constant term first)."""
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"bad modulus {text!r}: expected comma-separated integers") from None
