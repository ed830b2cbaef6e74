"""Dirichlet characters mod q, built from the unit group structure.

(Z/q)* is decomposed into cyclic components: for odd prime powers p^e a
single cyclic factor with a primitive root; for 2^e the usual {-1} x <5>
splitting (trivial for e = 1, one order-2 factor for e = 2). Components are
ordered with the 2-part first (the -1 factor before the 5 factor), then odd
primes ascending.

Canonical character order, used everywhere an index identifies a character
(zero files in particular): characters are enumerated by their exponent
tuples in mixed-radix order, leftmost component most significant, so the
principal character has index 0. The enumeration is stable across runs.
"""

from __future__ import annotations

import cmath
import itertools
import math
from functools import lru_cache

MAX_MODULUS = 10**6


def _factorize(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def _primitive_root(p: int, e: int) -> int:
    """Primitive root mod p^e for odd p."""
    pe = p**e
    order = (p - 1) * p ** (e - 1)
    fac = [f for f, _ in _factorize(order)]
    g = 2
    while True:
        if math.gcd(g, pe) == 1 and all(
            pow(g, order // f, pe) != 1 for f in fac
        ):
            return g
        g += 1


class _Component:
    """One cyclic factor of (Z/q)*: values live mod `modulus`, the factor is
    generated by `gen` with the given order; `dlog` maps each unit in the
    subgroup <gen> to its exponent."""

    __slots__ = ("modulus", "gen", "order", "dlog")

    def __init__(self, modulus: int, gen: int, order: int):
        self.modulus = modulus
        self.gen = gen
        self.order = order
        self.dlog = {}
        v = 1
        for k in range(order):
            self.dlog[v] = k
            v = v * gen % modulus

    def exponent_of(self, n: int) -> int:
        return self.dlog[n % self.modulus]


class _TwoTorsion(_Component):
    """The {-1} factor mod 2^e (e >= 3): exponent is 0 if n is a power of 5,
    else 1 (n = -5^k)."""

    def __init__(self, modulus: int):
        super().__init__(modulus, modulus - 1, 2)
        # dlog built below by _group_structure once the <5> table exists

    def exponent_of(self, n: int) -> int:
        return self.dlog[n % self.modulus]


@lru_cache(maxsize=64)
def _group_structure(q: int):
    """List of components whose exponent vectors coordinatize the units mod q."""
    comps: list[_Component] = []
    for p, e in _factorize(q):
        pe = p**e
        if p == 2:
            if e == 1:
                continue
            if e == 2:
                comps.append(_Component(4, 3, 2))
            else:
                five = _Component(pe, 5, pe // 4)
                minus = _TwoTorsion(pe)
                minus.dlog = {}
                for v, _ in five.dlog.items():
                    minus.dlog[v] = 0
                    minus.dlog[pe - v] = 1
                # every odd residue mod 2^e is +-5^k
                five_full = dict(five.dlog)
                for v, k in list(five.dlog.items()):
                    five_full[pe - v] = k
                five.dlog = five_full
                comps.append(minus)
                comps.append(five)
        else:
            g = _primitive_root(p, e)
            comps.append(_Component(pe, g, (p - 1) * p ** (e - 1)))
    return tuple(comps)


class DirichletCharacter:
    """A character mod q, identified by its exponent tuple on the cyclic
    components of the unit group.

    values maps every unit residue to the (complex) character value; nonunits
    evaluate to 0 through value(). parity is chi(-1), +1 or -1. A_chi flags
    characters that are real and nonprincipal, the ones whose square is
    principal without being principal themselves.
    """

    def __init__(self, q: int, exponents: tuple[int, ...], index: int):
        self.q = q
        self.exponents = exponents
        self.index = index
        self._components = _group_structure(q)
        self._values: dict[int, complex] | None = None

    # -- identity ---------------------------------------------------------
    def __eq__(self, other):
        return (
            isinstance(other, DirichletCharacter)
            and self.q == other.q
            and self.exponents == other.exponents
        )

    def __hash__(self):
        return hash((self.q, self.exponents))

    def __repr__(self):
        return f"DirichletCharacter(q={self.q}, index={self.index})"

    # -- evaluation -------------------------------------------------------
    def value(self, n: int) -> complex:
        n = int(n) % self.q
        if math.gcd(n, self.q) != 1:
            return 0j
        acc = 0.0
        for k, comp in zip(self.exponents, self._components):
            if k:
                acc += k * comp.exponent_of(n) / comp.order
        return cmath.exp(2j * cmath.pi * acc)

    @property
    def values(self) -> dict[int, complex]:
        if self._values is None:
            self._values = {
                r: self.value(r)
                for r in range(1, self.q)
                if math.gcd(r, self.q) == 1
            }
            if self.q == 1:
                self._values = {0: 1 + 0j}
        return self._values

    # -- structure --------------------------------------------------------
    @property
    def is_principal(self) -> bool:
        return all(k == 0 for k in self.exponents)

    @property
    def is_real(self) -> bool:
        return all(
            (2 * k) % comp.order == 0
            for k, comp in zip(self.exponents, self._components)
        )

    @property
    def A_chi(self) -> bool:
        return self.is_real and not self.is_principal

    @property
    def parity(self) -> int:
        """chi(-1): +1 for even characters, -1 for odd."""
        v = self.value(self.q - 1)
        return 1 if v.real > 0 else -1

    def conjugate(self) -> "DirichletCharacter":
        orders = [c.order for c in self._components]
        exps = tuple((-k) % d for k, d in zip(self.exponents, orders))
        return _character_by_exponents(self.q, exps)

    @property
    def conductor(self) -> int:
        """Smallest d | q such that chi is trivial on units = 1 mod d."""
        q = self.q
        divs = sorted(
            {
                d
                for k in range(1, math.isqrt(q) + 1)
                if q % k == 0
                for d in (k, q // k)
            }
        )
        for d in divs:
            trivial = all(
                abs(self.value(n) - 1) <= 1e-12
                for n in range(1 + d, q + 1, d)
                if math.gcd(n, q) == 1
            )
            if trivial:
                return d
        return q

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.q

    @property
    def order(self) -> int:
        """Multiplicative order of the character."""
        out = 1
        for k, comp in zip(self.exponents, self._components):
            if k:
                out = math.lcm(out, comp.order // math.gcd(k, comp.order))
        return out


def _mixed_radix_index(exps: tuple[int, ...], orders: list[int]) -> int:
    idx = 0
    for k, d in zip(exps, orders):
        idx = idx * d + k
    return idx


@lru_cache(maxsize=32)
def _character_tuple(q: int) -> tuple[DirichletCharacter, ...]:
    comps = _group_structure(q)
    orders = [c.order for c in comps]
    out = []
    for i, exps in enumerate(itertools.product(*(range(d) for d in orders))):
        out.append(DirichletCharacter(q, tuple(exps), i))
    return tuple(out)


def _character_by_exponents(q: int, exps: tuple[int, ...]) -> DirichletCharacter:
    comps = _group_structure(q)
    orders = [c.order for c in comps]
    return characters(q)[_mixed_radix_index(exps, orders)]


def characters(q: int) -> list[DirichletCharacter]:
    """All phi(q) characters mod q in canonical (stable) order.

    The principal character is always index 0. Indices are the identifiers
    used in zero files.
    """
    q = int(q)
    if q < 3:
        raise ValueError(f"modulus must be >= 3, got {q}")
    if q > MAX_MODULUS:
        raise ValueError(f"modulus capped at {MAX_MODULUS}, got {q}")
    return list(_character_tuple(q))


def phi(q: int) -> int:
    """Euler totient."""
    out = q
    for p, _ in _factorize(q):
        out = out // p * (p - 1)
    return out
