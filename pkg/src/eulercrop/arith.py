"""Exact modular arithmetic: roots of unity, Dirichlet characters, primes.

Character values are kept as exact roots of unity (pairs k/m meaning
e^{2*pi*i*k/m}) so that identities like eps(p)^d(p) = 1 can be checked
with integer arithmetic.  Complex embeddings happen only at the
statistics boundary.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np


class NotAUnitError(ValueError):
    """Raised when an argument is not invertible modulo the modulus."""


# ---------------------------------------------------------------------------
# Roots of unity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootOfUnity:
    """Exact root of unity e^{2*pi*i*k/m}, stored with k/m reduced.

    A distinguished zero value (is_zero=True) holds character values at
    non-coprime arguments; it absorbs products and powers.
    """

    k: int = 0
    m: int = 1
    is_zero: bool = False

    def __post_init__(self):
        if self.is_zero:
            object.__setattr__(self, "k", 0)
            object.__setattr__(self, "m", 1)
            return
        if self.m <= 0:
            raise ValueError("order must be positive")
        k = self.k % self.m
        g = math.gcd(k, self.m)
        if g > 1:
            k //= g
            object.__setattr__(self, "m", self.m // g)
        object.__setattr__(self, "k", k)

    # -- constructors -------------------------------------------------

    @staticmethod
    def one() -> "RootOfUnity":
        return RootOfUnity(0, 1)

    @staticmethod
    def minus_one() -> "RootOfUnity":
        return RootOfUnity(1, 2)

    @staticmethod
    def zero() -> "RootOfUnity":
        return RootOfUnity(is_zero=True)

    @staticmethod
    def from_sign(s: int) -> "RootOfUnity":
        if s == 1:
            return RootOfUnity.one()
        if s == -1:
            return RootOfUnity.minus_one()
        if s == 0:
            return RootOfUnity.zero()
        raise ValueError(f"not a sign: {s}")

    # -- exact algebra ------------------------------------------------

    def __mul__(self, other: "RootOfUnity") -> "RootOfUnity":
        if self.is_zero or other.is_zero:
            return RootOfUnity.zero()
        q = Fraction(self.k, self.m) + Fraction(other.k, other.m)
        return RootOfUnity(q.numerator, q.denominator)

    def __pow__(self, e: int) -> "RootOfUnity":
        if self.is_zero:
            if e == 0:
                raise ValueError("0**0 is undefined for character values")
            return RootOfUnity.zero()
        q = Fraction(self.k * e, self.m)
        return RootOfUnity(q.numerator, q.denominator)

    def conj(self) -> "RootOfUnity":
        if self.is_zero:
            return self
        return RootOfUnity(-self.k, self.m)

    @property
    def order(self) -> int:
        """Least n >= 1 with self**n == 1 (undefined for the zero value)."""
        if self.is_zero:
            raise ValueError("zero has no multiplicative order")
        return self.m

    def is_one(self) -> bool:
        return not self.is_zero and self.m == 1

    def is_real(self) -> bool:
        return self.is_zero or self.m <= 2

    def real_sign(self) -> int:
        """Value as an integer for m <= 2 (0 for the zero value)."""
        if self.is_zero:
            return 0
        if self.m == 1:
            return 1
        if self.m == 2:
            return -1
        raise ValueError(f"e^(2*pi*i*{self.k}/{self.m}) is not real")

    def __complex__(self) -> complex:
        if self.is_zero:
            return 0j
        if self.m == 1:
            return 1 + 0j
        if self.m == 2:
            return -1 + 0j
        if self.m == 4:
            return 1j if self.k == 1 else -1j
        return cmath.exp(2j * cmath.pi * self.k / self.m)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        if self.m == 1:
            return "1"
        if self.m == 2:
            return "-1"
        return f"zeta({self.k}/{self.m})"


# ---------------------------------------------------------------------------
# Structure of (Z/MZ)*
# ---------------------------------------------------------------------------

def factorize(n: int) -> list[tuple[int, int]]:
    """Trial-division factorization, adequate for desk-scale moduli."""
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


def _primitive_root(q: int, p: int) -> int:
    """Smallest primitive root modulo the odd prime power q = p^e."""
    phi = q - q // p
    prime_divs = [f for f, _ in factorize(phi)]
    for g in range(2, q):
        if g % p == 0:
            continue
        if all(pow(g, phi // f, q) != 1 for f in prime_divs):
            return g
    raise ArithmeticError(f"no primitive root mod {q}")


def _crt_lift(residue: int, q: int, M: int) -> int:
    """x with x = residue (mod q) and x = 1 (mod M/q)."""
    rest = M // q
    if rest == 1:
        return residue % M
    t = ((1 - residue) * pow(q, -1, rest)) % rest
    return (residue + q * t) % M


@dataclass(frozen=True, eq=False)
class _Component:
    """One cyclic factor of (Z/MZ)*: a generator local to a prime power q."""

    q: int            # prime-power component modulus
    local_gen: int    # generator of the cyclic factor inside (Z/qZ)*
    order: int
    kind: str         # "odd" | "neg" | "five"
    table: dict = field(default_factory=dict, repr=False, compare=False)

    def dlog(self, a: int) -> int:
        a %= self.q
        if self.kind == "neg":
            return 0 if a % 4 == 1 else 1
        if self.kind == "five":
            if a % 4 == 3:
                a = (-a) % self.q
        if not self.table:
            acc = 1
            for x in range(self.order):
                self.table[acc] = x
                acc = acc * self.local_gen % self.q
        try:
            return self.table[a]
        except KeyError as exc:  # only reachable on corrupted input
            raise NotAUnitError(f"{a} has no discrete log mod {self.q}") from exc


@dataclass(frozen=True)
class UnitGroup:
    """(Z/MZ)* as a product of explicit cyclic factors (CRT over prime powers);
    kernels and quotient orders then reduce to integer computations."""

    modulus: int
    components: tuple[_Component, ...]

    @staticmethod
    @lru_cache(maxsize=None)
    def of(M: int) -> "UnitGroup":
        if M <= 0:
            raise ValueError("modulus must be positive")
        comps: list[_Component] = []
        for p, e in factorize(M):
            q = p**e
            if p == 2:
                if e == 1:
                    continue
                if e == 2:
                    comps.append(_Component(4, 3, 2, "neg"))
                else:
                    comps.append(_Component(q, q - 1, 2, "neg"))
                    comps.append(_Component(q, 5, q // 4, "five"))
            else:
                comps.append(_Component(q, _primitive_root(q, p), q - q // p, "odd"))
        return UnitGroup(M, tuple(comps))

    @property
    def generators(self) -> tuple[int, ...]:
        """Generators lifted to (Z/MZ)*: each is = local_gen mod q, = 1 elsewhere."""
        return tuple(_crt_lift(c.local_gen, c.q, self.modulus) for c in self.components)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(c.order for c in self.components)

    @property
    def order(self) -> int:
        out = 1
        for c in self.components:
            out *= c.order
        return out

    def exponents(self, a: int) -> tuple[int, ...]:
        """Discrete log of a on the generator basis; NotAUnitError otherwise."""
        M = self.modulus
        a %= M
        if M > 1 and math.gcd(a, M) != 1:
            raise NotAUnitError(f"{a} is not a unit mod {M}")
        return tuple(c.dlog(a) for c in self.components)

    def elements(self) -> list[int]:
        """All units mod M, ascending (the whole of Z/1Z for M = 1)."""
        if self.modulus == 1:
            return [0]
        return [a for a in range(1, self.modulus) if math.gcd(a, self.modulus) == 1]


def multiplicative_order(a: int, M: int) -> int:
    """Least k >= 1 with a^k = 1 (mod M); raises NotAUnitError if gcd(a,M)>1."""
    if M <= 0:
        raise ValueError("modulus must be positive")
    a %= M
    if M == 1:
        return 1
    if math.gcd(a, M) != 1:
        raise NotAUnitError(f"{a} is not a unit mod {M}")
    k = UnitGroup.of(M).order
    for p, _ in factorize(k):
        while k % p == 0 and pow(a, k // p, M) == 1:
            k //= p
    return k


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D/n)."""
    if n == 0:
        return 1 if D in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if D < 0:
            sign = -sign
    e2 = 0
    while n % 2 == 0:
        n //= 2
        e2 += 1
    if e2:
        if D % 2 == 0:
            return 0
        if e2 % 2 == 1 and D % 8 in (3, 5):
            sign = -sign
    # Jacobi symbol (D/n) for odd n > 0
    a = D % n
    t = 1
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    if n != 1:
        return 0
    return sign * t


# ---------------------------------------------------------------------------
# Dirichlet characters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DirichletCharacter:
    """Character mod M given by exact root-of-unity values on the unit-group
    generators (in :meth:`UnitGroup.of` order)."""

    modulus: int
    generator_values: tuple[RootOfUnity, ...]

    def __post_init__(self):
        grp = UnitGroup.of(self.modulus)
        if len(self.generator_values) != len(grp.components):
            raise ValueError(
                f"expected {len(grp.components)} generator values for modulus "
                f"{self.modulus}, got {len(self.generator_values)}"
            )
        for v, n in zip(self.generator_values, grp.orders):
            if v.is_zero:
                raise ValueError("character values on generators must be nonzero")
            if n % v.order != 0:
                raise ValueError(f"value of order {v.order} on a generator of order {n}")

    @property
    def group(self) -> UnitGroup:
        return UnitGroup.of(self.modulus)

    def __call__(self, n: int) -> RootOfUnity:
        M = self.modulus
        n %= M
        if M == 1:
            return RootOfUnity.one()
        if math.gcd(n, M) != 1:
            return RootOfUnity.zero()
        out = RootOfUnity.one()
        for v, x in zip(self.generator_values, self.group.exponents(n)):
            if x:
                out = out * v**x
        return out

    def order(self) -> int:
        out = 1
        for v in self.generator_values:
            out = out * v.order // math.gcd(out, v.order)
        return out

    def kernel(self) -> list[int]:
        """Residues a mod M with chi(a) = 1, ascending."""
        if self.modulus == 1:
            return [0]
        return [a for a in self.group.elements() if self(a).is_one()]

    def is_trivial(self) -> bool:
        return all(v.is_one() for v in self.generator_values)

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.modulus != self.modulus:
            raise ValueError("character product needs a common modulus")
        return DirichletCharacter(
            self.modulus,
            tuple(a * b for a, b in zip(self.generator_values, other.generator_values)),
        )


def trivial_character(M: int) -> DirichletCharacter:
    grp = UnitGroup.of(M)
    return DirichletCharacter(M, tuple(RootOfUnity.one() for _ in grp.components))


def quadratic_character(D: int) -> DirichletCharacter:
    """The Kronecker character (D/.) attached to a fundamental discriminant D,
    as a Dirichlet character mod |D|."""
    M = abs(D)
    grp = UnitGroup.of(M)
    values = []
    for g in grp.generators:
        s = kronecker(D, g)
        if s == 0:
            raise ValueError(f"{D} is not a fundamental discriminant")
        values.append(RootOfUnity.from_sign(s))
    return DirichletCharacter(M, tuple(values))


def character_from_values(M: int, values: list[tuple[int, int]]) -> DirichletCharacter:
    """Build a character from (k, m) pairs on the canonical generators."""
    return DirichletCharacter(M, tuple(RootOfUnity(k, m) for k, m in values))


def extend_character(chi: DirichletCharacter, M: int) -> DirichletCharacter:
    """Extend chi to the (possibly larger) modulus M; requires chi.modulus | M."""
    if M % chi.modulus != 0:
        raise ValueError(f"{chi.modulus} does not divide {M}")
    grp = UnitGroup.of(M)
    return DirichletCharacter(M, tuple(chi(g) for g in grp.generators))


def all_quadratic_characters(M: int) -> list[DirichletCharacter]:
    """Every character mod M of order dividing 2 (including the trivial one)."""
    grp = UnitGroup.of(M)
    out = []
    n = len(grp.components)
    for mask in range(1 << n):
        values = []
        ok = True
        for i, order in enumerate(grp.orders):
            if mask >> i & 1:
                if order % 2 != 0:
                    ok = False
                    break
                values.append(RootOfUnity.minus_one())
            else:
                values.append(RootOfUnity.one())
        if ok:
            out.append(DirichletCharacter(M, tuple(values)))
    return out


# ---------------------------------------------------------------------------
# Primes
# ---------------------------------------------------------------------------

def _simple_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def sieve_primes(limit: int, exclude: tuple[int, ...] = ()) -> "PrimeTable":
    """Segmented sieve of Eratosthenes; all primes <= limit, ascending."""
    limit = int(limit)
    if limit < 2:
        return PrimeTable(limit, np.array([], dtype=np.int64), tuple(exclude))
    odd_base = [int(p) for p in _simple_sieve(math.isqrt(limit)) if p > 2]
    chunks = [np.array([2], dtype=np.int64)]
    span = 1 << 21  # odd numbers per segment
    low = 3
    while low <= limit:
        high = min(low + 2 * span, limit + 1)
        count = (high - low + 1) // 2
        mask = np.ones(count, dtype=bool)
        for p in odd_base:
            start = max(p * p, ((low + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            if start >= high:
                continue
            mask[(start - low) // 2 :: p] = False
        seg = low + 2 * np.flatnonzero(mask).astype(np.int64)
        chunks.append(seg[seg <= limit])
        low = high
    return PrimeTable(limit, np.concatenate(chunks), tuple(exclude))


@dataclass(frozen=True)
class PrimeTable:
    """Ascending primes up to a bound, with an optional exclusion set
    (the primes dividing the level)."""

    bound: int
    values: np.ndarray
    excluded: tuple[int, ...] = ()

    def __len__(self) -> int:
        return int(self.values.size)

    def coprime_to(self, N: int) -> np.ndarray:
        """Primes in the table not dividing N (and not explicitly excluded)."""
        vals = self.values
        if self.excluded:
            vals = vals[~np.isin(vals, np.array(self.excluded, dtype=np.int64))]
        if N > 1:
            vals = vals[N % vals != 0]
        return vals

    def count(self) -> int:
        return int(self.values.size)
