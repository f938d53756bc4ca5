"""Imaginary quadratic fields with class number one: exact integer arithmetic.

Elements are written x + y*w in the maximal order Z[w], where
w = sqrt(D)/2... more precisely w = sqrt(D/4) for D = 0 mod 4 and
w = (1 + sqrt(D))/2 for D = 1 mod 4.  Everything here is exact; complex
embeddings are taken only when a statistic needs them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

from .arith import RootOfUnity, kronecker

CLASS_NUMBER_ONE_DISCS = (-3, -4, -7, -8, -11, -19, -43, -67, -163)


class IngestionOnlyFieldError(ValueError):
    """Native arithmetic refused: the field has class number > 1."""


class NormEquationError(ValueError):
    """No element of the requested norm exists (inert or ramified prime)."""


def _is_fundamental(D: int) -> bool:
    if D >= 0:
        return False
    if D % 4 == 1:
        return _squarefree(-D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(-m)
    return False


def _squarefree(n: int) -> bool:
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class ImagQuadField:
    """Imaginary quadratic field of fundamental discriminant D < 0.

    Only the nine class-number-one fields support native arithmetic;
    anything else is ingestion-only and refuses element computations.
    """

    D: int

    def __post_init__(self):
        if not _is_fundamental(self.D):
            raise ValueError(f"{self.D} is not a fundamental discriminant < 0")

    @property
    def class_number(self) -> int | None:
        return 1 if self.D in CLASS_NUMBER_ONE_DISCS else None

    @property
    def native(self) -> bool:
        return self.D in CLASS_NUMBER_ONE_DISCS

    def require_native(self):
        if not self.native:
            raise IngestionOnlyFieldError(
                f"D={self.D} has class number > 1; supply data via ingestion"
            )

    # w^2 = wsq_const + wsq_lin * w
    @property
    def _wsq(self) -> tuple[int, int]:
        if self.D % 4 == 0:
            return (self.D // 4, 0)
        return ((self.D - 1) // 4, 1)

    def element(self, x: int, y: int = 0) -> "QuadInt":
        return QuadInt(self.D, x, y)

    def units(self) -> list["QuadInt"]:
        one = self.element(1)
        w = self.element(0, 1)
        if self.D == -4:
            return [one, w, -one, -w]
        if self.D == -3:
            # w = e^{i*pi/3}: the six units are +-1, +-w, +-(w - 1)
            return [one, w, w * w, -one, -w, -(w * w)]
        return [one, -one]

    def unit_as_root_of_unity(self, u: "QuadInt") -> RootOfUnity:
        """Exact root of unity equal to the unit u under the upper-half-plane
        embedding (w maps to i*sqrt(|D|)/2 resp. (1+i*sqrt(|D|))/2)."""
        n = len(self.units())
        for k in range(n):
            if self.unit_root_power(k) == u:
                return RootOfUnity(k, n)
        raise ValueError(f"{u} is not a unit of Q(sqrt({self.D}))")

    def unit_root_power(self, k: int) -> "QuadInt":
        """The unit e^{2*pi*i*k/n} where n = #units."""
        if self.D == -4:
            gen = self.element(0, 1)  # i
        elif self.D == -3:
            gen = self.element(0, 1)  # primitive 6th root
        else:
            gen = self.element(-1)
        out = self.element(1)
        for _ in range(k % len(self.units())):
            out = out * gen
        return out

    def split_type(self, p: int) -> str:
        """'split', 'inert' or 'ramified' according to the Kronecker symbol."""
        s = kronecker(self.D, p)
        return {1: "split", -1: "inert", 0: "ramified"}[s]

    def embedding(self) -> complex:
        """Complex value of w."""
        if self.D % 4 == 0:
            return 1j * math.sqrt(-self.D) / 2
        return complex(0.5, math.sqrt(-self.D) / 2)


@dataclass(frozen=True)
class QuadInt:
    """x + y*w in the maximal order of Q(sqrt(D))."""

    D: int
    x: int
    y: int

    def _wsq(self) -> tuple[int, int]:
        if self.D % 4 == 0:
            return (self.D // 4, 0)
        return ((self.D - 1) // 4, 1)

    def __add__(self, other: "QuadInt") -> "QuadInt":
        self._check(other)
        return QuadInt(self.D, self.x + other.x, self.y + other.y)

    def __sub__(self, other: "QuadInt") -> "QuadInt":
        self._check(other)
        return QuadInt(self.D, self.x - other.x, self.y - other.y)

    def __neg__(self) -> "QuadInt":
        return QuadInt(self.D, -self.x, -self.y)

    def __mul__(self, other):
        if isinstance(other, int):
            return QuadInt(self.D, self.x * other, self.y * other)
        self._check(other)
        s, t = self._wsq()
        # (x1 + y1 w)(x2 + y2 w) with w^2 = s + t w
        x = self.x * other.x + s * self.y * other.y
        y = self.x * other.y + self.y * other.x + t * self.y * other.y
        return QuadInt(self.D, x, y)

    __rmul__ = __mul__

    def conj(self) -> "QuadInt":
        # conj(w) = trace(w) - w; trace(w) = t of w^2 = s + t*w
        _, t = self._wsq()
        return QuadInt(self.D, self.x + t * self.y, -self.y)

    def norm(self) -> int:
        s, t = self._wsq()
        # N(x + y w) = x^2 + t x y - s y^2
        return self.x * self.x + t * self.x * self.y - s * self.y * self.y

    def trace(self) -> int:
        _, t = self._wsq()
        return 2 * self.x + t * self.y

    def divides(self, other: "QuadInt") -> bool:
        self._check(other)
        q, ok = self.exact_divide(other)
        return ok

    def exact_divide(self, other: "QuadInt") -> tuple["QuadInt | None", bool]:
        """(other / self, True) when self | other in the order, else (None, False)."""
        n = self.norm()
        if n == 0:
            return (None, other.x == 0 and other.y == 0)
        prod = other * self.conj()
        if prod.x % n or prod.y % n:
            return (None, False)
        return (QuadInt(self.D, prod.x // n, prod.y // n), True)

    def is_unit(self) -> bool:
        return abs(self.norm()) == 1

    def __complex__(self) -> complex:
        return self.x + self.y * ImagQuadField(self.D).embedding()

    def arg(self) -> float:
        """Argument of the complex embedding, in [0, 2*pi)."""
        a = cmath.phase(complex(self))
        return a + 2 * math.pi if a < 0 else a

    def _check(self, other: "QuadInt"):
        if self.D != other.D:
            raise ValueError("mixed discriminants")

    def __str__(self) -> str:
        if self.D == -4:
            return f"{self.x}{self.y:+d}i"
        return f"{self.x}{self.y:+d}w"


# ---------------------------------------------------------------------------
# Norm equations via lattice reduction
# ---------------------------------------------------------------------------

def _sqrt_mod(a: int, p: int) -> int:
    """A square root of a mod p (p an odd prime, a a QR)."""
    from sympy.ntheory.residue_ntheory import sqrt_mod

    r = sqrt_mod(a % p, p)
    if r is None:
        raise NormEquationError(f"{a} is not a square mod {p}")
    return int(r)


def _bilinear(a: QuadInt, b: QuadInt) -> int:
    """Twice... no: the polarization B(a,b) = (N(a+b) - N(a) - N(b)) / 2
    may be half-integral for odd D; return the doubled value to stay in Z."""
    return (a + b).norm() - a.norm() - b.norm()


def _lagrange_reduce(a: QuadInt, b: QuadInt) -> QuadInt:
    """Shortest nonzero vector of the rank-2 lattice spanned by a, b
    (Lagrange-Gauss reduction under the norm form)."""
    if a.norm() < b.norm():
        a, b = b, a
    while True:
        nb = b.norm()
        # round(2B / 2N) = nearest integer to B(a,b)/N(b)
        twob = _bilinear(a, b)
        mu = (twob + nb) // (2 * nb) if twob >= 0 else -((-twob + nb) // (2 * nb))
        r = a - b * mu
        a, b = b, r
        if b.norm() >= a.norm():
            return a


@lru_cache(maxsize=None)
def norm_generator(K: ImagQuadField, p: int) -> QuadInt:
    """A generator of a prime ideal above the split prime p (any associate).

    Solves N(alpha) = p by Lagrange-Gauss reduction of the ideal lattice
    (p, w - z) where z is a root of the minimal polynomial of w mod p.
    """
    K.require_native()
    st = K.split_type(p)
    if st != "split":
        raise NormEquationError(f"p={p} is {st} in Q(sqrt({K.D})), not split")
    if p == 2:
        # odd D only (even D ramifies at 2); the minimal polynomial of w
        # has a root mod 2 exactly in the split case
        z = next(r for r in (0, 1) if (r * r - r + (1 - K.D) // 4) % 2 == 0)
    elif K.D % 4 == 0:
        z = _sqrt_mod(K.D // 4, p)
    else:
        s = _sqrt_mod(K.D, p)
        z = (1 + s) * pow(2, -1, p) % p
    alpha = _lagrange_reduce(K.element(p), K.element(-z, 1))
    if alpha.norm() != p:
        raise AssertionError(
            f"lattice reduction found norm {alpha.norm()} != {p}; "
            "class number one violated?"
        )
    return alpha


def prime_above(K: ImagQuadField, p: int) -> QuadInt:
    """A generator of some prime of K above p (split: one of the pair;
    inert: p itself).  Ramified primes are rejected."""
    st = K.split_type(p)
    if st == "split":
        return norm_generator(K, p)
    if st == "inert":
        return K.element(p)
    raise NormEquationError(f"p={p} ramifies in Q(sqrt({K.D}))")


# ---------------------------------------------------------------------------
# Residues modulo a principal ideal
# ---------------------------------------------------------------------------

def _hnf_2xn(cols: list[tuple[int, int]]) -> tuple[int, int, int]:
    """Hermite form [[d1, c], [0, d2]] of the lattice spanned by the columns."""
    # bring all rows-2 entries to a single gcd via column operations
    cols = [list(c) for c in cols if c != (0, 0)]
    if not cols:
        raise ValueError("zero lattice")
    # eliminate second row
    while True:
        nz = [c for c in cols if c[1] != 0]
        if len(nz) <= 1:
            break
        nz.sort(key=lambda c: abs(c[1]))
        a, b = nz[0], nz[1]
        q = b[1] // a[1]
        b[0] -= q * a[0]
        b[1] -= q * a[1]
    d2col = next((c for c in cols if c[1] != 0), None)
    if d2col is None:
        raise ValueError("rank-1 lattice")
    firsts = [c[0] for c in cols if c[1] == 0 and c[0] != 0]
    if not firsts:
        raise ValueError("rank-1 lattice")
    d1 = math.gcd(*firsts) if len(firsts) > 1 else abs(firsts[0])
    c, d2 = d2col
    if d2 < 0:
        c, d2 = -c, -d2
    return d1, c % d1 if d1 else c, d2


@dataclass(frozen=True, eq=False)
class ResidueRing:
    """O / (mu): canonical representatives and unit tests for a principal
    ideal of the maximal order."""

    field: ImagQuadField
    mu: QuadInt
    _hnf: tuple[int, int, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.field.require_native()
        if self.mu.norm() == 0:
            raise ValueError("zero modulus")
        w_mu = self.mu * self.field.element(0, 1)
        object.__setattr__(
            self, "_hnf", _hnf_2xn([(self.mu.x, self.mu.y), (w_mu.x, w_mu.y)])
        )

    @property
    def size(self) -> int:
        d1, _, d2 = self._hnf
        return d1 * d2

    def reduce(self, a: QuadInt) -> QuadInt:
        """Canonical representative of a modulo (mu)."""
        d1, c, d2 = self._hnf
        x, y = a.x, a.y
        k = y // d2
        x -= k * c
        y -= k * d2
        x %= d1
        return self.field.element(x, y)

    def key(self, a: QuadInt) -> tuple[int, int]:
        r = self.reduce(a)
        return (r.x, r.y)

    def congruent(self, a: QuadInt, b: QuadInt) -> bool:
        return self.key(a) == self.key(b)

    def representatives(self) -> list[QuadInt]:
        d1, _, d2 = self._hnf
        return [self.field.element(x, y) for y in range(d2) for x in range(d1)]

    def is_unit(self, a: QuadInt) -> bool:
        """True iff (a) + (mu) = O, by the index of the joint lattice."""
        if a.x == 0 and a.y == 0:
            return False
        w = self.field.element(0, 1)
        cols = []
        for gen in (a, a * w, self.mu, self.mu * w):
            cols.append((gen.x, gen.y))
        d1, _, d2 = _hnf_2xn(cols)
        return d1 * d2 == 1

    def unit_representatives(self) -> list[QuadInt]:
        return [r for r in self.representatives() if self.is_unit(r)]
