"""Euler factors, power traces, cropped partial products, G-decompositions.

Two evaluation backends:

* exact -- Fraction arithmetic in Q (integer s) or Q(sqrt p) (half-integer s,
  single prime) for identity checks;
* float -- log-space accumulation with sign tracking, for products truncated
  at desk-scale bounds up to 1e7.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .arith import RootOfUnity


class EulerFactorError(ValueError):
    """Vanishing denominator (reports the offending prime)."""


class NotQuadraticError(ValueError):
    """eps(p) is not +-1 where a quadratic identity requires it."""


class FieldAssertionError(ValueError):
    """eps(p)^d(p) != 1: the splitting-field descriptor is wrong."""


# ---------------------------------------------------------------------------
# Exact values in Q(sqrt p)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QSqrt:
    """u + v*sqrt(r) with rational u, v."""

    r: int
    u: Fraction
    v: Fraction = Fraction(0)

    def _coerce(self, other) -> "QSqrt":
        if isinstance(other, QSqrt):
            if other.r != self.r and other.v != 0 and self.v != 0:
                raise ValueError("mixed radicands")
            return QSqrt(self.r, other.u, other.v)
        if isinstance(other, Rational):
            return QSqrt(self.r, Fraction(other))
        raise TypeError(f"cannot coerce {other!r}")

    def __add__(self, other):
        o = self._coerce(other)
        return QSqrt(self.r, self.u + o.u, self.v + o.v)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return QSqrt(self.r, self.u - o.u, self.v - o.v)

    def __rsub__(self, other):
        o = self._coerce(other)
        return QSqrt(self.r, o.u - self.u, o.v - self.v)

    def __mul__(self, other):
        o = self._coerce(other)
        return QSqrt(
            self.r,
            self.u * o.u + self.r * self.v * o.v,
            self.u * o.v + self.v * o.u,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return QSqrt(self.r, -self.u, -self.v)

    def inverse(self) -> "QSqrt":
        den = self.u * self.u - self.r * self.v * self.v
        if den == 0:
            raise ZeroDivisionError("zero element of Q(sqrt r)")
        return QSqrt(self.r, self.u / den, -self.v / den)

    def is_zero(self) -> bool:
        return self.u == 0 and self.v == 0

    def __eq__(self, other) -> bool:
        if isinstance(other, QSqrt):
            if self.v == 0 and other.v == 0:
                return self.u == other.u
            return self.r == other.r and self.u == other.u and self.v == other.v
        if isinstance(other, Rational):
            return self.v == 0 and self.u == other
        return NotImplemented

    def __float__(self) -> float:
        return float(self.u) + float(self.v) * math.sqrt(self.r)

    def as_fraction(self) -> Fraction:
        if self.v != 0:
            raise ValueError("irrational value")
        return self.u


def power_p_to_minus(p: int, s: Fraction):
    """Exact p**(-s) for rational s with denominator 1 or 2; Fraction when
    the result is rational, else QSqrt over sqrt(p)."""
    s = Fraction(s)
    if s.denominator == 1:
        k = s.numerator
        return Fraction(1, p**k) if k >= 0 else Fraction(p ** (-k))
    if s.denominator == 2:
        k = s.numerator  # result p^{-k/2} with k odd
        rational_part = power_p_to_minus(p, Fraction((k + 1) // 2))
        return QSqrt(p, Fraction(0), Fraction(rational_part))
    raise ValueError(f"exact backend supports half-integer s only, got {s}")


def _simplify(x):
    if isinstance(x, QSqrt) and x.v == 0:
        return x.u
    return x


# ---------------------------------------------------------------------------
# Power traces
# ---------------------------------------------------------------------------

def bp_power_trace(a_p, eps_p, p: int, d: int):
    """Trace of the d-th power of Frobenius: alpha^d + (conj(alpha) eps)^d
    for alpha a root of x^2 - a_p x + p*eps(p), computed by the linear
    recurrence t_k = a_p t_{k-1} - p eps(p) t_{k-2}, t_0 = 2, t_1 = a_p.

    Exact (int) for integer a_p with eps(p) = +-1; complex otherwise.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    eps_val = _eps_scalar(eps_p)
    t_prev, t_cur = 2, a_p
    for _ in range(d - 1):
        t_prev, t_cur = t_cur, a_p * t_cur - p * eps_val * t_prev
    return t_cur


def _eps_scalar(eps_p):
    if isinstance(eps_p, RootOfUnity):
        return eps_p.real_sign() if eps_p.is_real() else complex(eps_p)
    return eps_p


# ---------------------------------------------------------------------------
# Euler factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EulerFactorParams:
    """One prime's factor data: p, a_p, eps(p), and the residue degree d."""

    p: int
    a_p: object          # int, float, or complex
    eps_p: RootOfUnity
    d: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("residue degree must be >= 1")


def _invert_exact(p: int, den):
    den = _simplify(den)
    if isinstance(den, QSqrt):
        if den.is_zero():
            raise EulerFactorError(f"Euler factor vanishes at p={p}")
        return _simplify(den.inverse())
    if den == 0:
        raise EulerFactorError(f"Euler factor vanishes at p={p}")
    return Fraction(1) / den


def euler_factor(params: EulerFactorParams, s, minus: bool = False):
    """Reciprocal of 1 -+ a_p p^{-s} + eps(p) p^{1-2s} at the point s.

    Exact (Fraction or QSqrt) for rational half-integer s with exact inputs;
    float otherwise.  The minus variant flips the sign of a_p.
    """
    a = -params.a_p if minus else params.a_p
    p = params.p
    if isinstance(s, Rational) and isinstance(a, int) and params.eps_p.is_real():
        s = Fraction(s)
        e = params.eps_p.real_sign()
        x = power_p_to_minus(p, s)            # p^{-s}
        x2 = power_p_to_minus(p, 2 * s - 1)   # p^{1-2s}
        den = 1 - a * _as_qsqrt(p, x) + e * _as_qsqrt(p, x2)
        return _invert_exact(p, den)
    sf = float(s)
    af = complex(a) if isinstance(a, complex) else float(a)
    ef = complex(params.eps_p)
    den = 1 - af * p**-sf + ef * p ** (1 - 2 * sf)
    if den == 0:
        raise EulerFactorError(f"Euler factor vanishes at p={p}")
    out = 1 / den
    if isinstance(out, complex) and abs(out.imag) <= 1e-15 * abs(out.real):
        return out.real
    return out


def degree_d_factor(params: EulerFactorParams, s):
    """Reciprocal of 1 - b_p p^{-d s} + eps(p)^d p^{d(1-2s)}: the degree-d(p)
    Euler factor over the splitting field.  Requires eps(p)^d = 1 exactly."""
    p, d = params.p, params.d
    eps_d = params.eps_p**d
    if not eps_d.is_one():
        raise FieldAssertionError(
            f"eps({p})^{d} = {eps_d} != 1: wrong splitting-field descriptor"
        )
    b = bp_power_trace(params.a_p, params.eps_p, p, d)
    if isinstance(s, Rational) and isinstance(b, int):
        s = Fraction(s)
        xd = power_p_to_minus(p, d * s)
        x2d = power_p_to_minus(p, d * (2 * s - 1))
        den = 1 - b * _as_qsqrt(p, xd) + _as_qsqrt(p, x2d)
        return _invert_exact(p, den)
    sf = float(s)
    bf = complex(b) if isinstance(b, complex) else float(b)
    den = 1 - bf * p ** (-d * sf) + p ** (d * (1 - 2 * sf))
    if den == 0:
        raise EulerFactorError(f"Euler factor vanishes at p={p}")
    out = 1 / den
    if isinstance(out, complex) and abs(out.imag) <= 1e-15 * abs(out.real):
        return out.real
    return out


def _as_qsqrt(p: int, x) -> QSqrt:
    return x if isinstance(x, QSqrt) else QSqrt(p, Fraction(x))


def factorization_identity_check(p: int, a_p: int, eps_p: RootOfUnity, s) -> bool:
    """Exact check of the degree-2 regrouping at the point s:

        (1 - a x + e p x^2)(1 + a x + e p x^2) = 1 - b_p x^2 p + ... ,

    concretely: plus-factor times minus-factor against
    1 - b_p p^{-2s} + p^{2(1-2s)}, with x = p^{-s} and eps(p) = e = +-1.
    """
    if eps_p.is_zero or not eps_p.is_real():
        raise NotQuadraticError(f"eps({p}) = {eps_p} is not quadratic")
    s = Fraction(s)
    e = eps_p.real_sign()
    x = _as_qsqrt(p, power_p_to_minus(p, s))
    x2 = _as_qsqrt(p, power_p_to_minus(p, 2 * s - 1))     # p^{1-2s}
    plus = 1 - a_p * x + e * x2
    minus = 1 + a_p * x + e * x2
    b = bp_power_trace(a_p, e, p, 2)
    y2 = _as_qsqrt(p, power_p_to_minus(p, 2 * s))          # p^{-2s}
    y4 = _as_qsqrt(p, power_p_to_minus(p, 2 * (2 * s - 1)))  # p^{2(1-2s)}
    rhs = 1 - b * y2 + y4
    lhs = _as_qsqrt(p, plus) * _as_qsqrt(p, minus)
    return _simplify(lhs) == _simplify(rhs)


# ---------------------------------------------------------------------------
# Partial products
# ---------------------------------------------------------------------------

@dataclass
class ProductValue:
    """A truncated Euler product in log space: value = sign * exp(log_abs)."""

    log_abs: float = 0.0
    sign: int = 1
    factors: int = 0

    def multiply(self, value: float, exponent: int = 1):
        if value == 0:
            raise EulerFactorError("zero factor in a partial product")
        if value < 0:
            if exponent % 2:
                self.sign = -self.sign
            value = -value
        self.log_abs += exponent * math.log(value)
        self.factors += 1

    @property
    def value(self) -> float:
        return self.sign * math.exp(self.log_abs)

    def combined(self, *others: "ProductValue") -> "ProductValue":
        out = ProductValue(self.log_abs, self.sign, self.factors)
        for o in others:
            out.log_abs += o.log_abs
            out.sign *= o.sign
            out.factors += o.factors
        return out


@dataclass(frozen=True)
class PartialProductSpec:
    """What to multiply: a prime subset, a sign variant, a power, a point."""

    primes: object             # array-like of primes
    s: object                  # Fraction or float
    exponent: int = 1
    minus: bool = False
    decade_checkpoints: bool = True


@dataclass
class ProductRun:
    """Final value of a cropped product plus running checkpoint values."""

    spec: PartialProductSpec
    final: ProductValue
    checkpoints: list[tuple[int, float, int]] = field(default_factory=list)
    # rows (bound, log_abs, sign): the running value over p <= bound

    def checkpoint_values(self) -> list[tuple[int, float]]:
        return [(b, s * math.exp(la)) for b, la, s in self.checkpoints]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["T", "sigma", "value", "log_value"])
            sig = float(self.spec.s)
            for bound, log_abs, sign in self.checkpoints:
                w.writerow([bound, sig, sign * math.exp(log_abs), log_abs])


def partial_product(spec: PartialProductSpec, provider) -> ProductRun:
    """Multiply Euler factors over the prime subset in ascending order.

    provider(p) -> (a_p, eps_p).  Running values are recorded at each
    power-of-ten bound, and once more at the end.
    """
    primes = np.sort(np.asarray(spec.primes, dtype=np.int64))
    acc = ProductValue()
    checkpoints: list[tuple[int, float, int]] = []
    next_decade = 10
    sf = float(spec.s)
    for p in primes:
        p = int(p)
        while spec.decade_checkpoints and p > next_decade:
            checkpoints.append((next_decade, acc.log_abs, acc.sign))
            next_decade *= 10
        a_p, eps_p = provider(p)
        val = euler_factor(EulerFactorParams(p, a_p, eps_p), sf, minus=spec.minus)
        acc.multiply(float(val), spec.exponent)
    if spec.decade_checkpoints:
        checkpoints.append(
            (int(primes[-1]) if primes.size else next_decade, acc.log_abs, acc.sign)
        )
    return ProductRun(spec, acc, checkpoints)


def partial_product_exact(spec: PartialProductSpec, provider) -> Fraction:
    """Exact Fraction product over the subset; needs integer s (distinct
    primes cannot share a radicand) and exact factor inputs."""
    s = Fraction(spec.s)
    if s.denominator != 1:
        raise ValueError("exact products across primes need integer s")
    out = Fraction(1)
    for p in sorted(int(q) for q in np.asarray(spec.primes, dtype=np.int64)):
        a_p, eps_p = provider(p)
        val = euler_factor(EulerFactorParams(p, a_p, eps_p), s, minus=spec.minus)
        out *= Fraction(val)
    return out**spec.exponent


# ---------------------------------------------------------------------------
# The decomposition over the splitting field
# ---------------------------------------------------------------------------

def crop_factor_exponents(partition, field_degree: int) -> list[tuple[int, int, int]]:
    """(p, d(p), exponent) rows of the product over the splitting field:
    each prime contributes its degree-d(p) factor to the power [L:Q]/d(p)."""
    rows = []
    for p, d in zip(partition.primes, partition.dvals):
        d = int(d)
        if field_degree % d != 0:
            raise FieldAssertionError(
                f"d({int(p)}) = {d} does not divide [L:Q] = {field_degree}"
            )
        rows.append((int(p), d, field_degree // d))
    return rows


def crop_l_over_field(
    partition, provider, sigma, field_degree: int, T: int | None = None, exact: bool = False
):
    """Truncated product over the partition primes of the degree-d(p) factor
    raised to [L:Q]/d(p); asserts eps(p)^{d(p)} = 1 exactly per factor."""
    if exact:
        out = Fraction(1)
        for p, d, expo in crop_factor_exponents(partition, field_degree):
            if T is not None and p > T:
                continue
            a_p, eps_p = provider(p)
            val = degree_d_factor(EulerFactorParams(p, a_p, eps_p, d), Fraction(sigma))
            out *= Fraction(val) ** expo
        return out
    acc = ProductValue()
    for p, d, expo in crop_factor_exponents(partition, field_degree):
        if T is not None and p > T:
            continue
        a_p, eps_p = provider(p)
        val = degree_d_factor(EulerFactorParams(p, a_p, eps_p, d), float(sigma))
        acc.multiply(float(val), expo)
    return acc


def g_decomposition(
    partition, provider, sigma, field_degree: int, T: int | None = None, exact: bool = False
):
    """(G1, G2, G3): the same multiset of factors regrouped by residue degree.

    G1 runs over the degree-1 list with the linear-type factor to the power
    [L:Q] (for CM partitions this list also holds the inert degree-2 primes,
    whose degree-2 factor is the square of the linear-type factor);
    G2 takes the degree-2 factor to [L:Q]/2 over the degree-2 list;
    G3 takes the degree-d factor to [L:Q]/d over the rest.
    """
    labels = partition.labels()
    if exact:
        sigma = Fraction(sigma)
        g1 = g2 = g3 = Fraction(1)
        for p, d, lab in zip(partition.primes, partition.dvals, labels):
            p, d = int(p), int(d)
            if T is not None and p > T:
                continue
            a_p, eps_p = provider(p)
            if lab == "deg1":
                g1 *= Fraction(euler_factor(EulerFactorParams(p, a_p, eps_p), sigma)) ** field_degree
            elif lab == "deg2":
                g2 *= Fraction(degree_d_factor(EulerFactorParams(p, a_p, eps_p, 2), sigma)) ** (
                    field_degree // 2
                )
            else:
                g3 *= Fraction(degree_d_factor(EulerFactorParams(p, a_p, eps_p, d), sigma)) ** (
                    field_degree // d
                )
        return g1, g2, g3
    g1, g2, g3 = ProductValue(), ProductValue(), ProductValue()
    sf = float(sigma)
    for p, d, lab in zip(partition.primes, partition.dvals, labels):
        p, d = int(p), int(d)
        if T is not None and p > T:
            continue
        a_p, eps_p = provider(p)
        if lab == "deg1":
            g1.multiply(float(euler_factor(EulerFactorParams(p, a_p, eps_p), sf)), field_degree)
        elif lab == "deg2":
            g2.multiply(
                float(degree_d_factor(EulerFactorParams(p, a_p, eps_p, 2), sf)),
                field_degree // 2,
            )
        else:
            g3.multiply(
                float(degree_d_factor(EulerFactorParams(p, a_p, eps_p, d), sf)),
                field_degree // d,
            )
    return g1, g2, g3
