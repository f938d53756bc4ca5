"""Splitting-field descriptors and residue-degree partitions of primes.

Two kinds of descriptor:

* :class:`CyclotomicSplittingField` -- the non-CM case.  The splitting field
  sits inside the N-th cyclotomic field, so it is encoded by the subgroup H
  of (Z/NZ)* fixing it, and every residue degree is the order of a coset in
  (Z/NZ)*/H.

* :class:`RayClassDescriptor` -- the CM case with class number one.  The
  field is the compositum of the ray-class field cut out by the character
  eta attached to the Hecke character and of the cyclotomic field cut out
  by the nebentypus; residue degrees combine an eta-order and a
  nebentypus-order part.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .arith import (
    DirichletCharacter,
    NotAUnitError,
    RootOfUnity,
    UnitGroup,
    extend_character,
    quadratic_character,
    sieve_primes,
    PrimeTable,
)
from .quadratic import (
    ImagQuadField,
    QuadInt,
    ResidueRing,
    norm_generator,
    prime_above,
)


class RamifiedPrimeError(ValueError):
    """The prime divides the level and is excluded from every partition."""


class DescriptorError(ValueError):
    """Inconsistent splitting-field data."""


# ---------------------------------------------------------------------------
# Non-CM: subgroups of (Z/NZ)*
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CyclotomicSplittingField:
    """L = Q(zeta_N)^H for a subgroup H of (Z/NZ)*."""

    N: int
    H: frozenset[int]
    eps: DirichletCharacter | None = None

    def __post_init__(self):
        group = UnitGroup.of(self.N)
        order = group.order
        if not self.H:
            raise DescriptorError("H must contain 1")
        one = 1 % self.N
        if one not in self.H:
            raise DescriptorError("H must contain 1")
        if order % len(self.H) != 0:
            raise DescriptorError("|H| does not divide the group order")
        for a in self.H:
            if self.N > 1 and math.gcd(a % self.N, self.N) != 1:
                raise DescriptorError(f"{a} is not a unit mod {self.N}")
        if len(self.H) ** 2 <= 2_000_000:
            for a in self.H:
                for b in self.H:
                    if (a * b) % max(self.N, 1) not in self.H and self.N > 1:
                        raise DescriptorError("H is not closed under multiplication")
        if self.eps is not None and self.eps.modulus != self.N:
            raise DescriptorError("nebentypus modulus must equal N")
        if self.eps is not None:
            for a in self.H:
                if not self.eps(a).is_one():
                    raise DescriptorError("H is not contained in ker(eps)")

    @property
    def degree(self) -> int:
        """[L:Q] = |(Z/NZ)*| / |H|."""
        return UnitGroup.of(self.N).order // len(self.H)

    def residue_degree(self, p: int) -> int:
        """d(p): order of the coset pH in (Z/NZ)*/H; error for p | N."""
        if self.N > 1 and self.N % p == 0:
            raise RamifiedPrimeError(f"p={p} divides the level {self.N}")
        if self.N == 1:
            return 1
        a = p % self.N
        x = a
        for k in range(1, self.degree + 1):
            if x in self.H:
                return k
            x = x * a % self.N
        raise AssertionError("coset order exceeds [L:Q]")  # unreachable

    def residue_degree_table(self) -> np.ndarray:
        """Array t with t[a] = d(a) for units a mod N and 0 otherwise."""
        t = np.zeros(max(self.N, 2), dtype=np.int64)
        if self.N == 1:
            t[:] = 1
            return t
        for a in UnitGroup.of(self.N).elements():
            x = a
            for k in range(1, self.degree + 1):
                if x in self.H:
                    t[a] = k
                    break
                x = x * a % self.N
        return t

    def eps_sign_table(self) -> np.ndarray:
        """Array s with s[a] = +-1 where eps(a) is real, 0 otherwise."""
        s = np.zeros(max(self.N, 2), dtype=np.int64)
        if self.eps is None:
            if self.N == 1:
                s[:] = 1
                return s
            for a in UnitGroup.of(self.N).elements():
                s[a] = 1
            return s
        for a in UnitGroup.of(self.N).elements():
            v = self.eps(a)
            s[a] = v.real_sign() if v.is_real() else 0
        return s

    def chebotarev_densities(self) -> dict[int, float]:
        """Expected density of {p : d(p) = k}: the proportion of elements of
        order k in (Z/NZ)*/H."""
        if self.N == 1:
            return {1: 1.0}
        counts: dict[int, int] = {}
        seen: set[int] = set()
        for a in UnitGroup.of(self.N).elements():
            if a in seen:
                continue
            coset = {a * h % self.N for h in self.H}
            seen |= coset
            x, k = a, 1
            while x not in self.H:
                x = x * a % self.N
                k += 1
            counts[k] = counts.get(k, 0) + 1
        deg = self.degree
        return {k: c / deg for k, c in sorted(counts.items())}


def field_from_inner_twists(
    N: int,
    eps: DirichletCharacter,
    twists: Iterable[DirichletCharacter],
) -> CyclotomicSplittingField:
    """Splitting-field subgroup H = ker(eps) intersected with the kernels of
    the inner-twist characters, all extended to modulus N."""
    if eps.modulus != N:
        if N % eps.modulus != 0:
            raise DescriptorError(f"nebentypus modulus {eps.modulus} incompatible with N={N}")
        eps = extend_character(eps, N)
    chars = [eps]
    for chi in twists:
        if N % chi.modulus != 0:
            raise DescriptorError(f"twist modulus {chi.modulus} does not divide N={N}")
        chars.append(extend_character(chi, N))
    if N == 1:
        return CyclotomicSplittingField(1, frozenset({0}), eps)
    H = frozenset(
        a
        for a in UnitGroup.of(N).elements()
        if all(c(a).is_one() for c in chars)
    )
    return CyclotomicSplittingField(N, H, eps)


# ---------------------------------------------------------------------------
# CM: ray-class data for class-number-one fields
# ---------------------------------------------------------------------------

def order_modulo(value: RootOfUnity, image: frozenset[RootOfUnity] | set[RootOfUnity]) -> int:
    """Least k >= 1 with value**k in the given subgroup of roots of unity."""
    if value.is_zero:
        raise ValueError("zero has no order")
    acc = value
    for k in range(1, value.order + 1):
        if acc in image:
            return k
        acc = acc * value
    raise AssertionError("value**order is 1, which must lie in the image")


@dataclass(frozen=True, eq=False)
class RayClassDescriptor:
    """Conductor ideal, eta on (O/m)*, and nebentypus for a CM newform.

    eta is stored as a full value table on the unit residues (exact roots of
    unity), so evaluation never needs discrete logs in (O/m)*.
    """

    field: ImagQuadField
    conductor: QuadInt
    eta_table: dict[tuple[int, int], RootOfUnity]
    eps: DirichletCharacter

    def __post_init__(self):
        self.field.require_native()
        ring = self.ring
        units = self.field.units()
        # units must inject into (O/m)*
        keys = {ring.key(u) for u in units}
        if len(keys) != len(units):
            raise DescriptorError("units of K do not inject into (O/m)*")
        # eta on a unit u must be the inverse root of unity of u, which makes
        # psi((a)) = eta(a)*a independent of the generator; in particular the
        # only unit in ker(eta) is 1
        for u in units:
            expected = self.field.unit_as_root_of_unity(u).conj()
            if self.eta_table[ring.key(u)] != expected:
                raise DescriptorError(f"eta({u}) must equal the inverse unit")
        # nebentypus factorization eps = eta * chi_K on rational residues
        chi = quadratic_character(self.field.D)
        for n in range(1, min(2 * self.level, 400)):
            if math.gcd(n, self.level) != 1:
                continue
            lhs = self.eps(n)
            rhs = self.eta_of(self.field.element(n)) * chi(n)
            if lhs != rhs:
                raise DescriptorError(
                    f"eps({n}) != eta({n})*chi({n}): {lhs} vs {rhs}"
                )

    @property
    def ring(self) -> ResidueRing:
        ring = getattr(self, "_ring_cache", None)
        if ring is None:
            ring = ResidueRing(self.field, self.conductor)
            object.__setattr__(self, "_ring_cache", ring)
        return ring

    @property
    def level(self) -> int:
        """N = Norm(conductor) * |D|."""
        return self.conductor.norm() * abs(self.field.D)

    @property
    def unit_image(self) -> frozenset[RootOfUnity]:
        cached = getattr(self, "_unit_image_cache", None)
        if cached is None:
            cached = frozenset(
                self.eta_table[self.ring.key(u)] for u in self.field.units()
            )
            object.__setattr__(self, "_unit_image_cache", cached)
        return cached

    def eta_of(self, alpha: QuadInt) -> RootOfUnity:
        key = self.ring.key(alpha)
        try:
            return self.eta_table[key]
        except KeyError as exc:
            raise NotAUnitError(f"{alpha} is not prime to the conductor") from exc

    # -- Hecke values ---------------------------------------------------

    def psi_parts(self, p: int) -> tuple[RootOfUnity, QuadInt]:
        """psi(P) for one prime P above the split prime p, as the exact pair
        (root of unity, quadratic integer): psi(P) = eta(alpha) * alpha."""
        alpha = norm_generator(self.field, p)
        return self.eta_of(alpha), alpha

    def psi_value(self, p: int) -> complex:
        zeta, alpha = self.psi_parts(p)
        return complex(zeta) * complex(alpha)

    @staticmethod
    def from_eta_generators(
        field_: ImagQuadField,
        conductor: QuadInt,
        generators: list[tuple[QuadInt, RootOfUnity]],
        eps: DirichletCharacter,
    ) -> "RayClassDescriptor":
        """Build the full eta table multiplicatively from values on generators
        of (O/m)*; fails if the generators do not generate."""
        ring = ResidueRing(field_, conductor)
        units = ring.unit_representatives()
        unit_keys = {ring.key(u) for u in units}
        table: dict[tuple[int, int], RootOfUnity] = {ring.key(field_.element(1)): RootOfUnity.one()}
        frontier = [(field_.element(1), RootOfUnity.one())]
        while frontier:
            elem, val = frontier.pop()
            for gen, gval in generators:
                nxt = ring.reduce(elem * gen)
                key = ring.key(nxt)
                if key not in table:
                    table[key] = val * gval
                    frontier.append((nxt, val * gval))
        if set(table) != unit_keys:
            raise DescriptorError(
                f"generators span {len(table)} of {len(unit_keys)} unit residues"
            )
        return RayClassDescriptor(field_, conductor, table, eps)

    @staticmethod
    def from_unit_normalization(
        field_: ImagQuadField,
        conductor: QuadInt,
        eps: DirichletCharacter,
        target: QuadInt | None = None,
        norm_modulus: QuadInt | None = None,
    ) -> "RayClassDescriptor":
        """eta from a congruence normalization: psi((a)) is the unique
        associate of a congruent to `target` mod `norm_modulus`.

        Valid only when the units of K biject onto the unit residues of the
        normalization modulus; otherwise no congruence pins a generator and
        the eta values must be supplied explicitly.
        """
        ring = ResidueRing(field_, conductor)
        nring = ring if norm_modulus is None else ResidueRing(field_, norm_modulus)
        tgt = field_.element(1) if target is None else target
        units = field_.units()
        table: dict[tuple[int, int], RootOfUnity] = {}
        for rep in ring.unit_representatives():
            matches = [u for u in units if nring.congruent(u * rep, tgt)]
            if len(matches) != 1:
                raise DescriptorError(
                    f"normalization does not pin a unique associate for {rep} "
                    f"({len(matches)} matches)"
                )
            table[ring.key(rep)] = field_.unit_as_root_of_unity(matches[0])
        return RayClassDescriptor(field_, conductor, table, eps)

    # -- residue degrees -------------------------------------------------

    def cm_residue_degree(self, p: int) -> tuple[int, int]:
        """(d(P), d(p)) for the primes above p in the splitting field.

        d(P) = lcm of the order of eta(alpha) modulo the unit image (alpha a
        generator of P) and the order of eps at Norm(P); d(p) doubles it for
        inert p.
        """
        if self.level % p == 0:
            raise RamifiedPrimeError(f"p={p} divides the level {self.level}")
        st = self.field.split_type(p)
        alpha = prime_above(self.field, p)
        k_eta = order_modulo(self.eta_of(alpha), self.unit_image)
        eps_val = self.eps(p) if st == "split" else self.eps(p) ** 2
        k_eps = eps_val.order
        d_ideal = math.lcm(k_eta, k_eps)
        d_p = d_ideal if st == "split" else 2 * d_ideal
        return d_ideal, d_p


# ---------------------------------------------------------------------------
# Partitions
# ---------------------------------------------------------------------------

LABEL_DEG1 = "deg1"
LABEL_DEG2 = "deg2"
LABEL_DEG3 = "deg3+"


@dataclass
class PrimePartition:
    """Primes up to a bound split by residue degree in the splitting field.

    For CM descriptors the degree-2 inert primes land in the degree-1 list
    (their Euler factor is a perfect square of a linear-type factor), and
    ideal-level lists are populated.
    """

    bound: int
    level: int
    primes: np.ndarray
    dvals: np.ndarray
    cm: bool
    eps_signs: np.ndarray | None = None      # +-1 per prime where real
    split_flags: np.ndarray | None = None    # CM: +1 split, -1 inert
    d_ideal: np.ndarray | None = None        # CM: d(P) per prime

    # -- membership -----------------------------------------------------

    def labels(self) -> np.ndarray:
        lab = np.empty(self.primes.size, dtype=object)
        d = self.dvals
        if self.cm:
            split = self.split_flags == 1
            lab[(d == 1) | ((d == 2) & ~split)] = LABEL_DEG1
            lab[(d == 2) & split] = LABEL_DEG2
        else:
            lab[d == 1] = LABEL_DEG1
            lab[d == 2] = LABEL_DEG2
        lab[d >= 3] = LABEL_DEG3
        return lab

    @property
    def deg1(self) -> np.ndarray:
        if self.cm:
            keep = (self.dvals == 1) | ((self.dvals == 2) & (self.split_flags == -1))
            return self.primes[keep]
        return self.primes[self.dvals == 1]

    @property
    def deg2(self) -> np.ndarray:
        if self.cm:
            return self.primes[(self.dvals == 2) & (self.split_flags == 1)]
        return self.primes[self.dvals == 2]

    @property
    def deg3(self) -> np.ndarray:
        return self.primes[self.dvals >= 3]

    @property
    def deg2_plus(self) -> np.ndarray:
        self._need_signs()
        return self.primes[(self.labels() == LABEL_DEG2) & (self.eps_signs == 1)]

    @property
    def deg2_minus(self) -> np.ndarray:
        self._need_signs()
        return self.primes[(self.labels() == LABEL_DEG2) & (self.eps_signs == -1)]

    def _need_signs(self):
        if self.eps_signs is None:
            raise DescriptorError("partition carries no nebentypus signs")

    # -- CM ideal-level lists --------------------------------------------

    def ideal_deg1(self) -> list[tuple[int, int]]:
        """(p, number of primes P above p with d(P) = 1)."""
        return self._ideal_list(lambda di, split: di == 1)

    def ideal_deg2_split(self) -> list[tuple[int, int]]:
        """d(P) = 2 with P different from its conjugate (split p only)."""
        return self._ideal_list(lambda di, split: di == 2 and split)

    def ideal_rest(self) -> list[tuple[int, int]]:
        """d(P) = 2 self-conjugate (inert) together with d(P) >= 3."""
        return self._ideal_list(lambda di, split: di >= 3 or (di == 2 and not split))

    def _ideal_list(self, pred) -> list[tuple[int, int]]:
        if not self.cm:
            raise DescriptorError("ideal-level lists exist only for CM partitions")
        out = []
        for p, di, s in zip(self.primes, self.d_ideal, self.split_flags):
            split = s == 1
            if pred(int(di), split):
                out.append((int(p), 2 if split else 1))
        return out

    # -- reports ----------------------------------------------------------

    def density_report(self) -> dict:
        n = int(self.primes.size)
        lab = self.labels()
        rep = {
            "bound": self.bound,
            "level": self.level,
            "prime_count": n,
            "counts": {
                LABEL_DEG1: int((lab == LABEL_DEG1).sum()),
                LABEL_DEG2: int((lab == LABEL_DEG2).sum()),
                LABEL_DEG3: int((lab == LABEL_DEG3).sum()),
            },
        }
        if n:
            rep["fractions"] = {k: v / n for k, v in rep["counts"].items()}
            dmax = int(self.dvals.max())
            rep["degree_fractions"] = {
                int(k): float((self.dvals == k).sum()) / n for k in range(1, dmax + 1)
                if (self.dvals == k).any()
            }
        return rep

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["p", "d", "set", "eps_sign"])
            lab = self.labels()
            signs = (
                self.eps_signs
                if self.eps_signs is not None
                else np.zeros(self.primes.size, dtype=np.int64)
            )
            for p, d, l, s in zip(self.primes, self.dvals, lab, signs):
                writer.writerow([int(p), int(d), l, int(s)])

    def to_json(self) -> dict:
        out = {
            "bound": self.bound,
            "level": self.level,
            "deg1": [int(p) for p in self.deg1],
            "deg2": [int(p) for p in self.deg2],
            "deg3": [int(p) for p in self.deg3],
        }
        if self.eps_signs is not None:
            out["deg2_plus"] = [int(p) for p in self.deg2_plus]
            out["deg2_minus"] = [int(p) for p in self.deg2_minus]
        if self.cm:
            out["ideal_deg1"] = self.ideal_deg1()
            out["ideal_deg2_split"] = self.ideal_deg2_split()
            out["ideal_rest"] = self.ideal_rest()
        return out

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def partition_primes(
    descriptor: CyclotomicSplittingField | RayClassDescriptor,
    bound: int,
    primes: PrimeTable | None = None,
) -> PrimePartition:
    """Partition the primes up to the bound by residue degree, per descriptor."""
    if primes is None:
        primes = sieve_primes(bound)
    if isinstance(descriptor, CyclotomicSplittingField):
        ps = primes.coprime_to(descriptor.N)
        table = descriptor.residue_degree_table()
        dvals = table[ps % max(descriptor.N, 2)] if descriptor.N > 1 else np.ones(ps.size, dtype=np.int64)
        signs = descriptor.eps_sign_table()
        eps_signs = signs[ps % max(descriptor.N, 2)] if descriptor.N > 1 else np.ones(ps.size, dtype=np.int64)
        bad = (dvals == 2) & (eps_signs == 0)
        if bad.any():
            raise DescriptorError(
                "non-real nebentypus value on a degree-2 prime; H exceeds ker(eps)"
            )
        return PrimePartition(
            bound=bound,
            level=descriptor.N,
            primes=ps,
            dvals=dvals,
            cm=False,
            eps_signs=eps_signs,
        )
    ray = descriptor
    ps = primes.coprime_to(ray.level)
    dvals = np.empty(ps.size, dtype=np.int64)
    dideal = np.empty(ps.size, dtype=np.int64)
    flags = np.empty(ps.size, dtype=np.int64)
    signs = np.empty(ps.size, dtype=np.int64)
    for i, p in enumerate(ps):
        p = int(p)
        di, dp = ray.cm_residue_degree(p)
        dideal[i] = di
        dvals[i] = dp
        flags[i] = 1 if ray.field.split_type(p) == "split" else -1
        v = ray.eps(p)
        signs[i] = v.real_sign() if v.is_real() else 0
    return PrimePartition(
        bound=bound,
        level=ray.level,
        primes=ps,
        dvals=dvals,
        cm=True,
        eps_signs=signs,
        split_flags=flags,
        d_ideal=dideal,
    )
