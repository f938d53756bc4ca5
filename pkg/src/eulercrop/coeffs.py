"""Frobenius-trace providers: elliptic curves, CM Hecke characters, orbit files.

Three interchangeable sources of (a_p, eps(p)) per prime:

* :class:`EllipticCurveSource` -- a_p = p + 1 - #E(F_p) by direct point
  counting over F_p (quadratic-residue table, O(p) per prime);
* :class:`HeckeCharacterSource` -- a_p from exact Hecke character values
  psi(P) = eta(alpha) * alpha on a class-number-one imaginary quadratic field;
* :class:`OrbitData` -- validated tables of embedded coefficients loaded from
  JSON (local file or remote fetch), for forms with [E:Q] > 1 or class
  number > 1.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urlparse

import numpy as np

from .arith import (
    DirichletCharacter,
    RootOfUnity,
    all_quadratic_characters,
    character_from_values,
    trivial_character,
)
from .quadratic import ImagQuadField, QuadInt
from .splitting import RayClassDescriptor

FLOAT_TOL = 1e-9  # identity checks on float embeddings from external tables


class BadReductionError(ValueError):
    """a_p requested at a prime of bad reduction."""


class OrbitSchemaError(ValueError):
    """Orbit file does not match the documented schema."""


class DeligneBoundError(ValueError):
    """|a_p| > 2*sqrt(p) in an orbit row."""


class TwistRelationError(ValueError):
    """A declared inner twist fails on the stored primes."""


class InsufficientDataError(ValueError):
    """Too few usable primes for twist detection."""


class FetchError(RuntimeError):
    """Remote orbit could not be retrieved or converted."""


# ---------------------------------------------------------------------------
# Elliptic curves: y^2 = x^3 + A x + B
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EllipticCurveSource:
    """Weierstrass curve over Q with integer coefficients.

    The common short form y^2 = x^3 + Ax + B is the (A, B) constructor;
    a full (a1, a2, a3, a4, a6) model is accepted so that minimal models
    keep good reduction at 2 and 3.
    """

    A: int
    B: int
    conductor: int
    cm_discriminant: int | None = None
    a1: int = 0
    a2: int = 0
    a3: int = 0

    def __post_init__(self):
        if self._discriminant() == 0:
            raise ValueError("singular curve: discriminant is zero")

    @property
    def a4(self) -> int:
        return self.A

    @property
    def a6(self) -> int:
        return self.B

    def _discriminant(self) -> int:
        b2 = self.a1**2 + 4 * self.a2
        b4 = 2 * self.a4 + self.a1 * self.a3
        b6 = self.a3**2 + 4 * self.a6
        b8 = (
            self.a1**2 * self.a6
            + 4 * self.a2 * self.a6
            - self.a1 * self.a3 * self.a4
            + self.a2 * self.a3**2
            - self.a4**2
        )
        return -(b2**2) * b8 - 8 * b4**3 - 27 * b6**2 + 9 * b2 * b4 * b6

    @property
    def level(self) -> int:
        return self.conductor

    def eps(self, p: int) -> RootOfUnity:
        return RootOfUnity.one() if self.conductor % p else RootOfUnity.zero()

    def ap(self, p: int) -> int:
        """a_p = p + 1 - #E(F_p) by direct counting over F_p.

        Odd p: complete the square, then sum the quadratic character of the
        resulting quartic-free cubic via a residue table (O(p) per prime).
        """
        if self.conductor % p == 0:
            raise BadReductionError(f"p={p} divides the conductor {self.conductor}")
        if p == 2:
            return self._ap2()
        x = np.arange(p, dtype=np.int64)
        xx = x * x % p
        # (2y + a1 x + a3)^2 = (a1 x + a3)^2 + 4(x^3 + a2 x^2 + a4 x + a6)
        c = ((self.a1 % p) * x + self.a3) % p
        cubic = (xx * x + (self.a2 % p) * xx + (self.a4 % p) * x + self.a6 % p) % p
        rhs = (c * c + 4 * cubic) % p
        legendre = np.full(p, -1, dtype=np.int64)
        legendre[xx[1:]] = 1
        legendre[0] = 0
        a = -int(legendre[rhs].sum())
        assert a * a <= 4 * p, "Hasse bound violated; counting bug"
        return a

    def _ap2(self) -> int:
        count = 1  # point at infinity
        for x in range(2):
            for y in range(2):
                lhs = (y * y + self.a1 * x * y + self.a3 * y) % 2
                rhs = (x**3 + self.a2 * x * x + self.a4 * x + self.a6) % 2
                if lhs == rhs:
                    count += 1
        return 2 + 1 - count

    def ap_table(self, primes: np.ndarray) -> dict[int, int]:
        """a_p for every good prime in the array."""
        return {
            int(p): self.ap(int(p))
            for p in primes
            if self.conductor % int(p) != 0
        }


def curve_11a() -> EllipticCurveSource:
    """11a1: y^2 + y = x^3 - x^2 - 10x - 20 (minimal model, conductor 11)."""
    return EllipticCurveSource(A=-10, B=-20, conductor=11, a1=0, a2=-1, a3=1)


def curve_32a() -> EllipticCurveSource:
    """32a: y^2 = x^3 - x, conductor 32, CM by Z[i]."""
    return EllipticCurveSource(A=-1, B=0, conductor=32, cm_discriminant=-4)


# ---------------------------------------------------------------------------
# Hecke characters (CM, class number one)
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HeckeCharacterSource:
    """Weight-2 coefficients a_p = psi(P) + psi(conj P) from ray-class data."""

    ray: RayClassDescriptor

    @property
    def level(self) -> int:
        return self.ray.level

    def eps(self, p: int) -> RootOfUnity:
        return self.ray.eps(p)

    def psi_pair(self, p: int) -> tuple[QuadInt, QuadInt]:
        """Exact (psi(P), psi(conj P)) for a split prime, as quadratic integers.

        Defined when eta takes unit values on the generators involved (always
        the case for the unit-normalization construction)."""
        zeta, alpha = self.ray.psi_parts(p)
        v1 = self._times_unit(zeta, alpha)
        beta = alpha.conj()
        v2 = self._times_unit(self.ray.eta_of(beta), beta)
        return v1, v2

    def _times_unit(self, zeta: RootOfUnity, alpha: QuadInt) -> QuadInt:
        K = self.ray.field
        n = len(K.units())
        if zeta.is_zero or (n % zeta.order) != 0:
            raise ValueError(
                f"eta value {zeta} is not a unit of Q(sqrt({K.D})); "
                "exact quadratic-integer psi undefined"
            )
        u = K.unit_root_power(zeta.k * (n // zeta.m))
        return u * alpha

    def ap(self, p: int) -> int:
        """Exact a_p: trace of psi(P) for split p, 0 for inert p."""
        if self.level % p == 0:
            raise BadReductionError(f"p={p} divides the level {self.level}")
        st = self.ray.field.split_type(p)
        if st == "inert":
            return 0
        v1, v2 = self.psi_pair(p)
        total = v1 + v2
        assert total.y == 0, "psi(P) + psi(conj P) must be rational"
        assert total.x * total.x <= 4 * p, "Hasse bound violated"
        return total.x

    def euler_params(self, p: int) -> tuple[int, RootOfUnity]:
        """(a_p, eps(p)) for the degree-2 Euler factor at p."""
        return self.ap(p), self.eps(p)


# ---------------------------------------------------------------------------
# Orbit tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InnerTwist:
    sigma_index: int
    chi: DirichletCharacter


@dataclass
class OrbitData:
    """Galois-orbit coefficient table: n embeddings of a_p per prime."""

    level: int
    eps: DirichletCharacter
    n: int
    primes: list[int]
    ap: dict[int, list[complex]]
    eps_p: dict[int, RootOfUnity]
    twists: list[InnerTwist] = field(default_factory=list)
    degrees: dict[str, int] = field(default_factory=dict)
    d_override: dict[int, int] = field(default_factory=dict)
    cm: bool = False

    def ap_embedding(self, p: int, sigma: int = 0) -> complex:
        return self.ap[p][sigma]

    def validate(self):
        for p in self.primes:
            rows = self.ap[p]
            if len(rows) != self.n:
                raise OrbitSchemaError(f"row p={p} has {len(rows)} embeddings, not {self.n}")
            for a in rows:
                if abs(a) > 2 * math.sqrt(p) + FLOAT_TOL:
                    raise DeligneBoundError(f"|a_{p}| = {abs(a):.6g} > 2*sqrt({p})")
        for tw in self.twists:
            if not 0 <= tw.sigma_index < self.n:
                raise OrbitSchemaError(f"twist refers to embedding {tw.sigma_index}")
            self._check_twist(tw)

    def _check_twist(self, tw: InnerTwist):
        """sigma(a_p) = chi(p) a_p on every stored prime."""
        for p in self.primes:
            chi_p = complex(tw.chi(p))
            lhs = self.ap[p][tw.sigma_index]
            rhs = chi_p * self.ap[p][0]
            if abs(lhs - rhs) > FLOAT_TOL * max(1.0, abs(rhs)):
                raise TwistRelationError(
                    f"twist sigma={tw.sigma_index} fails at p={p}: {lhs} != {rhs}"
                )


def detect_inner_twists(orbit: OrbitData, max_order: int = 2) -> list[InnerTwist]:
    """Search characters of modulus dividing the level (order <= max_order)
    satisfying sigma(a_p) = chi(p) a_p on all stored primes with a_p != 0.

    Includes the self-twist case sigma_index = 0 with nontrivial chi, which
    flags CM.  At most one twist is reported per embedding.
    """
    usable = [p for p in orbit.primes if any(abs(a) > FLOAT_TOL for a in orbit.ap[p])]
    if len(usable) < 50:
        raise InsufficientDataError(
            f"only {len(usable)} usable primes; need at least 50"
        )
    if max_order > 2:
        raise NotImplementedError("detection currently covers quadratic twists")
    found: list[InnerTwist] = []
    candidates = all_quadratic_characters(orbit.level)
    for sigma in range(orbit.n):
        matches = []
        for chi in candidates:
            if sigma == 0 and chi.is_trivial():
                continue  # identity is not a twist
            ok = True
            for p in orbit.primes:
                a0 = orbit.ap[p][0]
                if abs(a0) <= FLOAT_TOL:
                    continue
                if abs(orbit.ap[p][sigma] - complex(chi(p)) * a0) > FLOAT_TOL * max(
                    1.0, abs(a0)
                ):
                    ok = False
                    break
            if ok:
                matches.append(chi)
        if len(matches) > 1:
            raise TwistRelationError(
                f"twist for embedding {sigma} is not unique on the stored primes"
            )
        if matches:
            found.append(InnerTwist(sigma, matches[0]))
    return found


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

def _char_from_json(data: dict) -> DirichletCharacter:
    try:
        modulus = int(data["modulus"])
        values = [(int(k), int(m)) for k, m in data["generator_values"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise OrbitSchemaError(f"bad character description: {data!r}") from exc
    return character_from_values(modulus, values)


def _char_to_json(chi: DirichletCharacter) -> dict:
    return {
        "modulus": chi.modulus,
        "generator_values": [[v.k, v.m] for v in chi.generator_values],
    }


def _parse_native(data: dict) -> OrbitData:
    try:
        level = int(data["level"])
        n = int(data["n"])
        rows = data["primes"]
    except (KeyError, TypeError, ValueError) as exc:
        raise OrbitSchemaError(f"missing or malformed field: {exc}") from exc
    eps = _char_from_json(data["eps"]) if "eps" in data else trivial_character(level)
    primes: list[int] = []
    ap: dict[int, list[complex]] = {}
    eps_p: dict[int, RootOfUnity] = {}
    for row in rows:
        try:
            p = int(row["p"])
            values = [
                complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
                for v in row["ap"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise OrbitSchemaError(f"malformed prime row: {row!r}") from exc
        primes.append(p)
        ap[p] = values
        if "eps_p" in row:
            eps_p[p] = RootOfUnity(int(row["eps_p"]["k"]), int(row["eps_p"]["m"]))
        else:
            eps_p[p] = eps(p)
    twists = [
        InnerTwist(int(t["sigma_index"]), _char_from_json(t["chi"]))
        for t in data.get("twists", [])
    ]
    degrees = {k: int(v) for k, v in data.get("degrees", {}).items()}
    d_override = {int(r["p"]): int(r["d"]) for r in data.get("d_override", [])}
    orbit = OrbitData(
        level=level,
        eps=eps,
        n=n,
        primes=sorted(primes),
        ap=ap,
        eps_p=eps_p,
        twists=twists,
        degrees=degrees,
        d_override=d_override,
        cm=bool(data.get("cm", False)),
    )
    orbit.validate()
    return orbit


def _parse_ap_map(data: dict) -> OrbitData:
    """Compact external shape: {"format": "ap-table", "level": N,
    "ap": {"2": -2, ...}}; one embedding, trivial nebentypus."""
    try:
        level = int(data["level"])
        table = {int(p): complex(v) for p, v in data["ap"].items()}
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise OrbitSchemaError(f"malformed ap-table payload: {exc}") from exc
    rows = [{"p": p, "ap": [[v.real, v.imag]]} for p, v in sorted(table.items())]
    return _parse_native({"level": level, "n": 1, "primes": rows})


def orbit_from_json(data: dict) -> OrbitData:
    if not isinstance(data, dict):
        raise OrbitSchemaError("payload is not a JSON object")
    if data.get("format") == "ap-table":
        return _parse_ap_map(data)
    return _parse_native(data)


def ingest_orbit(path: str | Path) -> OrbitData:
    """Load and validate an orbit file (schema in the README)."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise OrbitSchemaError(f"not valid JSON: {exc}") from exc
    return orbit_from_json(data)


def orbit_to_json(orbit: OrbitData) -> dict:
    rows = []
    for p in orbit.primes:
        v = orbit.eps_p[p]
        rows.append(
            {
                "p": p,
                "ap": [[a.real, a.imag] for a in orbit.ap[p]],
                "eps_p": {"k": v.k, "m": v.m} if not v.is_zero else {"k": 0, "m": 1},
            }
        )
    return {
        "level": orbit.level,
        "eps": _char_to_json(orbit.eps),
        "n": orbit.n,
        "primes": rows,
        "twists": [
            {"sigma_index": t.sigma_index, "chi": _char_to_json(t.chi)}
            for t in orbit.twists
        ],
        "degrees": orbit.degrees,
        "d_override": [{"p": p, "d": d} for p, d in sorted(orbit.d_override.items())],
        "cm": orbit.cm,
    }


def orbit_from_curve(
    curve: EllipticCurveSource, bound: int, primes: np.ndarray
) -> OrbitData:
    """Single-embedding orbit built from point counts (testing and export)."""
    rows = []
    for p in primes:
        p = int(p)
        if p > bound or p < 3 or curve.conductor % p == 0:
            continue
        rows.append({"p": p, "ap": [[float(curve.ap(p)), 0.0]]})
    return _parse_native({"level": curve.conductor, "n": 1, "primes": rows})


# ---------------------------------------------------------------------------
# Remote fetch
# ---------------------------------------------------------------------------

CACHE_ENV = "EULERCROP_CACHE"
DEFAULT_REMOTE_TEMPLATE = "https://www.lmfdb.org/api/mf_newforms/?label={label}"


def _cache_dir() -> Path:
    root = os.environ.get(CACHE_ENV)
    if root:
        return Path(root)
    return Path.home() / ".cache" / "eulercrop"


def fetch_orbit(url_or_id: str, cache_dir: Path | None = None) -> OrbitData:
    """Fetch an orbit payload (http(s)://, file://, or a bare label expanded
    through the documented remote template), cache the raw bytes, and parse.

    A repeated call is served from the cache byte-identically.  Failures
    never leave a partial cache entry.
    """
    if "://" in url_or_id:
        url = url_or_id
    else:
        url = DEFAULT_REMOTE_TEMPLATE.format(label=url_or_id)
    cache = Path(cache_dir) if cache_dir else _cache_dir()
    cache.mkdir(parents=True, exist_ok=True)
    key = hashlib.sha256(url.encode()).hexdigest()[:24]
    entry = cache / f"{key}.json"
    if entry.exists():
        payload = entry.read_bytes()
    else:
        payload = _download(url)
        tmp = entry.with_suffix(".tmp")
        tmp.write_bytes(payload)
        tmp.replace(entry)
    try:
        data = json.loads(payload.decode("utf-8"))
        return orbit_from_json(data)
    except (OrbitSchemaError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FetchError(f"payload from {url} cannot be converted: {exc}") from exc


def _download(url: str) -> bytes:
    scheme = urlparse(url).scheme
    if scheme == "file":
        path = urlparse(url).path
        try:
            return Path(path).read_bytes()
        except OSError as exc:
            raise FetchError(f"cannot read {url}: {exc}") from exc
    import requests

    try:
        resp = requests.get(url, timeout=30)
        resp.raise_for_status()
    except requests.RequestException as exc:
        raise FetchError(f"download failed for {url}: {exc}") from exc
    return resp.content
