"""Limit laws and convergence diagnostics for Frobenius-trace statistics.

Measures: the semicircle law for a_p/(2 sqrt p) of a non-CM form, the
arcsine law for the CM case, the two skewed laws governing b_p/(2p) on the
degree-2 prime classes, and the uniform angle law.  Against these:
Kolmogorov-Smirnov distances, running expectations with rate functions,
product-vs-series convergence equivalence, symmetric-square partial sums,
and a regression estimator for the order of truncated Euler products at
s = 1.

Finite-data verdicts here are heuristic classifications with declared
thresholds (drift across the last decades); reports always carry the raw
checkpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import RootOfUnity
from .calibration import CALIBRATION


class EmptySampleError(ValueError):
    """A statistic was requested on an empty sample."""


class BoundViolationError(ValueError):
    """A sequence violates its declared growth bound."""


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

SATO_TATE = "sato_tate"
CM_ARCSINE = "cm_arcsine"
MU_PLUS = "mu_plus"
MU_MINUS = "mu_minus"
UNIFORM_ANGLE = "uniform_angle"

_KINDS = (SATO_TATE, CM_ARCSINE, MU_PLUS, MU_MINUS, UNIFORM_ANGLE)


@dataclass(frozen=True)
class MeasureDescriptor:
    """One of the five limit laws, with closed-form CDF and density."""

    kind: str
    support: tuple[float, float] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.support is None:
            default = (0.0, 2 * math.pi) if self.kind == UNIFORM_ANGLE else (-1.0, 1.0)
            object.__setattr__(self, "support", default)

    def cdf(self, x: float) -> float:
        a, b = self.support
        if x <= a:
            return 0.0
        if x >= b:
            return 1.0
        if self.kind == SATO_TATE:
            return 0.5 + (x * math.sqrt(1 - x * x) + math.asin(x)) / math.pi
        if self.kind == CM_ARCSINE:
            return 0.5 + math.asin(x) / math.pi
        if self.kind == MU_PLUS:
            return 0.5 + (math.asin(x) + math.sqrt(1 - x * x)) / math.pi
        if self.kind == MU_MINUS:
            return 0.5 + (math.asin(x) - math.sqrt(1 - x * x)) / math.pi
        return (x - a) / (b - a)

    def cdf_array(self, xs: np.ndarray) -> np.ndarray:
        a, b = self.support
        xs = np.clip(xs, a, b)
        if self.kind == SATO_TATE:
            return 0.5 + (xs * np.sqrt(1 - xs * xs) + np.arcsin(xs)) / np.pi
        if self.kind == CM_ARCSINE:
            return 0.5 + np.arcsin(xs) / np.pi
        if self.kind == MU_PLUS:
            return 0.5 + (np.arcsin(xs) + np.sqrt(1 - xs * xs)) / np.pi
        if self.kind == MU_MINUS:
            return 0.5 + (np.arcsin(xs) - np.sqrt(1 - xs * xs)) / np.pi
        return (xs - a) / (b - a)

    def density(self, x: float) -> float:
        a, b = self.support
        if x < a or x > b:
            return 0.0
        if self.kind == SATO_TATE:
            return 2 / math.pi * math.sqrt(max(0.0, 1 - x * x))
        if self.kind == CM_ARCSINE:
            return 1 / (math.pi * math.sqrt(1 - x * x)) if abs(x) < 1 else 0.0
        if self.kind == MU_PLUS:
            return math.sqrt((1 - x) / (1 + x)) / math.pi if abs(x) < 1 else 0.0
        if self.kind == MU_MINUS:
            return math.sqrt((1 + x) / (1 - x)) / math.pi if abs(x) < 1 else 0.0
        return 1 / (b - a)

    def cdf_quadrature(self, x: float, tol: float = 1e-10) -> float:
        """CDF by adaptive quadrature of the density (cross-check path)."""
        from scipy.integrate import quad

        a, b = self.support
        x = min(max(x, a), b)
        val, _ = quad(self.density, a, x, epsabs=tol, limit=200)
        return val

    def mean(self) -> float:
        return {
            SATO_TATE: 0.0,
            CM_ARCSINE: 0.0,
            MU_PLUS: -0.5,
            MU_MINUS: 0.5,
            UNIFORM_ANGLE: 0.5 * (self.support[0] + self.support[1]),
        }[self.kind]


def measure_cdf(m: MeasureDescriptor, x: float) -> float:
    """CDF value, clamped to the support (out-of-support input is clamped)."""
    return m.cdf(x)


# ---------------------------------------------------------------------------
# Empirical distributions and Kolmogorov-Smirnov
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted sample list with a provenance tag."""

    values: np.ndarray
    tag: str = ""

    @staticmethod
    def from_samples(values, tag: str = "") -> "EmpiricalDistribution":
        arr = np.sort(np.asarray(values, dtype=np.float64))
        return EmpiricalDistribution(arr, tag)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def mean(self) -> float:
        if self.n == 0:
            raise EmptySampleError(self.tag or "empty sample")
        return float(self.values.mean())


def ks_distance(samples: EmpiricalDistribution | np.ndarray, m: MeasureDescriptor) -> float:
    """Two-sided sup distance between the empirical CDF and the model CDF,
    evaluated at the sample jump points."""
    values = samples.values if isinstance(samples, EmpiricalDistribution) else np.sort(
        np.asarray(samples, dtype=np.float64)
    )
    n = values.size
    if n == 0:
        raise EmptySampleError("KS distance needs at least one sample")
    model = m.cdf_array(values)
    upper = np.arange(1, n + 1) / n - model
    lower = model - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


# ---------------------------------------------------------------------------
# Sample builders
# ---------------------------------------------------------------------------

@dataclass
class CmAngleSamples:
    """Angles of Hecke values over the split primes of one degree class.

    canonical: one angle per rational prime, arg psi(P^n) folded into (0, pi)
    by the canonical choice of P over p;
    ideal_angles: both conjugate primes' angles in [0, 2*pi);
    normalized_traces: b_p / (2 p^{n/2}) = cos(canonical angle).
    """

    degree: int
    canonical: EmpiricalDistribution
    ideal_angles: EmpiricalDistribution
    normalized_traces: EmpiricalDistribution
    primes: np.ndarray

    def sector_fraction(self, theta: float) -> float:
        """Fraction of prime ideals with arg psi(P^n) <= theta."""
        vals = self.ideal_angles.values
        if vals.size == 0:
            raise EmptySampleError("no split primes in the class")
        return float((vals <= theta).sum() / vals.size)


def cm_angle_samples(source, degree_class: int, t: int, primes=None) -> CmAngleSamples:
    """arg psi(P) statistics over split primes p <= t with d(p) = degree_class.

    `source` is a HeckeCharacterSource (or anything with .ray and .level).
    """
    from .arith import sieve_primes

    ray = source.ray
    if primes is None:
        primes = sieve_primes(t)
    ps = primes.coprime_to(ray.level) if hasattr(primes, "coprime_to") else primes
    kept = []
    canonical = []
    full = []
    two_pi = 2 * math.pi
    for p in ps:
        p = int(p)
        if p > t:
            break
        if ray.field.split_type(p) != "split":
            continue
        d_ideal, d_p = ray.cm_residue_degree(p)
        if d_p != degree_class:
            continue
        zeta, alpha = ray.psi_parts(p)
        angle = (2 * math.pi * zeta.k / zeta.m + alpha.arg()) % two_pi
        theta_n = (degree_class * angle) % two_pi
        folded = min(theta_n, two_pi - theta_n)
        kept.append(p)
        canonical.append(folded)
        full.extend((theta_n, two_pi - theta_n))
    if not kept:
        raise EmptySampleError(f"no split primes with d(p) = {degree_class} below {t}")
    canonical_arr = np.array(canonical)
    return CmAngleSamples(
        degree=degree_class,
        canonical=EmpiricalDistribution.from_samples(canonical_arr, f"arg psi, d={degree_class}"),
        ideal_angles=EmpiricalDistribution.from_samples(full, "arg psi over ideals"),
        normalized_traces=EmpiricalDistribution.from_samples(
            np.cos(canonical_arr), f"b_p/(2p^{degree_class}/2)"
        ),
        primes=np.array(kept, dtype=np.int64),
    )


class ZetaMismatchError(ValueError):
    """zeta^2 != eps(m) in a progression sample request."""


def sato_tate_progression_samples(
    provider, M: int, m: int, zeta: RootOfUnity, t: int, primes=None
) -> EmpiricalDistribution:
    """Samples a_p / (2 sqrt(p) zeta) over p = m (mod M), p <= t, good p.

    Requires zeta^2 = eps(m); imaginary parts (at most ~1e-9 for valid data)
    are asserted away and discarded.
    """
    if M < 1 or (M > 1 and math.gcd(m, M) != 1):
        raise ValueError("class m must be a unit mod M")
    eps_m = provider.eps(m) if M > 1 else RootOfUnity.one()
    if zeta**2 != eps_m:
        raise ZetaMismatchError(f"zeta^2 = {zeta**2} but eps({m}) = {eps_m}")
    from .arith import sieve_primes

    if primes is None:
        primes = sieve_primes(t)
    ps = primes.coprime_to(provider.level) if hasattr(primes, "coprime_to") else primes
    zc = complex(zeta)
    out = []
    for p in ps:
        p = int(p)
        if p > t:
            break
        if M > 1 and p % M != m % M:
            continue
        a = provider.ap(p)
        val = complex(a) / (2 * math.sqrt(p) * zc)
        assert abs(val.imag) < 1e-9, f"non-real normalized trace at p={p}"
        out.append(val.real)
    if not out:
        raise EmptySampleError(f"no samples in class {m} mod {M} below {t}")
    return EmpiricalDistribution.from_samples(out, f"a_p/(2 sqrt p zeta), p={m} mod {M}")


@dataclass
class DegreeTwoSamples:
    """b_p/(2p) over the two nebentypus classes of degree-2 primes."""

    plus: EmpiricalDistribution | None
    minus: EmpiricalDistribution | None
    plus_primes: np.ndarray
    minus_primes: np.ndarray
    plus_values: np.ndarray   # b_p/p, aligned with plus_primes (ascending)
    minus_values: np.ndarray


def s2_b_samples(provider, partition) -> DegreeTwoSamples:
    """Normalized degree-2 power traces b_p/(2p) = (a_p^2 - 2 p eps(p))/(2p),
    split by the sign of eps(p); raises if both sign classes are empty."""
    plus_p = partition.deg2_plus
    minus_p = partition.deg2_minus
    if plus_p.size == 0 and minus_p.size == 0:
        raise EmptySampleError("degree-2 prime set is empty")

    def build(ps, sign):
        vals = []
        for p in ps:
            p = int(p)
            a = provider.ap(p)
            b = a * a - 2 * p * sign
            vals.append(b / p)
        return np.array(vals, dtype=np.float64)

    plus_vals = build(plus_p, +1)
    minus_vals = build(minus_p, -1)
    return DegreeTwoSamples(
        plus=EmpiricalDistribution.from_samples(plus_vals / 2, "b_p/2p, eps=+1")
        if plus_p.size
        else None,
        minus=EmpiricalDistribution.from_samples(minus_vals / 2, "b_p/2p, eps=-1")
        if minus_p.size
        else None,
        plus_primes=np.asarray(plus_p, dtype=np.int64),
        minus_primes=np.asarray(minus_p, dtype=np.int64),
        plus_values=plus_vals,
        minus_values=minus_vals,
    )


# ---------------------------------------------------------------------------
# Running expectations, rate functions, convergence reports
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceReport:
    checkpoints: list[tuple[float, float]]
    verdict: str                      # converges | diverges | inconclusive
    fitted: dict = field(default_factory=dict)


def _decade_indices(primes: np.ndarray) -> list[int]:
    """Indices i such that primes[i] is the last prime <= 10^k."""
    out = []
    bound = 10
    while bound < primes[-1]:
        idx = int(np.searchsorted(primes, bound, side="right")) - 1
        if idx >= 0:
            out.append(idx)
        bound *= 10
    out.append(primes.size - 1)
    return out


def expectation_sequence(primes, values, ell: float | None = None) -> ConvergenceReport:
    """Running means (1/n) sum c_i/p_i at decade checkpoints, with a drift
    verdict on the final decades; the fitted limit is the final mean."""
    primes = np.asarray(primes, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if primes.size == 0:
        raise EmptySampleError("expectation of an empty sequence")
    ratios = values / primes
    running = np.cumsum(ratios) / np.arange(1, primes.size + 1)
    idxs = _decade_indices(primes)
    checkpoints = [(float(primes[i]), float(running[i])) for i in idxs]
    fitted_ell = float(running[-1]) if ell is None else ell
    drift = _last_drift(checkpoints)
    threshold = CALIBRATION["expectation_drift_threshold"]
    if drift is None:
        verdict = "inconclusive"
    else:
        verdict = "converges" if abs(drift) < threshold else "inconclusive"
    return ConvergenceReport(checkpoints, verdict, {"ell": fitted_ell, "drift": drift})


def _last_drift(checkpoints) -> float | None:
    if len(checkpoints) < 2:
        return None
    return checkpoints[-1][1] - checkpoints[-2][1]


def rate_function(primes, values, ell: float) -> list[tuple[float, float]]:
    """K(t) = running mean of c/p minus the limit, at decade checkpoints."""
    primes = np.asarray(primes, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    running = np.cumsum(values / primes) / np.arange(1, primes.size + 1)
    return [(float(primes[i]), float(running[i] - ell)) for i in _decade_indices(primes)]


def rate_integral(primes, values, ell: float, t_max: float | None = None) -> float:
    """integral of |K(t)| / (t log t) dt from the first prime to t_max.

    K is a step function changing at primes, so each segment integrates in
    closed form against d(log log t)."""
    primes = np.asarray(primes, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if primes.size < 2:
        return 0.0
    if t_max is None:
        t_max = float(primes[-1])
    running = np.cumsum(values / primes) / np.arange(1, primes.size + 1)
    k_abs = np.abs(running - ell)
    nodes = np.append(primes, t_max)
    loglog = np.log(np.log(nodes))
    segs = np.diff(loglog)
    m = min(k_abs.size, segs.size)
    return float(np.dot(k_abs[:m], np.clip(segs[:m], 0, None)))


def product_series_verdict(primes, values, k_bound: float | None = None) -> ConvergenceReport:
    """Joint convergence check of prod (1 - c_n/p_n^2)^{-1} and sum c_n/p_n^2.

    The two converge together whenever |c_n| <= k p_n; the report carries the
    running log-product and running series at decade checkpoints, the max
    discrepancy |log prod - series|, and its theoretical tail bound
    sum x^2/(2(1-|x|)) with x = c_n/p_n^2.
    """
    primes = np.asarray(primes, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if primes.size == 0:
        raise EmptySampleError("empty sequence")
    ratios = values / primes
    k_fit = float(np.max(np.abs(ratios)))
    if k_bound is not None and k_fit > k_bound:
        raise BoundViolationError(f"|c_n| <= {k_bound} p_n violated: ratio {k_fit}")
    x = values / primes**2
    if np.any(x >= 1):
        raise BoundViolationError("a factor 1 - c_n/p_n^2 vanishes or is negative")
    log_factors = -np.log1p(-x)
    log_prod = np.cumsum(log_factors)
    series = np.cumsum(x)
    idxs = _decade_indices(primes)
    checkpoints = [
        (float(primes[i]), float(log_prod[i]), float(series[i])) for i in idxs
    ]
    discrepancy = np.abs(log_prod - series)
    tail_bound = float(np.sum(x * x / (2 * (1 - np.abs(x)))))
    threshold = CALIBRATION["expectation_drift_threshold"]
    drift_prod = checkpoints[-1][1] - checkpoints[-2][1] if len(checkpoints) > 1 else None
    drift_series = checkpoints[-1][2] - checkpoints[-2][2] if len(checkpoints) > 1 else None
    if drift_prod is None:
        verdict = "inconclusive"
    elif abs(drift_prod) < threshold and abs(drift_series) < threshold:
        verdict = "converges"
    elif abs(drift_prod) >= threshold and abs(drift_series) >= threshold:
        verdict = "diverges"
    else:
        verdict = "inconclusive"
    return ConvergenceReport(
        [(t, lp) for t, lp, _ in checkpoints],
        verdict,
        {
            "series_checkpoints": [(t, s) for t, _, s in checkpoints],
            "max_discrepancy": float(discrepancy.max()),
            "discrepancy_bound": tail_bound,
            "k_fit": k_fit,
            "drift_product": drift_prod,
            "drift_series": drift_series,
        },
    )


def partial_summation_sides(primes, values, t: float) -> tuple[float, float]:
    """Both sides of the partial-summation identity

        sum_{p<=t} c/p^2 = (1/t) sum_{p<=t} c/p + int_2^t x^{-2} A(x) dx

    with A(x) the running sum of c/p; the integral is exact per segment."""
    primes = np.asarray(primes, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    keep = primes <= t
    primes, values = primes[keep], values[keep]
    if primes.size == 0:
        return 0.0, 0.0
    lhs = float(np.sum(values / primes**2))
    running = np.cumsum(values / primes)
    nodes = np.append(primes, t)
    seg = 1.0 / nodes[:-1] - 1.0 / nodes[1:]
    rhs = float(running[-1] / t + np.dot(running, seg))
    return lhs, rhs


# ---------------------------------------------------------------------------
# Symmetric-square partial sums
# ---------------------------------------------------------------------------

def sym2_partial_sum(
    provider, M: int, m: int, checkpoints: list[int], primes=None
) -> ConvergenceReport:
    """Running sum of (a_p^2 - p*eps(p))/p over p = m (mod M) at the given
    checkpoint bounds, with a drift flag over the last three decades."""
    from .arith import sieve_primes

    t_max = max(checkpoints)
    if primes is None:
        primes = sieve_primes(t_max)
    ps = primes.coprime_to(provider.level) if hasattr(primes, "coprime_to") else primes
    total = 0.0
    rows = []
    targets = sorted(checkpoints)
    ti = 0
    for p in ps:
        p = int(p)
        if p > t_max:
            break
        while ti < len(targets) and p > targets[ti]:
            rows.append((float(targets[ti]), total))
            ti += 1
        if M > 1 and p % M != m % M:
            continue
        eps = provider.eps(p)
        if not eps.is_real():
            raise ValueError("symmetric-square sums need a real nebentypus value")
        a = provider.ap(p)
        total += (a * a - p * eps.real_sign()) / p
    while ti < len(targets):
        rows.append((float(targets[ti]), total))
        ti += 1
    tail = [abs(v) for _, v in rows[-3:]]
    monotone_growth = len(tail) == 3 and tail[0] < tail[1] < tail[2]
    bounded = abs(rows[-1][1]) < CALIBRATION["sym2_bound"]
    if monotone_growth and not bounded:
        verdict = "diverges"
    elif bounded and not monotone_growth:
        verdict = "converges"
    else:
        verdict = "inconclusive"
    return ConvergenceReport(
        rows,
        verdict,
        {"monotone_drift": monotone_growth, "final": rows[-1][1]},
    )


# ---------------------------------------------------------------------------
# Order estimation at s = 1
# ---------------------------------------------------------------------------

@dataclass
class OrderEstimate:
    slope: float
    residual: float
    order: int | None            # None when inconclusive
    grid: list[float]
    log_values: list[float]

    @property
    def conclusive(self) -> bool:
        return self.order is not None


def default_sigma_grid(T: float) -> list[float]:
    """Geometric grid of sigma = 1 + delta, tuned so the truncation at T is
    negligible at every point (delta >= c/log T)."""
    cfg = CALIBRATION["order_grid"]
    delta_min = max(cfg["delta_min_over_logT"] / math.log(T), cfg["delta_floor"])
    delta_max = cfg["delta_max"]
    n = cfg["points"]
    if delta_min >= delta_max:
        delta_min = delta_max / 4
    ratio = (delta_max / delta_min) ** (1 / (n - 1))
    return [1 + delta_min * ratio**k for k in range(n)]


def order_estimate(log_evaluator, T: float, grid: list[float] | None = None) -> OrderEstimate:
    """Least-squares slope r of log(product at sigma) against log(sigma - 1).

    The model log P = c + r log(delta) + b delta includes a linear correction
    absorbing the smooth part of the L-function near s = 1; r estimates the
    order at s = 1 (negative for a pole, positive for a zero).  The estimate
    is the rounded slope when the fit is unambiguous, else None.
    """
    sigmas = grid if grid is not None else default_sigma_grid(T)
    ys = np.array([float(log_evaluator(s)) for s in sigmas])
    deltas = np.array([s - 1 for s in sigmas])
    if np.allclose(ys, ys[0], rtol=0, atol=1e-14):
        return OrderEstimate(0.0, 0.0, 0, list(sigmas), ys.tolist())
    design = np.column_stack([np.ones_like(deltas), np.log(deltas), deltas])
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    fitted = design @ coef
    residual = float(np.max(np.abs(fitted - ys)))
    slope = float(coef[1])
    margin = CALIBRATION["order_round_margin"]
    resid_max = CALIBRATION["order_residual_threshold"]
    order: int | None = round(slope)
    if abs(slope - round(slope)) >= margin or residual >= resid_max:
        order = None
    return OrderEstimate(slope, residual, order, list(sigmas), ys.tolist())


def log_zeta_product(primes: np.ndarray, exponent: int = 1):
    """log of prod (1 - p^{-sigma})^{-exponent} over the primes, as a
    sigma-callable (vectorized over the prime list)."""
    logs = np.log(np.asarray(primes, dtype=np.float64))

    def ev(sigma: float) -> float:
        return -exponent * float(np.sum(np.log1p(-np.exp(-sigma * logs))))

    return ev


def log_sign_product(primes: np.ndarray, sign: int, exponent: int):
    """log of prod (1 + sign * p^{-sigma})^{-exponent} over the primes."""
    logs = np.log(np.asarray(primes, dtype=np.float64))

    def ev(sigma: float) -> float:
        return -exponent * float(np.sum(np.log1p(sign * np.exp(-sigma * logs))))

    return ev


def dedekind_crop_products(primes, sign: int, sigma: float, exponent: int) -> float:
    """Truncated prod (1 +- p^{-sigma})^{-exponent}; the empty set gives 1."""
    arr = np.asarray(primes, dtype=np.float64)
    if arr.size == 0:
        return 1.0
    return math.exp(log_sign_product(arr, sign, exponent)(sigma))
