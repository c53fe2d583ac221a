"""Quasi-metric constant estimation, violation search and witnesses.

The central quantity is the triangle ratio

    c(x, y, z) = m(x, y) / (m(x, z) + m(z, y))

for a metric family m on a domain G.  Values above 1 witness a failure of
the triangle inequality; the supremum over triples is the best quasi-metric
constant of m on G.  The supremum is estimated by seeded random sampling
followed by simplex (Nelder-Mead) refinement of the most promising
candidates.  Out-of-domain trial points are rejected with an infinite
penalty rather than projected, so boundary distances stay strictly
positive throughout the search.

Random sampling alone is not enough near a metricity threshold: just above
the critical parameter the violating triples form a thin sliver of nearly
collinear configurations aligned with the gradient of the boundary
distance.  The candidate list therefore always includes structured starts,
collinear triples x = z - s*d*u, y = z + s*d*u along that gradient
direction u at several separations s, which place at least one start
inside the sliver whenever it exists.

Absence of a violation is never proof: searches report "no violation
within budget" while any returned violation is re-verified by direct
evaluation before it is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import (
    DegenerateTripleError,
    NumericalError,
    ParameterError,
    UnsupportedDomainError,
)
from .geometry import Domain, Interval, PositiveAxis, UnitBall, as_point
from .metrics import MetricSpec

#: a triple violates the triangle inequality when its ratio exceeds this
VIOLATION_THRESHOLD = 1.0 + 1e-9
#: re-verification threshold for violations stored in reports
REPORT_THRESHOLD = 1.0 + 1e-12
#: triples with min pairwise distance below this fraction of their scale
#: are discarded (the ratio limit under collapse is <= 1 and uninformative)
DEGENERATE_REL = 1e-9
#: minimum relative separation for a sampled triple to seed refinement
_START_SEPARATION_REL = 1e-3
#: collinear start separations as fractions of the boundary distance
_START_SEPARATIONS = (0.003, 0.01, 0.03, 0.1, 1.0 / 3.0, 0.6)
_SAMPLE_CHUNK = 1 << 18
_TOP_SAMPLED_STARTS = 4
_TOP_STRUCTURED_STARTS = 4
_STRUCTURED_BASES = 3

SQRT5_OVER_2 = math.sqrt(5.0) / 2.0


@dataclass(frozen=True, eq=False)
class Triple:
    """An ordered triple of points; the ratio compares m(x,y) to the path via z."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        x = as_point(self.x)
        y = as_point(self.y, x.size)
        z = as_point(self.z, x.size)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    def as_lists(self) -> dict[str, list[float]]:
        return {"x": self.x.tolist(), "y": self.y.tolist(), "z": self.z.tolist()}


@dataclass(frozen=True, eq=False)
class QuasiEstimate:
    """Best triangle ratio found by the supremum search."""

    c_hat: float
    witness: Triple
    evaluations: int
    restarts: int
    converged: bool
    #: best ratio reached by each refinement restart, in restart order
    restart_ratios: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class ProbeRecord:
    """One bisection probe: a violation is certain, its absence is not."""

    alpha: float
    violation: Optional[Triple]
    ratio: Optional[float]
    certainty: str  # "violation-verified" | "no-violation-within-budget"


@dataclass(frozen=True, eq=False)
class ThresholdReport:
    """Result of bisecting the metricity threshold in alpha.

    alpha_low is the largest probed alpha at which no violation was found
    (presumptive; falls back to the initial lower endpoint if every probe
    violated).  alpha_high is the smallest probed alpha with a verified
    violation, or None if none was found.  bracket_low/bracket_high is the
    final bisection bracket.
    """

    alpha_low: float
    alpha_high: Optional[float]
    bracket_low: float
    bracket_high: float
    probes: tuple[ProbeRecord, ...]


@dataclass(frozen=True)
class Classification:
    """Metric-or-quasi-metric verdict for a one-dimensional domain."""

    kind: str  # "metric" | "quasi-metric"
    constant: float | None


def triangle_ratio(metric: MetricSpec, domain: Domain, t: Triple) -> float:
    """m(x,y) / (m(x,z) + m(z,y)); requires three pairwise distinct points."""
    metric.validate_for(domain)
    if np.array_equal(t.x, t.y):
        raise DegenerateTripleError("x = y: the triangle ratio is undefined")
    if np.array_equal(t.z, t.x) or np.array_equal(t.z, t.y):
        raise DegenerateTripleError("z coincides with an endpoint")
    top = metric.value(domain, t.x, t.y)
    denom = metric.value(domain, t.x, t.z) + metric.value(domain, t.z, t.y)
    if not denom > 0.0:
        raise NumericalError("vanishing denominator in triangle ratio")
    return top / denom


# --- vectorized ratio evaluation -------------------------------------------


def _pairwise_distances(xs, ys, zs):
    d_xy = np.linalg.norm(xs - ys, axis=1)
    d_xz = np.linalg.norm(xs - zs, axis=1)
    d_zy = np.linalg.norm(zs - ys, axis=1)
    return d_xy, d_xz, d_zy


def _ratios_many(metric: MetricSpec, domain: Domain, xs, ys, zs) -> np.ndarray:
    """Triangle ratios row-wise; degenerate rows come back as -inf."""
    d_xy, d_xz, d_zy = _pairwise_distances(xs, ys, zs)
    scale = np.maximum(np.maximum(d_xy, d_xz), d_zy)
    tightest = np.minimum(np.minimum(d_xy, d_xz), d_zy)
    ok = (scale > 0.0) & (tightest >= DEGENERATE_REL * scale)
    ratios = np.full(len(xs), -np.inf)
    if np.any(ok):
        top = metric.values_many(domain, xs[ok], ys[ok])
        denom = metric.values_many(domain, xs[ok], zs[ok]) + metric.values_many(
            domain, zs[ok], ys[ok]
        )
        good = denom > 0.0
        vals = np.full(int(ok.sum()), -np.inf)
        vals[good] = top[good] / denom[good]
        ratios[ok] = vals
    return ratios


# --- simplex refinement -----------------------------------------------------


def _neg_ratio_objective(metric: MetricSpec, domain: Domain, z_fixed):
    n = domain.dim

    def fn(theta: np.ndarray) -> float:
        if not np.all(np.isfinite(theta)):
            return math.inf
        x = theta[:n]
        y = theta[n : 2 * n]
        z = z_fixed if z_fixed is not None else theta[2 * n : 3 * n]
        pts = np.array([x, y, z])
        if not bool(np.all(domain.contains_many(pts))):
            return math.inf
        d_xy = float(np.linalg.norm(x - y))
        d_xz = float(np.linalg.norm(x - z))
        d_zy = float(np.linalg.norm(z - y))
        scale = max(d_xy, d_xz, d_zy)
        if scale == 0.0 or min(d_xy, d_xz, d_zy) < DEGENERATE_REL * scale:
            return math.inf
        vals = metric.values_many(domain, np.array([x, x, z]), np.array([y, z, y]))
        denom = float(vals[1] + vals[2])
        if not denom > 0.0:
            return math.inf
        return -float(vals[0]) / denom

    return fn


def _refine(metric, domain, start, z_fixed, maxfev):
    """Nelder-Mead ascent of the ratio from one (x, y, z) start.

    Returns (ratio, (x, y, z), nfev, converged).
    """
    x0, y0, z0 = start
    if z_fixed is not None:
        theta0 = np.concatenate([x0, y0])
    else:
        theta0 = np.concatenate([x0, y0, z0])
    fn = _neg_ratio_objective(metric, domain, z_fixed)
    res = minimize(
        fn,
        theta0,
        method="Nelder-Mead",
        options={
            "maxfev": int(maxfev),
            "xatol": 1e-10,
            "fatol": 1e-13,
            "adaptive": True,
        },
    )
    n = domain.dim
    x = res.x[:n]
    y = res.x[n : 2 * n]
    z = z_fixed if z_fixed is not None else res.x[2 * n : 3 * n]
    ratio = -float(res.fun) if np.isfinite(res.fun) else -math.inf
    return ratio, (x.copy(), y.copy(), np.asarray(z, dtype=float).copy()), int(res.nfev), bool(res.success)


# --- candidate starts -------------------------------------------------------


def _grad_direction(domain: Domain, z: np.ndarray) -> np.ndarray:
    """Unit gradient of d_G at z by central differences; e1 where it vanishes."""
    n = domain.dim
    d = float(domain.dist_many(z[np.newaxis, :])[0])
    h = max(d * 1e-6, 1e-12)
    grad = np.zeros(n)
    for i in range(n):
        step = np.zeros(n)
        step[i] = h
        # z +- h e_i stays inside the ball B(z, d_G(z)), so both are members
        plus = float(domain.dist_many((z + step)[np.newaxis, :])[0])
        minus = float(domain.dist_many((z - step)[np.newaxis, :])[0])
        grad[i] = (plus - minus) / (2.0 * h)
    norm = float(np.linalg.norm(grad))
    if norm < 1e-6:
        fallback = np.zeros(n)
        fallback[0] = 1.0
        return fallback
    return grad / norm


def _structured_starts(domain: Domain, bases) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Collinear triples around each base, aligned with grad d_G."""
    starts = []
    for z in bases:
        z = np.asarray(z, dtype=float)
        d = float(domain.dist_many(z[np.newaxis, :])[0])
        if not d > 0.0:
            continue
        direction = _grad_direction(domain, z)
        for s in _START_SEPARATIONS:
            x = z - s * d * direction
            y = z + s * d * direction
            pts = np.array([x, y])
            if bool(np.all(domain.contains_many(pts))):
                starts.append((x, y, z.copy()))
    return starts


def _sample_triples(domain: Domain, seeds, count: int):
    sx, sy, sz = (int(s) for s in seeds)
    xs = domain.sample_interior(sx, count)
    ys = domain.sample_interior(sy, count)
    if domain.scale_invariant:
        zs = np.tile(domain.unit_point(), (count, 1))
    else:
        zs = domain.sample_interior(sz, count)
    return xs, ys, zs


def _top_separated(xs, ys, zs, ratios, k: int):
    """Indices of the k best ratios among well-separated triples."""
    d_xy, d_xz, d_zy = _pairwise_distances(xs, ys, zs)
    scale = np.maximum(np.maximum(d_xy, d_xz), d_zy)
    tightest = np.minimum(np.minimum(d_xy, d_xz), d_zy)
    ok = (scale > 0.0) & (tightest >= _START_SEPARATION_REL * scale) & np.isfinite(ratios)
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        return []
    order = idx[np.argsort(-ratios[idx], kind="stable")]
    return list(order[:k])


def _candidate_starts(metric, domain, xs, ys, zs, ratios):
    """Refinement starts: best separated samples plus structured collinear triples."""
    starts = [
        (xs[i].copy(), ys[i].copy(), zs[i].copy())
        for i in _top_separated(xs, ys, zs, ratios, _TOP_SAMPLED_STARTS)
    ]
    if domain.scale_invariant:
        bases = [domain.unit_point()]
    else:
        bases = [zs[i] for i in range(min(_STRUCTURED_BASES, len(zs)))]
    structured = _structured_starts(domain, bases)
    if structured:
        s_ratios = _ratios_many(
            metric,
            domain,
            np.array([s[0] for s in structured]),
            np.array([s[1] for s in structured]),
            np.array([s[2] for s in structured]),
        )
        order = np.argsort(-s_ratios, kind="stable")[:_TOP_STRUCTURED_STARTS]
        starts.extend(structured[i] for i in order if np.isfinite(s_ratios[i]))
    return starts


def _canonical_triple(x, y, z) -> Triple:
    """Deterministic orientation: the ratio is symmetric under swapping x and y."""
    if tuple(y) < tuple(x):
        x, y = y, x
    return Triple(x, y, z)


# --- public search operations ----------------------------------------------


def estimate_quasi_constant(
    metric: MetricSpec, domain: Domain, budget: int, seed: int
) -> QuasiEstimate:
    """Multi-start supremum search for the triangle ratio on one domain.

    Half the budget goes to seeded random triples, the rest to simplex
    refinement of the best candidates.  Deterministic for fixed
    (seed, budget).
    """
    metric.validate_for(domain)
    if budget < 1000:
        raise ParameterError("budget must be >= 1000")
    root = np.random.SeedSequence(seed)
    n_sample = budget // 2
    xs, ys, zs = _sample_triples(domain, root.generate_state(3), n_sample)
    ratios = _ratios_many(metric, domain, xs, ys, zs)
    evaluations = n_sample

    best_idx = int(np.argmax(ratios))
    best_ratio = float(ratios[best_idx])
    best = (xs[best_idx], ys[best_idx], zs[best_idx])

    starts = _candidate_starts(metric, domain, xs, ys, zs, ratios)
    z_fixed = domain.unit_point() if domain.scale_invariant else None
    maxfev = max(200, (budget - n_sample) // max(1, len(starts)))
    converged = False
    restart_ratios = []
    for start in starts:
        ratio, triple, nfev, ok = _refine(metric, domain, start, z_fixed, maxfev)
        evaluations += nfev
        restart_ratios.append(ratio)
        if ratio > best_ratio:
            best_ratio, best, converged = ratio, triple, ok

    witness = _canonical_triple(*best)
    c_hat = triangle_ratio(metric, domain, witness)
    return QuasiEstimate(
        c_hat=c_hat,
        witness=witness,
        evaluations=evaluations,
        restarts=len(starts),
        converged=converged,
        restart_ratios=tuple(restart_ratios),
    )


def find_violation(
    metric: MetricSpec, domain: Domain, budget: int, seed: int
) -> Optional[tuple[Triple, float]]:
    """Search for a triple with triangle ratio above 1 + 1e-9.

    Samples `budget` seeded triples in chunks, then refines the most
    promising candidates with the simplex optimizer.  Any result is
    re-verified by direct evaluation.  Returns None when the budget is
    exhausted without a verified violation; that is evidence, not proof.
    """
    metric.validate_for(domain)
    if budget < 1:
        raise ParameterError("budget must be >= 1")
    root = np.random.SeedSequence(seed)

    kept_x, kept_y, kept_z, kept_r = [], [], [], []
    first_chunk = None
    remaining = budget
    while remaining > 0:
        count = min(remaining, _SAMPLE_CHUNK)
        remaining -= count
        seeds = [s.generate_state(1)[0] for s in root.spawn(3)]
        xs, ys, zs = _sample_triples(domain, seeds, count)
        ratios = _ratios_many(metric, domain, xs, ys, zs)
        if first_chunk is None:
            first_chunk = (xs, ys, zs, ratios)
        best = int(np.argmax(ratios))
        if ratios[best] > VIOLATION_THRESHOLD:
            hit = _verify_violation(metric, domain, (xs[best], ys[best], zs[best]))
            if hit is not None:
                return hit
        idx = _top_separated(xs, ys, zs, ratios, _TOP_SAMPLED_STARTS)
        kept_x.extend(xs[i] for i in idx)
        kept_y.extend(ys[i] for i in idx)
        kept_z.extend(zs[i] for i in idx)
        kept_r.extend(float(ratios[i]) for i in idx)

    if first_chunk is None:
        return None
    xs0, ys0, zs0, _ = first_chunk
    if kept_x:
        pool = (np.array(kept_x), np.array(kept_y), np.array(kept_z), np.array(kept_r))
    else:
        pool = (xs0, ys0, zs0, _ratios_many(metric, domain, xs0, ys0, zs0))
    starts = _candidate_starts(metric, domain, *pool)
    z_fixed = domain.unit_point() if domain.scale_invariant else None
    for start in starts:
        ratio, triple, _, _ = _refine(metric, domain, start, z_fixed, maxfev=3000)
        if ratio > VIOLATION_THRESHOLD:
            hit = _verify_violation(metric, domain, triple)
            if hit is not None:
                return hit
    return None


def _verify_violation(metric, domain, raw_triple) -> Optional[tuple[Triple, float]]:
    """Re-evaluate a candidate violation directly; drop it if it fails."""
    triple = _canonical_triple(*raw_triple)
    try:
        ratio = triangle_ratio(metric, domain, triple)
    except (DegenerateTripleError, NumericalError):
        return None
    if ratio > VIOLATION_THRESHOLD:
        return triple, ratio
    return None


def alpha_threshold(
    domain: Domain,
    alpha_lo: float,
    alpha_hi: float,
    tol: float,
    budget: int,
    seed: int,
    family: Callable[[float], MetricSpec] = MetricSpec.generalized,
) -> ThresholdReport:
    """Bisect the largest alpha at which no triangle violation is found.

    A probe with a verified violation moves the upper end down (certain);
    an exhausted budget moves the lower end up (presumptive only).  The
    probe records keep that asymmetry explicit.
    """
    if not (0.0 < alpha_lo < alpha_hi):
        raise ParameterError("need 0 < alpha_lo < alpha_hi")
    if not tol > 0.0:
        raise ParameterError("tol must be positive")
    lo, hi = float(alpha_lo), float(alpha_hi)
    root = np.random.SeedSequence(seed)
    probes: list[ProbeRecord] = []
    alpha_low = lo
    alpha_high: Optional[float] = None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        probe_seed = int(root.spawn(1)[0].generate_state(1)[0])
        found = find_violation(family(mid), domain, budget, probe_seed)
        if found is not None:
            triple, ratio = found
            if ratio > REPORT_THRESHOLD:
                probes.append(ProbeRecord(mid, triple, ratio, "violation-verified"))
                hi = mid
                alpha_high = mid if alpha_high is None else min(alpha_high, mid)
                continue
        probes.append(ProbeRecord(mid, None, None, "no-violation-within-budget"))
        lo = mid
        alpha_low = max(alpha_low, mid)
    return ThresholdReport(
        alpha_low=alpha_low,
        alpha_high=alpha_high,
        bracket_low=lo,
        bracket_high=hi,
        probes=tuple(probes),
    )


# --- closed-form witnesses and constants -------------------------------------


def ball_counterexample(alpha: float, n: int) -> tuple[Triple, float]:
    """Explicit triangle violation for the alpha-family on the unit ball.

    Uses x = k e1, y = -k e1, z = 0 with k = alpha/(4+alpha); the ratio
    exceeds 1 for every alpha > 0, so no alpha makes the family a metric
    on the ball.  The closed ratio is re-verified by direct evaluation.
    """
    if not alpha > 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if n < 1:
        raise ParameterError("dimension must be >= 1")
    k = alpha / (4.0 + alpha)
    x = np.zeros(n)
    x[0] = k
    y = -x
    z = np.zeros(n)
    ratio = math.sqrt((k * k + alpha * (1.0 - k)) / (4.0 * k * k + alpha * (1.0 - k) ** 2))
    triple = Triple(x, y, z)
    direct = triangle_ratio(MetricSpec.generalized(alpha), UnitBall(n), triple)
    if abs(direct - ratio) > 1e-9 * ratio:
        raise NumericalError(
            f"closed-form ratio {ratio} disagrees with direct evaluation {direct}"
        )
    return triple, ratio


def rplus_violation_from_t(alpha: float, t: float) -> Triple:
    """Map a quadratic-certificate parameter to a violating triple on (0, inf).

    For alpha > 12 the factored margin (t-2)(3t-(alpha-6)) is negative on
    2 < t < (alpha-6)/3; pulling t back through u^2 = (t + sqrt(t^2-4))/2
    gives the triple x = 1/u^2, z = 1, y = u^2 whose triangle ratio
    exceeds 1.
    """
    if not alpha > 12.0:
        raise ParameterError("the violation interval is empty unless alpha > 12")
    upper = (alpha - 6.0) / 3.0
    if not (2.0 < t < upper):
        raise ParameterError(f"t must lie in (2, {upper:g}), got {t}")
    u2 = (t + math.sqrt(t * t - 4.0)) / 2.0
    return Triple(np.array([1.0 / u2]), np.array([u2]), np.array([1.0]))


def sharpness_witness(z0, r: float, direction) -> Triple:
    """Equality triple for the sharp constant sqrt(5)/2.

    For a ball B(z0, r) contained in the domain whose diameter endpoints
    z0 -+ r*direction both lie on the boundary, the triple
    x = z0 - (r/3) direction, z = z0, y = z0 + (r/3) direction attains the
    triangle ratio sqrt(5)/2 exactly.  Domain qualification is the
    caller's obligation.
    """
    center = as_point(z0)
    u = as_point(direction, center.size)
    if not r > 0.0:
        raise ParameterError("radius must be positive")
    if abs(float(np.linalg.norm(u)) - 1.0) > 1e-9:
        raise ParameterError("direction must be a unit vector")
    offset = (r / 3.0) * u
    return Triple(center - offset, center + offset, center)


def ball_constant_lower_bound(alpha: float) -> float:
    """Largest diametral-triple ratio for the alpha-family on the unit ball.

    Maximizes sqrt((k^2 + alpha(1-k)) / (4k^2 + alpha(1-k)^2)) over
    k in (0, 1); the maximizer is k = (alpha + 3 - sqrt(4 alpha + 9)) / (alpha + 2).
    """
    if not alpha > 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    k = (alpha + 3.0 - math.sqrt(4.0 * alpha + 9.0)) / (alpha + 2.0)
    return math.sqrt((k * k + alpha * (1.0 - k)) / (4.0 * k * k + alpha * (1.0 - k) ** 2))


def classify_1d(domain: Domain) -> Classification:
    """One-boundary-point 1-D domains carry a metric; two-point ones do not."""
    if isinstance(domain, PositiveAxis):
        return Classification("metric", None)
    if isinstance(domain, Interval):
        return Classification("quasi-metric", SQRT5_OVER_2)
    raise UnsupportedDomainError(
        f"classification applies to 1-D domains, not {domain.spec_string()}"
    )
