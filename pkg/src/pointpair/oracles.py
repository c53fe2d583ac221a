"""Numeric certification of the scalar inequalities behind the metric results.

Each operation returns a *margin*, oriented so that a nonnegative value
means the certified inequality holds at that input.  Grid and random
sweeps then report the minimum margin and its location.  Tolerances of
1e-9 to 1e-12 absorb rounding accumulated in the nested radicals.

The certified inequalities:

* interval_split_margin -- on the interval (-1, 1), with -1 <= x <= 0 <=
  z <= y <= 1, splitting the normalized chord value at z costs at most a
  factor 2/sqrt(5):  f(x,z) + g(z,y) - (2/sqrt5) f(x,y) >= 0, with
  equality exactly at (-1/3, 0, 1/3).  Here f is the interval point pair
  value and g its z = 0 simplification.
* split_certificate_poly -- the quartic whose nonnegativity on
  [0, infinity) proves the previous margin; it has a double root at 1/5.
* sinh_triangle_margins -- subadditivity of t -> arsinh sqrt(.) and of
  its tanh-normalized form over sinh-composed arguments.
* normalized_sum_margin -- stability of the normalized sum inequality
  under adding offsets p, q to the legs and p + q to the combined side.
* axis_quadratic_margin -- the factored quadratic (t-2)(3t-(alpha-6))
  controlling metricity of the alpha-family on the positive axis:
  nonnegative for all t >= 2 exactly when alpha <= 12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ParameterError

_TWO_OVER_SQRT5 = 2.0 / math.sqrt(5.0)


@dataclass(frozen=True)
class MarginSample:
    """One evaluated inequality instance."""

    inputs: tuple[float, ...]
    margin: float


@dataclass(frozen=True)
class SweepSummary:
    """Minimum margin over a sweep, with optional local refinement."""

    samples: int
    min_margin: float
    argmin: tuple[float, ...]
    refined_margin: float | None = None
    refined_argmin: tuple[float, ...] | None = None


# --- scalar margins -----------------------------------------------------------


def _chord_value(x, y):
    """(y - x) / sqrt((y - x)^2 + 4 (1 + x)(1 - y)), zero at x = y."""
    diff = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    out = np.zeros_like(diff, dtype=float)
    nz = diff != 0.0
    root = np.sqrt(diff**2 + 4.0 * (1.0 + np.asarray(x, float)) * (1.0 - np.asarray(y, float)))
    np.divide(diff, root, out=out, where=nz)
    return out


def _endpoint_value(x, y):
    """(y - x) / (2 - x - y), zero at x = y."""
    diff = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    out = np.zeros_like(diff, dtype=float)
    nz = diff != 0.0
    np.divide(diff, 2.0 - np.asarray(x, float) - np.asarray(y, float), out=out, where=nz)
    return out


def _interval_split_margins(x, z, y):
    return _chord_value(x, z) + _endpoint_value(z, y) - _TWO_OVER_SQRT5 * _chord_value(x, y)


def interval_split_margin(x: float, z: float, y: float) -> float:
    """Margin of the interval split inequality on the ordered box."""
    if not (-1.0 <= x <= 0.0 <= z <= y <= 1.0):
        raise ParameterError(f"need -1 <= x <= 0 <= z <= y <= 1, got ({x}, {z}, {y})")
    return float(_interval_split_margins(np.float64(x), np.float64(z), np.float64(y)))


def split_certificate_poly(zeta: float) -> float:
    """10 z^4 + 16 z^3 + (12/5) z^2 - (16/5) z + 2/5; double root at z = 1/5."""
    if zeta < 0.0:
        raise ParameterError(f"zeta must be >= 0, got {zeta}")
    z = float(zeta)
    return 10.0 * z**4 + 16.0 * z**3 + 2.4 * z**2 - 3.2 * z + 0.4


def _split_certificate_many(z):
    return 10.0 * z**4 + 16.0 * z**3 + 2.4 * z**2 - 3.2 * z + 0.4


def _sinh_triangle_many(x, y, u, v):
    big = np.sinh(x + y)
    small = np.sinh(u + v)
    bx, cy = np.sinh(x), np.sinh(y)
    bu, cv = np.sinh(u), np.sinh(v)
    left = np.sqrt(big**2 + small**2)
    leg1 = np.sqrt(bx**2 + bu**2)
    leg2 = np.sqrt(cy**2 + cv**2)
    margin_arsinh = np.arcsinh(leg1) + np.arcsinh(leg2) - np.arcsinh(left)
    margin_ratio = (
        np.sqrt(leg1**2 / (1.0 + leg1**2))
        + np.sqrt(leg2**2 / (1.0 + leg2**2))
        - np.sqrt(left**2 / (1.0 + left**2))
    )
    return margin_arsinh, margin_ratio


def sinh_triangle_margins(x: float, y: float, u: float, v: float) -> tuple[float, float]:
    """Margins of the arsinh-sum and ratio-sum inequalities, both >= 0."""
    if min(x, y, u, v) < 0.0:
        raise ParameterError("all arguments must be nonnegative")
    ma, mr = _sinh_triangle_many(np.float64(x), np.float64(y), np.float64(u), np.float64(v))
    return float(ma), float(mr)


def _normalized_sum_many(b, c, p, q):
    b1 = b / np.sqrt(1.0 + b**2)
    c1 = c / np.sqrt(1.0 + c**2)
    s = b1 + c1
    big = s / np.sqrt(1.0 - s**2)
    a = p + q
    return (
        np.sqrt((b**2 + p**2) / (1.0 + b**2 + p**2))
        + np.sqrt((c**2 + q**2) / (1.0 + c**2 + q**2))
        - np.sqrt((big**2 + a**2) / (1.0 + big**2 + a**2))
    )


def normalized_sum_margin(b: float, c: float, p: float, q: float) -> float:
    """Margin of the offset normalized-sum inequality.

    The combined side A is constructed from the equality case
    A/sqrt(1+A^2) = b/sqrt(1+b^2) + c/sqrt(1+c^2), which requires the
    right-hand side to stay below 1.
    """
    if not (b > 0.0 and c > 0.0):
        raise ParameterError("b and c must be positive")
    if p < 0.0 or q < 0.0:
        raise ParameterError("offsets must be nonnegative")
    s = b / math.sqrt(1.0 + b * b) + c / math.sqrt(1.0 + c * c)
    if s >= 1.0:
        raise ParameterError(f"no valid combined side: normalized legs sum to {s} >= 1")
    return float(_normalized_sum_many(np.float64(b), np.float64(c), np.float64(p), np.float64(q)))


def axis_quadratic_margin(alpha: float, t: float) -> float:
    """(t - 2)(3t - (alpha - 6)); the factored form of 3t^2 - alpha t + 2 alpha - 12."""
    if not alpha > 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if t < 2.0:
        raise ParameterError(f"t must be >= 2, got {t}")
    return (t - 2.0) * (3.0 * t - (alpha - 6.0))


# --- sweeps -------------------------------------------------------------------


def _summarize(inputs: np.ndarray, margins: np.ndarray, records: int):
    i = int(np.argmin(margins))
    summary_inputs = tuple(float(v) for v in np.atleast_1d(inputs[i]))
    recs = [
        MarginSample(tuple(float(v) for v in np.atleast_1d(inputs[j])), float(margins[j]))
        for j in range(min(records, len(margins)))
    ]
    return i, summary_inputs, recs


def sweep_interval_split(
    samples: int, seed: int, records: int = 0, refine: bool = True
) -> tuple[SweepSummary, list[MarginSample]]:
    """Random sweep of the ordered box, with simplex refinement of the minimum."""
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 0.0, samples)
    z = rng.uniform(0.0, 1.0, samples)
    y = z + (1.0 - z) * rng.uniform(0.0, 1.0, samples)
    margins = _interval_split_margins(x, z, y)
    inputs = np.column_stack([x, z, y])
    i, argmin, recs = _summarize(inputs, margins, records)

    refined_margin = None
    refined_argmin = None
    if refine:

        def objective(theta):
            xx, zz, yy = theta
            if yy < zz:
                return math.inf
            return float(_interval_split_margins(np.float64(xx), np.float64(zz), np.float64(yy)))

        res = minimize(
            objective,
            inputs[i],
            method="Nelder-Mead",
            bounds=[(-1.0, 0.0), (0.0, 1.0), (0.0, 1.0)],
            options={"maxfev": 20000, "xatol": 1e-12, "fatol": 1e-15, "adaptive": True},
        )
        refined_margin = float(res.fun)
        refined_argmin = tuple(float(v) for v in res.x)

    summary = SweepSummary(
        samples=samples,
        min_margin=float(margins[i]),
        argmin=argmin,
        refined_margin=refined_margin,
        refined_argmin=refined_argmin,
    )
    return summary, recs


def sweep_split_certificate(points: int, records: int = 0) -> tuple[SweepSummary, list[MarginSample]]:
    """Uniform grid sweep of the certificate quartic on [0, 1]."""
    if points < 2:
        raise ParameterError("points must be >= 2")
    grid = np.linspace(0.0, 1.0, points)
    margins = _split_certificate_many(grid)
    i, argmin, recs = _summarize(grid[:, np.newaxis], margins, records)
    return SweepSummary(points, float(margins[i]), argmin), recs


def sweep_sinh_triangle(
    samples: int, seed: int, bound: float = 5.0, records: int = 0
) -> tuple[SweepSummary, list[MarginSample]]:
    """Random sweep of [0, bound]^4; the margin is the worse of the two forms."""
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    args = rng.uniform(0.0, bound, (samples, 4))
    ma, mr = _sinh_triangle_many(args[:, 0], args[:, 1], args[:, 2], args[:, 3])
    margins = np.minimum(ma, mr)
    i, argmin, recs = _summarize(args, margins, records)
    return SweepSummary(samples, float(margins[i]), argmin), recs


def sweep_normalized_sum(
    samples: int, seed: int, records: int = 0
) -> tuple[SweepSummary, list[MarginSample]]:
    """Random sweep over valid inputs (normalized legs summing below 1)."""
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    got_inputs = []
    got = 0
    while got < samples:
        # acceptance is a few percent; oversample within a memory cap
        m = min(max((samples - got) * 16, 4096), 1 << 21)
        b = rng.uniform(1e-6, 3.0, m)
        c = rng.uniform(1e-6, 3.0, m)
        p = rng.uniform(0.0, 5.0, m)
        q = rng.uniform(0.0, 5.0, m)
        s = b / np.sqrt(1.0 + b**2) + c / np.sqrt(1.0 + c**2)
        # keep strictly below 1 so the combined side stays finite
        keep = s < 1.0 - 1e-9
        block = np.column_stack([b, c, p, q])[keep]
        if len(block) > samples - got:
            block = block[: samples - got]
        got_inputs.append(block)
        got += len(block)
    inputs = np.concatenate(got_inputs, axis=0)
    margins = _normalized_sum_many(inputs[:, 0], inputs[:, 1], inputs[:, 2], inputs[:, 3])
    i, argmin, recs = _summarize(inputs, margins, records)
    return SweepSummary(samples, float(margins[i]), argmin), recs


def sweep_axis_quadratic(
    alpha: float, t_lo: float = 2.0, t_hi: float = 100.0, points: int = 100000, records: int = 0
) -> tuple[SweepSummary, list[MarginSample]]:
    """Grid minimum of the factored quadratic margin over [t_lo, t_hi]."""
    if not alpha > 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not (2.0 <= t_lo < t_hi):
        raise ParameterError("need 2 <= t_lo < t_hi")
    if points < 2:
        raise ParameterError("points must be >= 2")
    grid = np.linspace(t_lo, t_hi, points)
    margins = (grid - 2.0) * (3.0 * grid - (alpha - 6.0))
    i, argmin, recs = _summarize(grid[:, np.newaxis], margins, records)
    return SweepSummary(points, float(margins[i]), argmin), recs
