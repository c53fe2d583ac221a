"""Polyline tracing of metric disk boundaries {x in G : m(x, center) < level}.

One crossing is recorded per ray: march outward from the center with a
multiplicative step until the metric reaches the level or the domain is
exited, then bisect the bracketing interval.  Level sets of these metrics
are star-shaped about the center in the cases drawn here; rays on which
the scan detects additional sign changes are flagged instead of traced,
so the output stays a single polyline per level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import quoteattr

import numpy as np

from .errors import MembershipError, NumericalError, ParameterError
from .geometry import Domain, as_point
from .metrics import MetricSpec

#: the first marching step, as a fraction of d_G(center)
_START_FRACTION = 1e-4
_STEP_FACTOR = 1.05
_MAX_MARCH_STEPS = 4000
#: bisection tolerance in the ray parameter
_T_TOL = 1e-8
#: every recorded crossing re-evaluates to the level within this
_LEVEL_TOL = 1e-6
#: multiplicity scan extends to this multiple of the first crossing
_SCAN_SPAN = 64.0


@dataclass(frozen=True, eq=False)
class DiskTrace:
    """Crossing points of one metric level around a fixed center."""

    center: np.ndarray
    level: float
    rays: int
    polyline: tuple[tuple[float, np.ndarray], ...]
    multiplicity_flags: tuple[bool, ...]


def trace_disk(
    metric: MetricSpec, domain: Domain, center, level: float, rays: int = 360
) -> DiskTrace:
    """Trace the level set of m(., center) along equally spaced rays."""
    if domain.dim != 2:
        raise ParameterError("disk tracing is two-dimensional")
    metric.validate_for(domain)
    c = as_point(center, 2)
    if not domain.contains(c):
        raise MembershipError(f"center {c.tolist()} is not in {domain.spec_string()}")
    if not 0.0 < level < 1.0:
        raise ParameterError(f"level must lie in (0, 1), got {level}")
    if rays < 8:
        raise ParameterError(f"need at least 8 rays, got {rays}")

    d_center = domain.boundary_distance(c)

    def value_at(t: float, direction: np.ndarray) -> float | None:
        """Metric value at center + t * direction, or None outside the domain."""
        pt = (c + t * direction)[np.newaxis, :]
        if not bool(domain.contains_many(pt)[0]):
            return None
        return float(metric.values_many(domain, pt, c[np.newaxis, :])[0])

    polyline = []
    flags = []
    for k in range(rays):
        angle = 2.0 * math.pi * k / rays
        direction = np.array([math.cos(angle), math.sin(angle)])
        t_cross = _first_crossing(value_at, direction, d_center, level)
        polyline.append((angle, c + t_cross * direction))
        flags.append(_has_extra_crossings(value_at, direction, t_cross, level))
    return DiskTrace(
        center=c,
        level=float(level),
        rays=int(rays),
        polyline=tuple(polyline),
        multiplicity_flags=tuple(flags),
    )


def _first_crossing(value_at, direction, d_center, level) -> float:
    """Outward march plus bisection; returns the ray parameter of the crossing."""
    lo = 0.0
    t = _START_FRACTION * d_center
    m = value_at(t, direction)
    steps = 0
    while m is not None and m < level:
        lo = t
        t *= _STEP_FACTOR
        m = value_at(t, direction)
        steps += 1
        if steps > _MAX_MARCH_STEPS:
            raise NumericalError("level never reached along ray")
    # invariant: the value at lo is defined and below level; at hi it is not
    hi = t
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        vm = value_at(mid, direction)
        if vm is None or vm >= level:
            hi = mid
        else:
            lo = mid
        if hi - lo <= _T_TOL:
            v_lo = value_at(lo, direction)
            if v_lo is not None and abs(v_lo - level) <= _LEVEL_TOL:
                return lo
    raise NumericalError("bisection failed to pin the level crossing")


def _has_extra_crossings(value_at, direction, t_cross, level) -> bool:
    """Scan a fixed multiplicative grid beyond the crossing for sign changes."""
    t = t_cross * 1.02
    above = True  # just crossed upward
    changes = 0
    while t <= t_cross * _SCAN_SPAN:
        m = value_at(t, direction)
        if m is not None:
            now_above = m >= level
            if now_above != above:
                changes += 1
                above = now_above
        t *= _STEP_FACTOR
    return changes > 0


def emit_trace(trace: DiskTrace, format: str) -> bytes:
    """Serialize a trace as CSV rows or a single-path SVG."""
    if not trace.polyline:
        raise ParameterError("cannot emit an empty trace")
    if format == "csv":
        return _emit_csv(trace)
    if format == "svg":
        return _emit_svg(trace)
    raise ParameterError(f"unknown trace format {format!r}")


def _emit_csv(trace: DiskTrace) -> bytes:
    lines = ["angle,x,y,flag"]
    for (angle, pt), flag in zip(trace.polyline, trace.multiplicity_flags):
        lines.append(f"{angle:.9g},{pt[0]:.9g},{pt[1]:.9g},{int(flag)}")
    return ("\n".join(lines) + "\n").encode()


def _emit_svg(trace: DiskTrace) -> bytes:
    pts = np.array([pt for _, pt in trace.polyline])
    all_pts = np.vstack([pts, trace.center[np.newaxis, :]])
    lo = all_pts.min(axis=0)
    hi = all_pts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    margin = 0.05 * span
    x0, y0 = lo - margin
    w = (hi[0] - lo[0]) + 2.0 * margin
    h = (hi[1] - lo[1]) + 2.0 * margin
    # flip y so the figure renders with the usual orientation
    view = f"{x0:.9g} {-(y0 + h):.9g} {w:.9g} {h:.9g}"
    path = "M " + " L ".join(f"{p[0]:.9g} {-p[1]:.9g}" for p in pts) + " Z"
    stroke = 0.004 * span
    marker = 0.01 * span
    svg = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox={quoteattr(view)}>\n'
        f'  <path d={quoteattr(path)} fill="none" stroke="black" stroke-width="{stroke:.9g}"/>\n'
        f'  <circle cx="{trace.center[0]:.9g}" cy="{-trace.center[1]:.9g}" r="{marker:.9g}" fill="black"/>\n'
        "</svg>\n"
    )
    return svg.encode()
