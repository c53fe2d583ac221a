"""The point pair function family and its closed-form companions.

For members x, y of an open domain G with boundary distance d_G, the
point pair function is

    p_G(x, y) = |x - y| / sqrt(|x - y|^2 + 4 d_G(x) d_G(y))

and its generalization replaces the constant 4 with any alpha > 0.  The
triangular ratio metric s_G(x, y) = |x - y| / inf_z (|x - z| + |z - y|),
with z ranging over the boundary, has closed forms on the positive axis,
the half-space and intervals; those are the only domains it is evaluated
on here.  The inversion metric psi^alpha is the pullback of p^alpha on the
ball exterior under x -> x / |x|^2 and lives on the punctured unit ball.

All values lie in [0, 1), vanish exactly at coincident arguments, and are
symmetric.  Evaluation is pure and stateless.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UnsupportedDomainError
from .geometry import (
    Domain,
    HalfSpace,
    Interval,
    PositiveAxis,
    PuncturedBall,
    as_point,
    reflect_across_boundary,
)


def _pair(domain: Domain, x, y) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Validate both points as members and return them with boundary distances."""
    px = as_point(x, domain.dim)
    py = as_point(y, domain.dim)
    dx = domain.boundary_distance(px)
    dy = domain.boundary_distance(py)
    return px, py, dx, dy


def point_pair(domain: Domain, x, y) -> float:
    """p_G(x, y); equal to the generalized form at alpha = 4."""
    return point_pair_alpha(domain, 4.0, x, y)


def point_pair_alpha(domain: Domain, alpha: float, x, y) -> float:
    """|x - y| / sqrt(|x - y|^2 + alpha d_G(x) d_G(y)) for alpha > 0."""
    if not alpha > 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    px, py, dx, dy = _pair(domain, x, y)
    diff = float(np.linalg.norm(px - py))
    if diff == 0.0:
        return 0.0
    return diff / math.sqrt(diff * diff + alpha * dx * dy)


def triangular_ratio(domain: Domain, x, y) -> float:
    """s_G(x, y) on the domains where the boundary infimum has a closed form."""
    if isinstance(domain, PositiveAxis):
        px, py, _, _ = _pair(domain, x, y)
        a, b = float(px[0]), float(py[0])
        return abs(a - b) / (a + b)
    if isinstance(domain, HalfSpace):
        px, py, _, _ = _pair(domain, x, y)
        mirrored = reflect_across_boundary(py)
        diff = float(np.linalg.norm(px - py))
        if diff == 0.0:
            return 0.0
        return diff / float(np.linalg.norm(px - mirrored))
    if isinstance(domain, Interval):
        px, py, _, _ = _pair(domain, x, y)
        a, b = float(px[0]), float(py[0])
        if a == b:
            return 0.0
        via_left = abs(a - domain.a) + abs(domain.a - b)
        via_right = abs(a - domain.b) + abs(domain.b - b)
        return abs(a - b) / min(via_left, via_right)
    raise UnsupportedDomainError(
        f"triangular ratio metric has no closed form on {domain.spec_string()}"
    )


def psi_alpha(alpha: float, x, y) -> float:
    """Inversion metric on the punctured unit ball.

    psi^alpha(x, y) = |x - y| / sqrt(|x - y|^2 + alpha |x||y| (1 - |x|)(1 - |y|)),
    equal to p^alpha on the ball exterior evaluated at x/|x|^2, y/|y|^2.
    """
    if not alpha > 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    px = as_point(x)
    py = as_point(y, px.size)
    domain = PuncturedBall(px.size)
    dx = domain.boundary_distance(px)  # membership check; value unused
    dy = domain.boundary_distance(py)
    del dx, dy
    diff = float(np.linalg.norm(px - py))
    if diff == 0.0:
        return 0.0
    rx = float(np.linalg.norm(px))
    ry = float(np.linalg.norm(py))
    return diff / math.sqrt(diff * diff + alpha * rx * ry * (1.0 - rx) * (1.0 - ry))


@dataclass(frozen=True)
class MetricSpec:
    """Selects a metric family and its parameter.

    kind is one of "ppf" (point pair family, alpha defaults to 4),
    "s" (triangular ratio) or "psi" (inversion metric, needs alpha).
    """

    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ("ppf", "s", "psi"):
            raise ParameterError(f"unknown metric family {self.kind!r}")
        if self.kind == "s":
            if self.alpha is not None:
                raise ParameterError("the triangular ratio metric takes no alpha")
        else:
            alpha = 4.0 if self.alpha is None else float(self.alpha)
            if not alpha > 0.0:
                raise ParameterError(f"alpha must be positive, got {alpha}")
            object.__setattr__(self, "alpha", alpha)

    @classmethod
    def point_pair(cls) -> "MetricSpec":
        return cls("ppf", 4.0)

    @classmethod
    def generalized(cls, alpha: float) -> "MetricSpec":
        return cls("ppf", alpha)

    @classmethod
    def triangular(cls) -> "MetricSpec":
        return cls("s")

    @classmethod
    def inversion(cls, alpha: float) -> "MetricSpec":
        return cls("psi", alpha)

    def validate_for(self, domain: Domain) -> None:
        if self.kind == "s" and not isinstance(domain, (PositiveAxis, HalfSpace, Interval)):
            raise UnsupportedDomainError(
                f"triangular ratio metric is not available on {domain.spec_string()}"
            )
        if self.kind == "psi" and not isinstance(domain, PuncturedBall):
            raise UnsupportedDomainError(
                f"inversion metric is only defined on the punctured ball, not {domain.spec_string()}"
            )

    def value(self, domain: Domain, x, y) -> float:
        """Validated scalar evaluation."""
        self.validate_for(domain)
        if self.kind == "ppf":
            return point_pair_alpha(domain, self.alpha, x, y)
        if self.kind == "s":
            return triangular_ratio(domain, x, y)
        return psi_alpha(self.alpha, x, y)

    def values_many(self, domain: Domain, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on (m, dim) arrays of member points.

        No membership validation: callers supply sampled members.
        """
        diff = np.linalg.norm(xs - ys, axis=1)
        if self.kind == "ppf":
            w = self.alpha * domain.dist_many(xs) * domain.dist_many(ys)
        elif self.kind == "psi":
            rx = np.linalg.norm(xs, axis=1)
            ry = np.linalg.norm(ys, axis=1)
            w = self.alpha * rx * ry * (1.0 - rx) * (1.0 - ry)
        elif isinstance(domain, PositiveAxis):
            return np.abs(xs[:, 0] - ys[:, 0]) / (xs[:, 0] + ys[:, 0])
        elif isinstance(domain, HalfSpace):
            mirrored = ys.copy()
            mirrored[:, -1] = -mirrored[:, -1]
            denom = np.linalg.norm(xs - mirrored, axis=1)
            out = np.zeros_like(diff)
            nz = diff > 0.0
            out[nz] = diff[nz] / denom[nz]
            return out
        else:  # Interval closed form
            a, b = domain.a, domain.b
            via_left = np.abs(xs[:, 0] - a) + np.abs(a - ys[:, 0])
            via_right = np.abs(xs[:, 0] - b) + np.abs(b - ys[:, 0])
            out = np.zeros_like(diff)
            nz = diff > 0.0
            out[nz] = diff[nz] / np.minimum(via_left, via_right)[nz]
            return out
        out = np.zeros_like(diff)
        nz = diff > 0.0
        out[nz] = diff[nz] / np.sqrt(diff[nz] ** 2 + w[nz])
        return out

    def spec_string(self) -> str:
        if self.kind == "s":
            return "s"
        if self.kind == "ppf" and self.alpha == 4.0:
            return "ppf"
        return f"{self.kind}:alpha={self.alpha:g}"


_METRIC_RE = re.compile(r"^(ppf|s|psi)(?::alpha=([^:]+))?$")


def parse_metric(text: str) -> MetricSpec:
    """Parse the compact text form: "ppf", "ppf:alpha=3.5", "s", "psi:alpha=4"."""
    s = text.strip().replace("−", "-")
    m = _METRIC_RE.match(s)
    if not m:
        raise ParameterError(f"unknown metric {text!r}")
    kind, alpha_text = m.group(1), m.group(2)
    alpha: float | None = None
    if alpha_text is not None:
        try:
            alpha = float(alpha_text)
        except ValueError as exc:
            raise ParameterError(f"bad alpha in metric {text!r}") from exc
        if kind == "s":
            raise ParameterError("the triangular ratio metric takes no alpha")
    if kind == "psi" and alpha is None:
        raise ParameterError("psi requires an explicit alpha, e.g. psi:alpha=4")
    return MetricSpec(kind, alpha)
