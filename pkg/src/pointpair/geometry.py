"""Canonical subdomains of R^n: membership, distance to boundary, sampling.

Every domain G here is a proper open subset of R^n with an exact closed
form for the distance d_G(x) = inf{|x - z| : z on the boundary of G}.
Membership is strict: points exactly on the boundary are non-members and
d_G is only reported for members (it is 0 on the boundary, where the
metrics built on top of it degenerate).

All values are immutable after construction; every operation is a pure
function of its inputs, so domains are safe to share between workers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    MembershipError,
    ParameterError,
)

Point = np.ndarray

# Log-uniform sampling range for unbounded directions, chosen to exercise
# the scale-invariance classes (6 decades around 1).
_LOG_RADIUS_LO = 1e-3
_LOG_RADIUS_HI = 1e3
# Points closer than this to a puncture are rejected by the samplers.
_PUNCTURE_CLEARANCE = 1e-9
# Minimum pairwise separation of punctures at construction time.
_PUNCTURE_SEPARATION = 1e-12


def as_point(x, dim: int | None = None) -> Point:
    """Coerce a scalar or coordinate sequence to a finite 1-D float vector."""
    pt = np.atleast_1d(np.asarray(x, dtype=float))
    if pt.ndim != 1:
        raise DimensionError(f"point must be a flat coordinate vector, got shape {pt.shape}")
    if pt.size < 1:
        raise DimensionError("point must have at least one coordinate")
    if not np.all(np.isfinite(pt)):
        raise ParameterError("point coordinates must be finite")
    if dim is not None and pt.size != dim:
        raise DimensionError(f"expected a point of dimension {dim}, got {pt.size}")
    return pt


def _unit_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniform random directions on the unit sphere in R^dim."""
    if dim == 1:
        return rng.choice([-1.0, 1.0], size=(count, 1))
    v = rng.standard_normal((count, dim))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    # Resample the (probability-zero) degenerate draws.
    while np.any(norms == 0.0):
        bad = norms[:, 0] == 0.0
        v[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(v, axis=1, keepdims=True)
    return v / norms


def _log_uniform(rng: np.random.Generator, count: int) -> np.ndarray:
    return np.exp(rng.uniform(math.log(_LOG_RADIUS_LO), math.log(_LOG_RADIUS_HI), count))


class Domain:
    """Base class for canonical open subdomains of R^n."""

    #: metric values on this domain are invariant under x -> lambda * x
    scale_invariant: bool = False

    @property
    def dim(self) -> int:
        raise NotImplementedError

    # --- array primitives (no validation; pts has shape (m, dim)) ---

    def dist_many(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        raise NotImplementedError

    # --- validated scalar interface ---

    def contains(self, x) -> bool:
        pt = as_point(x, self.dim)
        return bool(self.contains_many(pt[np.newaxis, :])[0])

    def boundary_distance(self, x) -> float:
        pt = as_point(x, self.dim)
        if not self.contains_many(pt[np.newaxis, :])[0]:
            raise MembershipError(f"{pt.tolist()} is not in the open domain {self.spec_string()}")
        return float(self.dist_many(pt[np.newaxis, :])[0])

    def sample_interior(self, seed: int, count: int) -> np.ndarray:
        """Deterministic interior sample of shape (count, dim) for a fixed seed."""
        if count < 1:
            raise ParameterError("count must be >= 1")
        rng = np.random.default_rng(seed)
        return self._sample(rng, count)

    def unit_point(self) -> Point | None:
        """Canonical point used to pin the scale on scale-invariant domains."""
        return None

    def spec_string(self) -> str:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec_string()!r})"


@dataclass(frozen=True, repr=False)
class Interval(Domain):
    """Open interval (a, b) in R; the canonical case is (-1, 1)."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ParameterError("interval endpoints must be finite")
        if not self.a < self.b:
            raise ParameterError(f"interval needs a < b, got ({self.a}, {self.b})")

    @property
    def dim(self) -> int:
        return 1

    def dist_many(self, pts):
        x = pts[:, 0]
        return np.minimum(x - self.a, self.b - x)

    def contains_many(self, pts):
        x = pts[:, 0]
        return (x > self.a) & (x < self.b)

    def _sample(self, rng, count):
        return rng.uniform(self.a, self.b, (count, 1))

    def spec_string(self):
        return f"interval:{self.a:g}:{self.b:g}"


@dataclass(frozen=True, repr=False)
class PositiveAxis(Domain):
    """The positive real axis (0, infinity)."""

    scale_invariant = True

    @property
    def dim(self) -> int:
        return 1

    def dist_many(self, pts):
        return pts[:, 0].copy()

    def contains_many(self, pts):
        return pts[:, 0] > 0.0

    def _sample(self, rng, count):
        return _log_uniform(rng, count)[:, np.newaxis]

    def unit_point(self):
        return np.array([1.0])

    def spec_string(self):
        return "rplus"


@dataclass(frozen=True, repr=False)
class HalfSpace(Domain):
    """Upper half-space {x in R^n : x_n > 0}, n >= 2."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("half-space needs dimension >= 2")

    @property
    def dim(self) -> int:
        return self.n

    def dist_many(self, pts):
        return pts[:, -1].copy()

    def contains_many(self, pts):
        return pts[:, -1] > 0.0

    def _sample(self, rng, count):
        # Horizontal part: uniform direction in the boundary plane at a
        # log-uniform radius; height log-uniform. Covers the translation
        # and scaling classes the half-space metrics are invariant under.
        pts = np.empty((count, self.n))
        pts[:, :-1] = _unit_directions(rng, count, self.n - 1) * _log_uniform(rng, count)[:, np.newaxis]
        pts[:, -1] = _log_uniform(rng, count)
        return pts

    def spec_string(self):
        return f"halfspace:{self.n}"


def _ball_sample(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniform-in-volume sample of the open unit ball."""
    radii = rng.uniform(0.0, 1.0, count) ** (1.0 / dim)
    return _unit_directions(rng, count, dim) * radii[:, np.newaxis]


def _reject_near(pts: np.ndarray, resample, near) -> np.ndarray:
    """Replace rows of pts that the predicate `near` flags, redrawing via `resample`."""
    bad = near(pts)
    while np.any(bad):
        pts[bad] = resample(int(bad.sum()))
        bad = near(pts)
    return pts


@dataclass(frozen=True, repr=False)
class UnitBall(Domain):
    """Open unit ball in R^n (for n = 1 this is the interval (-1, 1))."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("ball needs dimension >= 1")

    @property
    def dim(self) -> int:
        return self.n

    def dist_many(self, pts):
        return 1.0 - np.linalg.norm(pts, axis=1)

    def contains_many(self, pts):
        return np.linalg.norm(pts, axis=1) < 1.0

    def _sample(self, rng, count):
        return _ball_sample(rng, count, self.n)

    def spec_string(self):
        return f"ball:{self.n}"


@dataclass(frozen=True, repr=False)
class PuncturedSpace(Domain):
    """R^n with the origin removed."""

    n: int
    scale_invariant = True

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("punctured space needs dimension >= 1")

    @property
    def dim(self) -> int:
        return self.n

    def dist_many(self, pts):
        return np.linalg.norm(pts, axis=1)

    def contains_many(self, pts):
        return np.linalg.norm(pts, axis=1) > 0.0

    def _sample(self, rng, count):
        return _unit_directions(rng, count, self.n) * _log_uniform(rng, count)[:, np.newaxis]

    def unit_point(self):
        e1 = np.zeros(self.n)
        e1[0] = 1.0
        return e1

    def spec_string(self):
        return f"punctured:{self.n}"


@dataclass(frozen=True, repr=False)
class PuncturedBall(Domain):
    """Open unit ball in R^n with the origin removed."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("punctured ball needs dimension >= 1")

    @property
    def dim(self) -> int:
        return self.n

    def dist_many(self, pts):
        r = np.linalg.norm(pts, axis=1)
        return np.minimum(r, 1.0 - r)

    def contains_many(self, pts):
        r = np.linalg.norm(pts, axis=1)
        return (r > 0.0) & (r < 1.0)

    def _sample(self, rng, count):
        pts = _ball_sample(rng, count, self.n)
        return _reject_near(
            pts,
            lambda m: _ball_sample(rng, m, self.n),
            lambda p: np.linalg.norm(p, axis=1) <= _PUNCTURE_CLEARANCE,
        )

    def spec_string(self):
        return f"puncturedball:{self.n}"


@dataclass(frozen=True, repr=False)
class ExteriorBall(Domain):
    """Exterior of the closed unit ball in R^n, n >= 2."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("ball exterior needs dimension >= 2")

    @property
    def dim(self) -> int:
        return self.n

    def dist_many(self, pts):
        return np.linalg.norm(pts, axis=1) - 1.0

    def contains_many(self, pts):
        return np.linalg.norm(pts, axis=1) > 1.0

    def _sample(self, rng, count):
        radii = 1.0 + _log_uniform(rng, count)
        return _unit_directions(rng, count, self.n) * radii[:, np.newaxis]

    def spec_string(self):
        return f"exterior:{self.n}"


@dataclass(frozen=True, repr=False)
class PuncturedAxis3D(Domain):
    """R^3 with the x3-axis removed."""

    @property
    def dim(self) -> int:
        return 3

    def dist_many(self, pts):
        return np.hypot(pts[:, 0], pts[:, 1])

    def contains_many(self, pts):
        return np.hypot(pts[:, 0], pts[:, 1]) > 0.0

    def _sample(self, rng, count):
        pts = np.empty((count, 3))
        pts[:, :2] = _unit_directions(rng, count, 2) * _log_uniform(rng, count)[:, np.newaxis]
        pts[:, 2] = rng.choice([-1.0, 1.0], count) * _log_uniform(rng, count)
        return pts

    def spec_string(self):
        return "axis3d"


@dataclass(frozen=True, repr=False)
class MultiPunctured(Domain):
    """R^n with finitely many distinct points removed."""

    n: int
    punctures: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("multi-punctured space needs dimension >= 1")
        pts = tuple(tuple(float(c) for c in p) for p in self.punctures)
        if len(pts) < 1:
            raise ParameterError("at least one puncture is required")
        for p in pts:
            if len(p) != self.n:
                raise DimensionError(f"puncture {p} does not have dimension {self.n}")
            if not all(math.isfinite(c) for c in p):
                raise ParameterError("puncture coordinates must be finite")
        arr = np.asarray(pts)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if np.linalg.norm(arr[i] - arr[j]) <= _PUNCTURE_SEPARATION:
                    raise ParameterError(
                        f"punctures {pts[i]} and {pts[j]} are closer than {_PUNCTURE_SEPARATION}"
                    )
        object.__setattr__(self, "punctures", pts)

    @property
    def dim(self) -> int:
        return self.n

    def _puncture_array(self) -> np.ndarray:
        return np.asarray(self.punctures)

    def dist_many(self, pts):
        diffs = pts[:, np.newaxis, :] - self._puncture_array()[np.newaxis, :, :]
        return np.linalg.norm(diffs, axis=2).min(axis=1)

    def contains_many(self, pts):
        return self.dist_many(pts) > 0.0

    def _sample(self, rng, count):
        # Log-uniform shells around a randomly chosen puncture, scaled by
        # the extent of the puncture cloud, rejecting draws that land on
        # another puncture.
        arr = self._puncture_array()
        extent = 1.0
        if len(self.punctures) > 1:
            diam = max(
                float(np.linalg.norm(arr[i] - arr[j]))
                for i in range(len(arr))
                for j in range(i + 1, len(arr))
            )
            extent = max(1.0, diam)

        def draw(m: int) -> np.ndarray:
            centers = arr[rng.integers(0, len(arr), m)]
            radii = _log_uniform(rng, m) * extent
            return centers + _unit_directions(rng, m, self.n) * radii[:, np.newaxis]

        pts = draw(count)
        return _reject_near(pts, draw, lambda p: self.dist_many(p) <= _PUNCTURE_CLEARANCE)

    def spec_string(self):
        inner = ",".join("(" + ",".join(f"{c:g}" for c in p) + ")" for p in self.punctures)
        return f"multipunct:{self.n}:[{inner}]"


# --- module-level operation surface ---


def boundary_distance(domain: Domain, x) -> float:
    """Distance from a member point x to the boundary of the domain."""
    return domain.boundary_distance(x)


def contains(domain: Domain, x) -> bool:
    """Strict membership test; boundary points are excluded."""
    return domain.contains(x)


def sample_interior(domain: Domain, seed: int, count: int) -> np.ndarray:
    """Deterministic sample of `count` interior points, shape (count, dim)."""
    return domain.sample_interior(seed, count)


def reflect_across_boundary(x) -> Point:
    """Mirror image of a half-space point across the boundary hyperplane."""
    pt = as_point(x)
    if pt.size < 2:
        raise DimensionError("reflection is defined for half-space points (dimension >= 2)")
    out = pt.copy()
    out[-1] = -out[-1]
    return out


# --- compact text form used by the CLI and config files ---

_MULTIPUNCT_RE = re.compile(r"^multipunct:(\d+):\[(.*)\]$")
_TUPLE_RE = re.compile(r"\(([^()]*)\)")


def parse_domain(text: str) -> Domain:
    """Parse the compact text form, e.g. "interval:-1:1" or "ball:2"."""
    s = text.strip().replace("−", "-")  # accept unicode minus
    try:
        if s == "rplus":
            return PositiveAxis()
        if s == "axis3d":
            return PuncturedAxis3D()
        m = _MULTIPUNCT_RE.match(s)
        if m:
            n = int(m.group(1))
            tuples = _TUPLE_RE.findall(m.group(2))
            if not tuples:
                raise ParameterError(f"no punctures in {text!r}")
            punctures = tuple(tuple(float(c) for c in t.split(",")) for t in tuples)
            return MultiPunctured(n, punctures)
        head, _, rest = s.partition(":")
        if head == "interval":
            a, _, b = rest.partition(":")
            return Interval(float(a), float(b))
        simple = {
            "halfspace": HalfSpace,
            "ball": UnitBall,
            "punctured": PuncturedSpace,
            "puncturedball": PuncturedBall,
            "exterior": ExteriorBall,
        }
        if head in simple and rest:
            return simple[head](int(rest))
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"cannot parse domain {text!r}: {exc}") from exc
    raise ParameterError(f"unknown domain {text!r}")
