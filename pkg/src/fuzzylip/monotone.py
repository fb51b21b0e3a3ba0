"""Non-decreasing maps on [0, +inf] and their right adjoints.

For a non-decreasing ``phi`` the right adjoint is

    phi_star(y) = sup {x in [0, +inf] : phi(x) <= y},    sup of the empty set = 0.

It always satisfies ``x <= phi_star(phi(x))``; if ``phi`` is also
left-continuous with ``phi(0) == 0`` then ``phi(phi_star(y)) <= y`` as well.
Bounded ``phi`` gives ``phi_star(y) == +inf`` for every ``y >= sup phi``.

Closed-form adjoints are post-processed so that both inequalities hold in
floating point too: the candidate is moved down until ``phi(c) <= y`` and
then replaced by the largest float within ``_SNAP_WINDOW`` ulps above it
that still satisfies ``phi <= y``. A window rather than a first-failure stop
is needed because some formulas (``x / (x + 1)``) are only monotone up to
rounding. Subnormal arguments, where ``phi`` underflows to 0, are outside
what these guarantees cover.
"""

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NumericError
from .extended import INF, as_ext, from_json, to_json

BISECT_TOL = 1e-10
BISECT_MAX_ITER = 200
_MAX_DOUBLINGS = 2100
_MAX_SNAP = 64
_SNAP_WINDOW = 64


class MonotoneFunction:
    """Base class. Subclasses implement ``_eval`` on finite arguments."""

    sup_value: float = INF
    left_continuous: bool = True

    def __call__(self, x):
        x = as_ext(x)
        if x == INF:
            return self.sup_value
        return self._eval(x)

    def _eval(self, x):
        raise NotImplementedError

    def _adjoint_candidate(self, y):
        """Closed-form guess for ``phi_star(y)`` with ``y < sup_value``.

        ``None`` means no closed form; bisection is used instead.
        """
        return None

    def right_adjoint(self, y):
        y = as_ext(y)
        if y >= self.sup_value:
            return INF
        if self._eval(0.0) > y:
            return 0.0
        c = self._adjoint_candidate(y)
        if c is None:
            return bisect_right_adjoint(self._eval, y, self.sup_value)
        return self._snap(y, float(c))

    def _snap(self, y, c):
        if c == INF:
            return c
        c = max(c, 0.0)
        if not self.left_continuous:
            # the supremum need not be attained; keep the closed form
            return c
        for _ in range(_MAX_SNAP):
            if c == 0.0 or self._eval(c) <= y:
                break
            c = math.nextafter(c, -INF)
        else:
            raise NumericError(f"adjoint candidate did not settle below y={y!r}")
        # moving up from 0 would only walk into subnormals
        if c > 0.0:
            c = self._gallop(y, c)
            n = c
            for _ in range(_SNAP_WINDOW):
                n = math.nextafter(n, INF)
                if self._eval(n) <= y:
                    c = n
        return c

    def _gallop(self, y, c):
        """Push ``c`` across a plateau of ``phi == y`` wider than the window."""
        step = math.ulp(c) * _SNAP_WINDOW
        if self._eval(c + step) > y:
            return c
        lo, hi = c + step, INF
        for _ in range(_MAX_DOUBLINGS):
            step *= 2.0
            probe = lo + step
            if probe == INF or self._eval(probe) > y:
                hi = probe
                break
            lo = probe
        if hi == INF:
            return lo
        while True:
            mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                return lo
            if self._eval(mid) <= y:
                lo = mid
            else:
                hi = mid

    def envelope(self):
        if self.left_continuous and self._eval(0.0) == 0.0:
            return self
        return LeftContinuousEnvelope(self)

    def to_dict(self):
        raise TypeError(f"{type(self).__name__} is not serialisable")

    @property
    def metric_generating(self):
        """Whether ``phi(0) == 0`` (positivity off 0 needs sampling)."""
        return self._eval(0.0) == 0.0


@dataclass(frozen=True)
class Clamp(MonotoneFunction):
    """``x -> min(x, cap) / scale``."""

    scale: float
    cap: float

    def __post_init__(self):
        if not (self.scale > 0 and self.cap > 0):
            raise DomainError("clamp needs scale > 0 and cap > 0")

    @property
    def sup_value(self):
        return self.cap / self.scale

    def _eval(self, x):
        return min(x, self.cap) / self.scale

    def _adjoint_candidate(self, y):
        return self.scale * y

    def to_dict(self):
        return {"kind": "clamp", "scale": self.scale, "cap": self.cap}


@dataclass(frozen=True)
class Linear(MonotoneFunction):
    """``x -> slope * x``; unbounded, so never the phi of a fuzzy metric."""

    slope: float

    def __post_init__(self):
        if not self.slope > 0:
            raise DomainError("linear needs slope > 0")

    sup_value = INF

    def _eval(self, x):
        return self.slope * x

    def _adjoint_candidate(self, y):
        return y / self.slope

    def to_dict(self):
        return {"kind": "linear", "slope": self.slope}


@dataclass(frozen=True)
class RationalSaturating(MonotoneFunction):
    """``x -> x / (x + 1)`` with supremum 1."""

    sup_value = 1.0

    def _eval(self, x):
        return x / (x + 1.0)

    def _adjoint_candidate(self, y):
        return y / (1.0 - y)

    def to_dict(self):
        return {"kind": "rational"}


@dataclass(frozen=True)
class PiecewiseLinear(MonotoneFunction):
    """Linear interpolation through ``breakpoints``.

    The first abscissa must be 0. An abscissa may appear twice, as
    ``(x, left_value), (x, right_value)``, to encode a jump; ``closed``
    decides which of the two values is taken at ``x`` itself ("left" makes
    the function left-continuous). Past the last breakpoint the function
    continues with ``tail_slope`` (0 keeps it bounded).
    """

    breakpoints: tuple
    closed: str = "left"
    tail_slope: float = 0.0
    _xs: tuple = field(init=False, repr=False, compare=False)
    _ys: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.breakpoints)
        if not pts:
            raise DomainError("piecewise-linear needs at least one breakpoint")
        if pts[0][0] != 0.0:
            raise DomainError("first breakpoint must sit at x = 0")
        if self.closed not in ("left", "right"):
            raise DomainError("closed must be 'left' or 'right'")
        if self.tail_slope < 0:
            raise DomainError("tail_slope must be non-negative")
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x1 < x0 or y1 < y0:
                raise DomainError("breakpoints must be non-decreasing in x and y")
        xs = [p[0] for p in pts]
        for x in set(xs):
            if xs.count(x) > 2:
                raise DomainError(f"more than two breakpoints at x={x}")
        if any(not math.isfinite(v) or v < 0 for p in pts for v in p):
            raise DomainError("breakpoints must be finite and non-negative")
        object.__setattr__(self, "breakpoints", pts)
        object.__setattr__(self, "_xs", tuple(xs))
        object.__setattr__(self, "_ys", tuple(p[1] for p in pts))

    @property
    def sup_value(self):
        return INF if self.tail_slope > 0 else self._ys[-1]

    @property
    def left_continuous(self):
        if self.closed == "left":
            return True
        xs = self._xs
        return not any(a == b for a, b in zip(xs, xs[1:]))

    def _eval(self, x):
        xs, ys = self._xs, self._ys
        if x > xs[-1]:
            return ys[-1] + self.tail_slope * (x - xs[-1])
        i = bisect.bisect_left(xs, x)
        if xs[i] == x:
            if i + 1 < len(xs) and xs[i + 1] == x:
                return ys[i] if self.closed == "left" else ys[i + 1]
            return ys[i]
        xa, ya, xb, yb = xs[i - 1], ys[i - 1], xs[i], ys[i]
        return min(ya + (x - xa) * ((yb - ya) / (xb - xa)), yb)

    def _adjoint_candidate(self, y):
        xs, ys = self._xs, self._ys
        for i in range(len(xs) - 1):
            xa, ya, xb, yb = xs[i], ys[i], xs[i + 1], ys[i + 1]
            if ya > y:
                return xa
            if xa == xb or yb <= y:
                continue
            return min(max(xa + (y - ya) / ((yb - ya) / (xb - xa)), xa), xb)
        if ys[-1] > y:
            return xs[-1]
        # y < sup_value here, so the tail must be rising
        return xs[-1] + (y - ys[-1]) / self.tail_slope

    def envelope(self):
        if self.left_continuous and self._ys[0] == 0.0:
            return self
        pts = list(self.breakpoints)
        if pts[0][1] != 0.0 and not (len(pts) > 1 and pts[1][0] == 0.0):
            pts.insert(0, (0.0, 0.0))
        elif pts[0][1] != 0.0:
            pts[0] = (0.0, 0.0)
        return PiecewiseLinear(tuple(pts), closed="left", tail_slope=self.tail_slope)

    def to_dict(self):
        return {
            "kind": "piecewise",
            "breakpoints": [list(p) for p in self.breakpoints],
            "closed": self.closed,
            "tail_slope": self.tail_slope,
        }


class MonotoneCallable(MonotoneFunction):
    """Wrap an arbitrary non-decreasing callable; adjoint by bisection."""

    def __init__(self, fn: Callable[[float], float], sup_value=INF, left_continuous=True):
        self.fn = fn
        self.sup_value = as_ext(sup_value)
        self.left_continuous = left_continuous

    def _eval(self, x):
        return float(self.fn(x))

    def __repr__(self):
        return f"MonotoneCallable({self.fn!r}, sup_value={self.sup_value!r})"


class LeftContinuousEnvelope(MonotoneFunction):
    """``x -> sup {phi(y) : y < x}`` for a wrapped ``phi``.

    Over floats the supremum is attained at the predecessor of ``x``, so the
    envelope is exact on the float grid.
    """

    left_continuous = True

    def __init__(self, base: MonotoneFunction):
        self.base = base
        self.sup_value = base.sup_value

    def _eval(self, x):
        if x == 0.0:
            return 0.0
        return self.base._eval(math.nextafter(x, -INF))

    def _adjoint_candidate(self, y):
        # {x : envelope(x) <= y} and {x : phi(x) <= y} share their supremum
        return self.base.right_adjoint(y)

    def envelope(self):
        return self

    def to_dict(self):
        return {"kind": "envelope", "of": self.base.to_dict()}

    def __repr__(self):
        return f"LeftContinuousEnvelope({self.base!r})"


def bisect_right_adjoint(fn, y, sup_value=INF, tol=BISECT_TOL, max_iter=BISECT_MAX_ITER):
    """``sup {x : fn(x) <= y}`` by bracketing and bisection.

    Returns the lower end of the final bracket, so ``fn(result) <= y`` always
    holds; the true supremum lies within ``tol`` above it.
    """
    y = as_ext(y)
    if y >= sup_value:
        return INF
    if fn(0.0) > y:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(_MAX_DOUBLINGS):
        if fn(hi) > y:
            break
        lo, hi = hi, hi * 2.0
        if hi == INF:
            raise NumericError(f"no x with phi(x) > {y!r} below float max", (lo, hi))
    else:
        raise NumericError("bracket search exhausted", (lo, hi))
    for _ in range(max_iter):
        if hi - lo <= tol:
            return lo
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            return lo
        if fn(mid) <= y:
            lo = mid
        else:
            hi = mid
    raise NumericError(f"bisection did not reach tol={tol} in {max_iter} steps", (lo, hi))


def right_adjoint_eval(phi: MonotoneFunction, y):
    return phi.right_adjoint(y)


def left_continuous_envelope(phi: MonotoneFunction):
    return phi.envelope()


def from_dict(spec) -> MonotoneFunction:
    """Build a function from its tagged-record form, e.g. ``{"kind": "clamp", ...}``."""
    if isinstance(spec, MonotoneFunction):
        return spec
    try:
        kind = spec["kind"]
    except (TypeError, KeyError):
        raise DomainError(f"monotone function spec needs a 'kind': {spec!r}") from None
    if kind == "clamp":
        return Clamp(float(spec["scale"]), float(spec["cap"]))
    if kind == "linear":
        return Linear(float(spec["slope"]))
    if kind in ("rational", "rational-saturating"):
        return RationalSaturating()
    if kind in ("piecewise", "piecewise-linear"):
        return PiecewiseLinear(
            tuple(tuple(p) for p in spec["breakpoints"]),
            closed=spec.get("closed", "left"),
            tail_slope=float(spec.get("tail_slope", 0.0)),
        )
    if kind == "envelope":
        return from_dict(spec["of"]).envelope()
    raise DomainError(f"unknown monotone function kind {kind!r}")


@dataclass
class GaloisReport:
    lower_law: list  # (x, phi*(phi(x)), ok)
    upper_law: list  # (y, phi(phi*(y)), ok)
    upper_law_applicable: bool
    worst_violation: float
    passed: bool

    def to_dict(self):
        return {
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "upper_law_applicable": self.upper_law_applicable,
            "lower_law_failures": [
                {"x": to_json(x), "phi_star_phi_x": to_json(v)} for x, v, ok in self.lower_law if not ok
            ],
            "upper_law_failures": [
                {"y": to_json(y), "phi_phi_star_y": to_json(v)} for y, v, ok in self.upper_law if not ok
            ],
        }


def check_galois(phi: MonotoneFunction, grid: Sequence[float], tol=0.0) -> GaloisReport:
    """Check ``x <= phi*(phi(x))`` and, when it applies, ``phi(phi*(y)) <= y + tol``.

    The lower law is checked exactly. The upper law only holds for
    left-continuous ``phi`` with ``phi(0) == 0``; otherwise it is skipped.
    """
    pts = [from_json(v) if isinstance(v, str) else as_ext(v) for v in grid]
    worst = 0.0
    lower = []
    for x in pts:
        v = phi.right_adjoint(phi(x))
        ok = x <= v
        if not ok:
            worst = max(worst, x - v)
        lower.append((x, v, ok))
    applicable = phi.left_continuous and phi(0.0) == 0.0
    upper = []
    if applicable:
        for y in pts:
            v = phi(phi.right_adjoint(y))
            ok = v <= y + tol
            if not ok:
                worst = max(worst, v - y)
            upper.append((y, v, ok))
    passed = all(ok for *_, ok in lower) and all(ok for *_, ok in upper)
    return GaloisReport(lower, upper, applicable, worst, passed)


def log_grid(n=1000, lo=1e-6, hi=1e6, include_ends=True):
    """``n`` log-spaced points, optionally with 0 and +inf appended."""
    g = list(np.geomspace(lo, hi, n))
    if include_ends:
        g = [0.0] + g + [INF]
    return g
