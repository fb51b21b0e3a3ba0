"""Euclidean fuzzy metrics on the reals and finite fuzzy metric spaces.

Spaces follow the George-Veeramani axioms: for t, s > 0

    0 < M(x, y, t) <= 1,   M(x, y, t) = 1  iff  x = y,   M(x, y, t) = M(y, x, t),
    M(x, z, t + s) >= T(M(x, y, t), M(y, z, s)),   M(x, y, .) continuous.

Continuity is only approximated by checking monotonicity on a t-grid.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import monotone
from .errors import ConstructionError, DomainError, InvalidMetricError
from .extended import INF, to_json
from .tnorms import TNorm, tnorm_apply


def default_t_grid(n=20, lo=1e-3, hi=1e3):
    return [float(t) for t in np.geomspace(lo, hi, n)]


def _check_t(t):
    t = float(t)
    if not t > 0 or math.isinf(t):
        raise DomainError(f"t must be a positive real, got {t!r}")
    return t


# -- time scalings --------------------------------------------------------


@dataclass(frozen=True)
class HFunction:
    """Increasing continuous ``h``: ``offset + slope * t`` or ``offset + exp(t)``."""

    kind: str = "affine"
    offset: float = 1.0
    slope: float = 1.0

    def __post_init__(self):
        if self.kind not in ("affine", "exp"):
            raise DomainError(f"unknown h kind {self.kind!r}")
        if self.kind == "affine" and not self.slope > 0:
            raise DomainError("affine h needs slope > 0")

    def __call__(self, t):
        t = _check_t(t)
        if self.kind == "affine":
            return self.offset + self.slope * t
        return self.offset + math.exp(t)

    @property
    def infimum(self):
        """``lim h(t)`` as ``t -> 0+``."""
        return self.offset if self.kind == "affine" else self.offset + 1.0

    def to_dict(self):
        d = {"kind": self.kind, "offset": self.offset}
        if self.kind == "affine":
            d["slope"] = self.slope
        return d


@dataclass(frozen=True)
class TimeScaling:
    """``g(t)``: a positive constant, or ``1 / h(t)``."""

    constant: Optional[float] = None
    h: Optional[HFunction] = None

    def __post_init__(self):
        if (self.constant is None) == (self.h is None):
            raise DomainError("time scaling needs exactly one of constant / h")
        if self.constant is not None and not self.constant > 0:
            raise DomainError("constant g must be positive")
        if self.h is not None and not self.h.infimum > 0:
            raise DomainError("reciprocal g needs h > 0")

    def __call__(self, t):
        t = _check_t(t)
        if self.constant is not None:
            return self.constant
        return 1.0 / self.h(t)

    def to_dict(self):
        if self.constant is not None:
            return {"kind": "constant", "value": self.constant}
        return {"kind": "reciprocal", "h": self.h.to_dict()}

    @classmethod
    def from_dict(cls, spec):
        if isinstance(spec, (int, float)):
            return cls(constant=float(spec))
        kind = spec.get("kind", "constant")
        if kind == "constant":
            return cls(constant=float(spec["value"]))
        if kind == "reciprocal":
            return cls(h=h_from_dict(spec["h"]))
        raise DomainError(f"unknown time scaling kind {kind!r}")


def h_from_dict(spec):
    return HFunction(spec.get("kind", "affine"), float(spec.get("offset", 1.0)), float(spec.get("slope", 1.0)))


# -- Euclidean fuzzy metric -------------------------------------------------


@dataclass(frozen=True)
class EuclideanFuzzyMetric:
    """``M(x, y, t) = 1 - phi(|x - y|) * g(t)`` on the real line."""

    phi: monotone.MonotoneFunction
    g: TimeScaling = TimeScaling(constant=1.0)
    tnorm: TNorm = TNorm.LUKASIEWICZ

    def __call__(self, x, y, t):
        return efm_eval(self, x, y, t)

    def to_dict(self):
        return {"phi": self.phi.to_dict(), "g": self.g.to_dict(), "tnorm": self.tnorm.value}

    @classmethod
    def from_dict(cls, spec):
        return cls(
            monotone.from_dict(spec["phi"]),
            TimeScaling.from_dict(spec.get("g", 1.0)),
            TNorm.parse(spec.get("tnorm", "luk")),
        )


def efm_eval(efm, x, y, t):
    t = _check_t(t)
    raw = 1.0 - efm.phi(abs(float(x) - float(y))) * efm.g(t)
    if raw < 0:
        raise InvalidMetricError(
            f"membership {raw!r} < 0 at x={x!r}, y={y!r}, t={t!r}", witness=(x, y, t)
        )
    return raw


def n_e():
    """The codomain metric ``1 - min(|x - y|, 1) / 2`` with the Lukasiewicz t-norm."""
    return EuclideanFuzzyMetric(monotone.Clamp(2.0, 1.0), TimeScaling(constant=1.0), TNorm.LUKASIEWICZ)


@dataclass
class Check:
    passed: bool
    worst: float = 0.0
    witness: Optional[dict] = None

    def to_dict(self):
        return {"passed": self.passed, "worst": to_json(self.worst), "witness": self.witness}


@dataclass
class ValidationReport:
    checks: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks.values())

    def failures(self):
        return [name for name, c in self.checks.items() if not c.passed]

    def to_dict(self):
        return {"passed": self.passed, "checks": {k: v.to_dict() for k, v in self.checks.items()}}


def validate_remark1(efm, distances=None, t_grid=None, tol=0.0):
    """Check the three structural consequences of ``M`` being a fuzzy metric.

    ``phi_zero``: ``phi(0) == 0`` and ``phi(r) > 0`` for sampled ``r > 0``.
    ``phi_bounded``: ``sup phi`` is finite and bounds every sample.
    ``g_bound``: ``g(t) * sup phi <= 1`` on the t-grid.
    """
    distances = monotone.log_grid(200, 1e-6, 1e6, include_ends=False) if distances is None else list(distances)
    t_grid = default_t_grid() if t_grid is None else list(t_grid)
    if not distances or not t_grid:
        raise DomainError("grids must be non-empty")
    phi = efm.phi
    rep = ValidationReport()

    c = Check(True)
    p0 = phi(0.0)
    if p0 != 0.0:
        c = Check(False, p0, {"x": 0.0, "phi": p0})
    else:
        for r in distances:
            v = phi(r)
            if r > 0 and v <= 0.0:
                c = Check(False, 0.0, {"x": r, "phi": v})
                break
    rep.checks["phi_zero"] = c

    sup = phi.sup_value
    if sup == INF:
        big = max(distances)
        rep.checks["phi_bounded"] = Check(False, INF, {"x": big, "phi": phi(big), "sup": "inf"})
    else:
        worst_r = max(distances, key=phi)
        excess = phi(worst_r) - sup
        rep.checks["phi_bounded"] = Check(
            excess <= tol, max(excess, 0.0), None if excess <= tol else {"x": worst_r, "phi": phi(worst_r), "sup": sup}
        )

    c = Check(True)
    for t in t_grid:
        v = efm.g(t) * sup if sup != INF else INF
        if v > 1.0 + tol:
            c = Check(False, v - 1.0, {"t": t, "value": to_json(v), "bound": 1.0})
            break
    rep.checks["g_bound"] = c
    return rep


# -- finite spaces ------------------------------------------------------------


def validate_metric_matrix(d, tol=1e-12):
    """Eagerly check a base metric: square, symmetric, zero diagonal, triangle."""
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ConstructionError(f"metric matrix must be square, got shape {d.shape}")
    if d.shape[0] == 0:
        raise ConstructionError("metric matrix is empty")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise ConstructionError("metric entries must be finite and non-negative")
    if np.any(np.diag(d) != 0):
        i = int(np.flatnonzero(np.diag(d))[0])
        raise ConstructionError(f"metric diagonal must be zero (d[{i},{i}] = {d[i, i]})")
    if not np.array_equal(d, d.T):
        i, j = np.argwhere(d != d.T)[0]
        raise ConstructionError(f"metric must be symmetric (d[{i},{j}] != d[{j},{i}])")
    via = d[:, :, None] + d[None, :, :]  # via[i, j, k] = d[i, j] + d[j, k]
    excess = d[:, None, :] - via
    if excess.max() > tol * max(1.0, d.max()):
        i, j, k = np.unravel_index(int(excess.argmax()), excess.shape)
        raise ConstructionError(f"triangle inequality fails: d[{i},{k}] > d[{i},{j}] + d[{j},{k}]")
    return d


class FiniteFuzzyMetricSpace:
    """A finite point set ``0..n-1`` with a membership rule ``M(i, j, t)``.

    Subclasses implement ``membership_matrix(t)``; everything else is built
    on that.
    """

    kind = "abstract"
    stationary = False
    base_metric = None

    def __init__(self, n, tnorm):
        if n < 1:
            raise ConstructionError("a space needs at least one point")
        self.n = int(n)
        self.tnorm = TNorm.parse(tnorm)

    def membership_matrix(self, t):
        raise NotImplementedError

    def membership(self, i, j, t):
        return float(self.membership_matrix(t)[i, j])

    def __len__(self):
        return self.n

    def to_dict(self):
        raise TypeError(f"{type(self).__name__} is not serialisable")


class MkSpace(FiniteFuzzyMetricSpace):
    """``M(x, y, t) = 1 - min(d(x, y), k) / h(t)`` with the Lukasiewicz t-norm."""

    kind = "mk"

    def __init__(self, d, k, h, t_grid=None):
        d = validate_metric_matrix(d)
        super().__init__(d.shape[0], TNorm.LUKASIEWICZ)
        if not k > 0:
            raise ConstructionError("k must be positive")
        self.base_metric = d
        self.k = float(k)
        self.h = h
        for t in default_t_grid() if t_grid is None else t_grid:
            if not h(t) > self.k:
                raise ConstructionError(f"h({t}) = {h(t)} must exceed k = {self.k}")
        self._capped = np.minimum(d, self.k)

    def membership_matrix(self, t):
        ht = self.h(t)
        if not ht > self.k:
            raise InvalidMetricError(f"h({t}) = {ht} does not exceed k = {self.k}", witness=(None, None, t))
        return 1.0 - self._capped / ht

    def to_dict(self):
        return {"kind": "mk", "metric": self.base_metric.tolist(), "k": self.k, "h": self.h.to_dict()}


class ExpSpace(FiniteFuzzyMetricSpace):
    """Stationary ``M(x, y, t) = exp(-d(x, y))`` with the product t-norm."""

    kind = "exp"
    stationary = True

    def __init__(self, d):
        d = validate_metric_matrix(d)
        super().__init__(d.shape[0], TNorm.PRODUCT)
        self.base_metric = d
        self._m = np.exp(-d)

    def membership_matrix(self, t):
        _check_t(t)
        return self._m.copy()

    def derived_metric(self):
        """The classical metric ``1 - exp(-d)``."""
        return 1.0 - self._m

    def to_dict(self):
        return {"kind": "exp", "metric": self.base_metric.tolist()}


class EuclideanSpace(FiniteFuzzyMetricSpace):
    """Real-valued points under a Euclidean fuzzy metric."""

    kind = "euclidean"

    def __init__(self, coords, efm):
        coords = [float(c) for c in coords]
        super().__init__(len(coords), efm.tnorm)
        self.coords = coords
        self.efm = efm
        self.stationary = efm.g.constant is not None

    def membership_matrix(self, t):
        n = self.n
        m = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                m[i, j] = efm_eval(self.efm, self.coords[i], self.coords[j], t)
        return m

    def to_dict(self):
        return {"kind": "euclidean", "coords": self.coords, **self.efm.to_dict()}


class TabulatedSpace(FiniteFuzzyMetricSpace):
    """Membership given as matrices; ``M(., ., t)`` uses the last table with ``t_k <= t``.

    One table makes the space stationary. Tables are taken as-is: this is
    the way to feed arbitrary (possibly invalid) memberships to validators.
    """

    kind = "membership"

    def __init__(self, matrices, tnorm, t_knots=None):
        mats = [np.asarray(m, dtype=float) for m in matrices]
        if not mats:
            raise ConstructionError("at least one membership matrix is required")
        n = mats[0].shape[0]
        for m in mats:
            if m.shape != (n, n):
                raise ConstructionError("membership matrices must be square and of equal size")
        super().__init__(n, tnorm)
        if t_knots is None:
            if len(mats) != 1:
                raise ConstructionError("several tables need matching t knots")
            t_knots = [0.0]
        t_knots = [float(t) for t in t_knots]
        if len(t_knots) != len(mats) or any(b <= a for a, b in zip(t_knots, t_knots[1:])):
            raise ConstructionError("t knots must be strictly increasing, one per table")
        self.matrices = mats
        self.t_knots = t_knots
        self.stationary = len(mats) == 1

    def membership_matrix(self, t):
        t = _check_t(t)
        idx = max(int(np.searchsorted(self.t_knots, t, side="right")) - 1, 0)
        return self.matrices[idx].copy()

    def to_dict(self):
        return {
            "kind": "membership",
            "tnorm": self.tnorm.value,
            "t": self.t_knots,
            "matrices": [m.tolist() for m in self.matrices],
        }


def make_mk_space(d, k, h, t_grid=None):
    return MkSpace(d, k, h, t_grid)


def make_exp_space(d):
    return ExpSpace(d)


def validate_fuzzy_metric(space, t_grid=None, s_grid=None, tol=1e-9):
    """Check the GV axioms over all point triples and grid pairs ``(t, s)``.

    Checks: ``positivity`` (0 < M <= 1), ``identity`` (M = 1 iff i = j),
    ``symmetry``, ``triangle`` and ``monotone_t`` (non-decreasing in t).
    Each failing check carries one witness.
    """
    if space.n < 2:
        raise DomainError("validation needs at least two points")
    t_grid = sorted(default_t_grid() if t_grid is None else t_grid)
    s_grid = t_grid if s_grid is None else sorted(s_grid)
    mats = {t: space.membership_matrix(t) for t in set(t_grid) | set(s_grid)}
    off = ~np.eye(space.n, dtype=bool)
    rep = ValidationReport()

    checks = {"positivity": Check(True), "identity": Check(True), "symmetry": Check(True)}
    for t in t_grid:
        m = mats[t]
        if checks["positivity"].passed:
            bad = (m <= 0) | (m > 1 + tol)
            if bad.any():
                i, j = map(int, np.argwhere(bad)[0])
                checks["positivity"] = Check(False, float(abs(m[i, j])), {"i": i, "j": j, "t": t, "M": float(m[i, j])})
        if checks["identity"].passed:
            diag_err = np.abs(np.diag(m) - 1.0)
            if diag_err.max() > tol:
                i = int(diag_err.argmax())
                checks["identity"] = Check(False, float(diag_err[i]), {"i": i, "j": i, "t": t, "M": float(m[i, i])})
            elif np.any(m[off] >= 1.0):
                i, j = map(int, np.argwhere((m >= 1.0) & off)[0])
                checks["identity"] = Check(False, 0.0, {"i": i, "j": j, "t": t, "M": float(m[i, j])})
        if checks["symmetry"].passed:
            asym = np.abs(m - m.T)
            if asym.max() > tol:
                i, j = np.unravel_index(int(asym.argmax()), asym.shape)
                checks["symmetry"] = Check(
                    False, float(asym[i, j]), {"i": int(i), "j": int(j), "t": t, "M_ij": float(m[i, j]), "M_ji": float(m[j, i])}
                )
    rep.checks.update(checks)

    worst, witness = 0.0, None
    for t, s in itertools.product(t_grid, s_grid):
        # clipping keeps the t-norm in its domain; range errors are reported above
        a = np.clip(mats[t], 0.0, 1.0)
        b = np.clip(mats[s], 0.0, 1.0)
        c = space.membership_matrix(t + s)
        # rhs[i, j, k] = T(M(i, j, t), M(j, k, s)); compare with M(i, k, t + s)
        rhs = tnorm_apply(space.tnorm, a[:, :, None], b[None, :, :])
        gap = rhs - c[:, None, :]
        g = float(gap.max())
        if g > worst:
            worst = g
            i, j, k = map(int, np.unravel_index(int(gap.argmax()), gap.shape))
            witness = {"i": i, "j": j, "k": k, "t": t, "s": s}
    rep.checks["triangle"] = Check(worst <= tol, worst, witness if worst > tol else None)

    worst, witness = 0.0, None
    for t0, t1 in zip(t_grid, t_grid[1:]):
        drop = mats[t0] - mats[t1]
        g = float(drop.max())
        if g > worst:
            worst = g
            i, j = map(int, np.unravel_index(int(drop.argmax()), drop.shape))
            witness = {"i": i, "j": j, "t0": t0, "t1": t1}
    rep.checks["monotone_t"] = Check(worst <= tol, worst, witness if worst > tol else None)
    return rep


def space_from_dict(spec, base_dir=None, load_matrix=None):
    """Build a space from its config record. ``load_matrix`` resolves file paths."""
    kind = spec.get("kind")

    def matrix(value):
        if isinstance(value, str):
            if load_matrix is None:
                raise ConstructionError("matrix given as a path but no loader supplied")
            return load_matrix(value)
        return np.asarray(value, dtype=float)

    if kind == "mk":
        return MkSpace(matrix(spec["metric"]), float(spec["k"]), h_from_dict(spec.get("h", {})))
    if kind == "exp":
        return ExpSpace(matrix(spec["metric"]))
    if kind == "euclidean":
        return EuclideanSpace(spec["coords"], EuclideanFuzzyMetric.from_dict(spec))
    if kind == "membership":
        mats = spec.get("matrices")
        if mats is None:
            mats = [spec["matrix"]]
        return TabulatedSpace([matrix(m) for m in mats], spec.get("tnorm", "min"), spec.get("t"))
    raise ConstructionError(f"unknown space kind {kind!r}")
