"""McShane and Whitney extensions of fuzzy Lipschitz maps.

A sampled map ``f(s, t)`` on a subset ``S`` of a finite fuzzy metric space
``(X, M, *)`` with values in ``(R, N_{phi,g})`` is fuzzy Lipschitz when

    phi(|f(x, t) - f(y, t)|) * g(t) = 1 - N(f(x, t), f(y, t), t) <= K(t) * (1 - M(x, y, t)).

With ``phi_star`` the right adjoint of ``phi`` this gives the classical bound
``|f(x, t) - f(y, t)| <= rho_t(x, y)`` where

    rho_t(x, y) = phi_star(K(t) / g(t) * (1 - M(x, y, t))),

and the extensions are ``sup_s f(s, t) - D(x, s)`` (McShane) and
``inf_s f(s, t) + D(x, s)`` (Whitney) for a distance ``D`` on ``X``.  ``D`` is
either ``rho_t`` itself or the chain pseudometric ``d_t``, the largest
pseudometric below ``rho_t``.

Chains and simple paths: edge costs are non-negative, so removing a cycle
from a chain never increases its cost. The infimum over chains of any
length is therefore a minimum over simple paths, which is what an
all-pairs shortest-path pass over the complete graph computes.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import (
    DomainError,
    ExtensionUndefinedError,
    HypothesisError,
    NonLipschitzError,
    NumericError,
)
from .extended import INF, to_json
from .fuzzy_metric import Check, validate_metric_matrix

DEGENERATE_FLOOR = 1e-12
VERIFY_TOL = 1e-9
_MAX_NUDGE = 4096


def fmt(x):
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")


# -- data ---------------------------------------------------------------------


class Dilation:
    """``K(t)``: a constant, a table on a t-grid, or a callable."""

    def __init__(self, constant=None, table=None, fn=None):
        if sum(v is not None for v in (constant, table, fn)) != 1:
            raise DomainError("dilation needs exactly one of constant / table / fn")
        if constant is not None and not constant > 0:
            raise DomainError(f"dilation must be positive, got {constant!r}")
        if table is not None:
            table = {float(t): float(k) for t, k in table.items()}
            if any(not k > 0 for k in table.values()):
                raise DomainError("tabulated dilation must be positive")
        self.constant = None if constant is None else float(constant)
        self.table = table
        self.fn = fn

    def __call__(self, t):
        if self.constant is not None:
            return self.constant
        if self.table is not None:
            try:
                return self.table[float(t)]
            except KeyError:
                raise DomainError(f"dilation not tabulated at t={t!r}") from None
        k = float(self.fn(t))
        if not k > 0:
            raise DomainError(f"dilation must be positive, K({t}) = {k}")
        return k

    def to_dict(self):
        if self.constant is not None:
            return {"kind": "constant", "value": self.constant}
        if self.table is not None:
            return {"kind": "table", "t": list(self.table), "K": list(self.table.values())}
        raise TypeError("callable dilation is not serialisable")

    def __repr__(self):
        if self.constant is not None:
            return f"Dilation(constant={self.constant!r})"
        if self.table is not None:
            return f"Dilation(table={self.table!r})"
        return f"Dilation(fn={self.fn!r})"


def as_dilation(K):
    if isinstance(K, Dilation):
        return K
    if callable(K):
        return Dilation(fn=K)
    return Dilation(constant=float(K))


@dataclass
class SampledMap:
    """Values ``f(s, t)`` for ``s`` in ``subset`` and ``t`` in ``t_grid``.

    ``values`` has shape ``(len(subset), len(t_grid))``. A stationary map
    ignores ``t`` and answers every query from its first column.
    """

    subset: tuple
    t_grid: tuple
    values: np.ndarray
    stationary: bool = False

    def __post_init__(self):
        self.subset = tuple(int(s) for s in self.subset)
        self.t_grid = tuple(float(t) for t in self.t_grid)
        self.values = np.asarray(self.values, dtype=float).reshape(len(self.subset), len(self.t_grid))
        if not self.subset:
            raise DomainError("subset S must be non-empty")
        if len(set(self.subset)) != len(self.subset):
            raise DomainError("subset S contains duplicates")
        if not self.t_grid or any(not t > 0 for t in self.t_grid):
            raise DomainError("t-grid must be non-empty and positive")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("sample values must be finite")
        self._pos = {s: i for i, s in enumerate(self.subset)}
        self._tpos = {t: i for i, t in enumerate(self.t_grid)}

    @classmethod
    def constant_in_t(cls, subset, values, t_grid=(1.0,)):
        vals = np.repeat(np.asarray(values, dtype=float)[:, None], len(t_grid), axis=1)
        return cls(tuple(subset), tuple(t_grid), vals, stationary=True)

    def column(self, t):
        if self.stationary:
            return self.values[:, 0]
        try:
            return self.values[:, self._tpos[float(t)]]
        except KeyError:
            raise DomainError(f"map not sampled at t={t!r}") from None

    def value(self, point, t):
        return float(self.column(t)[self._pos[point]])

    def check_space(self, space):
        bad = [s for s in self.subset if not 0 <= s < space.n]
        if bad:
            raise DomainError(f"subset indices {bad} out of range for a space of {space.n} points")


# -- dilation -------------------------------------------------------------------


def _one_minus(space, t):
    return 1.0 - space.membership_matrix(t)


def _adjoint_arg(K_t, g_t, one_minus_m):
    return (K_t / g_t) * one_minus_m


@dataclass
class DilationEstimate:
    K: float
    infimum: float
    degenerate: bool
    pair: Optional[tuple]
    nudges: int = 0


def estimate_dilation(space, codomain, f, t, floor=DEGENERATE_FLOOR):
    """Smallest constant making ``f(., t)`` fuzzy Lipschitz on ``S``.

    The exact ratio maximum is reported as ``infimum``. The returned ``K`` is
    then raised by as many ulps as needed for the Lipschitz inequality and
    ``|f(x) - f(y)| <= rho_t(x, y)`` to hold under floating-point evaluation.
    A constant map yields ``floor`` with ``degenerate`` set.
    """
    f.check_space(space)
    om = _one_minus(space, t)
    g_t = codomain.g(t)
    vals = f.column(t)
    S = f.subset
    pairs = []
    best, arg = 0.0, None
    for a in range(len(S)):
        for b in range(a + 1, len(S)):
            diff = abs(vals[a] - vals[b])
            num = codomain.phi(diff) * g_t
            den = om[S[a], S[b]]
            if den <= 0.0:
                if num > 0.0:
                    raise NonLipschitzError(
                        f"M({S[a]},{S[b]},{t}) = 1 but the values differ", pair=(S[a], S[b])
                    )
                continue
            pairs.append((a, b, num, den))
            r = num / den
            if r > best:
                best, arg = float(r), (S[a], S[b])
    if best == 0.0:
        return DilationEstimate(floor, 0.0, True, None)

    def holds(K):
        for a, b, num, den in pairs:
            if num > K * den:
                return False
            rho = codomain.phi.right_adjoint(_adjoint_arg(K, g_t, den))
            if rho != INF and abs(Fraction(vals[a]) - Fraction(vals[b])) > Fraction(rho):
                return False
        return True

    K = best
    for nudges in range(_MAX_NUDGE):
        if holds(K):
            return DilationEstimate(float(K), float(best), False, arg, nudges)
        K = math.nextafter(K, INF)
    raise NumericError(f"could not settle a dilation near {best!r} at t={t!r}")


def estimate_dilation_table(space, codomain, f, t_grid=None):
    t_grid = f.t_grid if t_grid is None else t_grid
    estimates = {float(t): estimate_dilation(space, codomain, f, t) for t in t_grid}
    return Dilation(table={t: e.K for t, e in estimates.items()}), estimates


# -- hypothesis, rho, d_t -------------------------------------------------------


@dataclass
class HypothesisReport:
    passed: bool
    t: float
    bound: float
    worst: float
    margin: float
    pair: Optional[tuple]
    violations: int

    def to_dict(self):
        return {
            "passed": self.passed,
            "t": self.t,
            "bound": to_json(self.bound),
            "worst": self.worst,
            "margin": to_json(self.margin),
            "pair": list(self.pair) if self.pair else None,
            "violations": self.violations,
        }


def check_hypothesis(space, codomain, K, t):
    """``K(t) / g(t) * (1 - M(x, y, t)) < sup phi`` for every pair of ``X``."""
    K = as_dilation(K)
    bound = codomain.phi.sup_value
    if space.n < 2:
        return HypothesisReport(True, t, bound, 0.0, bound, None, 0)
    args = _adjoint_arg(K(t), codomain.g(t), _one_minus(space, t))
    iu = np.triu_indices(space.n, 1)
    upper = args[iu]
    k = int(upper.argmax())
    worst = float(upper[k])
    pair = (int(iu[0][k]), int(iu[1][k]))
    violations = int(np.count_nonzero(upper >= bound))
    margin = bound - worst
    return HypothesisReport(violations == 0, t, bound, worst, margin, pair, violations)


def rho_t(space, codomain, K, t, i, j):
    K = as_dilation(K)
    om = 1.0 - space.membership(i, j, t)
    return codomain.phi.right_adjoint(_adjoint_arg(K(t), codomain.g(t), om))


def rho_matrix(space, codomain, K, t):
    K = as_dilation(K)
    args = _adjoint_arg(K(t), codomain.g(t), _one_minus(space, t))
    n = space.n
    out = np.empty((n, n))
    adj = codomain.phi.right_adjoint
    for i in range(n):
        out[i, i] = adj(max(args[i, i], 0.0))
        for j in range(i + 1, n):
            out[i, j] = adj(max(args[i, j], 0.0))
            out[j, i] = out[i, j] if args[i, j] == args[j, i] else adj(max(args[j, i], 0.0))
    return out


def shortest_chains(weights):
    """All-pairs minimal chain cost over a complete graph, computed exactly.

    Finite float weights are dyadic rationals; they are rescaled to integers
    sharing one power-of-two denominator, relaxed exactly, and each result is
    rounded once at the end. The output is therefore the correctly rounded
    infimum, independent of relaxation order. ``inf`` marks a missing edge.
    """
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    if w.shape != (n, n):
        raise DomainError("weights must be a square matrix")
    if np.any(np.isnan(w)) or np.any(w < 0):
        raise DomainError("weights must lie in [0, +inf]")
    finite = [float(v) for v in w.ravel() if v != INF]
    denom = max((v.as_integer_ratio()[1] for v in finite), default=1)
    d = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            v = w[i, j]
            if v != INF:
                p, q = float(v).as_integer_ratio()
                d[i][j] = p * (denom // q)
        d[i][i] = 0
    for k in range(n):
        row_k = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik is None:
                continue
            row_i = d[i]
            for j in range(n):
                dkj = row_k[j]
                if dkj is None:
                    continue
                s = dik + dkj
                cur = row_i[j]
                if cur is None or s < cur:
                    row_i[j] = s
    return np.array([[INF if v is None else v / denom for v in row] for row in d])


def chain_pseudometric(space, codomain, K, t):
    return shortest_chains(rho_matrix(space, codomain, K, t))


def is_metric(dist, tol=1e-12):
    """Numerical metric check of a finite distance matrix; ``inf`` entries fail."""
    d = np.asarray(dist, dtype=float)
    n = d.shape[0]
    if not np.all(np.isfinite(d)):
        i, j = map(int, np.argwhere(~np.isfinite(d))[0])
        return Check(False, INF, {"reason": "infinite", "i": i, "j": j})
    try:
        validate_metric_matrix(d, tol=tol)
    except Exception as exc:  # ConstructionError carries the reason
        return Check(False, 0.0, {"reason": str(exc)})
    off = d[~np.eye(n, dtype=bool)]
    if off.size and off.min() <= 0:
        return Check(False, 0.0, {"reason": "zero distance between distinct points"})
    return Check(True)


# -- extension operators ----------------------------------------------------------


def _distance_accessor(rho):
    if callable(rho):
        return rho
    mat = np.asarray(rho, dtype=float)
    return lambda x, s: float(mat[x, s])


def mcshane_extend(f, rho, query, t):
    """``sup_s f(s, t) - rho(query, s)``, skipping infinite distances."""
    rho = _distance_accessor(rho)
    best, seen = -INF, False
    for s, v in zip(f.subset, f.column(t)):
        r = rho(query, s)
        if r == INF:
            continue
        seen = True
        best = max(best, v - r)
    if not seen:
        raise ExtensionUndefinedError(f"every distance from point {query} to S is infinite", query=query)
    return float(best)


def whitney_extend(f, rho, query, t):
    """``inf_s f(s, t) + rho(query, s)``, skipping infinite distances."""
    rho = _distance_accessor(rho)
    best, seen = INF, False
    for s, v in zip(f.subset, f.column(t)):
        r = rho(query, s)
        if r == INF:
            continue
        seen = True
        best = min(best, v + r)
    if not seen:
        raise ExtensionUndefinedError(f"every distance from point {query} to S is infinite", query=query)
    return float(best)


def alpha_value(alpha, t):
    a = float(alpha(t)) if callable(alpha) else float(alpha)
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"alpha({t}) = {a} is outside [0, 1]")
    return a


def blend(alpha, fM, fW, t):
    return _mix(alpha_value(alpha, t), fM, fW)


def _mix(a, fM, fW):
    # written as fW + a (fM - fW) so that equal endpoints come back unchanged,
    # which keeps the blend exact on S
    if a == 1.0:
        return fM
    return fW + a * (fM - fW)


@dataclass
class ExtensionResult:
    t_grid: tuple
    subset: tuple
    f_M: np.ndarray  # shape (n, len(t_grid))
    f_W: np.ndarray
    f_alpha: np.ndarray
    alpha: tuple
    distance: str
    diagnostics: list = field(default_factory=list)
    verification: Optional["LipschitzReport"] = None

    @property
    def n(self):
        return self.f_M.shape[0]

    def series(self):
        return {"f_M": self.f_M, "f_W": self.f_W, "f_alpha": self.f_alpha}

    def rows(self, queries=None):
        queries = range(self.n) if queries is None else queries
        for x in queries:
            for k, t in enumerate(self.t_grid):
                yield x, t, self.f_M[x, k], self.f_W[x, k], self.f_alpha[x, k]

    def to_csv(self, stream=None, queries=None):
        """Write ``point,t,f_M,f_W,f_alpha`` rows; returns the text if no stream."""
        own = stream is None
        stream = io.StringIO() if own else stream
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["point", "t", "f_M", "f_W", "f_alpha"])
        for x, t, m, wv, a in self.rows(queries):
            w.writerow([x, fmt(t), fmt(m), fmt(wv), fmt(a)])
        return stream.getvalue() if own else None

    def to_dict(self, queries=None):
        return {
            "distance": self.distance,
            "t_grid": list(self.t_grid),
            "subset": list(self.subset),
            "alpha": list(self.alpha),
            "diagnostics": self.diagnostics,
            "verification": self.verification.to_dict() if self.verification else None,
            "rows": [
                {"point": x, "t": t, "f_M": m, "f_W": wv, "f_alpha": a} for x, t, m, wv, a in self.rows(queries)
            ],
        }


def extend(space, codomain, f, K, alpha=0.5, t_grid=None, distance="chain", tol=VERIFY_TOL):
    """Extend ``f`` to every point of ``space`` on ``t_grid`` and verify the result.

    ``distance="chain"`` uses the chain pseudometric ``d_t``; ``"rho"`` uses
    ``rho_t`` directly, which is only sound when ``rho_t`` is a metric.
    Raises ``HypothesisError`` when some pair violates the boundedness
    hypothesis and ``ExtensionUndefinedError`` when a point has no finite
    distance to ``S``.
    """
    if distance not in ("chain", "rho"):
        raise DomainError(f"distance must be 'chain' or 'rho', got {distance!r}")
    f.check_space(space)
    K = as_dilation(K)
    t_grid = tuple(float(t) for t in (f.t_grid if t_grid is None else t_grid))
    n, S = space.n, list(f.subset)
    shape = (n, len(t_grid))
    fM, fW, fA = np.empty(shape), np.empty(shape), np.empty(shape)
    alphas, diags = [], []
    for k, t in enumerate(t_grid):
        hyp = check_hypothesis(space, codomain, K, t)
        if not hyp.passed:
            raise HypothesisError(
                f"hypothesis fails at t={t}: pair {hyp.pair} gives {hyp.worst!r} >= {hyp.bound!r}",
                pair=hyp.pair,
                margin=hyp.margin,
            )
        rho = rho_matrix(space, codomain, K, t)
        D = shortest_chains(rho) if distance == "chain" else rho
        vals = f.column(t)
        DS = D[:, S]
        lo = np.max(vals[None, :] - DS, axis=1)
        hi = np.min(vals[None, :] + DS, axis=1)
        undefined = np.flatnonzero(np.all(DS == INF, axis=1))
        if undefined.size:
            raise ExtensionUndefinedError(
                f"points {undefined.tolist()} have no finite distance to S at t={t}", query=undefined.tolist()
            )
        a = alpha_value(alpha, t)
        fM[:, k], fW[:, k] = lo, hi
        fA[:, k] = _mix(a, lo, hi)
        alphas.append(a)
        iu = np.triu_indices(n, 1)
        diags.append(
            {
                "t": t,
                "K": K(t),
                "hypothesis": hyp.to_dict(),
                "rho_infinite": int(np.count_nonzero(rho[iu] == INF)),
                "rho_is_metric": is_metric(rho).to_dict(),
                "agrees_on_S": bool(np.array_equal(lo[S], vals) and np.array_equal(hi[S], vals)),
                "achieved_K": {
                    name: achieved_dilation(space, codomain, col, t) for name, col in (("f_M", lo), ("f_W", hi))
                },
            }
        )
    result = ExtensionResult(t_grid, tuple(S), fM, fW, fA, tuple(alphas), distance, diags)
    result.verification = verify_fuzzy_lipschitz(space, codomain, result, K, t_grid, tol)
    return result


# -- verification -----------------------------------------------------------------


def _lipschitz_terms(space, codomain, col, t, K_t):
    """``(lhs, rhs)`` matrices of ``phi(|dx|) g(t) <= K(t) (1 - M)``."""
    diff = np.abs(col[:, None] - col[None, :])
    phi = np.vectorize(codomain.phi, otypes=[float])
    lhs = phi(diff) * codomain.g(t)
    rhs = K_t * _one_minus(space, t)
    return lhs, rhs


def achieved_dilation(space, codomain, col, t):
    """Smallest ``K`` for which ``col`` is fuzzy Lipschitz at ``t`` (``inf`` if none)."""
    lhs, rhs = _lipschitz_terms(space, codomain, np.asarray(col, dtype=float), t, 1.0)
    off = ~np.eye(space.n, dtype=bool)
    best = 0.0
    for l, r in zip(lhs[off], rhs[off]):
        if r <= 0:
            if l > 0:
                return "inf"
            continue
        best = max(best, l / r)
    return best


@dataclass
class LipschitzReport:
    passed: bool
    worst_slack: float
    witness: Optional[dict]
    checked: int

    def to_dict(self):
        return {"passed": self.passed, "worst_slack": self.worst_slack, "witness": self.witness, "checked": self.checked}


def verify_fuzzy_lipschitz(space, codomain, extended, K, t_grid=None, tol=VERIFY_TOL):
    """Check ``1 - N(F(x), F(y), t) <= K(t)(1 - M(x, y, t)) + tol`` over all pairs.

    Every series of ``extended`` (McShane, Whitney, blend) is checked at each
    t. Slack is ``rhs - lhs``; the smallest one is reported.
    """
    K = as_dilation(K)
    t_grid = extended.t_grid if t_grid is None else tuple(t_grid)
    worst, witness, checked = INF, None, 0
    iu = np.triu_indices(space.n, 1)
    for t in t_grid:
        k = extended.t_grid.index(float(t))
        for name, arr in extended.series().items():
            lhs, rhs = _lipschitz_terms(space, codomain, arr[:, k], t, K(t))
            slack = (rhs - lhs)[iu]
            checked += slack.size
            if slack.size == 0:
                continue
            m = int(slack.argmin())
            if slack[m] < worst:
                worst = float(slack[m])
                i, j = int(iu[0][m]), int(iu[1][m])
                witness = {"series": name, "i": i, "j": j, "t": t, "lhs": float(lhs[i, j]), "rhs": float(rhs[i, j])}
    passed = worst >= -tol
    return LipschitzReport(passed, worst if worst != INF else 0.0, None if passed else witness, checked)


# -- closed forms for the two preset pipelines ---------------------------------------


def example1_closed_form(d, k, Q, f, query, t):
    """Extensions for ``M_k`` into ``N_E``: moduli ``2 Q(t) min(d(s, x), k)``.

    Requires ``Q(t) * min(d(s, x), k) < 1/2`` for every ``s``.
    """
    d = np.asarray(d, dtype=float)
    q = float(Q(t)) if callable(Q) else float(Q)
    lo, hi = -INF, INF
    for s, v in zip(f.subset, f.column(t)):
        m = min(d[s, query], k)
        if not q * m < 0.5:
            raise HypothesisError(f"Q(t) * min(d, k) = {q * m} >= 1/2 at s={s}", pair=(query, s), margin=0.5 - q * m)
        mod = 2.0 * q * m
        lo = max(lo, v - mod)
        hi = min(hi, v + mod)
    return float(lo), float(hi)


def example2_closed_form(d, K, f, query, t):
    """Extensions for ``exp(-d)`` into ``N_E``: moduli ``2 K(t) (1 - exp(-d(s, x)))``."""
    d = np.asarray(d, dtype=float)
    k_t = float(K(t)) if callable(K) else float(K)
    if not 0.0 < k_t < 0.5:
        raise HypothesisError(f"K(t) = {k_t} must lie in (0, 1/2)", margin=0.5 - k_t)
    lo, hi = -INF, INF
    for s, v in zip(f.subset, f.column(t)):
        mod = 2.0 * k_t * (1.0 - math.exp(-d[s, query]))
        lo = max(lo, v - mod)
        hi = min(hi, v + mod)
    return float(lo), float(hi)
