"""Continuous t-norms on the unit interval.

Only the three basic continuous t-norms are provided. Each one is
vectorised: ``apply`` accepts floats or numpy arrays.
"""

import enum
import itertools

import numpy as np

from .errors import DomainError


class TNorm(str, enum.Enum):
    MINIMUM = "min"
    PRODUCT = "prod"
    LUKASIEWICZ = "luk"

    @classmethod
    def parse(cls, tag):
        if isinstance(tag, cls):
            return tag
        aliases = {
            "min": cls.MINIMUM,
            "minimum": cls.MINIMUM,
            "prod": cls.PRODUCT,
            "product": cls.PRODUCT,
            "luk": cls.LUKASIEWICZ,
            "lukasiewicz": cls.LUKASIEWICZ,
        }
        try:
            return aliases[str(tag).lower()]
        except KeyError:
            raise DomainError(f"unknown t-norm {tag!r}") from None

    def apply(self, a, b):
        return tnorm_apply(self, a, b)

    def __call__(self, a, b):
        return tnorm_apply(self, a, b)


def _check_unit(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")


def tnorm_apply(t, a, b):
    """Evaluate the t-norm ``t`` at ``(a, b)``; scalars in give a float out."""
    t = TNorm.parse(t)
    _check_unit(a, "a")
    _check_unit(b, "b")
    if t is TNorm.MINIMUM:
        out = np.minimum(a, b)
    elif t is TNorm.PRODUCT:
        out = np.multiply(a, b)
    else:
        out = np.maximum(np.add(a, b) - 1.0, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def unit_grid(steps=100):
    """Rational grid ``{0, 1/steps, ..., 1}``."""
    return np.arange(steps + 1) / steps


def tnorm_dominates(t1, t2, grid, tol=1e-12):
    """True iff ``t1(a, b) >= t2(a, b) - tol`` for every pair in ``grid``.

    A ``False`` answer is a certified refutation; ``True`` only certifies the
    sampled pairs. ``tol`` absorbs rounding in ``a + b - 1``.
    """
    pairs = np.asarray(list(grid), dtype=float)
    if pairs.size == 0:
        raise DomainError("grid must be non-empty")
    a, b = pairs[:, 0], pairs[:, 1]
    return bool(np.all(tnorm_apply(t1, a, b) >= tnorm_apply(t2, a, b) - tol))


def grid_pairs(steps=100):
    g = unit_grid(steps)
    return list(itertools.product(g, g))


def check_tnorm_axioms(t, steps=100, tol=1e-12):
    """Check boundary, commutativity, associativity and monotonicity on a grid.

    Returns a dict mapping axiom name to ``(passed, worst_violation)``.
    """
    g = unit_grid(steps)
    a, b = np.meshgrid(g, g, indexing="ij")
    ab = tnorm_apply(t, a, b)
    out = {}
    out["range"] = (bool(np.all((ab >= 0) & (ab <= 1))), 0.0)
    ident = np.abs(tnorm_apply(t, g, np.ones_like(g)) - g)
    out["identity"] = (bool(ident.max() <= tol), float(ident.max()))
    comm = np.abs(ab - ab.T)
    out["commutativity"] = (bool(comm.max() <= tol), float(comm.max()))
    # associativity on a coarser cube keeps memory at O(steps^3 / 8)
    c = g[:: max(1, steps // 50)]
    x, y, z = np.meshgrid(c, c, c, indexing="ij")
    lhs = tnorm_apply(t, x, tnorm_apply(t, y, z))
    rhs = tnorm_apply(t, tnorm_apply(t, x, y), z)
    assoc = np.abs(lhs - rhs)
    out["associativity"] = (bool(assoc.max() <= tol), float(assoc.max()))
    # rows of ab are indexed by a; non-decreasing down each column
    mono = np.diff(ab, axis=0).min()
    out["monotonicity"] = (bool(mono >= -tol), float(max(0.0, -mono)))
    return out
