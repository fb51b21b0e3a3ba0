"""Values in [0, +inf] represented as plain floats.

``math.inf`` plays the role of the distinguished top element. Python float
addition already saturates (``x + inf == inf``), so only the checks that
floats do not give for free live here: rejecting negatives and NaN, and
refusing to form ``0 * inf``.
"""

import math

from .errors import DomainError, NumericError

INF = math.inf


def as_ext(x):
    """Validate and return ``x`` as an extended non-negative float."""
    x = float(x)
    if math.isnan(x) or x < 0:
        raise DomainError(f"expected a value in [0, +inf], got {x!r}")
    return x


def ext_add(a, b):
    return as_ext(a) + as_ext(b)


def ext_mul(a, b):
    a, b = as_ext(a), as_ext(b)
    if (a == 0 and b == INF) or (a == INF and b == 0):
        raise NumericError("0 * inf is undefined")
    return a * b


def is_finite(x):
    return x != INF


def to_json(x):
    """JSON has no infinity literal; encode +inf as the string ``"inf"``."""
    return "inf" if x == INF else x


def from_json(x):
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "+inf", "infinity", "+infinity"):
            return INF
        raise DomainError(f"cannot parse extended value {x!r}")
    return as_ext(x)
