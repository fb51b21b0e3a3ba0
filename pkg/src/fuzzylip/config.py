"""Run configuration (one JSON document) and CSV ingestion."""

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import monotone
from .errors import ConfigError, FuzzyLipError
from .extension import Dilation, SampledMap
from .fuzzy_metric import EuclideanFuzzyMetric, default_t_grid, space_from_dict

TOLERANCE_ENV = "FUZZYLIP_TOLERANCE"
DEFAULT_TOLERANCE = 1e-9


def default_tolerance():
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None:
        return DEFAULT_TOLERANCE
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{TOLERANCE_ENV}={raw!r} is not a number") from None


def _parse_float(text, path, line):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{path}:{line}: cannot parse {text!r} as a number") from None


def read_matrix_csv(path):
    """Square numeric matrix; a first row that is not numeric is taken as a header."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = [(n, r) for n, r in enumerate(csv.reader(fh), start=1) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    if rows:
        try:
            [float(c) for c in rows[0][1]]
        except ValueError:
            rows = rows[1:]
    data = [[_parse_float(c.strip(), path, n) for c in r] for n, r in rows]
    if not data:
        raise ConfigError(f"{path}: no matrix rows")
    width = len(data[0])
    for (n, _), r in zip(rows, data):
        if len(r) != width:
            raise ConfigError(f"{path}:{n}: expected {width} columns, got {len(r)}")
    if len(data) != width:
        raise ConfigError(f"{path}: matrix is {len(data)}x{width}, not square")
    return np.array(data)


def read_values_csv(path):
    """Rows ``point,t,value`` (or ``point,value`` for stationary maps).

    Returns a dict ``{point: {t: value}}`` with ``t = None`` when there is no
    t column.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            body = [(n, r) for n, r in enumerate(reader, start=2) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    if header is None:
        raise ConfigError(f"{path}: empty values file")
    cols = [c.strip().lower() for c in header]
    if cols not in (["point", "t", "value"], ["point", "value"]):
        raise ConfigError(f"{path}:1: header must be 'point,t,value' or 'point,value', got {','.join(header)!r}")
    has_t = len(cols) == 3
    out = {}
    for n, r in body:
        if len(r) != len(cols):
            raise ConfigError(f"{path}:{n}: expected {len(cols)} fields, got {len(r)}")
        try:
            point = int(r[0])
        except ValueError:
            raise ConfigError(f"{path}:{n}: point id {r[0]!r} is not an integer") from None
        t = _parse_float(r[1], path, n) if has_t else None
        value = _parse_float(r[-1], path, n)
        if point in out and t in out[point]:
            raise ConfigError(f"{path}:{n}: duplicate value for point {point}, t {t}")
        out.setdefault(point, {})[t] = value
    return out


@dataclass
class RunConfig:
    space: dict
    codomain: dict
    sample: Optional[dict] = None
    dilation: Any = "estimate"
    alpha: Any = 0.5
    queries: Optional[list] = None
    distance: str = "chain"
    validation: dict = field(default_factory=dict)
    base_dir: str = "."

    @classmethod
    def from_dict(cls, data, base_dir=None):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("space", "codomain"):
            if key not in data:
                raise ConfigError(f"config is missing '{key}'")
        data = dict(data)
        if base_dir is not None and "base_dir" not in data:
            data["base_dir"] = str(base_dir)
        cfg = cls(**data)
        cfg._check()
        return cfg

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
        return cls.from_dict(data, base_dir=path.parent.resolve())

    def to_dict(self):
        return asdict(self)

    def resolve(self, p):
        p = Path(p)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def _check(self):
        if self.distance not in ("chain", "rho"):
            raise ConfigError("distance must be 'chain' or 'rho'")
        for a in self._alpha_values():
            if not 0.0 <= a <= 1.0:
                raise ConfigError(f"alpha value {a} outside [0, 1]")
        for p in self._paths():
            if not self.resolve(p).is_file():
                raise ConfigError(f"{self.resolve(p)}: file not found")

    def _alpha_values(self):
        if isinstance(self.alpha, dict):
            return [float(a) for a in self.alpha.get("alpha", [])]
        return [float(self.alpha)]

    def _paths(self):
        if isinstance(self.space.get("metric"), str):
            yield self.space["metric"]
        for m in self.space.get("matrices", []) or []:
            if isinstance(m, str):
                yield m
        if self.sample and isinstance(self.sample.get("values"), str):
            yield self.sample["values"]

    # -- builders --------------------------------------------------------

    def build_space(self):
        try:
            return space_from_dict(self.space, load_matrix=lambda p: read_matrix_csv(self.resolve(p)))
        except ConfigError:
            raise
        except (FuzzyLipError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"space: {exc}") from None

    def build_codomain(self):
        try:
            return EuclideanFuzzyMetric.from_dict(self.codomain)
        except (FuzzyLipError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"codomain: {exc}") from None

    def build_sample(self, space):
        if not self.sample:
            raise ConfigError("config has no 'sample' section")
        spec = self.sample
        raw = spec.get("values")
        if isinstance(raw, str):
            table = read_values_csv(self.resolve(raw))
        elif isinstance(raw, dict):
            table = {int(p): {None: float(v)} for p, v in raw.items()}
        elif isinstance(raw, list):
            table = {}
            for row in raw:
                p, t, v = (row[0], None, row[1]) if len(row) == 2 else row
                table.setdefault(int(p), {})[None if t is None else float(t)] = float(v)
        else:
            raise ConfigError("sample.values must be a CSV path, a {point: value} object or a row list")
        subset = [int(s) for s in spec.get("subset", sorted(table))]
        if not subset:
            raise ConfigError("sample subset S is empty")
        if set(subset) != set(table):
            raise ConfigError(f"sample subset {sorted(subset)} does not match the points with values {sorted(table)}")
        bad = [s for s in subset if not 0 <= s < space.n]
        if bad:
            raise ConfigError(f"sample points {bad} out of range for {space.n} points")
        stationary = all(set(v) == {None} for v in table.values())
        try:
            if stationary:
                t_grid = [float(t) for t in spec.get("t_grid", [1.0])]
                return SampledMap.constant_in_t(subset, [table[s][None] for s in subset], t_grid)
            t_grid = sorted({t for v in table.values() for t in v if t is not None})
            if "t_grid" in spec and sorted(float(t) for t in spec["t_grid"]) != t_grid:
                raise ConfigError("sample.t_grid does not match the t values in the sample")
            vals = []
            for s in subset:
                if set(table[s]) != set(t_grid):
                    raise ConfigError(f"point {s} is not sampled on the full t-grid")
                vals.append([table[s][t] for t in t_grid])
            return SampledMap(tuple(subset), tuple(t_grid), np.array(vals))
        except ConfigError:
            raise
        except FuzzyLipError as exc:
            raise ConfigError(f"sample: {exc}") from None

    def build_dilation(self):
        d = self.dilation
        if d == "estimate":
            return None
        try:
            if isinstance(d, dict):
                return Dilation(table=dict(zip(d["t"], d["K"])))
            return Dilation(constant=float(d))
        except (FuzzyLipError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"dilation: {exc}") from None

    def build_alpha(self):
        a = self.alpha
        if isinstance(a, dict):
            table = {float(t): float(v) for t, v in zip(a["t"], a["alpha"])}

            def alpha(t):
                try:
                    return table[float(t)]
                except KeyError:
                    raise ConfigError(f"alpha not tabulated at t={t}") from None

            return alpha
        return float(a)

    def build_queries(self, space):
        q = list(range(space.n)) if self.queries is None else [int(x) for x in self.queries]
        bad = [x for x in q if not 0 <= x < space.n]
        if bad:
            raise ConfigError(f"query points {bad} out of range")
        return q

    def validation_grids(self, seed=0):
        v = self.validation or {}
        t_grid = [float(t) for t in v.get("t_grid", default_t_grid())]
        s_grid = [float(s) for s in v.get("s_grid", t_grid)]
        rng = np.random.default_rng(seed)
        distances = list(monotone.log_grid(200, 1e-6, 1e6, include_ends=False))
        distances += [float(x) for x in rng.exponential(1.0, int(v.get("random_distances", 50)))]
        if "distances" in v:
            distances = [float(x) for x in v["distances"]]
        galois = monotone.log_grid(int(v.get("galois_points", 1000)))
        if any(not (t > 0 and math.isfinite(t)) for t in t_grid + s_grid):
            raise ConfigError("validation grids must hold positive finite t values")
        return t_grid, s_grid, distances, galois
