"""Acceptance suite: one test (or group of tests) per numbered criterion.

The terminal summary prints a ``criterion N: PASS|FAIL`` line for each
number, collected by the hook in ``conftest.py``.
"""

import json
import shutil
import time
from pathlib import Path

import numpy as np
import pytest

from fuzzylip import (
    INF,
    Clamp,
    Dilation,
    Linear,
    PiecewiseLinear,
    RationalSaturating,
    check_galois,
    example1_closed_form,
    example2_closed_form,
    extend,

    n_e,
    rho_matrix,
    shortest_chains,
    verify_fuzzy_lipschitz,
)
from fuzzylip.monotone import log_grid
from fuzzylip.cli import EXIT_OK, EXIT_VALIDATION, cmd_extend, cmd_validate
from fuzzylip.config import RunConfig
from fuzzylip.extension import check_hypothesis, estimate_dilation_table

from instances import brute_force_chains, example1_instance, example2_instance

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SEED = 20261019


def random_piecewise(rng):
    xs = np.concatenate([[0.0], np.sort(rng.uniform(0.0, 10.0, 4))])
    ys = np.concatenate([[0.0], np.sort(rng.uniform(0.0, 1.0, 4))])
    return PiecewiseLinear(tuple(zip(xs.tolist(), ys.tolist())), tail_slope=float(rng.choice([0.0, rng.uniform(0, 1)])))


# -- 1 ----------------------------------------------------------------------------


@pytest.mark.criterion(1, "Galois laws on 1000 log-spaced points, < 1 s")
def test_galois_suite():
    rng = np.random.default_rng(SEED)
    phis = [Clamp(2.0, 1.0), Linear(0.7), RationalSaturating()] + [random_piecewise(rng) for _ in range(3)]
    grid = log_grid(1000)
    start = time.perf_counter()
    reports = [check_galois(phi, grid, tol=1e-9) for phi in phis]
    elapsed = time.perf_counter() - start
    for phi, rep in zip(phis, reports):
        assert rep.upper_law_applicable, phi
        assert rep.passed, (phi, rep.to_dict())
        assert all(x <= v for x, v, _ in rep.lower_law)
    assert elapsed < 1.0, elapsed


# -- 2 ----------------------------------------------------------------------------


@pytest.mark.criterion(2, "right adjoint of the clamped codomain is 2y below 1/2, inf above")
@pytest.mark.parametrize("phi", [Clamp(2.0, 1.0), PiecewiseLinear(((0.0, 0.0), (1.0, 0.5)))], ids=["clamp", "piecewise"])
def test_clamped_codomain_adjoint(phi):
    for y in (0.0, 0.1, 0.25, 0.49):
        assert phi.right_adjoint(y) == 2.0 * y
    for y in (0.5, 0.6, 10.0):
        assert phi.right_adjoint(y) == INF


# -- 3 ----------------------------------------------------------------------------


@pytest.mark.criterion(3, "chain pseudometric equals simple-chain enumeration, < 10 s")
def test_chain_oracle():
    rng = np.random.default_rng(SEED + 3)
    start = time.perf_counter()
    n_inf = 0
    for _ in range(50):
        inst = example1_instance(rng, n=int(rng.integers(3, 8)))
        K = float(rng.uniform(0.1, 3.0))
        t = inst.f.t_grid[0]
        w = rho_matrix(inst.space, inst.codomain, K, t)
        n_inf += int(np.isinf(w).sum())
        assert np.array_equal(shortest_chains(w), brute_force_chains(w))
    assert n_inf > 0, "no infinite weights were drawn"
    assert time.perf_counter() - start < 10.0


# -- 4 and 5 ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def extension_runs():
    rng = np.random.default_rng(SEED + 4)
    start = time.perf_counter()
    runs = []
    for i in range(100):
        inst = example1_instance(rng) if i % 2 == 0 else example2_instance(rng)
        K, estimates = estimate_dilation_table(inst.space, inst.codomain, inst.f)
        res = extend(inst.space, inst.codomain, inst.f, K)
        runs.append((inst, K, estimates, res))
    return runs, time.perf_counter() - start


@pytest.mark.criterion(4, "100 random instances are fuzzy Lipschitz at 1e-9, < 30 s")
def test_random_instances_are_fuzzy_lipschitz(extension_runs):
    runs, elapsed = extension_runs
    start = time.perf_counter()
    for inst, K, estimates, res in runs:
        assert 2 <= len(inst.f.subset) <= inst.n - 1 and inst.n <= 8
        for t, est in estimates.items():
            assert est.K < 0.5
            assert check_hypothesis(inst.space, inst.codomain, K, t).passed
        rep = verify_fuzzy_lipschitz(inst.space, inst.codomain, res, K, tol=1e-9)
        assert rep.passed, rep.witness
        assert rep.checked > 0
    assert elapsed + time.perf_counter() - start < 30.0
    assert {inst.kind for inst, *_ in runs} == {"example1", "example2"}


@pytest.mark.criterion(5, "exact agreement on S and f^M <= f^W + 1e-12")
def test_agreement_and_sandwich(extension_runs):
    runs, _ = extension_runs
    for inst, _, _, res in runs:
        S = list(inst.f.subset)
        for k, t in enumerate(res.t_grid):
            col = inst.f.column(t)
            assert np.array_equal(res.f_M[S, k], col)
            assert np.array_equal(res.f_W[S, k], col)
            assert np.all(res.f_M[:, k] <= res.f_W[:, k] + 1e-12)


# -- 6 ----------------------------------------------------------------------------


def _closed_form_gap(inst, K, closed):
    res = extend(inst.space, inst.codomain, inst.f, Dilation(constant=K))
    gap = 0.0
    for k, t in enumerate(res.t_grid):
        for x in range(inst.n):
            lo, hi = closed(x, t)
            gap = max(gap, abs(lo - res.f_M[x, k]), abs(hi - res.f_W[x, k]))
    return gap


@pytest.mark.criterion(6, "closed forms match the generic pipeline within 1e-12, < 10 s")
def test_closed_forms():
    rng = np.random.default_rng(SEED + 6)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        inst = example1_instance(rng)
        K = inst.K0
        worst = max(worst, _closed_form_gap(inst, K, lambda x, t: example1_closed_form(inst.d, inst.k, K / inst.h(t), inst.f, x, t)))
    for _ in range(100):
        inst = example2_instance(rng)
        K = inst.K0
        worst = max(worst, _closed_form_gap(inst, K, lambda x, t: example2_closed_form(inst.d, K, inst.f, x, t)))
    assert worst <= 1e-12, worst
    assert time.perf_counter() - start < 10.0


# -- 7 ----------------------------------------------------------------------------

GOOD_SPACE = {"kind": "exp", "metric": [[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]]}
GOOD_CODOMAIN = {"phi": {"kind": "clamp", "scale": 2, "cap": 1}, "g": 1, "tnorm": "luk"}

CODOMAIN_CASES = {
    "phi_zero": {"phi": {"kind": "piecewise", "breakpoints": [[0, 0.1], [1, 0.5]]}, "g": 1, "tnorm": "luk"},
    "phi_bounded": {"phi": {"kind": "linear", "slope": 1.0}, "g": 1, "tnorm": "luk"},
    "g_bound": {"phi": {"kind": "clamp", "scale": 1, "cap": 1}, "g": 2, "tnorm": "luk"},
}

_I = [[1.0, 0.6, 0.6], [0.6, 1.0, 0.6], [0.6, 0.6, 1.0]]
AXIOM_CASES = {
    "positivity": {"kind": "membership", "tnorm": "min", "matrices": [[[1, 0, 0.5], [0, 1, 0.5], [0.5, 0.5, 1]]]},
    "identity": {"kind": "membership", "tnorm": "min", "matrices": [[[1, 1, 0.5], [1, 1, 0.5], [0.5, 0.5, 1]]]},
    "symmetry": {"kind": "membership", "tnorm": "min", "matrices": [[[1, 0.9, 0.5], [0.8, 1, 0.5], [0.5, 0.5, 1]]]},
    "triangle": {"kind": "membership", "tnorm": "min", "matrices": [[[1, 0.9, 0.2], [0.9, 1, 0.9], [0.2, 0.9, 1]]]},
    "monotone_t": {"kind": "membership", "tnorm": "prod", "t": [0, 1], "matrices": [_I, [[1, 0.5, 0.5], [0.5, 1, 0.5], [0.5, 0.5, 1]]]},
}


def _validate(space, codomain):
    cfg = RunConfig.from_dict({"space": space, "codomain": codomain})
    return cmd_validate(cfg, tol=1e-9, seed=0)


@pytest.mark.criterion(7, "each codomain condition and each axiom refuted with a witness, exit 2")
@pytest.mark.parametrize("check", sorted(CODOMAIN_CASES))
def test_codomain_conditions_conditions_refuted(check):
    report, code = _validate(GOOD_SPACE, CODOMAIN_CASES[check])
    assert code == EXIT_VALIDATION
    c = report["validation"]["remark1_codomain"]["checks"][check]
    assert not c["passed"] and c["witness"]


@pytest.mark.criterion(7, "each codomain condition and each axiom refuted with a witness, exit 2")
@pytest.mark.parametrize("axiom", sorted(AXIOM_CASES))
def test_axioms_refuted(axiom):
    report, code = _validate(AXIOM_CASES[axiom], GOOD_CODOMAIN)
    assert code == EXIT_VALIDATION
    checks = report["validation"]["fuzzy_metric"]["checks"]
    assert not checks[axiom]["passed"]
    w = checks[axiom]["witness"]
    assert "i" in w and "j" in w
    if axiom == "triangle":
        assert "k" in w and "t" in w and "s" in w


@pytest.mark.criterion(7, "each codomain condition and each axiom refuted with a witness, exit 2")
def test_clean_instance_is_accepted():
    _, code = _validate(GOOD_SPACE, GOOD_CODOMAIN)
    assert code == EXIT_OK


# -- 8 ----------------------------------------------------------------------------


@pytest.mark.criterion(8, "two extend runs give byte-identical CSV")
@pytest.mark.parametrize("name", ["example1.json", "example2.json"])
def test_determinism(name, tmp_path):
    for p in CONFIGS.iterdir():
        shutil.copy(p, tmp_path / p.name)
    outputs = []
    for _ in range(2):
        report, csv_text, code = cmd_extend(RunConfig.load(tmp_path / name))
        assert code == EXIT_OK
        outputs.append(csv_text.encode())
    assert outputs[0] == outputs[1]
    json.dumps(report)  # report stays serialisable
