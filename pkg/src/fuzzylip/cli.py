"""Command line: ``fuzzylip validate | extend | report``.

Exit codes: 0 success, 2 validation failure, 3 hypothesis failure,
4 I/O or configuration error.
"""

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .config import RunConfig, default_tolerance
from .errors import ConfigError, ExtensionUndefinedError, HypothesisError, NonLipschitzError
from .extension import estimate_dilation_table, extend
from .fuzzy_metric import EuclideanSpace, validate_fuzzy_metric, validate_remark1
from .monotone import check_galois

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_HYPOTHESIS = 3
EXIT_IO = 4

REPORT_NAME = "report.json"
CSV_NAME = "extension.csv"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_report(report, path):
    Path(path).write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n")


def _validation_section(cfg, space, codomain, tol, seed):
    t_grid, s_grid, distances, galois_grid = cfg.validation_grids(seed)
    section = {}
    section["remark1_codomain"] = validate_remark1(codomain, distances, t_grid, tol=tol).to_dict()
    if isinstance(space, EuclideanSpace):
        section["remark1_domain"] = validate_remark1(space.efm, distances, t_grid, tol=tol).to_dict()
    if space.n >= 2:
        section["fuzzy_metric"] = validate_fuzzy_metric(space, t_grid, s_grid, tol=tol).to_dict()
    else:
        section["fuzzy_metric"] = {"passed": True, "checks": {}, "note": "single point, nothing to check"}
    section["galois"] = check_galois(codomain.phi, galois_grid, tol=tol).to_dict()
    section["passed"] = all(v["passed"] for v in section.values())
    return section


def cmd_validate(cfg, tol=None, seed=0):
    """Run every validator; returns ``(report, exit_code)``."""
    tol = default_tolerance() if tol is None else tol
    report = {"command": "validate", "config": cfg.to_dict(), "tolerance": tol, "seed": seed}
    try:
        space = cfg.build_space()
        codomain = cfg.build_codomain()
    except ConfigError as exc:
        report.update(status="config-error", error=str(exc))
        return report, EXIT_IO
    report["validation"] = _validation_section(cfg, space, codomain, tol, seed)
    ok = report["validation"]["passed"]
    report["status"] = "pass" if ok else "validation-failed"
    return report, EXIT_OK if ok else EXIT_VALIDATION


def cmd_extend(cfg, tol=None, seed=0):
    """Validate, check the hypothesis, extend and verify.

    Returns ``(report, csv_text, exit_code)``; ``csv_text`` is ``None`` when
    no extension was produced.
    """
    tol = default_tolerance() if tol is None else tol
    report = {"command": "extend", "config": cfg.to_dict(), "tolerance": tol, "seed": seed}
    started = time.perf_counter()
    try:
        space = cfg.build_space()
        codomain = cfg.build_codomain()
        f = cfg.build_sample(space)
        queries = cfg.build_queries(space)
        K = cfg.build_dilation()
        alpha = cfg.build_alpha()
    except ConfigError as exc:
        report.update(status="config-error", error=str(exc))
        return report, None, EXIT_IO

    report["validation"] = _validation_section(cfg, space, codomain, tol, seed)
    try:
        if K is None:
            K, estimates = estimate_dilation_table(space, codomain, f)
            report["dilation"] = {
                "source": "estimate",
                "per_t": [
                    {"t": t, "K": e.K, "infimum": e.infimum, "degenerate": e.degenerate, "pair": e.pair, "nudges": e.nudges}
                    for t, e in estimates.items()
                ],
            }
        else:
            report["dilation"] = {"source": "config", "per_t": [{"t": t, "K": K(t)} for t in f.t_grid]}
        result = extend(space, codomain, f, K, alpha=alpha, distance=cfg.distance, tol=tol)
    except HypothesisError as exc:
        report.update(
            status="hypothesis-failed",
            error=str(exc),
            hypothesis={"passed": False, "pair": list(exc.pair) if exc.pair else None, "margin": exc.margin},
        )
        return report, None, EXIT_HYPOTHESIS
    except (NonLipschitzError, ExtensionUndefinedError) as exc:
        witness = getattr(exc, "pair", None) or getattr(exc, "query", None)
        report.update(status="hypothesis-failed", error=str(exc), witness=witness)
        return report, None, EXIT_HYPOTHESIS
    except ConfigError as exc:
        report.update(status="config-error", error=str(exc))
        return report, None, EXIT_IO

    report["hypothesis"] = {"passed": True, "per_t": [d["hypothesis"] for d in result.diagnostics]}
    report["extension"] = result.to_dict(queries)
    report["verification"] = result.verification.to_dict()
    report["timing"] = {"seconds": time.perf_counter() - started}
    ok = report["validation"]["passed"] and result.verification.passed
    report["status"] = "pass" if ok else "validation-failed"
    return report, result.to_csv(queries=queries), EXIT_OK if ok else EXIT_VALIDATION


def _verdict(ok):
    return "PASS" if ok else "FAIL"


def render_report(report):
    """Human-readable summary of a report dict."""
    if not isinstance(report, dict) or "command" not in report:
        raise ConfigError("report is missing its 'command' field")
    out = [f"command: {report['command']}  status: {report.get('status', '?')}"]
    if "error" in report:
        out.append(f"error: {report['error']}")
    val = report.get("validation")
    if val:
        for name, sec in val.items():
            if name == "passed":
                continue
            out.append(f"[{_verdict(sec['passed'])}] validation/{name}")
            for check, c in sec.get("checks", {}).items():
                line = f"    [{_verdict(c['passed'])}] {check}"
                if not c["passed"]:
                    line += f"  worst={c['worst']}  witness={json.dumps(c['witness'], sort_keys=True)}"
                out.append(line)
            if name == "galois" and not sec["passed"]:
                out.append(f"    worst violation {sec['worst_violation']}")
                for w in (sec["lower_law_failures"] + sec["upper_law_failures"])[:5]:
                    out.append(f"    witness {json.dumps(w, sort_keys=True)}")
    hyp = report.get("hypothesis")
    if hyp:
        if hyp["passed"]:
            margins = [h["margin"] for h in hyp.get("per_t", [])]
            finite = [m for m in margins if m != "inf"]
            worst = min(finite) if finite else "inf"
            out.append(f"[PASS] hypothesis  worst margin={worst}")
        else:
            out.append(f"[FAIL] hypothesis  pair={hyp.get('pair')}  margin={hyp.get('margin')}")
    dil = report.get("dilation")
    if dil:
        ks = ", ".join(f"K({p['t']})={p['K']}" for p in dil["per_t"])
        out.append(f"dilation ({dil['source']}): {ks}")
    ver = report.get("verification")
    if ver:
        line = f"[{_verdict(ver['passed'])}] verification  worst slack={ver['worst_slack']}  pairs checked={ver['checked']}"
        out.append(line)
        if not ver["passed"]:
            out.append(f"    witness {json.dumps(ver['witness'], sort_keys=True)}")
    ext = report.get("extension")
    if ext:
        agree = all(d["agrees_on_S"] for d in ext["diagnostics"])
        out.append(f"[{_verdict(agree)}] agreement on S")
        n_inf = sum(d["rho_infinite"] for d in ext["diagnostics"])
        out.append(f"extension rows: {len(ext['rows'])}  distance: {ext['distance']}  infinite rho entries: {n_inf}")
    return "\n".join(out) + "\n"


def cmd_report(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    if not text.strip():
        raise ConfigError(f"{path}: corrupt report (empty file)")
    try:
        report = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: corrupt report ({exc.msg})") from None
    return render_report(report)


def build_parser():
    p = argparse.ArgumentParser(prog="fuzzylip", description="McShane-Whitney extension of fuzzy Lipschitz maps.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("validate", "run the structural validators"), ("extend", "extend a sampled map")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", default=".", help="output directory (default: current)")
        sp.add_argument("--tolerance", type=float, default=None, help="inequality tolerance (default 1e-9)")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomised validator grids")
    rp = sub.add_parser("report", help="summarise a report file")
    rp.add_argument("report", help="path to report.json")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            sys.stdout.write(cmd_report(args.report))
            return EXIT_OK
        tol = args.tolerance if args.tolerance is not None else default_tolerance()
        cfg = RunConfig.load(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "validate":
            report, code = cmd_validate(cfg, tol, args.seed)
        else:
            report, csv_text, code = cmd_extend(cfg, tol, args.seed)
            if csv_text is not None:
                (out / CSV_NAME).write_text(csv_text)
        dump_report(report, out / REPORT_NAME)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(render_report(_jsonable(report)))
    return code


if __name__ == "__main__":
    sys.exit(main())
