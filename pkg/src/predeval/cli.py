"""Command-line front end.

Loss specifications (``--loss``, repeatable):

  tweedie:<p>            Tweedie generator phi_p (p=0 is squared loss)
  atoms:<t1=m1,t2=m2>    mixture of elementary losses with point masses
  ecdf:<predictor>       mixture with H = empirical CDF of a predictor column

Exit codes: 0 success, 2 validation error, 3 reproduction check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from itertools import combinations
from pathlib import Path

import numpy as np

from . import curves as cv
from . import decomp, dominance, scenarios, stats
from .losses import ConvexGenerator, MixingMeasure, ecdf_measure, parse_atoms, score, tweedie_generator, weighted_score
from .sample import PairedSample, ValidationError, recalibrate, validate

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_VALIDATION, EXIT_REPRODUCTION = 0, 2, 3


class UsageError(Exception):
    pass


# Input -----------------------------------------------------------------------


def read_csv(path: str, response: str, predictors: list[str]) -> tuple[np.ndarray, dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        for col in [response, *predictors]:
            if col not in header:
                raise ValidationError(f"{path}: column {col!r} not in header")
        idx = {c: header.index(c) for c in [response, *predictors]}
        data: dict[str, list[float]] = {c: [] for c in idx}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != len(header):
                raise ValidationError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            for c, j in idx.items():
                field = row[j].strip()
                if field == "":
                    raise ValidationError(f"{path}:{lineno}: missing value in column {c!r}")
                try:
                    data[c].append(float(field))
                except ValueError:
                    raise ValidationError(f"{path}:{lineno}: cannot parse {field!r} in column {c!r}") from None
    y = np.array(data[response])
    return y, {p: np.array(data[p]) for p in predictors}


def parse_loss(spec: str, columns: dict):
    kind, sep, arg = spec.partition(":")
    if not sep:
        raise UsageError(f"loss spec {spec!r} lacks a ':'")
    if kind == "tweedie":
        try:
            return tweedie_generator(float(arg))
        except ValueError:
            raise UsageError(f"bad Tweedie power in {spec!r}") from None
    if kind == "atoms":
        try:
            return parse_atoms(arg)
        except ValueError as exc:
            raise UsageError(f"bad atoms in {spec!r}: {exc}") from None
    if kind == "ecdf":
        if arg not in columns:
            raise UsageError(f"ecdf loss refers to unknown predictor {arg!r}")
        H = ecdf_measure(columns[arg])
        object.__setattr__(H, "label", spec)
        return H
    raise UsageError(f"unknown loss kind {kind!r}")


def loss_label(loss) -> str:
    return loss.label if isinstance(loss, (ConvexGenerator, MixingMeasure)) else str(loss)


# Output ----------------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def write_report(report: dict, out: str | None, name: str = "report.json") -> None:
    text = json.dumps(_clean({"schema_version": SCHEMA_VERSION, **report}), indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text, encoding="utf-8")


def export_curve(curve: cv.Curve, out: str | None, name: str) -> str | None:
    if out is None:
        return None
    d = Path(out) / "curves"
    d.mkdir(parents=True, exist_ok=True)
    path = d / f"{name}.csv"
    curve.to_csv(path)
    return str(path.relative_to(out))


# Commands --------------------------------------------------------------------


def _load(args) -> tuple[list[PairedSample], dict]:
    if not args.predictors:
        raise UsageError("at least one predictor is required")
    if not args.input or not args.response:
        raise UsageError("--input and --response are required")
    y, cols = read_csv(args.input, args.response, args.predictors)
    samples = validate(y, cols, calibrated=getattr(args, "assume_calibrated", False))
    return samples, cols


def cmd_score(args) -> int:
    samples, cols = _load(args)
    losses = [parse_loss(s, cols) for s in (args.loss or ["tweedie:0"])]
    table = {}
    ranking = {}
    for loss in losses:
        lab = loss_label(loss)
        vals = {}
        for s in samples:
            if args.weighted:
                vals[s.name] = weighted_score(s, loss, lambda u: u)
            else:
                vals[s.name] = score(s, loss)
        table[lab] = vals
        ranking[lab] = sorted(vals, key=lambda k: (vals[k], k))
    report = {
        "command": "score",
        "weighted": bool(args.weighted),
        "n": samples[0].n,
        "unbiasedness_gap": {s.name: s.unbiasedness_gap for s in samples},
        "scores": table,
        "ranking": ranking,
    }
    write_report(report, args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    samples, cols = _load(args)
    losses = [parse_loss(s, cols) for s in (args.loss or ["tweedie:0"])]
    method = args.recalibrate or "pav"
    if method == "none":
        raise UsageError("decompose needs a recalibration method (pav or bins:k)")
    grid = cv.default_p_grid(args.grid)
    per = {}
    for s in samples:
        fit = recalibrate(s, method)
        block = {"decomposition": {}, "n_blocks": fit.n_blocks}
        for loss in losses:
            res = decomp.murphy_decomposition(s, loss, fit)
            block["decomposition"][loss_label(loss)] = res.as_dict()
        a = stats.abc(s)
        block["abc"] = a.as_dict()
        block["gini"] = stats.gini(s.x).as_dict()
        block["mcb_mse"] = decomp.mcb_mse(s, fit)
        block["dsc_mse"] = decomp.dsc_mse(s, fit)
        curves = {
            "lorenz": cv.lorenz_curve(s.x, grid),
            "concentration": cv.concentration_curve(s, grid),
            "q": cv.q_function(s, grid),
            "murphy": cv.murphy_curve(s),
        }
        block["curves"] = {k: export_curve(c, args.out, f"{s.name}_{k}") for k, c in curves.items()}
        block["curve_integrals"] = {k: c.integral() for k, c in curves.items()}
        per[s.name] = block
    write_report({"command": "decompose", "recalibration": method, "n": samples[0].n, "predictors": per}, args.out)
    return EXIT_OK


def cmd_dominance(args) -> int:
    samples, cols = _load(args)
    method = args.recalibrate or "none"
    notices = []
    calibrated = all(s.calibrated for s in samples)
    if method != "none":
        samples = [s.with_predictor(recalibrate(s, method).fitted, s.name, calibrated=True) for s in samples]
        calibrated = True
    if not calibrated:
        notices.append("input not flagged calibrated; calibrated-only analyses skipped (use --recalibrate or --assume-calibrated)")
    tol, mt = args.tol, args.mean_tol
    pairs = {}
    for s1, s2 in combinations(samples, 2):
        key = f"{s1.name}|{s2.name}"
        entry = {
            "lorenz": dominance.lorenz_dominance(s1.x, s2.x, tol=tol).as_dict(),
            "murphy": dominance.murphy_dominance(s1, s2, tol=tol).as_dict(),
        }
        if calibrated:
            try:
                entry["crossings"] = dominance.crossing_consistency(s1.x, s2.x, s1.y, mean_tol=mt)
                td = dominance.third_degree_integrals(s1.x, s2.x, mean_tol=mt)
                entry["third_degree"] = {
                    "half_var_diff": td.half_var_diff,
                    "var_1": td.var_1,
                    "var_2": td.var_2,
                    "lower_nonneg": td.lower_nonneg,
                    "upper_nonneg": td.upper_nonneg,
                    "mean_gap": td.mean_gap,
                }
                if entry["crossings"]["lorenz_changes"] == 1:
                    entry["second_degree_lorenz"] = dominance.second_degree_lorenz(s1.x, s2.x)
                    entry["class_U"] = dominance.bregman_dominance_class(s1.x, s2.x, s1.y, "U", mean_tol=mt)
                    entry["class_V"] = dominance.bregman_dominance_class(s1.x, s2.x, s1.y, "V", mean_tol=mt)
            except ValueError as exc:
                entry["notice"] = str(exc)
        pairs[key] = entry
    write_report({"command": "dominance", "recalibration": method, "calibrated": calibrated, "notices": notices, "pairs": pairs}, args.out)
    return EXIT_OK


# Reproduction ----------------------------------------------------------------


def _row(name, oracle, empirical, tol) -> dict:
    diff = abs(float(empirical) - float(oracle))
    return {"quantity": name, "oracle": float(oracle), "empirical": float(empirical), "abs_diff": diff, "tol": tol, "pass": bool(diff <= tol)}


def _check(name, ok, detail=None) -> dict:
    return {"quantity": name, "pass": bool(ok), "detail": detail}


def reproduce(example: int, n: int | None, seed: int, out: str | None = None, grid_points: int = 512) -> dict:
    rows: list[dict] = []
    grid = cv.default_p_grid(grid_points)
    curves = {}
    if example in (1, 2, 3):
        sc = scenarios.LatentUniformScenario(0.9, 0.07)
        n = n or 10**6
        d = scenarios.sample_latent(sc, n, seed)
        orc = scenarios.latent_oracles(sc)
        s1, s2 = d["s1"], d["s2"]
        if example == 1:
            a = stats.abc(s2)
            rows.append(_row("ABC(X)", 0.0, a.abc, 2e-3))
            lc, cc = cv.lorenz_curve(s2.x, grid), cv.concentration_curve(s2, grid)
            rep = cv.sign_changes(lc, cc, tol=5e-4)
            rows.append(_check("LC/CC sign changes == 1", rep.sign_changes == 1, rep.locations))
            if rep.locations:
                rows.append(_row("LC/CC crossing location", 0.5, rep.locations[0], 2.0 / (grid_points - 1) + 1e-2))
            curves.update(lorenz=lc, concentration=cc)
        elif example == 2:
            a1, a2 = stats.abc(s1), stats.abc(s2)
            m1, m2 = decomp.mcb_mse(s1), decomp.mcb_mse(s2)
            rows.append(_check("ABC^2 ranks X2 better", a2.abc2 < a1.abc2, [a1.abc2, a2.abc2]))
            rows.append(_check("|ABC| ranks X2 better", abs(a2.abc) < abs(a1.abc), [a1.abc, a2.abc]))
            rows.append(_check("MCB_MSE ranks X1 better", m1 < m2, [m1, m2]))
            ld = dominance.lorenz_dominance(s1.x, s2.x, grid=grid)
            rows.append(_check("LC(X1), LC(X2) cross once below 0.5", ld.count == 1 and ld.locations[0] < 0.5, ld.locations))
            curves.update(lorenz_1=cv.lorenz_curve(s1.x, grid), lorenz_2=cv.lorenz_curve(s2.x, grid), concentration=cv.concentration_curve(s1, grid))
        else:
            a1, a2 = stats.abc(s1), stats.abc(s2)
            rows.append(_row("ABC(Y,X1)", orc["abc_1"], a1.abc, 2e-3))
            rows.append(_row("ABC^2(Y,X1)", orc["abc2_1"], a1.abc2, 5e-5))
            rows.append(_row("ABC^2(Y,X2)", orc["abc2_2"], a2.abc2, 5e-5))
            rows.append(_row("MCB_MSE(X1)", orc["mcb_1"], decomp.mcb_mse(s1), 5e-5))
            rows.append(_row("MCB_MSE(X2)", orc["mcb_2"], decomp.mcb_mse(s2), 5e-5))
            curves.update(q_1=cv.q_function(s1, grid), q_2=cv.q_function(s2, grid))
    elif example == 4:
        spec = scenarios.WeightedCounterexampleSpec()
        n = n or 10**6
        d = scenarios.sample_weighted(spec, n, seed)
        orc = scenarios.weighted_oracles(spec)
        gen = tweedie_generator(0.0)
        w1 = weighted_score(d["s1"], gen, lambda u: u)
        w2 = weighted_score(d["s2"], gen, lambda u: u)
        rows.append(_row("S_W(Y,X1)", orc["score_1"], w1, 1e-2))
        rows.append(_row("S_W(Y,X2)", orc["score_2"], w2, 1e-2))
        rows.append(_check("weighted score prefers X2", w2 < w1, [w1, w2]))
    elif example in (5, 6, 7):
        n = n or 10**6
        pair = scenarios.sample_lognormal_pair(n=n, seed=seed)
        o1 = scenarios.lognormal_oracles(scenarios.EXAMPLE5_X1)
        o2 = scenarios.lognormal_oracles(scenarios.EXAMPLE5_X2)
        x1, x2, y = pair["x1"], pair["x2"], pair["y"]
        if example == 5:
            rows.append(_row("Gini(X1)", o1["gini"], stats.gini(x1).value, 1e-2))
            rows.append(_row("Gini(X2)", o2["gini"], stats.gini(x2).value, 1e-2))
            rows.append(_row("Var(X1)", o1["var"], np.var(x1), 2.0))
            rows.append(_row("Var(X2)", o2["var"], np.var(x2), 2.0))
            ld = dominance.lorenz_dominance(x1, x2)
            rows.append(_check("single Lorenz crossing", ld.count == 1, ld.locations))
            curves.update(lorenz_1=cv.lorenz_curve(x1, grid), lorenz_2=cv.lorenz_curve(x2, grid))
        elif example == 6:
            tg = np.linspace(0.0, 60.0, 241)
            m1 = cv.discrimination_murphy_curve(x1, float(np.mean(y)), tg)
            m2 = cv.discrimination_murphy_curve(x2, float(np.mean(y)), tg)
            rows.append(_row("max |M(X1) - oracle|", 0.0, np.max(np.abs(m1.values - o1["murphy_disc"](tg))), 0.2))
            rows.append(_row("max |M(X2) - oracle|", 0.0, np.max(np.abs(m2.values - o2["murphy_disc"](tg))), 0.2))
            cc = dominance.crossing_consistency(x1, x2, y)
            rows.append(_check("Murphy and Lorenz crossings agree", cc["consistent"] and cc["lorenz_changes"] == 1, cc))
            curves.update(murphy_1=m1, murphy_2=m2)
        else:
            half = 0.5 * (o1["var"] - o2["var"])
            td = dominance.third_degree_integrals(x1, x2)
            rows.append(_row("1/2 (Var1 - Var2)", half, -td.half_var_diff, 2.0))
            cc = dominance.crossing_consistency(x1, x2, y)
            rows.append(_check("CDFs cross twice, curves once", cc["cdf_changes"] == 2 and cc["lorenz_changes"] == 1, cc))
            ratios = scenarios.example7_dsc_ratio([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0], n, seed)
            for p, r in ratios.items():
                if p < 2:
                    rows.append(_check(f"DSC ratio > 1 at p={p:g}", r > 1.0, r))
                else:
                    rows.append({"quantity": f"DSC ratio at p={p:g}", "pass": True, "detail": r, "asserted": False})
            g = np.linspace(0.0, 80.0, 321)
            tdg = dominance.third_degree_integrals(x1, x2, grid=g)
            curves["upper_double_integral"] = cv.Curve("theta", g, tdg.upper_integral)
    else:
        raise UsageError(f"unknown example {example}")
    files = {k: export_curve(c, out, f"example{example}_{k}") for k, c in curves.items()}
    return {"command": "reproduce", "example": example, "n": n, "seed": seed, "rows": rows, "curves": files, "pass": all(r["pass"] for r in rows)}


def cmd_reproduce(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for Monte Carlo reproduction")
    rep = reproduce(args.example, args.n, args.seed, args.out, args.grid)
    write_report(rep, args.out)
    return EXIT_OK if rep["pass"] else EXIT_REPRODUCTION


# Entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="CSV file with a header row")
    common.add_argument("--response", help="response column name")
    common.add_argument("--predictors", nargs="+", default=[], help="predictor column names")
    common.add_argument("--loss", action="append", help="loss spec (repeatable), see top of --help")
    common.add_argument("--grid", type=int, default=cv.DEFAULT_POINTS, help="points on the p-grid")
    common.add_argument("--tol", type=float, default=1e-9, help="crossing / dominance tolerance")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--recalibrate", default=None, help="pav | bins:k | none")
    common.add_argument("--assume-calibrated", action="store_true", help="treat predictors as mean-calibrated")
    common.add_argument("--out", default=None, help="output directory (default: report to stdout)")

    p = argparse.ArgumentParser(prog="predeval", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    sc = sub.add_parser("score", parents=[common], help="average loss per predictor")
    sc.add_argument("--weighted", action="store_true", help="weight losses by W(u) = u of the predictor's midrank")
    sub.add_parser("decompose", parents=[common], help="Murphy decomposition, ABC, Gini and curves")
    dm = sub.add_parser("dominance", parents=[common], help="pairwise dominance analyses")
    dm.add_argument("--mean-tol", type=float, default=dominance.DEFAULT_MEAN_TOL, help="relative mean gap allowed before rescaling")
    rp = sub.add_parser("reproduce", parents=[common], help="reproduce a worked example (1-7)")
    rp.add_argument("example", type=int, choices=range(1, 8))
    rp.add_argument("--n", type=int, default=None, help="Monte Carlo sample size")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    handlers = {"score": cmd_score, "decompose": cmd_decompose, "dominance": cmd_dominance, "reproduce": cmd_reproduce}
    try:
        return handlers[args.command](args)
    except (ValidationError, UsageError, OSError, ValueError) as exc:
        sys.stderr.write(f"predeval: error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
