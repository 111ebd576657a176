"""Command-line driver.

Subcommands: generate, norm, maximal, weights, czd, strong, weak, necessity,
verify-all.  Exit codes: 0 on success, 1 on a verdict failure, 2 on input
errors.  Sweep reports are written as canonical JSON plus CSV, with matplotlib
figures rendered next to them unless --no-plot is given.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import plots, serialize
from .czd import cz_constant, cz_decompose, cz_stack, cz_verify
from .exponents import EtaRelationError, check_eta_relation
from .experiments import (ExperimentConfig, run_necessity, run_strong, run_verify_all,
                          run_weak)
from .generators import SPACE_KINDS, eta_shift, make_space
from .grids import build_grid
from .maximal import fractional_maximal
from .norms import luxemburg_norm, modular
from .spaces import ValidationError
from .weights import (a_infty_diagnostics, apq_constant, derived_measures,
                      dual_constants, specialized_constants)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except (ValidationError, EtaRelationError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracmax")
    sub = parser.add_subparsers(dest="command")

    g = sub.add_parser("generate", help="write space / exponent / weight files")
    g.add_argument("kind", choices=SPACE_KINDS)
    g.add_argument("--n", type=int, default=16)
    g.add_argument("--level", type=int, default=None, help="depth for cantor-like")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--p", default=None, help="exponent spec, e.g. constant:2 or log-holder:2:0.5:0")
    g.add_argument("--q", default=None)
    g.add_argument("--weight", default=None, help="weight spec, e.g. constant:1 or power:-1.2:0")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    for name, runner in (("strong", run_strong), ("weak", run_weak), ("necessity", run_necessity),
                         ("verify-all", run_verify_all)):
        s = sub.add_parser(name)
        _common_flags(s)
        s.add_argument("--space-kind", default="line", choices=SPACE_KINDS)
        s.add_argument("--sizes", default="16,32" if name == "verify-all" else "32,64,128",
                       help="comma separated point counts for the refinement sweep")
        s.set_defaults(func=lambda a, r=runner, nm=name: cmd_experiment(a, r, nm))

    s = sub.add_parser("norm", help="modular and Luxemburg norm of a function file")
    _common_flags(s)
    s.add_argument("--f", required=True, help="JSON file with {\"values\": [...]}")
    s.set_defaults(func=cmd_norm)

    s = sub.add_parser("maximal", help="fractional maximal function of a function file")
    _common_flags(s)
    s.add_argument("--f", required=True)
    s.set_defaults(func=cmd_maximal)

    s = sub.add_parser("weights", help="weight constants and diagnostics")
    _common_flags(s)
    s.set_defaults(func=cmd_weights)

    s = sub.add_parser("czd", help="stopping-time decomposition on one grid")
    _common_flags(s)
    s.add_argument("--f", required=True)
    s.add_argument("--sigma", default=None, help="weight file for the reference measure")
    s.add_argument("--lambda", dest="lam", type=float, default=None)
    s.add_argument("--stack", action="store_true")
    s.add_argument("--a", type=float, default=None)
    s.set_defaults(func=cmd_czd)

    return parser


def _common_flags(s) -> None:
    s.add_argument("--space", default=None, help="space JSON file")
    s.add_argument("--p", default=None, help="exponent JSON file")
    s.add_argument("--q", default=None, help="exponent JSON file for the target side")
    s.add_argument("--eta", type=float, default=None, help="fractional order (q derived from p)")
    s.add_argument("--weight", default=None, help="weight JSON file")
    s.add_argument("--grids", type=int, default=6)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--out", default=None)
    s.add_argument("--format", dest="fmt", default="json", choices=("csv", "json"))
    s.add_argument("--no-plot", dest="plot", action="store_false")


def _parse_spec(text: str, kind: str) -> dict:
    parts = text.split(":")
    head = parts[0]
    if head == "constant":
        spec = {"type": "constant"}
        if len(parts) > 1:
            spec["value"] = float(parts[1])
        elif kind == "exponent":
            raise ValidationError("constant exponent spec needs a value, e.g. constant:2")
        return spec
    if head == "log-holder" and kind == "exponent":
        if len(parts) < 3:
            raise ValidationError("log-holder spec is log-holder:P_INF:AMPLITUDE[:BASE]")
        return {"type": "log-holder", "p_inf": float(parts[1]), "amplitude": float(parts[2]),
                "base_point": int(parts[3]) if len(parts) > 3 else 0}
    if head == "power" and kind == "weight":
        if len(parts) < 2:
            raise ValidationError("power spec is power:A[:BASE]")
        return {"type": "power", "a": float(parts[1]),
                "base_point": int(parts[2]) if len(parts) > 2 else 0}
    raise ValidationError(f"cannot parse {kind} spec {text!r}")


def cmd_generate(args) -> int:
    out = Path(args.out)
    space = make_space(args.kind, n=args.n, seed=args.seed, level=args.level)
    serialize.save_space(space, out / "space.json")
    written = ["space.json"]
    if args.p:
        serialize.save_exponent(_parse_spec(args.p, "exponent"), out / "p.json")
        written.append("p.json")
    if args.q:
        serialize.save_exponent(_parse_spec(args.q, "exponent"), out / "q.json")
        written.append("q.json")
    if args.weight:
        serialize.save_weight(_parse_spec(args.weight, "weight"), out / "weight.json")
        written.append("weight.json")
    print(f"wrote {', '.join(written)} to {out} (n={space.n}, a0={space.a0:.4g}, "
          f"c_mu={space.c_mu:.4g})")
    return 0


def _load_case(args):
    if not args.space:
        raise ValidationError("--space FILE is required for this command")
    space = serialize.load_space(args.space)
    if args.p:
        p = serialize.load_exponent(args.p, space)
    else:
        from .exponents import Exponent
        p = Exponent.constant(2.0, space.n)
    if args.q:
        q = serialize.load_exponent(args.q, space)
    elif args.eta is not None:
        q = eta_shift(p, args.eta)
    else:
        q = p
    w = serialize.load_weight(args.weight, space) if args.weight else np.ones(space.n)
    return space, p, q, w


def _load_values(path, space) -> np.ndarray:
    data = json.loads(Path(path).read_text())
    values = np.asarray(data["values"] if isinstance(data, dict) else data, dtype=float)
    if len(values) != space.n:
        raise ValidationError(f"{path}: {len(values)} values for {space.n} points")
    return values


def _emit(payload: dict, args, stem: str) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        serialize.write_json(payload, Path(args.out) / f"{stem}.json")
    else:
        print(text)


def cmd_norm(args) -> int:
    space, p, q, w = _load_case(args)
    f = _load_values(args.f, space)
    payload = {
        "modular": modular(space, p, f),
        "luxemburg_norm": luxemburg_norm(space, p, f, args.tol),
        "weighted_norm": luxemburg_norm(space, p, w * f, args.tol),
    }
    _emit(payload, args, "norm")
    return 0


def cmd_maximal(args) -> int:
    space, p, q, w = _load_case(args)
    eta = args.eta or 0.0
    f = _load_values(args.f, space)
    res = fractional_maximal(space, eta, f)
    rows = [(space.points[i], float(res.values[i]), res.witnesses[i].center,
             res.witnesses[i].radius) for i in range(space.n)]
    if args.out and args.fmt == "csv":
        serialize.write_csv(rows, ("point", "value", "witness_center", "witness_radius"),
                            Path(args.out) / "maximal.csv")
    else:
        payload = {"eta": eta, "values": [
            {"point": r[0], "value": r[1], "witness_center": r[2], "witness_radius": r[3]}
            for r in rows]}
        _emit(payload, args, "maximal")
    return 0


def cmd_weights(args) -> int:
    space, p, q, w = _load_case(args)
    apq = apq_constant(space, p, q, w, args.tol)
    primal, dual = dual_constants(space, p, q, w, args.tol)
    rec = derived_measures(space, p, q, w)
    rep_w = a_infty_diagnostics(space, rec.W_atoms, seed=args.seed)
    payload = {
        "apq": apq.value,
        "eta": apq.eta,
        "witness": {"center": apq.witness.center, "radius": apq.witness.radius,
                    "members": list(apq.witness.members)},
        "duality": {"primal": primal, "dual": dual},
        "specialized": specialized_constants(space, p, q, w, args.tol),
        "W_a_infty": {"delta": rep_w.delta, "c1": rep_w.c1, "epsilon": rep_w.epsilon,
                      "c2": rep_w.c2, "doubling": rep_w.doubling_of_weight},
    }
    _emit(payload, args, "weights")
    return 0


def cmd_czd(args) -> int:
    space, p, q, w = _load_case(args)
    sigma = serialize.load_weight(args.sigma, space) if args.sigma else np.ones(space.n)
    f = _load_values(args.f, space)
    eta = args.eta or 0.0
    grid = build_grid(space, seed=args.seed)
    c = cz_constant(grid, space, eta, sigma)
    if args.stack:
        decomp = cz_stack(grid, eta, sigma, f, a=args.a)
    else:
        if args.lam is None:
            raise ValidationError("provide --lambda HEIGHT or --stack")
        decomp = cz_decompose(grid, eta, sigma, f, args.lam)
    report = cz_verify(decomp)
    payload = {
        "c_cz": c.value,
        "c_cz_generic_bound": c.generic_bound,
        "decomposition": serialize.decomposition_dump(decomp),
        "certificates": report.checks,
        "witnesses": report.witnesses,
    }
    _emit(payload, args, "czd")
    return 0 if report.ok else 1


def _experiment_config(args, name) -> ExperimentConfig:
    sizes = tuple(int(s) for s in str(args.sizes).split(",") if s)
    p_spec = {"type": "constant", "value": 2.0}
    q_spec = None
    if args.p:
        p_spec = json.loads(Path(args.p).read_text())
    if args.q:
        q_spec = json.loads(Path(args.q).read_text())
    weight_spec = {"type": "constant"}
    if args.weight:
        weight_spec = json.loads(Path(args.weight).read_text())
    return ExperimentConfig(
        space_kind=args.space_kind, space_file=args.space, sizes=sizes,
        p_spec=p_spec, q_spec=q_spec, eta=args.eta, weight_spec=weight_spec,
        n_grids=args.grids, seed=args.seed, tol=args.tol, out=args.out,
        fmt=args.fmt, plot=args.plot)


def cmd_experiment(args, runner, name) -> int:
    cfg = _experiment_config(args, name)
    report = runner(cfg)
    stem = name.replace("-", "_")
    if cfg.out:
        out = Path(cfg.out)
        serialize.write_json(report, out / f"{stem}.json")
        if "rows" in report:
            header = sorted(report["rows"][0])
            serialize.write_csv([[row[h] for h in header] for row in report["rows"]],
                                header, out / f"{stem}.csv")
            if cfg.plot:
                fig = plots.necessity_figure if name == "necessity" else plots.sweep_figure
                fig(report, out / f"{stem}.png")
        if name == "verify-all":
            header = ("case", "check", "pass", "detail")
            serialize.write_csv([[c[h] for h in header] for c in report["checks"]],
                                header, out / f"{stem}.csv")
    _print_summary(report, name)
    if name == "verify-all":
        return 0 if report["pass"] else 1
    verdict = report.get("verdict", {})
    ok = all(bool(v) for v in verdict.values() if isinstance(v, (bool, np.bool_)))
    return 0 if ok else 1


def _print_summary(report: dict, name: str) -> None:
    if name == "verify-all":
        n_pass = sum(1 for c in report["checks"] if c["pass"])
        print(f"verify-all: {n_pass}/{len(report['checks'])} checks passed")
        for c in report["checks"]:
            if not c["pass"]:
                print(f"  FAIL {c['case']}: {c['check']} {c['detail']}")
        return
    for row in report.get("rows", []):
        cells = " ".join(f"{k}={row[k]:.6g}" if isinstance(row[k], float) else f"{k}={row[k]}"
                         for k in sorted(row))
        print(cells)
    print(f"verdict: {report.get('verdict')}")


if __name__ == "__main__":
    sys.exit(main())
