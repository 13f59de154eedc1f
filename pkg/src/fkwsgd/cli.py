"""Command-line entry point: ``fkwsgd <subcommand> ...``.

Negative complex parameters need the ``=`` form, e.g. ``--rho=-1,0``.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from . import harness
from .fracweights import INTEGRAL_RULES, fsd_weights, integral_weights
from .harness import fmt
from .mesh_fem import assemble, build_mesh, dump_matrices, l2_norm
from .oracle import exact_constantU_solution
from .stepper import ProblemSpec, fitted_rate, n_steps_for, solve

EXIT_TOLERANCE = 2


def _floats(text: str) -> list[float]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "/" in part:
            num, den = part.split("/")
            out.append(float(num) / float(den))
        else:
            out.append(float(part))
    return out


def _complex(text: str) -> complex:
    vals = _floats(text)
    if len(vals) == 1:
        return complex(vals[0])
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}")
    return complex(vals[0], vals[1])


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_weights(args) -> int:
    if args.sigma == "deriv":
        table = fsd_weights(args.alpha, args.alpha, args.n)
    else:
        table = integral_weights(args.alpha, args.n, args.rule)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["j", "w"])
    for j, v in enumerate(table.weights):
        w.writerow([j, fmt(v)])
    return 0


def _load(args):
    spec, m = harness.load_config(args.config)
    if args.m is not None:
        m = args.m
    sys_ = assemble(build_mesh(spec.dim, m))
    if getattr(args, "dump_matrices", None):
        for p in dump_matrices(sys_, args.dump_matrices):
            logging.info("wrote %s", p)
    return spec, m, sys_


def cmd_solve(args) -> int:
    spec, m, sys_ = _load(args)
    res = solve(spec, sys_, args.tau)
    mesh = sys_.mesh
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node_index", "x"] + (["y"] if mesh.dim == 2 else []) + ["re", "im"])
    for node, xy, v in zip(mesh.free_nodes, mesh.free_coords, res.final.values):
        w.writerow([int(node)] + [fmt(c) for c in xy] + [fmt(v.real), fmt(v.imag)])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_converge(args) -> int:
    spec, m, sys_ = _load(args)
    report = harness.run_convergence(
        spec, m, args.taus, problem_id=Path(args.config).stem, sys=sys_, jobs=args.jobs
    )
    _emit(report.to_csv(), args.out)
    if args.check:
        if not args.expected:
            raise SystemExit("--check needs --expected FILE")
        _, want = harness.read_report_csv(Path(args.expected).read_text())
        bad = [
            f"tau={t:g}: {g:.4e} vs {e:.4e}"
            for t, g, e in zip(report.taus, report.errors, want)
            if abs(g - e) > args.rtol * abs(e)
        ]
        for line in bad:
            print(f"FAIL {line}", file=sys.stderr)
        return EXIT_TOLERANCE if bad else 0
    return 0


def cmd_reproduce(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = harness.reproduce_table(
        args.table, args.m or harness.DEFAULT_M, source_weights=args.source_weights,
        correction=not args.uncorrected, jobs=args.jobs,
    )
    for r in reports:
        (out_dir / f"table{args.table}_{r.problem_id}.csv").write_text(r.to_csv())
    (out_dir / f"table{args.table}.csv").write_text(harness.table_csv(reports))
    for r in reports:
        rates = ", ".join(f"{x:.3f}" for x in r.rates[1:] if x is not None)
        print(f"{r.problem_id}: " + " ".join(f"{e:.4e}" for e in r.errors)
              + f"  rates [{rates}] fit {r.fitted_rate:.3f}")
    if args.check:
        expected = (harness.read_table_csv(Path(args.expected).read_text())
                    if args.expected else harness.expected_table(args.table))
        failures = harness.compare_to_expected(reports, expected, args.rtol)
        for line in failures:
            print(f"FAIL {line}", file=sys.stderr)
        return EXIT_TOLERANCE if failures else 0
    return 0


def cmd_oracle(args) -> int:
    if args.case != "ml-sine":
        raise SystemExit(f"unknown oracle case {args.case!r}")
    spec = ProblemSpec(
        alpha=args.alpha, rho=args.rho, T=args.T,
        U={"name": "const", "params": {"c": args.c}},
        G0={"name": "sin-mode", "params": {"k": args.k}},
        f="zero", dim=1,
    )
    for t in args.taus:
        n_steps_for(args.T, t)
    sys_ = assemble(build_mesh(1, args.m))
    exact = exact_constantU_solution(args.alpha, args.rho, args.c, args.k, args.T, sys_.mesh)
    errors = [l2_norm(sys_, solve(spec, sys_, t).final.values - exact.values) for t in args.taus]
    report = harness.ConvergenceReport("ml-sine", args.alpha, list(args.taus), errors)
    sys.stdout.write(report.to_csv())
    logging.info("fitted rate %.4f", fitted_rate(args.taus, errors))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fkwsgd", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    w = sub.add_parser("weights", help="print convolution-quadrature weights as CSV")
    w.add_argument("--alpha", type=float, required=True)
    w.add_argument("--sigma", choices=("deriv", "integ"), required=True)
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--rule", choices=INTEGRAL_RULES, default="generating",
                   help="integral weight rule (integ only)")
    w.set_defaults(func=cmd_weights)

    def problem_args(sp):
        sp.add_argument("--config", required=True)
        sp.add_argument("--m", type=int, default=None, help="override mesh density")
        sp.add_argument("--out", default=None)
        sp.add_argument("--dump-matrices", default=None, metavar="PATH")

    s = sub.add_parser("solve", help="solve one problem to T and write final nodal values")
    problem_args(s)
    s.add_argument("--tau", type=lambda t: _floats(t)[0], required=True)
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("converge", help="self-convergence study for one config")
    problem_args(c)
    c.add_argument("--taus", type=_floats, default=list(harness.DEFAULT_TAUS))
    c.add_argument("--jobs", type=int, default=None)
    c.add_argument("--check", action="store_true")
    c.add_argument("--expected", default=None)
    c.add_argument("--rtol", type=float, default=0.25)
    c.set_defaults(func=cmd_converge)

    r = sub.add_parser("reproduce", help="rerun a reference error table")
    r.add_argument("--table", type=int, choices=harness.TABLE_IDS, required=True)
    r.add_argument("--out-dir", required=True)
    r.add_argument("--m", type=int, default=None)
    r.add_argument("--jobs", type=int, default=None)
    r.add_argument("--source-weights", choices=INTEGRAL_RULES, default="wsgd")
    r.add_argument("--uncorrected", action="store_true")
    r.add_argument("--check", action="store_true")
    r.add_argument("--expected", default=None, help="table CSV (default: bundled values)")
    r.add_argument("--rtol", type=float, default=0.25)
    r.set_defaults(func=cmd_reproduce)

    o = sub.add_parser("oracle", help="convergence against an analytic solution")
    o.add_argument("--case", default="ml-sine")
    o.add_argument("--alpha", type=float, required=True)
    o.add_argument("--rho", type=_complex, default=complex(-1.0))
    o.add_argument("--c", type=float, default=1.0)
    o.add_argument("--k", type=int, default=1)
    o.add_argument("--T", type=float, default=0.5)
    o.add_argument("--m", type=int, default=512)
    o.add_argument("--taus", type=_floats, required=True)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
