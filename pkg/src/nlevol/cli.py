"""Command line front end.

Two subcommands: `run` executes one experiment and writes json, csv or svg;
`table` sweeps several expansion orders and prints a summary row per order.
Exit codes: 0 on success, 1 on usage errors, 2 when a computation fails
(term budget exhausted, an ill conditioned shifted system, mesh refinement
failure, or a result too inaccurate to use).
"""

import argparse
import json
import sys
import time

import numpy as np

from .backends import (
    CirculantOperator,
    HessenbergOperator,
    LaplacianOperator,
    make_data,
    power_reference,
    reference_solution,
)
from .errors import ConvergenceFailure, NlevolError
from .expansion import adaptive_solve, fine_grid
from .pde import functional_solve, model_problem_1, model_problem_2, mol_solve

EXPERIMENTS = (
    "hessenberg",
    "circulant",
    "laplacian",
    "power-compare",
    "pde-mol",
    "pde-functional",
)

# per experiment defaults, full scale and desk scale
DEFAULTS = {
    "laplacian": dict(size=1024, m=10, tol=1e-12),
    "circulant": dict(size=1025, m=10, tol=1e-12),
    "hessenberg": dict(size=512, m=10, tol=1e-12),
    "power-compare": dict(size=1025, m=30, tol=1e-12, n=2),
    "pde-mol": dict(size=1000, m=100, tol=1e-7),
    "pde-functional": dict(size=65, m=65, tol=1e-7),
}
DESK = {
    "laplacian": dict(size=64),
    "circulant": dict(size=129),
    "hessenberg": dict(size=64),
    "power-compare": dict(size=129),
    "pde-mol": dict(size=200, m=20),
    "pde-functional": dict(size=33, m=33),
}


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser():
    p = Parser(prog="nlevol", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, multi_n=False):
        sp.add_argument("experiment", choices=EXPERIMENTS)
        if multi_n:
            sp.add_argument("--n", type=int, nargs="+", default=[0, 1, 2],
                            help="expansion orders, one table row each")
        else:
            sp.add_argument("--n", type=int, default=1, help="expansion order")
        sp.add_argument("--size", type=int, help="problem size")
        sp.add_argument("--m", type=int, help="coarse time grid points")
        sp.add_argument("--tol", type=float, help="truncation tolerance")
        sp.add_argument("--max-terms", type=int, default=50000)
        sp.add_argument("--fine-refine", type=int, default=4,
                        help="evaluation grid refinement factor")
        sp.add_argument("--workers", type=int, default=None,
                        help="thread count for the shifted solves")
        sp.add_argument("--desk", action="store_true",
                        help="small scale preset sizes")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--data", choices=("band", "ones", "uniform", "normal"),
                        default="band", help="data vector recipe")
        sp.add_argument("--band-level", type=float, default=None,
                        help="target eigenvalue magnitude of the probe band")
        sp.add_argument("--band-weight", type=float, default=None,
                        help="relative weight of the probe band")
        sp.add_argument("--sigma", type=float, default=None)
        sp.add_argument("--gamma", type=float, default=0.0)
        sp.add_argument("--coeffs", type=float, nargs=3, default=(1.0, 1.0, 1.0),
                        metavar=("A0", "A1", "A2"))
        sp.add_argument("--model", type=int, choices=(1, 2), default=1)
        sp.add_argument("--ell", type=int, default=20,
                        help="fixed tail length of the functional route")
        sp.add_argument("--refine-tol", type=float, default=1e-8)
        sp.add_argument("--start-mesh", type=int, default=512)
        sp.add_argument("--output", default=None, help="file path, default stdout")

    run = sub.add_parser("run", help="run one experiment")
    add_common(run)
    run.add_argument("--format", choices=("json", "csv", "svg"), default="json")

    table = sub.add_parser("table", help="sweep expansion orders")
    add_common(table, multi_n=True)
    table.add_argument("--format", choices=("text", "csv"), default="text")
    return p


def resolve(args, parser):
    base = dict(DEFAULTS[args.experiment])
    if args.desk:
        base.update(DESK[args.experiment])
    for key, val in base.items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)
    if args.sigma is None:
        args.sigma = 1e-6 if args.experiment == "pde-mol" else \
            (1e-2 if args.experiment == "pde-functional" else 1.0)
    randomized = args.experiment == "hessenberg" or args.data in ("uniform", "normal")
    if randomized and args.seed is None:
        parser.error(f"--seed is required for randomized runs "
                     f"({args.experiment!r} with data {args.data!r})")


def build_operator(args):
    if args.experiment == "laplacian":
        return LaplacianOperator(args.size, coef=args.sigma, shift=-args.gamma)
    if args.experiment in ("circulant", "power-compare"):
        return CirculantOperator(args.coeffs, args.size)
    if args.experiment == "hessenberg":
        return HessenbergOperator(args.size, args.seed)
    raise ValueError(args.experiment)


def config_echo(args):
    keys = ["experiment", "n", "size", "m", "tol", "max_terms", "fine_refine",
            "data", "seed", "sigma", "gamma", "coeffs", "model", "ell",
            "refine_tol", "start_mesh", "band_level", "band_weight"]
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def data_kwargs(args):
    kw = {}
    if args.band_level is not None:
        kw["level"] = args.band_level
    if args.band_weight is not None:
        kw["weight"] = args.band_weight
    return kw


def run_matrix(args, n):
    op = build_operator(args)
    f = make_data(op, args.data, seed=args.seed, **data_kwargs(args))
    res = adaptive_solve(op, f, n, tol=args.tol, m=args.m,
                         max_terms=args.max_terms, workers=args.workers)
    tf = fine_grid(args.m, args.fine_refine)
    v = res.evaluate(tf)
    ref = reference_solution(op, f, tf)
    num = np.max(np.abs(ref - v), axis=-1)
    den = np.maximum(np.max(np.abs(ref), axis=-1), 1e-300)
    rel = num / den
    payload = dict(ell_hat=res.ell_hat,
                   ell_per_point=[int(e) for e in res.ell_per_point],
                   err=float(rel.max()))
    if args.experiment == "power-compare":
        vp = power_reference(op, f, tf)
        relp = np.max(np.abs(ref - vp), axis=-1) / den
        payload["err_power"] = float(relp.max())
    return payload, tf, rel


def run_pde_mol(args, n):
    problem = model_problem_1(args.sigma) if args.model == 1 else model_problem_2()
    out = mol_solve(problem, args.size, n, tol=args.tol, m=args.m,
                    max_terms=args.max_terms, fine_refine=args.fine_refine,
                    workers=args.workers)
    payload = dict(ell_hat=out.ell_hat,
                   ell_per_point=[int(e) for e in out.ell_per_point],
                   err=out.err)
    return payload, out.times, out.rel_err


def run_pde_functional(args, n):
    problem = model_problem_1(args.sigma) if args.model == 1 else model_problem_2()
    t_grid = np.linspace(0.0, 2.0 * np.pi, args.m)
    x_grid = np.linspace(0.0, 1.0, args.size)
    v, u, err = functional_solve(problem, n, args.ell, t_grid, x_grid,
                                 refine_tol=args.refine_tol,
                                 start_mesh=args.start_mesh)
    num = np.max(np.abs(v - u), axis=-1)
    den = np.maximum(np.max(np.abs(u), axis=-1), 1e-300)
    payload = dict(ell_hat=args.ell, ell_per_point=[], err=err)
    return payload, t_grid, num / den


def run_one(args, n):
    if args.experiment == "pde-mol":
        return run_pde_mol(args, n)
    if args.experiment == "pde-functional":
        return run_pde_functional(args, n)
    return run_matrix(args, n)


def emit(text, output):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def svg_plot(times, rel, title):
    """Small dependency free log plot of the error curve."""
    w, h, ml, mb, mt, mr = 720, 440, 70, 50, 30, 20
    rel = np.maximum(np.asarray(rel, dtype=float), 1e-300)
    ylog = np.log10(rel)
    y0, y1 = float(np.floor(ylog.min())), float(np.ceil(ylog.max()))
    if y1 <= y0:
        y1 = y0 + 1.0
    x0, x1 = float(times[0]), float(times[-1])

    def sx(t):
        return ml + (t - x0) / (x1 - x0) * (w - ml - mr)

    def sy(v):
        return h - mb - (v - y0) / (y1 - y0) * (h - mb - mt)

    pts = " ".join(f"{sx(t):.2f},{sy(v):.2f}" for t, v in zip(times, ylog))
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w/2:.0f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{ml}" y1="{h-mb}" x2="{w-mr}" y2="{h-mb}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{h-mb}" stroke="black"/>',
    ]
    step = max(1, int(round((y1 - y0) / 6)))
    yv = y0
    while yv <= y1 + 1e-9:
        lines.append(
            f'<text x="{ml-8}" y="{sy(yv)+4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">1e{int(yv)}</text>')
        lines.append(f'<line x1="{ml-4}" y1="{sy(yv):.1f}" x2="{ml}" '
                     f'y2="{sy(yv):.1f}" stroke="black"/>')
        yv += step
    for frac, lab in ((0.0, "0"), (0.5, "pi"), (1.0, "2pi")):
        t = x0 + frac * (x1 - x0)
        lines.append(f'<line x1="{sx(t):.1f}" y1="{h-mb}" x2="{sx(t):.1f}" '
                     f'y2="{h-mb+4}" stroke="black"/>')
        lines.append(
            f'<text x="{sx(t):.1f}" y="{h-mb+18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{lab}</text>')
    lines.append(f'<polyline points="{pts}" fill="none" stroke="#1f6fb2" '
                 'stroke-width="1.5"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_run(args):
    t0 = time.perf_counter()
    payload, times, rel = run_one(args, args.n)
    wall_ms = round((time.perf_counter() - t0) * 1000.0, 3)
    warnings = []
    code = 0
    if payload["err"] > 1.0:
        warnings.append(
            f"relative error {payload['err']:.3e} exceeds 1; the computed "
            "approximation is unusable")
        code = 2
    doc = dict(config=config_echo(args), ell_hat=payload["ell_hat"],
               ell_per_point=payload["ell_per_point"], err=payload["err"],
               warnings=warnings, wall_ms=wall_ms)
    if "err_power" in payload:
        doc["err_power"] = payload["err_power"]
    if args.format == "json":
        emit(json.dumps(doc, indent=2) + "\n", args.output)
    elif args.format == "csv":
        rows = ["t,rel_err"]
        rows += [f"{t:.17g},{e:.17g}" for t, e in zip(times, rel)]
        emit("\n".join(rows) + "\n", args.output)
    else:
        emit(svg_plot(times, rel, f"{args.experiment}, order {args.n}"),
             args.output)
    for msg in warnings:
        print(f"warning: {msg}", file=sys.stderr)
    return code


def cmd_table(args):
    rows = []
    failed = False
    for n in args.n:
        try:
            payload, _, _ = run_one(args, n)
            epp = payload["ell_per_point"]
            lo = min(epp) if epp else payload["ell_hat"]
            hi = max(epp) if epp else payload["ell_hat"]
            rows.append((n, lo, hi, payload["err"]))
            if payload["err"] > 1.0:
                failed = True
        except NlevolError as exc:
            print(f"warning: n={n}: {exc}", file=sys.stderr)
            rows.append((n, None, None, None))
            failed = True
    if args.format == "csv":
        text = "n,ell_min,ell_max,err\n"
        for n, lo, hi, err in rows:
            text += f"{n},{lo if lo is not None else ''}," \
                    f"{hi if hi is not None else ''}," \
                    f"{'' if err is None else format(err, '.17g')}\n"
    else:
        text = f"{'n':>3} {'ell_min':>9} {'ell_max':>9} {'err':>12}\n"
        for n, lo, hi, err in rows:
            if lo is None:
                text += f"{n:>3} {'-':>9} {'-':>9} {'-':>12}\n"
            else:
                text += f"{n:>3} {lo:>9} {hi:>9} {err:>12.3e}\n"
    emit(text, args.output)
    return 2 if failed else 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    resolve(args, parser)
    try:
        if args.command == "run":
            code = cmd_run(args)
        else:
            code = cmd_table(args)
    except NlevolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
