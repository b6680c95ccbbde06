"""Command-line runner.

Subcommands: ``run`` (one case to completion with outputs), ``convergence``
(mesh-series error/standoff tables), ``verify`` (entropy-structure suites),
``mesh`` (generate or convert meshes).  All physical inputs are SI; runs
are deterministic for a fixed seed.  Options may be preloaded from a TOML
config file; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import cases, mesh as mesh_mod, solver1d, solver2d, thermo, verify
from .flux import FluxScheme
from .solver2d import Field2D

SCHEME_ALIASES = {"godunov": "godunov", "hll": "hll",
                  "relax": "pressure_relax", "pressure_relax": "pressure_relax"}


def parse_scheme(name: str) -> FluxScheme:
    try:
        return FluxScheme(SCHEME_ALIASES[name.strip().lower()])
    except KeyError:
        raise SystemExit(f"unknown scheme {name!r}; pick from "
                         f"{sorted(SCHEME_ALIASES)}") from None


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaxfv",
        description="Finite-volume solver for multicomponent flows in "
                    "thermal nonequilibrium")
    parser.add_argument("--config", type=Path,
                        help="TOML file with default option values")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one case")
    run.add_argument("--case", required=True,
                     choices=sorted(cases.CASES_1D) + sorted(cases.CASES_2D))
    run.add_argument("--scheme", default="hll")
    run.add_argument("--n", type=int, default=100,
                     help="1D cell count / 2D grid parameter or series level")
    run.add_argument("--t-end", type=float, default=None,
                     help="override the case's end time (1D)")
    run.add_argument("--target-drop", type=float, default=1e4,
                     help="steady residual drop target (2D)")
    run.add_argument("--max-iter", type=int, default=50_000)
    run.add_argument("--cfl", type=float, default=0.5)
    run.add_argument("--out", type=Path, default=Path("."))
    run.add_argument("--output-times", default="",
                     help="comma-separated intermediate output times (1D)")
    run.add_argument("--audit", action="store_true", default=True)
    run.add_argument("--no-audit", dest="audit", action="store_false")
    run.add_argument("--strict", action="store_true",
                     help="exit nonzero on any audit violation")
    run.add_argument("--seed", type=int, default=0)

    conv = sub.add_parser("convergence", help="mesh-series error tables")
    conv.add_argument("--case", required=True,
                      choices=sorted(cases.CASES_1D) + sorted(cases.CASES_2D))
    conv.add_argument("--schemes", default="godunov,hll,relax")
    conv.add_argument("--resolutions", default="",
                      help="comma-separated cell counts / grid parameters")
    conv.add_argument("--target-drop", type=float, default=1e4)
    conv.add_argument("--max-iter", type=int, default=50_000)
    conv.add_argument("--out", type=Path, default=Path("."))

    ver = sub.add_parser("verify", help="entropy-structure verification suites")
    ver.add_argument("--suite", default="all",
                     choices=["all", "congruence", "convexity", "variational",
                              "h_theorem"])
    ver.add_argument("--trials", type=int, default=1000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--species", default="N2,O2,He",
                     help="comma-separated species names from the database")
    ver.add_argument("--out", type=Path, default=None,
                     help="write the check report CSV here")

    msh = sub.add_parser("mesh", help="generate or convert meshes")
    msh.add_argument("--generate", choices=["rect", "cylinder", "double_cone"])
    msh.add_argument("--params", default="",
                     help="key=value pairs, e.g. nx=20,ny=20")
    msh.add_argument("--input", type=Path, help="read an existing native mesh")
    msh.add_argument("--out", type=Path, help="write native mesh here")
    msh.add_argument("--vtk", type=Path, help="write VTK file here")
    return parser


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser):
    if not args.config:
        return args
    table = load_config(args.config)
    section = dict(table.get(args.command, {}))
    section.update({k: v for k, v in table.items() if not isinstance(v, dict)})
    argv_flags = {a.lstrip("-").replace("-", "_") for a in sys.argv
                  if a.startswith("--")}
    for key, value in section.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and attr not in argv_flags:
            setattr(args, attr, type(getattr(args, attr))(value)
                    if getattr(args, attr) is not None else value)
    return args


def cmd_run(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    scheme = parse_scheme(args.scheme)
    if args.case in cases.CASES_1D:
        return _run_1d(args, scheme)
    return _run_2d(args, scheme)


def _run_1d(args, scheme) -> int:
    cfg = cases.CASES_1D[args.case](args.n, scheme=scheme)
    t_end = args.t_end if args.t_end is not None else cfg.t_end
    grid = cfg.grid()
    states = cfg.initial_states()
    out_times = sorted(float(t) for t in args.output_times.split(",") if t)
    remaining = list(out_times)
    worst = {"max_principle": 0.0, "entropy_min": 0.0, "entropy_cell": 0.0}

    def on_step(t, current, rep):
        worst["max_principle"] = max(worst["max_principle"],
                                     rep.max_principle_violation)
        worst["entropy_min"] = max(worst["entropy_min"],
                                   rep.entropy_min_violation)
        if rep.entropy_cell_residual is not None:
            worst["entropy_cell"] = max(worst["entropy_cell"],
                                        rep.entropy_cell_residual)
        while remaining and t >= remaining[0] - 1e-14:
            tag = f"{args.case}_{scheme.kind}_n{args.n}_t{remaining[0]:.6f}.csv"
            solver1d.write_csv(args.out / tag, grid, current, cfg.species)
            remaining.pop(0)

    states, reports = solver1d.run(states, grid, scheme, t_end, cfg.species,
                                   cfl=args.cfl, audit=args.audit,
                                   entropy_audit=args.audit, on_step=on_step)
    final = args.out / f"{args.case}_{scheme.kind}_n{args.n}_final.csv"
    solver1d.write_csv(final, grid, states, cfg.species)
    print(f"{args.case}: {len(reports)} steps to t={t_end}, wrote {final}")
    if args.audit:
        print(f"audits: mass-fraction {worst['max_principle']:.2e}, "
              f"entropy-min {worst['entropy_min']:.2e}, "
              f"entropy-cell {worst['entropy_cell']:.2e}")
        violated = (worst["max_principle"] > 1e-12
                    or worst["entropy_min"] > 1e-10
                    or worst["entropy_cell"] > 1e-10)
        if args.strict and violated:
            print("audit violation in strict mode", file=sys.stderr)
            return 2
    return 0


def _run_2d(args, scheme) -> int:
    maker = cases.CASES_2D[args.case]
    if args.case == "sphere":
        cfg = maker(args.n, scheme=scheme, target_drop=args.target_drop)
    else:
        cfg = maker(level=max(args.n, 0) if args.n < 10 else 0, scheme=scheme,
                    target_drop=args.target_drop)
    mesh = cfg.mesh()
    field = Field2D.uniform(mesh, cfg.species, cfg.freestream)
    audit_every = 10 if args.audit else 0
    try:
        field, reports = solver2d.solve_steady(
            field, scheme, cfg.freestream, target_drop=cfg.target_drop,
            max_iter=args.max_iter, cfl=args.cfl, audit_every=audit_every)
    except AssertionError as err:
        print(f"audit failure: {err}", file=sys.stderr)
        return 2
    tag = f"{args.case}_{scheme.kind}_n{args.n}"
    log = args.out / f"{tag}_residuals.csv"
    with open(log, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "residual_drop"]
                        + [f"residual_{k}" for k in range(
                            cfg.species.n_conserved(2))])
        for rep in reports:
            writer.writerow([rep.iteration, f"{rep.residual_drop:.6e}"]
                            + [f"{r:.6e}" for r in rep.residual_l2])
    vtk = args.out / f"{tag}.vtk"
    mesh_mod.write_vtk(vtk, mesh, solver2d.cell_primitive_arrays(field))
    drop = reports[-1].residual_drop
    print(f"{args.case}: {reports[-1].iteration} iterations, residual drop "
          f"{drop:.2e}, wrote {vtk} and {log}")
    if args.case == "sphere":
        d = solver2d.shock_standoff(field, cfg.freestream)
        print(f"shock standoff on y=0: "
              f"{'no shock' if d is None else f'{d:.6e} m'}")
    if args.strict and drop < cfg.target_drop:
        print("did not reach the residual target in strict mode",
              file=sys.stderr)
        return 2
    return 0


def cmd_convergence(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    schemes = [parse_scheme(s) for s in args.schemes.split(",") if s]
    if args.case in cases.CASES_1D:
        res = [int(r) for r in (args.resolutions or "100,200,400").split(",")]
        rows = []
        for scheme in schemes:
            errs = []
            for n in res:
                cfg = cases.CASES_1D[args.case](n, scheme=scheme)
                grid = cfg.grid()
                states, _ = solver1d.run(cfg.initial_states(), grid, scheme,
                                         cfg.t_end, cfg.species, audit=False)
                prim = thermo.conserved_to_primitive(states, cfg.species, 1)
                rho_e, u_e, p_e = cfg.exact_primitive(grid.centers, cfg.t_end)
                l1 = float(np.abs(prim.rho - rho_e).sum() * grid.dx)
                rows.append({"scheme": scheme.kind, "n": n, "l1_rho": l1,
                             "linf_u": float(np.abs(prim.v[0] - u_e).max()),
                             "linf_p": float(np.abs(prim.p - p_e).max())})
                errs.append(l1)
            for (na, ea), (nb, eb) in zip(zip(res, errs), zip(res[1:], errs[1:])):
                order = np.log(ea / eb) / np.log(nb / na)
                print(f"{scheme.kind}: N={na}->{nb} observed order {order:.3f}")
        path = args.out / f"convergence_{args.case}.csv"
        _write_rows(path, rows, ["scheme", "n", "l1_rho", "linf_u", "linf_p"])
        print(f"wrote {path}")
        return 0

    res = [int(r) for r in (args.resolutions or "20,40").split(",")]
    rows = []
    for scheme in schemes:
        for n in res:
            cfg = cases.CASES_2D[args.case](n, scheme=scheme,
                                            target_drop=args.target_drop)
            field = Field2D.uniform(cfg.mesh(), cfg.species, cfg.freestream)
            field, reports = solver2d.solve_steady(
                field, scheme, cfg.freestream, target_drop=cfg.target_drop,
                max_iter=args.max_iter)
            d = solver2d.shock_standoff(field, cfg.freestream)
            rows.append({"scheme": scheme.kind, "n": n,
                         "standoff": "" if d is None else d,
                         "iterations": reports[-1].iteration,
                         "residual_drop": reports[-1].residual_drop})
            print(f"{scheme.kind} n={n}: standoff="
                  f"{'none' if d is None else f'{d:.6e}'} "
                  f"({reports[-1].iteration} iters)")
    path = args.out / f"convergence_{args.case}.csv"
    _write_rows(path, rows,
                ["scheme", "n", "standoff", "iterations", "residual_drop"])
    print(f"wrote {path}")
    return 0


def _write_rows(path, rows, fields) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def cmd_verify(args) -> int:
    names = [s for s in args.species.split(",") if s]
    species = thermo.SpeciesSet.bundled(names)
    if args.suite == "all":
        reports = verify.run_all(species, dim=1, trials=args.trials,
                                 seed=args.seed)
    else:
        rng = np.random.default_rng(args.seed)
        gamma = float(verify.relax.default_gamma())
        if args.suite == "congruence":
            u = verify.random_states(species, 1, args.trials, rng)
            reports = [verify.check_eta_congruence(u, species, 1)]
        elif args.suite == "convexity":
            w = verify.random_relax_states(species, 1, args.trials, rng, gamma)
            reports = [verify.check_zeta_convexity(w, species, 1, gamma)]
        elif args.suite == "variational":
            failed = 0
            worst = 0.0
            for _ in range(args.trials):
                u = verify.random_states(species, 1, 1, rng)[:, 0]
                prim = thermo.conserved_to_primitive(u, species, 1)
                rep = verify.check_variational(species, prim.Y,
                                               1.0 / prim.rho, prim.e_t,
                                               prim.e_v, gamma)
                failed += rep.n_failed
                worst = max(worst, rep.worst_margin)
            reports = [verify.CheckReport("variational", args.trials, failed,
                                          worst)]
        else:
            w0 = verify.random_relax_states(species, 1, args.trials, rng,
                                            gamma)
            reports = [verify.check_h_theorem(w0, species, 1, gamma,
                                              epsilon=0.04, t_end=1.0)]
    ok = True
    for rep in reports:
        status = "pass" if rep.passed else "FAIL"
        print(f"[{status}] {rep.name}: {rep.n_states} states, "
              f"{rep.n_failed} failed, worst margin {rep.worst_margin:.3e} "
              f"{rep.detail}")
        ok &= rep.passed
    if args.out:
        verify.write_report_csv(args.out, reports)
        print(f"wrote {args.out}")
    return 0 if ok else 1


def cmd_mesh(args) -> int:
    if args.generate:
        params = {}
        for pair in args.params.split(","):
            if not pair:
                continue
            key, _, value = pair.partition("=")
            try:
                params[key] = int(value)
            except ValueError:
                params[key] = float(value)
        if args.generate == "rect":
            m = mesh_mod.gen_rect(int(params.pop("nx", 10)),
                                  int(params.pop("ny", 10)))
        elif args.generate == "cylinder":
            m = mesh_mod.gen_cylinder_ogrid(
                int(params.pop("n_radial", 20)),
                int(params.pop("n_theta", 20)),
                float(params.pop("body_radius", 1.0)),
                outer_radius=params.pop("outer_radius", None))
        else:
            m = mesh_mod.gen_double_cone(
                resolution=int(params.pop("resolution", 24)))
    elif args.input:
        m = mesh_mod.read_mesh(args.input)
    else:
        print("mesh: need --generate or --input", file=sys.stderr)
        return 2
    print(f"mesh: {m.n_cells} cells, {m.n_vertices} vertices, "
          f"closure {m.closure_residual():.2e}, "
          f"shape regularity {m.shape_regularity():.3f}")
    if args.out:
        mesh_mod.write_mesh(m, args.out)
        print(f"wrote {args.out}")
    if args.vtk:
        mesh_mod.write_vtk(args.vtk, m)
        print(f"wrote {args.vtk}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config(args, parser)
    handler = {"run": cmd_run, "convergence": cmd_convergence,
               "verify": cmd_verify, "mesh": cmd_mesh}[args.command]
    try:
        return handler(args)
    except (thermo.AdmissibilityError, thermo.CompositionError,
            mesh_mod.MeshError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
