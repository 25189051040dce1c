"""``entherm`` command line: sweep, canonical, compare, correlations, analytic, plot."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analytic, io, svg
from .canonical import canonical_curve, default_betas, ground_degeneracy
from .eigensolver import full_spectrum
from .hamiltonian import CoupledSystem
from .lattice import ClusterSpec, build_cluster, build_coupled_model
from .thermo import SolverSettings, compare_sweep, lambda_grid, max_abs_delta, probe

log = logging.getLogger("entherm")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARTIAL = 3


# ---------------------------------------------------------------------------
# config plumbing

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML/JSON run configuration")
    p.add_argument("--geometry", choices=("chain", "square", "triangular"), help="cluster kind")
    p.add_argument("--na", type=int, help="sites per layer")
    p.add_argument("--jb-over-ja", type=float, help="J_B/J_A (J_A = 1 unless set in the config)")
    p.add_argument("--lambda-max", type=float)
    p.add_argument("--dlambda", type=float, help="grid step and finite-difference step (default 0.02)")
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float, help="Lanczos residual tolerance")
    p.add_argument("--force", action="store_true", default=None,
                   help="compute entanglement data even for degenerate ground states")
    p.add_argument("--out", type=Path, help="output directory")


def resolve_config(args) -> io.RunConfig:
    if args.config is not None:
        cfg = io.load_config(args.config)
    else:
        cfg = io.RunConfig(geometry=ClusterSpec("chain", args.na or 8))
    over = {}
    if args.geometry is not None or args.na is not None:
        kind = args.geometry or cfg.geometry.kind
        n = args.na or cfg.geometry.n_sites
        over["geometry"] = ClusterSpec(kind, n)
    if args.jb_over_ja is not None:
        over["j_b"] = args.jb_over_ja * cfg.j_a
    for flag, name in (("lambda_max", "lambda_max"), ("dlambda", "delta_lambda"),
                       ("seed", "seed"), ("tol", "tol"), ("force", "force")):
        v = getattr(args, flag, None)
        if v is not None:
            over[name] = v
    if args.out is not None:
        over["out"] = str(args.out)
    return replace(cfg, **over) if over else cfg


def _system(cfg: io.RunConfig) -> CoupledSystem:
    return CoupledSystem(build_coupled_model(build_cluster(cfg.geometry), cfg.j_a, cfg.j_b, 0.0))


def _settings(cfg: io.RunConfig) -> SolverSettings:
    return SolverSettings(cfg.tol, cfg.max_iter, cfg.seed, cfg.degeneracy_tol, cfg.force)


def _outdir(cfg: io.RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _analysis(cfg, correlations=False, probes=True):
    system = _system(cfg)
    spectrum = full_spectrum(system.h_a)
    grid = lambda_grid(cfg.lambda_max, cfg.delta_lambda, cfg.lambda_min)
    log.info("sweep: %s N_A=%d, %d grid points, sector dim %d",
             cfg.geometry.kind, cfg.geometry.n_sites, grid.size, system.basis.dim)
    res = compare_sweep(system, grid, _settings(cfg), spectrum, correlations)
    probe_records = []
    if probes:
        for lam in cfg.probes:
            probe_records += probe(system, lam, cfg.delta_lambda, _settings(cfg), spectrum).records
    return res, probe_records


def _status(records) -> int:
    return EXIT_PARTIAL if any(r.error for r in records) else EXIT_OK


# ---------------------------------------------------------------------------
# subcommands

def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    out = _outdir(cfg)
    res, probes = _analysis(cfg, probes=not args.no_probes)
    io.write_csv(out / "sweep.csv", io.SWEEP_HEADER, io.sweep_rows(res.records))
    if probes:
        io.write_csv(out / "probes.csv", io.SWEEP_HEADER, io.sweep_rows(probes))
    io.write_metadata(out, "sweep", io.ResultBundle(cfg, "sweep", res.records + probes))
    return _status(res.records + probes)


def cmd_compare(args) -> int:
    cfg = resolve_config(args)
    out = _outdir(cfg)
    res, probes = _analysis(cfg, probes=not args.no_probes)
    io.write_csv(out / "compare.csv", io.COMPARE_HEADER, io.compare_rows(res.records + probes))
    io.write_metadata(out, "compare", io.ResultBundle(cfg, "compare", res.records + probes))
    return _status(res.records + probes)


def cmd_correlations(args) -> int:
    cfg = resolve_config(args)
    out = _outdir(cfg)
    res, _ = _analysis(cfg, correlations=True, probes=False)
    header, rows = io.correlation_rows(res.correlations)
    io.write_csv(out / "correlations.csv", header, rows)
    if res.correlations:
        first = next(iter(res.correlations.values()))
        mx = max_abs_delta(res.correlations.values())
        d = first.distances if first.distances is not None else [None] * len(mx)
        io.write_csv(out / "correlations_max.csv", ("i", "j", "distance", "max_abs_delta_c"),
                     [(int(p[0]), int(p[1]), dd, m) for p, dd, m in zip(first.pairs, d, mx)])
    io.write_metadata(out, "correlations", io.ResultBundle(cfg, "correlations", res.records))
    return _status(res.records)


def cmd_canonical(args) -> int:
    cfg = resolve_config(args)
    out = _outdir(cfg)
    system = _system(cfg)
    spectrum = full_spectrum(system.h_a)
    betas = default_betas(cfg.t_min, cfg.t_max, cfg.n_betas)
    curve = canonical_curve(spectrum, betas)
    io.write_csv(out / "canonical.csv", io.CANONICAL_HEADER, io.canonical_rows(curve, cfg.geometry.n_sites))
    g = ground_degeneracy(spectrum.eigenvalues)
    extra = {
        "ground_energy_a": float(spectrum.eigenvalues[0]),
        "ground_degeneracy_a": g,
        "zero_temperature_entropy": f"S -> ln({g}) as beta -> inf",
    }
    io.write_metadata(out, "canonical", io.ResultBundle(cfg, "canonical", extra=extra))
    return EXIT_OK


def cmd_analytic(args) -> int:
    out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    try:
        rows = analytic.analytic_table(args.kind, args.e_a, args.e_b, args.n_theta, args.theta_max)
    except analytic.UnstableParametersError as exc:
        print(f"entherm analytic: {exc}", file=sys.stderr)
        return EXIT_ERROR
    io.write_csv(out / f"analytic_{args.kind}.csv", io.ANALYTIC_HEADER, rows)
    return EXIT_OK


def _col(rows, key):
    return np.array([math.nan if r.get(key) is None or isinstance(r.get(key), str) else r[key] for r in rows])


def figures(indir: Path) -> dict[str, str]:
    """SVG text for every figure whose input CSVs exist in ``indir``."""
    figs: dict[str, str] = {}
    sweep = io.read_csv(indir / "sweep.csv")[1] if (indir / "sweep.csv").exists() else None
    canon = io.read_csv(indir / "canonical.csv")[1] if (indir / "canonical.csv").exists() else None
    if sweep is not None:
        lam = _col(sweep, "lambda")
        figs["fig3_entropy"] = svg.render([svg.Series(lam, _col(sweep, "s_a_per_site"), "S_A/N_A", marker=True)],
                                          "Entanglement entropy", "lambda/J_A", "S_A/N_A")
        figs["fig3_energy"] = svg.render([svg.Series(lam, _col(sweep, "e_a_per_site"), "E_A/N_A", marker=True)],
                                         "Subsystem energy", "lambda/J_A", "E_A/(J_A N_A)")
        figs["fig5_temperature"] = svg.render([svg.Series(lam, _col(sweep, "t_a"), "T_A", marker=True)],
                                              "Effective temperature", "lambda/J_A", "T_A/J_A")
        figs["fig6_fidelity"] = svg.render([svg.Series(lam, _col(sweep, "fidelity_per_site"), "F^(1/N_A)", marker=True)],
                                           "Fidelity per site", "lambda/J_A", "F^(1/N_A)")
    if sweep is not None or canon is not None:
        for key, ck, label in (("s", "s_a_per_site", "S/N_A"), ("e", "e_a_per_site", "E/(J_A N_A)")):
            series = []
            if canon is not None:
                series.append(svg.Series(_col(canon, "t"), _col(canon, f"{key}_per_site"), "canonical"))
            if sweep is not None:
                series.append(svg.Series(_col(sweep, "t_a"), _col(sweep, ck), "ground state vs T_A", marker=True))
            figs[f"fig4_{key}"] = svg.render(series, "Reduced vs canonical", "T/J_A", label, logx=True)
    if (indir / "correlations.csv").exists():
        rows = io.read_csv(indir / "correlations.csv")[1]
        keys = sorted({(int(r["i"]), int(r["j"])) for r in rows})
        series = []
        for i, j in keys:
            sel = [r for r in rows if int(r["i"]) == i and int(r["j"]) == j]
            d = sel[0]["distance"]
            label = f"|i-j|={int(d)}" if d is not None else f"({i},{j})"
            series.append(svg.Series(_col(sel, "lambda"), _col(sel, "delta_c"), label))
        figs["fig7_delta_c"] = svg.render(series, "Correlation difference", "lambda/J_A", "delta C")
    if (indir / "correlations_max.csv").exists():
        rows = io.read_csv(indir / "correlations_max.csv")[1]
        x = _col(rows, "distance")
        if np.all(np.isnan(x)):
            x = np.arange(len(rows), dtype=float)
        figs["fig8_max_delta_c"] = svg.render([svg.Series(x, _col(rows, "max_abs_delta_c"), "max |delta C|", marker=True)],
                                              "Maximum correlation difference", "distance (or pair index)", "max |delta C|")
    return figs


def cmd_plot(args) -> int:
    indir = Path(args.input)
    out = Path(args.out or indir)
    out.mkdir(parents=True, exist_ok=True)
    figs = figures(indir)
    if not figs:
        print(f"entherm plot: no CSV inputs found in {indir}", file=sys.stderr)
        return EXIT_ERROR
    for name, text in figs.items():
        svg.save(out / f"{name}.svg", text)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entherm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, text in (
        ("sweep", cmd_sweep, "lambda sweep: S_A, E_A, B_A, fidelity -> sweep.csv"),
        ("compare", cmd_compare, "reduced vs canonical comparison table -> compare.csv"),
        ("correlations", cmd_correlations, "spin-correlation differences -> correlations*.csv"),
        ("canonical", cmd_canonical, "canonical curves of the isolated layer -> canonical.csv"),
    ):
        p = sub.add_parser(name, help=text)
        _common(p)
        if name in ("sweep", "compare"):
            p.add_argument("--no-probes", action="store_true", help="skip the large-lambda probe points")
        p.set_defaults(func=fn)

    p = sub.add_parser("analytic", help="closed-form boson/fermion tables -> analytic_<kind>.csv")
    p.add_argument("--kind", choices=("boson", "fermion"), required=True)
    p.add_argument("--e-a", type=float, default=1.0, help="omega_A or epsilon_A")
    p.add_argument("--e-b", type=float, default=1.0, help="omega_B or epsilon_B")
    p.add_argument("--n-theta", type=int, default=200)
    p.add_argument("--theta-max", type=float)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("plot", help="SVG figures from CSVs in a results directory")
    p.add_argument("input", type=Path, nargs="?", default=Path("results"))
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"entherm {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
