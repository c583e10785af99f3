"""Batch command-line front end.

Subcommands wire the generators and analyses into reproducible runs: every
command writes its artifacts plus a manifest JSON echoing the fully
resolved configuration.  Scientific verdicts are outputs, never exit codes;
a run fails (exit 1) only on structural problems, and invalid parameters
exit 2.  Identical configuration and inputs give byte-identical artifacts;
the manifest isolates the one volatile field (timestamp_utc).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .axioms import check_axioms
from .container import read_container, write_container
from .dissipation import dissipation_report
from .energy import (MollifierPairing, divfree_residual, five_term_balance,
                     global_energy, weak_residual_k1, weak_residual_k2)
from .ensemble import make_ensemble
from .errors import ContainerError, OstfError
from .fields import (attach_pressure, downsample_half, make_grid,
                     random_besov_field, shear_flow, taylor_green)
from .grid import geometric_ladder
from .mollifier import make_mollifier
from .regularity import onsager_indicator
from .structure import mixed_dc, structure_function
from .testfn import TestFunction, centered_support

GENERATORS = ("taylor-green", "shear", "random-besov")


def parse_psi_mode(token: str, dim: int) -> tuple[tuple[int, ...], str]:
    """'m0' -> constant; 'cos:1,0' / 'sin:2,1' -> trig mode."""
    token = token.strip()
    if token == "m0":
        return (0,) * dim, "cos"
    try:
        kind, modes = token.split(":")
        mode = tuple(int(p) for p in modes.split(","))
    except ValueError as exc:
        raise ValueError(
            f"bad psi-mode {token!r}; use 'm0' or 'cos:1,0' or 'sin:2,1'"
        ) from exc
    if kind not in ("cos", "sin") or len(mode) != dim:
        raise ValueError(f"bad psi-mode {token!r} for dim {dim}")
    return mode, kind


def parse_window(token: str | None) -> tuple[int, int] | None:
    if token is None:
        return None
    lo, hi = token.split(":")
    return int(lo), int(hi)


def _ladder(ensemble, args):
    grid = ensemble.grid
    eps_max = args.eps_max if args.eps_max is not None else grid.extent / 8.0
    eps_min = args.eps_min if args.eps_min is not None else 3.0 * grid.h
    return geometric_ladder(eps_min, eps_max, args.eps_count)


def _psi(ensemble, args) -> TestFunction:
    mode, kind = parse_psi_mode(args.psi_mode, ensemble.grid.dim)
    return TestFunction(mode=mode, kind=kind,
                        t_support=centered_support(ensemble.times))


def write_manifest(stem: Path, command: str, config: dict) -> None:
    payload = {
        "command": command,
        "config": config,
        "package": "ostf",
        "package_version": __version__,
        "timestamp_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    stem.parent.mkdir(parents=True, exist_ok=True)
    with open(f"{stem}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _config_of(args) -> dict:
    skip = {"func"}
    return {k: (str(v) if isinstance(v, Path) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def _out_stem(args, default_suffix: str) -> Path:
    if args.out is not None:
        return Path(args.out)
    src = Path(args.inp)
    return src.parent / f"{src.stem}.{default_suffix}"


def cmd_generate(args) -> int:
    grid = make_grid(args.dim, args.n)
    extra = {"generator": args.generator, "seed": args.seed}
    if args.generator == "taylor-green":
        fields = [taylor_green(grid, snapshots=args.snapshots)]
    elif args.generator == "shear":
        fields = [shear_flow(grid, snapshots=args.snapshots)]
    else:
        extra["alpha"] = args.alpha
        fields = []
        for m in range(args.members):
            fld = random_besov_field(grid, args.alpha, args.seed,
                                     k_min=args.k_min, k_max=args.k_max,
                                     member=m, snapshots=args.snapshots)
            if args.with_pressure:
                fld = attach_pressure(fld)
            fields.append(fld)
    ensemble = make_ensemble(fields)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_container(ensemble, out, extra_meta=extra)
    write_manifest(out.with_suffix(""), "generate", _config_of(args))
    print(f"wrote {out} ({ensemble.size} member(s), n={grid.n}, dim={grid.dim})")
    return 0


def cmd_validate(args) -> int:
    ensemble = read_container(args.inp)
    report = check_axioms(ensemble, threads=args.threads)
    stem = _out_stem(args, "axioms")
    stem.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{stem}.json").write_text(report.to_json() + "\n", encoding="utf-8")
    write_manifest(stem, "validate", _config_of(args))
    print(f"axioms passed={report.passed} symmetry={report.symmetry_residual:.3e} "
          f"consistency={report.consistency_residual:.3e}")
    return 0


def cmd_structure(args) -> int:
    ensemble = read_container(args.inp)
    curve = structure_function(ensemble, args.q, _ladder(ensemble, args),
                               window=parse_window(args.window),
                               threads=args.threads)
    stem = _out_stem(args, f"structure-q{args.q:g}")
    stem.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{stem}.csv").write_text(curve.to_csv(), encoding="utf-8")
    fit = {"q": curve.q, "alpha_fit": None if curve.degenerate else curve.alpha_fit,
           "window": list(curve.window),
           "residual": None if curve.degenerate else curve.residual,
           "degenerate": curve.degenerate}
    Path(f"{stem}.fit.json").write_text(
        json.dumps(fit, sort_keys=True) + "\n", encoding="utf-8")
    write_manifest(stem, "structure", _config_of(args))
    alpha = "n/a" if curve.degenerate else f"{curve.alpha_fit:.4f}"
    print(f"structure q={args.q:g}: alpha_fit={alpha}")
    return 0


def cmd_mixed_dc(args) -> int:
    ensemble = read_container(args.inp)
    curves = mixed_dc(ensemble, _ladder(ensemble, args),
                      window=parse_window(args.window), threads=args.threads)
    stem = _out_stem(args, "mixed-dc")
    stem.parent.mkdir(parents=True, exist_ok=True)
    for label, curve in (("q2", curves.velocity_q2), ("q3", curves.velocity_q3),
                         ("p32", curves.pressure_q32)):
        Path(f"{stem}.{label}.csv").write_text(curve.to_csv(), encoding="utf-8")
    lines = ["eps,combined"]
    for e, v in zip(curves.velocity_q2.eps_ladder, curves.combined):
        lines.append(f"{e:.17g},{v:.17g}")
    Path(f"{stem}.combined.csv").write_text("\n".join(lines) + "\n",
                                            encoding="utf-8")
    write_manifest(stem, "mixed-dc", _config_of(args))
    print("mixed-dc curves written")
    return 0


def cmd_onsager(args) -> int:
    ensemble = read_container(args.inp)
    curve = structure_function(ensemble, 3.0, _ladder(ensemble, args),
                               window=parse_window(args.window),
                               threads=args.threads)
    ind = onsager_indicator(curve)
    stem = _out_stem(args, "onsager")
    stem.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{stem}.json").write_text(ind.to_json() + "\n", encoding="utf-8")
    Path(f"{stem}.csv").write_text(ind.to_csv(), encoding="utf-8")
    write_manifest(stem, "onsager", _config_of(args))
    print(f"onsager: verdict={ind.verdict} trend_slope={ind.trend_slope:.4f}")
    return 0


def cmd_dissipation(args) -> int:
    ensemble = read_container(args.inp)
    report = dissipation_report(ensemble, _ladder(ensemble, args),
                                _psi(ensemble, args), profile=args.profile,
                                threads=args.threads)
    stem = _out_stem(args, "dissipation")
    stem.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{stem}.json").write_text(report.to_json() + "\n", encoding="utf-8")
    Path(f"{stem}.csv").write_text(report.to_csv(), encoding="utf-8")
    write_manifest(stem, "dissipation", _config_of(args))
    print(f"dissipation: verdict={report.verdict}")
    return 0


def cmd_balance(args) -> int:
    ensemble = read_container(args.inp)
    psi = _psi(ensemble, args)
    rows = []
    for eps in _ladder(ensemble, args):
        mol = make_mollifier(ensemble.grid, eps, args.profile)
        rows.append(five_term_balance(ensemble, mol, psi,
                                      threads=args.threads))
    stem = _out_stem(args, "balance")
    stem.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{stem}.json").write_text(
        "[" + ",\n ".join(r.to_json() for r in rows) + "]\n", encoding="utf-8")
    lines = ["eps,A1,A2,A3,A4,A5,sum"]
    for r in rows:
        cells = ",".join(f"{t:.17g}" for t in r.terms)
        lines.append(f"{r.eps:.17g},{cells},{r.sum:.17g}")
    Path(f"{stem}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_manifest(stem, "balance", _config_of(args))
    print(f"balance: {len(rows)} rungs, max |sum| = "
          f"{max(abs(r.sum) for r in rows):.3e}")
    return 0


def cmd_residuals(args) -> int:
    ensemble = read_container(args.inp)
    coarse = make_ensemble([downsample_half(m) for m in ensemble.members],
                           ensemble.weights)
    dim = ensemble.grid.dim
    support = centered_support(ensemble.times)

    def phi_of(mode, kind):
        return TestFunction(mode=mode, kind=kind, t_support=support)

    modes = []
    for mx in range(0, args.max_mode + 1):
        for my in range(0, (args.max_mode + 1) if dim >= 2 else 1):
            mode = (mx, my)[:dim]
            if any(mode):
                modes.append(mode)
    rows = ["phi_mode,i,j,eps,residual,floor"]
    for mode in modes:
        for kind in ("cos", "sin"):
            phi = phi_of(mode, kind)
            tag = f"{kind}:" + ",".join(str(m) for m in mode)
            for i in range(dim):
                r = weak_residual_k1(ensemble, phi, i)
                f = abs(r - weak_residual_k1(coarse, phi, i))
                rows.append(f"k1:{tag},{i},-1,0,{r:.17g},{f:.17g}")
            r = divfree_residual(ensemble, phi, k=1)
            f = abs(r - divfree_residual(coarse, phi, k=1))
            rows.append(f"div1:{tag},-1,-1,0,{r:.17g},{f:.17g}")
    eps = ensemble.grid.extent / 8.0
    psi = _psi(ensemble, args)
    mol = make_mollifier(ensemble.grid, eps, args.profile)
    mol_c = make_mollifier(coarse.grid, eps, args.profile)
    for i in range(dim):
        for j in range(i, dim):
            r = weak_residual_k2(ensemble, MollifierPairing(mol, psi), i, j)
            f = abs(r - weak_residual_k2(coarse, MollifierPairing(mol_c, psi), i, j))
            rows.append(f"k2:{args.psi_mode},{i},{j},{eps:.17g},{r:.17g},{f:.17g}")
    stem = _out_stem(args, "residuals")
    stem.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{stem}.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    write_manifest(stem, "residuals", _config_of(args))
    print(f"residuals: {len(rows) - 1} rows")
    return 0


def cmd_energy(args) -> int:
    ensemble = read_container(args.inp)
    lines = ["t,energy"]
    for t in ensemble.times:
        lines.append(f"{t:.17g},{global_energy(ensemble, float(t)):.17g}")
    stem = _out_stem(args, "energy")
    stem.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{stem}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_manifest(stem, "energy", _config_of(args))
    print(f"energy: {ensemble.times.size} snapshots")
    return 0


def _add_common_analysis(sp, psi: bool = True) -> None:
    sp.add_argument("--in", dest="inp", required=True, help="input container")
    sp.add_argument("--out", default=None, help="output stem")
    sp.add_argument("--eps-min", type=float, default=None)
    sp.add_argument("--eps-max", type=float, default=None)
    sp.add_argument("--eps-count", type=int, default=6)
    sp.add_argument("--window", default=None, help="fit window 'lo:hi'")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker cap (default: OSTF_THREADS or 1)")
    if psi:
        sp.add_argument("--psi-mode", default="m0",
                        help="'m0', 'cos:1,0' or 'sin:2,1'")
        sp.add_argument("--profile", default="bump",
                        choices=("bump", "quartic"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ostf",
        description="Ensemble statistics for periodic incompressible flow fields")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generator ensemble container")
    g.add_argument("--generator", required=True, choices=GENERATORS)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--members", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--alpha", type=float, default=None)
    g.add_argument("--k-min", type=int, default=2)
    g.add_argument("--k-max", type=int, default=None)
    g.add_argument("--snapshots", type=int, default=None)
    g.add_argument("--with-pressure", action=argparse.BooleanOptionalAction,
                   default=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    for name, fn, psi in (("validate", cmd_validate, False),
                          ("structure", cmd_structure, False),
                          ("mixed-dc", cmd_mixed_dc, False),
                          ("onsager", cmd_onsager, False),
                          ("dissipation", cmd_dissipation, True),
                          ("balance", cmd_balance, True),
                          ("residuals", cmd_residuals, True),
                          ("energy", cmd_energy, False)):
        sp = sub.add_parser(name)
        _add_common_analysis(sp, psi=psi)
        if name == "structure":
            sp.add_argument("--q", type=float, default=2.0)
        if name == "residuals":
            sp.add_argument("--max-mode", type=int, default=2)
        sp.set_defaults(func=fn)
    return ap


def _validate_generate(args) -> None:
    if args.generator == "random-besov":
        if args.alpha is None or not 0.0 < args.alpha < 1.0:
            raise ValueError("random-besov requires --alpha in (0, 1)")
    if args.snapshots is None:
        args.snapshots = 1 if args.generator == "random-besov" else 17


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "generate":
            _validate_generate(args)
        return args.func(args)
    except ContainerError as exc:
        print(f"error [{exc.__class__.__name__}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return 1
    except (OstfError, ValueError) as exc:
        # invalid parameters, mirrored from module preconditions
        print(f"error [{exc.__class__.__name__}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
