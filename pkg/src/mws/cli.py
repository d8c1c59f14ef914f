"""Command-line pipeline: config in, deterministic CSV/JSON artifacts out.

Exit codes: 0 success, 2 invalid config, 3 numerical/solver failure,
4 I/O failure. Errors print a one-line JSON record to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from mws import __version__
from mws.effpot import build_bases, build_pole_weight_table, ep_kernel_matrix, \
    vnn_eval
from mws.errors import ConfigError, MwsError, SolverError
from mws.model import SystemSpec, build_spec
from mws.oracle import coupled_matrix_diagonalization, run_all_oracles, \
    subset_recovery_distance
from mws.reconstruct import assemble_wavefunction
from mws.spectra import find_roots, group_realisations, realisation_separation, \
    solve_spectrum

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

_EPILOG = """exit codes:
  0  success
  2  invalid or malformed config
  3  numerical/solver failure
  4  I/O failure (unreadable config, unwritable output)
"""


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            cell if isinstance(cell, str) else _fmt(cell) for cell in row
        ))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_config(path: str) -> tuple[dict, str]:
    raw_bytes = Path(path).read_bytes()
    digest = hashlib.sha256(raw_bytes).hexdigest()
    try:
        doc = json.loads(raw_bytes)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return doc, digest


def _apply_overrides(doc: dict, args) -> dict:
    modes = dict(doc.get("modes", {}))
    if args.mode is not None:
        modes["denominator"] = {"approx": "approx", "exact": "exact"}[args.mode]
    if args.backend is not None:
        modes["basis"] = {"unperturbed": "unperturbed", "v1": "v1"}[args.backend]
    out = dict(doc)
    out["modes"] = modes
    return out


def _resolve_jobs(args) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    env = os.environ.get("MWS_JOBS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"MWS_JOBS must be an integer, got {env!r}") from exc
    return 1


def _manifest(out_dir: Path, subcommand: str, digest: str, outputs: list[str],
              spec: SystemSpec, jobs: int, started: float) -> None:
    payload = {
        "config_sha256": digest,
        "subcommand": subcommand,
        "outputs": outputs,
        "wall_time_s": time.perf_counter() - started,
        "version": __version__,
        "mode": spec.denominator_mode,
        "backend": spec.basis_backend,
        "jobs": jobs,
    }
    _write_json(out_dir / "manifest.json", payload)


def cmd_basis(spec: SystemSpec, out_dir: Path, args, jobs: int) -> list[str]:
    bases = build_bases(spec, jobs=jobs)
    b = bases.base
    header = ["n", "eigenvalue"] + [f"psi_{i}" for i in range(spec.grid_points)]
    rows = []
    for n in range(1, b.n_states + 1):
        rows.append([str(n), _fmt(b.eigenvalues[n - 1])]
                    + [_fmt(v) for v in b.eigenfunctions[n - 1]])
    _write_csv(out_dir / "basis.csv", header, rows)
    return ["basis.csv"]


def _spectrum_outputs(spec: SystemSpec, out_dir: Path, jobs: int):
    result = solve_spectrum(spec, jobs=jobs)

    rows = []
    for st in result.states:
        rs = st.rootset
        for j in range(len(rs.roots)):
            rows.append([str(st.n), str(j + 1), rs.roots[j], rs.residuals[j],
                         rs.bracket_lo[j], rs.bracket_hi[j]])
    _write_csv(out_dir / "roots.csv",
               ["n", "j", "root", "residual", "bracket_lo", "bracket_hi"], rows)

    rows = []
    for st in result.states:
        for entry in st.table.entries:
            for m in entry.members:
                rows.append([str(st.n), str(m.channel), str(m.n_prime),
                             entry.pole, m.weight])
    _write_csv(out_dir / "poles.csv",
               ["n", "g_or_k", "n_prime", "pole", "weight"], rows)

    counts = {
        "n_p": result.counts.n_p,
        "n_prime": result.counts.n_prime,
        "n_s": result.counts.n_s,
        "n_max": result.counts.n_max,
        "n_0": result.counts.n_0,
        "n_delta": result.counts.n_delta,
        "n_max_reduced": result.counts.n_max_reduced,
        "n_0_reduced": result.counts.n_0_reduced,
        "n_delta_reduced": result.counts.n_delta_reduced,
        "max_per_normal_reduced": result.counts.max_per_normal_reduced,
        "observed_total": result.observed_total,
        "degeneracy_deficit": result.degeneracy_deficit,
        "mode": result.mode,
    }
    try:
        sep = realisation_separation(spec, want_min=spec.is_spatial)
        counts["separation_max_estimate"] = sep.max_estimate
        if sep.min_estimate is not None:
            counts["separation_min_estimate"] = sep.min_estimate
    except MwsError:
        pass
    _write_json(out_dir / "counts.json", counts)

    try:
        ensemble = group_realisations(result)
    except SolverError:
        ensemble = group_realisations(result, 1)
    _write_json(out_dir / "realisations.json", {
        "method": ensemble.method,
        "n_r": ensemble.n_r,
        "realisations": [
            {"index": r.index,
             "members": [{"n": m.n, "j": m.j, "root": m.value} for m in r.members]}
            for r in ensemble.realisations
        ],
    })
    return result, ["roots.csv", "poles.csv", "counts.json", "realisations.json"]


def cmd_spectrum(spec: SystemSpec, out_dir: Path, args, jobs: int) -> list[str]:
    _, outputs = _spectrum_outputs(spec, out_dir, jobs)
    return outputs


def cmd_kernel(spec: SystemSpec, out_dir: Path, args, jobs: int) -> list[str]:
    if args.epsilon is None:
        raise ConfigError("the kernel subcommand needs --epsilon")
    bases = build_bases(spec, jobs=jobs)
    k = ep_kernel_matrix(spec, bases, args.epsilon)
    stride = args.stride if args.stride else max(1, (spec.grid_points - 1) // 256)
    idx = range(0, spec.grid_points, stride)
    grid = spec.grid
    header = ["x"] + [_fmt(grid[j]) for j in idx]
    outputs = []
    for name, part in (("kernel_re.csv", k.real), ("kernel_im.csv", k.imag)):
        rows = [[grid[i]] + [part[i, j] for j in idx] for i in idx]
        _write_csv(out_dir / name, header, rows)
        outputs.append(name)
    return outputs


def cmd_reconstruct(spec: SystemSpec, out_dir: Path, args, jobs: int) -> list[str]:
    result, _ = _spectrum_outputs(spec, out_dir, jobs)
    try:
        ensemble = group_realisations(result)
    except SolverError:
        ensemble = group_realisations(result, 1)
    wanted = args.realisation
    match = [r for r in ensemble.realisations if r.index == wanted]
    if not match:
        raise ConfigError(
            f"realisation {wanted} not available (ensemble has {ensemble.n_r})"
        )
    roots_by_n: dict[int, float] = {}
    for m in match[0].members:
        roots_by_n.setdefault(m.n, m.value)  # lowest root per base state
    bases = build_bases(spec, jobs=jobs)
    n_second = args.samples if args.samples else 65
    field = assemble_wavefunction(spec, bases, roots_by_n, n_second=n_second,
                                  allow_evanescent=args.allow_evanescent)

    rows = []
    for i, x in enumerate(field.x):
        for j, y in enumerate(field.second_axis):
            rows.append([x, y, field.psi[i, j].real, field.psi[i, j].imag,
                         field.rho[i, j]])
    axis = "r_p" if field.axis_kind == "r_p" else "t"
    _write_csv(out_dir / "field.csv", ["x", axis, "re_psi", "im_psi", "rho"], rows)

    blocks = []
    for i, x in enumerate(field.x):
        for j, y in enumerate(field.second_axis):
            blocks.append(f"{_fmt(x)} {_fmt(y)} {_fmt(field.rho[i, j])}")
        blocks.append("")
    (out_dir / "heatmap.dat").write_text("\n".join(blocks) + "\n")
    return ["roots.csv", "poles.csv", "counts.json", "realisations.json",
            "field.csv", "heatmap.dat"]


def cmd_verify(spec: SystemSpec, out_dir: Path, args, jobs: int) -> list[str]:
    reports = run_all_oracles(spec)
    _write_json(out_dir / "verify.json", {
        "reports": [r.as_dict() for r in reports],
        "all_passed": all(r.passed for r in reports),
    })
    return ["verify.json"]


def cmd_figure1(spec: SystemSpec, out_dir: Path, args, jobs: int) -> list[str]:
    if spec.n_base != 1:
        warnings.warn("the graphical dump is designed for a single base state")
    bases = build_bases(spec, jobs=jobs)
    per_interval = args.samples if args.samples else 200

    curve_rows = []
    asym_rows = []
    root_rows = []
    for n in range(1, spec.n_base + 1):
        table = build_pole_weight_table(spec, bases, n)
        eps0 = float(bases.base.eigenvalues[n - 1])
        poles = table.poles
        for entry in table.entries:
            for m in entry.members:
                asym_rows.append([str(n), entry.pole, str(m.channel), str(m.n_prime)])
        rs = find_roots(table, eps0)
        for j, r in enumerate(rs.roots, start=1):
            root_rows.append([str(n), str(j), r])

        if len(poles) == 0:
            segments = [(eps0 - 1.0, eps0 + 1.0, 2.0)]
        else:
            spread = float(poles[-1] - poles[0]) if len(poles) > 1 else 1.0
            margin = max(spread, 1.0)
            edges = [poles[0] - margin] + list(poles) + [poles[-1] + margin]
            segments = []
            for a, b in zip(edges[:-1], edges[1:]):
                gap = b - a
                segments.append((a, b, gap))
        for a, b, gap in segments:
            delta = 1e-4 * gap
            xs = np.linspace(a + delta, b - delta, per_interval)
            for eps in xs:
                curve_rows.append([str(n), eps, vnn_eval(table, float(eps)),
                                   eps - eps0])

    _write_csv(out_dir / "curve.csv", ["n", "epsilon", "v_nn", "line"], curve_rows)
    _write_csv(out_dir / "asymptotes.csv", ["n", "pole", "g_or_k", "n_prime"], asym_rows)
    _write_csv(out_dir / "intersections.csv", ["n", "j", "root"], root_rows)
    return ["curve.csv", "asymptotes.csv", "intersections.csv"]


def _set_by_path(doc: dict, dotted: str, value: float) -> dict:
    keys = dotted.split(".")
    out = json.loads(json.dumps(doc))  # deep copy
    node = out
    for key in keys[:-1]:
        if isinstance(node, list):
            node = node[int(key)]
        elif key in node:
            node = node[key]
        else:
            raise ConfigError(f"sweep path segment {key!r} not found in config")
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value
    return out


def cmd_sweep(spec_doc: dict, out_dir: Path, args, jobs: int) -> list[str]:
    if not args.param:
        raise ConfigError("the sweep subcommand needs --param")
    if not args.values:
        raise ConfigError("the sweep subcommand needs a nonempty --values list")
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"--values must be comma-separated numbers: {exc}") from exc
    if not values:
        raise ConfigError("the sweep subcommand needs a nonempty --values list")

    rows = []
    for value in values:
        doc = _set_by_path(spec_doc, args.param, value)
        spec = build_spec(doc)
        result = solve_spectrum(spec, jobs=jobs)
        eigs = coupled_matrix_diagonalization(spec).eigenvalues
        roots = np.array([v for (_, _, v) in result.all_roots()])
        dist = subset_recovery_distance(roots, eigs)
        for (n, j, root) in result.all_roots():
            rows.append([value, str(n), str(j), root, dist])
    _write_csv(out_dir / "sweep.csv",
               ["value", "n", "j", "root", "oracle_distance"], rows)
    return ["sweep.csv"]


_COMMANDS = {
    "basis": cmd_basis,
    "spectrum": cmd_spectrum,
    "kernel": cmd_kernel,
    "reconstruct": cmd_reconstruct,
    "verify": cmd_verify,
    "figure1": cmd_figure1,
}


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", required=True, help="path to the JSON config")
    shared.add_argument("--out", required=True, help="output directory")
    shared.add_argument("--mode", choices=["approx", "exact"],
                        help="override modes.denominator")
    shared.add_argument("--backend", choices=["unperturbed", "v1"],
                        help="override modes.basis")
    shared.add_argument("--samples", type=int, default=None,
                        help="sampling density (per-subcommand meaning)")
    shared.add_argument("--jobs", type=int, default=None,
                        help="worker threads (default: MWS_JOBS or 1)")

    parser = argparse.ArgumentParser(
        prog="mws",
        description="effective-potential solver for periodically perturbed "
                    "1D quantum systems",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("basis", parents=[shared], help="base eigenpairs as CSV")
    sub.add_parser("spectrum", parents=[shared],
                   help="roots, poles, counts, realisations")
    k = sub.add_parser("kernel", parents=[shared], help="nonlocal kernel matrix dump")
    k.add_argument("--epsilon", type=float, default=None,
                   help="energy at which to evaluate the kernel")
    k.add_argument("--stride", type=int, default=None,
                   help="grid stride for the dump (default: about 256 rows)")
    r = sub.add_parser("reconstruct", parents=[shared],
                       help="wavefunction and density for one realisation")
    r.add_argument("--realisation", type=int, default=1,
                   help="1-based realisation index (default 1)")
    r.add_argument("--allow-evanescent", action="store_true",
                   help="assemble evanescent states with imaginary wavenumber")
    sub.add_parser("verify", parents=[shared], help="run all oracles")
    sub.add_parser("figure1", parents=[shared],
                   help="graphical-solution data: curves, asymptotes, intersections")
    s = sub.add_parser("sweep", parents=[shared], help="spectrum across a parameter")
    s.add_argument("--param", help="dotted config path, e.g. perturbation.scale")
    s.add_argument("--values", help="comma-separated numeric values")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        doc, digest = _load_config(args.config)
        doc = _apply_overrides(doc, args)
        jobs = _resolve_jobs(args)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.subcommand == "sweep":
            spec = build_spec(doc)
            outputs = cmd_sweep(doc, out_dir, args, jobs)
        else:
            spec = build_spec(doc)
            outputs = _COMMANDS[args.subcommand](spec, out_dir, args, jobs)
        _manifest(out_dir, args.subcommand, digest, outputs, spec, jobs, started)
        return EXIT_OK
    except ConfigError as exc:
        _emit_error(exc, EXIT_CONFIG)
        return EXIT_CONFIG
    except SolverError as exc:
        _emit_error(exc, EXIT_SOLVER)
        return EXIT_SOLVER
    except OSError as exc:
        _emit_error(exc, EXIT_IO)
        return EXIT_IO


def _emit_error(exc: Exception, code: int) -> None:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
