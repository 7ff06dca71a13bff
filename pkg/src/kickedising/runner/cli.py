"""Command line: ``kickedising {run,stats,figure,oracle-check,recipe} ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from kickedising import __version__
from kickedising.runner.figures import FIGURE_KINDS, FigureError, emit_figure_data
from kickedising.runner.jobs import load_records, run_manifest
from kickedising.runner.manifest import SCALES, ManifestError, dump_manifest, load_manifest
from kickedising.runner.recipes import RECIPES
from kickedising.spin import DEFAULT_FULL_SPACE_CAP, ResourceError


def _cmd_run(args) -> int:
    m = load_manifest(args.manifest)
    m = m.with_overrides(scale=args.scale, seed=args.seed)
    out = Path(args.out) if args.out else Path(m.outputs)
    summary = run_manifest(m, out, threads=args.threads, force=args.force)
    print(f"{summary.n_jobs} jobs ({summary.n_cached} cached), {len(summary.records)} records -> {out}")
    for rec in summary.records:
        c = rec.config
        size = f"j={c['j']:g}" if "j" in c else f"N={c['n_spins']}"
        noise = c.get("noise") or {}
        point = "".join(f" {k}={noise[k]:g}" for k in ("norm", "delta") if k in noise)
        print(f"  {size}{point}: r = {rec.report.r_mean:.4f} +- {rec.report.r_stderr:.4f}")
    for f in summary.failures:
        print(f"  FAILED {f.get('job_id', f.get('config_id', ''))[:12]}: {f['error']}", file=sys.stderr)
    return 0 if summary.ok else 3


def _cmd_stats(args) -> int:
    records = load_records(args.records)
    rows = []
    for rec in records:
        rows.append({
            "config_id": rec.config_id,
            "J_over_Jmax": rec.config["J_over_Jmax"],
            "noise": rec.config.get("noise"),
            "r_mean": rec.report.r_mean,
            "r_stderr": rec.report.r_stderr,
            "n_ratios": rec.report.n_ratios,
            "delta3": rec.report.delta3_curve,
        })
    text = json.dumps(rows, indent=1, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_figure(args) -> int:
    records = load_records(args.records) if args.kind != "portrait" else None
    paths = emit_figure_data(
        args.kind, records, args.out or ".", alpha=args.alpha, tau=args.tau, n_steps=args.steps
    )
    for p in paths:
        print(p)
    return 0


def _cmd_oracle(args) -> int:
    from kickedising.oracle import check_block_equivalence, expected_global_phase

    if args.n_spins > args.cap:
        raise ResourceError(f"N={args.n_spins} exceeds the full-space cap {args.cap}")
    result = check_block_equivalence(args.n_spins, args.tau_a, args.b_x)
    expected = expected_global_phase(args.n_spins, args.tau_a)
    worst = max(err for _, err in result.values())
    for two_j, (offset, err) in result.items():
        print(f"j={two_j / 2:g}: offset {offset:+.12f} (expected {expected:+.12f}), max error {err:.2e}")
    ok = worst < args.tol
    print(("PASS" if ok else "FAIL") + f": worst block error {worst:.2e} (tol {args.tol:g})")
    return 0 if ok else 1


def _cmd_recipe(args) -> int:
    m = RECIPES[args.name](args.scale or "desk", seed=args.seed or 0)
    text = dump_manifest(m)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(args.out)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kickedising", description="Kicked-top / all-to-all Ising spectral statistics.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a manifest")
    run.add_argument("manifest")
    run.add_argument("--scale", choices=sorted(SCALES))
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--force", action="store_true", help="ignore cached spectra")
    run.set_defaults(func=_cmd_run)

    st = sub.add_parser("stats", help="summarise record files")
    st.add_argument("records", nargs="+")
    st.add_argument("--out")
    st.set_defaults(func=_cmd_stats)

    fig = sub.add_parser("figure", help="emit CSV/JSON figure data")
    fig.add_argument("kind", choices=FIGURE_KINDS)
    fig.add_argument("records", nargs="*")
    fig.add_argument("--out")
    fig.add_argument("--alpha", type=float, help="kick angle (portrait)")
    fig.add_argument("--tau", type=float, help="twist strength (portrait)")
    fig.add_argument("--steps", type=int, default=2000)
    fig.set_defaults(func=_cmd_figure)

    orc = sub.add_parser("oracle-check", help="compare the block reduction with the 2^N operator")
    orc.add_argument("n_spins", type=int)
    orc.add_argument("--tau-a", type=float, default=0.37)
    orc.add_argument("--b-x", type=float, default=0.61)
    orc.add_argument("--tol", type=float, default=1e-9)
    orc.add_argument("--cap", type=int, default=DEFAULT_FULL_SPACE_CAP)
    orc.set_defaults(func=_cmd_oracle)

    rec = sub.add_parser("recipe", help="print a ready-made manifest")
    rec.add_argument("name", choices=sorted(RECIPES))
    rec.add_argument("--scale", choices=sorted(SCALES))
    rec.add_argument("--seed", type=int)
    rec.add_argument("--out")
    rec.set_defaults(func=_cmd_recipe)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "figure" and args.kind != "portrait" and not args.records:
        print("error: figure needs at least one records file", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ManifestError, FigureError, ResourceError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
