"""CSV (RFC 4180) and JSON data behind each figure, with reference curves alongside."""
from __future__ import annotations

import csv
import json
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from kickedising.classical import PORTRAIT_INITIAL_CONDITIONS, phase_portrait
from kickedising.runner.jobs import ResultRecord
from kickedising.stats import (
    R_GOE,
    R_POISSON,
    delta3,
    goe_delta3_asymptotic,
    poisson_delta3,
    poisson_nns,
    sample_reference_ensemble,
    wigner_surmise,
)

FIGURE_KINDS = ("nns", "r_curve", "delta3", "portrait", "noise_sweep")
GOE_MC_DIM = 400
GOE_MC_SAMPLES = 40
GOE_MC_SEED = 7


class FigureError(ValueError):
    pass


def _write_csv(path: Path, header: Sequence[str], rows: list[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _check_uniform(records: Sequence[ResultRecord]) -> str:
    if not records:
        raise FigureError("no records given")
    kinds = {r.kind for r in records}
    if len(kinds) > 1:
        raise FigureError(f"records mix kinds {sorted(kinds)}; emit one figure per kind")
    return kinds.pop()


@lru_cache(maxsize=8)
def goe_delta3_monte_carlo(l_grid: tuple[float, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error of Δ3 over unfolded GOE samples (central half of each spectrum)."""
    batch = sample_reference_ensemble("GOE", GOE_MC_DIM, GOE_MC_SEED, count=GOE_MC_SAMPLES)
    lo, hi = GOE_MC_DIM // 4, 3 * GOE_MC_DIM // 4
    curves = np.array([delta3(levels[lo:hi], l_grid) for levels in batch])
    return curves.mean(axis=0), curves.std(axis=0, ddof=1) / np.sqrt(len(curves))


def _nns(records, out):
    rows = []
    for r in records:
        edges, dens = r.report.nns_histogram
        centres = (edges[1:] + edges[:-1]) / 2
        poi, goe = poisson_nns(centres), wigner_surmise(centres, 1)
        for a, b, d, p, g in zip(edges[:-1], edges[1:], dens, poi, goe):
            rows.append([r.config_id[:16], r.config["J_over_Jmax"], a, b, d, p, g])
    header = ["config_id", "J_over_Jmax", "bin_lo", "bin_hi", "density", "poisson", "goe_surmise"]
    return header, rows, {}


def _r_curve(records, out):
    rows = sorted(
        ([r.config["J_over_Jmax"], r.config.get("j", r.config.get("n_spins")), r.report.r_mean, r.report.r_stderr]
         for r in records),
        key=lambda row: row[0],
    )
    return ["J_over_Jmax", "j", "r", "stderr"], rows, {"poisson": float(R_POISSON), "goe": float(R_GOE)}


def _delta3(records, out):
    ls = sorted({L for r in records for L, _ in r.report.delta3_curve})
    mc_mean, mc_err = goe_delta3_monte_carlo(tuple(ls)) if ls else ([], [])
    ref = {L: (p, g, m, e) for L, p, g, m, e in zip(ls, poisson_delta3(ls), goe_delta3_asymptotic(ls), mc_mean, mc_err)}
    rows = []
    for r in records:
        for L, d in r.report.delta3_curve:
            p, g, m, e = ref[L]
            rows.append([r.config_id[:16], r.config["J_over_Jmax"], L, d, p, m, e, g])
    header = ["config_id", "J_over_Jmax", "L", "delta3", "poisson", "goe_mc", "goe_mc_stderr", "goe_asymptotic"]
    return header, rows, {"goe_mc": {"dim": GOE_MC_DIM, "samples": GOE_MC_SAMPLES, "seed": GOE_MC_SEED}}


def _noise_sweep(records, out):
    rows = []
    for r in records:
        noise = r.config.get("noise")
        if noise is None:
            raise FigureError("noise_sweep needs records from a noise manifest")
        rows.append([r.config["J_over_Jmax"], r.report.extra["mean_perturbation_norm"],
                     r.report.r_mean, r.report.r_stderr, noise["kind"]])
    rows.sort(key=lambda row: (row[0], row[1]))
    refs = {"poisson": float(R_POISSON), "goe": float(R_GOE)}
    return ["J_over_Jmax", "norm", "r", "stderr", "noise_kind"], rows, refs


_BUILDERS = {"nns": _nns, "r_curve": _r_curve, "delta3": _delta3, "noise_sweep": _noise_sweep}


def emit_figure_data(
    kind: str,
    records: Sequence[ResultRecord] | None,
    out_dir: str | Path,
    *,
    alpha: float | None = None,
    tau: float | None = None,
    n_steps: int = 2000,
    initial_conditions=PORTRAIT_INITIAL_CONDITIONS,
) -> list[Path]:
    """Write ``<out_dir>/<kind>.csv`` and ``<kind>.json``; returns the paths.

    ``portrait`` ignores ``records`` and iterates the classical map instead; it needs
    explicit ``alpha`` and ``tau``.
    """
    if kind not in FIGURE_KINDS:
        raise FigureError(f"unknown figure kind {kind!r}; choose from {FIGURE_KINDS}")
    out = Path(out_dir)
    if kind == "portrait":
        if alpha is None or tau is None:
            raise FigureError("portrait needs explicit alpha and tau")
        portrait = phase_portrait(initial_conditions, alpha, tau, n_steps)
        rows = [[i, k + 1, float(p[0]), float(p[1])] for i, pts in enumerate(portrait) for k, p in enumerate(pts)]
        header, refs = ["trajectory_id", "step", "Jx", "Jz"], {}
        meta = {"alpha": alpha, "tau": tau, "n_steps": n_steps,
                "initial_conditions": [list(map(float, ic)) for ic in initial_conditions]}
    else:
        record_kind = _check_uniform(records)
        header, rows, refs = _BUILDERS[kind](records, out)
        meta = {"record_kind": record_kind}
    csv_path = _write_csv(out / f"{kind}.csv", header, rows)
    json_path = _write_json(out / f"{kind}.json", {
        "kind": kind,
        "columns": header,
        "rows": [[x if isinstance(x, (str, int)) else float(x) for x in row] for row in rows],
        "references": refs,
        "meta": meta,
    })
    return [csv_path, json_path]
