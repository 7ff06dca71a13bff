"""Job expansion, the on-disk spectrum cache and pooled result records.

A job is one Floquet diagonalisation (one tau, one block, one noise point and
realisation). Its id is the SHA-256 of the canonical JSON of its parameters, so
reruns with the same manifest hit the same files. Spectra live in
``<out>/spectra/<id>.f64`` (little-endian float64, sectors concatenated) next to
a JSON sidecar holding the sector layout and the code version.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from kickedising import __version__
from kickedising.floquet import (
    EigenphaseSet,
    FloquetSpec,
    build_kicked_top,
    eigenphases,
    map_ata_parameters,
    parity_resolved_eigenphases,
)
from kickedising.noise import NoiseSpec, chain_block_spectrum, chain_diagonal, chain_weights, perturbed_kicked_top, sample_goe
from kickedising.runner.manifest import RunManifest
from kickedising.spin import SpinBlock
from kickedising.stats import StatisticReport, build_report, r_statistic

log = logging.getLogger(__name__)

SPECTRUM_SUFFIX = ".f64"


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def digest(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def derive_seed(master: int, key: Any) -> int:
    """64-bit seed from the master seed and a JSON-able key."""
    h = hashlib.sha256(canonical_json({"master": int(master), "key": key}).encode()).digest()
    return int.from_bytes(h[:8], "little")


@dataclass(frozen=True)
class Job:
    params: dict
    config: dict

    @property
    def id(self) -> str:
        return digest(self.params)

    @property
    def config_id(self) -> str:
        return digest(self.config)


@dataclass
class JobResult:
    job: Job
    sectors: list[EigenphaseSet]
    perturbation_norm: float
    seconds: float
    cached: bool


@dataclass
class ResultRecord:
    """Statistics of one configuration (block x noise point), pooled over tau, realisations and sectors."""

    config_id: str
    config: dict
    report: StatisticReport
    job_ids: list[str]
    wall_seconds: float = 0.0
    code_version: str = __version__

    def to_dict(self, timings: bool = True) -> dict:
        d = {
            "config_id": self.config_id,
            "config": self.config,
            "report": self.report.to_dict(),
            "job_ids": list(self.job_ids),
            "code_version": self.code_version,
        }
        if timings:
            d["wall_seconds"] = self.wall_seconds
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ResultRecord":
        return cls(
            d["config_id"],
            d["config"],
            StatisticReport.from_dict(d["report"]),
            list(d["job_ids"]),
            float(d.get("wall_seconds", 0.0)),
            d.get("code_version", "unknown"),
        )

    @property
    def kind(self) -> str:
        return self.config["model"] + ("+" + self.config["noise"]["kind"] if self.config.get("noise") else "")


@dataclass
class RunSummary:
    out_dir: Path
    records: list[ResultRecord]
    failures: list[dict] = field(default_factory=list)
    n_jobs: int = 0
    n_cached: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures


def j_over_jmax(m: RunManifest, block: float) -> float:
    if m.model == "ATA-full":
        return 1.0
    top = m.j_max if m.j_max is not None else max(m.blocks)
    return float(block) / float(top)


def expand_jobs(m: RunManifest) -> list[Job]:
    """Every job of a manifest, in a deterministic order."""
    jobs = []
    taus = [float(t) for t in m.taus()]
    points = m.noise.points if m.noise is not None else [(None, None)]
    realizations = m.noise.realizations if m.noise is not None else 1
    for block in m.blocks:
        size_key = "n_spins" if m.model == "ATA-full" else "j"
        base = {
            "model": m.model,
            "alpha": float(m.alpha),
            size_key: int(block) if m.model == "ATA-full" else float(block),
            "j_max": None if m.j_max is None else float(m.j_max),
            "parity": bool(m.resolve_parity and m.noise is None and m.model != "ATA-full"),
        }
        for mode, value in points:
            noise_cfg = None
            if m.noise is not None:
                noise_cfg = {"kind": m.noise.kind, mode: value, "sampler": m.noise.sampler}
            config = dict(base, noise=noise_cfg, J_over_Jmax=j_over_jmax(m, block),
                          tau_range=[m.tau_range[0], m.tau_range[1], m.tau_count])
            for tau in taus:
                for rep in range(realizations):
                    params = dict(base, tau=tau, noise=noise_cfg, format=1)
                    if noise_cfg is not None:
                        # one perturbation draw per (block, tau, realisation), shared across strengths
                        params["realization"] = rep
                        params["noise_seed"] = derive_seed(
                            m.seed, {k: v for k, v in params.items() if k not in ("noise", "realization")} | {"rep": rep}
                        )
                    jobs.append(Job(params, config))
    return jobs


def _kt_spec(p: dict) -> FloquetSpec:
    block = SpinBlock.from_j(p["j"])
    if p["model"] == "KT":
        return FloquetSpec(p["alpha"], p["tau"], block, "KT_paper")
    j_max = p["j_max"]
    tau_a = p["tau"] / (2 * (2 * j_max + 1))
    return map_ata_parameters(tau_a, p["alpha"] / 2, block, j_max)


def _goe_delta(dim: int, seed: int, noise: dict) -> float:
    if "delta" in noise:
        return noise["delta"]
    if noise["norm"] == 0:
        return 0.0
    return noise["norm"] / float(np.abs(np.linalg.eigvalsh(sample_goe(dim, seed))).max())


def _chain_delta(n_spins: int, seed: int, noise: dict) -> float:
    if "delta" in noise:
        return noise["delta"]
    if noise["norm"] == 0:
        return 0.0
    unit = chain_diagonal(n_spins, chain_weights(n_spins, 1.0, seed, noise["sampler"]))
    return noise["norm"] / float(np.abs(unit).max())


def compute_job(params: dict) -> tuple[list[EigenphaseSet], float]:
    """Eigenphase sets (one per sector) and the perturbation norm of one job."""
    noise = params["noise"]
    if params["model"] == "ATA-full":
        n = params["n_spins"]
        tau_a = params["tau"] / (2 * (n + 1))
        spec = None
        if noise is not None:
            seed = params["noise_seed"]
            spec = NoiseSpec("RandomChain", _chain_delta(n, seed, noise), seed, n, noise["sampler"])
        phases, norm = chain_block_spectrum(n, tau_a, params["alpha"] / 2, spec)
        return [phases], norm
    spec = _kt_spec(params)
    if noise is not None:
        seed = params["noise_seed"]
        delta = _goe_delta(spec.block.dim, seed, noise)
        noisy = FloquetSpec(spec.alpha, spec.tau, spec.block, spec.convention, NoiseSpec("GOE", delta, seed))
        u, norm = perturbed_kicked_top(noisy)
        return [eigenphases(u, noisy)], norm
    if params["parity"]:
        return [s for s in parity_resolved_eigenphases(spec) if len(s)], 0.0
    return [eigenphases(build_kicked_top(spec), spec)], 0.0


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def spectrum_paths(out_dir: Path, job_id: str) -> tuple[Path, Path]:
    d = Path(out_dir) / "spectra"
    return d / f"{job_id}{SPECTRUM_SUFFIX}", d / f"{job_id}.json"


def write_spectrum(out_dir: Path, job: Job, sectors: list[EigenphaseSet], norm: float, seconds: float) -> None:
    data_path, meta_path = spectrum_paths(out_dir, job.id)
    data_path.parent.mkdir(parents=True, exist_ok=True)
    blob = np.concatenate([s.phases for s in sectors]).astype("<f8").tobytes()
    meta = {
        "id": job.id,
        "params": job.params,
        "sectors": [{"name": s.sector, "length": len(s)} for s in sectors],
        "perturbation_norm": norm,
        "seconds": seconds,
        "code_version": __version__,
        "sha256": hashlib.sha256(blob).hexdigest(),
    }
    _atomic_write(data_path, blob)
    _atomic_write(meta_path, (json.dumps(meta, indent=1, sort_keys=True) + "\n").encode())


def read_spectrum(out_dir: Path, job_id: str, *, require_version: bool = True) -> tuple[list[EigenphaseSet], dict] | None:
    """Cached sectors of a job, or None if missing, stale or corrupt."""
    data_path, meta_path = spectrum_paths(out_dir, job_id)
    if not (data_path.exists() and meta_path.exists()):
        return None
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        blob = data_path.read_bytes()
    except (OSError, json.JSONDecodeError):
        return None
    if require_version and meta.get("code_version") != __version__:
        return None
    if hashlib.sha256(blob).hexdigest() != meta.get("sha256"):
        return None
    flat = np.frombuffer(blob, dtype="<f8").astype(float)
    sectors, start = [], 0
    for sec in meta["sectors"]:
        stop = start + sec["length"]
        sectors.append(EigenphaseSet(flat[start:stop], sector=sec["name"], meta={"id": job_id}))
        start = stop
    if start != flat.size:
        return None
    return sectors, meta


def _run_one(job: Job, out_dir: Path, force: bool) -> JobResult:
    if not force:
        hit = read_spectrum(out_dir, job.id)
        if hit is not None:
            sectors, meta = hit
            return JobResult(job, sectors, meta["perturbation_norm"], meta.get("seconds", 0.0), True)
    t0 = time.perf_counter()
    sectors, norm = compute_job(job.params)
    seconds = time.perf_counter() - t0
    for s in sectors:
        s.meta["id"] = job.id
    write_spectrum(out_dir, job, sectors, norm, seconds)
    return JobResult(job, sectors, norm, seconds, False)


def _record(config_id: str, results: list[JobResult], m: RunManifest) -> ResultRecord:
    sets = [s for r in results for s in r.sectors]
    report = build_report(sets, l_grid=m.l_grid, bins=m.bins)
    by_tau: dict[float, list[EigenphaseSet]] = {}
    for r in results:
        by_tau.setdefault(r.job.params["tau"], []).extend(r.sectors)
    per_tau = [r_statistic(v).mean for v in by_tau.values()]
    norms = [r.perturbation_norm for r in results]
    report.extra = {
        "n_sets": len(sets),
        "n_taus": len(by_tau),
        "r_per_tau_std": float(np.std(per_tau, ddof=1)) if len(per_tau) > 1 else 0.0,
        "r_per_tau_min": float(min(per_tau)),
        "r_per_tau_max": float(max(per_tau)),
        "mean_perturbation_norm": float(np.mean(norms)),
        "sector_sizes": sorted({len(s) for s in sets}),
    }
    return ResultRecord(
        config_id,
        results[0].job.config,
        report,
        [r.job.id for r in results],
        float(sum(r.seconds for r in results)),
    )


def write_json(path: Path, obj: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(path, (json.dumps(obj, indent=1, sort_keys=True, allow_nan=False) + "\n").encode())


def run_manifest(
    m: RunManifest,
    out_dir: str | Path | None = None,
    *,
    threads: int = 1,
    force: bool = False,
) -> RunSummary:
    """Execute (or reuse) every job of ``m`` and write the pooled statistics.

    Writes ``statistics.json`` (deterministic, no timings), ``records.json``
    (with timings) and ``summary.json`` (failures and cache use) under ``out_dir``.
    A failing job is logged and listed; its configuration is skipped.
    """
    out = Path(out_dir if out_dir is not None else m.outputs)
    out.mkdir(parents=True, exist_ok=True)
    jobs = expand_jobs(m)
    results: dict[str, JobResult] = {}
    failures = []

    def guarded(job: Job):
        try:
            return job, _run_one(job, out, force), None
        except Exception as exc:  # isolate per-job failures
            log.warning("job %s failed: %s", job.id[:12], exc)
            return job, None, f"{type(exc).__name__}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(guarded, jobs))
    else:
        outcomes = [guarded(j) for j in jobs]
    for job, res, err in outcomes:
        if err is None:
            results[job.id] = res
        else:
            failures.append({"job_id": job.id, "params": job.params, "error": err})

    failed_configs = {digest(f_job.config) for f_job, _, err in outcomes if err is not None}
    grouped: dict[str, list[JobResult]] = {}
    for job in jobs:
        if job.id in results and job.config_id not in failed_configs:
            grouped.setdefault(job.config_id, []).append(results[job.id])
    records = []
    for cid, res in grouped.items():
        try:
            records.append(_record(cid, res, m))
        except ValueError as exc:
            failures.append({"config_id": cid, "error": f"statistics: {exc}"})
    write_json(out / "statistics.json", {
        "manifest": m.to_dict() | {"outputs": None},
        "records": [r.to_dict(timings=False) for r in records],
    })
    write_json(out / "records.json", {"records": [r.to_dict() for r in records]})
    n_cached = sum(r.cached for r in results.values())
    write_json(out / "summary.json", {
        "n_jobs": len(jobs),
        "n_cached": n_cached,
        "failures": failures,
        "code_version": __version__,
    })
    return RunSummary(out, records, failures, len(jobs), n_cached)


def load_records(paths: Iterable[str | Path]) -> list[ResultRecord]:
    """Records from ``records.json``/``statistics.json`` files."""
    records = []
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            data = json.load(fh)
        items = data["records"] if isinstance(data, dict) else data
        records.extend(ResultRecord.from_dict(d) for d in items)
    return records
