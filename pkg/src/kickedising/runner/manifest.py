"""Declarative sweep manifests (JSON, schema ``kickedising.manifest/1``).

Model semantics:

``KT``
    every listed ``j`` is a kicked top with twist ``tau`` in the ``KT_paper`` convention.
``ATA-block``
    the blocks of one all-to-all system with top spin ``j_max``. A sweep value
    ``tau`` is the kicked-top twist of the ``j_max`` block, i.e.
    ``tau_A = tau / (2 (2 j_max + 1))`` and ``b_x = alpha / 2``; smaller blocks
    inherit the same ``tau_A`` and so a proportionally weaker effective twist.
``ATA-full``
    ``blocks`` lists spin counts N; the full 2^N operator is built with
    ``tau_A = tau / (2 (N + 1))`` and the j = N/2 sector is analysed.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from kickedising.spin import DEFAULT_FULL_SPACE_CAP, two_j_from
from kickedising.stats import DEFAULT_BINS, DEFAULT_L_GRID

SCHEMA = "kickedising.manifest/1"
MODELS = ("KT", "ATA-block", "ATA-full")


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ScalePreset:
    tau_count: int
    max_dim: int | None


SCALES = {
    "smoke": ScalePreset(11, 51),
    "desk": ScalePreset(101, 403),
    "paper": ScalePreset(501, None),
}


@dataclass(frozen=True)
class NoiseGrid:
    """Perturbation sweep: either target norms ``||delta H'||`` or raw strengths ``delta``."""

    kind: str
    norms: tuple[float, ...] | None = None
    deltas: tuple[float, ...] | None = None
    realizations: int = 1
    sampler: str = "normal"

    @property
    def points(self) -> list[tuple[str, float]]:
        if self.norms is not None:
            return [("norm", float(x)) for x in self.norms]
        return [("delta", float(x)) for x in self.deltas]


@dataclass(frozen=True)
class RunManifest:
    model: str
    alpha: float
    tau_range: tuple[float, float, int | None]
    blocks: tuple[float, ...]
    j_max: float | None = None
    noise: NoiseGrid | None = None
    seed: int = 0
    outputs: str = "runs/out"
    scale: str = "desk"
    resolve_parity: bool = True
    l_grid: tuple[float, ...] = DEFAULT_L_GRID
    bins: int = DEFAULT_BINS
    schema: str = SCHEMA

    @property
    def tau_count(self) -> int:
        count = self.tau_range[2]
        return SCALES[self.scale].tau_count if count is None else count

    def taus(self) -> np.ndarray:
        lo, hi, _ = self.tau_range
        return np.linspace(lo, hi, self.tau_count)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["tau_range"] = list(self.tau_range)
        d["blocks"] = list(self.blocks)
        d["l_grid"] = list(self.l_grid)
        if self.noise is not None:
            d["noise"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in d["noise"].items() if v is not None}
        return d

    def with_overrides(self, **kw) -> "RunManifest":
        kw = {k: v for k, v in kw.items() if v is not None}
        out = replace(self, **kw)
        validate(out)
        return out


_MANIFEST_FIELDS = {
    "schema", "model", "alpha", "tau_range", "blocks", "j_max", "noise", "seed",
    "outputs", "scale", "resolve_parity", "l_grid", "bins",
}
_REQUIRED = {"model", "alpha", "tau_range", "blocks"}
_NOISE_FIELDS = {"kind", "norms", "deltas", "realizations", "sampler"}


def _float_tuple(values, name: str) -> tuple[float, ...]:
    if not isinstance(values, (list, tuple)) or not values:
        raise ManifestError(f"{name} must be a non-empty list")
    try:
        return tuple(float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"{name} must contain numbers") from exc


def _parse_noise(d: Any) -> NoiseGrid | None:
    if d is None:
        return None
    if not isinstance(d, dict):
        raise ManifestError("noise must be an object")
    unknown = set(d) - _NOISE_FIELDS
    if unknown:
        raise ManifestError(f"unknown noise fields: {sorted(unknown)}")
    if ("norms" in d) == ("deltas" in d):
        raise ManifestError("noise needs exactly one of 'norms' or 'deltas'")
    return NoiseGrid(
        kind=d.get("kind"),
        norms=_float_tuple(d["norms"], "noise.norms") if "norms" in d else None,
        deltas=_float_tuple(d["deltas"], "noise.deltas") if "deltas" in d else None,
        realizations=int(d.get("realizations", 1)),
        sampler=d.get("sampler", "normal"),
    )


def parse_manifest(d: dict[str, Any]) -> RunManifest:
    if not isinstance(d, dict):
        raise ManifestError("manifest must be a JSON object")
    unknown = set(d) - _MANIFEST_FIELDS
    if unknown:
        raise ManifestError(f"unknown manifest fields: {sorted(unknown)}")
    missing = _REQUIRED - set(d)
    if missing:
        raise ManifestError(f"missing manifest fields: {sorted(missing)}")
    schema = d.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise ManifestError(f"unsupported schema {schema!r}; expected {SCHEMA!r}")
    tr = d["tau_range"]
    if not isinstance(tr, (list, tuple)) or len(tr) != 3:
        raise ManifestError("tau_range must be [lo, hi, count]")
    m = RunManifest(
        model=d["model"],
        alpha=float(d["alpha"]),
        tau_range=(float(tr[0]), float(tr[1]), None if tr[2] is None else int(tr[2])),
        blocks=_float_tuple(d["blocks"], "blocks"),
        j_max=None if d.get("j_max") is None else float(d["j_max"]),
        noise=_parse_noise(d.get("noise")),
        seed=int(d.get("seed", 0)),
        outputs=str(d.get("outputs", "runs/out")),
        scale=d.get("scale", "desk"),
        resolve_parity=bool(d.get("resolve_parity", True)),
        l_grid=_float_tuple(d.get("l_grid", DEFAULT_L_GRID), "l_grid"),
        bins=int(d.get("bins", DEFAULT_BINS)),
    )
    validate(m)
    return m


def validate(m: RunManifest) -> None:
    if m.model not in MODELS:
        raise ManifestError(f"model must be one of {MODELS}, got {m.model!r}")
    if m.scale not in SCALES:
        raise ManifestError(f"scale must be one of {sorted(SCALES)}, got {m.scale!r}")
    lo, hi, count = m.tau_range
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
        raise ManifestError(f"tau_range needs finite lo <= hi, got {lo}, {hi}")
    if count is not None and count < 1:
        raise ManifestError("tau_range count must be >= 1")
    if not np.isfinite(m.alpha):
        raise ManifestError("alpha must be finite")
    if m.bins < 1:
        raise ManifestError("bins must be positive")
    max_dim = SCALES[m.scale].max_dim
    if m.model == "ATA-full":
        for n in m.blocks:
            if n != int(n) or not 1 <= n <= DEFAULT_FULL_SPACE_CAP:
                raise ManifestError(f"ATA-full blocks are spin counts 1..{DEFAULT_FULL_SPACE_CAP}, got {n}")
        dims = [int(n) + 1 for n in m.blocks]
    else:
        try:
            dims = [two_j_from(j) + 1 for j in m.blocks]
        except ValueError as exc:
            raise ManifestError(str(exc)) from exc
        if m.model == "ATA-block":
            if m.j_max is None:
                raise ManifestError("ATA-block needs j_max")
            two_j_from(m.j_max)
            if max(m.blocks) > m.j_max:
                raise ManifestError(f"block j={max(m.blocks)} exceeds j_max={m.j_max}")
            dims.append(int(2 * m.j_max) + 1)
    if max_dim is not None and max(dims) > max_dim:
        raise ManifestError(f"scale {m.scale!r} allows block dimension <= {max_dim}, manifest needs {max(dims)}")
    if m.noise is not None:
        nz = m.noise
        allowed = "RandomChain" if m.model == "ATA-full" else "GOE"
        if nz.kind != allowed:
            raise ManifestError(f"model {m.model} supports {allowed} noise, got {nz.kind!r}")
        if nz.realizations < 1:
            raise ManifestError("noise.realizations must be >= 1")
        if nz.sampler not in ("normal", "uniform"):
            raise ManifestError(f"unknown chain sampler {nz.sampler!r}")
        if any(v < 0 for _, v in nz.points):
            raise ManifestError("noise strengths must be non-negative")


def load_manifest(path: str | Path) -> RunManifest:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}: invalid JSON ({exc})") from exc
    return parse_manifest(data)


def dump_manifest(m: RunManifest) -> str:
    return json.dumps(m.to_dict(), indent=2, sort_keys=True) + "\n"


__all__ = [
    "MODELS",
    "ManifestError",
    "NoiseGrid",
    "RunManifest",
    "SCALES",
    "SCHEMA",
    "dump_manifest",
    "load_manifest",
    "parse_manifest",
    "validate",
]
