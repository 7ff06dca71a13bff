"""Ready-made manifests for the standard sweeps at each scale."""
from __future__ import annotations

from kickedising.runner.manifest import NoiseGrid, RunManifest, validate

ALPHA = 1.7
TAU_RANGE = (10.0, 10.5)
# blocks are chosen a priori as fixed fractions of the top spin
BLOCK_RATIOS = (0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 0.95)
NOISE_RATIOS = (0.125, 0.375)
RIGIDITY_RATIOS = (0.125, 0.95)
NORM_GRID = (0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0)

J_MAX = {"smoke": 25, "desk": 201, "paper": 801}
CHAIN_SPINS = {"smoke": (4, 6), "desk": (10, 12), "paper": (10, 12)}
REALIZATIONS = {"smoke": 1, "desk": 2, "paper": 4}


def blocks_for(j_max: float, ratios=BLOCK_RATIOS) -> tuple[float, ...]:
    return tuple(sorted({float(max(1, int(r * j_max + 0.5))) for r in ratios}))


def block_transition(scale: str = "desk", j_max: float | None = None, seed: int = 0) -> RunManifest:
    j_max = J_MAX[scale] if j_max is None else j_max
    m = RunManifest(
        model="ATA-block",
        alpha=ALPHA,
        tau_range=(*TAU_RANGE, None),
        blocks=blocks_for(j_max),
        j_max=float(j_max),
        seed=seed,
        scale=scale,
        outputs=f"runs/blocks-{scale}-J{j_max:g}",
    )
    validate(m)
    return m


def rigidity(scale: str = "desk", j_max: float | None = None, seed: int = 0) -> RunManifest:
    """Poisson-like and GOE-like blocks as whole spectra, long enough for windows up to L = 20."""
    j_max = J_MAX[scale] if j_max is None else j_max
    m = RunManifest(
        model="ATA-block",
        alpha=ALPHA,
        tau_range=(*TAU_RANGE, None),
        blocks=blocks_for(j_max, RIGIDITY_RATIOS),
        j_max=float(j_max),
        seed=seed,
        scale=scale,
        resolve_parity=False,
        outputs=f"runs/delta3-{scale}-J{j_max:g}",
    )
    validate(m)
    return m


def goe_noise(scale: str = "desk", j_max: float | None = None, seed: int = 0) -> RunManifest:
    j_max = J_MAX[scale] if j_max is None else j_max
    m = RunManifest(
        model="ATA-block",
        alpha=ALPHA,
        tau_range=(*TAU_RANGE, None),
        blocks=blocks_for(j_max, NOISE_RATIOS),
        j_max=float(j_max),
        noise=NoiseGrid("GOE", norms=NORM_GRID, realizations=REALIZATIONS[scale]),
        seed=seed,
        scale=scale,
        resolve_parity=False,
        outputs=f"runs/goe-{scale}-J{j_max:g}",
    )
    validate(m)
    return m


def chain_noise(scale: str = "desk", n_spins: tuple[int, ...] | None = None, seed: int = 0) -> RunManifest:
    n_spins = CHAIN_SPINS[scale] if n_spins is None else n_spins
    m = RunManifest(
        model="ATA-full",
        alpha=ALPHA,
        tau_range=(*TAU_RANGE, None),
        blocks=tuple(float(n) for n in n_spins),
        noise=NoiseGrid("RandomChain", norms=NORM_GRID, realizations=REALIZATIONS[scale]),
        seed=seed,
        scale=scale,
        resolve_parity=False,
        outputs=f"runs/chain-{scale}",
    )
    validate(m)
    return m


RECIPES = {"blocks": block_transition, "delta3": rigidity, "goe-noise": goe_noise, "chain-noise": chain_noise}
