"""GOE and random-chain perturbations of the Floquet operators.

GOE samples use ``A = (M + M^T) / 2`` with ``M`` iid standard normal, so the
off-diagonal variance is 1/2 and the diagonal variance 1. Chain couplings act on
bonds ``(i, i+1 mod N)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from kickedising.floquet import (
    EigenphaseSet,
    FloquetSpec,
    kick_matrix,
    phases_from_eigenvalues,
    twist_diagonal,
)
from kickedising.oracle import (
    FullSpaceOperator,
    apply_kick,
    ata_ising_diagonal,
    j2_eigenspaces,
    kick_full,
    spin_z_values,
)
from kickedising.spin import DEFAULT_FULL_SPACE_CAP, check_cap

NoiseKind = Literal["GOE", "RandomChain"]
ChainSampler = Literal["normal", "uniform"]


@dataclass(frozen=True)
class NoiseSpec:
    """One perturbation realisation.

    ``sampler`` only matters for ``RandomChain``: ``"normal"`` draws
    delta_i ~ N(0, delta^2); ``"uniform"`` draws delta_i = delta * U[0, 2 pi].
    """

    kind: NoiseKind
    delta: float
    seed: int
    n_spins: int | None = None
    sampler: ChainSampler = "normal"

    def __post_init__(self) -> None:
        if self.kind not in ("GOE", "RandomChain"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not self.delta >= 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")
        if self.kind == "RandomChain" and self.n_spins is None:
            raise ValueError("RandomChain noise needs n_spins")
        if self.sampler not in ("normal", "uniform"):
            raise ValueError(f"unknown chain sampler {self.sampler!r}")


def sample_goe(dim: int, seed: int) -> np.ndarray:
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    m = np.random.default_rng(seed).standard_normal((dim, dim))
    return (m + m.T) / 2


def perturbation_norm(h: np.ndarray | FullSpaceOperator, delta: float = 1.0) -> float:
    """Spectral norm of ``delta * h``; a 1-D array is read as a diagonal."""
    if isinstance(h, FullSpaceOperator):
        h = h.diagonal if h.diagonal is not None else h.matrix
    h = np.asarray(h)
    if h.size == 0:
        return 0.0
    if h.ndim == 1:
        return abs(delta) * float(np.abs(h).max())
    if np.allclose(h, h.conj().T, atol=0, rtol=0):
        return abs(delta) * float(np.abs(np.linalg.eigvalsh(h)).max())
    return abs(delta) * float(np.linalg.norm(h, 2))


def hermitian_unitary(h: np.ndarray, delta: float) -> np.ndarray:
    """exp(-i delta h) for Hermitian ``h``."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * delta * w)) @ v.conj().T


def perturbed_kicked_top(spec: FloquetSpec) -> tuple[np.ndarray, float]:
    """exp(-i a Jx) exp(-i delta H_GOE) exp(-i c Jz^2) and ||delta H_GOE||."""
    noise = spec.noise
    if noise is None or noise.kind != "GOE":
        raise ValueError("spec needs GOE noise")
    dim = spec.block.dim
    h = sample_goe(dim, noise.seed)
    if h.shape != (dim, dim):
        raise ValueError(f"noise dimension {h.shape[0]} does not match block dimension {dim}")
    kick = kick_matrix(spec.block.two_j, float(spec.kick_angle))
    twist = twist_diagonal(spec.block, spec.twist_coefficient)
    if noise.delta == 0:
        return kick * twist[None, :], 0.0
    w, v = np.linalg.eigh(h)
    g = (v * np.exp(-1j * noise.delta * w)) @ v.T
    norm = noise.delta * float(np.abs(w).max())
    return kick @ (g * twist[None, :]), norm


def chain_weights(n_spins: int, delta: float, seed: int, sampler: ChainSampler = "normal") -> np.ndarray:
    rng = np.random.default_rng(seed)
    if sampler == "normal":
        return delta * rng.standard_normal(n_spins)
    if sampler == "uniform":
        return delta * rng.uniform(0.0, 2 * np.pi, n_spins)
    raise ValueError(f"unknown chain sampler {sampler!r}")


def chain_diagonal(n_spins: int, weights: np.ndarray) -> np.ndarray:
    """Diagonal of sum_i w_i sigma^z_i sigma^z_{i+1 mod N}."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n_spins,):
        raise ValueError(f"expected {n_spins} weights, got shape {weights.shape}")
    s = spin_z_values(n_spins).astype(float)
    bonds = s * np.roll(s, -1, axis=1)
    return bonds @ weights


def sample_random_chain(
    n_spins: int,
    delta: float,
    seed: int,
    sampler: ChainSampler = "normal",
    cap: int = DEFAULT_FULL_SPACE_CAP,
) -> FullSpaceOperator:
    check_cap(n_spins, cap)
    return FullSpaceOperator(n_spins, diagonal=chain_diagonal(n_spins, chain_weights(n_spins, delta, seed, sampler)))


def _chain_noise_diagonal(n_spins: int, noise: NoiseSpec | None) -> np.ndarray:
    if noise is None or noise.delta == 0:
        return np.zeros(2**n_spins)
    if noise.kind != "RandomChain":
        raise ValueError("full-space perturbation needs RandomChain noise")
    if noise.n_spins != n_spins:
        raise ValueError(f"noise is for N={noise.n_spins}, operator has N={n_spins}")
    return sample_random_chain(n_spins, noise.delta, noise.seed, noise.sampler).diagonal


def perturbed_full_floquet(
    n_spins: int,
    tau_a: float,
    b_x: float,
    noise: NoiseSpec | None,
    cap: int = DEFAULT_FULL_SPACE_CAP,
) -> FullSpaceOperator:
    """U_K exp(-i H_RC) exp(-i H_A); with no noise this is the ideal ATA Floquet operator."""
    check_cap(n_spins, cap)
    diag = _chain_noise_diagonal(n_spins, noise) + ata_ising_diagonal(n_spins, tau_a)
    return FullSpaceOperator(n_spins, matrix=kick_full(n_spins, b_x) * np.exp(-1j * diag)[None, :])


def chain_block_spectrum(
    n_spins: int,
    tau_a: float,
    b_x: float,
    noise: NoiseSpec | None,
    two_j: int | None = None,
) -> tuple[EigenphaseSet, float]:
    """Eigenphases of the chain-perturbed operator compressed onto one unperturbed J^2 eigenspace.

    Same numbers as ``block_project_spectrum(perturbed_full_floquet(...), allow_broken=True)``
    for that block, without materialising the 2^N x 2^N kick. Returns the phases
    and ``||H_RC||``.
    """
    two_j = n_spins if two_j is None else two_j
    basis = j2_eigenspaces(n_spins)[two_j]
    noise_diag = _chain_noise_diagonal(n_spins, noise)
    diag = noise_diag + ata_ising_diagonal(n_spins, tau_a)
    compressed = basis.T @ apply_kick(n_spins, b_x, np.exp(-1j * diag)[:, None] * basis)
    values = np.linalg.eigvals(compressed)
    meta = {
        "symmetry_broken": bool(np.any(noise_diag)),
        "min_modulus": float(np.abs(values).min()),
        "two_j": two_j,
    }
    return EigenphaseSet(phases_from_eigenvalues(values), meta=meta), perturbation_norm(noise_diag)
