"""Kicked-top Floquet operators per spin block and their eigenphases.

A block unitary always has the form ``exp(-i a Jx) exp(-i c Jz^2)``. The kick
angle ``a`` and twist coefficient ``c`` are derived from a :class:`FloquetSpec`
according to its convention:

``KT_paper``
    kicked top with ``a = alpha`` and ``c = tau / (2j + 1)``.
``ATA_derived``
    one block of the all-to-all Ising model, ``alpha = b_x`` and ``tau = tau_A``.
    Since ``b_x sum_i sigma^x_i = 2 b_x Jx`` and
    ``tau_A sum_{i<k} sigma^z_i sigma^z_k = 2 tau_A Jz^2 - tau_A N / 2``, the block
    carries ``a = 2 b_x`` and ``c = 2 tau_A`` up to a global phase.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import TYPE_CHECKING, Literal

import numpy as np
from scipy.linalg import eigh_tridiagonal

from kickedising.spin import SpinBlock, jx_tridiagonal

if TYPE_CHECKING:
    from kickedising.noise import NoiseSpec

Convention = Literal["KT_paper", "ATA_derived"]
CONVENTIONS: tuple[str, ...] = ("KT_paper", "ATA_derived")


class NonUnitaryError(ValueError):
    def __init__(self, deviation: float, tol: float):
        super().__init__(f"matrix is not unitary: ||U^dag U - I|| = {deviation:.3e} > {tol:.1e}")
        self.deviation = deviation


@dataclass(frozen=True)
class FloquetSpec:
    alpha: float
    tau: float
    block: SpinBlock
    convention: Convention = "KT_paper"
    noise: "NoiseSpec | None" = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.alpha) and np.isfinite(self.tau)):
            raise ValueError(f"alpha and tau must be finite, got {self.alpha}, {self.tau}")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")

    @property
    def kick_angle(self) -> float:
        return 2.0 * self.alpha if self.convention == "ATA_derived" else float(self.alpha)

    @property
    def twist_coefficient(self) -> float:
        """Coefficient ``c`` multiplying Jz^2 in the exponent."""
        if self.convention == "ATA_derived":
            return 2.0 * self.tau
        return self.tau / self.block.dim

    def as_kicked_top(self) -> "FloquetSpec":
        """The same unitary expressed in the ``KT_paper`` convention."""
        if self.convention == "KT_paper":
            return self
        return replace(
            self,
            alpha=self.kick_angle,
            tau=self.twist_coefficient * self.block.dim,
            convention="KT_paper",
        )


@dataclass(frozen=True)
class EigenphaseSet:
    """Sorted eigenphases on (-pi, pi].

    ``sector`` is ``"even"``/``"odd"`` for parity-resolved halves of a block and
    ``None`` for a whole block.
    """

    phases: np.ndarray
    spec: FloquetSpec | None = None
    sector: str | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        ph = np.asarray(self.phases, dtype=float)
        if ph.ndim != 1:
            raise ValueError("phases must be one-dimensional")
        if np.any(np.diff(ph) < 0):
            raise ValueError("phases must be sorted ascending")
        if ph.size and (ph[0] <= -np.pi or ph[-1] > np.pi):
            raise ValueError("phases must lie in (-pi, pi]")
        ph.setflags(write=False)
        object.__setattr__(self, "phases", ph)

    def __len__(self) -> int:
        return self.phases.size


def wrap_phase(x: np.ndarray | float) -> np.ndarray:
    """Map angles onto the branch (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(y <= -np.pi, np.pi, y)


def phases_from_eigenvalues(values: np.ndarray) -> np.ndarray:
    ang = np.angle(values)
    ang = np.where(ang <= -np.pi, np.pi, ang)
    return np.sort(ang)


def unitarity_deviation(u: np.ndarray) -> float:
    """Operator-norm deviation ||U^dag U - I||; the Frobenius norm short-circuits small cases."""
    diff = u.conj().T @ u - np.eye(u.shape[0])
    frob = float(np.linalg.norm(diff))
    if frob < 1e-13:
        return frob
    return float(np.linalg.norm(diff, 2))


def eigenphases(
    u: np.ndarray,
    spec: FloquetSpec | None = None,
    *,
    sector: str | None = None,
    tol: float = 1e-8,
) -> EigenphaseSet:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    dev = unitarity_deviation(u)
    if dev > tol:
        raise NonUnitaryError(dev, tol)
    return EigenphaseSet(phases_from_eigenvalues(np.linalg.eigvals(u)), spec, sector)


@lru_cache(maxsize=128)
def jx_eigensystem(two_j: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and real orthogonal eigenvectors of Jx, cached per block."""
    if two_j == 0:
        w, v = np.zeros(1), np.ones((1, 1))
    else:
        w, v = eigh_tridiagonal(*jx_tridiagonal(two_j))
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


@lru_cache(maxsize=64)
def kick_matrix(two_j: int, angle: float) -> np.ndarray:
    """exp(-i angle Jx) through the cached Jx eigenbasis."""
    w, v = jx_eigensystem(two_j)
    out = (v * np.exp(-1j * angle * w)) @ v.T
    out.setflags(write=False)
    return out


def twist_diagonal(block: SpinBlock, coefficient: float) -> np.ndarray:
    """Diagonal of exp(-i c Jz^2), exact."""
    m = block.magnetic_numbers()
    return np.exp(-1j * coefficient * m**2)


def _require_noise_free(spec: FloquetSpec) -> None:
    if spec.noise is not None:
        raise ValueError("spec carries noise; use kickedising.noise.perturbed_kicked_top")


def build_kicked_top(spec: FloquetSpec) -> np.ndarray:
    """U = exp(-i a Jx) exp(-i c Jz^2) on the block of ``spec``."""
    _require_noise_free(spec)
    kick = kick_matrix(spec.block.two_j, float(spec.kick_angle))
    return kick * twist_diagonal(spec.block, spec.twist_coefficient)[None, :]


def map_ata_parameters(tau_a: float, b_x: float, block: SpinBlock, j_max: float) -> FloquetSpec:
    """Kicked-top spec equivalent to the spin-j block of the all-to-all model."""
    if block.j > j_max:
        raise ValueError(f"block j={block.j} exceeds J_max={j_max}")
    return FloquetSpec(alpha=b_x, tau=tau_a, block=block, convention="ATA_derived")


def printed_twist_map(tau_a: float, j: float, j_total: float) -> float:
    """tau_T = tau_A j / (2 (2J + 1)), the literal published parameter map.

    Kept for figure bookkeeping only; it does not reproduce the block spectra.
    """
    return tau_a * j / (2 * (2 * j_total + 1))


@lru_cache(maxsize=128)
def parity_bases(two_j: int) -> tuple[np.ndarray, np.ndarray]:
    """Real orthonormal bases of the even and odd subspaces under m -> -m.

    exp(-i pi Jx) maps |m> to a fixed phase times |-m>, so both the kick and the
    Jz^2 twist are block diagonal in these bases.
    """
    d = two_j + 1
    half = d // 2
    s = 1 / np.sqrt(2)
    even = np.zeros((d, d - half))
    odd = np.zeros((d, half))
    for k in range(half):
        even[k, k] = even[d - 1 - k, k] = s
        odd[k, k] = s
        odd[d - 1 - k, k] = -s
    if d % 2:
        even[half, half] = 1.0
    even.setflags(write=False)
    odd.setflags(write=False)
    return even, odd


@lru_cache(maxsize=64)
def _sector_kicks(two_j: int, angle: float) -> tuple[np.ndarray, np.ndarray]:
    kick = kick_matrix(two_j, angle)
    return tuple(b.T @ kick @ b for b in parity_bases(two_j))


def parity_resolved_eigenphases(spec: FloquetSpec) -> tuple[EigenphaseSet, EigenphaseSet]:
    """Eigenphases of the noise-free block unitary split into its two parity sectors."""
    _require_noise_free(spec)
    two_j = spec.block.two_j
    m2 = spec.block.magnetic_numbers() ** 2
    out = []
    for name, basis, kick in zip(("even", "odd"), parity_bases(two_j), _sector_kicks(two_j, float(spec.kick_angle))):
        # each basis column touches +-m only, so |column|^2 picks out m^2
        twist = np.exp(-1j * spec.twist_coefficient * ((basis**2).T @ m2))
        u = kick * twist[None, :]
        if u.shape[0] == 0:
            out.append(EigenphaseSet(np.zeros(0), spec, name))
        else:
            out.append(eigenphases(u, spec, sector=name))
    return out[0], out[1]
