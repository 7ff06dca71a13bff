"""Collective spin operators and the SU(2) decomposition of N spin-1/2 particles.

Spin labels are stored as ``two_j = 2j`` so that half-integers stay exact.
Every matrix uses the descending basis ``m = j, j-1, ..., -j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Literal

import numpy as np
import scipy.sparse as sp

SpinKind = Literal["Jx", "Jy", "Jz", "Jz2", "J2"]
KINDS: tuple[str, ...] = ("Jx", "Jy", "Jz", "Jz2", "J2")

DEFAULT_FULL_SPACE_CAP = 12


class ResourceError(RuntimeError):
    """Raised when a full 2^N construction exceeds the configured spin cap."""


def check_cap(n_spins: int, cap: int = DEFAULT_FULL_SPACE_CAP) -> None:
    if n_spins < 1:
        raise ValueError(f"need at least one spin, got N={n_spins}")
    if n_spins > cap:
        raise ResourceError(
            f"N={n_spins} exceeds the full-space cap {cap} (matrix dimension 2^{n_spins})"
        )


def two_j_from(j: float | int | Fraction | str) -> int:
    """Convert a spin label to the integer 2j, rejecting anything off the half-integer grid."""
    try:
        value = Fraction(j)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid spin label {j!r}") from exc
    doubled = 2 * value
    if doubled.denominator != 1 or doubled < 0:
        raise ValueError(f"j must be a non-negative multiple of 1/2, got {j!r}")
    return int(doubled)


@dataclass(frozen=True, order=True)
class SpinBlock:
    """One SU(2) irrep: spin ``two_j / 2`` appearing ``multiplicity`` times."""

    two_j: int
    multiplicity: int = field(default=1, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.two_j, (int, np.integer)) or self.two_j < 0:
            raise ValueError(f"two_j must be a non-negative integer, got {self.two_j!r}")
        if self.multiplicity < 1:
            raise ValueError(f"multiplicity must be positive, got {self.multiplicity}")

    @classmethod
    def from_j(cls, j: float | int | Fraction | str, multiplicity: int = 1) -> "SpinBlock":
        return cls(two_j_from(j), multiplicity)

    @property
    def j(self) -> float:
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.two_j + 1

    def magnetic_numbers(self) -> np.ndarray:
        """m values in basis order (descending)."""
        return (self.two_j - 2 * np.arange(self.dim)) / 2

    def label(self) -> str:
        return str(self.two_j // 2) if self.two_j % 2 == 0 else f"{self.two_j}/2"


@dataclass(frozen=True)
class SpinOperator:
    block: SpinBlock
    kind: str
    matrix: np.ndarray


def _as_block(block: SpinBlock | float | int | Fraction) -> SpinBlock:
    return block if isinstance(block, SpinBlock) else SpinBlock.from_j(block)


@lru_cache(maxsize=256)
def _ladder_coefficients(two_j: int) -> np.ndarray:
    # <m+1|J+|m> for the descending basis, i.e. superdiagonal of J+
    j = two_j / 2
    m = (two_j - 2 * np.arange(1, two_j + 1)) / 2
    return np.sqrt(j * (j + 1) - m * (m + 1))


def build_spin_operator(block: SpinBlock | float | int | Fraction, kind: SpinKind) -> SpinOperator:
    """Dense angular-momentum matrix of the requested kind on a spin-j block."""
    block = _as_block(block)
    if kind not in KINDS:
        raise ValueError(f"unknown operator kind {kind!r}; expected one of {KINDS}")
    d = block.dim
    m = block.magnetic_numbers()
    if kind == "Jz":
        mat = np.diag(m).astype(complex)
    elif kind == "Jz2":
        mat = np.diag(m**2).astype(complex)
    elif kind == "J2":
        mat = block.j * (block.j + 1) * np.eye(d, dtype=complex)
    else:
        jplus = np.diag(_ladder_coefficients(block.two_j), 1)
        if kind == "Jx":
            mat = (0.5 * (jplus + jplus.T)).astype(complex)
        else:
            mat = -0.5j * (jplus - jplus.T)
    mat.setflags(write=False)
    return SpinOperator(block, kind, mat)


def jx_tridiagonal(two_j: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the real symmetric tridiagonal Jx."""
    return np.zeros(two_j + 1), 0.5 * _ladder_coefficients(two_j)


def block_multiplicities(n_spins: int) -> list[SpinBlock]:
    """Irreps in the N-fold tensor power of spin 1/2, from j = N/2 downwards.

    Multiplicities come from adding one spin at a time: j -> j +- 1/2.
    """
    if n_spins < 1:
        raise ValueError(f"need at least one spin, got N={n_spins}")
    counts = {1: 1}
    for _ in range(n_spins - 1):
        nxt: dict[int, int] = {}
        for two_j, mult in counts.items():
            nxt[two_j + 1] = nxt.get(two_j + 1, 0) + mult
            if two_j > 0:
                nxt[two_j - 1] = nxt.get(two_j - 1, 0) + mult
        counts = nxt
    return [SpinBlock(t, counts[t]) for t in sorted(counts, reverse=True)]


_PAULI = {
    "x": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
    "y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex)),
    "z": sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex)),
}


def _site_operator(single: sp.spmatrix, site: int, n_spins: int) -> sp.csr_matrix:
    eye = sp.identity(2, dtype=complex, format="csr")
    factors = [single if k == site else eye for k in range(n_spins)]
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), factors)


@lru_cache(maxsize=32)
def _collective_sparse(n_spins: int, axis: str) -> sp.csr_matrix:
    total = sum(_site_operator(_PAULI[axis], i, n_spins) for i in range(n_spins))
    return (0.5 * total).tocsr()


def collective_sparse(n_spins: int, kind: SpinKind, cap: int = DEFAULT_FULL_SPACE_CAP) -> sp.csr_matrix:
    """Sparse version of :func:`full_space_collective` (computational basis, site 0 leftmost)."""
    check_cap(n_spins, cap)
    if kind not in KINDS:
        raise ValueError(f"unknown operator kind {kind!r}; expected one of {KINDS}")
    if kind in ("Jx", "Jy", "Jz"):
        return _collective_sparse(n_spins, kind[1])
    jz = _collective_sparse(n_spins, "z")
    if kind == "Jz2":
        return (jz @ jz).tocsr()
    jx = _collective_sparse(n_spins, "x")
    jy = _collective_sparse(n_spins, "y")
    return (jx @ jx + jy @ jy + jz @ jz).tocsr()


def full_space_collective(n_spins: int, kind: SpinKind, cap: int = DEFAULT_FULL_SPACE_CAP) -> np.ndarray:
    """Dense collective operator 1/2 sum_i sigma^q_i on the 2^N space."""
    return collective_sparse(n_spins, kind, cap).toarray()
