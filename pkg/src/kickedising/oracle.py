"""Brute-force 2^N constructions used to check the block reduction.

Site 0 is the leftmost Kronecker factor (most significant bit); bit value 0
is spin up (sigma^z = +1).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from kickedising.floquet import build_kicked_top, map_ata_parameters, phases_from_eigenvalues
from kickedising.spin import (
    DEFAULT_FULL_SPACE_CAP,
    SpinBlock,
    block_multiplicities,
    check_cap,
    collective_sparse,
)


class SymmetryError(RuntimeError):
    def __init__(self, commutator_norm: float, tol: float):
        super().__init__(f"operator does not commute with J^2: ||[U, J^2]|| = {commutator_norm:.3e} > {tol:.1e}")
        self.commutator_norm = commutator_norm


class FullSpaceOperator:
    """Dense (or diagonal) operator on the 2^N space of N spins 1/2."""

    def __init__(self, n_spins: int, matrix: np.ndarray | None = None, diagonal: np.ndarray | None = None):
        if (matrix is None) == (diagonal is None):
            raise ValueError("pass exactly one of matrix or diagonal")
        dim = 2**n_spins
        if matrix is not None and matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {matrix.shape} does not match 2^{n_spins}")
        if diagonal is not None and diagonal.shape != (dim,):
            raise ValueError(f"diagonal shape {diagonal.shape} does not match 2^{n_spins}")
        self.n_spins = n_spins
        self.diagonal = diagonal
        self._matrix = matrix

    @property
    def N(self) -> int:
        return self.n_spins

    @property
    def dim(self) -> int:
        return 2**self.n_spins

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.diag(self.diagonal)
        return self._matrix

    def __repr__(self) -> str:
        kind = "diagonal" if self.diagonal is not None else "dense"
        return f"FullSpaceOperator(N={self.n_spins}, {kind})"


@lru_cache(maxsize=16)
def spin_z_values(n_spins: int) -> np.ndarray:
    """(2^N, N) array of sigma^z eigenvalues per computational basis state."""
    idx = np.arange(2**n_spins)[:, None]
    bits = (idx >> np.arange(n_spins - 1, -1, -1)) & 1
    out = (1 - 2 * bits).astype(np.int8)
    out.setflags(write=False)
    return out


def ata_ising_diagonal(n_spins: int, tau_a: float) -> np.ndarray:
    """Diagonal of tau_A sum_{i<k} sigma^z_i sigma^z_k, via ((sum s)^2 - N) / 2."""
    total = spin_z_values(n_spins).sum(axis=1).astype(np.int64)
    return tau_a * ((total**2 - n_spins) // 2).astype(float)


def build_ata_hamiltonian(n_spins: int, tau_a: float, cap: int = DEFAULT_FULL_SPACE_CAP) -> FullSpaceOperator:
    check_cap(n_spins, cap)
    return FullSpaceOperator(n_spins, diagonal=ata_ising_diagonal(n_spins, tau_a))


def single_spin_kick(b_x: float) -> np.ndarray:
    """exp(-i b_x sigma^x)."""
    c, s = np.cos(b_x), np.sin(b_x)
    return np.array([[c, -1j * s], [-1j * s, c]])


def kick_full(n_spins: int, b_x: float) -> np.ndarray:
    return reduce(np.kron, [single_spin_kick(b_x)] * n_spins)


def apply_kick(n_spins: int, b_x: float, states: np.ndarray) -> np.ndarray:
    """Apply exp(-i b_x sum sigma^x) to the columns of ``states`` without forming it."""
    r = single_spin_kick(b_x)
    cols = states.shape[1]
    t = states.reshape((2,) * n_spins + (cols,))
    for site in range(n_spins):
        t = np.moveaxis(np.tensordot(r, t, axes=([1], [site])), 0, site)
    return t.reshape(2**n_spins, cols)


def build_ata_floquet(n_spins: int, tau_a: float, b_x: float, cap: int = DEFAULT_FULL_SPACE_CAP) -> FullSpaceOperator:
    """U_K(b_x) U_A(tau_A) = exp(-i b_x sum sigma^x) exp(-i H_A)."""
    check_cap(n_spins, cap)
    phases = np.exp(-1j * ata_ising_diagonal(n_spins, tau_a))
    return FullSpaceOperator(n_spins, matrix=kick_full(n_spins, b_x) * phases[None, :])


@lru_cache(maxsize=16)
def j2_eigenspaces(n_spins: int, cap: int = DEFAULT_FULL_SPACE_CAP) -> dict[int, np.ndarray]:
    """Orthonormal real basis of each J^2 eigenspace, keyed by 2j.

    J^2 commutes with Jz, so it is diagonalised one magnetisation sector at a time.
    """
    check_cap(n_spins, cap)
    j2 = collective_sparse(n_spins, "J2", cap).real.tocsr()
    ups = (spin_z_values(n_spins) > 0).sum(axis=1)
    dim = 2**n_spins
    columns: dict[int, list[np.ndarray]] = {}
    for k in range(n_spins + 1):
        idx = np.flatnonzero(ups == k)
        w, v = np.linalg.eigh(j2[idx][:, idx].toarray())
        two_j = np.rint(np.sqrt(1 + 4 * w) - 1).astype(int)
        for t in np.unique(two_j):
            sel = v[:, two_j == t]
            full = np.zeros((dim, sel.shape[1]))
            full[idx] = sel
            columns.setdefault(int(t), []).append(full)
    out = {t: np.hstack(columns[t]) for t in sorted(columns, reverse=True)}
    for basis in out.values():
        basis.setflags(write=False)
    return out


@dataclass(frozen=True)
class BlockSpectra:
    """Per-j eigenphases (all multiplicity copies pooled), keyed by 2j."""

    n_spins: int
    spectra: dict[int, np.ndarray]
    commutator_norm: float
    symmetry_broken: bool

    def __getitem__(self, two_j: int) -> np.ndarray:
        return self.spectra[two_j]


def commutator_with_j2(u: np.ndarray, n_spins: int) -> float:
    j2 = collective_sparse(n_spins, "J2")
    comm = np.asarray(j2 @ u) - np.asarray((j2.T @ u.T).T)
    return float(np.linalg.norm(comm, 2))


def block_project_spectrum(
    u: FullSpaceOperator | np.ndarray,
    *,
    tol: float = 1e-8,
    allow_broken: bool = False,
) -> BlockSpectra:
    """Eigenphases of ``u`` restricted to each J^2 eigenspace.

    With ``allow_broken`` a non-commuting ``u`` is compressed onto the J^2
    eigenspaces anyway; the compressed blocks are contractions, so only the
    arguments of their eigenvalues are kept and the result is flagged.
    """
    mat = u.matrix if isinstance(u, FullSpaceOperator) else np.asarray(u)
    n_spins = int(round(np.log2(mat.shape[0])))
    if 2**n_spins != mat.shape[0]:
        raise ValueError(f"dimension {mat.shape[0]} is not a power of two")
    comm = commutator_with_j2(mat, n_spins)
    broken = comm > tol
    if broken and not allow_broken:
        raise SymmetryError(comm, tol)
    spectra = {}
    for two_j, basis in j2_eigenspaces(n_spins).items():
        restricted = basis.T @ mat @ basis
        spectra[two_j] = phases_from_eigenvalues(np.linalg.eigvals(restricted))
    return BlockSpectra(n_spins, spectra, comm, bool(broken))


def circular_distance(a: np.ndarray, b: np.ndarray | float) -> np.ndarray:
    d = np.mod(np.asarray(a) - np.asarray(b) + np.pi, 2 * np.pi) - np.pi
    return np.abs(d)


def align_global_phase(reference: np.ndarray, other: np.ndarray) -> tuple[float, float]:
    """Best constant offset ``theta`` with ``other ~ reference + theta`` on the circle.

    Both lists are sorted; every cyclic pairing is tried and the offset that
    minimises the largest circular mismatch is returned with that mismatch.
    """
    a = np.sort(np.asarray(reference, dtype=float))
    b = np.sort(np.asarray(other, dtype=float))
    if a.shape != b.shape:
        raise ValueError(f"spectra have different sizes: {a.size} vs {b.size}")
    best = (0.0, np.inf)
    for shift in range(a.size):
        d = np.roll(b, -shift) - a
        e = np.mod(d - d[0] + np.pi, 2 * np.pi) - np.pi
        lo, hi = e.min(), e.max()
        err = (hi - lo) / 2
        if err < best[1]:
            theta = float(np.mod(d[0] + (hi + lo) / 2 + np.pi, 2 * np.pi) - np.pi)
            best = (theta, float(err))
    return best


def check_block_equivalence(n_spins: int, tau_a: float, b_x: float) -> dict[int, tuple[float, float]]:
    """Compare every J^2 block of the full ATA Floquet operator with its mapped kicked top.

    Returns ``{2j: (global phase offset, max circular error)}``.
    """
    full = build_ata_floquet(n_spins, tau_a, b_x)
    projected = block_project_spectrum(full)
    out = {}
    for block in block_multiplicities(n_spins):
        spec = map_ata_parameters(tau_a, b_x, block, n_spins / 2)
        kt = phases_from_eigenvalues(np.linalg.eigvals(build_kicked_top(spec)))
        out[block.two_j] = align_global_phase(np.repeat(kt, block.multiplicity), projected[block.two_j])
    return out


def expected_global_phase(n_spins: int, tau_a: float) -> float:
    """exp(-i H_A) = exp(+i tau_A N / 2) exp(-i 2 tau_A Jz^2) on every block."""
    return float(np.mod(tau_a * n_spins / 2 + np.pi, 2 * np.pi) - np.pi)


__all__ = [
    "BlockSpectra",
    "FullSpaceOperator",
    "SpinBlock",
    "SymmetryError",
    "align_global_phase",
    "apply_kick",
    "ata_ising_diagonal",
    "block_project_spectrum",
    "build_ata_floquet",
    "build_ata_hamiltonian",
    "check_block_equivalence",
    "circular_distance",
    "commutator_with_j2",
    "expected_global_phase",
    "j2_eigenspaces",
    "kick_full",
    "spin_z_values",
]
