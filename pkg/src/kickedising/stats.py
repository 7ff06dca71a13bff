"""Spacing statistics: spacing ratios, nearest-neighbour spacing densities and
the Dyson-Mehta rigidity, plus Poisson/GOE/GUE reference samples.

Eigenphase sets are treated as circular spectra (the wrap-around gap counts);
plain arrays are line spectra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Literal, NamedTuple, Sequence

import numpy as np

from kickedising.floquet import EigenphaseSet

R_POISSON = 2 * np.log(2) - 1
R_GOE = 4 - 2 * np.sqrt(3)
R_GUE = 2 * np.sqrt(3) / np.pi - 0.5

ZERO_SPACING_RTOL = 1e-12
DEFAULT_BINS = 50
DEFAULT_BIN_RANGE = (0.0, 4.0)
DEFAULT_L_GRID = tuple(float(x) for x in range(1, 21))

EnsembleKind = Literal["Poisson", "GOE", "GUE"]
Spectrum = EigenphaseSet | np.ndarray


@dataclass(frozen=True)
class SpacingEnsemble:
    spacings: np.ndarray
    source: tuple[str, ...] = ()
    excluded: int = 0

    def __len__(self) -> int:
        return self.spacings.size


@dataclass
class StatisticReport:
    r_mean: float
    r_stderr: float
    n_ratios: int
    n_excluded: int
    nns_histogram: tuple[np.ndarray, np.ndarray]
    delta3_curve: list[tuple[float, float]]
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        edges, dens = self.nns_histogram
        return {
            "r_mean": float(self.r_mean),
            "r_stderr": float(self.r_stderr),
            "n_ratios": int(self.n_ratios),
            "n_excluded": int(self.n_excluded),
            "nns_histogram": {"edges": [float(x) for x in edges], "density": [float(x) for x in dens]},
            "delta3_curve": [[float(a), float(b)] for a, b in self.delta3_curve],
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StatisticReport":
        h = d["nns_histogram"]
        return cls(
            d["r_mean"],
            d["r_stderr"],
            d["n_ratios"],
            d["n_excluded"],
            (np.asarray(h["edges"]), np.asarray(h["density"])),
            [tuple(p) for p in d["delta3_curve"]],
            d.get("extra", {}),
        )


class RatioStatistic(NamedTuple):
    mean: float
    stderr: float
    count: int
    excluded: int


def raw_spacings(spectrum: Spectrum) -> np.ndarray:
    """Adjacent gaps; circular for eigenphase sets (n gaps from n phases)."""
    if isinstance(spectrum, EigenphaseSet):
        ph = spectrum.phases
        return np.diff(np.append(ph, ph[0] + 2 * np.pi))
    return np.diff(np.sort(np.asarray(spectrum, dtype=float)))


def _set_id(spectrum: Spectrum, i: int) -> str:
    if isinstance(spectrum, EigenphaseSet):
        return str(spectrum.meta.get("id", i))
    return str(i)


def unfold_circular(phases: EigenphaseSet | np.ndarray) -> SpacingEnsemble:
    """Circular spacings divided by their mean; degeneracies are dropped and counted."""
    if not isinstance(phases, EigenphaseSet):
        phases = EigenphaseSet(np.sort(np.asarray(phases, dtype=float)))
    if len(phases) < 3:
        raise ValueError(f"need at least 3 phases, got {len(phases)}")
    s = raw_spacings(phases)
    keep = s >= ZERO_SPACING_RTOL * s.mean()
    s = s[keep]
    return SpacingEnsemble(s / s.mean(), (_set_id(phases, 0),), int((~keep).sum()))


def pool_spacings(spectra: Iterable[EigenphaseSet]) -> SpacingEnsemble:
    parts = [unfold_circular(p) for p in spectra]
    if not parts:
        raise ValueError("nothing to pool")
    return SpacingEnsemble(
        np.concatenate([p.spacings for p in parts]),
        tuple(s for p in parts for s in p.source),
        sum(p.excluded for p in parts),
    )


def ratio_samples(spectrum: Spectrum) -> tuple[np.ndarray, int]:
    """min/max ratios of consecutive spacings in one spectrum and the number of pairs dropped.

    Pairs touching a degenerate spacing (< 1e-12 of the mean) are dropped.
    """
    s = raw_spacings(spectrum)
    circular = isinstance(spectrum, EigenphaseSet)
    if (s.size if circular else s.size + 1) < 3:
        raise ValueError("need at least 3 levels for a spacing ratio")
    if circular:
        a, b = s, np.roll(s, 1)
    else:
        a, b = s[1:], s[:-1]
    tiny = ZERO_SPACING_RTOL * s.mean()
    ok = (a >= tiny) & (b >= tiny)
    a, b = a[ok], b[ok]
    return np.minimum(a, b) / np.maximum(a, b), int((~ok).sum())


def _iter_spectra(spectra) -> Iterable[Spectrum]:
    if isinstance(spectra, EigenphaseSet):
        yield spectra
    elif isinstance(spectra, np.ndarray):
        if spectra.ndim == 1:
            yield spectra
        elif spectra.ndim == 2:
            yield from spectra
        else:
            raise ValueError("expected a 1-D spectrum or a 2-D batch of spectra")
    else:
        for s in spectra:
            yield from _iter_spectra(s)


def _batch_ratios(levels: np.ndarray) -> np.ndarray:
    s = np.diff(np.sort(levels, axis=1), axis=1)
    a, b = s[:, 1:], s[:, :-1]
    tiny = ZERO_SPACING_RTOL * s.mean(axis=1, keepdims=True)
    ok = (a >= tiny) & (b >= tiny)
    return (np.minimum(a, b) / np.maximum(a, b))[ok], int((~ok).sum())


def r_statistic(spectra) -> RatioStatistic:
    """Mean spacing ratio pooled over one or several spectra.

    Each spectrum contributes only its own consecutive pairs.
    """
    if isinstance(spectra, np.ndarray) and spectra.ndim == 2:
        r, excluded = _batch_ratios(spectra)
    else:
        chunks, excluded = [], 0
        for spec in _iter_spectra(spectra):
            r_part, ex = ratio_samples(spec)
            chunks.append(r_part)
            excluded += ex
        if not chunks:
            raise ValueError("no spectra given")
        r = np.concatenate(chunks)
    if r.size == 0:
        raise ValueError("no usable spacing pairs")
    # exactly rounded sums make the result independent of pooling order
    mean = math.fsum(r) / r.size
    stderr = math.sqrt(math.fsum((r - mean) ** 2) / (r.size - 1) / r.size) if r.size > 1 else float("nan")
    return RatioStatistic(mean, stderr, int(r.size), excluded)


def nns_histogram(
    ensemble: SpacingEnsemble | np.ndarray,
    bins: int | Sequence[float] = DEFAULT_BINS,
    bin_range: tuple[float, float] = DEFAULT_BIN_RANGE,
) -> tuple[np.ndarray, np.ndarray]:
    """Probability density of the spacings over the bin layout (edges, densities)."""
    s = ensemble.spacings if isinstance(ensemble, SpacingEnsemble) else np.asarray(ensemble, dtype=float)
    if s.size == 0:
        raise ValueError("empty spacing ensemble")
    if np.ndim(bins) == 0:
        edges = np.linspace(bin_range[0], bin_range[1], int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
    counts, edges = np.histogram(s, bins=edges)
    if counts.sum() == 0:
        raise ValueError("no spacings fall inside the histogram range")
    return edges, counts / (counts.sum() * np.diff(edges))


def _delta3_windows(levels: np.ndarray, starts: np.ndarray, length: float) -> np.ndarray:
    lo = np.searchsorted(levels, starts, side="right")
    hi = np.searchsorted(levels, starts + length, side="right")
    counts = hi - lo
    width = max(int(counts.max()), 1)
    k = np.arange(width)
    mask = k[None, :] < counts[:, None]
    idx = np.minimum(lo[:, None] + k[None, :], levels.size - 1)
    u = np.where(mask, levels[idx] - starts[:, None], length)
    rest = length - u
    i0 = rest.sum(axis=1)
    i1 = 0.5 * (u * rest).sum(axis=1)
    i2 = ((2 * k + 1)[None, :] * rest).sum(axis=1)
    return (i2 - i0**2 / length - 12 * i1**2 / length**3) / length


def delta3(
    spectrum: Spectrum,
    l_grid: Sequence[float] = DEFAULT_L_GRID,
    stride_fraction: float = 0.25,
) -> np.ndarray:
    """Dyson-Mehta rigidity for each window length in ``l_grid``.

    For each L the least-squares straight-line misfit of the staircase,
    (1/L) min_{a,b} int (N(x) - a x - b)^2 dx, is averaged over windows placed
    every ``stride_fraction * L``. Eigenphase sets are unfolded to unit mean
    spacing and extended periodically; line spectra are rescaled by their mean
    spacing and windowed inside their span.
    """
    ls = np.asarray(l_grid, dtype=float)
    if np.any(ls <= 0):
        raise ValueError("window lengths must be positive")
    if isinstance(spectrum, EigenphaseSet):
        n = len(spectrum)
        x = (spectrum.phases + np.pi) * n / (2 * np.pi)
        levels = np.concatenate([x, x + n])
        if ls.max() > n:
            raise ValueError(f"L={ls.max()} exceeds the circular spectrum length {n}")
        starts_for = lambda L: np.arange(0.0, n, stride_fraction * L)  # noqa: E731
    else:
        x = np.sort(np.asarray(spectrum, dtype=float))
        if x.size < 2:
            raise ValueError("need at least 2 levels")
        levels = (x - x[0]) * (x.size - 1) / (x[-1] - x[0])
        span = levels[-1]
        if ls.max() > span:
            raise ValueError(f"L={ls.max()} exceeds the spectrum span {span:.3g}")
        starts_for = lambda L: np.arange(0.0, span - L + 1e-12 * span, stride_fraction * L)  # noqa: E731
    return np.array([_delta3_windows(levels, starts_for(L), L).mean() for L in ls])


def mean_delta3(spectra: Iterable[Spectrum], l_grid: Sequence[float] = DEFAULT_L_GRID, **kw) -> np.ndarray:
    curves = [delta3(s, l_grid, **kw) for s in spectra]
    if not curves:
        raise ValueError("no spectra given")
    return np.mean(curves, axis=0)


# reference curves


def poisson_nns(s: np.ndarray) -> np.ndarray:
    return np.exp(-np.asarray(s))


def wigner_surmise(s: np.ndarray, beta: int = 1) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if beta == 1:
        return np.pi / 2 * s * np.exp(-np.pi * s**2 / 4)
    if beta == 2:
        return 32 / np.pi**2 * s**2 * np.exp(-4 * s**2 / np.pi)
    raise ValueError("beta must be 1 or 2")


def poisson_delta3(l_grid) -> np.ndarray:
    return np.asarray(l_grid, dtype=float) / 15


def goe_delta3_asymptotic(l_grid) -> np.ndarray:
    L = np.asarray(l_grid, dtype=float)
    return (np.log(2 * np.pi * L) + np.euler_gamma - 5 / 4 - np.pi**2 / 8) / np.pi**2


REFERENCE_R = {"Poisson": float(R_POISSON), "GOE": float(R_GOE), "GUE": float(R_GUE)}

_CALIBRATION_SEED = 20240521
_CALIBRATION_LEVELS = 200_000


def _sample_matrix_levels(kind: str, dim: int, rng: np.random.Generator, count: int = 1) -> np.ndarray:
    if kind == "GOE":
        m = rng.standard_normal((count, dim, dim))
        h = (m + np.swapaxes(m, 1, 2)) / 2
    elif kind == "GUE":
        m = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))
        h = (m + np.conj(np.swapaxes(m, 1, 2))) / 2
    else:
        raise ValueError(f"unknown ensemble {kind!r}")
    return np.linalg.eigvalsh(h)


@lru_cache(maxsize=32)
def _calibration_cdf(kind: str, dim: int) -> np.ndarray:
    rng = np.random.default_rng([_CALIBRATION_SEED, dim, 0 if kind == "GOE" else 1])
    count = max(20, -(-_CALIBRATION_LEVELS // dim))
    levels = np.sort(_sample_matrix_levels(kind, dim, rng, count).ravel())
    levels.setflags(write=False)
    return levels


def unfold_with_calibration(levels: np.ndarray, kind: str, dim: int) -> np.ndarray:
    """Map levels through dim * F(x), F the empirical CDF of a large calibration sample."""
    cal = _calibration_cdf(kind, dim)
    ranks = np.interp(levels, cal, (np.arange(cal.size) + 0.5) / cal.size)
    return dim * ranks


def sample_reference_ensemble(
    kind: EnsembleKind,
    dim: int,
    seed: int,
    *,
    unfold: bool = True,
    count: int | None = None,
) -> np.ndarray:
    """Sorted levels of a Poisson, GOE or GUE spectrum (mean spacing ~1 when unfolded).

    With ``count`` a (count, dim) batch is returned instead of one spectrum.
    """
    if dim < 2:
        raise ValueError(f"dim must be at least 2, got {dim}")
    rng = np.random.default_rng(seed)
    n = 1 if count is None else count
    if kind == "Poisson":
        levels = np.sort(rng.uniform(0.0, dim, (n, dim)), axis=1)
    elif kind in ("GOE", "GUE"):
        levels = _sample_matrix_levels(kind, dim, rng, n)
        if unfold:
            levels = unfold_with_calibration(levels, kind, dim)
    else:
        raise ValueError(f"unknown ensemble {kind!r}")
    return levels[0] if count is None else levels


def build_report(
    spectra: Sequence[EigenphaseSet],
    *,
    l_grid: Sequence[float] = DEFAULT_L_GRID,
    bins: int = DEFAULT_BINS,
    bin_range: tuple[float, float] = DEFAULT_BIN_RANGE,
) -> StatisticReport:
    """Pooled statistics of a family of eigenphase sets.

    Δ3 is averaged over sets and only evaluated for L up to the shortest set.
    """
    spectra = [s for s in spectra if len(s) >= 3]
    if not spectra:
        raise ValueError("no eigenphase set with at least 3 phases")
    rs = r_statistic(spectra)
    ensemble = pool_spacings(spectra)
    shortest = min(len(s) for s in spectra)
    usable = [L for L in l_grid if L <= shortest]
    curve = mean_delta3(spectra, usable) if usable else np.zeros(0)
    return StatisticReport(
        rs.mean,
        rs.stderr,
        rs.count,
        rs.excluded + ensemble.excluded,
        nns_histogram(ensemble, bins, bin_range),
        list(zip(usable, curve.tolist())),
    )
