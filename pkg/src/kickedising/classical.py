"""Classical kicked-top map on the unit sphere and phase-portrait data."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

# Initial conditions of the published portrait (red, blue, magenta, green, cyan, black),
# unnormalised; the black one is printed as (0, -2, 2, 0) and read as (0, -2, 2).
PORTRAIT_INITIAL_CONDITIONS: tuple[tuple[float, float, float], ...] = (
    (-1.0, -3.0, -3.0),
    (-1.0, -1.3, -2.0),
    (-1.0, -0.3, -1.0),
    (1.0, -1.0, 1.0),
    (0.0, -2.0, 1.0),
    (0.0, -2.0, 2.0),
)


@dataclass(frozen=True)
class ClassicalState:
    jx: float
    jy: float
    jz: float

    @classmethod
    def normalized(cls, jx: float, jy: float, jz: float) -> "ClassicalState":
        n = math.sqrt(jx * jx + jy * jy + jz * jz)
        if n == 0:
            raise ValueError("cannot normalise the zero vector")
        return cls(jx / n, jy / n, jz / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.jx, self.jy, self.jz])

    @property
    def norm(self) -> float:
        return math.sqrt(self.jx**2 + self.jy**2 + self.jz**2)


def _step_components(x, y, z, ca, sa, tau, cos, sin):
    # rotation about x by alpha, then a twist about z by tau * (new Jz)
    y1 = y * ca - z * sa
    z1 = y * sa + z * ca
    ct, st = cos(tau * z1), sin(tau * z1)
    return x * ct - y1 * st, x * st + y1 * ct, z1


def step(state: ClassicalState, alpha: float, tau: float) -> ClassicalState:
    x, y, z = _step_components(
        state.jx, state.jy, state.jz, math.cos(alpha), math.sin(alpha), tau, math.cos, math.sin
    )
    return ClassicalState.normalized(x, y, z)


def iterate(state: ClassicalState, alpha: float, tau: float, n_steps: int) -> tuple[ClassicalState, float]:
    """Apply ``n_steps`` map steps; also returns the largest pre-normalisation norm drift."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    x, y, z = state.jx, state.jy, state.jz
    drift = 0.0
    cos, sin, sqrt = math.cos, math.sin, math.sqrt
    for _ in range(n_steps):
        x, y, z = _step_components(x, y, z, ca, sa, tau, cos, sin)
        n = sqrt(x * x + y * y + z * z)
        if abs(n - 1.0) > drift:
            drift = abs(n - 1.0)
        x, y, z = x / n, y / n, z / n
    return ClassicalState(x, y, z), drift


def trajectories(
    initial_conditions: Sequence[Sequence[float]],
    alpha: float,
    tau: float,
    n_steps: int,
) -> np.ndarray:
    """(n_steps, n_trajectories, 3) array of states after each step; inputs are normalised."""
    s = np.asarray(initial_conditions, dtype=float).reshape(-1, 3)
    s = s / np.linalg.norm(s, axis=1, keepdims=True)
    ca, sa = math.cos(alpha), math.sin(alpha)
    x, y, z = s[:, 0].copy(), s[:, 1].copy(), s[:, 2].copy()
    out = np.empty((n_steps, s.shape[0], 3))
    for k in range(n_steps):
        x, y, z = _step_components(x, y, z, ca, sa, tau, np.cos, np.sin)
        n = np.sqrt(x * x + y * y + z * z)
        x, y, z = x / n, y / n, z / n
        out[k, :, 0], out[k, :, 1], out[k, :, 2] = x, y, z
    return out


def phase_portrait(
    initial_conditions: Sequence[Sequence[float]],
    alpha: float,
    tau: float,
    n_steps: int,
) -> list[np.ndarray]:
    """Per trajectory, an (n_steps, 2) array of (Jx, Jz) after each step."""
    t = trajectories(initial_conditions, alpha, tau, n_steps)
    return [np.ascontiguousarray(t[:, i, ::2]) for i in range(t.shape[1])]


def write_portrait_csv(portrait: list[np.ndarray], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["trajectory_id", "step", "Jx", "Jz"])
        for tid, pts in enumerate(portrait):
            for k, (jx, jz) in enumerate(pts, start=1):
                w.writerow([tid, k, repr(float(jx)), repr(float(jz))])
    return path


def rotation_about_x(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def separation_growth_rate(
    state: Sequence[float],
    alpha: float,
    tau: float,
    n_steps: int = 50,
    eps: float = 1e-9,
    seed: int = 0,
) -> float:
    """Least-squares slope of log separation between two nearby trajectories.

    A crude finite-time Lyapunov proxy; the fit stops once the separation
    exceeds 1e-2 so that saturation on the sphere does not flatten it.
    """
    rng = np.random.default_rng(seed)
    base = np.asarray(state, dtype=float)
    base = base / np.linalg.norm(base)
    other = base + eps * rng.standard_normal(3)
    t = trajectories([base, other], alpha, tau, n_steps)
    sep = np.linalg.norm(t[:, 0] - t[:, 1], axis=1)
    saturated = np.flatnonzero(sep >= 1e-2)
    stop = max(int(saturated[0]) if saturated.size else n_steps, 3)
    steps = np.arange(1, stop + 1)
    return float(np.polyfit(steps, np.log(sep[:stop]), 1)[0])
