"""Desk-scale objectives: analytic benchmark functions and the
time-modulated-array directivity-ripple cost."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.signal.windows import chebwin

from .problem import Problem, SearchSpace


def levy(x) -> float | np.ndarray:
    """Levy function; zero at the all-ones point. Canonical domain [-10, 10]."""
    x = np.asarray(x, dtype=float)
    w = 1.0 + (x - 1.0) / 4.0
    head = np.sin(np.pi * w[..., 0]) ** 2
    middle = np.sum((w[..., :-1] - 1.0) ** 2
                    * (1.0 + 10.0 * np.sin(np.pi * w[..., :-1] + 1.0) ** 2), axis=-1)
    tail = (w[..., -1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * w[..., -1]) ** 2)
    return head + middle + tail


def schwefel(x) -> float | np.ndarray:
    """Schwefel function; near-zero at 420.9687 per dimension. Domain [-500, 500]."""
    x = np.asarray(x, dtype=float)
    k = x.shape[-1]
    return 418.9829 * k - np.sum(x * np.sin(np.sqrt(np.abs(x))), axis=-1)


def ackley(x) -> float | np.ndarray:
    """Ackley function (a=20, b=0.2, c=2*pi); zero at the origin. Domain [-5, 5]."""
    x = np.asarray(x, dtype=float)
    k = x.shape[-1]
    radial = np.sqrt(np.sum(x**2, axis=-1) / k)
    cosine = np.sum(np.cos(2.0 * np.pi * x), axis=-1) / k
    return -20.0 * np.exp(-0.2 * radial) - np.exp(cosine) + 20.0 + np.e


BENCHMARK_DOMAINS = {
    "levy": (levy, -10.0, 10.0),
    "schwefel": (schwefel, -500.0, 500.0),
    "ackley": (ackley, -5.0, 5.0),
}


def benchmark_problem(name: str, k: int, eval_seconds: float = 1.0) -> Problem:
    """Wrap a named benchmark function as a budgeted problem."""
    if name not in BENCHMARK_DOMAINS:
        raise ValueError(f"unknown benchmark: {name}")
    fn, lo, hi = BENCHMARK_DOMAINS[name]
    space = SearchSpace(np.full(k, lo), np.full(k, hi))
    return Problem(space=space, objective=lambda x: float(fn(x)),
                   nominal_eval_time=eval_seconds, name=f"{name}-{k}d")


# ---------------------------------------------------------------------------
# Time-modulated array coarse model: isotropic radiators, ideal switches
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TmaConfig:
    """Geometry and modulation setup for the coarse time-modulated array."""

    n_elements: int
    durations: np.ndarray
    period: float = 1.0
    spacing_wavelengths: float = 0.5
    time_grid: int = 1024
    amplitudes: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n_elements < 2 or self.n_elements % 2 != 0:
            raise ValueError("n_elements must be even and >= 2")
        durations = np.asarray(self.durations, dtype=float)
        if durations.shape != (self.n_elements,):
            raise ValueError("durations must have one entry per element")
        if np.any(durations < 0.0) or np.any(durations > 1.0):
            raise ValueError("durations must lie in [0, 1] (period-normalized)")
        if self.period <= 0:
            raise ValueError("period must be positive")
        if self.time_grid < 256:
            raise ValueError("time_grid must be >= 256")
        object.__setattr__(self, "durations", durations)
        if self.amplitudes is not None:
            amplitudes = np.asarray(self.amplitudes, dtype=float)
            if amplitudes.shape != (self.n_elements,):
                raise ValueError("amplitudes must have one entry per element")
            object.__setattr__(self, "amplitudes", amplitudes)


def chebyshev_durations(n: int, sll_db: float) -> np.ndarray:
    """Dolph-Chebyshev taper weights, max-normalized, as pulse durations.

    The taper places every array-factor sidelobe of the average pattern at
    ``sll_db`` below the main beam.
    """
    if n < 2:
        raise ValueError("need at least two elements")
    if sll_db >= 0:
        raise ValueError("sidelobe level must be negative (dB)")
    with warnings.catch_warnings():
        # chebwin warns about spectral-analysis use below 45 dB attenuation,
        # which does not apply to array tapering.
        warnings.simplefilter("ignore", UserWarning)
        weights = chebwin(n, at=-sll_db)
    weights = np.asarray(weights, dtype=float)
    return weights / weights.max()


def expand_symmetric(omega: Sequence[float]) -> np.ndarray:
    """Mirror K switch-on instants into the full 2K symmetric vector."""
    omega = np.asarray(omega, dtype=float)
    return np.concatenate([omega, omega[::-1]])


def collapse_symmetric(t_on: Sequence[float]) -> np.ndarray:
    """Inverse of :func:`expand_symmetric`; validates the symmetry."""
    t_on = np.asarray(t_on, dtype=float)
    n = t_on.size
    if n % 2 != 0:
        raise ValueError("full vector must have even length")
    half = t_on[: n // 2]
    if not np.array_equal(t_on, np.concatenate([half, half[::-1]])):
        raise ValueError("switch-on vector is not symmetric")
    return half.copy()


def _active_matrix(t: np.ndarray, t_on: np.ndarray, durations: np.ndarray) -> np.ndarray:
    """Boolean (time, element) on-state matrix with modulo-period wrapping."""
    t = np.asarray(t, dtype=float)[:, None]
    start = t_on[None, :]
    tau = durations[None, :]
    end = start + tau
    wrapped = (t >= start) | (t < end - 1.0)
    plain = (t >= start) & (t < end)
    on = np.where(end > 1.0, wrapped, plain)
    on[:, durations >= 1.0] = True
    on[:, durations <= 0.0] = False
    return on


def _validate_t_on(config: TmaConfig, t_on) -> np.ndarray:
    t_on = np.asarray(t_on, dtype=float)
    if t_on.shape != (config.n_elements,):
        raise ValueError("switch-on vector must have one entry per element")
    if np.any(t_on < 0.0) or np.any(t_on >= 1.0):
        raise ValueError("switch-on instants must lie in [0, 1)")
    return t_on


def _directivity_at(config: TmaConfig, t_on: np.ndarray, t: np.ndarray) -> np.ndarray:
    on = _active_matrix(t, t_on, config.durations)
    if config.amplitudes is None:
        count = on.sum(axis=1).astype(float)
        return count
    amps = np.where(on, config.amplitudes[None, :], 0.0)
    power = np.sum(amps**2, axis=1)
    total = np.sum(amps, axis=1)
    return np.divide(total**2, power, out=np.zeros_like(power), where=power > 0)


def tma_instantaneous_directivity(config: TmaConfig, t_on, t: float) -> float:
    """Broadside directivity of the instantaneous aperture at normalized time t.

    With unit on-amplitudes this is the number of active elements; it is zero
    when the whole aperture is off.
    """
    t = float(t)
    if not 0.0 <= t < 1.0:
        raise ValueError("t must lie in [0, 1)")
    t_on = _validate_t_on(config, t_on)
    return float(_directivity_at(config, t_on, np.array([t]))[0])


def _quadrature_grid(config: TmaConfig, t_on: np.ndarray):
    """Uniform grid with switching breakpoints inserted; exact for D(t)."""
    edges = [np.arange(config.time_grid) / config.time_grid]
    tau = config.durations
    active = (tau > 0.0) & (tau < 1.0)
    starts = t_on[active]
    ends = starts + tau[active]
    ends = np.where(ends >= 1.0, ends - 1.0, ends)
    edges.append(starts)
    edges.append(ends[(ends >= 0.0) & (ends < 1.0)])
    grid = np.union1d(np.concatenate(edges), np.array([0.0]))
    bounds = np.append(grid, 1.0)
    mids = 0.5 * (bounds[:-1] + bounds[1:])
    widths = np.diff(bounds)
    return mids, widths


def tma_cost(config: TmaConfig, omega) -> float:
    """Normalized mean absolute ripple of the instantaneous directivity.

    ``omega`` holds the first half of the switch-on instants; the second half
    mirrors them. D(t) is piecewise constant, so the midpoint quadrature over
    the breakpoint-refined grid integrates it exactly.
    """
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (config.n_elements // 2,):
        raise ValueError("omega must have n_elements/2 entries")
    t_on = _validate_t_on(config, expand_symmetric(omega))
    mids, widths = _quadrature_grid(config, t_on)
    d = _directivity_at(config, t_on, mids)
    mean = float(np.sum(d * widths))
    if mean == 0.0:
        raise ValueError("aperture is never on; the ripple cost is undefined")
    ripple = float(np.sum(np.abs(mean - d) * widths))
    return ripple / mean


def tma_directivity_trace(config: TmaConfig, t_on, n_points: int = 512):
    """Sample (t, D(t)) over one period for plotting or CSV export."""
    t_on = _validate_t_on(config, t_on)
    t = np.arange(n_points) / n_points
    return t, _directivity_at(config, t_on, t)


def tma_problem(config: TmaConfig, eval_seconds: float = 1.0) -> Problem:
    """Ripple-minimization problem over the half-length switch-on vector."""
    k = config.n_elements // 2
    upper = np.full(k, np.nextafter(1.0, 0.0))  # instants must stay below 1
    space = SearchSpace(np.zeros(k), upper)
    return Problem(space=space, objective=lambda x: tma_cost(config, x),
                   nominal_eval_time=eval_seconds,
                   name=f"tma-{config.n_elements}")
