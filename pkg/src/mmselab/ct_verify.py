"""Independent verification paths for the channel error formulas.

Three tools, none of which share code with the quadrature modules:

- :func:`simulate_path`: Euler discretization of the integrated-observation
  channel  d eta = sqrt(q) xi(t) dt + dW  over one drawn tone signal.
- :func:`kalman_cmmse` / :func:`kalman_mmse`: exact error covariances of the
  Gaussian-amplitude tone signal by a scalar-measurement Riccati recursion
  on the 2N static Fourier coefficients.  Error covariances of a
  linear-Gaussian model are data independent, so no sampling is involved,
  and because the state is static the smoothing covariance equals the final
  filtering covariance.
- :func:`mc_scalar_mmse`: seeded Monte Carlo estimate of the scalar-channel
  error E[(X - E[X|Y])^2] with its standard error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numerics import NumericsError
from .scalar_channel import ScalarChannel, conditional_mean
from .sources import AmplitudeLaw, ScalarSource, unit_amplitude

__all__ = [
    "IllConditioned",
    "KalmanSetup",
    "McConfig",
    "PathSample",
    "McEstimate",
    "simulate_path",
    "kalman_cmmse",
    "kalman_mmse",
    "mc_scalar_mmse",
]

_PSD_TOL = -1e-10


class IllConditioned(NumericsError):
    """Covariance recursion lost positive semidefiniteness."""


@dataclass(frozen=True)
class KalmanSetup:
    """Time grid and tone configuration for the covariance recursion."""

    n_tones: int
    q: float
    dt: float
    horizon: float = 2.0 * math.pi
    frequencies: tuple = ()

    def __post_init__(self) -> None:
        if self.n_tones < 1:
            raise ValueError("n_tones must be >= 1")
        if not (math.isfinite(self.q) and self.q >= 0):
            raise ValueError("snr must be finite and >= 0")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        steps = self.horizon / self.dt
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 100:
            raise ValueError("horizon/dt must be an integer >= 100")
        freqs = self.frequencies or tuple(range(1, self.n_tones + 1))
        freqs = tuple(int(k) for k in freqs)
        if len(set(freqs)) != self.n_tones or min(freqs) < 1:
            raise ValueError("frequencies must be distinct positive integers")
        object.__setattr__(self, "frequencies", freqs)

    @classmethod
    def from_steps(cls, n_tones: int, q: float, n_steps: int, horizon: float = 2.0 * math.pi):
        return cls(n_tones=n_tones, q=q, dt=horizon / n_steps, horizon=horizon)

    @property
    def n_steps(self) -> int:
        return round(self.horizon / self.dt)


@dataclass(frozen=True)
class McConfig:
    sample_count: int = 10**6
    seed: int = 0
    stratified: bool = False

    def __post_init__(self) -> None:
        if self.sample_count < 10**4:
            raise ValueError("sample_count must be >= 1e4")


@dataclass(frozen=True)
class PathSample:
    times: np.ndarray
    increments: np.ndarray
    signal: np.ndarray


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    sample_count: int


def _assert_psd(p_cov: np.ndarray) -> None:
    min_eig = float(np.linalg.eigvalsh(p_cov)[0])
    if min_eig < _PSD_TOL:
        raise IllConditioned(f"covariance eigenvalue {min_eig:.3e} below tolerance")


def _basis_matrix(setup: KalmanSetup) -> np.ndarray:
    """Rows h(t_j) = sqrt(1/T)[cos(w_k t_j).., sin(w_k t_j)..] at left endpoints."""
    t = np.arange(setup.n_steps) * setup.dt
    omega = 2.0 * math.pi * np.asarray(setup.frequencies) / setup.horizon
    phases = np.outer(t, omega)
    return np.hstack((np.cos(phases), np.sin(phases))) / math.sqrt(setup.horizon)


def simulate_path(setup: KalmanSetup, law: AmplitudeLaw, rng: np.random.Generator) -> PathSample:
    """One discretized observation path with its drawn tone signal.

    Increments are sqrt(q) xi(t_j) dt + N(0, dt); the signal uses one draw
    of amplitudes/phases per path, energy-normalized over the tone count.
    """
    n = setup.n_tones
    coeff = law.sample_coefficients(rng, n) / math.sqrt(n)  # per-tone (cos, sin) weights
    basis = _basis_matrix(setup) * math.sqrt(2.0)
    signal = basis @ np.concatenate((coeff[:, 0], coeff[:, 1]))
    noise = rng.standard_normal(setup.n_steps) * math.sqrt(setup.dt)
    increments = math.sqrt(setup.q) * signal * setup.dt + noise
    times = np.arange(setup.n_steps) * setup.dt
    return PathSample(times=times, increments=increments, signal=signal)


@lru_cache(maxsize=64)
def _riccati(setup: KalmanSetup) -> tuple:
    """(causal, non-causal) signal-error energies of the Gaussian tone model.

    State: 2N static coefficients, prior N(0, I/N); per-step scalar
    measurement row sqrt(q dt) h(t_j) with unit noise variance.  The causal
    error integrates h P_j h' over time with the running filtered
    covariance; the non-causal error reuses the final covariance.
    """
    n = setup.n_tones
    dim = 2 * n
    basis = _basis_matrix(setup)
    scale = math.sqrt(setup.q * setup.dt)
    p_cov = np.eye(dim) / n
    causal = 0.0
    for row in basis:
        c = scale * row
        pc = p_cov @ c
        gain = pc / (1.0 + c @ pc)
        p_cov = p_cov - np.outer(gain, pc)
        p_cov = 0.5 * (p_cov + p_cov.T)
        _assert_psd(p_cov)
        causal += float(row @ p_cov @ row) * setup.dt
    smoothed = float(np.einsum("ij,jk,ik->", basis, p_cov, basis)) * setup.dt
    return causal, smoothed


def kalman_cmmse(setup: KalmanSetup) -> float:
    """Time-integrated filtering error of the Gaussian tone signal."""
    return _riccati(setup)[0]


def kalman_mmse(setup: KalmanSetup) -> float:
    """Time-integrated smoothing error of the Gaussian tone signal."""
    return _riccati(setup)[1]


def _stratified_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    from scipy.special import ndtri

    u = (np.arange(n) + rng.uniform(size=n)) / n
    w = ndtri(u)
    rng.shuffle(w)
    return w


def mc_scalar_mmse(src: ScalarSource, q: float, cfg: McConfig) -> McEstimate:
    """Monte Carlo scalar-channel error over paired draws of (X, W)."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.sample_count
    x = src.sample(rng, n)
    w = _stratified_normal(rng, n) if cfg.stratified else rng.standard_normal(n)
    y = w + math.sqrt(q) * x
    estimate = conditional_mean(ScalarChannel(src, q), y)
    sq_err = np.square(x - estimate)
    value = float(np.mean(sq_err))
    std_error = float(np.std(sq_err, ddof=1) / math.sqrt(n))
    return McEstimate(value=value, std_error=std_error, sample_count=n)
