"""Stationary Gaussian noise kernels and their phase-variance functions.

Three autocorrelation families are supported, each parametrized by a
damping amplitude ``Gamma`` and a memory rate ``gamma`` (the power-law
family adds an exponent ``alpha > 2``):

    exponential  K(u) = (1/2) * Gamma * gamma * exp(-gamma*|u|)
    gaussian     K(u) = Gamma * gamma / sqrt(pi) * exp(-gamma^2 * u^2)
    power-law    K(u) = (1/2) * (alpha-1) * Gamma * gamma
                        / (gamma*|u| + 1)^alpha

The noise phase accumulated over ``[0, t]`` is a zero-mean Gaussian whose
variance ``beta(t)`` is the double time integral of K over the square
``[0, t]^2``.  All user-facing routines work in the dimensionless time
``tau = gamma * t`` and the damping ratio ``r_gamma = Gamma / gamma``, in
which ``beta`` factorizes as ``r_gamma * g(tau)`` with g depending only on
the kernel family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate
from scipy.linalg import cholesky, LinAlgError
from scipy.special import erf

from .errors import ConvergenceError, ValidationError

__all__ = [
    "KernelKind",
    "NoiseKernel",
    "ScaledTime",
    "RatioPair",
    "kernel_value",
    "beta",
    "beta_numeric",
    "sample_phase",
    "sample_phase_direct",
    "sample_phase_path",
    "path_variance",
]

#: Target grid resolution for path sampling: gamma * dt <= 0.01.
DEFAULT_GRID_STEP = 0.01

#: Diagonal jitter ladder for numerically non-PSD covariance matrices.
BASE_JITTER = 1e-12
MAX_JITTER = 1e-8


class KernelKind(str, Enum):
    ORNSTEIN_UHLENBECK = "ou"
    GAUSSIAN = "gauss"
    POWER_LAW = "pl"


@dataclass(frozen=True)
class NoiseKernel:
    """One stationary autocorrelation family with its parameters.

    Parameters
    ----------
    kind : KernelKind
        Autocorrelation family.
    gamma : float
        Memory rate (inverse time), > 0.
    damping : float
        Damping amplitude (inverse time), > 0.
    alpha : float, optional
        Power-law exponent; required (and > 2) for the power-law family,
        must be omitted otherwise.
    """

    kind: KernelKind
    gamma: float = 1.0
    damping: float = 1.0
    alpha: float | None = None

    def __post_init__(self):
        if not isinstance(self.kind, KernelKind):
            object.__setattr__(self, "kind", KernelKind(self.kind))
        if not (self.gamma > 0):
            raise ValidationError(f"gamma must be > 0, got {self.gamma}")
        if not (self.damping > 0):
            raise ValidationError(f"damping must be > 0, got {self.damping}")
        if self.kind is KernelKind.POWER_LAW:
            if self.alpha is None:
                raise ValidationError("power-law kernel requires alpha")
            if not (self.alpha > 2):
                raise ValidationError(f"power-law alpha must be > 2, got {self.alpha}")
        elif self.alpha is not None:
            raise ValidationError(f"alpha is only meaningful for the power-law kernel, got {self.alpha}")

    @property
    def r_gamma(self) -> float:
        """Dimensionless damping ratio damping / gamma."""
        return self.damping / self.gamma


@dataclass(frozen=True)
class ScaledTime:
    """Dimensionless rescaled time tau = gamma * t, >= 0."""

    tau: float

    def __post_init__(self):
        if not (self.tau >= 0):
            raise ValidationError(f"tau must be >= 0, got {self.tau}")

    def __float__(self) -> float:
        return float(self.tau)


@dataclass(frozen=True)
class RatioPair:
    """Dimensionless ratios locating a point of the regime plane.

    ``r_omega`` is the qubit frequency over the noise memory rate (>= 0);
    ``r_gamma`` is the damping over the memory rate (> 0).
    """

    r_omega: float
    r_gamma: float

    def __post_init__(self):
        if not (self.r_omega >= 0):
            raise ValidationError(f"r_omega must be >= 0, got {self.r_omega}")
        if not (self.r_gamma > 0):
            raise ValidationError(f"r_gamma must be > 0, got {self.r_gamma}")


def _as_tau(tau) -> np.ndarray | float:
    value = np.asarray(float(tau) if isinstance(tau, ScaledTime) else tau, dtype=float)
    if np.any(value < 0):
        raise ValidationError("tau must be >= 0")
    return value


def kernel_value(kernel: NoiseKernel, lag):
    """Autocorrelation K(lag) in physical time units.

    Accepts a scalar or array lag; K is even in the lag.
    """
    u = np.abs(np.asarray(lag, dtype=float)) * kernel.gamma
    pref = kernel.damping * kernel.gamma
    if kernel.kind is KernelKind.ORNSTEIN_UHLENBECK:
        out = 0.5 * pref * np.exp(-u)
    elif kernel.kind is KernelKind.GAUSSIAN:
        out = pref / math.sqrt(math.pi) * np.exp(-u * u)
    else:
        out = 0.5 * (kernel.alpha - 1.0) * pref * (u + 1.0) ** (-kernel.alpha)
    return out if out.ndim else float(out)


def beta(kernel: NoiseKernel, tau, r_gamma: float):
    """Closed-form variance of the noise phase at rescaled time tau.

    Returns ``r_gamma * g(tau)`` where g depends only on the kernel family
    (and alpha for the power-law).  ``beta(0) = 0`` exactly and beta is
    nondecreasing in tau.  ``tau`` may be a scalar, :class:`ScaledTime`,
    or array.
    """
    if not (r_gamma > 0):
        raise ValidationError(f"r_gamma must be > 0, got {r_gamma}")
    t = _as_tau(tau)
    if kernel.kind is KernelKind.ORNSTEIN_UHLENBECK:
        g = t + np.expm1(-t)
    elif kernel.kind is KernelKind.GAUSSIAN:
        g = (np.expm1(-t * t) + math.sqrt(math.pi) * t * erf(t)) / math.sqrt(math.pi)
    else:
        a = kernel.alpha
        # tau + ((1+tau)^(2-alpha) - 1) / (alpha - 2), computed with
        # expm1/log1p so that beta(0) is exactly 0.
        g = t + np.expm1((2.0 - a) * np.log1p(t)) / (a - 2.0)
    out = r_gamma * np.maximum(g, 0.0)
    return out if out.ndim else float(out)


def beta_numeric(kernel: NoiseKernel, tau, r_gamma: float, tol: float = 1e-10) -> float:
    """Phase variance by adaptive quadrature of the defining double integral.

    Serves as the independent oracle for :func:`beta`.  The integral runs
    over the square ``[0, tau]^2`` of the dimensionless kernel (gamma = 1,
    damping = r_gamma); symmetry reduces it to twice the lower triangle,
    which keeps the integrand smooth.

    Raises
    ------
    ConvergenceError
        If the quadrature error estimate exceeds ``tol``.
    """
    t = float(_as_tau(tau))
    if t == 0.0:
        return 0.0
    dimless = NoiseKernel(kernel.kind, gamma=1.0, damping=r_gamma, alpha=kernel.alpha)
    value, estimate = integrate.dblquad(
        lambda y, x: kernel_value(dimless, x - y),
        0.0,
        t,
        0.0,
        lambda x: x,
        epsabs=0.25 * tol,
        epsrel=1e-12,
    )
    if 2.0 * estimate > tol:
        raise ConvergenceError(
            f"double integral for beta did not reach tol={tol:g}",
            residual=2.0 * estimate,
        )
    return 2.0 * value


def _path_grid(tau: float, grid_step: float) -> np.ndarray:
    n = max(2, int(math.ceil(tau / grid_step)) + 1)
    return np.linspace(0.0, tau, n)


def _trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    w = np.full(grid.size, grid[1] - grid[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _covariance_factor(kernel: NoiseKernel, grid: np.ndarray, r_gamma: float) -> np.ndarray:
    """Lower-triangular factor of the discretized covariance, with jitter repair."""
    dimless = NoiseKernel(kernel.kind, gamma=1.0, damping=r_gamma, alpha=kernel.alpha)
    cov = kernel_value(dimless, grid[:, None] - grid[None, :])
    jitter = 0.0
    while True:
        try:
            return cholesky(cov + jitter * np.eye(grid.size), lower=True)
        except LinAlgError:
            jitter = BASE_JITTER if jitter == 0.0 else 10.0 * jitter
            if jitter > MAX_JITTER:
                raise ConvergenceError(
                    f"covariance factorization needed diagonal jitter > {MAX_JITTER:g}",
                    residual=jitter,
                )


def path_variance(kernel: NoiseKernel, tau, r_gamma: float, grid_step: float = DEFAULT_GRID_STEP) -> float:
    """Exact variance of the trapezoid-discretized phase functional.

    This is what the path sampler's draws have as their population
    variance; it converges to :func:`beta` as the grid is refined.
    """
    t = float(_as_tau(tau))
    if t == 0.0:
        return 0.0
    grid = _path_grid(t, grid_step)
    dimless = NoiseKernel(kernel.kind, gamma=1.0, damping=r_gamma, alpha=kernel.alpha)
    cov = kernel_value(dimless, grid[:, None] - grid[None, :])
    w = _trapezoid_weights(grid)
    return float(w @ cov @ w)


def sample_phase_direct(kernel: NoiseKernel, tau, r_gamma: float, seed: int, count: int) -> np.ndarray:
    """Draw phases from N(0, beta(tau)) using the closed-form variance.

    Valid because the phase is a linear functional of a Gaussian process.
    Deterministic given the seed.
    """
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    t = float(_as_tau(tau))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if t == 0.0:
        return np.zeros(count)
    return rng.normal(0.0, math.sqrt(beta(kernel, t, r_gamma)), size=count)


def sample_phase_path(
    kernel: NoiseKernel,
    tau,
    r_gamma: float,
    seed: int,
    count: int,
    grid_step: float = DEFAULT_GRID_STEP,
) -> np.ndarray:
    """Draw phases by simulating correlated field paths and integrating them.

    The field is sampled on a uniform grid over ``[0, tau]`` from the
    discretized covariance (triangular factorization) and integrated by
    the trapezoid rule.  Deterministic given the seed.
    """
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    t = float(_as_tau(tau))
    if t == 0.0:
        return np.zeros(count)
    grid = _path_grid(t, grid_step)
    factor = _covariance_factor(kernel, grid, r_gamma)
    w = _trapezoid_weights(grid)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    normals = rng.standard_normal((grid.size, count))
    return (w @ factor) @ normals


def sample_phase(
    kernel: NoiseKernel,
    tau,
    r_gamma: float,
    seed: int,
    count: int,
    method: str = "direct",
    grid_step: float = DEFAULT_GRID_STEP,
) -> np.ndarray:
    """Dispatch to the direct or path sampler; the two agree in distribution."""
    if method == "direct":
        return sample_phase_direct(kernel, tau, r_gamma, seed, count)
    if method == "path":
        return sample_phase_path(kernel, tau, r_gamma, seed, count, grid_step=grid_step)
    raise ValidationError(f"unknown sampling method {method!r}")
