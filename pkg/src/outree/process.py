"""Mean-reverting process definitions and one-step conditional moments.

The lattice builder consumes a process only through its one-step
conditional mean and variance on a uniform time grid.  For an
Ornstein-Uhlenbeck process

    dX = kappa * (theta - X) dt + sigma(t) dW

with piecewise-constant volatility per step, those moments are

    E[X(t+dt) | X(t)=x] = x * exp(-kappa*dt) + theta * (1 - exp(-kappa*dt))
    Var(X(t+dt) | X(t)) = sigma_j^2 * (1 - exp(-2*kappa*dt)) / (2*kappa)

The variance is state-free, which is exactly the assumption the tree
construction relies on.  ``log_space=True`` marks the process as an
exponential OU: the tree is still built on the OU state itself, and
quoted quantities are exponentials of it (applied at output boundaries
by the simulation and pricing layers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Below this kappa*dt the closed-form variance is replaced by its series
# expansion to avoid 0/0.
_KAPPA_DT_TINY = 1e-8

__all__ = [
    "OUSpec",
    "MomentModel",
    "conditional_mean",
    "conditional_variance",
    "make_moment_model",
    "terminal_moments",
]


@dataclass(frozen=True)
class OUSpec:
    """Parameters of the discretized OU process.

    sigma may be a single value (broadcast to every step) or one value
    per step.  After construction it is always a tuple of length
    ``levels``.
    """

    kappa: float
    theta: float
    sigma: float | Sequence[float]
    x0: float
    dt: float
    levels: int
    log_space: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.levels, int) or isinstance(self.levels, bool):
            raise ValueError(f"levels: must be an integer, got {self.levels!r}")
        if self.levels < 1:
            raise ValueError(f"levels: must be >= 1, got {self.levels}")
        if not math.isfinite(self.dt) or self.dt <= 0.0:
            raise ValueError(f"dt: must be > 0, got {self.dt}")
        if not math.isfinite(self.kappa) or self.kappa < 0.0:
            raise ValueError(f"kappa: must be >= 0, got {self.kappa}")
        if not math.isfinite(self.theta):
            raise ValueError(f"theta: must be finite, got {self.theta}")
        if not math.isfinite(self.x0):
            raise ValueError(f"x0: must be finite, got {self.x0}")

        sig = self.sigma
        if isinstance(sig, (int, float)):
            sig = (float(sig),) * self.levels
        else:
            sig = tuple(float(s) for s in sig)
            if len(sig) == 1:
                sig = sig * self.levels
            elif len(sig) != self.levels:
                raise ValueError(
                    f"sigma: expected 1 or {self.levels} entries, got {len(sig)}"
                )
        for j, s in enumerate(sig):
            if not math.isfinite(s) or s <= 0.0:
                raise ValueError(f"sigma: entry {j} must be > 0, got {s}")
        object.__setattr__(self, "sigma", sig)


@dataclass(frozen=True)
class MomentModel:
    """One-step conditional moments on the time grid, ready for the builder.

    ``mean_fn(j, x)`` accepts a scalar or an ndarray of states and returns
    E[X(t_{j+1}) | X(t_j)=x].  ``var[j]`` is the (state-free) conditional
    variance of the step t_j -> t_{j+1}.
    """

    mean_fn: Callable[[int, float | np.ndarray], float | np.ndarray]
    var: np.ndarray
    t: np.ndarray
    x0: float
    log_space: bool = field(default=False)

    @property
    def levels(self) -> int:
        return len(self.var)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])


def _check_level(j: int, levels: int, inclusive: bool = False) -> None:
    hi = levels if inclusive else levels - 1
    if not 0 <= j <= hi:
        raise IndexError(f"level index {j} out of range 0..{hi}")


def conditional_mean(spec: OUSpec, j: int, x: float | np.ndarray):
    """E[X(t_{j+1}) | X(t_j)=x]; affine in x, pulled toward theta."""
    _check_level(j, spec.levels)
    decay = math.exp(-spec.kappa * spec.dt)
    return x * decay + spec.theta * (1.0 - decay)


def conditional_variance(spec: OUSpec, j: int) -> float:
    """Var(X(t_{j+1}) | X(t_j)); independent of the current state."""
    _check_level(j, spec.levels)
    s2 = spec.sigma[j] ** 2
    a = spec.kappa * spec.dt
    if a < _KAPPA_DT_TINY:
        # second-order series of (1 - exp(-2a)) / (2*kappa)
        return s2 * spec.dt * (1.0 - a)
    return s2 * (1.0 - math.exp(-2.0 * a)) / (2.0 * spec.kappa)


def make_moment_model(spec: OUSpec) -> MomentModel:
    """Package the conditional moments of ``spec`` for the lattice builder."""
    var = np.array([conditional_variance(spec, j) for j in range(spec.levels)])
    var.flags.writeable = False
    t = np.arange(spec.levels + 1) * spec.dt
    t.flags.writeable = False

    def mean_fn(j: int, x):
        return conditional_mean(spec, j, x)

    return MomentModel(
        mean_fn=mean_fn, var=var, t=t, x0=spec.x0, log_space=spec.log_space
    )


def terminal_moments(spec: OUSpec, j: int) -> tuple[float, float]:
    """Exact unconditional (mean, variance) of X(t_j) given X(0)=x0.

    Composes the one-step affine transition moments, so it is exact for
    the discretized process and serves as an analytic reference for both
    the tree and the samplers.
    """
    _check_level(j, spec.levels, inclusive=True)
    decay = math.exp(-spec.kappa * spec.dt)
    mean = spec.x0
    var = 0.0
    for i in range(j):
        mean = mean * decay + spec.theta * (1.0 - decay)
        var = var * decay * decay + conditional_variance(spec, i)
    return mean, var
