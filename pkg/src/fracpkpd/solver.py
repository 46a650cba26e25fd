"""Closed-form solution of linear psi-Caputo systems ``D^{alpha,psi} y = A y + B u``.

The solution is

    y(t) = E_alpha(A d(t)^alpha) y0 + int_a^t psi'(s) (psi(t)-psi(s))^(alpha-1)
           E_{alpha,alpha}(A (psi(t)-psi(s))^alpha) B u(s) ds,      d(t) = psi(t)-psi(a).

For a control that is constant on a segment the integral over that segment
is ``[F(d1) - F(d2)] B u_k`` with ``F(d) = d^alpha E_{alpha,alpha+1}(A d^alpha)``,
where ``d1, d2`` are the psi-distances from ``t`` to the segment ends.  All
segment contributions are anchored at the initial time: for ``alpha < 1`` the
state at a breakpoint does not summarise the past, so the integration is
never restarted there.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import AccuracyError, DomainError, ValidationError
from .operators import psi_caputo_derivative_grid
from .psi import Identity, PsiFunction
from .special import DEFAULT_POLICY, TruncationPolicy, mittag_leffler_matrix


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0 < alpha <= 1:
        raise ValidationError(f"fractional order must lie in (0, 1], got {alpha}", field="alpha")
    return alpha


@dataclass
class LinearFracSystem:
    """``D^{alpha,psi} y = A y + B u`` with ``y(a) = y0``."""

    A: np.ndarray
    B: np.ndarray
    alpha: float = 1.0
    psi: PsiFunction = field(default_factory=Identity)
    a: float = 0.0
    y0: np.ndarray | None = None
    policy: TruncationPolicy = DEFAULT_POLICY

    def __post_init__(self) -> None:
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ValidationError(f"A must be square, got shape {self.A.shape}", field="A")
        B = np.asarray(self.B, dtype=float)
        self.B = B.reshape(-1, 1) if B.ndim < 2 else B
        if self.B.shape[0] != n:
            raise ValidationError(f"B has {self.B.shape[0]} rows, A has {n}", field="B")
        y0 = np.zeros(n) if self.y0 is None else np.asarray(self.y0, dtype=float).ravel()
        if y0.size != n:
            raise ValidationError(f"y0 has {y0.size} entries, A has {n} rows", field="y0")
        self.y0 = y0
        self.alpha = _check_alpha(self.alpha)
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.B)) and np.all(np.isfinite(self.y0))):
            raise ValidationError("system data must be finite")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def dpsi(self, t, s):
        """``psi(t) - psi(s)``, clipped at 0."""
        return np.maximum(self.psi.value(t) - self.psi.value(s), 0.0)


@dataclass(frozen=True)
class InfusionSchedule:
    """Piecewise-constant control, ``rates[k]`` on ``[breakpoints[k], breakpoints[k+1])``.

    The last segment is closed on the right so the horizon end is covered.
    """

    breakpoints: tuple
    rates: tuple

    def __post_init__(self) -> None:
        bp = tuple(float(b) for b in self.breakpoints)
        rates = tuple(float(r) for r in np.atleast_1d(self.rates))
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "rates", rates)
        if len(bp) < 2:
            raise ValidationError("a schedule needs at least two breakpoints", field="breakpoints")
        if len(rates) != len(bp) - 1:
            raise ValidationError(
                f"{len(bp)} breakpoints need {len(bp) - 1} rates, got {len(rates)}", field="rates"
            )
        if any(not np.isfinite(b) for b in bp) or np.any(np.diff(bp) <= 0):
            raise ValidationError("breakpoints must be finite and strictly increasing", field="breakpoints")
        if any(not np.isfinite(r) or r < 0 for r in rates):
            raise ValidationError("rates must be finite and nonnegative", field="rates")

    @property
    def start(self) -> float:
        return self.breakpoints[0]

    @property
    def end(self) -> float:
        return self.breakpoints[-1]

    def __call__(self, t):
        """Rate at time(s) ``t``; zero outside the schedule."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        idx = np.where(t == self.end, len(self.rates) - 1, idx)
        inside = (idx >= 0) & (idx < len(self.rates))
        rates = np.asarray(self.rates)
        out = np.where(inside, rates[np.clip(idx, 0, len(rates) - 1)], 0.0)
        return out if out.ndim else float(out)

    def scaled(self, factor: float) -> "InfusionSchedule":
        return InfusionSchedule(self.breakpoints, tuple(factor * r for r in self.rates))

    def mapped(self, psi: PsiFunction) -> "InfusionSchedule":
        """Same schedule on the time axis ``tau = psi(t) - psi(start)``."""
        bp = psi.value(np.asarray(self.breakpoints)) - float(psi.value(self.start))
        return InfusionSchedule(tuple(bp), self.rates)

    def digest(self) -> str:
        text = ",".join(repr(b) for b in self.breakpoints) + "|" + ",".join(repr(r) for r in self.rates)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class Trajectory:
    grid: np.ndarray
    states: np.ndarray
    alpha: float
    psi: str
    schedule_hash: str = ""
    method: str = "closed-form"

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=float)
        self.states = np.asarray(self.states, dtype=float)

    def component(self, i: int) -> np.ndarray:
        return self.states[:, i]

    def at(self, t: float) -> np.ndarray:
        """State at a grid node ``t``."""
        k = int(np.argmin(np.abs(self.grid - t)))
        if not np.isclose(self.grid[k], t, rtol=0, atol=1e-12 * max(1.0, abs(t))):
            raise DomainError(f"t={t} is not on the trajectory grid")
        return self.states[k]


def homogeneous_propagator(sys: LinearFracSystem, t: float) -> np.ndarray:
    """``E_alpha(A (psi(t) - psi(a))^alpha)``; the identity at ``t = a``."""
    if t < sys.a:
        raise DomainError(f"t={t} precedes the initial time {sys.a}")
    d = float(sys.dpsi(t, sys.a))
    return mittag_leffler_matrix(sys.alpha, 1.0, sys.A * d**sys.alpha, sys.policy)


def forced_kernel(sys: LinearFracSystem, d: float) -> np.ndarray:
    """``d^alpha E_{alpha,alpha+1}(A d^alpha)``: response to a unit step of length d in psi."""
    if d <= 0.0:
        return np.zeros_like(sys.A)
    da = d**sys.alpha
    return da * mittag_leffler_matrix(sys.alpha, sys.alpha + 1.0, sys.A * da, sys.policy)


def constant_input_step(
    sys: LinearFracSystem,
    y_start,
    u_const,
    t_start: float,
    t_end: float,
) -> np.ndarray:
    """Solution at ``t_end`` of the system started at ``t_start`` from ``y_start``.

    ``u_const`` is the forcing vector already multiplied through ``B`` (length
    n) or a control value of ``B``'s column dimension.  For ``alpha < 1`` this
    treats ``t_start`` as a fresh initial time; it is *not* a way to continue
    a trajectory across breakpoints (see :func:`solve_piecewise`).
    """
    if not t_end > t_start:
        raise DomainError(f"need t_end > t_start, got {t_start}, {t_end}")
    y_start = np.asarray(y_start, dtype=float).reshape(sys.n)
    forcing = _forcing_vector(sys, u_const)
    d = float(sys.dpsi(t_end, t_start))
    da = d**sys.alpha
    E1 = mittag_leffler_matrix(sys.alpha, 1.0, sys.A * da, sys.policy)
    return E1 @ y_start + forced_kernel(sys, d) @ forcing


def _forcing_vector(sys: LinearFracSystem, u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.size == sys.n and sys.B.shape[1] != sys.n:
        return u
    if u.size != sys.B.shape[1]:
        raise ValidationError(f"control has size {u.size}, B has {sys.B.shape[1]} columns", field="u")
    return sys.B @ u


def _as_grid(grid, lo: float, hi: float) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise DomainError("empty grid")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    slack = 1e-12 * max(1.0, abs(hi))
    if grid[0] < lo - slack or grid[-1] > hi + slack:
        raise DomainError(f"grid [{grid[0]}, {grid[-1]}] leaves the schedule coverage [{lo}, {hi}]")
    return grid


def solve_point(sys: LinearFracSystem, sched: InfusionSchedule, t: float) -> np.ndarray:
    """State at a single time ``t`` (see :func:`solve_piecewise`)."""
    psi = sys.psi
    pt = float(psi.value(t))
    y = homogeneous_propagator(sys, t) @ sys.y0 if np.any(sys.y0) else np.zeros(sys.n)
    bp = sched.breakpoints
    for k, rate in enumerate(sched.rates):
        lo, hi = bp[k], bp[k + 1]
        if rate == 0.0 or lo >= t:
            continue
        d1 = max(pt - float(psi.value(lo)), 0.0)
        d2 = max(pt - float(psi.value(min(hi, t))), 0.0)
        y = y + (forced_kernel(sys, d1) - forced_kernel(sys, d2)) @ _forcing_vector(sys, rate)
    return y


def solve_piecewise(sys: LinearFracSystem, sched: InfusionSchedule, grid) -> Trajectory:
    """Evaluate the exact solution on ``grid`` for a piecewise-constant control.

    The schedule must start at ``sys.a`` and cover the grid.  Each grid point
    is computed independently from the global representation anchored at
    ``a``, so results do not depend on the grid.
    """
    if not np.isclose(sched.start, sys.a, rtol=0, atol=1e-12):
        raise DomainError(f"schedule starts at {sched.start}, system at {sys.a}")
    grid = _as_grid(grid, sys.a, sched.end)
    states = np.array([solve_point(sys, sched, t) for t in grid])
    return Trajectory(grid, states, sys.alpha, sys.psi.descriptor(), sched.digest())


def solve_general_u(sys: LinearFracSystem, u, grid, rtol: float = 1e-10, breakpoints=()) -> Trajectory:
    """Solution for an arbitrary control ``u(t)`` by singular quadrature.

    The forcing integral at each grid point is taken in
    ``v = (psi(t) - psi(s))^alpha``, which absorbs the kernel singularity:

        int_0^{d^alpha} E_{alpha,alpha}(A v) B u(psi^{-1}(psi(t) - v^(1/alpha))) dv / alpha.

    ``breakpoints`` lists known discontinuities of ``u`` to help the
    adaptive rule.  Piecewise-constant controls should go through
    :func:`solve_piecewise` instead.
    """
    grid = _as_grid(grid, sys.a, np.inf)
    alpha = sys.alpha
    psi = sys.psi
    inv = 1.0 / alpha
    pa = float(psi.value(sys.a))
    bps = np.asarray(breakpoints, dtype=float)
    states = []
    for t in grid:
        y = homogeneous_propagator(sys, t) @ sys.y0
        pt = float(psi.value(t))
        V = max(pt - pa, 0.0) ** alpha
        if V > 0:

            def integrand(v):
                s = float(psi.inverse(pt - v**inv))
                E = mittag_leffler_matrix(alpha, alpha, sys.A * v, sys.policy)
                return E @ _forcing_vector(sys, u(s)) / alpha

            inner = bps[(bps > sys.a) & (bps < t)]
            points = sorted((pt - psi.value(inner)) ** alpha) if inner.size else None
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, err = integrate.quad_vec(integrand, 0.0, V, epsabs=1e-14, epsrel=rtol, points=points)
            if err > 1e3 * rtol * max(np.max(np.abs(val)), 1e-12):
                raise AccuracyError(f"forcing quadrature at t={t} reached only {err:.3e}", estimate=err)
            y = y + val
        states.append(y)
    return Trajectory(grid, np.array(states), alpha, psi.descriptor(), method="quadrature")


@dataclass
class ResidualReport:
    grid: np.ndarray
    residual: np.ndarray  # max-norm residual per grid point, NaN where excluded
    included: np.ndarray  # mask of points that entered the check

    @property
    def max_residual(self) -> float:
        vals = self.residual[self.included]
        return float(np.max(vals)) if vals.size else 0.0

    def max_over(self, times, atol: float = 1e-12) -> float:
        """Largest residual at the given times (which must be grid nodes and included)."""
        idx = [int(np.argmin(np.abs(self.grid - t))) for t in times]
        for k, t in zip(idx, times):
            if abs(self.grid[k] - t) > atol * max(1.0, abs(t)):
                raise DomainError(f"t={t} is not a grid node")
        vals = self.residual[idx]
        return float(np.nanmax(vals)) if len(vals) else 0.0


def residual_check(
    traj: Trajectory,
    sys: LinearFracSystem,
    sched: InfusionSchedule | None = None,
    exclusion: float | None = None,
) -> ResidualReport:
    """Residual ``|D^{alpha,psi} y - A y - B u|_inf`` of a trajectory at each node.

    The derivative is the L1 approximation on the trajectory grid.  Nodes
    closer than ``exclusion`` (default: the largest grid step) to a schedule
    breakpoint are excluded, since there the kernel singularity meets a
    control jump; the initial time is always a breakpoint.
    """
    grid = traj.grid
    D = psi_caputo_derivative_grid(grid, traj.states, sys.alpha, sys.psi)
    if sched is None:
        forcing = np.zeros_like(traj.states)
        bps = np.array([grid[0]])
    else:
        rates = np.atleast_1d(sched(grid))
        forcing = np.array([_forcing_vector(sys, r) for r in rates])
        bps = np.asarray(sched.breakpoints)
    R = D - traj.states @ sys.A.T - forcing
    res = np.max(np.abs(R), axis=1)
    width = float(np.max(np.diff(grid))) if exclusion is None else float(exclusion)
    dist = np.min(np.abs(grid[:, None] - bps[None, :]), axis=1)
    included = dist > width * (1 + 1e-9)
    residual = np.where(included, res, np.nan)
    return ResidualReport(grid, residual, included)
