"""Independent reference solver: fractional Adams-Bashforth-Moulton in psi-time.

With ``tau = psi(t) - psi(a)`` the psi-Caputo system becomes an ordinary
Caputo system in ``tau`` whose control has breakpoints ``psi(t_k) - psi(a)``.
That system is integrated with the product-trapezoidal predictor-corrector
(one corrector sweep) on a uniform tau grid.  The control contribution
``I^alpha[B u](tau)`` of a piecewise-constant schedule is integrated exactly
segment by segment, so jumps that fall between grid nodes cost no accuracy;
only the ``A y`` term is discretised.  No Mittag-Leffler function is used.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import AccuracyError, DomainError
from .solver import InfusionSchedule, LinearFracSystem, Trajectory, _forcing_vector


def _exact_forcing(sys: LinearFracSystem, sched_tau: InfusionSchedule, tau: np.ndarray) -> np.ndarray:
    """``I^alpha [B u](tau)`` for the piecewise-constant control, shape (len(tau), n)."""
    alpha = sys.alpha
    g = np.zeros((tau.size, sys.n))
    bp = sched_tau.breakpoints
    scale = 1.0 / math.gamma(alpha + 1.0)
    for k, rate in enumerate(sched_tau.rates):
        if rate == 0.0:
            continue
        lo = np.clip(tau - bp[k], 0.0, None) ** alpha
        hi = np.clip(tau - bp[k + 1], 0.0, None) ** alpha
        g += np.outer((lo - hi) * scale, _forcing_vector(sys, rate))
    return g


def abm_tau(sys: LinearFracSystem, sched_tau: InfusionSchedule, steps: int, horizon: float):
    """Integrate the tau-system on ``[0, horizon]``; returns (tau nodes, states)."""
    alpha = sys.alpha
    h = horizon / steps
    tau = h * np.arange(steps + 1)
    base = sys.y0[None, :] + _exact_forcing(sys, sched_tau, tau)
    A = sys.A

    k = np.arange(steps + 2, dtype=float)
    ka = k**alpha
    ka1 = k ** (alpha + 1.0)
    c_pred = h**alpha / math.gamma(alpha + 1.0)
    c_corr = h**alpha / math.gamma(alpha + 2.0)

    y = np.empty((steps + 1, sys.n))
    F = np.empty_like(y)
    y[0] = sys.y0
    F[0] = A @ y[0]
    for n in range(steps):
        m = n + 1
        # predictor weights b_{j,m} = (m-j)^a - (m-1-j)^a, j = 0..n
        b = ka[m:0:-1] - ka[m - 1 :: -1][: n + 1]
        pred = base[m] + c_pred * (b @ F[: n + 1])
        # corrector weights a_{j,m}
        a = np.empty(n + 1)
        a[0] = ka1[n] - (n - alpha) * ka[m]
        if n >= 1:
            d = m - np.arange(1, n + 1)  # m - j for j = 1..n
            a[1:] = ka1[d + 1] - 2.0 * ka1[d] + ka1[d - 1]
        y[m] = base[m] + c_corr * (a @ F[: n + 1] + A @ pred)
        F[m] = A @ y[m]
    return tau, y


def _interpolate(tau_nodes: np.ndarray, y: np.ndarray, tau_out: np.ndarray) -> np.ndarray:
    """Local cubic Lagrange interpolation on the uniform tau grid."""
    h = tau_nodes[1] - tau_nodes[0]
    n = tau_nodes.size
    out = np.empty((tau_out.size, y.shape[1]))
    for i, x in enumerate(tau_out):
        j = int(np.clip(np.floor(x / h) - 1, 0, n - 4))
        xs = tau_nodes[j : j + 4]
        w = np.ones(4)
        for p in range(4):
            for q in range(4):
                if q != p:
                    w[p] *= (x - xs[q]) / (xs[p] - xs[q])
        out[i] = w @ y[j : j + 4]
    return out


def oracle_substitution_solve(
    sys: LinearFracSystem,
    sched: InfusionSchedule,
    steps: int = 4000,
    grid=None,
    self_check: bool = False,
    check_tol: float = 5e-3,
) -> Trajectory:
    """Reference trajectory of the psi-Caputo system via the tau substitution.

    Args:
        sys: the system; ``sys.a`` must equal the schedule start.
        sched: piecewise-constant control in original time.
        steps: number of uniform tau steps over the schedule horizon (>= 100).
        grid: output times in original time; defaults to the tau nodes mapped back.
        self_check: also run with ``2 * steps`` and raise AccuracyError if the two
            runs differ by more than ``check_tol`` (relative, max norm).
    """
    if steps < 100:
        raise DomainError(f"steps must be at least 100, got {steps}")
    if not np.isclose(sched.start, sys.a, rtol=0, atol=1e-12):
        raise DomainError(f"schedule starts at {sched.start}, system at {sys.a}")
    psi = sys.psi
    sched_tau = sched.mapped(psi)
    horizon = sched_tau.end

    tau_nodes, y = abm_tau(sys, sched_tau, steps, horizon)
    if grid is None:
        grid_out = psi.inverse(tau_nodes + float(psi.value(sys.a)))
        states = y
    else:
        grid_out = np.asarray(grid, dtype=float)
        tau_out = np.clip(psi.value(grid_out) - float(psi.value(sys.a)), 0.0, horizon)
        states = _interpolate(tau_nodes, y, tau_out)

    if self_check:
        tau2, y2 = abm_tau(sys, sched_tau, 2 * steps, horizon)
        gap = np.max(np.abs(y2[::2] - y))
        scale = max(np.max(np.abs(y2)), 1e-300)
        if gap > check_tol * scale:
            raise AccuracyError(
                f"step doubling changed the solution by {gap / scale:.3e} (relative); refine steps",
                estimate=gap / scale,
            )
    return Trajectory(grid_out, states, sys.alpha, psi.descriptor(), sched.digest(), method="abm")
