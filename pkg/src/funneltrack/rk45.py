"""Adaptive embedded Runge-Kutta 5(4) with dense output and state guards.

Dormand-Prince pair: the 5th-order solution is propagated, the embedded
4th-order difference drives a PI step controller, and the quartic
interpolant serves dense output on an arbitrary sampling grid.

Guards: exceptions listed in ``guards`` raised by the right-hand side
(funnel or domain violations) reject the trial step and bisect it; if the
step underflows ``min_step`` the guard exception propagates, so the caller
learns the first offending time and state.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrationError

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = (
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# embedded error weights (difference of the two propagation formulas)
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# quartic dense-output polynomial (Shampine's interpolant for this pair)
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
# PI controller exponents for a 4th-order error estimate
_ALPHA = 0.7 / 5.0
_BETA = 0.4 / 5.0


@dataclass
class SolveResult:
    """Dense samples plus final state and step statistics."""

    t: np.ndarray
    y: np.ndarray  # shape (len(t), dim)
    t_final: float = 0.0
    y_final: np.ndarray = None
    naccept: int = 0
    nreject: int = 0
    nguard: int = 0
    nfev: int = 0
    step_sizes: list = field(default_factory=list)


def _error_norm(err, y0, y1, rel_tol, abs_tol):
    scale = abs_tol + rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, t_end, rel_tol, abs_tol, max_step, guards):
    """Hairer-style starting step, conservative under guard exceptions."""
    span = t_end - t0
    scale = abs_tol + rel_tol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, 0.1 * span, max_step)
    try:
        f1 = f(t0 + h0, y0 + h0 * f0)
    except guards:
        return min(1e-8, max_step, span)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step, span)


def solve(f, t_span, y0, *, rel_tol=1e-9, abs_tol=1e-12, max_step=math.inf,
          min_step=1e-12, sample_step=None, guards=()) -> SolveResult:
    """Integrate y' = f(t, y) over ``t_span`` with dense sampling.

    ``sample_step`` > 0 emits interpolated states on the uniform grid
    t0 + k * sample_step (the endpoint is always included); ``None``
    records accepted steps only.  ``guards`` is a tuple of exception
    types treated as state-constraint violations (see module docstring).
    """
    t0, t_end = float(t_span[0]), float(t_span[1])
    if t_end <= t0:
        raise ValueError(f"need t_end > t0, got {t_span}")
    guards = tuple(guards)
    y = np.asarray(y0, dtype=float).copy()
    dim = y.size

    result = SolveResult(t=None, y=None)
    sample_ts = [t0]
    sample_ys = [y.copy()]
    next_k = 1  # next sample index on the uniform grid

    f_curr = f(t0, y)  # guard violation at the initial point propagates
    result.nfev += 1
    h = _initial_step(f, t0, y, f_curr, t_end, rel_tol, abs_tol, max_step, guards)
    result.nfev += 1

    t = t0
    err_prev = 1e-4
    K = np.empty((7, dim))
    while t < t_end:
        h = min(h, max_step, t_end - t)
        K[0] = f_curr
        try:
            for i, a_row in enumerate(_A):
                K[i + 1] = f(t + _C[i + 1] * h, y + h * (a_row @ K[: i + 1]))
            y_new = y + h * (_B @ K[:6])
            K[6] = f(t + h, y_new)
        except guards as exc:
            result.nfev += 1  # at least the failing evaluation
            result.nguard += 1
            h *= 0.5
            if h < min_step:
                if getattr(exc, "state", None) is None and hasattr(exc, "state"):
                    exc.state = y.copy()  # last accepted state before the wall
                raise
            continue
        result.nfev += 6

        err = _error_norm(h * (_E @ K), y, y_new, rel_tol, abs_tol)
        if math.isnan(err) or math.isinf(err):
            err = 2.0  # treat as a rejected step
        if err > 1.0:
            result.nreject += 1
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            if h < min_step:
                raise IntegrationError(
                    f"step size underflow ({h:.3e} < {min_step:.3e}) at t = {t:.6f}",
                    t=t, state=y.copy())
            continue

        # accepted: dense samples inside (t, t+h]
        if sample_step is not None:
            t_target = t0 + next_k * sample_step
            if t_target <= t + h + 1e-14:
                Qd = K.T @ _P  # (dim, 4)
                while t_target <= t + h + 1e-14:
                    t_emit = t_end if abs(t_target - t_end) < 1e-12 else t_target
                    theta = min(1.0, (t_emit - t) / h)
                    pvec = np.array([theta, theta**2, theta**3, theta**4])
                    sample_ts.append(t_emit)
                    sample_ys.append(y + h * (Qd @ pvec))
                    next_k += 1
                    t_target = t0 + next_k * sample_step

        t += h
        y = y_new
        f_curr = K[6]  # FSAL
        result.naccept += 1
        result.step_sizes.append(h)
        if err == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** -_ALPHA * err_prev ** _BETA))
        err_prev = max(err, 1e-4)
        h *= factor

    if sample_step is None or sample_ts[-1] < t_end - 1e-14:
        sample_ts.append(t_end)
        sample_ys.append(y.copy())
    result.t = np.array(sample_ts)
    result.y = np.array(sample_ys)
    result.t_final = t
    result.y_final = y.copy()
    return result
