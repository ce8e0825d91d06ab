"""Funnel functions, the gain/error cascade, and the two control laws.

The cascade stacks three funnel-gain stages around the auxiliary output
error: e1 = e0' + k0 e0, e2 = e1' + k1 e1, u = +k2 e2, each gain
k = 1/(1 - phi^2 e^2) blowing up as the error approaches its funnel
boundary 1/phi.  The positive feedback sign matches the negative
effective input gain of the auxiliary output on the admissible region.

Two variants supply the surrogate derivatives of the auxiliary output:
``controller_lin`` uses the modal derivative ladder, ``controller_hg`` a
high-gain observer whose three states estimate the output and its first
two time derivatives.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ConfigError, FunnelViolation
from .linid import LinData, psi, ynew_derivatives
from .model import ManipulatorParams
from .reference import BoundedReference


@dataclass(frozen=True)
class FunnelSpec:
    """Funnel function phi(t) = 1 / (a * exp(-b t) + eps)."""

    a: float
    b: float
    eps: float

    def __post_init__(self):
        if self.a < 0 or self.b <= 0 or self.eps <= 0:
            raise ConfigError(f"funnel needs a >= 0, b > 0, eps > 0, got {self}")


def phi_eval(f: FunnelSpec, t: float) -> tuple[float, float]:
    """Funnel function and its derivative at time t >= 0."""
    decay = f.a * math.exp(-f.b * t)
    phi = 1.0 / (decay + f.eps)
    return phi, f.b * decay * phi * phi


class ObserverState(NamedTuple):
    """Estimates of the auxiliary output and its first two derivatives."""

    zeta1: float
    zeta2: float
    zeta3: float


class CascadeOutput(NamedTuple):
    """Errors, gains and input of one controller evaluation."""

    e0: float
    e1: float
    e2: float
    k0: float
    k1: float
    k2: float
    u: float
    e0_1: float  # surrogate first derivative of e0
    e0_2: float  # surrogate second derivative of e0
    k0_1: float  # derivative of k0 induced by (e0, e0_1)
    e1_1: float  # surrogate derivative of e1


def gain(phi: float, e: float, *, t=None, level=None) -> float:
    """Funnel gain 1/(1 - phi^2 e^2); raises once the boundary is reached."""
    w = 1.0 - (phi * e) ** 2
    if w <= 0.0:
        raise FunnelViolation(
            f"funnel boundary reached at level {level}, t = {t}: phi*|e| = {phi * abs(e):.6f} >= 1",
            t=t, level=level, phi=phi, error=e)
    return 1.0 / w


def cascade(specs, t: float, y_new: float, y_new_1: float, y_new_2: float,
            y_bar_ref: float, y_bar_ref_dot: float, y_bar_ref_ddot: float) -> CascadeOutput:
    """Evaluate the three-stage funnel cascade and the input u = k2 e2."""
    phi0, phi0_dot = phi_eval(specs[0], t)
    phi1, _ = phi_eval(specs[1], t)
    phi2, _ = phi_eval(specs[2], t)

    e0 = y_new - y_bar_ref
    e0_1 = y_new_1 - y_bar_ref_dot
    e0_2 = y_new_2 - y_bar_ref_ddot

    k0 = gain(phi0, e0, t=t, level=0)
    # exact time derivative of k0 given (e0, e0_1)
    k0_1 = 2.0 * phi0 * e0 * k0 * k0 * (phi0_dot * e0 + phi0 * e0_1)
    e1 = e0_1 + k0 * e0
    k1 = gain(phi1, e1, t=t, level=1)
    e1_1 = e0_2 + k0 * e0_1 + k0_1 * e0
    e2 = e1_1 + k1 * e1
    k2 = gain(phi2, e2, t=t, level=2)
    return CascadeOutput(e0=e0, e1=e1, e2=e2, k0=k0, k1=k1, k2=k2, u=k2 * e2,
                         e0_1=e0_1, e0_2=e0_2, k0_1=k0_1, e1_1=e1_1)


def cascade_margins(specs, t: float, y_new: float, y_new_1: float, y_new_2: float,
                    y_bar_ref: float, y_bar_ref_dot: float, y_bar_ref_ddot: float
                    ) -> tuple[float, float, float]:
    """Funnel margins phi_i |e_i| without raising; diagnostic use only.

    Levels below a violated one are undefined and reported as inf.
    """
    phi0, phi0_dot = phi_eval(specs[0], t)
    e0 = y_new - y_bar_ref
    m0 = phi0 * abs(e0)
    if m0 >= 1.0:
        return m0, math.inf, math.inf
    e0_1 = y_new_1 - y_bar_ref_dot
    k0 = 1.0 / (1.0 - (phi0 * e0) ** 2)
    e1 = e0_1 + k0 * e0
    phi1, _ = phi_eval(specs[1], t)
    m1 = phi1 * abs(e1)
    if m1 >= 1.0:
        return m0, m1, math.inf
    k0_1 = 2.0 * phi0 * e0 * k0 * k0 * (phi0_dot * e0 + phi0 * e0_1)
    k1 = 1.0 / (1.0 - (phi1 * e1) ** 2)
    e2 = (y_new_2 - y_bar_ref_ddot) + k0 * e0_1 + k0_1 * e0 + k1 * e1
    phi2, _ = phi_eval(specs[2], t)
    return m0, m1, phi2 * abs(e2)


def observer_rhs(gains, zeta, y_new: float) -> tuple[float, float, float]:
    """High-gain observer dynamics; linear in (zeta, y_new)."""
    l1, l2, l3 = gains
    err = y_new - zeta[0]
    return l1 * err + zeta[1], l2 * err + zeta[2], l3 * err


def controller_lin(p: ManipulatorParams, lin: LinData, specs,
                   new_ref: BoundedReference, t: float, x) -> CascadeOutput:
    """Feedback law with ladder-based surrogate derivatives."""
    y_new, y1, y2 = ynew_derivatives(p, lin, x)
    br, br_dot, br_ddot = new_ref.eval(t)
    return cascade(specs, t, y_new, y1, y2, br, br_dot, br_ddot)


def controller_hg(p: ManipulatorParams, lin: LinData, specs,
                  new_ref: BoundedReference, gains, t: float, x,
                  zeta) -> tuple[CascadeOutput, tuple[float, float, float]]:
    """Feedback law with observer-based derivative estimates.

    Returns the cascade output and the observer state derivative for
    co-integration with the plant.
    """
    y_new = psi(p, lin, x)
    br, br_dot, br_ddot = new_ref.eval(t)
    out = cascade(specs, t, y_new, zeta[1], zeta[2], br, br_dot, br_ddot)
    return out, observer_rhs(gains, zeta, y_new)


def default_observer_init(p: ManipulatorParams, lin: LinData, x0) -> ObserverState:
    """Observer start (psi(x0), 0, 0): no peaking in the first state."""
    return ObserverState(psi(p, lin, x0), 0.0, 0.0)
