"""Self-contained invariant and oracle checks, used by the ``check`` CLI.

Each check recomputes a structural property of the model or controller
through an independent route (generic linear algebra, finite differences,
refined quadrature) and compares against the closed forms shipped in the
package.  Sampling is deterministic (fixed seed).
"""
import math

import numpy as np

from . import bif, linid, model, reference, rk45, sim
from .funnel import FunnelSpec, cascade, observer_rhs, phi_eval
from .model import ManipulatorParams

_SEED = 20240817


def _random_states(n, rng, beta_margin=0.02):
    """Plant states with beta strictly inside the admissible region."""
    beta_max = model.BETA_MAX - beta_margin
    states = np.empty((n, 4))
    states[:, 0] = rng.uniform(-2.0, 2.0, n)
    states[:, 1] = rng.uniform(-beta_max, beta_max, n)
    states[:, 2:] = rng.uniform(-2.0, 2.0, (n, 2))
    return states


def _fd_gradient(fun, x, step=1e-6):
    g = np.empty(len(x))
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = step
        g[i] = (fun(x + e) - fun(x - e)) / (2 * step)
    return g


def check_mass_matrix_inverse():
    """M(beta) @ M^{-1}(beta) = I on a fine beta grid, two parameter sets."""
    worst = 0.0
    for p in (ManipulatorParams(), ManipulatorParams(m=2.0, l=0.7, c=3.0, d=0.1, s=0.7)):
        for beta in np.linspace(-model.BETA_MAX, model.BETA_MAX, 1001):
            res = model.mass_matrix(p, beta) @ model.mass_matrix_inverse(p, beta) - np.eye(2)
            worst = max(worst, float(np.max(np.abs(res))))
    return worst < 1e-12, f"max |M M^-1 - I| = {worst:.3e}"


def check_plant_residual():
    """Accelerations satisfy the second-order equations of motion."""
    rng = np.random.default_rng(_SEED)
    p = ManipulatorParams()
    worst = 0.0
    for x in _random_states(1000, rng):
        u_d = rng.uniform(-5.0, 5.0)
        xdot = model.plant_rhs(p, x, u_d)
        f1, f2 = model.generalized_forces(p, x)
        res = model.mass_matrix(p, x[1]) @ xdot[2:] - np.array([f1 + u_d, f2])
        worst = max(worst, float(np.max(np.abs(res))))
    return worst < 1e-12, f"max residual = {worst:.3e}"


def check_relative_degree():
    """L_g h = 0 and L_g L_f h = Gamma, analytically and by differences."""
    rng = np.random.default_rng(_SEED + 1)
    p = ManipulatorParams()
    w = p.output_weight
    worst_a = worst_fd = 0.0
    for x in _random_states(200, rng):
        g = model.input_field(p, x)
        worst_a = max(worst_a, abs(np.array([1.0, w, 0.0, 0.0]) @ g),
                      abs(np.array([0.0, 0.0, 1.0, w]) @ g - model.gamma(p, x[1])))
        grad_h = _fd_gradient(lambda z: model.output(p, z)[0], x)
        grad_lfh = _fd_gradient(lambda z: float(np.array([1.0, w, 0.0, 0.0])
                                                @ model.drift(p, z)), x)
        worst_fd = max(worst_fd, abs(grad_h @ g),
                       abs(grad_lfh @ g - model.gamma(p, x[1])))
    ok = worst_a < 1e-10 and worst_fd < 1e-6
    return ok, f"analytic {worst_a:.3e}, finite-difference {worst_fd:.3e}"


def check_transform_roundtrip():
    """phi_inverse(phi_forward(x)) = x and the reverse composition."""
    rng = np.random.default_rng(_SEED + 2)
    p = ManipulatorParams()
    worst = 0.0
    for x in _random_states(1000, rng):
        z = bif.phi_forward(p, x)
        worst = max(worst, float(np.max(np.abs(bif.phi_inverse(p, z) - x))))
        z2 = bif.phi_forward(p, bif.phi_inverse(p, z))
        worst = max(worst, float(np.max(np.abs(np.array(z2) - np.array(z)))))
    return worst < 1e-10, f"max round-trip error = {worst:.3e}"


def check_decoupling():
    """The internal coordinates annihilate the input field."""
    rng = np.random.default_rng(_SEED + 3)
    p = ManipulatorParams()
    worst = 0.0
    for x in _random_states(1000, rng):
        g = model.input_field(p, x)
        worst = max(worst, abs(bif.grad_phi1(x) @ g), abs(bif.grad_phi2(x) @ g))
    return worst < 1e-12, f"max |grad(phi_i) . g| = {worst:.3e}"


def check_internal_dynamics():
    """Closed-form internal dynamics match the chain-rule oracle."""
    rng = np.random.default_rng(_SEED + 4)
    p = ManipulatorParams()
    worst = 0.0
    for x in _random_states(1000, rng):
        z = bif.phi_forward(p, x)
        got = bif.internal_rhs(p, (z.eta1, z.eta2), z.y_dot)
        want = bif.internal_rhs_oracle(p, x, u_d=rng.uniform(-10, 10))
        worst = max(worst, abs(got[0] - want[0]), abs(got[1] - want[1]))
    return worst < 1e-9, f"max |closed form - oracle| = {worst:.3e}"


def check_linearization():
    """(Q, P) equal the finite-difference Jacobians at the origin."""
    p = ManipulatorParams()
    Q, P = linid.linearize(p)
    step = 1e-6
    worst = 0.0
    for j in range(2):
        eta = np.zeros(2)
        eta[j] = step
        up = np.array(bif.internal_rhs(p, eta, 0.0))
        dn = np.array(bif.internal_rhs(p, -eta, 0.0))
        worst = max(worst, float(np.max(np.abs((up - dn) / (2 * step) - Q[:, j]))))
    up = np.array(bif.internal_rhs(p, (0.0, 0.0), step))
    dn = np.array(bif.internal_rhs(p, (0.0, 0.0), -step))
    worst = max(worst, float(np.max(np.abs((up - dn) / (2 * step) - P))))
    return worst < 1e-6, f"max FD mismatch = {worst:.3e}"


def check_eigensplit():
    """Diagonalization, coupling split and eigenvalue identities."""
    p = ManipulatorParams()
    lin = linid.eigensplit(p)
    diag = lin.Vinv @ lin.Q @ lin.V - np.diag([lin.lambda1, lin.lambda2])
    res_v = float(np.max(np.abs(diag)))
    res_p = float(np.max(np.abs(lin.V @ np.array([lin.p1, lin.p2]) - lin.P)))
    res_prod = abs(lin.lambda1 * lin.lambda2 + 12 * p.c / p.l2m)
    res_sum = abs(lin.lambda1 + lin.lambda2 - 12 * p.d / p.l2m)
    ok = (res_v < 1e-10 and res_p < 1e-10 and res_prod < 1e-10 and res_sum < 1e-10
          and lin.lambda1 < 0 < lin.lambda2 and lin.p2 > 0)
    return ok, (f"|V^-1 Q V - diag| = {res_v:.3e}, |Vp - P| = {res_p:.3e}, "
                f"eigen identities {max(res_prod, res_sum):.3e}")


def check_reference_ic():
    """Adaptive quadrature vs Richardson-refined Simpson for the IC."""
    p = ManipulatorParams()
    lin = linid.eigensplit(p)
    cfg = reference.NewRefConfig(lambda2=lin.lambda2, p2=lin.p2)
    ref = reference.TransitionRef(0.0, math.pi / 4, 0.0, 3.0)
    got = reference.new_ref_ic(cfg, ref)

    def integrand(s):
        return math.exp(-lin.lambda2 * s) * lin.lambda2 * lin.p2 * reference.yref_eval(ref, s)[0]

    def simpson(n):
        ts = np.linspace(0.0, ref.tf, n + 1)
        vals = np.array([integrand(t) for t in ts])
        h = ts[1] - ts[0]
        return h / 3 * (vals[0] + vals[-1] + 4 * vals[1:-1:2].sum() + 2 * vals[2:-1:2].sum())

    coarse, fine = simpson(4096), simpson(8192)
    refined = fine + (fine - coarse) / 15.0
    want = -(refined + lin.p2 * ref.yf * math.exp(-lin.lambda2 * ref.tf))
    err = abs(got - want)
    return err < 1e-9, f"|quad - Richardson| = {err:.3e}"


def check_reference_consistency():
    """Bounded evaluation: ODE residual and steady state."""
    p = ManipulatorParams()
    lin = linid.eigensplit(p)
    cfg = reference.NewRefConfig(lambda2=lin.lambda2, p2=lin.p2)
    ref = reference.TransitionRef(0.0, math.pi / 4, 0.0, 3.0)
    bref = reference.BoundedReference(cfg, ref)
    worst = 0.0
    for t in np.linspace(0.05, 2.95, 59):
        v, vd, _ = bref.eval(t)
        fd = (bref.value(t + 1e-4) - bref.value(t - 1e-4)) / 2e-4
        worst = max(worst, abs(fd - vd))
    v_end = bref.eval(5.0)
    steady = abs(v_end[0] + lin.p2 * ref.yf) + abs(v_end[1]) + abs(v_end[2])
    ok = worst < 1e-5 and steady == 0.0
    return ok, f"max FD residual = {worst:.3e}, steady-state error = {steady:.3e}"


def check_cascade_algebra():
    """Rebuild the cascade from scratch at random feasible points."""
    rng = np.random.default_rng(_SEED + 5)
    specs = (FunnelSpec(1.5, 0.8, 0.001), FunnelSpec(1.5, 0.8, 0.001),
             FunnelSpec(60.0, 0.2, 0.001))
    worst = 0.0
    for _ in range(200):
        t = rng.uniform(0.0, 3.0)
        y = rng.uniform(-0.02, 0.02, 6)  # inside the tightest funnel on [0, 3]
        out = cascade(specs, t, *y)
        phi0, dphi0 = phi_eval(specs[0], t)
        phi1, _ = phi_eval(specs[1], t)
        phi2, _ = phi_eval(specs[2], t)
        e0, e0_1, e0_2 = y[0] - y[3], y[1] - y[4], y[2] - y[5]
        k0 = 1 / (1 - phi0**2 * e0**2)
        k0_1 = 2 * phi0 * e0 / (1 - phi0**2 * e0**2) ** 2 * (dphi0 * e0 + phi0 * e0_1)
        e1 = e0_1 + k0 * e0
        k1 = 1 / (1 - phi1**2 * e1**2)
        e2 = e0_2 + k0 * e0_1 + k0_1 * e0 + k1 * e1
        u = e2 / (1 - phi2**2 * e2**2)
        worst = max(worst, abs(u - out.u), abs(e2 - out.e2), abs(e1 - out.e1))
    return worst < 1e-12, f"max rebuild mismatch = {worst:.3e}"


def check_observer_linearity():
    """Superposition of the observer right-hand side."""
    rng = np.random.default_rng(_SEED + 6)
    gains = (1e2, 1e5, 1e6)
    worst = 0.0
    for _ in range(100):
        za, zb = rng.normal(size=3), rng.normal(size=3)
        ya, yb = rng.normal(), rng.normal()
        lhs = np.array(observer_rhs(gains, za + zb, ya + yb))
        rhs_sum = np.array(observer_rhs(gains, za, ya)) + np.array(observer_rhs(gains, zb, yb))
        worst = max(worst, float(np.max(np.abs(lhs - rhs_sum))))
    return worst < 1e-9, f"max superposition error = {worst:.3e}"


def check_energy_conservation():
    """Unforced, undamped runs conserve mechanical energy."""
    p = ManipulatorParams(d=0.0)
    x0 = np.array([0.3, 0.2, 0.4, -0.3])
    res = rk45.solve(lambda t, x: model.plant_rhs(p, x, 0.0), (0.0, 3.0), x0,
                     rel_tol=1e-11, abs_tol=1e-13, max_step=0.05)
    e0 = model.mechanical_energy(p, x0)
    drift = max(abs(model.mechanical_energy(p, x) - e0) for x in res.y)
    return drift < 1e-6, f"energy drift = {drift:.3e}"


def check_zero_scenario():
    """All-zero configuration stays identically at the origin."""
    cfg = sim.ScenarioConfig()
    traj = sim.integrate(cfg)
    state_max = float(np.max(np.abs(traj.data[:, 1:5])))
    u_max = float(np.max(np.abs(traj["u"])))
    gains_dev = max(float(np.max(np.abs(traj[k] - 1.0))) for k in ("k0", "k1", "k2"))
    ok = state_max <= 1e-10 and u_max <= 1e-10 and gains_dev <= 1e-10
    return ok, f"max |state| = {state_max:.3e}, max |u| = {u_max:.3e}"


ALL_CHECKS = (
    ("mass-matrix-inverse", check_mass_matrix_inverse),
    ("plant-residual", check_plant_residual),
    ("relative-degree", check_relative_degree),
    ("transform-roundtrip", check_transform_roundtrip),
    ("input-decoupling", check_decoupling),
    ("internal-dynamics-oracle", check_internal_dynamics),
    ("linearization-fd", check_linearization),
    ("eigensplit", check_eigensplit),
    ("reference-ic-quadrature", check_reference_ic),
    ("reference-consistency", check_reference_consistency),
    ("cascade-algebra", check_cascade_algebra),
    ("observer-linearity", check_observer_linearity),
    ("energy-conservation", check_energy_conservation),
    ("zero-scenario", check_zero_scenario),
)


def run_all(verbose: bool = True) -> int:
    """Run every check; return 0 if all pass, 1 otherwise."""
    failures = 0
    for name, fn in ALL_CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        failures += 0 if ok else 1
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return 0 if failures == 0 else 1
