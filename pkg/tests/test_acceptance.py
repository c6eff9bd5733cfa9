"""Acceptance suite: one test per headline property of the library, each
printing a single pass/fail summary line.

The convergence-order study (criterion 4) measures every method's slope on
the problem where its asymptotic range is clean: the spinning top against a
fine collocation reference for the DRG schemes and compositions, the spin
chain against its exact solution for the high-order collocation schemes.
"""

import time

import numpy as np
import pytest

from drg import (Oscillator, SpinChain, SpinningTop, StepConfig,
                 integrate, make_drg, make_method, riemannian_gradient,
                 secant_residual)
from drg.harness import ExperimentSpec, build_problem, fit_slope, \
    reference_endpoint
from drg.integrators import CollocationMethod, DRGMethod
from drg.problems import benchmark_initial_conditions

TOP = SpinningTop(inertia=(1.0, 2.0, 4.0))
CHAIN = SpinChain(d=5)
CFG = StepConfig()


def _report(num, name, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"\n[acceptance] criterion {num} ({name}): {status} — {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def _random_pair(m, rng, scale=0.2):
    u = m.random_point(rng)
    while True:
        v = m.retract(u, m.random_tangent(rng, u, scale))
        if m.distance(u, v) <= 0.5:
            return u, v
        scale *= 0.5


def test_criterion_1_secant_identity():
    t0 = time.time()
    rng = np.random.default_rng(101)
    worst = {}
    for problem, kinds in ((TOP, ("mp", "ia", "sia", "avf")),
                           (CHAIN, ("mp", "ia", "sia", "mmp", "avf"))):
        m = problem.manifold
        drgs = {k: make_drg(k, "left" if k == "ia" else "mid", nq=16)
                for k in kinds}
        for _ in range(100):
            u, v = _random_pair(m, rng)
            assert m.distance(u, v) <= 0.5
            scale = 1.0 + abs(problem.hamiltonian(u))
            for k in kinds:
                r = secant_residual(problem, drgs[k], u, v) / scale
                worst[k] = max(worst.get(k, 0.0), r)
    elapsed = time.time() - t0
    ok = all(worst[k] <= 1e-12 for k in ("mp", "ia", "sia", "mmp")) \
        and worst["avf"] <= 1e-10 and elapsed < 5.0
    detail = ("max residual " + ", ".join(f"{k}={v:.1e}"
                                          for k, v in sorted(worst.items()))
              + f"; {elapsed:.1f}s")
    _report(1, "secant identity", ok, detail)


def test_criterion_2_consistency():
    t0 = time.time()
    rng = np.random.default_rng(102)
    worst = 0.0
    for problem, kinds in ((TOP, ("mp", "ia", "sia", "avf")),
                           (CHAIN, ("mp", "ia", "sia", "mmp", "avf"))):
        m = problem.manifold
        drgs = [make_drg(k, "left" if k == "ia" else "mid", nq=16)
                for k in kinds]
        for _ in range(50):
            u = m.random_point(rng)
            g = riemannian_gradient(problem, u)
            for drg in drgs:
                worst = max(worst, float(np.max(np.abs(
                    drg(problem, u, u, u) - g))))
    elapsed = time.time() - t0
    ok = worst <= 1e-10 and elapsed < 1.0
    _report(2, "consistency at u=v", ok,
            f"max |gradbar(u,u) - grad H(u)| = {worst:.1e}; {elapsed:.1f}s")


def test_criterion_3_energy_conservation():
    t0 = time.time()
    setup = benchmark_initial_conditions()
    top, u0 = setup["top"]["problem"], setup["top"]["initial"]
    drifts = {}
    for mid in ("mp", "ia", "sia", "avf", "imp"):
        rec = integrate(make_method(mid), top, 1.0, 1000.0, u0, CFG)
        assert rec.failed is None, f"{mid}: {rec.failed}"
        drifts[mid] = float(np.max(np.abs(rec.energy_errors)))
    elapsed = time.time() - t0
    worst_drg = max(drifts[m] for m in ("mp", "ia", "sia"))
    ok = (all(drifts[m] <= 1e-10 for m in ("mp", "ia", "sia"))
          and drifts["avf"] <= 1e-9
          and drifts["imp"] >= 1e3 * max(worst_drg, drifts["avf"])
          and elapsed < 30.0)
    detail = (", ".join(f"{m}={v:.1e}" for m, v in drifts.items())
              + f"; {elapsed:.1f}s")
    _report(3, "energy conservation over t=1000", ok, detail)


# (method, expected order, tolerance) per problem; each method's slope is
# asserted on the problem where its asymptotic range at t_end=10 is not
# polluted by the reference round-off floor (top: collocation s=3,4) or by
# basis-dependent error accumulation (chain: comp4)
ORDER_TARGETS = {
    "top": (("ia", 1.0, 0.2), ("avf", 2.0, 0.2), ("mp", 2.0, 0.2),
            ("sia", 2.0, 0.2), ("comp2", 2.0, 0.2), ("compsia", 4.0, 0.3),
            ("comp4", 4.0, 0.3), ("coll2", 4.0, 0.3)),
    "chain": (("ia", 1.0, 0.2), ("coll2", 4.0, 0.3), ("coll3", 6.0, 0.3),
              ("coll4", 8.0, 0.5)),
}


def test_criterion_4_convergence_orders():
    t0 = time.time()
    hs = tuple(2.0 ** -k for k in range(8))
    results = []
    ok = True
    for pid, targets in ORDER_TARGETS.items():
        spec = ExperimentSpec(problem=pid, h=hs, t_end=10.0)
        problem, u0, exact = build_problem(spec)
        u_ref = reference_endpoint(spec, problem, u0, exact)
        for mid, expect, tol in targets:
            method = make_method(mid)
            errs = []
            for h in hs:
                rec = integrate(method, problem, h, 10.0, u0, CFG)
                errs.append(float("nan") if rec.failed is not None
                            else float(np.linalg.norm(rec.states[-1] - u_ref)))
            slope = fit_slope(hs, errs)
            good = abs(slope - expect) <= tol
            ok = ok and good
            results.append(f"{pid}/{mid}={slope:.2f}"
                           + ("" if good else f" (want {expect}±{tol})"))
    elapsed = time.time() - t0
    ok = ok and elapsed < 300.0
    _report(4, "convergence orders", ok,
            ", ".join(results) + f"; {elapsed:.0f}s")


def test_criterion_5_collocation_s1_is_avf_drg():
    t0 = time.time()
    rng = np.random.default_rng(105)
    coll1 = CollocationMethod(1)
    worst = 0.0
    for problem in (TOP, CHAIN):
        # the one-stage scheme works in T_{u0} with the stage skew operator
        # pulled back to the center: the matching DRG step keeps the center
        # at the left endpoint and conjugates Omega at the chordal stage
        avf = DRGMethod(make_drg("avf", "left", nq=16), omega="pullback",
                        node=0.5)
        for _ in range(25):
            u = problem.manifold.random_point(rng)
            for h in (0.1, 0.5):
                v1, _ = coll1.step(problem, u, h, CFG)
                v2, _ = avf.step(problem, u, h, CFG)
                worst = max(worst, float(np.max(np.abs(v1 - v2))))
    elapsed = time.time() - t0
    ok = worst <= 1e-12 and elapsed < 5.0
    _report(5, "collocation s=1 reproduces the AVF DRG step", ok,
            f"max step difference = {worst:.1e}; {elapsed:.1f}s")


def _classical_ia_step(u, h, tol=1e-15):
    """Independently coded flat Itoh-Abe discrete-gradient step for
    H = ||u||^2 / 2 with skew matrix J = [[0, -1], [1, 0]]: coordinatewise
    divided differences along the standard basis, J applied at the left
    endpoint."""
    jmat = np.array([[0.0, -1.0], [1.0, 0.0]])

    def hamiltonian(w):
        return 0.5 * float(np.dot(w, w))

    v = u.copy()
    for _ in range(500):
        gbar = np.zeros(2)
        w_prev = u.copy()
        for i in range(2):
            w_next = w_prev.copy()
            w_next[i] = v[i]
            if v[i] != u[i]:
                gbar[i] = (hamiltonian(w_next) - hamiltonian(w_prev)) \
                    / (v[i] - u[i])
            else:
                gbar[i] = w_prev[i]
            w_prev = w_next
        v_new = u + h * (jmat @ gbar)
        if np.max(np.abs(v_new - v)) <= tol:
            return v_new
        v = v_new
    raise AssertionError("classical IA fixed point did not converge")


def _classical_avf_step(u, h, tol=1e-15):
    """Independently coded flat AVF step for H = ||u||^2 / 2: the averaged
    gradient of a quadratic H is the chord midpoint (closed form)."""
    jmat = np.array([[0.0, -1.0], [1.0, 0.0]])
    v = u.copy()
    for _ in range(500):
        v_new = u + h * (jmat @ (0.5 * (u + v)))
        if np.max(np.abs(v_new - v)) <= tol:
            return v_new
        v = v_new
    raise AssertionError("classical AVF fixed point did not converge")


def test_criterion_6_euclidean_reduction():
    t0 = time.time()
    osc = Oscillator()
    worst = 0.0
    for mid, classical in (("ia", _classical_ia_step),
                           ("avf", _classical_avf_step)):
        method = make_method(mid)
        u_lib = np.array([1.0, 0.0])
        u_ref = np.array([1.0, 0.0])
        for _ in range(100):
            u_lib, _ = method.step(osc, u_lib, 0.1, CFG)
            u_ref = classical(u_ref, 0.1)
            worst = max(worst, float(np.max(np.abs(u_lib - u_ref))))
    elapsed = time.time() - t0
    ok = worst <= 1e-13 and elapsed < 1.0
    _report(6, "flat-space reduction to classical discrete gradients", ok,
            f"max trajectory difference over 100 steps = {worst:.1e}; "
            f"{elapsed:.1f}s")


def test_criterion_7_exact_solution_oracle():
    t0 = time.time()
    setup = benchmark_initial_conditions()
    chain, sol = setup["chain"]["problem"], setup["chain"]["exact"]
    delta = 1e-5
    worst = 0.0
    for t in np.linspace(0.0, 10.0, 20):
        fd = (sol(chain, t + delta) - sol(chain, t - delta)) / (2.0 * delta)
        worst = max(worst, float(np.max(np.abs(
            fd - chain.field(sol(chain, t))))))
    elapsed = time.time() - t0
    ok = worst <= 1e-8 and elapsed < 1.0
    _report(7, "exact chain solution solves the field equation", ok,
            f"max finite-difference residual = {worst:.1e}; {elapsed:.1f}s")


def test_criterion_8_geometry_axioms():
    t0 = time.time()
    rng = np.random.default_rng(108)
    worst = {"identity": 0.0, "first_order": 0.0, "roundtrip": 0.0,
             "adjoint": 0.0, "orthonormal": 0.0}
    for m in (TOP.manifold, CHAIN.manifold):
        eye = np.eye(m.dim)
        for _ in range(25):
            p = m.random_point(rng)
            x = m.random_tangent(rng, p, 0.3)
            # axiom 1: zero tangent vector is a fixed point
            worst["identity"] = max(worst["identity"], float(np.max(np.abs(
                m.retract(p, np.zeros(m.ambient_dim)) - p))))
            # axiom 2: first-order agreement with the identity chart
            eps = 1e-6
            fd = (m.retract(p, eps * x) - p) / eps
            worst["first_order"] = max(worst["first_order"], float(np.max(
                np.abs(fd - x))) / max(1.0, float(np.max(np.abs(x)))))
            # axiom 3 + inverse roundtrip
            u = m.retract(p, x)
            assert m.on_manifold(u, tol=1e-12)
            worst["roundtrip"] = max(worst["roundtrip"], float(np.max(
                np.abs(m.retract(p, m.inverse_retract(p, u)) - u))))
            # tangent-map adjointness
            v = m.random_tangent(rng, p, 1.0)
            a = rng.standard_normal(m.ambient_dim)
            lhs = float(np.dot(m.tangent_map(p, x, v), a))
            rhs = float(np.dot(v, m.tangent_map_transpose(p, x, a)))
            worst["adjoint"] = max(worst["adjoint"], abs(lhs - rhs))
            # basis orthonormality
            basis = np.asarray(m.basis(p))
            gram = basis @ basis.T
            worst["orthonormal"] = max(worst["orthonormal"], float(np.max(
                np.abs(gram - eye))))
    elapsed = time.time() - t0
    ok = (worst["identity"] <= 1e-15 and worst["first_order"] <= 1e-5
          and worst["roundtrip"] <= 1e-12 and worst["adjoint"] <= 1e-12
          and worst["orthonormal"] <= 1e-12 and elapsed < 5.0)
    _report(8, "geometry axioms", ok,
            ", ".join(f"{k}={v:.1e}" for k, v in worst.items())
            + f"; {elapsed:.1f}s")


def test_criterion_9_symmetry():
    t0 = time.time()
    rng = np.random.default_rng(109)
    worst = {}
    for mid in ("mp", "sia", "avf", "ia2", "compsia", "comp4"):
        method = make_method(mid)
        w = 0.0
        for _ in range(50):
            u = TOP.manifold.random_point(rng)
            v, _ = method.step(TOP, u, 0.1, CFG)
            back, _ = method.step(TOP, v, -0.1, CFG)
            w = max(w, float(np.max(np.abs(back - u))))
        worst[mid] = w
    elapsed = time.time() - t0
    bound = 10.0 * CFG.fp_tol
    ok = all(v <= bound for v in worst.values()) and elapsed < 5.0
    _report(9, "time symmetry of symmetric methods", ok,
            ", ".join(f"{m}={v:.1e}" for m, v in worst.items())
            + f"; {elapsed:.1f}s")
