"""One-step methods: the implicit DRG scheme, the energy-preserving
collocation-like scheme, adjoint and composition combinators, and the
implicit midpoint baseline.

All implicit solves are plain fixed-point iterations (the schemes are O(h)
perturbations of the identity); NonConvergence signals that the step size
is too large.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import NonConvergence
from .gradients import (DiscreteGradient, gauss_legendre_01, make_drg,
                        omega_bar)
from .problems import Problem

Array = np.ndarray


@dataclass(frozen=True)
class StepConfig:
    """Solver settings shared by all implicit steps."""

    fp_tol: float = 1e-14
    fp_max_iter: int = 200
    nq: int = 16
    # Divided-difference discrete gradients (IA/SIA) carry an intrinsic
    # evaluation noise of ~1e-16/alpha_j; when an increment alpha_j is
    # small along the trajectory the iteration bottoms out above fp_tol.
    # A solve that stalls at or below this floor is accepted at its best
    # iterate instead of raising NonConvergence.
    fp_stall_tol: float = 1e-11

    def __post_init__(self):
        if self.fp_tol <= 0 or self.fp_max_iter < 1 or self.nq < 1:
            raise ValueError("invalid solver settings")


DEFAULT_CONFIG = StepConfig()


# ---------------------------------------------------------------------------
# collocation tableau
# ---------------------------------------------------------------------------

def gauss_nodes(s: int) -> Array:
    """Roots of the degree-s Legendre polynomial shifted to [0, 1]."""
    if not 1 <= s <= 8:
        raise ValueError("stage count must be between 1 and 8")
    x, _ = np.polynomial.legendre.leggauss(s)
    return np.sort(0.5 * (x + 1.0))


def lagrange_weights(nodes) -> tuple[Array, "LagrangeIntegrals"]:
    """Quadrature weights b_j = int_0^1 l_j and the running integrals
    tau -> int_0^tau l_j of the Lagrange basis on the given nodes."""
    integ = LagrangeIntegrals(tuple(float(c) for c in nodes))
    return integ.b, integ


class LagrangeIntegrals:
    """Closed-form antiderivatives of the Lagrange basis polynomials."""

    def __init__(self, nodes: tuple[float, ...]):
        nodes_arr = np.asarray(nodes, dtype=float)
        s = nodes_arr.size
        if np.unique(nodes_arr).size != s:
            raise ValueError("collocation nodes must be distinct")
        self.nodes = nodes_arr
        self._anti = []
        for i in range(s):
            others = np.delete(nodes_arr, i)
            den = np.prod(nodes_arr[i] - others)
            poly = np.polynomial.Polynomial.fromroots(others) / den if s > 1 \
                else np.polynomial.Polynomial([1.0])
            self._anti.append(poly.integ())
        self.b = np.array([a(1.0) - a(0.0) for a in self._anti])
        if np.any(self.b == 0.0):
            raise ValueError("nodes give a vanishing quadrature weight")

    def __call__(self, tau: float) -> Array:
        """Vector of int_0^tau l_j(xi) dxi."""
        return np.array([a(tau) - a(0.0) for a in self._anti])

    def basis(self, xi: float) -> Array:
        """Vector of l_j(xi)."""
        return np.array([a.deriv()(xi) for a in self._anti])


@lru_cache(maxsize=None)
def _tableau(nodes: tuple[float, ...], nq: int):
    integ = LagrangeIntegrals(nodes)
    s = len(nodes)
    a_mat = np.array([integ(c) for c in nodes])          # (s, s)
    q_nodes, q_weights = gauss_legendre_01(nq)
    ell = np.array([integ.basis(x) for x in q_nodes])    # (nq, s)
    cum = np.array([integ(x) for x in q_nodes])          # (nq, s)
    return integ.b, a_mat, q_nodes, q_weights, ell, cum


# ---------------------------------------------------------------------------
# steps
# ---------------------------------------------------------------------------

def drg_step(problem: Problem, drg: DiscreteGradient, omega_tag: str,
             h: float, u: Array, cfg: StepConfig = DEFAULT_CONFIG,
             node: float = 0.5, swap: bool = False) -> tuple[Array, int]:
    """One step of the implicit DRG scheme,

        u1 = phi_c(phi_c^{-1}(u) + h Omega-bar gradbar H),  c = c(u, u1),

    solved by fixed-point iteration from u1 = u, the center recomputed
    every sweep.  With swap=True the roles of (u, u1) in the discrete
    gradient, the skew approximation and the center are exchanged, which
    realizes the adjoint method."""
    m = problem.manifold
    u = np.asarray(u, dtype=float)
    if h == 0.0:
        return u.copy(), 0
    v = u.copy()
    best_v, best_delta = None, np.inf
    for it in range(1, cfg.fp_max_iter + 1):
        a, b = (v, u) if swap else (u, v)
        c = drg.center_point(m, a, b)
        grad_bar = m.project(c, drg(problem, c, a, b))
        z = omega_bar(problem, omega_tag, a, b, c, grad_bar, node=node)
        w = m.inverse_retract(c, u) + h * m.project(c, z)
        v_new = m.retract(c, w)
        delta = float(np.max(np.abs(v_new - v)))
        v = v_new
        if delta <= cfg.fp_tol:
            return v, it
        if delta < best_delta:
            best_v, best_delta = v_new, delta
    if best_delta <= cfg.fp_stall_tol:
        return best_v, cfg.fp_max_iter
    raise NonConvergence(cfg.fp_max_iter, best_delta)


def collocation_step(problem: Problem, nodes, h: float, u0: Array,
                     cfg: StepConfig = DEFAULT_CONFIG) -> tuple[Array, int]:
    """One step of the collocation-like scheme with center frozen at u0.

    The degree-s polynomial sigma lives in T_{u0}M; the stage slopes
    f_j = T_{U_j} phi_c^{-1}(Omega_j grad_j H) are solved by fixed-point
    iteration from f = 0, with grad_j H evaluated by Gauss quadrature on
    its weighted pullback integral."""
    m = problem.manifold
    c = np.asarray(u0, dtype=float)
    if h == 0.0:
        return c.copy(), 0
    b, a_mat, q_nodes, q_weights, ell, cum = _tableau(
        tuple(float(x) for x in nodes), cfg.nq)
    s = len(b)
    f = np.zeros((s, m.ambient_dim))
    w_quad = (ell * q_weights[:, None]) / b[None, :]     # (nq, s)
    for it in range(1, cfg.fp_max_iter + 1):
        stage_x = h * (a_mat @ f)                        # sigma(c_j h)
        stage_pts = m.retract_many(c, stage_x)
        # shared quadrature sweep: pulled-back gradient at each xi node
        quad_x = h * (cum @ f)                           # sigma(xi_k h)
        pts = m.retract_many(c, quad_x)
        grads = m.project_many(pts, problem.grad_ambient_many(pts))
        pulled = m.tangent_map_transpose_many(c, quad_x, grads)
        g = w_quad.T @ pulled                            # (s, amb)
        # pull Omega at each stage point back to T_c, all stages at once
        a = m.inverse_tangent_map_transpose_many(c, stage_pts, g)
        z = m.project_many(stage_pts, problem.omega_apply_many(stage_pts, a))
        f_new = m.inverse_tangent_map_many(c, stage_pts, z)
        delta = float(np.max(np.abs(f_new - f)))
        f = f_new
        if delta <= cfg.fp_tol:
            return m.retract(c, h * (b @ f)), it
    raise NonConvergence(cfg.fp_max_iter, delta)


def implicit_midpoint_step(problem: Problem, h: float, u: Array,
                           cfg: StepConfig = DEFAULT_CONFIG) -> tuple[Array, int]:
    """Ambient implicit midpoint rule u1 = u + h F((u + u1)/2); preserves
    quadratic invariants (sphere norms) but not the energy."""
    u = np.asarray(u, dtype=float)
    if h == 0.0:
        return u.copy(), 0
    v = u.copy()
    for it in range(1, cfg.fp_max_iter + 1):
        v_new = u + h * problem.field(0.5 * (u + v))
        delta = float(np.max(np.abs(v_new - v)))
        v = v_new
        if delta <= cfg.fp_tol:
            return v, it
    raise NonConvergence(cfg.fp_max_iter, delta)


# ---------------------------------------------------------------------------
# composable one-step methods
# ---------------------------------------------------------------------------

class OneStepMethod:
    """A map (problem, point, step size) -> point."""

    def step(self, problem: Problem, u: Array, h: float,
             cfg: StepConfig = DEFAULT_CONFIG) -> tuple[Array, int]:
        raise NotImplementedError


@dataclass(frozen=True)
class DRGMethod(OneStepMethod):
    drg: DiscreteGradient
    omega: str = "center"
    node: float = 0.5

    def step(self, problem, u, h, cfg=DEFAULT_CONFIG):
        return drg_step(problem, self.drg, self.omega, h, u, cfg,
                        node=self.node)


@dataclass(frozen=True)
class AdjointMethod(OneStepMethod):
    """psi*_h = (psi_{-h})^{-1}, realized for DRG steps by exchanging the
    roles of the two step endpoints."""

    base: DRGMethod

    def step(self, problem, u, h, cfg=DEFAULT_CONFIG):
        return drg_step(problem, self.base.drg, self.base.omega, h, u, cfg,
                        node=self.base.node, swap=True)


@dataclass(frozen=True)
class CompositionMethod(OneStepMethod):
    """Sequential substeps with step sizes gamma_i h, first part applied
    first; the coefficients must sum to 1."""

    parts: tuple[tuple[OneStepMethod, float], ...]

    def __post_init__(self):
        total = sum(g for _, g in self.parts)
        if abs(total - 1.0) > 1e-14:
            raise ValueError("composition coefficients must sum to 1")

    def step(self, problem, u, h, cfg=DEFAULT_CONFIG):
        iters = 0
        for sub, gamma in self.parts:
            u, it = sub.step(problem, u, gamma * h, cfg)
            iters += it
        return u, iters


@dataclass(frozen=True)
class CollocationMethod(OneStepMethod):
    s: int

    def step(self, problem, u, h, cfg=DEFAULT_CONFIG):
        return collocation_step(problem, gauss_nodes(self.s), h, u, cfg)


class ImplicitMidpoint(OneStepMethod):
    def step(self, problem, u, h, cfg=DEFAULT_CONFIG):
        return implicit_midpoint_step(problem, h, u, cfg)


def adjoint_of(method: OneStepMethod) -> OneStepMethod:
    if isinstance(method, DRGMethod):
        return AdjointMethod(method)
    if isinstance(method, AdjointMethod):
        return method.base
    if isinstance(method, CompositionMethod):
        return CompositionMethod(tuple((adjoint_of(m), g)
                                       for m, g in reversed(method.parts)))
    raise TypeError("adjoint is only defined for DRG-based methods")


def compose(parts) -> CompositionMethod:
    return CompositionMethod(tuple(parts))


# triple-jump coefficients: symmetric substeps (g1, g2, g1) raising a
# symmetric order-2 method to order 4
TRIPLE_JUMP_G1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
TRIPLE_JUMP_G2 = -(2.0 ** (1.0 / 3.0)) / (2.0 - 2.0 ** (1.0 / 3.0))

# 3-stage order-2 composition of a first-order method psi with its adjoint:
# psi_{a h} psi*_{b h} psi_{a h} with 2 a^2 = b^2 and 2 a + b = 1, which
# cancels the leading error term
COMP2_A = 1.0 / (2.0 + np.sqrt(2.0))
COMP2_B = np.sqrt(2.0) / (2.0 + np.sqrt(2.0))


def make_method(method_id: str, nq: int = 16) -> OneStepMethod:
    """Preset one-step methods by id.

    DRG schemes: avf, mp, ia, sia, mmp (spin chain only).
    Compositions: ia2 (IA with its adjoint, order 2), comp2 (3-stage IA
    composition, order 2), compsia (triple jump of SIA, order 4), comp4
    (triple jump of ia2, order 4).  collN is the N-stage Gauss collocation
    scheme (order 2N); imp is the implicit midpoint baseline.
    """
    mid = dict(nq=nq)
    if method_id in ("avf", "mp", "sia", "mmp"):
        return DRGMethod(make_drg(method_id, "mid", **mid), omega="center")
    if method_id == "ia":
        return DRGMethod(make_drg("ia", "left", **mid), omega="left")
    ia = DRGMethod(make_drg("ia", "left", **mid), omega="left")
    ia_adj = AdjointMethod(ia)
    if method_id == "ia2":
        return compose([(ia_adj, 0.5), (ia, 0.5)])
    if method_id == "comp2":
        return compose([(ia, COMP2_A), (ia_adj, COMP2_B), (ia, COMP2_A)])
    if method_id == "compsia":
        sia = DRGMethod(make_drg("sia", "mid", **mid), omega="center")
        return compose([(sia, TRIPLE_JUMP_G1), (sia, TRIPLE_JUMP_G2),
                        (sia, TRIPLE_JUMP_G1)])
    if method_id == "comp4":
        ia2 = compose([(ia_adj, 0.5), (ia, 0.5)])
        return compose([(ia2, TRIPLE_JUMP_G1), (ia2, TRIPLE_JUMP_G2),
                        (ia2, TRIPLE_JUMP_G1)])
    if method_id.startswith("coll") and method_id[4:].isdigit():
        return CollocationMethod(int(method_id[4:]))
    if method_id == "imp":
        return ImplicitMidpoint()
    raise ValueError(f"unknown method id {method_id!r}; valid ids: "
                     f"{', '.join(METHOD_IDS)}")


METHOD_IDS = ("avf", "mp", "ia", "sia", "mmp", "ia2", "comp2", "compsia",
              "comp4", "coll1", "coll2", "coll3", "coll4", "imp")


# ---------------------------------------------------------------------------
# trajectory driver
# ---------------------------------------------------------------------------

@dataclass
class RunRecord:
    """Trajectory, invariant history, and solver effort of one run."""

    times: Array
    states: Array
    energies: Array
    iterations: Array
    failed: str | None = None

    @property
    def energy_errors(self) -> Array:
        return self.energies - self.energies[0]


def integrate(method: OneStepMethod, problem: Problem, h: float,
              t_end: float, u0: Array,
              cfg: StepConfig = DEFAULT_CONFIG) -> RunRecord:
    """Apply the method t_end / h times, recording states, energies and
    per-step solver iteration counts.  On a solver failure the record is
    truncated at the failing step and carries an error marker."""
    n = round(t_end / h) if h > 0 else 0
    if h > 0 and abs(n * h - t_end) > 1e-12 * max(1.0, abs(t_end)):
        raise ValueError("t_end must be an integer multiple of h")
    u = np.asarray(u0, dtype=float)
    times = [0.0]
    states = [u.copy()]
    energies = [problem.hamiltonian(u)]
    iters = []
    failed = None
    for k in range(n):
        try:
            u, it = method.step(problem, u, h, cfg)
        except Exception as exc:  # noqa: BLE001 - recorded, then reported
            failed = f"step {k + 1}: {exc}"
            break
        times.append((k + 1) * h)
        states.append(u.copy())
        energies.append(problem.hamiltonian(u))
        iters.append(it)
    return RunRecord(np.array(times), np.array(states), np.array(energies),
                     np.array(iters, dtype=int), failed)
