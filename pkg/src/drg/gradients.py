"""Riemannian gradients, skew operators, and the discrete Riemannian
gradients (AVF, midpoint, Itoh-Abe, symmetrized Itoh-Abe, and the modified
midpoint variant for the spin chain).

Every discrete gradient evaluates to a vector based at the center point
c(u, v) and satisfies the secant identity

    H(v) - H(u) = g(gradbar H(u, v), phi_c^{-1}(v) - phi_c^{-1}(u))

exactly up to round-off (AVF: up to quadrature error), together with the
consistency condition gradbar H(u, u) = grad H(u).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CriticalPointError
from .geometry import Manifold, SphereProduct, center
from .problems import Problem, SpinChain

Array = np.ndarray

DRG_KINDS = ("avf", "mp", "ia", "sia", "mmp")
OMEGA_TAGS = ("left", "center", "pullback")


@lru_cache(maxsize=None)
def gauss_legendre_01(n: int) -> tuple[Array, Array]:
    """Gauss-Legendre nodes and weights shifted to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def riemannian_gradient(problem: Problem, u: Array) -> Array:
    """Tangent projection of the ambient energy gradient at u."""
    return problem.manifold.project(u, problem.grad_ambient(u))


def omega_from_field(problem: Problem, u: Array, y: Array,
                     threshold: float = 1e-14) -> Array:
    """Generic skew operator writing the field through the gradient,

        Omega y = [g(grad H, y) F - g(F, y) grad H] / g(grad H, grad H),

    valid away from critical points of H."""
    gr = riemannian_gradient(problem, u)
    den = float(np.dot(gr, gr))
    if den <= threshold:
        raise CriticalPointError("grad H vanishes; Omega undefined here")
    f = problem.field(u)
    return (np.dot(gr, y) * f - np.dot(f, y) * gr) / den


# ---------------------------------------------------------------------------
# discrete Riemannian gradients; all take the precomputed center point c
# ---------------------------------------------------------------------------

def drg_avf(problem: Problem, c: Array, u: Array, v: Array, nq: int = 16) -> Array:
    """Average-vector-field DRG: Gauss-Legendre approximation with nq nodes
    of the integral of (T_gamma phi_c)^T grad H(phi_c(gamma)) along the
    straight segment gamma from phi_c^{-1}(u) to phi_c^{-1}(v)."""
    m = problem.manifold
    xu = m.inverse_retract(c, u)
    xv = m.inverse_retract(c, v)
    nodes, weights = gauss_legendre_01(nq)
    gamma = np.outer(1.0 - nodes, xu) + np.outer(nodes, xv)
    pts = m.retract_many(c, gamma)
    grads = m.project_many(pts, problem.grad_ambient_many(pts))
    return weights @ m.tangent_map_transpose_many(c, gamma, grads)


def drg_midpoint(problem: Problem, c: Array, u: Array, v: Array,
                 threshold: float = 1e-14) -> Array:
    """Midpoint (Gonzalez-type) DRG: grad H(c) plus the secant correction
    along eta = phi_c^{-1}(v) - phi_c^{-1}(u); falls back to grad H(c), the
    continuous limit, when eta degenerates."""
    m = problem.manifold
    gc = riemannian_gradient(problem, c)
    eta = m.inverse_retract(c, v) - m.inverse_retract(c, u)
    ee = float(np.dot(eta, eta))
    if ee <= threshold:
        return gc
    num = problem.hamiltonian_difference(v, u) - np.dot(gc, eta)
    return gc + (num / ee) * eta


def _itoh_abe_at(problem: Problem, c: Array, basis: list[Array],
                 u: Array, v: Array, zero_tol: float = 1e-12) -> Array:
    m = problem.manifold
    xu = m.inverse_retract(c, u)
    xv = m.inverse_retract(c, v)
    delta = xv - xu
    eta = xu
    w_prev = np.asarray(u, dtype=float)
    out = np.zeros(m.ambient_dim)
    for e in basis:
        alpha = float(np.dot(delta, e))
        if abs(alpha) > zero_tol:
            eta_next = eta + alpha * e
            w_next = m.retract(c, eta_next)
            a = problem.hamiltonian_difference(w_next, w_prev) / alpha
            eta, w_prev = eta_next, w_next
        else:
            # divided difference loses all digits; use the directional
            # derivative along the pushed-forward basis vector instead
            gr = riemannian_gradient(problem, w_prev)
            a = float(np.dot(gr, m.tangent_map(c, eta, e)))
        out += a * e
    return out


def _has_block_energy(problem: Problem) -> bool:
    return (isinstance(problem.manifold, SphereProduct)
            and type(problem).block_difference is not Problem.block_difference)


def _itoh_abe_blocks(problem: Problem, c: Array, frame: Array,
                     u: Array, v: Array, zero_tol: float = 1e-12) -> Array:
    """Block-local Itoh-Abe sweep on a sphere product: each basis vector
    lives in a single factor, so only that block of the intermediate state
    moves and only the per-block energy increment is evaluated.  Follows
    the same block-major ordering (and produces the same values up to
    round-off) as the generic `_itoh_abe_at`."""
    m = problem.manifold
    d = m.d
    cb = np.asarray(c, dtype=float).reshape(d, 3)
    xu = m.inverse_retract(c, u).reshape(d, 3)
    delta = m.inverse_retract(c, v).reshape(d, 3) - xu
    eta = xu.copy()
    w = np.asarray(u, dtype=float).reshape(d, 3).copy()
    out = np.zeros((d, 3))
    for k in range(d):
        ck = cb[k]
        for e in frame[k]:
            alpha = float(np.dot(delta[k], e))
            if abs(alpha) > zero_tol:
                # Update the block through its increment dw, with every term
                # proportional to alpha, so the divided difference below does
                # not lose precision to cancellation at small alpha.
                q1 = ck + eta[k]
                n1 = float(np.linalg.norm(q1))
                q2 = q1 + alpha * e
                n2 = float(np.linalg.norm(q2))
                dn = -(alpha * (2.0 * np.dot(q1, e) + alpha)) / (n1 + n2)
                dw = (alpha / n2) * e + (dn / (n1 * n2)) * q1
                a = problem.block_difference(w, k, dw) / alpha
                eta[k] += alpha * e
                w[k] += dw
            else:
                gk = problem.block_gradient(w, k)
                gk = gk - w[k] * np.dot(w[k], gk)
                q = ck + eta[k]
                n2 = float(np.dot(q, q))
                te = (e - q * (np.dot(q, e) / n2)) / np.sqrt(n2)
                a = float(np.dot(gk, te))
            out[k] += a * e
    return out.ravel()


def drg_itoh_abe(problem: Problem, c: Array, u: Array, v: Array) -> Array:
    """Itoh-Abe DRG: coordinatewise divided differences along the
    deterministic orthonormal basis of T_c."""
    if _has_block_energy(problem):
        return _itoh_abe_blocks(problem, c, problem.manifold.block_frame(c), u, v)
    return _itoh_abe_at(problem, c, problem.manifold.basis(c), u, v)


def drg_symmetrized_ia(problem: Problem, c: Array, u: Array, v: Array) -> Array:
    """Symmetrized Itoh-Abe DRG: mean of the two argument orderings, both
    evaluated at the same center with the same basis."""
    if _has_block_energy(problem):
        frame = problem.manifold.block_frame(c)
        return 0.5 * (_itoh_abe_blocks(problem, c, frame, u, v)
                      + _itoh_abe_blocks(problem, c, frame, v, u))
    basis = problem.manifold.basis(c)
    return 0.5 * (_itoh_abe_at(problem, c, basis, u, v)
                  + _itoh_abe_at(problem, c, basis, v, u))


def drg_mmp_spin_chain(chain: SpinChain, c: Array, u: Array, v: Array,
                       threshold: float = 1e-14) -> Array:
    """Modified midpoint DRG for the Heisenberg chain: per-block secant
    correction of c_{i-1} + c_{i+1} along eta_i = -2 phi_{c_i}^{-1}(s_i).

    The secant numerator telescopes over blocks to H(v) - H(u), so the
    defining identity holds to round-off with no quadrature."""
    if not isinstance(chain, SpinChain):
        raise TypeError("the modified midpoint DRG is specific to the spin chain")
    d = chain.d
    m = chain.manifold
    cb = np.asarray(c, dtype=float).reshape(d, 3)
    ub = np.asarray(u, dtype=float).reshape(d, 3)
    vb = np.asarray(v, dtype=float).reshape(d, 3)
    eta = (m.inverse_retract(c, v) - m.inverse_retract(c, u)).reshape(d, 3)
    out = np.empty((d, 3))
    for i in range(d):
        main = cb[i - 1] + cb[(i + 1) % d]
        ee = float(np.dot(eta[i], eta[i]))
        if ee <= threshold:
            out[i] = main - cb[i] * np.dot(cb[i], main)
            continue
        num = (0.5 * (np.dot(vb[i] - ub[i], vb[i - 1] + ub[i - 1])
                      + np.dot(vb[i - 1] - ub[i - 1], vb[i] + ub[i]))
               - np.dot(main, eta[i]))
        out[i] = main + (num / ee) * eta[i]
    return out.ravel()


# ---------------------------------------------------------------------------
# skew-operator approximations
# ---------------------------------------------------------------------------

def pullback_omega(problem: Problem, c: Array, w: Array, y: Array) -> Array:
    """Pull the skew action at the point w back to T_c:

        y -> T_w phi_c^{-1} ( Omega(w) (T_w phi_c^{-1})^T y ).

    Skew with respect to g by construction, and equal to Omega(c) when
    w = c."""
    m = problem.manifold
    a = m.inverse_tangent_map_transpose(c, w, y)
    b = m.project(w, problem.omega_apply(w, a))
    return m.inverse_tangent_map(c, w, b)


def omega_bar(problem: Problem, tag: str, u: Array, v: Array, c: Array,
              y: Array, node: float = 0.5) -> Array:
    """Two-point skew approximation Omega-bar(u, v) acting on y in T_c.

    Tags: 'left' uses Omega(u), 'center' Omega(c(u, v)); 'pullback'
    conjugates the exact Omega at the intermediate point
    phi_c((1 - node) phi_c^{-1}(u) + node phi_c^{-1}(v)) with the inverse
    tangent map, which reproduces the one-stage collocation scheme."""
    m = problem.manifold
    if tag == "left":
        return m.project(c, problem.omega_apply(u, y))
    if tag == "center":
        return m.project(c, problem.omega_apply(c, y))
    if tag == "pullback":
        xu = m.inverse_retract(c, u)
        xv = m.inverse_retract(c, v)
        w = m.retract(c, (1.0 - node) * xu + node * xv)
        return pullback_omega(problem, c, w, y)
    raise ValueError(f"unknown omega tag {tag!r}; expected one of {OMEGA_TAGS}")


# ---------------------------------------------------------------------------
# bundled discrete gradient with its center function
# ---------------------------------------------------------------------------

_DEFAULT_CENTER = {"avf": "mid", "mp": "mid", "ia": "left", "sia": "mid",
                   "mmp": "mid"}


@dataclass(frozen=True)
class DiscreteGradient:
    """A DRG kind together with its center function tag (and quadrature
    order, used by AVF only)."""

    kind: str
    center: str
    nq: int = 16

    def center_point(self, m: Manifold, u: Array, v: Array) -> Array:
        return center(self.center, m, u, v)

    def __call__(self, problem: Problem, c: Array, u: Array, v: Array) -> Array:
        if self.kind == "avf":
            return drg_avf(problem, c, u, v, nq=self.nq)
        if self.kind == "mp":
            return drg_midpoint(problem, c, u, v)
        if self.kind == "ia":
            return drg_itoh_abe(problem, c, u, v)
        if self.kind == "sia":
            return drg_symmetrized_ia(problem, c, u, v)
        if self.kind == "mmp":
            return drg_mmp_spin_chain(problem, c, u, v)
        raise ValueError(f"unknown DRG kind {self.kind!r}")


def make_drg(kind: str, center_tag: str | None = None, nq: int = 16) -> DiscreteGradient:
    if kind not in DRG_KINDS:
        raise ValueError(f"unknown DRG kind {kind!r}; expected one of {DRG_KINDS}")
    if kind == "sia" and center_tag == "left":
        raise ValueError("symmetrized Itoh-Abe requires a symmetric center")
    return DiscreteGradient(kind, center_tag or _DEFAULT_CENTER[kind], nq)


def secant_residual(problem: Problem, drg: DiscreteGradient,
                    u: Array, v: Array) -> float:
    """Residual of the defining identity H(v) - H(u) = g(gradbar, eta)."""
    m = problem.manifold
    c = drg.center_point(m, u, v)
    eta = m.inverse_retract(c, v) - m.inverse_retract(c, u)
    lhs = problem.hamiltonian_difference(v, u)
    return abs(lhs - float(np.dot(drg(problem, c, u, v), eta)))
