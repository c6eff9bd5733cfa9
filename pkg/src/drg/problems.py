"""Benchmark systems: perturbed spinning top on S^2, Heisenberg spin chain
on (S^2)^d, and a flat harmonic oscillator for the Euclidean reduction
tests.

Each problem supplies the energy H, its ambient gradient, the ODE right
hand side F, and the action of the skew operator Omega(p) writing
F = Omega grad H.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Euclidean, Manifold, SphereProduct

Array = np.ndarray


class Problem:
    """Interface shared by all benchmark systems."""

    manifold: Manifold

    def hamiltonian(self, u: Array) -> float:
        raise NotImplementedError

    def grad_ambient(self, u: Array) -> Array:
        """Gradient of the energy in ambient coordinates (unprojected)."""
        raise NotImplementedError

    def field(self, u: Array) -> Array:
        """ODE right hand side, tangent at u."""
        raise NotImplementedError

    def omega_apply(self, p: Array, y: Array) -> Array:
        """Action of the skew operator Omega(p) on an ambient vector y."""
        raise NotImplementedError

    def riemannian_gradient(self, u: Array) -> Array:
        """Tangent projection of the ambient energy gradient."""
        return self.manifold.project(u, self.grad_ambient(u))

    def hamiltonian_difference(self, a: Array, b: Array) -> float:
        """H(a) - H(b).

        Subclasses override this with algebraically factored forms: the
        discrete gradients divide such differences by coordinate
        increments, and the naive subtraction would amplify round-off by
        1/increment."""
        return self.hamiltonian(a) - self.hamiltonian(b)

    def grad_ambient_many(self, U: Array) -> Array:
        """Ambient gradient evaluated at each row of U."""
        return np.stack([self.grad_ambient(u) for u in U])

    def omega_apply_many(self, P: Array, Y: Array) -> Array:
        """Skew action Omega(p_i) y_i for each row pair."""
        return np.stack([self.omega_apply(p, y) for p, y in zip(P, Y)])

    def block_difference(self, w: Array, k: int, dw: Array) -> float:
        """H(w with block k moved by dw) - H(w), for problems on a product
        manifold whose state w is given as a (d, 3) array.

        The caller passes the increment dw (not the new block) so that the
        difference can be evaluated without ever subtracting two nearby
        states: the coordinatewise discrete gradients divide this value by
        increments as small as 1e-12, where re-deriving dw from the states
        would leave only noise.  Only problems on sphere products
        implement this."""
        raise NotImplementedError

    def block_gradient(self, w: Array, k: int) -> Array:
        """Gradient of H with respect to block k of the (d, 3) state w."""
        raise NotImplementedError


@dataclass
class SpinningTop(Problem):
    """Single spin with H(s) = 1/2 (I^{-1} s)^T (s + 2/3 s^2), where s^2 is
    the componentwise square; ds/dt = s x grad H(s)."""

    inertia: tuple[float, float, float] = (1.0, 2.0, 4.0)

    def __post_init__(self):
        inv = np.asarray(self.inertia, dtype=float)
        if inv.shape != (3,) or np.any(inv <= 0):
            raise ValueError("inertia must be three positive reals")
        self._inv_inertia = 1.0 / inv
        self.manifold = SphereProduct(1)

    def hamiltonian(self, s: Array) -> float:
        return float(0.5 * np.dot(self._inv_inertia * s, s + (2.0 / 3.0) * s * s))

    def grad_ambient(self, s: Array) -> Array:
        return self._inv_inertia * (s + s * s)

    def field(self, s: Array) -> Array:
        return np.cross(s, self.grad_ambient(s))

    def omega_apply(self, p: Array, y: Array) -> Array:
        return np.cross(p, y)

    def hamiltonian_difference(self, a: Array, b: Array) -> float:
        # 1/2 sum I_i^{-1} [(a-b)(a+b) + 2/3 (a-b)(a^2+ab+b^2)], factored
        # so the result is accurate relative to |a - b|
        d = a - b
        quad = a + b
        cub = a * a + a * b + b * b
        return float(0.5 * np.dot(self._inv_inertia * d, quad + (2.0 / 3.0) * cub))

    def grad_ambient_many(self, U: Array) -> Array:
        U = np.asarray(U, dtype=float)
        return self._inv_inertia * (U + U * U)

    def omega_apply_many(self, P: Array, Y: Array) -> Array:
        return np.cross(np.asarray(P, dtype=float), np.asarray(Y, dtype=float))

    def block_difference(self, w: Array, k: int, dw: Array) -> float:
        s = w[k]
        t = s + dw
        # same factoring as hamiltonian_difference with a-b given exactly
        return float(0.5 * np.dot(self._inv_inertia * dw,
                                  (s + t) + (2.0 / 3.0) * (s * s + s * t
                                                           + t * t)))

    def block_gradient(self, w: Array, k: int) -> Array:
        return self.grad_ambient(w[k])


@dataclass
class SpinChain(Problem):
    """Heisenberg chain of d unit spins, H(s) = sum_i s_i . s_{i-1} with
    periodic indexing; block i of the field is s_i x (s_{i-1} + s_{i+1})."""

    d: int = 5

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("chain needs d >= 2 spins")
        self.manifold = SphereProduct(self.d)
        idx = np.arange(self.d)
        self._prev = (idx - 1) % self.d
        self._next = (idx + 1) % self.d

    def _blocks(self, s: Array) -> Array:
        return np.asarray(s, dtype=float).reshape(self.d, 3)

    def hamiltonian(self, s: Array) -> float:
        b = self._blocks(s)
        return float(np.sum(b * b[self._prev]))

    def grad_ambient(self, s: Array) -> Array:
        b = self._blocks(s)
        return (b[self._prev] + b[self._next]).ravel()

    def field(self, s: Array) -> Array:
        b = self._blocks(s)
        return np.cross(b, b[self._prev] + b[self._next]).ravel()

    def omega_apply(self, p: Array, y: Array) -> Array:
        pb = self._blocks(p)
        return np.cross(pb, self._blocks(y)).ravel()

    def hamiltonian_difference(self, a: Array, b: Array) -> float:
        ab, bb = self._blocks(a), self._blocks(b)
        ar, br = ab[self._prev], bb[self._prev]
        # a_i.a_{i-1} - b_i.b_{i-1} split symmetrically into increments
        return float(0.5 * (np.sum((ab - bb) * (ar + br))
                            + np.sum((ar - br) * (ab + bb))))

    def grad_ambient_many(self, U: Array) -> Array:
        B = np.asarray(U, dtype=float).reshape(U.shape[0], self.d, 3)
        return (B[:, self._prev] + B[:, self._next]).reshape(U.shape)

    def omega_apply_many(self, P: Array, Y: Array) -> Array:
        PB = np.asarray(P, dtype=float).reshape(P.shape[0], self.d, 3)
        YB = np.asarray(Y, dtype=float).reshape(P.shape[0], self.d, 3)
        return np.cross(PB, YB).reshape(P.shape)

    def block_difference(self, w: Array, k: int, dw: Array) -> float:
        # H depends on block k only through its two neighbor couplings
        return float(np.dot(dw, w[self._prev[k]] + w[self._next[k]]))

    def block_gradient(self, w: Array, k: int) -> Array:
        return w[self._prev[k]] + w[self._next[k]]


@dataclass
class ExactChainSolution:
    """Travelling-wave solution of the spin chain,

        s_j(t) = (a cos th_j(t) + at sin th_j(t)) cos(phi) + ab sin(phi),
        th_j(t) = j p - 2 (1 - cos p) sin(phi) t.

    The printed source formula omits the factor t in the phase; it is
    restored here and validated by a finite-difference residual test
    against the chain field.
    """

    phi_angle: float
    p_wavenumber: float
    a: Array
    a_tilde: Array
    a_bar: Array = field(default=None)

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.a_tilde = np.asarray(self.a_tilde, dtype=float)
        if self.a_bar is None:
            self.a_bar = np.cross(self.a, self.a_tilde)
        else:
            self.a_bar = np.asarray(self.a_bar, dtype=float)
        for x, y in ((self.a, self.a_tilde), (self.a, self.a_bar),
                     (self.a_tilde, self.a_bar)):
            if abs(np.dot(x, y)) > 1e-12:
                raise ValueError("frame vectors must be orthogonal")
        for x in (self.a, self.a_tilde, self.a_bar):
            if abs(np.linalg.norm(x) - 1.0) > 1e-12:
                raise ValueError("frame vectors must have unit norm")

    def __call__(self, chain: SpinChain, t: float) -> Array:
        j = np.arange(1, chain.d + 1)
        theta = (j * self.p_wavenumber
                 - 2.0 * (1.0 - np.cos(self.p_wavenumber))
                 * np.sin(self.phi_angle) * t)
        blocks = (np.outer(np.cos(theta), self.a)
                  + np.outer(np.sin(theta), self.a_tilde)) * np.cos(self.phi_angle)
        blocks = blocks + np.sin(self.phi_angle) * self.a_bar
        return blocks.ravel()


class Oscillator(Problem):
    """Flat-space test bed: H = ||u||^2 / 2 on R^2, F(u) = (-u2, u1),
    i.e. rotation; Omega is the constant skew matrix [[0,-1],[1,0]]."""

    def __init__(self):
        self.manifold = Euclidean(2)
        self._J = np.array([[0.0, -1.0], [1.0, 0.0]])

    def hamiltonian(self, u: Array) -> float:
        return float(0.5 * np.dot(u, u))

    def grad_ambient(self, u: Array) -> Array:
        return np.asarray(u, dtype=float).copy()

    def field(self, u: Array) -> Array:
        return self._J @ np.asarray(u, dtype=float)

    def omega_apply(self, p: Array, y: Array) -> Array:
        return self._J @ np.asarray(y, dtype=float)

    def hamiltonian_difference(self, a: Array, b: Array) -> float:
        return float(0.5 * np.dot(a - b, a + b))

    def exact(self, u0: Array, t: float) -> Array:
        c, s = np.cos(t), np.sin(t)
        rot = np.array([[c, -s], [s, c]])
        return rot @ np.asarray(u0, dtype=float)


def benchmark_initial_conditions() -> dict:
    """The two canonical experiment setups used throughout the benchmarks."""
    a = np.array([1.0, 2.0, -1.0]) / np.sqrt(6.0)
    a_tilde = np.array([2.0, 1.0, 4.0]) / np.sqrt(21.0)
    chain = SpinChain(d=5)
    sol = ExactChainSolution(phi_angle=np.pi / 3.0,
                             p_wavenumber=2.0 * np.pi / 5.0,
                             a=a, a_tilde=a_tilde)
    return {
        "top": {
            "problem": SpinningTop(inertia=(1.0, 2.0, 4.0)),
            "initial": np.array([-1.0, -1.0, 1.0]) / np.sqrt(3.0),
        },
        "chain": {
            "problem": chain,
            "exact": sol,
            "initial": sol(chain, 0.0),
        },
    }
