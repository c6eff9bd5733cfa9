"""Manifolds, retractions, tangent maps and center functions.

Points and tangent vectors are plain numpy arrays holding ambient
coordinates; tangent vectors carry their base point implicitly through the
call signature of each operation.  All operations are pure and safe for
concurrent use.

Implemented manifolds: the d-fold product of unit two-spheres (d = 1 gives
the plain sphere, state vectors of length 3d) and flat Euclidean space.
The metric is the ambient dot product in both cases.
"""

from __future__ import annotations

import numpy as np

from .errors import AntipodalError, DomainError

Array = np.ndarray


def _as_state(u, ambient_dim) -> Array:
    u = np.asarray(u, dtype=float)
    if u.shape != (ambient_dim,):
        raise ValueError(f"expected shape ({ambient_dim},), got {u.shape}")
    return u


class Manifold:
    """Capability bundle: retraction, inverse, tangent maps and their
    metric transposes, tangent projection, orthonormal basis, distance."""

    dim: int
    ambient_dim: int

    # --- metric ---------------------------------------------------------
    def metric(self, x: Array, y: Array) -> float:
        """Riemannian inner product of two tangent vectors at a common base.

        All manifolds here inherit the ambient dot product."""
        return float(np.dot(x, y))

    def norm(self, x: Array) -> float:
        return float(np.linalg.norm(x))

    # --- to be provided by subclasses -----------------------------------
    def retract(self, p: Array, x: Array) -> Array:
        raise NotImplementedError

    def inverse_retract(self, p: Array, u: Array) -> Array:
        raise NotImplementedError

    def tangent_map(self, p: Array, x: Array, v: Array) -> Array:
        raise NotImplementedError

    def tangent_map_transpose(self, p: Array, x: Array, a: Array) -> Array:
        raise NotImplementedError

    def inverse_tangent_map(self, p: Array, u: Array, w: Array) -> Array:
        raise NotImplementedError

    def inverse_tangent_map_transpose(self, p: Array, u: Array, a: Array) -> Array:
        raise NotImplementedError

    def project(self, p: Array, v: Array) -> Array:
        raise NotImplementedError

    def basis(self, p: Array) -> list[Array]:
        raise NotImplementedError

    def distance(self, u: Array, v: Array) -> float:
        raise NotImplementedError

    def chordal_center(self, u: Array, v: Array) -> Array:
        raise NotImplementedError

    def on_manifold(self, u: Array, tol: float = 1e-12) -> bool:
        raise NotImplementedError

    def random_point(self, rng: np.random.Generator) -> Array:
        raise NotImplementedError

    def random_tangent(self, rng: np.random.Generator, p: Array,
                       scale: float = 1.0) -> Array:
        raise NotImplementedError

    # --- batched variants (rows of X/A are tangents at p, rows of P are
    # base points); subclasses override with vectorized versions ----------
    def retract_many(self, p: Array, X: Array) -> Array:
        return np.stack([self.retract(p, x) for x in X])

    def project_many(self, P: Array, V: Array) -> Array:
        return np.stack([self.project(p, v) for p, v in zip(P, V)])

    def tangent_map_transpose_many(self, p: Array, X: Array, A: Array) -> Array:
        return np.stack([self.tangent_map_transpose(p, x, a)
                         for x, a in zip(X, A)])

    def inverse_tangent_map_many(self, p: Array, U: Array, W: Array) -> Array:
        return np.stack([self.inverse_tangent_map(p, u, w)
                         for u, w in zip(U, W)])

    def inverse_tangent_map_transpose_many(self, p: Array, U: Array,
                                           A: Array) -> Array:
        return np.stack([self.inverse_tangent_map_transpose(p, u, a)
                         for u, a in zip(U, A)])


class SphereProduct(Manifold):
    """(S^2)^d with the round (ambient-restricted) metric and the
    normalized-chord retraction

        phi_p(x) = (p + x) / ||p + x||      (blockwise for d > 1),
        phi_p^{-1}(u) = u / (p.T u) - p,    valid while p.T u > 0.
    """

    def __init__(self, d: int = 1):
        if d < 1:
            raise ValueError("d must be >= 1")
        self.d = d
        self.dim = 2 * d
        self.ambient_dim = 3 * d

    def _blocks(self, u: Array) -> Array:
        return _as_state(u, self.ambient_dim).reshape(self.d, 3)

    # --- retraction ------------------------------------------------------
    def retract(self, p: Array, x: Array) -> Array:
        q = self._blocks(p) + self._blocks(x)
        n = np.linalg.norm(q, axis=1, keepdims=True)
        if np.any(n <= 0.0):
            raise DomainError("p + x vanishes in a block")
        return (q / n).ravel()

    def inverse_retract(self, p: Array, u: Array) -> Array:
        pb, ub = self._blocks(p), self._blocks(u)
        dots = np.sum(pb * ub, axis=1, keepdims=True)
        if np.any(dots <= 0.0):
            raise DomainError("p.T u <= 0: point outside the chart of p")
        return (ub / dots - pb).ravel()

    # --- tangent maps ----------------------------------------------------
    def tangent_map(self, p: Array, x: Array, v: Array) -> Array:
        q = self._blocks(p) + self._blocks(x)
        n2 = np.sum(q * q, axis=1, keepdims=True)
        vb = self._blocks(v)
        w = (vb - q * (np.sum(q * vb, axis=1, keepdims=True) / n2))
        return (w / np.sqrt(n2)).ravel()

    def tangent_map_transpose(self, p: Array, x: Array, a: Array) -> Array:
        # Same symmetric ambient matrix as tangent_map, followed by the
        # projection onto T_p that makes it the metric adjoint
        # T_pM -> T_{phi_p(x)}M of the restricted operator.
        w = self._blocks(self.tangent_map(p, x, a))
        pb = self._blocks(p)
        w = w - pb * np.sum(pb * w, axis=1, keepdims=True)
        return w.ravel()

    def inverse_tangent_map(self, p: Array, u: Array, w: Array) -> Array:
        pb, ub, wb = self._blocks(p), self._blocks(u), self._blocks(w)
        dots = np.sum(pb * ub, axis=1, keepdims=True)
        if np.any(dots <= 0.0):
            raise DomainError("p.T u <= 0: point outside the chart of p")
        out = (wb - ub * (np.sum(pb * wb, axis=1, keepdims=True) / dots)) / dots
        return out.ravel()

    def inverse_tangent_map_transpose(self, p: Array, u: Array, a: Array) -> Array:
        pb, ub, ab = self._blocks(p), self._blocks(u), self._blocks(a)
        dots = np.sum(pb * ub, axis=1, keepdims=True)
        if np.any(dots <= 0.0):
            raise DomainError("p.T u <= 0: point outside the chart of p")
        w = (ab - pb * (np.sum(ub * ab, axis=1, keepdims=True) / dots)) / dots
        w = w - ub * np.sum(ub * w, axis=1, keepdims=True)
        return w.ravel()

    def project(self, p: Array, v: Array) -> Array:
        pb, vb = self._blocks(p), self._blocks(v)
        return (vb - pb * np.sum(pb * vb, axis=1, keepdims=True)).ravel()

    # --- basis, distance, centers ---------------------------------------
    def basis(self, p: Array) -> list[Array]:
        """Deterministic orthonormal basis of T_p, block-diagonal for
        products (block-major order).

        Per block: project the coordinate axis following the
        largest-magnitude component of p onto the tangent plane and
        normalize (E_1), then complete with E_2 = p x E_1.  Unlike a basis
        read off an SVD of the tangent projector, whose degenerate
        singular vectors rotate arbitrarily under last-bit perturbations
        of p, this frame is locally smooth in p; the implicit solvers
        recompute the basis at a moving center every sweep and need that
        continuity to converge below ~1e-12.
        """
        frame = self.block_frame(p)
        out = []
        for i in range(self.d):
            for e in frame[i]:
                full = np.zeros(self.ambient_dim)
                full[3 * i:3 * i + 3] = e
                out.append(full)
        return out

    def block_frame(self, p: Array) -> Array:
        """The same frame as `basis`, packed as an array of shape
        (d, 2, 3): frame[i, j] is the j-th tangent vector of block i."""
        pb = self._blocks(p)
        rows = np.arange(self.d)
        k = (np.argmax(np.abs(pb), axis=1) + 1) % 3
        e1 = -pb[rows, k, None] * pb
        e1[rows, k] += 1.0
        e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
        return np.stack([e1, np.cross(pb, e1)], axis=1)

    def distance(self, u: Array, v: Array) -> float:
        ub, vb = self._blocks(u), self._blocks(v)
        dots = np.clip(np.sum(ub * vb, axis=1), -1.0, 1.0)
        return float(np.sqrt(np.sum(np.arccos(dots) ** 2)))

    def chordal_center(self, u: Array, v: Array) -> Array:
        if u is v or np.array_equal(u, v):
            return np.asarray(u, dtype=float).copy()
        q = self._blocks(u) + self._blocks(v)
        n = np.linalg.norm(q, axis=1, keepdims=True)
        if np.any(n <= 1e-12):
            raise AntipodalError("u + v vanishes in a block")
        return (q / n).ravel()

    def on_manifold(self, u: Array, tol: float = 1e-12) -> bool:
        n = np.linalg.norm(self._blocks(u), axis=1)
        return bool(np.all(np.abs(n - 1.0) <= tol))

    def random_point(self, rng: np.random.Generator) -> Array:
        q = rng.standard_normal((self.d, 3))
        return (q / np.linalg.norm(q, axis=1, keepdims=True)).ravel()

    def random_tangent(self, rng, p: Array, scale: float = 1.0) -> Array:
        v = self.project(p, rng.standard_normal(self.ambient_dim))
        return scale * v

    # --- batched variants -------------------------------------------------
    def _rows(self, X: Array) -> Array:
        X = np.asarray(X, dtype=float)
        return X.reshape(X.shape[0], self.d, 3)

    def retract_many(self, p: Array, X: Array) -> Array:
        q = self._blocks(p)[None, :, :] + self._rows(X)
        n = np.linalg.norm(q, axis=2, keepdims=True)
        if np.any(n <= 0.0):
            raise DomainError("p + x vanishes in a block")
        return (q / n).reshape(X.shape[0], self.ambient_dim)

    def project_many(self, P: Array, V: Array) -> Array:
        pb, vb = self._rows(P), self._rows(V)
        out = vb - pb * np.sum(pb * vb, axis=2, keepdims=True)
        return out.reshape(P.shape[0], self.ambient_dim)

    def tangent_map_transpose_many(self, p: Array, X: Array, A: Array) -> Array:
        pb = self._blocks(p)[None, :, :]
        q = pb + self._rows(X)
        n2 = np.sum(q * q, axis=2, keepdims=True)
        ab = self._rows(A)
        w = (ab - q * (np.sum(q * ab, axis=2, keepdims=True) / n2)) / np.sqrt(n2)
        w = w - pb * np.sum(pb * w, axis=2, keepdims=True)
        return w.reshape(X.shape[0], self.ambient_dim)

    def inverse_tangent_map_many(self, p: Array, U: Array, W: Array) -> Array:
        pb = self._blocks(p)[None, :, :]
        ub, wb = self._rows(U), self._rows(W)
        dots = np.sum(pb * ub, axis=2, keepdims=True)
        if np.any(dots <= 0.0):
            raise DomainError("p.T u <= 0: point outside the chart of p")
        out = (wb - ub * (np.sum(pb * wb, axis=2, keepdims=True) / dots)) / dots
        return out.reshape(U.shape[0], self.ambient_dim)

    def inverse_tangent_map_transpose_many(self, p: Array, U: Array,
                                           A: Array) -> Array:
        pb = self._blocks(p)[None, :, :]
        ub, ab = self._rows(U), self._rows(A)
        dots = np.sum(pb * ub, axis=2, keepdims=True)
        if np.any(dots <= 0.0):
            raise DomainError("p.T u <= 0: point outside the chart of p")
        w = (ab - pb * (np.sum(ub * ab, axis=2, keepdims=True) / dots)) / dots
        w = w - ub * np.sum(ub * w, axis=2, keepdims=True)
        return w.reshape(U.shape[0], self.ambient_dim)


class Euclidean(Manifold):
    """Flat R^n: the retraction is translation, all tangent maps are the
    identity, the chordal center is the arithmetic midpoint."""

    def __init__(self, n: int):
        self.dim = n
        self.ambient_dim = n

    def retract(self, p, x):
        return _as_state(p, self.ambient_dim) + _as_state(x, self.ambient_dim)

    def inverse_retract(self, p, u):
        return _as_state(u, self.ambient_dim) - _as_state(p, self.ambient_dim)

    def tangent_map(self, p, x, v):
        return _as_state(v, self.ambient_dim).copy()

    def tangent_map_transpose(self, p, x, a):
        return _as_state(a, self.ambient_dim).copy()

    def inverse_tangent_map(self, p, u, w):
        return _as_state(w, self.ambient_dim).copy()

    def inverse_tangent_map_transpose(self, p, u, a):
        return _as_state(a, self.ambient_dim).copy()

    def project(self, p, v):
        return _as_state(v, self.ambient_dim).copy()

    def basis(self, p):
        return [e.copy() for e in np.eye(self.ambient_dim)]

    def distance(self, u, v):
        return float(np.linalg.norm(np.asarray(u) - np.asarray(v)))

    def chordal_center(self, u, v):
        return 0.5 * (np.asarray(u, dtype=float) + np.asarray(v, dtype=float))

    def on_manifold(self, u, tol=1e-12):
        return np.asarray(u).shape == (self.ambient_dim,)

    def random_point(self, rng):
        return rng.standard_normal(self.ambient_dim)

    def random_tangent(self, rng, p, scale=1.0):
        return scale * rng.standard_normal(self.ambient_dim)

    def retract_many(self, p, X):
        return np.asarray(p, dtype=float)[None, :] + np.asarray(X, dtype=float)

    def project_many(self, P, V):
        return np.asarray(V, dtype=float).copy()

    def tangent_map_transpose_many(self, p, X, A):
        return np.asarray(A, dtype=float).copy()

    def inverse_tangent_map_many(self, p, U, W):
        return np.asarray(W, dtype=float).copy()

    def inverse_tangent_map_transpose_many(self, p, U, A):
        return np.asarray(A, dtype=float).copy()


CENTER_TAGS = ("left", "mid")


def center(tag: str, m: Manifold, u: Array, v: Array) -> Array:
    """Center function c(u, v): 'left' returns u, 'mid' the chordal
    midpoint (arithmetic midpoint on Euclidean space).  c(u, u) = u holds
    exactly for both, and 'mid' is symmetric bit-for-bit."""
    if tag == "left":
        return np.asarray(u, dtype=float)
    if tag == "mid":
        return m.chordal_center(u, v)
    raise ValueError(f"unknown center tag {tag!r}; expected one of {CENTER_TAGS}")
