"""Discrete gradients: defining secant identity, consistency, hand values,
skew approximations."""

import numpy as np
import pytest

from drg import (CriticalPointError, Euclidean, Oscillator, SpinChain,
                 SpinningTop, make_drg, omega_bar, omega_from_field,
                 riemannian_gradient, secant_residual)
from drg.gradients import (drg_avf, drg_itoh_abe, drg_midpoint,
                           drg_mmp_spin_chain, drg_symmetrized_ia)

TOP = SpinningTop(inertia=(1.0, 2.0, 4.0))
CHAIN = SpinChain(d=5)
OSC = Oscillator()


def random_pair(m, rng, scale=0.25):
    u = m.random_point(rng)
    return u, m.retract(u, m.random_tangent(rng, u, scale))


def test_riemannian_gradient():
    assert np.array_equal(
        riemannian_gradient(TOP, np.array([1.0, 0.0, 0.0])), np.zeros(3))
    rng = np.random.default_rng(30)
    for _ in range(50):
        s = TOP.manifold.random_point(rng)
        assert abs(np.dot(s, riemannian_gradient(TOP, s))) <= 1e-15


def test_omega_from_field_oscillator():
    u = np.array([1.0, 0.0])
    # on grad H the generic skew operator reproduces the field
    assert np.allclose(omega_from_field(OSC, u, np.array([1.0, 0.0])),
                       [0.0, 1.0], atol=1e-15)
    assert np.allclose(omega_from_field(OSC, u, np.array([0.0, 1.0])),
                       [-1.0, 0.0], atol=1e-15)
    with pytest.raises(CriticalPointError):
        omega_from_field(OSC, np.zeros(2), np.array([1.0, 0.0]))


def test_omega_from_field_reproduces_field():
    rng = np.random.default_rng(31)
    for prob in (TOP, CHAIN):
        for _ in range(30):
            u = prob.manifold.random_point(rng)
            gr = riemannian_gradient(prob, u)
            if np.dot(gr, gr) < 1e-8:
                continue
            assert np.max(np.abs(omega_from_field(prob, u, gr)
                                 - prob.field(u))) <= 1e-11
            y = prob.manifold.random_tangent(rng, u)
            assert abs(np.dot(y, omega_from_field(prob, u, y))) <= 1e-12


def test_consistency_at_equal_arguments():
    rng = np.random.default_rng(32)
    for prob, kinds in ((TOP, ("avf", "mp", "ia", "sia")),
                        (CHAIN, ("avf", "mp", "ia", "sia", "mmp"))):
        m = prob.manifold
        for kind in kinds:
            drg = make_drg(kind)
            for _ in range(20):
                u = m.random_point(rng)
                got = drg(prob, u, u, u)
                assert np.max(np.abs(got - riemannian_gradient(prob, u))) \
                    <= 1e-10


def test_secant_identity_random_pairs():
    rng = np.random.default_rng(33)
    for prob, kinds in ((TOP, ("avf", "mp", "ia", "sia")),
                        (CHAIN, ("avf", "mp", "ia", "sia", "mmp"))):
        for kind in kinds:
            drg = make_drg(kind)
            tol = 1e-10 if kind == "avf" else 1e-12
            for _ in range(40):
                u, v = random_pair(prob.manifold, rng)
                bound = tol * (1.0 + abs(prob.hamiltonian(u)))
                assert secant_residual(prob, drg, u, v) <= bound


def test_secant_identity_any_center():
    # the identity holds for any center point, not just the scheme's own
    rng = np.random.default_rng(34)
    m = TOP.manifold
    for _ in range(10):
        u, v = random_pair(m, rng, scale=0.15)
        c = m.retract(u, m.random_tangent(rng, u, 0.05))
        eta = m.inverse_retract(c, v) - m.inverse_retract(c, u)
        for fn in (drg_midpoint, drg_itoh_abe, drg_symmetrized_ia):
            lhs = TOP.hamiltonian_difference(v, u)
            assert abs(lhs - np.dot(fn(TOP, c, u, v), eta)) <= 1e-13


def test_euclidean_hand_values():
    u = np.zeros(2)
    v = np.ones(2)
    c = 0.5 * (u + v)
    # AVF and MP reduce to (u + v)/2 for the quadratic energy
    for nq in (1, 4, 16):
        assert np.allclose(drg_avf(OSC, c, u, v, nq=nq), [0.5, 0.5],
                           atol=1e-15)
    assert np.allclose(drg_midpoint(OSC, c, u, v), [0.5, 0.5], atol=1e-15)
    # IA walks the coordinate directions: w1=(1,0) gives a=(0.5, 0.5)
    assert np.allclose(drg_itoh_abe(OSC, u, u, v), [0.5, 0.5], atol=1e-15)
    assert np.allclose(drg_symmetrized_ia(OSC, c, u, v), [0.5, 0.5],
                       atol=1e-15)


def test_avf_quadrature_convergence():
    # doubling nq from 8 to 16 must cut the secant residual by >= 1e2
    rng = np.random.default_rng(35)
    worst8 = worst16 = 0.0
    for _ in range(50):
        u, v = random_pair(TOP.manifold, rng, scale=0.4)
        worst8 = max(worst8, secant_residual(TOP, make_drg("avf", nq=8),
                                             u, v))
        worst16 = max(worst16, secant_residual(TOP, make_drg("avf", nq=16),
                                               u, v))
    assert worst8 >= 1e2 * worst16


def test_sia_symmetry_bit_identical():
    rng = np.random.default_rng(36)
    for prob in (TOP, CHAIN):
        m = prob.manifold
        for _ in range(20):
            u, v = random_pair(m, rng)
            c = m.chordal_center(u, v)
            assert np.array_equal(drg_symmetrized_ia(prob, c, u, v),
                                  drg_symmetrized_ia(prob, c, v, u))


def test_ia_zero_increment_branch():
    # v chosen so the increment along the first basis vector vanishes
    m = TOP.manifold
    c = np.array([0.0, 0.0, 1.0])
    e2 = m.basis(c)[1]
    u = c.copy()
    v = m.retract(c, 0.3 * e2)
    out = drg_itoh_abe(TOP, c, u, v)
    eta = m.inverse_retract(c, v) - m.inverse_retract(c, u)
    assert abs(TOP.hamiltonian_difference(v, u) - np.dot(out, eta)) <= 1e-13


def test_mmp_degenerate_configuration():
    up = np.tile([0.0, 0.0, 1.0], 5)
    out = drg_mmp_spin_chain(CHAIN, up, up, up).reshape(5, 3)
    # all centers coincide: each block is the projected neighbor sum = 0
    assert np.max(np.abs(out)) <= 1e-15
    with pytest.raises(TypeError):
        drg_mmp_spin_chain(TOP, up, up, up)


def test_omega_bar():
    s = np.array([1.0, 0.0, 0.0])
    y = np.array([0.0, 1.0, 0.0])
    # hat operator: s x y
    assert np.allclose(omega_bar(TOP, "left", s, s, s, y), [0.0, 0.0, 1.0],
                       atol=1e-15)
    rng = np.random.default_rng(37)
    m = TOP.manifold
    for tag in ("left", "center", "pullback"):
        for _ in range(20):
            u, v = random_pair(m, rng)
            c = m.chordal_center(u, v)
            z = m.random_tangent(rng, c)
            out = omega_bar(TOP, tag, u, v, c, z)
            # consistency at u = v: agreement with Omega(u)
            same = omega_bar(TOP, tag, u, u, u, z)
            assert np.max(np.abs(same - m.project(u, TOP.omega_apply(u, z)))) \
                <= 1e-12
            # skewness of the centered and pullback variants
            if tag != "left":
                assert abs(np.dot(z, out)) <= 1e-12
    with pytest.raises(ValueError):
        omega_bar(TOP, "bogus", s, s, s, y)


def test_make_drg_validation():
    with pytest.raises(ValueError):
        make_drg("bogus")
    with pytest.raises(ValueError):
        make_drg("sia", center_tag="left")
    assert make_drg("ia").center == "left"
    assert make_drg("avf").center == "mid"
