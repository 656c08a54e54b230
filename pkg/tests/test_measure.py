import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clark_rif import corpus
from clark_rif.measure import (
    SkippedFiberError,
    assemble_matrix_ball,
    assemble_polydisc,
    clark_rhs,
    disintegration_check,
    fiber_clark_measure,
    poisson_check,
    polydisc_fiber_reps,
)
from clark_rif.poly import MultiPoly, UniPoly
from clark_rif.rif import RationalInnerFn

z1 = MultiPoly.variable(0, 2)
z2 = MultiPoly.variable(1, 2)
one = MultiPoly.constant(1, 2)


def blaschke_z1(a):
    """(z1 - a) / (1 - conj(a) z1): phi(0) = -a, so the mass is not 1."""
    return RationalInnerFn.create(z1 - a, 1 - np.conj(a) * z1)


def weight_oracle(num, den, w):
    """1/|psi'(w)| for psi = num/den given as ascending coefficient lists, using numpy's polynomial class."""
    P = np.polynomial.Polynomial(num)
    Q = np.polynomial.Polynomial(den)
    d = (P.deriv()(w) * Q(w) - P(w) * Q.deriv()(w)) / Q(w) ** 2
    return 1 / abs(d)


# -- single fibers -----------------------------------------------------------------


@pytest.mark.parametrize("theta", [0.0, 1.3, 4.0])
def test_fiber_identity_factor(theta):
    rep = np.array([1, np.exp(1j * theta)])
    fm = fiber_clark_measure(corpus.coordinate(0), 1, rep)
    assert len(fm.atoms) == 1
    w, pt, wt = fm.atoms[0]
    assert w == pytest.approx(1) and wt == pytest.approx(1)
    assert np.allclose(pt, rep)


def test_fiber_product_two_atoms():
    fm = fiber_clark_measure(corpus.monomial((1, 1)), 1, [1, 1])
    assert sorted(np.round(fm.w.real, 12)) == [-1, 1]
    oracle = [weight_oracle([0, 0, 1], [1], w) for w in fm.w]
    assert np.allclose(fm.weights, oracle) and np.allclose(fm.weights, 0.5)


@pytest.mark.parametrize("name", ["rif11", "z1^2z2", "z1*blaschke(z2)"])
def test_neighbouring_fibers_have_close_integrals(name):
    # atom lists may reorder between fibers; integrals of a smooth f should not jump
    phi = corpus.named(name)

    def fiber_integral(theta):
        fm = fiber_clark_measure(phi, 1j, [1, np.exp(1j * theta)])
        return np.sum(fm.weights * np.abs(fm.points[:, 0] + fm.points[:, 1]) ** 2)

    theta = np.linspace(0.05, 2 * np.pi - 0.05, 60)
    for h in (1e-2, 1e-3):
        jumps = [abs(fiber_integral(t + h) - fiber_integral(t)) for t in theta]
        assert max(jumps) <= 50 * h


def test_fiber_i22_haar_sample(rng):
    phi = corpus.phi_i22()
    from clark_rif.rif import haar_unitaries

    for u in haar_unitaries(20, rng).reshape(20, 4):
        fm = fiber_clark_measure(phi, 1j, u)
        assert len(fm.atoms) <= 2
        assert np.all(fm.weights > 0)


def test_singular_fiber_is_deflated():
    # rif11 restricted to the fiber through (1, 1) is -w after cancelling (1 - w)
    fm = fiber_clark_measure(corpus.rif_11(), -1, [1, 1])
    assert not fm.skipped
    assert fm.w == pytest.approx([1]) and fm.weights == pytest.approx([1])
    fm = fiber_clark_measure(corpus.rif_11(), 1j, [1, 1])
    assert fm.w == pytest.approx([-1j]) and fm.weights == pytest.approx([1])


# -- assembled measures ------------------------------------------------------------


def test_assemble_identity_factor_grid64():
    mu = assemble_polydisc(corpus.coordinate(0), np.exp(0.9j), 64)
    assert len(mu.atom_w) == 64
    assert np.allclose(mu.atom_weights, 1)
    assert mu.total_mass() == pytest.approx(1, abs=1e-12)


def test_assemble_rif11_mass():
    mu = assemble_polydisc(corpus.rif_11(), 1, 512)
    assert abs(mu.total_mass() - 1) <= 1e-3


def test_assemble_product_minus_one():
    mu = assemble_polydisc(corpus.monomial((1, 1)), -1, 64)
    counts = np.bincount(mu.atom_fiber, minlength=64)
    assert np.all(counts == 2)
    assert np.allclose(mu.atom_weights, 0.5)
    assert mu.total_mass() == pytest.approx(1)


def test_quadrature_weights_sum_to_one():
    mu = assemble_polydisc(corpus.rif_11(), 1j, 128, jitter_seed=3)
    assert np.all(mu.fiber_weights > 0)
    assert abs(mu.fiber_weights.sum() - 1) <= 1e-12


def test_jitter_moves_grid_deterministically():
    a = polydisc_fiber_reps(2, 32, 0)
    b = polydisc_fiber_reps(2, 32, 0)
    c = polydisc_fiber_reps(2, 32, 1)
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)
    assert np.all(a[:, 0] == 1)


def test_grid_too_small_rejected():
    with pytest.raises(ValueError):
        assemble_polydisc(corpus.coordinate(0), 1, 8)


def test_matrix_ball_i22_mass():
    n = 10_000
    mu = assemble_matrix_ball(corpus.phi_i22(), np.exp(0.4j), n, seed=1)
    assert abs(mu.total_mass() - 1) <= 3 / np.sqrt(n)


def test_matrix_ball_det_fibers():
    mu = assemble_matrix_ball(corpus.det_2x2(), 1, 1000, seed=2)
    counts = np.bincount(mu.atom_fiber, minlength=1000)
    assert np.all(counts == 2)
    assert np.allclose(mu.atom_weights, 0.5)
    assert mu.total_mass() == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("n", [0, 999])
def test_matrix_ball_sample_floor(n):
    with pytest.raises(ValueError):
        assemble_matrix_ball(corpus.det_2x2(), 1, n)


def test_non_unimodular_alpha_rejected():
    with pytest.raises(ValueError):
        assemble_polydisc(corpus.coordinate(0), 0.5, 64)


# -- integration ----------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [1, 1j, np.exp(2.2j)])
def test_integrate_identity_factor(alpha):
    mu = assemble_polydisc(corpus.coordinate(0), alpha, 128)
    assert mu.integrate(lambda z: 1) == pytest.approx(1)
    assert mu.integrate(lambda z: z[:, 0]) == pytest.approx(alpha)
    assert abs(mu.integrate(lambda z: z[:, 1])) <= 1e-12


# -- identities -----------------------------------------------------------------------


def test_poisson_at_origin_identity_factor():
    mu = assemble_polydisc(corpus.coordinate(0), 1, 64)
    assert poisson_check(mu, corpus.coordinate(0), [0, 0]) == pytest.approx((1, 1))


@pytest.mark.parametrize("t", [0.1, 0.5, 0.8])
def test_poisson_closed_form_rhs(t):
    phi = corpus.coordinate(0)
    mu = assemble_polydisc(phi, 1, 512)
    lhs, rhs = poisson_check(mu, phi, [t, 0])
    assert rhs == pytest.approx((1 + t) / (1 - t))
    assert abs(lhs - rhs) <= 1e-4


def test_poisson_rif11_at_i():
    phi = corpus.rif_11()
    mu = assemble_polydisc(phi, 1j, 512)
    lhs, rhs = poisson_check(mu, phi, [0.3, -0.2j])
    assert abs(lhs - rhs) <= 1e-3 * (1 + rhs)


def test_poisson_rejects_points_near_boundary():
    mu = assemble_polydisc(corpus.coordinate(0), 1, 64)
    with pytest.raises(ValueError):
        poisson_check(mu, corpus.coordinate(0), [0.95, 0])


def test_poisson_matrix_ball_only_origin():
    mu = assemble_matrix_ball(corpus.det_2x2(), 1, 1000)
    assert poisson_check(mu, corpus.det_2x2(), np.zeros(4))[0] == pytest.approx(1)
    with pytest.raises(NotImplementedError):
        poisson_check(mu, corpus.det_2x2(), [0.1, 0, 0, 0])


@pytest.mark.parametrize("a", [0.5, 0.3 - 0.6j])
@pytest.mark.parametrize("alpha", [1, np.exp(1.1j)])
def test_mass_identity_with_nonzero_value_at_origin(a, alpha):
    phi = blaschke_z1(a)
    mu = assemble_polydisc(phi, alpha, 128)
    expected = (1 - abs(a) ** 2) / abs(alpha + a) ** 2
    assert clark_rhs(phi, alpha, [0, 0]) == pytest.approx(expected)
    assert mu.total_mass() == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("name", ["z1z2", "rif11", "z1^2z2", "z1*blaschke(z2)"])
@given(t=st.floats(0, 2 * np.pi))
def test_atoms_concentrate_on_level_set(name, t):
    phi = corpus.named(name)
    alpha = np.exp(1j * t)
    mu = assemble_polydisc(phi, alpha, 64, jitter_seed=7)
    h = phi.p(mu.points) - alpha * phi.q(mu.points)
    assert np.abs(h).max() <= 1e-6 * phi.scale
    counts = np.bincount(mu.atom_fiber, minlength=len(mu.reps))
    assert counts.max() <= phi.degree
    assert np.all(mu.atom_weights > 0)


def test_disintegration_examples():
    lhs, rhs = disintegration_check(corpus.rif_11(), lambda z: np.ones(len(z)), 16, 64)
    assert lhs == pytest.approx(1) and rhs == pytest.approx(1)
    lhs, rhs = disintegration_check(corpus.coordinate(0), lambda z: z[:, 0], 16, 64)
    assert abs(lhs) <= 1e-12 and abs(rhs) <= 1e-12
    lhs, rhs = disintegration_check(corpus.monomial((1, 1)), lambda z: np.abs(z[:, 0] + z[:, 1]) ** 2, 64, 512)
    assert rhs == pytest.approx(2, abs=1e-12)
    assert abs(lhs - 2) <= 1e-2


# -- structural invariants ------------------------------------------------------------


@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_rotation_covariance(tau, theta, t):
    phi = corpus.rif_11()
    rot = corpus.rotate_first(phi, tau)
    alpha = np.exp(1j * t)
    rep = np.array([1, np.exp(1j * theta)])
    a = fiber_clark_measure(rot, alpha, rep)
    b = fiber_clark_measure(phi, alpha, rep * np.array([np.exp(1j * tau), 1]))
    if a.skipped or b.skipped:
        return
    assert len(a.w) == len(b.w)
    pa = a.points.copy()
    pa[:, 0] *= np.exp(1j * tau)
    order_a = np.argsort(np.angle(a.w))
    order_b = np.argsort(np.angle(b.w))
    assert np.allclose(pa[order_a], b.points[order_b], atol=1e-9)
    assert np.allclose(a.weights[order_a], b.weights[order_b], rtol=1e-9)


@pytest.mark.parametrize("c", [2.5, -1j, 1e-3 * (1 + 1j)])
def test_scalar_invariance(c):
    phi = corpus.rif_11()
    a = assemble_polydisc(phi, 1j, 128)
    b = assemble_polydisc(phi.scaled(c), 1j, 128)
    assert np.allclose(a.atom_w, b.atom_w, atol=1e-12, rtol=0)
    assert np.allclose(a.atom_weights, b.atom_weights, atol=1e-12, rtol=0)


def test_worker_count_does_not_change_the_measure():
    phi = corpus.z1_blaschke_z2()
    a = assemble_polydisc(phi, np.exp(0.3j), 256, workers=1)
    b = assemble_polydisc(phi, np.exp(0.3j), 256, workers=3)
    assert np.array_equal(a.atom_w, b.atom_w)
    assert np.array_equal(a.atom_weights, b.atom_weights)


def test_too_many_skipped_fibers_abort():
    # the constant 1 (not a valid input) makes p - alpha q vanish on every fiber
    phi = RationalInnerFn(one, one)
    with pytest.raises(SkippedFiberError):
        assemble_polydisc(phi, 1, 32)


def test_measure_json_shape():
    mu = assemble_polydisc(corpus.monomial((1, 1)), 1, 16)
    obj = json.loads(json.dumps(mu.to_json()))
    assert set(obj) == {"alpha", "domain", "grid", "fibers", "metadata"}
    assert len(obj["fibers"]) == 16
    atom = obj["fibers"][0]["atoms"][0]
    assert set(atom) == {"w", "point", "weight"}
    assert obj["grid"]["grid_size"] == 16
    assert obj["metadata"]["skipped_fibers"] == 0


def test_unipoly_roundtrip_for_oracle():
    # the weight oracle and UniPoly agree on derivatives
    P = UniPoly([1, 2, 3])
    assert np.allclose(P.derivative().coeffs, np.polynomial.Polynomial([1, 2, 3]).deriv().coef)
