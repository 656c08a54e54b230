import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clark_rif.poly import (
    MultiPoly,
    PolynomialFormatError,
    UniPoly,
    evaluate,
    gradient,
    restrict_to_fiber,
    split_in_variable,
)

from .conftest import multipolys, torus_points

z1 = MultiPoly.variable(0, 2)
z2 = MultiPoly.variable(1, 2)


def naive_eval(p: MultiPoly, z):
    """Term-by-term summation, independent of the Horner scheme."""
    total = 0j
    for e, c in p.terms.items():
        term = c
        for zi, k in zip(z, e):
            term *= zi**k
        total += term
    return total


# -- evaluation ----------------------------------------------------------------


def test_eval_monomial_at_i():
    assert evaluate(z1 * z2, [1j, 1j]) == pytest.approx(-1)


def test_eval_symmetric_zero():
    assert evaluate(2 - z1 - z2, [1, 1]) == 0


def test_eval_hand_expansion():
    p = z1**2 * z2 + 3
    assert evaluate(p, [2, 1]) == pytest.approx(7)
    assert naive_eval(p, [2, 1]) == pytest.approx(7)


def test_eval_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(z1 * z2, [1, 2, 3])


def test_eval_vectorized_matches_pointwise(rng):
    p = z1**3 * z2 - 2j * z2**2 + 0.5
    pts = rng.normal(size=(20, 2)) + 1j * rng.normal(size=(20, 2))
    vals = evaluate(p, pts)
    assert vals.shape == (20,)
    for v, z in zip(vals, pts):
        assert v == pytest.approx(naive_eval(p, z), rel=1e-12)


@given(multipolys(), torus_points())
def test_eval_matches_naive(p, z):
    assert abs(evaluate(p, z) - naive_eval(p, z)) <= 1e-12 * (1 + p.coeff_norm())


# -- structure -------------------------------------------------------------------


def test_coefficient_floor_drops_dust():
    p = MultiPoly(2, {(1, 0): 1.0, (0, 1): 1e-15})
    assert list(p.terms) == [(1, 0)]
    assert (z1 - z1).is_zero()


def test_degree_of_zero_is_minus_infinity():
    assert MultiPoly(2, {}).degree == -np.inf
    assert (z1**2 * z2).degree == 3


def test_gradient_examples():
    g = gradient(z1 * z2)
    assert g[0].equals(z2) and g[1].equals(z1)
    c = gradient(MultiPoly.constant(5, 2))
    assert c[0].is_zero() and c[1].is_zero()
    g = gradient(z1**3)
    assert g[0].equals(3 * z1**2) and g[1].is_zero()


@given(multipolys(), torus_points())
def test_gradient_matches_complex_step(p, z):
    # p is holomorphic, so a real step h in z_j gives dp/dz_j by central differences
    h = 1e-5
    for j, dp in enumerate(gradient(p)):
        e = np.zeros(2, complex)
        e[j] = h
        fd = (evaluate(p, z + e) - evaluate(p, z - e)) / (2 * h)
        exact = evaluate(dp, z)
        assert abs(exact - fd) <= 1e-6 * (1 + abs(exact)) * (1 + p.coeff_norm())


def test_split_examples():
    p1, p2 = split_in_variable(2 - z1 - z2, 0)
    assert p1.equals(2 - z2) and p2.equals(MultiPoly.constant(-1, 2))
    p1, p2 = split_in_variable(z1 * z2, 0)
    assert p1.is_zero() and p2.equals(z2)
    p = z1**2 + z1 * z2 + z2**2
    p1, p2 = split_in_variable(p, 0)
    assert p1.equals(z2**2) and p2.equals(z1 + z2)
    assert (p1 + z1 * p2 - p).is_zero()


@given(multipolys(), st.integers(0, 1))
def test_split_reconstructs_exactly(p, j):
    p1, p2 = split_in_variable(p, j)
    zj = MultiPoly.variable(j, 2)
    assert all(e[j] == 0 for e in p1.terms)
    assert (p1 + zj * p2 - p).is_zero()


def test_restrict_examples():
    assert np.allclose(restrict_to_fiber(z1, [1, 0.3j]).coeffs, [0, 1])
    zeta2 = np.exp(0.4j)
    assert np.allclose(restrict_to_fiber(z1 * z2, [1, zeta2]).coeffs, [0, 0, zeta2])
    P = restrict_to_fiber(2 - z1 - z2, [1, -1])
    assert np.allclose(P.coeffs, [2])
    w = np.exp(1j * np.linspace(0, 6, 11))
    pts = w[:, None] * np.array([1, -1])
    assert np.allclose(P(w), evaluate(2 - z1 - z2, pts))


@given(multipolys(), torus_points(), st.floats(0, 2 * np.pi))
def test_restrict_commutes_with_eval(p, zeta, t):
    w = np.exp(1j * t)
    direct = evaluate(p, w * zeta)
    via = restrict_to_fiber(p, zeta)(w)
    assert abs(direct - via) <= 1e-12 * (1 + abs(direct) + p.coeff_norm())


# -- JSON literal ---------------------------------------------------------------


@given(multipolys())
def test_json_round_trip(p):
    assert MultiPoly.from_json(json.dumps(p.to_json())).equals(p)


def test_json_parse_error_has_location():
    with pytest.raises(PolynomialFormatError, match="line 2 column"):
        MultiPoly.from_json('{"nvars": 2,\n "terms": [}')


@pytest.mark.parametrize(
    "bad",
    [
        {"terms": []},
        {"nvars": 0, "terms": []},
        {"nvars": 2, "terms": [{"exp": [1], "re": 1}]},
        {"nvars": 2, "terms": [{"exp": [1, -1], "re": 1}]},
        {"nvars": 2, "terms": [{"re": 1}]},
    ],
)
def test_json_rejects_malformed(bad):
    with pytest.raises(PolynomialFormatError):
        MultiPoly.from_json(bad)


# -- univariate --------------------------------------------------------------------


def test_unipoly_trims_and_evaluates():
    P = UniPoly([1, 2, 0, 0])
    assert P.degree == 1
    assert P(3) == 7
    assert UniPoly.from_roots([1, 2])(1) == 0
    assert np.allclose((UniPoly([1, 1]) * UniPoly([-1, 1])).coeffs, [-1, 0, 1])
