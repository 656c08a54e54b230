import numpy as np
import pytest

from clark_rif import corpus
from clark_rif.coarea import CSV_HEADER, integrate_coarea, trace_level_set
from clark_rif.measure import assemble_polydisc

FUNCS = {
    "1": lambda z: np.ones(len(z)),
    "zeta1": lambda z: z[:, 0],
    "zeta1*zeta2": lambda z: z[:, 0] * z[:, 1],
    "|zeta1+zeta2|^2": lambda z: np.abs(z[:, 0] + z[:, 1]) ** 2,
}


def test_identity_factor_trace():
    L = trace_level_set(corpus.coordinate(0), 1, 256)
    assert len(L) == 256
    assert np.allclose(L.zeta1, 1)
    assert np.all(L.branch == 0)
    assert np.allclose(L.arclen, 2 * np.pi / 256)
    assert np.allclose(L.density, 2 * np.pi / (2 * np.pi) ** 2)
    assert integrate_coarea(L, FUNCS["1"]) == pytest.approx(1)


@pytest.mark.parametrize("alpha", [1, 1j, np.exp(2.5j)])
def test_product_trace_closed_form(alpha):
    L = trace_level_set(corpus.monomial((1, 1)), alpha, 512)
    z2 = np.exp(1j * L.theta2)
    assert np.allclose(L.zeta1, alpha / z2)
    assert np.allclose(L.grad_norm, np.sqrt(2))
    # central differences along a circle lose a factor sin(h)/h
    h = 2 * np.pi / 512
    assert np.allclose(L.arclen, np.sqrt(1 + (np.sin(h) / h) ** 2) * h, rtol=1e-12)
    assert integrate_coarea(L, FUNCS["1"]) == pytest.approx(1, abs=1e-4)
    assert integrate_coarea(L, FUNCS["zeta1*zeta2"]) == pytest.approx(alpha, abs=1e-4)


def test_rif11_coarea_mass_matches_fibers():
    phi = corpus.rif_11()
    L = trace_level_set(phi, 1, 2048)
    mu = assemble_polydisc(phi, 1, 512)
    assert abs(integrate_coarea(L, FUNCS["1"]) - mu.total_mass()) <= 1e-3


@pytest.mark.parametrize("name", ["z1", "z1z2", "rif11", "z1^2z2", "z1*blaschke(z2)"])
@pytest.mark.parametrize("alpha", [1, 1j, np.exp(0.7j)])
def test_cross_method_equivalence(name, alpha):
    phi = corpus.named(name)
    mu = assemble_polydisc(phi, alpha, 512)
    L = trace_level_set(phi, alpha, 2048)
    for f in FUNCS.values():
        a, b = mu.integrate(f), integrate_coarea(L, f)
        assert abs(a - b) <= 1e-3 * (1 + abs(a))


@pytest.mark.parametrize("name", ["rif11", "z1^2z2", "z1*blaschke(z2)"])
def test_traced_points_lie_on_level_set(name):
    phi = corpus.named(name)
    L = trace_level_set(phi, 1j, 1024)
    h = phi.p(L.points) - 1j * phi.q(L.points)
    assert np.abs(h).max() <= 1e-8 * phi.scale
    assert np.all(np.isfinite(L.density)) and np.all(L.density > 0)


def test_two_branches_are_labelled_consistently():
    # z1^2 z2 = alpha has two branches zeta1 = +-sqrt(alpha / zeta2) that swap once around the circle
    L = trace_level_set(corpus.monomial((2, 1)), 1, 512)
    assert len(L) == 1024
    assert set(np.unique(L.branch)) <= {0, 1, 2, 3}


def test_only_bivariate_polydisc():
    with pytest.raises(ValueError):
        trace_level_set(corpus.det_2x2(), 1, 64)


def test_csv_rows_match_header():
    L = trace_level_set(corpus.rif_11(), 1, 64)
    rows = list(L.csv_rows())
    assert len(rows) == len(L)
    assert all(len(r) == len(CSV_HEADER) for r in rows)
    assert CSV_HEADER == ["theta2", "re_zeta1", "im_zeta1", "grad_norm", "density", "arclen", "branch"]


def test_trace_is_deterministic():
    a = trace_level_set(corpus.rif_11(), 1j, 256, jitter_seed=4)
    b = trace_level_set(corpus.rif_11(), 1j, 256, jitter_seed=4)
    assert np.array_equal(a.zeta1, b.zeta1) and np.array_equal(a.arclen, b.arclen)
