"""Root finding near the unit circle and approximate polynomial GCDs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .poly import MultiPoly, UniPoly

TOL_CIRCLE = 1e-8
TOL_RANK = 1e-8
CLUSTER_TOL = 1e-6
RESIDUAL_BOUND = 1e-9
_EPS = np.finfo(float).eps


class RootFindingError(RuntimeError):
    """Raised when polished roots still leave a residual above the bound."""

    def __init__(self, msg: str, worst_residual: float):
        super().__init__(f"{msg} (worst residual {worst_residual:.3e})")
        self.worst_residual = worst_residual


@dataclass(frozen=True)
class CircleRoots:
    roots: np.ndarray
    multiplicity: np.ndarray
    residual: float

    def __len__(self) -> int:
        return len(self.roots)


def _horner_with_derivative(a: np.ndarray, z: np.ndarray):
    """Evaluate rows of ascending coefficients ``a`` (F, d+1) and their derivative at z (F, k)."""
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for k in range(a.shape[1] - 1, -1, -1):
        dp = dp * z + p
        p = p * z + a[:, k : k + 1]
    return p, dp


def companion_roots(coeffs) -> np.ndarray:
    """All roots of each row of ``coeffs`` (ascending, leading term nonzero) via eigenvalues."""
    a = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    d = a.shape[1] - 1
    if d < 1:
        return np.zeros((a.shape[0], 0), dtype=complex)
    mon = a[:, :-1] / a[:, -1:]
    comp = np.zeros((a.shape[0], d, d), dtype=complex)
    comp[:, 1:, :-1] = np.eye(d - 1)
    comp[:, :, -1] = -mon
    return np.linalg.eigvals(comp)


def aberth_roots(coeffs, max_iter: int = 200, restarts: int = 2) -> np.ndarray:
    """All roots of each row of ``coeffs`` by simultaneous Aberth-Ehrlich iteration.

    Rows that fail to converge are restarted from a perturbed initial circle;
    rows that still fail fall back to companion-matrix eigenvalues. Each row is
    iterated independently, so results do not depend on how rows are batched.
    """
    a = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    F, d = a.shape[0], a.shape[1] - 1
    if d < 1:
        return np.zeros((F, 0), dtype=complex)
    a = a / a[:, -1:]
    if d == 1:
        return -a[:, :1].copy()
    absa = np.abs(a)
    r0 = np.abs(a[:, 0]) ** (1.0 / d)
    upper = 2.0 * np.max(absa[:, :-1] ** (1.0 / (d - np.arange(d))), axis=1)
    radius = np.where(r0 > 1e-8, np.minimum(r0, upper), np.maximum(upper, 1e-3) / 2)
    angles = 2 * np.pi * np.arange(d) / d + 0.4 / d

    out = np.empty((F, d), dtype=complex)
    todo = np.arange(F)
    for attempt in range(restarts + 1):
        if todo.size == 0:
            break
        ang = angles
        if attempt:
            ang = angles + np.random.default_rng(attempt).uniform(0, 2 * np.pi / d, d)
        z = radius[todo, None] * np.exp(1j * ang)[None, :]
        z, ok = _aberth_iterate(a[todo], z, max_iter)
        out[todo[ok]] = z[ok]
        todo = todo[~ok]
    if todo.size:
        out[todo] = companion_roots(a[todo])
    return out


def _aberth_iterate(a, z, max_iter):
    F, d = z.shape
    absa = np.abs(a)
    active = np.ones(F, dtype=bool)
    eye = np.eye(d, dtype=bool)
    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        za = z[idx]
        p, dp = _horner_with_derivative(a[idx], za)
        scale = np.zeros(za.shape)
        for k in range(d, -1, -1):
            scale = scale * np.abs(za) + absa[idx, k : k + 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = za[:, :, None] - za[:, None, :]
            diff[:, eye] = np.inf
            s = np.sum(1.0 / diff, axis=2)
            step = ratio / (1.0 - ratio * s)
        bad = ~np.isfinite(step)
        step[bad] = 1e-3 * (1 + np.abs(za[bad]))
        step[np.abs(p) == 0] = 0
        za = za - step
        z[idx] = za
        small = np.abs(step) <= 4 * _EPS * (1 + np.abs(za))
        backward = np.abs(p) <= 8 * _EPS * scale
        done = np.all(small | backward, axis=1)
        active[idx[done]] = False
    return z, ~active


def all_roots(P: UniPoly, max_iter: int = 200) -> np.ndarray:
    if P.is_zero():
        raise ValueError("the zero polynomial has no finite root set")
    return aberth_roots(P.coeffs[None, :], max_iter=max_iter)[0]


def cluster_roots(roots: np.ndarray, cluster_tol: float = CLUSTER_TOL):
    """Merge roots closer than ``cluster_tol * (1 + |r|)``; returns centres and multiplicities."""
    roots = np.asarray(roots, dtype=complex)
    n = len(roots)
    label = np.arange(n)

    def find(i):
        while label[i] != i:
            label[i] = label[label[i]]
            i = label[i]
        return i

    for i in range(n):
        for k in range(i + 1, n):
            if abs(roots[i] - roots[k]) <= cluster_tol * (1 + abs(roots[i])):
                label[find(k)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    centres = np.array([roots[g].mean() for g in groups.values()], dtype=complex)
    mult = np.array([len(g) for g in groups.values()], dtype=int)
    return centres, mult


def _polish(P: UniPoly, r: complex, mult: int, iters: int = 8) -> complex:
    """Newton on the (mult-1)-th derivative, whose root at ``r`` is simple."""
    Q = P
    for _ in range(mult - 1):
        Q = Q.derivative()
    dQ = Q.derivative()
    for _ in range(iters):
        v, dv = Q(r), dQ(r)
        if dv == 0:
            break
        step = v / dv
        r = r - step
        if abs(step) <= 4 * _EPS * (1 + abs(r)):
            break
    return r


def roots_on_circle(
    P: UniPoly,
    tol_circle: float = TOL_CIRCLE,
    cluster_tol: float = CLUSTER_TOL,
    residual_bound: float = RESIDUAL_BOUND,
    max_iter: int = 200,
) -> CircleRoots:
    """Roots of ``P`` within ``tol_circle`` of the unit circle, polished and projected onto it."""
    if P.is_zero():
        raise ValueError("the zero polynomial has no finite root set")
    if P.degree < 1:
        return CircleRoots(np.zeros(0, complex), np.zeros(0, int), 0.0)
    centres, mult = cluster_roots(all_roots(P, max_iter=max_iter), cluster_tol)
    polished = np.array([_polish(P, r, m) for r, m in zip(centres, mult)], dtype=complex)
    keep = np.abs(1 - np.abs(polished)) <= tol_circle
    roots = polished[keep]
    roots = roots / np.abs(roots)
    mult = mult[keep]
    order = np.argsort(np.angle(roots), kind="stable")
    roots, mult = roots[order], mult[order]
    residual = float(np.max(np.abs(P(roots)))) if len(roots) else 0.0
    norm = float(np.sum(np.abs(P.coeffs)))
    if residual > residual_bound * norm:
        raise RootFindingError("unimodular roots did not polish below the residual bound", residual)
    return CircleRoots(roots, mult, residual)


# -- approximate GCD ---------------------------------------------------------


def _conv_matrix(c: np.ndarray, k: int) -> np.ndarray:
    """Matrix of ``x -> c * x`` for ``x`` with ``k`` coefficients."""
    m = np.zeros((len(c) + k - 1, k), dtype=complex)
    for i in range(k):
        m[i : i + len(c), i] = c
    return m


def sylvester(a: UniPoly, b: UniPoly) -> np.ndarray:
    m, n = int(a.degree), int(b.degree)
    return np.hstack([_conv_matrix(a.coeffs, n), _conv_matrix(b.coeffs, m)])


def approx_gcd(a: UniPoly, b: UniPoly, tol_rank: float = TOL_RANK) -> UniPoly:
    """Numerical GCD of ``a`` and ``b`` (monic), with degree set by the Sylvester rank deficiency."""
    if a.is_zero() or b.is_zero():
        raise ValueError("approx_gcd needs nonzero inputs")
    m, n = int(a.degree), int(b.degree)
    if m == 0 or n == 0:
        return UniPoly([1.0])
    an = UniPoly(a.coeffs / np.linalg.norm(a.coeffs))
    bn = UniPoly(b.coeffs / np.linalg.norm(b.coeffs))
    s = np.linalg.svd(sylvester(an, bn), compute_uv=False)
    k = int(np.sum(s < tol_rank * s[0]))
    k = min(k, m, n)
    if k == 0:
        return UniPoly([1.0])
    # null vector of the k-th subresultant matrix gives the cofactors a/g and b/g
    T = np.hstack([_conv_matrix(an.coeffs, n - k + 1), _conv_matrix(bn.coeffs, m - k + 1)])
    _, _, vh = np.linalg.svd(T)
    x = vh[-1].conj()
    cof_a = -x[n - k + 1 :]
    g, *_ = np.linalg.lstsq(_conv_matrix(cof_a, k + 1), an.coeffs, rcond=None)
    g[np.abs(g) < 1e-14 * np.abs(g).max()] = 0
    return UniPoly(g).monic()


def content_in_variable(h: MultiPoly, j: int, tol_rank: float = TOL_RANK) -> MultiPoly:
    """GCD of the coefficients of ``h`` viewed as a polynomial in ``z_j`` (bivariate only).

    The result depends only on the other variable and is monic in it; a
    constant content is returned as the constant 1.
    """
    if h.nvars != 2:
        raise NotImplementedError("content_in_variable supports nvars = 2 only")
    if h.is_zero():
        raise ValueError("content of the zero polynomial is undefined")
    other = 1 - j
    coeffs = [c for c in h.coefficient_polys(j) if not c.is_zero()]
    unis = [_to_unipoly(c, other) for c in coeffs]
    g = unis[0]
    if len(unis) == 1:
        g = g.monic()
    for u in unis[1:]:
        if g.degree == 0:
            break
        g = approx_gcd(g, u, tol_rank)
    if g.degree == 0:
        return MultiPoly.constant(1.0, 2)
    return _from_unipoly(g, other, 2)


def _to_unipoly(p: MultiPoly, j: int) -> UniPoly:
    c = np.zeros(max(p.degree_in(j), 0) + 1, dtype=complex)
    for e, v in p.terms.items():
        c[e[j]] += v
    return UniPoly(c)


def _from_unipoly(u: UniPoly, j: int, nvars: int) -> MultiPoly:
    terms = {}
    for k, c in enumerate(u.coeffs):
        e = [0] * nvars
        e[j] = k
        terms[tuple(e)] = c
    return MultiPoly(nvars, terms)


def as_unipoly(p: MultiPoly, j: int) -> UniPoly:
    """View a polynomial that depends only on ``z_j`` as a UniPoly."""
    for e in p.terms:
        if any(k for i, k in enumerate(e) if i != j):
            raise ValueError("polynomial depends on more than one variable")
    return _to_unipoly(p, j)
