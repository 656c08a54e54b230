"""Clark measures assembled from their circular fibers.

Each boundary point zeta spans the circle ``{w zeta : |w| = 1}``. On that
circle phi restricts to a finite Blaschke product psi(w) = phi(w zeta), whose
Clark measure for alpha has an atom at every solution of psi(w) = alpha with
mass 1/|psi'(w)|. The full measure averages these fiber measures over the
quotient of the boundary by the circle action.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .poly import UniPoly, restrict_to_fiber, restrict_to_fibers
from .rif import MATRIX_BALL, POLYDISC, RationalInnerFn, haar_unitaries
from .roots import CLUSTER_TOL, TOL_CIRCLE, RootFindingError, aberth_roots, roots_on_circle

Q_TOL = 1e-8
MAX_SKIPPED_FRACTION = 1e-3
MIN_GRID = 16
MIN_SAMPLES = 1000

BoundaryFn = Callable[[np.ndarray], np.ndarray]


class SkippedFiberError(RuntimeError):
    """Too many fibers met the singular set for the quadrature to be trusted."""


@dataclass(frozen=True)
class FiberMeasure:
    fiber_rep: np.ndarray
    w: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    skipped: bool = False

    @property
    def atoms(self) -> list[tuple[complex, np.ndarray, float]]:
        return list(zip(self.w, self.points, self.weights))

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))


def _skipped_fiber(zeta: np.ndarray) -> FiberMeasure:
    n = len(zeta)
    return FiberMeasure(zeta, np.zeros(0, complex), np.zeros((0, n), complex), np.zeros(0), True)


def _deflate(P: UniPoly, r: complex) -> UniPoly:
    """Quotient of P by (w - r), remainder dropped."""
    c = P.coeffs[::-1]
    out = np.empty(len(c) - 1, dtype=complex)
    acc = 0j
    for i in range(len(c) - 1):
        acc = acc * r + c[i]
        out[i] = acc
    return UniPoly(out[::-1])


def _weights(P: UniPoly, Q: UniPoly, w: np.ndarray) -> np.ndarray:
    qv = Q(w)
    dpsi = (P.derivative()(w) * qv - P(w) * Q.derivative()(w)) / qv**2
    return 1.0 / np.abs(dpsi)


def fiber_clark_measure(
    phi: RationalInnerFn,
    alpha: complex,
    zeta_rep,
    tol_circle: float = TOL_CIRCLE,
    q_tol: float = Q_TOL,
) -> FiberMeasure:
    """Clark measure of ``w -> phi(w zeta_rep)`` for ``alpha``.

    Unimodular common roots of the restricted numerator and denominator are
    divided out first. If the reduced denominator still vanishes at an atom,
    or the restriction is identically alpha, the fiber is marked skipped.
    """
    zeta = np.asarray(zeta_rep, dtype=complex)
    P = restrict_to_fiber(phi.p, zeta)
    Q = restrict_to_fiber(phi.q, zeta)
    scale = float(np.sum(np.abs(P.coeffs)) + np.sum(np.abs(Q.coeffs)))
    if Q.is_zero():
        return _skipped_fiber(zeta)
    if Q.degree >= 1:
        try:
            common = roots_on_circle(Q, tol_circle=1e-6, residual_bound=1e-6)
        except RootFindingError:
            return _skipped_fiber(zeta)
        for r, m in zip(common.roots, common.multiplicity):
            for _ in range(m):
                if abs(P(r)) <= q_tol * scale and abs(Q(r)) <= q_tol * scale and Q.degree >= 1:
                    P, Q = _deflate(P, r), _deflate(Q, r)
    H = P - alpha * Q
    if H.is_zero() or np.max(np.abs(H.coeffs)) <= 1e-13 * scale:
        return _skipped_fiber(zeta)
    try:
        found = roots_on_circle(H, tol_circle=tol_circle)
    except RootFindingError:
        return _skipped_fiber(zeta)
    w = found.roots
    if np.any(found.multiplicity > 1) or np.any(np.abs(Q(w)) <= q_tol * scale):
        return _skipped_fiber(zeta)
    return FiberMeasure(zeta, w, w[:, None] * zeta[None, :], _weights(P, Q, w))


def _polyval_rows(c: np.ndarray, w: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(w)
    for k in range(c.shape[1] - 1, -1, -1):
        acc = acc * w + c[:, k : k + 1]
    return acc


def _deriv_rows(c: np.ndarray) -> np.ndarray:
    if c.shape[1] == 1:
        return np.zeros_like(c)
    return c[:, 1:] * np.arange(1, c.shape[1])


def _batch_fibers(phi, alpha, reps, tol_circle, q_tol):
    """Fast path for many fibers; rows it cannot settle go through fiber_clark_measure."""
    Pc = restrict_to_fibers(phi.p, reps)
    Qc = restrict_to_fibers(phi.q, reps)
    d = max(Pc.shape[1], Qc.shape[1])
    Pc = np.pad(Pc, ((0, 0), (0, d - Pc.shape[1])))
    Qc = np.pad(Qc, ((0, 0), (0, d - Qc.shape[1])))
    Hc = Pc - alpha * Qc
    scale = np.sum(np.abs(Pc), axis=1) + np.sum(np.abs(Qc), axis=1)
    live = np.abs(Hc) > 1e-13 * scale[:, None]
    eff = np.where(live.any(axis=1), d - 1 - np.argmax(live[:, ::-1], axis=1), -1)

    per_row: list = [None] * len(reps)
    fallback = []
    for deg in np.unique(eff):
        rows = np.nonzero(eff == deg)[0]
        if deg <= 0:
            fallback.extend(rows.tolist())
            continue
        H = Hc[rows, : deg + 1]
        r = aberth_roots(H)
        dH = _deriv_rows(H)
        for _ in range(2):
            with np.errstate(divide="ignore", invalid="ignore"):
                step = _polyval_rows(H, r) / _polyval_rows(dH, r)
            r = r - np.where(np.isfinite(step), step, 0)
        on = np.abs(1 - np.abs(r)) <= tol_circle
        r = np.where(on, r / np.abs(r), r)
        P, Q = Pc[rows], Qc[rows]
        qv = _polyval_rows(Q, r)
        with np.errstate(divide="ignore", invalid="ignore"):
            dpsi = (_polyval_rows(_deriv_rows(P), r) * qv - _polyval_rows(P, r) * _polyval_rows(_deriv_rows(Q), r)) / qv**2
        gap = np.where(np.eye(deg, dtype=bool), np.inf, np.abs(r[:, :, None] - r[:, None, :]))
        close = np.any(gap <= CLUSTER_TOL, axis=(1, 2))
        near_n = np.any(on & (np.abs(qv) <= q_tol * scale[rows, None]), axis=1)
        for i, row in enumerate(rows):
            if close[i] or near_n[i]:
                fallback.append(row)
                continue
            sel = on[i]
            w = r[i, sel]
            order = np.argsort(np.angle(w), kind="stable")
            per_row[row] = (w[order], 1.0 / np.abs(dpsi[i, sel][order]))
    for row in fallback:
        fm = fiber_clark_measure(phi, alpha, reps[row], tol_circle, q_tol)
        per_row[row] = None if fm.skipped else (fm.w, fm.weights)
    return per_row


@dataclass(frozen=True, eq=False)
class SampledClarkMeasure:
    """Quadrature-weighted family of fiber measures.

    Atoms are stored flat: ``atom_fiber[k]`` is the fiber index of atom k, and
    the mass that atom carries in the full measure is
    ``fiber_weights[atom_fiber[k]] * atom_weights[k]``.
    """

    alpha: complex
    domain: str
    reps: np.ndarray
    fiber_weights: np.ndarray
    skipped: np.ndarray
    atom_fiber: np.ndarray
    atom_w: np.ndarray
    atom_points: np.ndarray
    atom_weights: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def nvars(self) -> int:
        return self.reps.shape[1]

    @property
    def points(self) -> np.ndarray:
        return self.atom_points

    @property
    def mass_weights(self) -> np.ndarray:
        return self.fiber_weights[self.atom_fiber] * self.atom_weights

    @property
    def n_skipped(self) -> int:
        return int(self.skipped.sum())

    def integrate(self, f: BoundaryFn) -> complex:
        vals = np.broadcast_to(np.asarray(f(self.atom_points), dtype=complex), self.atom_w.shape)
        return complex(np.sum(self.mass_weights * vals))

    def total_mass(self) -> float:
        return float(np.sum(self.mass_weights))

    @property
    def fibers(self) -> list[FiberMeasure]:
        out = []
        bounds = np.searchsorted(self.atom_fiber, np.arange(len(self.reps) + 1))
        for i, rep in enumerate(self.reps):
            s = slice(bounds[i], bounds[i + 1])
            out.append(
                FiberMeasure(rep, self.atom_w[s], self.atom_points[s], self.atom_weights[s], bool(self.skipped[i]))
            )
        return out

    def to_json(self) -> dict:
        fibers = []
        for fm in self.fibers:
            fibers.append(
                {
                    "rep": _cplx(fm.fiber_rep),
                    "skipped": fm.skipped,
                    "atoms": [
                        {"w": _cplx(w), "point": _cplx(pt), "weight": float(wt)}
                        for w, pt, wt in fm.atoms
                    ],
                }
            )
        return {
            "alpha": _cplx(self.alpha),
            "domain": self.domain,
            "grid": dict(self.metadata.get("grid", {})),
            "fibers": fibers,
            "metadata": {k: v for k, v in self.metadata.items() if k != "grid"},
        }

    def atom_rows(self):
        """Rows for the atoms CSV: fiber, re_w, im_w, weight, then re/im of each coordinate."""
        for k in range(len(self.atom_w)):
            row = [int(self.atom_fiber[k]), self.atom_w[k].real, self.atom_w[k].imag, self.mass_weights[k]]
            for c in self.atom_points[k]:
                row += [c.real, c.imag]
            yield row


def _cplx(z):
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        return [float(z.real), float(z.imag)]
    return [[float(v.real), float(v.imag)] for v in z]


def _assemble(phi, alpha, reps, domain, metadata, workers, tol_circle, q_tol) -> SampledClarkMeasure:
    alpha = complex(alpha)
    if abs(abs(alpha) - 1) > 1e-12:
        raise ValueError(f"alpha must be unimodular, got |alpha| = {abs(alpha)}")
    F = len(reps)
    chunks = np.array_split(np.arange(F), max(1, workers))
    chunks = [c for c in chunks if c.size]
    job = lambda idx: _batch_fibers(phi, alpha, reps[idx], tol_circle, q_tol)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    per_row = [r for part in parts for r in part]

    skipped = np.array([r is None for r in per_row], dtype=bool)
    n_skip = int(skipped.sum())
    if n_skip > MAX_SKIPPED_FRACTION * F:
        bad = np.nonzero(skipped)[0][:5]
        raise SkippedFiberError(
            f"{n_skip} of {F} fibers met the singular set (first reps: {reps[bad].tolist()})"
        )
    fw = np.where(skipped, 0.0, 1.0 / (F - n_skip))
    fib, ws, wts = [], [], []
    for i, r in enumerate(per_row):
        if r is None:
            continue
        fib.append(np.full(len(r[0]), i))
        ws.append(r[0])
        wts.append(r[1])
    atom_fiber = np.concatenate(fib) if fib else np.zeros(0, int)
    atom_w = np.concatenate(ws) if ws else np.zeros(0, complex)
    atom_weights = np.concatenate(wts) if wts else np.zeros(0)
    points = atom_w[:, None] * reps[atom_fiber]
    metadata = dict(metadata, skipped_fibers=n_skip, n_fibers=F)
    return SampledClarkMeasure(
        alpha, domain, reps, fw, skipped, atom_fiber, atom_w, points, atom_weights, metadata
    )


def polydisc_fiber_reps(nvars: int, grid_size: int, jitter_seed: int = 0) -> np.ndarray:
    """Representatives (1, e^{i t_2}, ..., e^{i t_n}) on a shifted uniform grid.

    One random offset per angle (drawn from ``jitter_seed``) moves the grid off
    any fixed singular fiber without spoiling the periodic trapezoid rule.
    """
    if nvars == 1:
        return np.ones((1, 1), dtype=complex)
    offsets = np.random.default_rng(jitter_seed).uniform(size=nvars - 1)
    axes = [2 * np.pi * (np.arange(grid_size) + u) / grid_size for u in offsets]
    mesh = np.meshgrid(*axes, indexing="ij")
    ang = np.stack([m.ravel() for m in mesh], axis=1)
    return np.hstack([np.ones((ang.shape[0], 1)), np.exp(1j * ang)])


def assemble_polydisc(
    phi: RationalInnerFn,
    alpha: complex,
    grid_size: int = 512,
    jitter_seed: int = 0,
    workers: int = 1,
    tol_circle: float = TOL_CIRCLE,
    q_tol: float = Q_TOL,
) -> SampledClarkMeasure:
    if phi.domain != POLYDISC:
        raise ValueError("assemble_polydisc needs a polydisc function")
    if grid_size < MIN_GRID:
        raise ValueError(f"grid_size must be at least {MIN_GRID}, got {grid_size}")
    reps = polydisc_fiber_reps(phi.nvars, grid_size, jitter_seed)
    meta = {"grid": {"kind": "torus_quotient", "grid_size": grid_size}, "jitter_seed": jitter_seed}
    return _assemble(phi, alpha, reps, POLYDISC, meta, workers, tol_circle, q_tol)


def assemble_matrix_ball(
    phi: RationalInnerFn,
    alpha: complex,
    n_samples: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    tol_circle: float = TOL_CIRCLE,
    q_tol: float = Q_TOL,
) -> SampledClarkMeasure:
    """Fibers through Haar-random unitaries, each with weight 1/n_samples."""
    if phi.domain != MATRIX_BALL:
        raise ValueError("assemble_matrix_ball needs a matrix-ball function")
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be at least {MIN_SAMPLES}, got {n_samples}")
    reps = haar_unitaries(n_samples, np.random.default_rng(seed)).reshape(n_samples, 4)
    meta = {"grid": {"kind": "haar", "n_samples": n_samples}, "seed": seed}
    return _assemble(phi, alpha, reps, MATRIX_BALL, meta, workers, tol_circle, q_tol)


def assemble(phi: RationalInnerFn, alpha: complex, size: int, seed: int = 0, **kw) -> SampledClarkMeasure:
    if phi.domain == POLYDISC:
        return assemble_polydisc(phi, alpha, size, seed, **kw)
    return assemble_matrix_ball(phi, alpha, size, seed, **kw)


def clark_rhs(phi: RationalInnerFn, alpha: complex, z) -> float:
    """(1 - |phi(z)|^2) / |alpha - phi(z)|^2."""
    v = complex(phi(np.asarray(z, dtype=complex)))
    return (1 - abs(v) ** 2) / abs(alpha - v) ** 2


def poisson_kernel_polydisc(z) -> BoundaryFn:
    z = np.asarray(z, dtype=complex)

    def kernel(pts):
        return np.prod((1 - np.abs(z) ** 2) / np.abs(pts - z) ** 2, axis=-1)

    return kernel


def poisson_check(mu: SampledClarkMeasure, phi: RationalInnerFn, z) -> tuple[float, float]:
    """Poisson integral of ``mu`` at ``z`` against the value it must reproduce."""
    z = np.asarray(z, dtype=complex)
    if mu.domain == MATRIX_BALL:
        if np.any(z != 0):
            raise NotImplementedError("on the matrix ball only z = 0 is supported")
        lhs = mu.total_mass()
    else:
        if np.any(np.abs(z) > 0.9):
            raise ValueError("poisson_check needs |z_j| <= 0.9")
        lhs = mu.integrate(poisson_kernel_polydisc(z)).real
    return float(lhs), float(clark_rhs(phi, mu.alpha, z))


def torus_average(f: BoundaryFn, nvars: int, grid_size: int) -> complex:
    """Product trapezoid rule for the normalized Haar integral over the torus."""
    ang = 2 * np.pi * np.arange(grid_size) / grid_size
    mesh = np.meshgrid(*([ang] * nvars), indexing="ij")
    pts = np.exp(1j * np.stack([m.ravel() for m in mesh], axis=1))
    return complex(np.mean(np.broadcast_to(f(pts), pts.shape[:1])))


def haar_average(f: BoundaryFn, n_samples: int, seed: int) -> complex:
    pts = haar_unitaries(n_samples, np.random.default_rng(seed)).reshape(n_samples, 4)
    return complex(np.mean(np.broadcast_to(f(pts), pts.shape[:1])))


def alpha_grid(n_alpha: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n_alpha) / n_alpha)


def disintegration_check(
    phi: RationalInnerFn,
    f: BoundaryFn,
    n_alpha: int = 64,
    grid_size: int = 512,
    seed: int = 0,
    measures: list[SampledClarkMeasure] | None = None,
) -> tuple[complex, complex]:
    """Average of the alpha-measures against the normalized boundary measure.

    ``grid_size`` is the torus grid per angle for the polydisc and the number
    of Haar samples for the matrix ball. Pre-built ``measures`` (one per alpha
    on the uniform grid) may be passed to share work between several f.
    """
    if measures is None:
        measures = [assemble(phi, a, grid_size, seed) for a in alpha_grid(n_alpha)]
    lhs = complex(math.fsum(m.integrate(f).real for m in measures)) / len(measures) + 1j * (
        math.fsum(m.integrate(f).imag for m in measures) / len(measures)
    )
    if phi.domain == POLYDISC:
        rhs = torus_average(f, phi.nvars, grid_size)
    else:
        rhs = haar_average(f, grid_size, seed)
    return lhs, rhs
