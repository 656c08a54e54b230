"""Clark measures on the bidisc as densities on the level curve V_alpha.

The curve ``{zeta in T^2 : p(zeta) = alpha q(zeta)}`` is sampled by solving
for zeta_1 at each angle of zeta_2; the measure is
``2 pi / (c |grad phi|)`` times arclength, with c the area of T^2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .measure import BoundaryFn
from .poly import coefficients_in_variable
from .rif import POLYDISC, RationalInnerFn, torus_volume
from .roots import TOL_CIRCLE, aberth_roots

MIN_GRAD = 1e-10


@dataclass(frozen=True, eq=False)
class LevelSetSample:
    alpha: complex
    theta2: np.ndarray
    zeta1: np.ndarray
    grad_norm: np.ndarray
    density: np.ndarray
    arclen: np.ndarray
    branch: np.ndarray
    n_excluded: int = 0
    branch_events: list = field(default_factory=list)

    @property
    def points(self) -> np.ndarray:
        return np.stack([self.zeta1, np.exp(1j * self.theta2)], axis=1)

    def __len__(self) -> int:
        return len(self.zeta1)

    def csv_rows(self):
        for k in range(len(self.zeta1)):
            yield [
                self.theta2[k],
                self.zeta1[k].real,
                self.zeta1[k].imag,
                self.grad_norm[k],
                self.density[k],
                self.arclen[k],
                int(self.branch[k]),
            ]


CSV_HEADER = ["theta2", "re_zeta1", "im_zeta1", "grad_norm", "density", "arclen", "branch"]


def _unimodular_roots(phi, alpha, theta, tol_circle):
    """Per-angle lists of unimodular zeta_1 solving p - alpha q = 0 at zeta_2 = e^{i theta}."""
    others = np.stack([np.ones_like(theta), np.exp(1j * theta)], axis=1).astype(complex)
    H = coefficients_in_variable(phi.p, 0, others)
    Qc = coefficients_in_variable(phi.q, 0, others)
    d = max(H.shape[1], Qc.shape[1])
    H = np.pad(H, ((0, 0), (0, d - H.shape[1]))) - alpha * np.pad(Qc, ((0, 0), (0, d - Qc.shape[1])))
    scale = np.sum(np.abs(H), axis=1)
    live = np.abs(H) > 1e-13 * np.maximum(scale, 1e-300)[:, None]
    eff = np.where(live.any(axis=1), d - 1 - np.argmax(live[:, ::-1], axis=1), -1)
    out: list[np.ndarray] = [np.zeros(0, complex)] * len(theta)
    vanished = []
    for deg in np.unique(eff):
        rows = np.nonzero(eff == deg)[0]
        if deg < 0:
            vanished.extend(rows.tolist())
            continue
        if deg == 0:
            continue
        r = aberth_roots(H[rows, : deg + 1])
        for i, row in enumerate(rows):
            rr = r[i]
            rr = rr[np.abs(1 - np.abs(rr)) <= tol_circle]
            out[row] = rr / np.abs(rr)
    return out, vanished


def _nearest(candidates: np.ndarray, z: complex):
    if candidates.size == 0:
        return None
    d = np.abs(candidates - z)
    k = int(np.argmin(d))
    if candidates.size > 1:
        guard = 0.5 * np.min(np.abs(candidates[k] - np.delete(candidates, k)))
        if d[k] > guard:
            return None
    return k


def trace_level_set(
    phi: RationalInnerFn,
    alpha: complex,
    n_theta: int = 2048,
    jitter_seed: int = 0,
    tol_circle: float = TOL_CIRCLE,
) -> LevelSetSample:
    """Sample V_alpha over a shifted uniform grid in the angle of zeta_2.

    Branches are followed by nearest-neighbour matching between adjacent
    angles (cyclically). dzeta_1/dtheta_2 is a central difference along the
    branch, one-sided where a neighbour is missing; points with
    |grad phi| < 1e-10 are dropped and counted.
    """
    if phi.domain != POLYDISC or phi.nvars != 2:
        raise ValueError("trace_level_set supports bivariate polydisc functions only")
    alpha = complex(alpha)
    u = np.random.default_rng(jitter_seed).uniform()
    dth = 2 * np.pi / n_theta
    theta = dth * (np.arange(n_theta) + u)
    roots, vanished = _unimodular_roots(phi, alpha, theta, tol_circle)

    events = [{"theta2": float(theta[k]), "kind": "vertical_component"} for k in vanished]
    counts = np.array([len(r) for r in roots])
    for k in np.nonzero(counts != np.roll(counts, 1))[0]:
        events.append(
            {"theta2": float(theta[k]), "kind": "count_change", "from": int(counts[k - 1]), "to": int(counts[k])}
        )

    # branch labels: propagate forward from the first angle
    labels = [np.full(len(r), -1) for r in roots]
    next_label = 0
    for k in range(n_theta):
        for i, z in enumerate(roots[k]):
            if k > 0 and labels[k][i] < 0:
                j = _nearest(roots[k - 1], z)
                if j is not None and _nearest(roots[k], roots[k - 1][j]) == i:
                    labels[k][i] = labels[k - 1][j]
            if labels[k][i] < 0:
                labels[k][i] = next_label
                next_label += 1

    th, z1, dz = [], [], []
    br = []
    for k in range(n_theta):
        prev, nxt = roots[k - 1], roots[(k + 1) % n_theta]
        for i, z in enumerate(roots[k]):
            jp, jn = _nearest(prev, z), _nearest(nxt, z)
            if jp is not None and jn is not None:
                d = (nxt[jn] - prev[jp]) / (2 * dth)
            elif jn is not None:
                d = (nxt[jn] - z) / dth
            elif jp is not None:
                d = (z - prev[jp]) / dth
            else:
                d = np.nan
            th.append(theta[k])
            z1.append(z)
            dz.append(d)
            br.append(labels[k][i])
    th = np.array(th)
    z1 = np.array(z1, dtype=complex)
    dz = np.array(dz, dtype=complex)
    br = np.array(br, dtype=int)
    if th.size:
        pts = np.stack([z1, np.exp(1j * th)], axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            gn = phi.grad_norm(pts)
    else:
        gn = np.zeros(0)
    keep = np.isfinite(gn) & (gn >= MIN_GRAD) & np.isfinite(dz)
    c = torus_volume(2)
    gn, th, z1, dz, br = gn[keep], th[keep], z1[keep], dz[keep], br[keep]
    return LevelSetSample(
        alpha=alpha,
        theta2=th,
        zeta1=z1,
        grad_norm=gn,
        density=2 * np.pi / (c * gn),
        arclen=np.sqrt(np.abs(dz) ** 2 + 1) * dth,
        branch=br,
        n_excluded=int((~keep).sum()),
        branch_events=events,
    )


def integrate_coarea(L: LevelSetSample, f: BoundaryFn) -> complex:
    vals = np.broadcast_to(np.asarray(f(L.points), dtype=complex), L.zeta1.shape)
    return complex(np.sum(L.density * L.arclen * vals))
