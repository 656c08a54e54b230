"""The 2x2 matrix ball: a rational inner function whose level sets contain tori.

phi(M) = (ad - bc - d) / (1 - a) is inner on the unit ball of 2x2 matrices,
whose distinguished boundary is U(2). Each level set {phi = alpha} on U(2)
contains a three-parameter family of circles, and that family blocks
polynomial approximation of conjugate entries. The determinant behaves
the opposite way: conjugate entries are polynomials on its level sets.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .corpus import det_2x2
from .corpus import phi_i22 as phi_i22_rif
from .density import gram_residual
from .measure import SampledClarkMeasure, assemble_matrix_ball
from .rif import haar_unitaries

POLE_TOL = 1e-12
POLE_GUARD = 1e-3
INNER_TOL = 1e-6
SCAN_CHUNK = 10_000
REFERENCE_SAMPLES = 10_000


class PoleError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class MatrixPoint:
    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def from_array(cls, m) -> MatrixPoint:
        m = np.asarray(m, dtype=complex).reshape(4)
        return cls(*(complex(x) for x in m))

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def entries(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d], dtype=complex)

    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def unitarity_residual(self) -> float:
        m = self.as_array()
        return float(np.linalg.norm(m.conj().T @ m - np.eye(2)))


def phi_i22(M: MatrixPoint) -> complex:
    if abs(1 - M.a) <= POLE_TOL:
        raise PoleError(f"phi has a pole at a = 1 (a = {M.a})")
    return (M.a * M.d - M.b * M.c - M.d) / (1 - M.a)


def phi_i22_values(entries: np.ndarray) -> np.ndarray:
    a, b, c, d = np.moveaxis(np.asarray(entries, dtype=complex), -1, 0)
    return (a * d - b * c - d) / (1 - a)


def haar_unitary(seed: int) -> MatrixPoint:
    return MatrixPoint.from_array(haar_unitaries(1, np.random.default_rng(seed))[0])


def haar_stream(n: int, seed: int, chunk: int = SCAN_CHUNK) -> list[tuple[int, np.random.Generator]]:
    """Split n samples into fixed-size chunks, chunk k drawing from child k of SeedSequence(seed).

    The split depends only on (n, seed, chunk), so any number of workers
    produces the same samples.
    """
    n_chunks = max(1, math.ceil(n / chunk))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(chunk, n - k * chunk) for k in range(n_chunks)]
    return [(s, np.random.default_rng(c)) for s, c in zip(sizes, children)]


def _map(fn, items, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# -- innerness ------------------------------------------------------------------


@dataclass(frozen=True)
class InnernessScan:
    n: int
    n_excluded: int
    violations: int
    max_deviation: float


def innerness_scan(
    n: int = 100_000, seed: int = 0, pole_guard: float = POLE_GUARD, tol: float = INNER_TOL, workers: int = 1
) -> InnernessScan:
    """Count Haar points off {|1 - a| <= pole_guard} where ||phi| - 1| > tol."""

    def one(item):
        size, rng = item
        u = haar_unitaries(size, rng).reshape(size, 4)
        off = np.abs(1 - u[:, 0]) > pole_guard
        dev = np.abs(np.abs(phi_i22_values(u[off])) - 1)
        return int((~off).sum()), int((dev > tol).sum()), float(dev.max(initial=0.0))

    parts = _map(one, haar_stream(n, seed), workers)
    return InnernessScan(
        n=n,
        n_excluded=sum(p[0] for p in parts),
        violations=sum(p[1] for p in parts),
        max_deviation=max(p[2] for p in parts),
    )


@dataclass(frozen=True)
class HaarMoments:
    n: int
    mean_abs_a2: float
    mean_a: complex
    sigma_abs_a2: float
    sigma_a: float


def haar_moments(n: int = 100_000, seed: int = 0) -> HaarMoments:
    """E|a|^2 (exactly 1/2 under Haar) and E[a] (exactly 0), with standard errors."""
    a = np.concatenate([haar_unitaries(s, rng)[:, 0, 0] for s, rng in haar_stream(n, seed)])
    a2 = np.abs(a) ** 2
    return HaarMoments(
        n=n,
        mean_abs_a2=float(a2.mean()),
        mean_a=complex(a.mean()),
        sigma_abs_a2=float(a2.std() / math.sqrt(n)),
        sigma_a=float(np.abs(a).std() / math.sqrt(n)),
    )


@dataclass(frozen=True)
class InteriorBound:
    n: int
    max_abs: float
    max_norm: float  # largest operator norm among the samples


def interior_bound_scan(n: int = 10_000, seed: int = 0, max_radius: float = 1 - 1e-6) -> InteriorBound:
    """Largest |phi(M)| over random M = U diag(s) V with singular values s uniform in [0, max_radius)."""
    vals, norms = [], []
    for size, rng in haar_stream(n, seed):
        u, v = haar_unitaries(size, rng), haar_unitaries(size, rng)
        s = rng.uniform(0, max_radius, (size, 2))
        m = (u * s[:, None, :]) @ v
        vals.append(np.abs(phi_i22_values(m.reshape(size, 4))))
        norms.append(s.max(axis=1))
    return InteriorBound(n, float(np.concatenate(vals).max()), float(np.concatenate(norms).max()))


# -- explicit family of circles inside the level set ----------------------------


def rank_one_circle(x, y, gamma) -> np.ndarray:
    """Matrices L with L x = y and L(-conj x2, conj x1) = gamma (-conj y2, conj y1).

    ``gamma`` may be an array; the result has shape gamma.shape + (2, 2).
    """
    x1, x2 = x
    y1, y2 = y
    gamma = np.asarray(gamma, dtype=complex)
    X = np.array([[np.conj(x1), np.conj(x2)], [-x2, x1]], dtype=complex)
    Y = np.zeros(gamma.shape + (2, 2), dtype=complex)
    Y[..., 0, 0] = y1
    Y[..., 1, 0] = y2
    Y[..., 0, 1] = -gamma * np.conj(y2)
    Y[..., 1, 1] = gamma * np.conj(y1)
    return Y @ X


def family_matrix(x1: complex, alpha: complex, gamma) -> np.ndarray:
    """Closed form of the circle through x = (x1, sqrt(1 - |x1|^2)), y = (x1, -alpha x2)."""
    gamma = np.asarray(gamma, dtype=complex)
    r2 = abs(x1) ** 2
    s = math.sqrt(1 - r2)
    ac = np.conj(alpha)
    out = np.empty(gamma.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = r2 * (1 + ac * gamma) - ac * gamma
    out[..., 0, 1] = x1 * s * (1 + ac * gamma)
    out[..., 1, 0] = -np.conj(x1) * s * (alpha + gamma)
    out[..., 1, 1] = r2 * (gamma + alpha) - alpha
    return out


@dataclass(frozen=True, eq=False)
class TorusFamily:
    x1: complex
    alpha: complex
    gamma: np.ndarray
    matrices: np.ndarray  # (n_gamma, 2, 2)

    @property
    def x2(self) -> float:
        return math.sqrt(1 - abs(self.x1) ** 2)

    @property
    def y(self) -> tuple[complex, complex]:
        return self.x1, -self.alpha * self.x2

    def residuals(self) -> dict:
        m = self.matrices
        a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
        eye = np.eye(2)
        unit = np.linalg.norm(np.conj(np.swapaxes(m, 1, 2)) @ m - eye, axis=(1, 2))
        level = np.abs(a * d - b * c - d - self.alpha * (1 - a))
        x1, x2 = self.x1, self.x2
        y1, y2 = self.y
        return {
            "unitarity": float(unit.max()),
            "level_set": float(level.max()),
            "determinant": float(np.abs(a * d - b * c - self.gamma).max()),
            "condition_first": abs(1 - x1 * np.conj(y1) + self.alpha * x2 * np.conj(y2)),
            "condition_second": abs(np.conj(x2) * y2 + self.alpha - self.alpha * np.conj(x1) * y1),
            "product_form": float(
                np.abs(m - rank_one_circle((x1, x2), (y1, y2), self.gamma)).max()
            ),
        }


def torus_family(x1: complex, alpha: complex, n_gamma: int = 64) -> TorusFamily:
    x1, alpha = complex(x1), complex(alpha)
    if not abs(x1) < 1:
        raise ValueError(f"|x1| must be < 1, got {abs(x1)}")
    if abs(abs(alpha) - 1) > 1e-12:
        raise ValueError("alpha must be unimodular")
    if n_gamma < 1:
        raise ValueError("n_gamma must be positive")
    gamma = np.exp(2j * np.pi * np.arange(n_gamma) / n_gamma)
    return TorusFamily(x1, alpha, gamma, family_matrix(x1, alpha, gamma))


# -- rank of the family parametrization ----------------------------------------


def _g(v: np.ndarray, alpha: complex) -> np.ndarray:
    """(Re m12, Re m22, Im m22) of the circle matrix at x1 = rho e^{i theta}, gamma = e^{i t}."""
    rho, theta, t = v
    x1 = rho * np.exp(1j * theta)
    x2 = math.sqrt(1 - rho**2)
    m = rank_one_circle((x1, x2), (x1, -alpha * x2), np.exp(1j * t))
    return np.array([m[0, 1].real, m[1, 1].real, m[1, 1].imag])


def jacobian_closed_form(rho: float, theta: float, phi_angle: float, alpha: complex) -> float:
    ac = np.conj(alpha)
    e = np.exp(1j * phi_angle)
    im = (np.exp(1j * theta) + ac * np.exp(1j * (theta + phi_angle))).imag
    return float(2 * rho**4 * math.sqrt(1 - rho**2) * im * (1 + (ac * e).real))


def jacobian_rank_check(
    rho: float, theta: float, phi_angle: float, alpha: complex, step: float = 1e-5
) -> tuple[float, float]:
    """Central-difference Jacobian determinant next to its closed form."""
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    alpha = complex(alpha)
    v = np.array([rho, theta, phi_angle], dtype=float)
    J = np.empty((3, 3))
    for k in range(3):
        h = np.zeros(3)
        h[k] = step
        J[:, k] = (_g(v + h, alpha) - _g(v - h, alpha)) / (2 * step)
    return float(np.linalg.det(J)), jacobian_closed_form(rho, theta, phi_angle, alpha)


def random_jacobian_points(n: int, seed: int, margin: float = 0.05):
    """Random (rho, theta, phi_angle, alpha) kept ``margin`` away from the zero set of the closed form."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        rho = rng.uniform(margin, 1 - margin)
        theta, t, a = rng.uniform(0, 2 * np.pi, 3)
        alpha = complex(np.exp(1j * a))
        ac = np.conj(alpha)
        f1 = abs((np.exp(1j * theta) * (1 + ac * np.exp(1j * t))).imag)
        f2 = 1 + (ac * np.exp(1j * t)).real
        if f1 > margin and f2 > margin:
            out.append((rho, theta, t, alpha))
    return out


# -- conjugate entries as polynomials on the determinant's level sets ----------


@dataclass(frozen=True)
class AdjugateReport:
    alpha: complex
    pointwise: dict  # target -> max |conj(entry) - predicted polynomial| on the atoms
    gram: dict  # target -> gram residual at N = 1


ENTRY_NAMES = ("a", "b", "c", "d")
# conj(M) = adj(M)^T / det(M) on U(2)
_ADJ_FIT = {0: (3, 1), 1: (2, -1), 2: (1, -1), 3: (0, 1)}


def adjugate_identity_probe(mu: SampledClarkMeasure, alpha: complex | None = None) -> AdjugateReport:
    alpha = complex(mu.alpha if alpha is None else alpha)
    pts = mu.points
    pointwise, gram = {}, {}
    for k, (src, sign) in _ADJ_FIT.items():
        pred = sign * pts[:, src] / alpha
        name = f"conj({ENTRY_NAMES[k]})"
        pointwise[name] = float(np.abs(np.conj(pts[:, k]) - pred).max())
        gram[name] = gram_residual(mu, k, 1).residual
    return AdjugateReport(alpha, pointwise, gram)


# -- report ----------------------------------------------------------------------


@dataclass
class DemoConfig:
    alpha: complex = 1.0
    n_inner: int = 100_000
    x1_values: tuple = tuple(0.09 * k * np.exp(0.7j * k) for k in range(10))
    n_gamma: int = 64
    n_jacobian: int = 100
    n_samples: int = 10_000
    max_degree: int = 6
    seed: int = 0
    workers: int = 1
    family_tol: float = 1e-10
    jacobian_tol: float = 1e-5
    i22_threshold: float = 0.1
    det_threshold: float = 1e-2

    def mc_factor(self) -> float:
        """Monte Carlo tolerances scale like 1/sqrt(n_samples) below the reference 10^4."""
        return max(1.0, math.sqrt(REFERENCE_SAMPLES / self.n_samples))


def _cplx(z):
    z = complex(z)
    return [z.real, z.imag]


def demo_report(cfg: DemoConfig) -> dict:
    alpha = complex(cfg.alpha)
    scan = innerness_scan(cfg.n_inner, cfg.seed, workers=cfg.workers)
    interior = interior_bound_scan(cfg.n_samples, cfg.seed)

    fam_max = {}
    for x1 in cfg.x1_values:
        for key, val in torus_family(x1, alpha, cfg.n_gamma).residuals().items():
            fam_max[key] = max(fam_max.get(key, 0.0), val)
    family_ok = all(v <= cfg.family_tol for v in fam_max.values())

    pts = random_jacobian_points(cfg.n_jacobian, cfg.seed)
    rel = []
    for rho, th, t, a in pts:
        num, cf = jacobian_rank_check(rho, th, t, a)
        rel.append(abs(num - cf) / abs(cf))
    max_rel = float(max(rel))

    factor = cfg.mc_factor()
    mu_i22 = assemble_matrix_ball(phi_i22_rif(), alpha, cfg.n_samples, cfg.seed, workers=cfg.workers)
    mu_det = assemble_matrix_ball(det_2x2(), alpha, cfg.n_samples, cfg.seed, workers=cfg.workers)
    i22 = {}
    for k, name in enumerate(ENTRY_NAMES):
        i22[f"conj({name})"] = [gram_residual(mu_i22, k, N).residual for N in range(1, cfg.max_degree + 1)]
    adj = adjugate_identity_probe(mu_det, alpha)
    i22_min = min(min(v) for v in i22.values())
    det_max = max(adj.gram.values())
    checks = {
        "innerness": scan.violations == 0,
        "interior_bound": interior.max_abs <= 2,
        "torus_family": family_ok,
        "jacobian": max_rel <= cfg.jacobian_tol,
        "density_i22": i22_min >= cfg.i22_threshold / factor,
        "density_det": det_max <= cfg.det_threshold * factor,
    }
    return {
        "innerness": asdict(scan),
        "interior_bound": asdict(interior),
        "torus_family": {
            "x1": [_cplx(x) for x in cfg.x1_values],
            "alpha": _cplx(alpha),
            "n_gamma": cfg.n_gamma,
            "max_residuals": fam_max,
        },
        "jacobian": {"points": len(pts), "max_rel_err": max_rel},
        "density": {
            "n_samples": cfg.n_samples,
            "phi_i22_residuals": i22,
            "det_residuals": adj.gram,
            "det_pointwise": adj.pointwise,
            "thresholds": {
                "phi_i22_min": cfg.i22_threshold / factor,
                "det_max": cfg.det_threshold * factor,
            },
        },
        "checks": checks,
    }
