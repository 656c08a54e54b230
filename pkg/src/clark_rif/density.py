"""Is H^2(mu_alpha) all of L^2(mu_alpha)?

Two independent routes. The algebraic one looks for a full cylinder
``{zeta : zeta_k = c}`` (|c| = 1) inside the level set, detected as a
unimodular root of the content of ``p - alpha q`` in one variable. The
numerical one fits conjugate coordinates by holomorphic polynomials in
L^2(mu_alpha) and reports the residual.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .measure import SampledClarkMeasure
from .poly import MultiPoly, UniPoly, split_in_variable
from .rif import MATRIX_BALL, POLYDISC, RationalInnerFn, _closed_polydisc_sample
from .roots import TOL_CIRCLE, TOL_RANK, all_roots, as_unipoly, content_in_variable, roots_on_circle

GRAM_CUTOFF = 1e-10
PSD_TOL = 1e-10
RJ_TOL = 1e-8
RJ_PASS_RATE = 0.99
DENSE_RESIDUAL = 1e-3
NOT_DENSE_RESIDUAL = 0.1


def _cplx(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


# -- algebraic obstruction ----------------------------------------------------


@dataclass(frozen=True)
class VariableVerdict:
    j: int  # 0-based variable in which the content is taken
    content: MultiPoly
    content_roots: np.ndarray
    triggers: bool

    def to_json(self) -> dict:
        return {
            "j": self.j + 1,
            "content": self.content.to_json(),
            "content_roots": [_cplx(r) for r in self.content_roots],
            "triggers": self.triggers,
        }


@dataclass(frozen=True)
class ObstructionVerdict:
    alpha: complex
    per_variable: tuple[VariableVerdict, ...]

    @property
    def prediction(self) -> str:
        return "not_dense" if any(v.triggers for v in self.per_variable) else "dense"

    @property
    def dense(self) -> bool:
        return self.prediction == "dense"


def level_polynomial(phi: RationalInnerFn, alpha: complex) -> MultiPoly:
    return phi.p - complex(alpha) * phi.q


def obstruction_detect(
    phi: RationalInnerFn, alpha: complex, tol_rank: float = TOL_RANK, tol_circle: float = TOL_CIRCLE
) -> ObstructionVerdict:
    """Cylinder test on the bidisc.

    The content of h = p - alpha q in z_j is a polynomial in the other
    variable alone; each unimodular root c of it puts the whole circle
    ``{z_other = c}`` inside the level set.
    """
    if phi.domain != POLYDISC or phi.nvars != 2:
        raise NotImplementedError("obstruction_detect supports bivariate polydisc functions only")
    h = level_polynomial(phi, alpha)
    if h.is_zero():
        raise ValueError("p - alpha q vanishes identically (phi is the constant alpha)")
    verdicts = []
    for j in range(2):
        content = content_in_variable(h, j, tol_rank)
        if content.degree >= 1:
            roots = roots_on_circle(as_unipoly(content, 1 - j), tol_circle=tol_circle).roots
        else:
            roots = np.zeros(0, complex)
        verdicts.append(VariableVerdict(j, content, roots, bool(len(roots))))
    return ObstructionVerdict(complex(alpha), tuple(verdicts))


# -- explicit conjugate of a coordinate -----------------------------------------


class RjConstructionError(ValueError):
    def __init__(self, msg: str, witness=None):
        super().__init__(msg if witness is None else f"{msg}; witness {np.round(witness, 12).tolist()}")
        self.witness = witness


@dataclass(frozen=True, eq=False)
class RjFunction:
    """Rational function equal to conj(zeta_j) on the level set.

    Writing p = p1 + z_j p2 and q = q1 + z_j q2 with p1, q1 free of z_j gives
    ``(alpha q2 - p2) / (p1 - alpha q1)``, which is 1/zeta_j = conj(zeta_j)
    wherever p = alpha q on the torus.
    """

    j: int
    alpha: complex
    numerator: MultiPoly
    denominator: MultiPoly
    zero_distance: float  # distance from the denominator's zero set to the closed polydisc
    validation_pass_rate: float = float("nan")
    n_validated: int = 0

    @property
    def k(self) -> int:
        return int(max(self.denominator.degree, 0))

    @property
    def eps(self) -> float:
        return min(1.0, self.zero_distance)

    def __call__(self, z) -> np.ndarray:
        return self.numerator(z) / self.denominator(z)

    def ray(self, z, rho: float) -> np.ndarray:
        """Numerator at z over the denominator pulled in to rho z."""
        z = np.asarray(z, dtype=complex)
        return self.numerator(z) / self.denominator(rho * z)

    def to_json(self) -> dict:
        return {
            "j": self.j + 1,
            "numerator": self.numerator.to_json(),
            "denominator": self.denominator.to_json(),
            "k": self.k,
            "zero_distance": self.zero_distance,
            "validation_pass_rate": self.validation_pass_rate,
            "n_validated": self.n_validated,
        }


def _denominator_zero_distance(den: MultiPoly, j: int) -> float:
    """Distance from the zero set of ``den`` (free of z_j) to the closed polydisc.

    Raises with a witness when the zero set meets the closed polydisc.
    """
    if den.is_zero():
        raise RjConstructionError("denominator vanishes identically")
    if den.degree < 1:
        return float("inf")
    if den.nvars == 2:
        roots = all_roots(as_unipoly(den, 1 - j))
        inside = np.abs(roots) <= 1 + 1e-12
        if inside.any():
            w = np.zeros(2, complex)
            w[1 - j] = roots[inside][0]
            raise RjConstructionError("denominator vanishes on the closed polydisc", w)
        return float(np.min(np.abs(roots)) - 1)
    # no root solver in several variables: sample instead and report a lower bound of 0
    pts = _closed_polydisc_sample(den.nvars, np.random.default_rng(0))
    vals = np.abs(den(pts))
    k = int(np.argmin(vals))
    if vals[k] <= 1e-10 * den.coeff_norm():
        raise RjConstructionError("denominator vanishes on the sampled closed polydisc", pts[k])
    return 0.0


def build_rj(
    phi: RationalInnerFn,
    alpha: complex,
    j: int,
    points: np.ndarray | None = None,
    n_theta: int = 2048,
    tol: float = RJ_TOL,
) -> RjFunction:
    """Construct r_j and check it against conj(zeta_j) on level-set points.

    ``points`` defaults to a trace of the level set with ``n_theta`` angles.
    """
    if phi.domain != POLYDISC:
        raise ValueError("build_rj needs a polydisc function")
    alpha = complex(alpha)
    p1, p2 = split_in_variable(phi.p, j)
    q1, q2 = split_in_variable(phi.q, j)
    num, den = alpha * q2 - p2, p1 - alpha * q1
    dist = _denominator_zero_distance(den, j)
    r = RjFunction(j, alpha, num, den, dist)
    if points is None:
        from .coarea import trace_level_set

        points = trace_level_set(phi, alpha, n_theta).points
    points = np.asarray(points, dtype=complex)
    if len(points) == 0:
        raise RjConstructionError("no level-set points to validate against")
    err = np.abs(r(points) - np.conj(points[:, j]))
    rate = float(np.mean(err <= tol))
    r = RjFunction(j, alpha, num, den, dist, rate, len(points))
    if rate < RJ_PASS_RATE:
        worst = int(np.argmax(err))
        raise RjConstructionError(
            f"r_{j + 1} matches conj(zeta_{j + 1}) on only {rate:.1%} of level-set points", points[worst]
        )
    return r


@dataclass(frozen=True)
class RayBoundReport:
    eps: float
    k: int
    rhos: tuple[float, ...]
    sup_ratio: tuple[float, ...]
    bound: float
    bound_holds: bool
    literal_bound: float  # 2^{-k}, recorded for comparison only
    literal_bound_holds: bool
    l2_distance: tuple[float, ...]
    monotone: bool

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "k": self.k,
            "rho": list(self.rhos),
            "sup_ratio": list(self.sup_ratio),
            "bound": self.bound,
            "bound_holds": self.bound_holds,
            "literal_bound": self.literal_bound,
            "literal_bound_holds": self.literal_bound_holds,
            "l2_distance": list(self.l2_distance),
            "monotone": self.monotone,
        }


def rj_ray_bound_check(
    r: RjFunction,
    rhos=(0.9, 0.99, 0.999),
    mu: SampledClarkMeasure | None = None,
    points: np.ndarray | None = None,
) -> RayBoundReport:
    """Compare r_{j,rho} with r_j on the support of mu (or on bare points).

    The sup of |r_{j,rho}| / |r_j| is checked against (2/eps)^k. L^2 distances
    need mu; with bare points they are root-mean-square over the points.
    """
    if mu is not None:
        points, w = mu.points, mu.mass_weights
    elif points is not None:
        points = np.asarray(points, dtype=complex)
        w = np.full(len(points), 1.0 / len(points))
    else:
        raise ValueError("rj_ray_bound_check needs mu or points")
    if not r.eps > 0:
        raise ValueError("zero set of the denominator touches the closed polydisc; no bound applies")
    base = r(points)
    sup, dist = [], []
    for rho in rhos:
        ray = r.ray(points, rho)
        nz = np.abs(base) > 0
        sup.append(float(np.max(np.abs(ray[nz]) / np.abs(base[nz]))) if nz.any() else 1.0)
        dist.append(float(np.sqrt(np.sum(w * np.abs(ray - base) ** 2))))
    bound = (2 / r.eps) ** r.k
    literal = 2.0 ** (-r.k)
    return RayBoundReport(
        eps=r.eps,
        k=r.k,
        rhos=tuple(float(x) for x in rhos),
        sup_ratio=tuple(sup),
        bound=bound,
        bound_holds=all(s <= bound * (1 + 1e-12) for s in sup),
        literal_bound=literal,
        literal_bound_holds=all(s <= literal * (1 + 1e-12) for s in sup),
        l2_distance=tuple(dist),
        monotone=all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(dist, dist[1:])),
    )


# -- polynomial lower bound along [0, 1] -------------------------------------


class LemmaPreconditionError(ValueError):
    def __init__(self, witness: complex):
        super().__init__(f"polynomial vanishes at {complex(witness):.6g}, inside the hull of B(0, eps) and 1")
        self.witness = witness


def hull_gauge(z, eps: float) -> np.ndarray:
    """True where z lies in the convex hull of the closed disc B(0, eps) and the point 1.

    z is in the hull iff z = t + (1 - t) u with t in [0, 1] and |u| <= eps,
    i.e. iff min over t of |z - t| / (1 - t) <= eps. With s = 1 / (1 - t) the
    squared ratio is a quadratic in s on [1, inf), minimized in closed form.
    """
    z = np.asarray(z, dtype=complex)
    d2 = np.abs(z - 1) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.maximum(1.0, (1 - z.real) / d2)
    g2 = 1 + 2 * (z.real - 1) * s + d2 * s**2
    return np.where(d2 == 0, True, g2 <= eps**2 + 1e-15)


@dataclass(frozen=True)
class LemmaResult:
    min_ratio: float
    bound: float
    k: int
    eps: float

    @property
    def holds(self) -> bool:
        return self.min_ratio >= self.bound * (1 - 1e-12)


def lemma_lower_bound_test(p: UniPoly, eps: float, n_x: int = 10_000) -> LemmaResult:
    """min over a uniform grid on [0, 1] of |p(x)| / |p(1)| against (eps/2)^k."""
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if p.is_zero():
        raise ValueError("p must be nonzero")
    k = int(p.degree)
    if k >= 1:
        roots = all_roots(p)
        inside = hull_gauge(roots, eps)
        if inside.any():
            raise LemmaPreconditionError(roots[inside][0])
    x = np.linspace(0.0, 1.0, n_x)
    ratio = float(np.min(np.abs(p(x))) / abs(p(1.0)))
    return LemmaResult(ratio, (eps / 2) ** k, k, eps)


# -- least-squares fit of conjugate targets -----------------------------------


class GramError(RuntimeError):
    """Gram matrix is not positive semidefinite within tolerance."""


def monomial_exponents(nvars: int, N: int, domain: str = POLYDISC) -> list[tuple[int, ...]]:
    """Box degree <= N per variable on the polydisc, total degree <= N on the matrix ball."""
    if domain == MATRIX_BALL:
        exps = [e for e in itertools.product(range(N + 1), repeat=nvars) if sum(e) <= N]
        return sorted(exps, key=lambda e: (sum(e), tuple(-x for x in e)))
    return list(itertools.product(range(N + 1), repeat=nvars))


def design_matrix(points: np.ndarray, exps) -> np.ndarray:
    points = np.asarray(points, dtype=complex)
    N = max(max(e) for e in exps)
    powers = points[:, :, None] ** np.arange(N + 1)  # (M, n, N+1)
    cols = [np.prod(powers[:, np.arange(points.shape[1]), list(e)], axis=1) for e in exps]
    return np.stack(cols, axis=1)


Target = int | Callable[[np.ndarray], np.ndarray]


def target_name(target: Target) -> str:
    if isinstance(target, (int, np.integer)):
        return f"conj(z{int(target) + 1})"
    return getattr(target, "__name__", "custom")


def target_values(target: Target, points: np.ndarray) -> np.ndarray:
    if isinstance(target, (int, np.integer)):
        return np.conj(points[:, int(target)])
    return np.broadcast_to(np.asarray(target(points), dtype=complex), points.shape[:1])


@dataclass(frozen=True, eq=False)
class GramSystem:
    exponents: list
    gram: np.ndarray
    moments: np.ndarray  # <target, z^gamma> in L^2(mu)
    target_norm2: float
    coeffs: np.ndarray
    residual: float
    rank: int
    target: str = ""
    N: int = 0

    def to_json(self) -> dict:
        return {"target": self.target, "N": self.N, "residual": self.residual}


def gram_residual(
    mu: SampledClarkMeasure, target: Target, N: int, cutoff: float = GRAM_CUTOFF
) -> GramSystem:
    """Distance in L^2(mu) from ``target`` to polynomials of degree N.

    Solves the normal equations through an eigendecomposition of the Gram
    matrix, dropping eigenvalues below ``cutoff`` times the largest.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    exps = monomial_exponents(mu.nvars, N, mu.domain)
    A = design_matrix(mu.points, exps)
    w = mu.mass_weights
    t = target_values(target, mu.points)
    Aw = A * w[:, None]
    G = Aw.conj().T @ A
    G = (G + G.conj().T) / 2
    b = Aw.conj().T @ t
    tt = float(np.sum(w * np.abs(t) ** 2))
    lam, V = np.linalg.eigh(G)
    top = max(float(lam[-1]), 0.0)
    if lam[0] < -PSD_TOL * max(top, 1.0):
        raise GramError(f"Gram matrix has eigenvalue {lam[0]:.3e} (largest {top:.3e})")
    keep = lam > cutoff * top
    proj = V[:, keep].conj().T @ b
    c = V[:, keep] @ (proj / lam[keep])
    # ||t||^2 - 2 Re(c^H b) + c^H G c, summed as sum w |t - A c|^2 to avoid cancellation
    r2 = float(np.sum(w * np.abs(t - A @ c) ** 2))
    return GramSystem(
        exponents=exps,
        gram=G,
        moments=b,
        target_norm2=tt,
        coeffs=c,
        residual=float(np.sqrt(max(r2, 0.0))),
        rank=int(keep.sum()),
        target=target_name(target),
        N=N,
    )


# -- report ------------------------------------------------------------------


@dataclass
class DensityReport:
    alpha: complex
    verdict: ObstructionVerdict
    residuals: list[GramSystem] = field(default_factory=list)
    rj: list[RjFunction] = field(default_factory=list)
    rj_errors: list[str] = field(default_factory=list)
    dense_residual: float = DENSE_RESIDUAL
    not_dense_residual: float = NOT_DENSE_RESIDUAL

    @property
    def prediction(self) -> str:
        return self.verdict.prediction

    def max_residual(self, N: int | None = None) -> float:
        vals = [g.residual for g in self.residuals if N is None or g.N == N]
        return max(vals) if vals else float("nan")

    def consistent(self, N: int) -> bool:
        """Verdict agrees with the residual dichotomy at degree N."""
        m = self.max_residual(N)
        if self.verdict.dense:
            return m <= self.dense_residual
        return m >= self.not_dense_residual

    def to_json(self) -> dict:
        out = {
            "alpha": _cplx(self.alpha),
            "prediction": self.prediction,
            "per_variable": [v.to_json() for v in self.verdict.per_variable],
            "residuals": [g.to_json() for g in self.residuals],
        }
        if self.rj:
            out["rj"] = self.rj[0].to_json() if len(self.rj) == 1 else [r.to_json() for r in self.rj]
        if self.rj_errors:
            out["rj_errors"] = list(self.rj_errors)
        return out


def density_report(
    phi: RationalInnerFn,
    alpha: complex,
    mu: SampledClarkMeasure,
    degrees=(6,),
    tol_rank: float = TOL_RANK,
    tol_circle: float = TOL_CIRCLE,
    n_theta: int = 2048,
) -> DensityReport:
    verdict = obstruction_detect(phi, alpha, tol_rank, tol_circle)
    rep = DensityReport(complex(alpha), verdict)
    for N in degrees:
        for j in range(phi.nvars):
            rep.residuals.append(gram_residual(mu, j, N))
    if verdict.dense:
        from .coarea import trace_level_set

        pts = trace_level_set(phi, alpha, n_theta).points
        for j in range(phi.nvars):
            try:
                rep.rj.append(build_rj(phi, alpha, j, points=pts))
            except RjConstructionError as exc:
                rep.rj_errors.append(f"j={j + 1}: {exc}")
    return rep
