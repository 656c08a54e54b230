"""Rational inner functions on the polydisc and on the 2x2 matrix ball."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .poly import MultiPoly, gradient

POLYDISC = "polydisc"
MATRIX_BALL = "matrix_ball_2x2"
DOMAINS = (POLYDISC, MATRIX_BALL)

MIN_Q_HARD = 1e-10
INNER_TOL = 1e-6
SINGULAR_Q_REL = 1e-6


class NotInnerError(ValueError):
    """The pair (p, q) failed the sampled innerness certificate."""


def torus_volume(n: int) -> float:
    """Hausdorff n-measure of the n-torus with unit cubes of measure one."""
    return (2 * math.pi) ** n


@dataclass(frozen=True)
class InnernessCertificate:
    max_deviation: float  # max ||phi| - 1| on boundary samples off the singular set
    min_abs_q: float  # min |q| over closed-domain samples
    n_boundary: int
    n_excluded: int  # boundary samples dropped as near the singular set
    n_closure: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def haar_unitaries(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar-distributed 2x2 unitaries, shape (n, 2, 2).

    QR of a standard complex Gaussian matrix with the phases of diag(R)
    absorbed into Q.
    """
    g = (rng.standard_normal((n, 2, 2)) + 1j * rng.standard_normal((n, 2, 2))) / math.sqrt(2)
    qm, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=1, axis2=2)
    ph = d / np.abs(d)
    return qm * ph[:, None, :]


def _torus_grid(n: int, per_dim: int) -> np.ndarray:
    ang = 2 * np.pi * (np.arange(per_dim) + 0.5) / per_dim
    mesh = np.meshgrid(*([ang] * n), indexing="ij")
    return np.exp(1j * np.stack([m.ravel() for m in mesh], axis=1))


def _closed_polydisc_sample(n: int, rng: np.random.Generator) -> np.ndarray:
    if n <= 2:
        rad = np.linspace(0.0, 1.0, 9)
        ang = 2 * np.pi * (np.arange(24) + 0.5) / 24
        one = (rad[:, None] * np.exp(1j * ang)[None, :]).ravel()
        mesh = np.meshgrid(*([one] * n), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)
    m = 40000
    rad = np.sqrt(rng.uniform(size=(m, n)))
    rad[: m // 2] = np.where(rng.uniform(size=(m // 2, n)) < 0.5, 1.0, rad[: m // 2])
    return rad * np.exp(2j * np.pi * rng.uniform(size=(m, n)))


@dataclass(frozen=True, eq=False)
class RationalInnerFn:
    """phi = p / q, holomorphic on the domain with unimodular boundary values.

    For the matrix ball the four variables are the entries (a, b, c, d) of
    a 2x2 matrix in row-major order.
    """

    p: MultiPoly
    q: MultiPoly
    domain: str = POLYDISC
    certificate: InnernessCertificate | None = None

    @classmethod
    def create(
        cls, p: MultiPoly, q: MultiPoly, domain: str = POLYDISC, validate: bool = True, seed: int = 0
    ) -> RationalInnerFn:
        if domain not in DOMAINS:
            raise ValueError(f"unknown domain {domain!r}; expected one of {DOMAINS}")
        if p.nvars != q.nvars:
            raise ValueError("p and q must have the same number of variables")
        if domain == MATRIX_BALL and p.nvars != 4:
            raise ValueError("matrix_ball_2x2 needs nvars = 4 (entries a, b, c, d)")
        if q.is_zero():
            raise ValueError("q must be nonzero")
        phi = cls(p, q, domain)
        if not validate:
            return phi
        cert = phi.innerness_certificate(np.random.default_rng(seed))
        if cert.min_abs_q < MIN_Q_HARD:
            raise NotInnerError(f"q vanishes on the closed domain (min |q| = {cert.min_abs_q:.2e})")
        if cert.max_deviation > INNER_TOL:
            raise NotInnerError(f"| |phi| - 1 | reaches {cert.max_deviation:.2e} on the boundary")
        return cls(p, q, domain, cert)

    @property
    def nvars(self) -> int:
        return self.p.nvars

    @property
    def degree(self) -> int:
        return int(max(self.p.degree, self.q.degree))

    @property
    def scale(self) -> float:
        return self.p.coeff_norm() + self.q.coeff_norm()

    @cached_property
    def _grads(self):
        return gradient(self.p), gradient(self.q)

    def __call__(self, z):
        return self.p(z) / self.q(z)

    def grad(self, z) -> np.ndarray:
        """Complex gradient (d phi / d z_j)_j at ``z`` (shape (..., nvars))."""
        z = np.asarray(z, dtype=complex)
        gp, gq = self._grads
        pv, qv = self.p(z), self.q(z)
        cols = [(a(z) * qv - pv * b(z)) / qv**2 for a, b in zip(gp, gq)]
        return np.stack(cols, axis=-1)

    def grad_norm(self, z) -> np.ndarray:
        return np.linalg.norm(self.grad(z), axis=-1)

    def scaled(self, c: complex) -> RationalInnerFn:
        """Same function written as (c p) / (c q)."""
        return RationalInnerFn(self.p * c, self.q * c, self.domain, self.certificate)

    def boundary_sample(self, rng: np.random.Generator, n: int = 4096) -> np.ndarray:
        if self.domain == POLYDISC:
            per = max(4, int(round(n ** (1.0 / self.nvars))))
            return _torus_grid(self.nvars, per)
        return haar_unitaries(n, rng).reshape(n, 4)

    def innerness_certificate(self, rng: np.random.Generator) -> InnernessCertificate:
        bnd = self.boundary_sample(rng, 4096 if self.nvars <= 2 else 20000)
        qv = self.q(bnd)
        off = np.abs(qv) > SINGULAR_Q_REL * self.q.coeff_norm()
        dev = np.abs(np.abs(self.p(bnd[off]) / qv[off]) - 1.0)
        if self.domain == POLYDISC:
            clo = _closed_polydisc_sample(self.nvars, rng)
        else:
            u = haar_unitaries(4000, rng)
            v = haar_unitaries(4000, rng)
            s = rng.uniform(size=(4000, 2))
            s[:1000] = 1.0
            clo = np.einsum("nij,nj,njk->nik", u, s, v).reshape(-1, 4)
        return InnernessCertificate(
            max_deviation=float(dev.max()) if dev.size else 0.0,
            min_abs_q=float(np.abs(self.q(clo)).min()),
            n_boundary=len(bnd),
            n_excluded=int((~off).sum()),
            n_closure=len(clo),
        )

    def to_json(self) -> dict:
        out = {"p": self.p.to_json(), "q": self.q.to_json(), "domain": self.domain}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict, validate: bool = True) -> RationalInnerFn:
        p = MultiPoly.from_json(obj["p"])
        q = MultiPoly.from_json(obj["q"]) if "q" in obj else MultiPoly.constant(1.0, p.nvars)
        return cls.create(p, q, obj.get("domain", POLYDISC), validate=validate)
