"""Standard rational inner functions used by the checks and the CLI."""
from __future__ import annotations

import cmath

from .poly import MultiPoly
from .rif import MATRIX_BALL, POLYDISC, RationalInnerFn

BLASCHKE_ZERO = 0.25


def _z(j: int, n: int) -> MultiPoly:
    return MultiPoly.variable(j, n)


def _one(n: int) -> MultiPoly:
    return MultiPoly.constant(1.0, n)


def coordinate(j: int, n: int = 2) -> RationalInnerFn:
    return RationalInnerFn.create(_z(j, n), _one(n))


def monomial(exp) -> RationalInnerFn:
    exp = tuple(exp)
    return RationalInnerFn.create(MultiPoly.monomial(exp), _one(len(exp)))


def rif_11() -> RationalInnerFn:
    """(2 z1 z2 - z1 - z2) / (2 - z1 - z2), singular at (1, 1)."""
    z1, z2 = _z(0, 2), _z(1, 2)
    return RationalInnerFn.create(2 * z1 * z2 - z1 - z2, 2 - z1 - z2)


def z1_blaschke_z2(a: complex = BLASCHKE_ZERO) -> RationalInnerFn:
    """z1 * (z2 - a) / (1 - conj(a) z2)."""
    z1, z2 = _z(0, 2), _z(1, 2)
    return RationalInnerFn.create(z1 * (z2 - a), 1 - a.conjugate() * z2)


def rotate_first(phi: RationalInnerFn, tau: float) -> RationalInnerFn:
    """z -> phi(e^{i tau} z1, z2, ...)."""
    s = [1.0] * phi.nvars
    s[0] = cmath.exp(1j * tau)
    return RationalInnerFn(phi.p.scaled_argument(s), phi.q.scaled_argument(s), phi.domain)


def det_2x2() -> RationalInnerFn:
    a, b, c, d = (_z(j, 4) for j in range(4))
    return RationalInnerFn.create(a * d - b * c, _one(4), MATRIX_BALL)


def phi_i22() -> RationalInnerFn:
    """(ad - bc - d) / (1 - a) on the 2x2 matrix ball."""
    a, b, c, d = (_z(j, 4) for j in range(4))
    return RationalInnerFn.create(a * d - b * c - d, 1 - a, MATRIX_BALL)


def named(name: str) -> RationalInnerFn:
    table = {
        "z1": lambda: coordinate(0),
        "z2": lambda: coordinate(1),
        "z1z2": lambda: monomial((1, 1)),
        "z1^2z2": lambda: monomial((2, 1)),
        "rif11": rif_11,
        "z1*blaschke(z2)": z1_blaschke_z2,
        "det": det_2x2,
        "phi_i22": phi_i22,
    }
    if name not in table:
        raise KeyError(f"unknown function {name!r}; known: {sorted(table)}")
    return table[name]()


BIDISC_TRIO = ("z1", "z1z2", "rif11")
DENSITY_CORPUS = ("z1", "z2", "z1z2", "z1^2z2", "rif11", "z1*blaschke(z2)")

__all__ = [
    "BIDISC_TRIO",
    "DENSITY_CORPUS",
    "POLYDISC",
    "coordinate",
    "det_2x2",
    "monomial",
    "named",
    "phi_i22",
    "rif_11",
    "rotate_first",
    "z1_blaschke_z2",
]
