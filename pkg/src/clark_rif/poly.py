"""Sparse multivariate and dense univariate complex polynomials."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

COEFF_FLOOR = 1e-14


class PolynomialFormatError(ValueError):
    """Raised when a polynomial literal cannot be parsed."""


def _clean(terms: Mapping[tuple, complex], nvars: int, floor: float) -> dict:
    out = {}
    for exp, c in terms.items():
        exp = tuple(int(e) for e in exp)
        if len(exp) != nvars:
            raise ValueError(f"exponent {exp} does not have length {nvars}")
        if any(e < 0 for e in exp):
            raise ValueError(f"negative exponent in {exp}")
        c = complex(c)
        if abs(c) > floor:
            out[exp] = out.get(exp, 0) + c
    return {e: c for e, c in sorted(out.items()) if abs(c) > floor}


@dataclass(frozen=True, eq=False)
class MultiPoly:
    """Polynomial in ``nvars`` complex variables, stored as ``{exponent: coeff}``.

    Coefficients with magnitude at or below :data:`COEFF_FLOOR` are dropped on
    construction, so the zero polynomial has no terms.
    """

    nvars: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.nvars < 1:
            raise ValueError("nvars must be positive")
        object.__setattr__(self, "terms", _clean(self.terms, self.nvars, COEFF_FLOOR))

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, c: complex, nvars: int) -> MultiPoly:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, j: int, nvars: int) -> MultiPoly:
        exp = [0] * nvars
        exp[j] = 1
        return cls(nvars, {tuple(exp): 1.0})

    @classmethod
    def monomial(cls, exp: Iterable[int], c: complex = 1.0) -> MultiPoly:
        exp = tuple(exp)
        return cls(len(exp), {exp: c})

    @classmethod
    def from_json(cls, obj) -> MultiPoly:
        """Parse ``{"nvars": n, "terms": [{"exp": [...], "re": x, "im": y}]}``.

        ``obj`` may be a dict or a JSON string.
        """
        if isinstance(obj, str):
            try:
                obj = json.loads(obj)
            except json.JSONDecodeError as exc:
                raise PolynomialFormatError(
                    f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
                ) from exc
        if not isinstance(obj, dict) or "nvars" not in obj or "terms" not in obj:
            raise PolynomialFormatError("polynomial literal needs 'nvars' and 'terms'")
        nvars = obj["nvars"]
        if not isinstance(nvars, int) or nvars < 1:
            raise PolynomialFormatError(f"'nvars' must be a positive integer, got {nvars!r}")
        terms = {}
        for i, t in enumerate(obj["terms"]):
            try:
                exp = tuple(t["exp"])
                c = complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
            except (KeyError, TypeError, ValueError) as exc:
                raise PolynomialFormatError(f"terms[{i}]: malformed term {t!r}") from exc
            if len(exp) != nvars or not all(isinstance(e, int) and e >= 0 for e in exp):
                raise PolynomialFormatError(
                    f"terms[{i}]: exponent {list(exp)} must be {nvars} nonnegative integers"
                )
            terms[exp] = terms.get(exp, 0) + c
        return cls(nvars, terms)

    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "terms": [
                {"exp": list(e), "re": c.real, "im": c.imag} for e, c in self.terms.items()
            ],
        }

    # -- basic queries ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> float:
        """Total degree; ``-inf`` for the zero polynomial."""
        if not self.terms:
            return float("-inf")
        return max(sum(e) for e in self.terms)

    def degree_in(self, j: int) -> int:
        if not self.terms:
            return -1
        return max(e[j] for e in self.terms)

    def coeff_norm(self) -> float:
        return float(sum(abs(c) for c in self.terms.values()))

    def __repr__(self) -> str:
        if not self.terms:
            return "MultiPoly(0)"
        parts = []
        for e, c in self.terms.items():
            mono = "*".join(
                f"z{j + 1}" + (f"^{k}" if k > 1 else "") for j, k in enumerate(e) if k
            )
            parts.append(f"({c:.6g})" + (f"*{mono}" if mono else ""))
        return "MultiPoly(" + " + ".join(parts) + ")"

    def equals(self, other: MultiPoly, tol: float = 0.0) -> bool:
        diff = self - other
        return all(abs(c) <= tol for c in diff.terms.values())

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: MultiPoly):
        if other.nvars != self.nvars:
            raise ValueError(f"nvars mismatch: {self.nvars} vs {other.nvars}")

    def _coerce(self, other) -> MultiPoly:
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        return MultiPoly.constant(other, self.nvars)

    def __add__(self, other) -> MultiPoly:
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return MultiPoly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> MultiPoly:
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> MultiPoly:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> MultiPoly:
        return self._coerce(other) - self

    def __mul__(self, other) -> MultiPoly:
        if not isinstance(other, MultiPoly):
            return MultiPoly(self.nvars, {e: c * other for e, c in self.terms.items()})
        self._check(other)
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return MultiPoly(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> MultiPoly:
        out = MultiPoly.constant(1.0, self.nvars)
        for _ in range(k):
            out = out * self
        return out

    # -- evaluation ---------------------------------------------------------
    def __call__(self, z) -> complex | np.ndarray:
        return evaluate(self, z)

    def derivative(self, j: int) -> MultiPoly:
        terms = {}
        for e, c in self.terms.items():
            if e[j]:
                d = list(e)
                d[j] -= 1
                terms[tuple(d)] = c * e[j]
        return MultiPoly(self.nvars, terms)

    def scaled_argument(self, scale) -> MultiPoly:
        """Return ``z -> p(scale * z)`` (``scale`` scalar or per-variable)."""
        s = np.broadcast_to(np.asarray(scale, dtype=complex), (self.nvars,))
        return MultiPoly(
            self.nvars, {e: c * complex(np.prod(s ** np.array(e))) for e, c in self.terms.items()}
        )

    def coefficient_polys(self, j: int) -> list[MultiPoly]:
        """Coefficients of ``p`` as a polynomial in ``z_j`` (ascending powers).

        Each coefficient is a MultiPoly in the same variables with no ``z_j``.
        """
        deg = self.degree_in(j)
        buckets: list[dict] = [dict() for _ in range(max(deg, 0) + 1)]
        for e, c in self.terms.items():
            d = list(e)
            k = d[j]
            d[j] = 0
            buckets[k][tuple(d)] = c
        return [MultiPoly(self.nvars, b) for b in buckets]


def evaluate(p: MultiPoly, z) -> complex | np.ndarray:
    """Evaluate ``p`` at ``z`` (shape ``(..., nvars)``) by nested Horner in z_1, z_2, ...

    Terms are visited in sorted exponent order, so the summation order is fixed.
    """
    z = np.asarray(z, dtype=complex)
    if z.shape[-1:] != (p.nvars,):
        raise ValueError(f"point has {z.shape[-1] if z.ndim else 0} coordinates, expected {p.nvars}")
    out = _horner(list(p.terms.items()), z, 0)
    if out.ndim == 0:
        return complex(out)
    return out


def _horner(items: list, z: np.ndarray, j: int) -> np.ndarray:
    shape = z.shape[:-1]
    if not items:
        return np.zeros(shape, dtype=complex)
    if j == z.shape[-1]:
        return np.full(shape, sum(c for _, c in items), dtype=complex)
    by_power: dict[int, list] = {}
    for e, c in items:
        by_power.setdefault(e[j], []).append((e, c))
    top = max(by_power)
    acc = np.zeros(shape, dtype=complex)
    zj = z[..., j]
    for k in range(top, -1, -1):
        acc = acc * zj
        if k in by_power:
            acc = acc + _horner(by_power[k], z, j + 1)
    return acc


def gradient(p: MultiPoly) -> list[MultiPoly]:
    return [p.derivative(j) for j in range(p.nvars)]


def split_in_variable(p: MultiPoly, j: int) -> tuple[MultiPoly, MultiPoly]:
    """Write ``p = p1 + z_j * p2`` with ``p1`` free of ``z_j``."""
    if not 0 <= j < p.nvars:
        raise IndexError(f"variable index {j} out of range for nvars={p.nvars}")
    p1, p2 = {}, {}
    for e, c in p.terms.items():
        if e[j] == 0:
            p1[e] = c
        else:
            d = list(e)
            d[j] -= 1
            p2[tuple(d)] = c
    return MultiPoly(p.nvars, p1), MultiPoly(p.nvars, p2)


def restrict_to_fibers(p: MultiPoly, zetas) -> np.ndarray:
    """Coefficient rows of ``w -> p(w * zeta)`` for many ``zeta`` at once.

    Returns an array of shape ``(F, deg + 1)`` (ascending powers of ``w``).
    """
    zetas = np.atleast_2d(np.asarray(zetas, dtype=complex))
    if zetas.shape[1] != p.nvars:
        raise ValueError(f"fiber point has {zetas.shape[1]} coordinates, expected {p.nvars}")
    deg = int(max(p.degree, 0))
    out = np.zeros((zetas.shape[0], deg + 1), dtype=complex)
    for e, c in p.terms.items():
        out[:, sum(e)] += c * np.prod(zetas ** np.array(e), axis=1)
    return out


def restrict_to_fiber(p: MultiPoly, zeta) -> UniPoly:
    return UniPoly(restrict_to_fibers(p, np.asarray(zeta, dtype=complex)[None, :])[0])


def coefficients_in_variable(p: MultiPoly, j: int, others) -> np.ndarray:
    """Rows of coefficients of ``z_j -> p(z)`` with the other variables fixed.

    ``others`` has shape ``(F, nvars)``; its column ``j`` is ignored.
    """
    others = np.atleast_2d(np.asarray(others, dtype=complex))
    deg = max(p.degree_in(j), 0)
    out = np.zeros((others.shape[0], deg + 1), dtype=complex)
    for e, c in p.terms.items():
        rest = np.array(e)
        rest[j] = 0
        out[:, e[j]] += c * np.prod(others ** rest, axis=1)
    return out


@dataclass(frozen=True, eq=False)
class UniPoly:
    """Dense univariate polynomial, ascending coefficients, trailing zeros trimmed."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        nz = np.nonzero(np.abs(c) > 0)[0]
        c = c[: nz[-1] + 1] if nz.size else c[:0]
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_roots(cls, roots, lead: complex = 1.0) -> UniPoly:
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(c)

    @property
    def degree(self) -> float:
        return len(self.coeffs) - 1 if len(self.coeffs) else float("-inf")

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        acc = np.zeros_like(w)
        for c in self.coeffs[::-1]:
            acc = acc * w + c
        return complex(acc) if acc.ndim == 0 else acc

    def derivative(self) -> UniPoly:
        return UniPoly(self.coeffs[1:] * np.arange(1, len(self.coeffs)))

    def __add__(self, other) -> UniPoly:
        other = other if isinstance(other, UniPoly) else UniPoly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, complex)
        a[: len(self.coeffs)] += self.coeffs
        a[: len(other.coeffs)] += other.coeffs
        return UniPoly(a)

    def __neg__(self) -> UniPoly:
        return UniPoly(-self.coeffs)

    def __sub__(self, other) -> UniPoly:
        other = other if isinstance(other, UniPoly) else UniPoly([other])
        return self + (-other)

    def __mul__(self, other) -> UniPoly:
        if isinstance(other, UniPoly):
            if self.is_zero() or other.is_zero():
                return UniPoly([])
            return UniPoly(np.convolve(self.coeffs, other.coeffs))
        return UniPoly(self.coeffs * other)

    __rmul__ = __mul__

    def monic(self) -> UniPoly:
        return UniPoly(self.coeffs / self.coeffs[-1])

    def __repr__(self) -> str:
        return f"UniPoly({np.array2string(self.coeffs, precision=6)})"
