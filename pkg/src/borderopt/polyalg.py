"""Sparse multivariate polynomials with real coefficients.

Monomials are plain tuples of non-negative exponents.  Everything that
needs a deterministic order uses :func:`mono_key`: degree first, ties
broken reverse-lexicographically, so that in two variables the listing
reads ``1, x, y, x^2, xy, y^2, x^3, ...``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

Monomial = tuple

# relative drop threshold applied after add / mul
DROP_TOL = 1e-12


class DimensionMismatch(ValueError):
    pass


def mono_degree(m: Monomial) -> int:
    return sum(m)


def mono_key(m: Monomial):
    return (sum(m), tuple(reversed(m)))


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if len(a) != len(b):
        raise DimensionMismatch(f"monomials in {len(a)} and {len(b)} variables")
    return tuple(i + j for i, j in zip(a, b))


def mono_one(nvars: int) -> Monomial:
    return (0,) * nvars


def mono_var(nvars: int, k: int) -> Monomial:
    return tuple(1 if i == k else 0 for i in range(nvars))


def mono_divides(a: Monomial, b: Monomial) -> bool:
    return all(i <= j for i, j in zip(a, b))


def monomials_of_degree(nvars: int, d: int) -> list[Monomial]:
    """All monomials of total degree exactly ``d``, in ``mono_key`` order."""
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), d):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    out.sort(key=mono_key)
    return out


def monomials_up_to(nvars: int, d: int) -> list[Monomial]:
    out = []
    for k in range(d + 1):
        out.extend(monomials_of_degree(nvars, k))
    return out


def n_monomials_up_to(nvars: int, d: int) -> int:
    return math.comb(nvars + d, d)


def _drop(terms: dict, scale: float) -> dict:
    cut = DROP_TOL * scale
    return {m: c for m, c in terms.items() if abs(c) > cut}


def _maxabs(terms: Mapping) -> float:
    return max((abs(c) for c in terms.values()), default=0.0)


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Immutable sparse polynomial ``sum c_m x^m``.

    ``terms`` never holds zero coefficients.  Build with
    :meth:`from_terms` (or the arithmetic operators) rather than mutating.
    """

    nvars: int
    terms: Mapping[Monomial, float]

    @classmethod
    def from_terms(cls, nvars: int, terms: Mapping | Iterable) -> "Polynomial":
        if not isinstance(terms, Mapping):
            acc: dict = {}
            for m, c in terms:
                m = tuple(int(e) for e in m)
                acc[m] = acc.get(m, 0.0) + float(c)
            terms = acc
        clean = {}
        for m, c in terms.items():
            m = tuple(int(e) for e in m)
            if len(m) != nvars:
                raise DimensionMismatch(f"monomial {m} in a {nvars}-variable ring")
            if c != 0:
                clean[m] = float(c)
        return cls(nvars, clean)

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c: float) -> "Polynomial":
        return cls.from_terms(nvars, {mono_one(nvars): c})

    @classmethod
    def variable(cls, nvars: int, k: int) -> "Polynomial":
        return cls(nvars, {mono_var(nvars, k): 1.0})

    @classmethod
    def monomial(cls, m: Monomial, c: float = 1.0) -> "Polynomial":
        return cls.from_terms(len(m), {m: c})

    # -- queries ---------------------------------------------------------

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial has degree -1."""
        return max((sum(m) for m in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def support(self) -> list[Monomial]:
        return sorted(self.terms, key=mono_key)

    def coeff(self, m: Monomial) -> float:
        return self.terms.get(tuple(m), 0.0)

    def leading_monomial(self) -> Monomial | None:
        return max(self.terms, key=mono_key, default=None)

    def max_abs_coeff(self) -> float:
        return _maxabs(self.terms)

    def homogeneous_part(self, d: int) -> "Polynomial":
        return Polynomial(self.nvars, {m: c for m, c in self.terms.items() if sum(m) == d})

    # -- arithmetic ------------------------------------------------------

    def _check(self, other: "Polynomial"):
        if other.nvars != self.nvars:
            raise DimensionMismatch(f"{self.nvars} vs {other.nvars} variables")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, float)):
            return Polynomial.constant(self.nvars, float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self.terms)
        for m, c in other.terms.items():
            acc[m] = acc.get(m, 0.0) + c
        scale = max(self.max_abs_coeff(), other.max_abs_coeff())
        return Polynomial(self.nvars, _drop(acc, scale))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: float) -> "Polynomial":
        if c == 0:
            return Polynomial.zero(self.nvars)
        return Polynomial(self.nvars, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(i + j for i, j in zip(m1, m2))
                acc[m] = acc.get(m, 0.0) + c1 * c2
        scale = self.max_abs_coeff() * other.max_abs_coeff()
        return Polynomial(self.nvars, _drop(acc, scale))

    __rmul__ = __mul__

    def __truediv__(self, c):
        if not isinstance(c, (int, float)):
            return NotImplemented
        return self.scale(1.0 / c)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = Polynomial.constant(self.nvars, 1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def mul_monomial(self, m: Monomial, c: float = 1.0) -> "Polynomial":
        if len(m) != self.nvars:
            raise DimensionMismatch("monomial size")
        return Polynomial(self.nvars, {mono_mul(k, m): c * v for k, v in self.terms.items()})

    # -- calculus and evaluation ----------------------------------------

    def differentiate(self, var: int) -> "Polynomial":
        if not 0 <= var < self.nvars:
            raise IndexError(f"variable index {var} out of range")
        acc = {}
        for m, c in self.terms.items():
            e = m[var]
            if e:
                mm = list(m)
                mm[var] -= 1
                acc[tuple(mm)] = c * e
        return Polynomial(self.nvars, acc)

    def gradient(self) -> list["Polynomial"]:
        return [self.differentiate(k) for k in range(self.nvars)]

    def evaluate(self, point: Sequence[float]) -> float:
        if len(point) != self.nvars:
            raise DimensionMismatch(f"point has {len(point)} coordinates, need {self.nvars}")
        total = 0.0
        for m in self.support():
            v = self.terms[m]
            for x, e in zip(point, m):
                if e:
                    v *= x**e
            total += v
        return total

    __call__ = evaluate

    # -- comparison and printing ----------------------------------------

    def allclose(self, other: "Polynomial", tol: float = 1e-9) -> bool:
        self._check(other)
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.coeff(m) - other.coeff(m)) <= tol for m in keys)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and dict(self.terms) == dict(other.terms)

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def to_string(self, names: Sequence[str] | None = None, exact: bool = True) -> str:
        """Render as text the problem-file parser reads back.

        ``exact`` uses ``repr`` for coefficients so the round trip is
        bit-exact; otherwise ``%.6g``.
        """
        if names is None:
            names = default_names(self.nvars)
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=mono_key, reverse=True):
            c = self.terms[m]
            factors = []
            for name, e in zip(names, m):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(c)
            num = repr(mag) if exact else f"{mag:.6g}"
            if factors:
                body = "*".join(factors) if mag == 1.0 or num == "1" else num + "*" + "*".join(factors)
            else:
                body = num
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        head_sign, head = parts[0]
        text = ("-" if head_sign == "-" else "") + head
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __str__(self):
        return self.to_string(exact=False)

    def __repr__(self):
        return f"Polynomial({self.to_string(exact=False)!r}, nvars={self.nvars})"


def default_names(nvars: int) -> list[str]:
    if nvars <= 3:
        return ["x", "y", "z"][:nvars]
    return [f"x{i + 1}" for i in range(nvars)]


def variables(nvars: int) -> list[Polynomial]:
    return [Polynomial.variable(nvars, k) for k in range(nvars)]


@dataclass(frozen=True)
class ConstraintSet:
    """Equalities ``g = 0`` and inequalities ``g >= 0``; either may be empty."""

    equalities: tuple = ()
    inequalities: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "equalities", tuple(self.equalities))
        object.__setattr__(self, "inequalities", tuple(self.inequalities))

    @property
    def unconstrained(self) -> bool:
        return not self.equalities and not self.inequalities

    def is_feasible(self, point, tol: float = 1e-6) -> bool:
        return all(abs(g(point)) <= tol for g in self.equalities) and all(
            g(point) >= -tol for g in self.inequalities
        )
