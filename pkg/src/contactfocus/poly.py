"""Exact sparse polynomials over (t, y1..ym, phi1..phim) with rational coefficients.

Terms are stored as a dict mapping exponent tuples to Fraction coefficients;
zero coefficients are never stored, so equality of dicts decides equality of
polynomials. Variable ordering is fixed: index 0 is t, indices 1..m are the
base coordinates, indices m+1..2m the fiber coordinates. No floating point
enters this module: "identically zero" is decidable, not approximate.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .errors import InputError

Exponents = tuple[int, ...]


def t_index(dim: int) -> int:
    return 0


def y_index(dim: int, i: int) -> int:
    """Variable index of y^(i+1), 0-based i in [0, dim)."""
    if not 0 <= i < dim:
        raise InputError(f"base index {i} out of range for dim {dim}")
    return 1 + i


def phi_index(dim: int, i: int) -> int:
    """Variable index of phi_(i+1), 0-based i in [0, dim)."""
    if not 0 <= i < dim:
        raise InputError(f"fiber index {i} out of range for dim {dim}")
    return 1 + dim + i


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise InputError(f"exact coefficient expected (int, Fraction, or string), got {value!r}")


class Poly:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Exponents, object] | None = None):
        if dim < 1:
            raise InputError(f"dim must be >= 1, got {dim}")
        nvars = 1 + 2 * dim
        clean: dict[Exponents, Fraction] = {}
        for exps, coef in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != nvars or any(e < 0 or not isinstance(e, int) for e in exps):
                raise InputError(
                    f"exponent tuple of {nvars} nonnegative integers expected, got {exps}")
            c = _as_fraction(coef)
            if c != 0:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if clean[exps] == 0:
                    del clean[exps]
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "Poly":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, value) -> "Poly":
        return cls(dim, {tuple([0] * (1 + 2 * dim)): _as_fraction(value)})

    @classmethod
    def monomial(cls, dim: int, exponents: Iterable[int], coeff=1) -> "Poly":
        return cls(dim, {tuple(exponents): _as_fraction(coeff)})

    @classmethod
    def variable(cls, dim: int, index: int) -> "Poly":
        exps = [0] * (1 + 2 * dim)
        exps[index] = 1
        return cls.monomial(dim, exps)

    # -- structure ---------------------------------------------------------

    @property
    def nvars(self) -> int:
        return 1 + 2 * self.dim

    def is_zero(self) -> bool:
        return not self.terms

    def phi_degree(self, exps: Exponents) -> int:
        return sum(exps[1 + self.dim:])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    # -- arithmetic --------------------------------------------------------

    def _check_dim(self, other: "Poly"):
        if self.dim != other.dim:
            raise InputError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.constant(self.dim, other)
        self._check_dim(other)
        out = dict(self.terms)
        for exps, coef in other.terms.items():
            acc = out.get(exps, Fraction(0)) + coef
            if acc == 0:
                out.pop(exps, None)
            else:
                out[exps] = acc
        return Poly(self.dim, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.dim, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.constant(self.dim, other)
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = _as_fraction(other)
            if c == 0:
                return Poly.zero(self.dim)
            return Poly(self.dim, {e: coef * c for e, coef in self.terms.items()})
        self._check_dim(other)
        out: dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                acc = out.get(exps, Fraction(0)) + c1 * c2
                if acc == 0:
                    out.pop(exps, None)
                else:
                    out[exps] = acc
        return Poly(self.dim, out)

    __rmul__ = __mul__

    # -- calculus ----------------------------------------------------------

    def diff(self, var: int) -> "Poly":
        """Formal partial derivative with respect to variable index ``var``."""
        if not 0 <= var < self.nvars:
            raise InputError(f"variable index {var} out of range for {self.nvars} variables")
        out: dict[Exponents, Fraction] = {}
        for exps, coef in self.terms.items():
            e = exps[var]
            if e == 0:
                continue
            lowered = list(exps)
            lowered[var] = e - 1
            out[tuple(lowered)] = coef * e
        return Poly(self.dim, out)

    def evaluate(self, point: Iterable) -> Fraction:
        """Exact value at a rational point (sequence of 1 + 2 dim values)."""
        pt = [_as_fraction(v) for v in point]
        if len(pt) != self.nvars:
            raise InputError(f"point of length {self.nvars} expected, got {len(pt)}")
        total = Fraction(0)
        for exps, coef in self.terms.items():
            val = coef
            for base, e in zip(pt, exps):
                if e:
                    val *= base ** e
            total += val
        return total

    # -- display -----------------------------------------------------------

    def __repr__(self):
        if not self.terms:
            return "0"
        names = (["t"] + [f"y{i + 1}" for i in range(self.dim)]
                 + [f"phi{i + 1}" for i in range(self.dim)])
        parts = []
        for exps in sorted(self.terms, key=lambda e: (self.phi_degree(e), e)):
            coef = self.terms[exps]
            factors = [f"{n}^{e}" if e > 1 else n for n, e in zip(names, exps) if e]
            body = "*".join(factors)
            if body:
                parts.append(f"{coef}*{body}" if coef != 1 else body)
            else:
                parts.append(str(coef))
        return " + ".join(parts)


def poisson(f: Poly, g: Poly) -> Poly:
    """Canonical bracket sum_i (dF/dy_i dG/dphi_i - dF/dphi_i dG/dy_i)."""
    if f.dim != g.dim:
        raise InputError(f"dimension mismatch: {f.dim} vs {g.dim}")
    out = Poly.zero(f.dim)
    for i in range(f.dim):
        yi = y_index(f.dim, i)
        pi = phi_index(f.dim, i)
        out = out + f.diff(yi) * g.diff(pi) - f.diff(pi) * g.diff(yi)
    return out


def euler(h: Poly) -> Poly:
    """Fiber-degree counting operator sum_i phi_i dH/dphi_i."""
    out = Poly.zero(h.dim)
    for i in range(h.dim):
        pi = phi_index(h.dim, i)
        out = out + Poly.variable(h.dim, pi) * h.diff(pi)
    return out


def phi_parts(h: Poly) -> dict[int, Poly]:
    """Partition by total fiber degree; the parts sum back to h exactly."""
    buckets: dict[int, dict[Exponents, Fraction]] = {}
    for exps, coef in h.terms.items():
        buckets.setdefault(h.phi_degree(exps), {})[exps] = coef
    return {n: Poly(h.dim, terms) for n, terms in sorted(buckets.items())}


def discriminant(h: Poly) -> Poly:
    """Weighted sum sum_n (n - 1) * (fiber-degree-n part); equals euler(h) - h."""
    out = Poly.zero(h.dim)
    for n, part in phi_parts(h).items():
        out = out + part * Fraction(n - 1)
    return out
