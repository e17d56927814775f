"""Order-by-order consistency residuals for truncated polynomial contact potentials.

For a potential H = H0 + ... + HN (component n homogeneous of fiber degree n,
components above N identically zero), the residual at fiber order p is

    C_p = (p - 1) dH_p/dt + sum_{n + k - 1 = p} (n - 1) {H_n, H_k}

and H solves the conservation problem exactly iff every C_p vanishes as a
polynomial. This module verifies user-supplied potentials; it does not
construct them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError
from .poly import Poly, phi_index, phi_parts, poisson, t_index, y_index

COND_TRANSPORT = "zero_order_transport"
COND_DEGENERACY = "first_order_degeneracy"
COND_RECURRENCE = "high_order_recurrence"
COND_STRUCTURAL = "structural_closure"


@dataclass(frozen=True)
class ContactPotential:
    """Truncated potential: components[n] is the fiber-degree-n part."""

    dim: int
    order: int
    components: tuple[Poly, ...]

    def __post_init__(self):
        if self.order < 1:
            raise InputError(f"truncation order must be >= 1, got {self.order}")
        if len(self.components) != self.order + 1:
            raise InputError(
                f"expected {self.order + 1} components, got {len(self.components)}")
        for n, comp in enumerate(self.components):
            if comp.dim != self.dim:
                raise InputError(f"component {n} has dim {comp.dim}, expected {self.dim}")
            for exps in comp.terms:
                if comp.phi_degree(exps) != n:
                    raise InputError(
                        f"component {n} is not fiber-homogeneous of degree {n}: "
                        f"term {exps} has degree {comp.phi_degree(exps)}")

    def component(self, n: int) -> Poly:
        """H_n, with the truncation convention H_n = 0 for n > order."""
        if n < 0:
            raise InputError(f"component order must be >= 0, got {n}")
        if n > self.order:
            return Poly.zero(self.dim)
        return self.components[n]

    def drift_component(self, i: int) -> Poly:
        """B^i(t, y), the coefficient of phi_i in the degree-1 component."""
        return self.components[1].diff(phi_index(self.dim, i))


@dataclass(frozen=True)
class ResidualReport:
    """Residual polynomials C_0..C_pmax and the four closure condition flags."""

    dim: int
    order: int
    p_max: int
    residuals: tuple[Poly, ...]
    conditions: dict[str, bool]
    worst: tuple[int, int, Fraction] | None  # (order, term count, max |coefficient|)

    @property
    def all_zero(self) -> bool:
        return all(r.is_zero() for r in self.residuals)

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "order": self.order,
            "p_max": self.p_max,
            "conditions": dict(self.conditions),
            "all_zero": self.all_zero,
            "residuals": [
                {
                    "p": p,
                    "zero": r.is_zero(),
                    "term_count": len(r.terms),
                    "max_abs_coefficient": str(max((abs(c) for c in r.terms.values()),
                                                   default=Fraction(0))),
                    "polynomial": repr(r),
                }
                for p, r in enumerate(self.residuals)
            ],
            "worst": None if self.worst is None else {
                "p": self.worst[0],
                "term_count": self.worst[1],
                "max_abs_coefficient": str(self.worst[2]),
            },
        }


def order_residual(data: ContactPotential, p: int) -> Poly:
    """Exact residual C_p, with components above the truncation order taken as zero."""
    if p < 0:
        raise InputError(f"order must be >= 0, got {p}")
    out = data.component(p).diff(t_index(data.dim)) * Fraction(p - 1)
    for n in range(0, min(data.order, p + 1) + 1):
        k = p + 1 - n
        if n == 1 or k > data.order or k < 0:
            continue  # the n = 1 weight vanishes; out-of-range partners are zero
        out = out + poisson(data.component(n), data.component(k)) * Fraction(n - 1)
    return out


def verify_closure(data: ContactPotential, p_max: int | None = None) -> ResidualReport:
    """Residuals for p = 0..p_max plus the four condition flags.

    p_max defaults to order + 2, which covers every order that can be nonzero
    for an order-2 truncation (the highest bracket degree is 2*order - 1).
    """
    if p_max is None:
        p_max = data.order + 2
    if p_max < data.order + 1:
        raise InputError(f"p_max must be >= order + 1 = {data.order + 1}, got {p_max}")
    residuals = tuple(order_residual(data, p) for p in range(p_max + 1))
    conditions = {
        COND_TRANSPORT: residuals[0].is_zero(),
        COND_DEGENERACY: residuals[1].is_zero() if p_max >= 1 else True,
        COND_RECURRENCE: all(residuals[p].is_zero()
                             for p in range(2, min(data.order, p_max) + 1)),
        COND_STRUCTURAL: all(residuals[p].is_zero()
                             for p in range(data.order + 1, p_max + 1)),
    }
    worst = None
    for p, r in enumerate(residuals):
        if not r.is_zero():
            cand = (p, len(r.terms), max(abs(c) for c in r.terms.values()))
            if worst is None or cand[2] > worst[2]:
                worst = cand
    return ResidualReport(data.dim, data.order, p_max, residuals, conditions, worst)


# -- built-in verification cases -------------------------------------------


def harmonic_case() -> ContactPotential:
    """Conservative rotation field with the tangential rank-one stiffness.

    m = 2, H0 = (y1^2 + y2^2)/2, H1 = y2 phi1 - y1 phi2,
    H2 = (y1 phi2 - y2 phi1)^2 / 2. Every residual vanishes exactly.
    """
    dim = 2
    y1 = Poly.variable(dim, y_index(dim, 0))
    y2 = Poly.variable(dim, y_index(dim, 1))
    p1 = Poly.variable(dim, phi_index(dim, 0))
    p2 = Poly.variable(dim, phi_index(dim, 1))
    half = Fraction(1, 2)
    h0 = (y1 * y1 + y2 * y2) * half
    h1 = y2 * p1 - y1 * p2
    v_dot_phi = y1 * p2 - y2 * p1
    h2 = v_dot_phi * v_dot_phi * half
    return ContactPotential(dim, 2, (h0, h1, h2))


def linear_const_k_case(k=1) -> ContactPotential:
    """Scalar decay with a constant (time-independent) stiffness; fails closure.

    m = 1, H0 = 0, H1 = -y phi, H2 = k phi^2 / 2 with constant k != 0:
    the order-2 residual is k phi^2, showing that the stiffness must carry
    the e^{-2t} time dependence, which is outside the polynomial ring.
    """
    k = Fraction(k)
    if k == 0:
        raise InputError("k must be nonzero for the negative closure case")
    dim = 1
    y1 = Poly.variable(dim, y_index(dim, 0))
    p1 = Poly.variable(dim, phi_index(dim, 0))
    h0 = Poly.zero(dim)
    h1 = -(y1 * p1)
    h2 = p1 * p1 * (k / 2)
    return ContactPotential(dim, 2, (h0, h1, h2))


BUILTIN_CASES = {
    "harmonic": harmonic_case,
    "linear-const-k": linear_const_k_case,
}


def load_case(payload: dict) -> ContactPotential:
    """Build a potential from the JSON case schema.

    Schema: {"vars": m, "N": order, "components": [terms_0, ..., terms_N]}
    where each terms_n is a list of {"coef": "p/q" | int-string | int,
    "exp": [e_t, e_y1.., e_phi1..]} monomials. Coefficients must be exact
    (floats are rejected).
    """
    if not isinstance(payload, dict):
        raise InputError("case payload must be a JSON object")
    unknown = set(payload) - {"vars", "N", "components"}
    if unknown:
        raise InputError(f"unknown case keys: {sorted(unknown)}")
    try:
        dim = int(payload["vars"])
        order = int(payload["N"])
        raw_components = payload["components"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"case payload must define integer 'vars', 'N', "
                         f"and a 'components' list: {exc}") from exc
    if not isinstance(raw_components, list) or len(raw_components) != order + 1:
        raise InputError(f"'components' must list exactly N + 1 = {order + 1} term lists")
    nvars = 1 + 2 * dim
    components = []
    for n, raw_terms in enumerate(raw_components):
        if not isinstance(raw_terms, list):
            raise InputError(f"component {n} must be a list of monomial terms")
        acc = Poly.zero(dim)
        for term in raw_terms:
            if not isinstance(term, dict) or set(term) != {"coef", "exp"}:
                raise InputError(f"component {n}: each term needs exactly "
                                 f"'coef' and 'exp' keys, got {term!r}")
            coef = term["coef"]
            if isinstance(coef, float):
                raise InputError(f"component {n}: coefficients must be exact "
                                 f"(use a 'p/q' string), got float {coef}")
            exp = term["exp"]
            if (not isinstance(exp, list) or len(exp) != nvars
                    or not all(isinstance(e, int) and e >= 0 for e in exp)):
                raise InputError(f"component {n}: 'exp' must be {nvars} nonnegative "
                                 f"integers (t, y1..y{dim}, phi1..phi{dim})")
            acc = acc + Poly.monomial(dim, exp, coef)
        components.append(acc)
    return ContactPotential(dim, order, tuple(components))
