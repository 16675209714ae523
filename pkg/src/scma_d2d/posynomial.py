"""Monomial/posynomial algebra over positive variables.

Everything is expressed against a shared variable *registry* (an ordered
tuple of names), with dense exponent vectors.  Problem sizes in this
package are small (tens of variables at most), so dense layout keeps the
solver interface simple.  Coefficients are strictly positive; evaluation
and condensation run in log space so that physically tiny coefficients
(thermal-noise watts and products thereof) never underflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Registry = tuple  # ordered tuple of variable names

# exponent vectors are compared after rounding to this many decimals when
# merging terms; keeps the product expansion from blowing up in term count
# while leaving integer-exponent algebra exact
MERGE_DECIMALS = 12


class RegistryMismatchError(ValueError):
    """Raised when two operands live over different variable registries."""


def _check_registry(a, b):
    if tuple(a) != tuple(b):
        raise RegistryMismatchError(f"registries differ: {a!r} vs {b!r}")


def _as_exponents(registry, exponents):
    a = np.asarray(exponents, dtype=float).reshape(-1)
    if a.shape != (len(registry),):
        raise ValueError(f"expected {len(registry)} exponents, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("exponents must be finite")
    return a


def _log_values(coefficients, exponents, x):
    """log of each term c * prod(x**a), for strictly positive x."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise ValueError("arguments must be strictly positive and finite")
    return np.log(coefficients) + exponents @ np.log(x)


@dataclass(frozen=True)
class Monomial:
    """A single positive term c * x1^a1 * ... * xn^an."""

    coefficient: float
    exponents: np.ndarray
    registry: Registry

    def __post_init__(self):
        object.__setattr__(self, "registry", tuple(self.registry))
        c = float(self.coefficient)
        if not (c > 0 and np.isfinite(c)):
            raise ValueError(f"monomial coefficient must be positive, got {c}")
        object.__setattr__(self, "coefficient", c)
        a = _as_exponents(self.registry, self.exponents)
        a.flags.writeable = False
        object.__setattr__(self, "exponents", a)

    @classmethod
    def from_powers(cls, registry, coefficient, powers=None):
        """Build from a {variable name: exponent} mapping (others 0)."""
        registry = tuple(registry)
        a = np.zeros(len(registry))
        for name, exp in (powers or {}).items():
            a[registry.index(name)] = exp
        return cls(coefficient, a, registry)

    def evaluate(self, x) -> float:
        return float(np.exp(_log_values(self.coefficient, self.exponents[None, :], x)[0]))

    def as_posynomial(self) -> "Posynomial":
        return Posynomial(self.registry, [self.coefficient], self.exponents[None, :])

    def __mul__(self, other):
        if isinstance(other, Monomial):
            _check_registry(self.registry, other.registry)
            return Monomial(self.coefficient * other.coefficient,
                            self.exponents + other.exponents, self.registry)
        if isinstance(other, Posynomial):
            return other * self
        return NotImplemented


@dataclass
class Posynomial:
    """Sum of monomials; equal exponent vectors are merged on construction."""

    registry: Registry
    coefficients: np.ndarray = field(repr=False)
    exponents: np.ndarray = field(repr=False)

    def __init__(self, registry, coefficients, exponents):
        self.registry = tuple(registry)
        c = np.asarray(coefficients, dtype=float).reshape(-1)
        a = np.asarray(exponents, dtype=float).reshape(len(c), len(self.registry))
        if len(c) == 0:
            raise ValueError("posynomial needs at least one term")
        if np.any(c <= 0) or not np.all(np.isfinite(c)):
            raise ValueError("posynomial coefficients must be positive and finite")
        if not np.all(np.isfinite(a)):
            raise ValueError("exponents must be finite")
        self.coefficients, self.exponents = _merge_terms(c, a)
        self.coefficients.flags.writeable = False
        self.exponents.flags.writeable = False

    @classmethod
    def from_monomials(cls, monomials) -> "Posynomial":
        monomials = list(monomials)
        if not monomials:
            raise ValueError("posynomial needs at least one term")
        reg = monomials[0].registry
        for m in monomials[1:]:
            _check_registry(reg, m.registry)
        return cls(reg,
                   [m.coefficient for m in monomials],
                   np.stack([m.exponents for m in monomials]))

    @classmethod
    def constant(cls, registry, value) -> "Posynomial":
        registry = tuple(registry)
        return cls(registry, [value], np.zeros((1, len(registry))))

    @property
    def terms(self):
        """Terms as Monomial objects, in normalized order."""
        return [Monomial(c, a, self.registry)
                for c, a in zip(self.coefficients, self.exponents)]

    def __len__(self):
        return len(self.coefficients)

    def log_term_values(self, x):
        return _log_values(self.coefficients, self.exponents, x)

    def evaluate(self, x) -> float:
        """Value at a strictly positive point (overflow/underflow safe)."""
        logs = self.log_term_values(x)
        m = logs.max()
        return float(np.exp(m) * np.exp(logs - m).sum())

    def __mul__(self, other):
        if isinstance(other, Monomial):
            other = other.as_posynomial()
        if not isinstance(other, Posynomial):
            return NotImplemented
        _check_registry(self.registry, other.registry)
        coeff = np.outer(self.coefficients, other.coefficients).reshape(-1)
        expo = (self.exponents[:, None, :] + other.exponents[None, :, :]
                ).reshape(-1, len(self.registry))
        return Posynomial(self.registry, coeff, expo)

    __rmul__ = __mul__

    def divide_by_monomial(self, m: Monomial) -> "Posynomial":
        _check_registry(self.registry, m.registry)
        return Posynomial(self.registry,
                          self.coefficients / m.coefficient,
                          self.exponents - m.exponents)

    def scale(self, factor) -> "Posynomial":
        return Posynomial(self.registry, self.coefficients * factor, self.exponents)

    def format_lines(self):
        """Human-readable dump, one "c * x^a * ..." line per term."""
        lines = []
        for c, a in zip(self.coefficients, self.exponents):
            parts = [f"{float(c)!r}"]
            for name, e in zip(self.registry, a):
                if e != 0:
                    parts.append(f"{name}^{e:g}")
            lines.append(" * ".join(parts))
        return lines

    def __str__(self):
        return " + ".join(self.format_lines())


def _merge_terms(coefficients, exponents):
    """Sum coefficients of terms whose exponent vectors coincide.

    Vectors are compared after rounding to MERGE_DECIMALS; adding 0.0
    normalizes -0.0 so the byte-wise row comparison in np.unique is safe.
    """
    keys = np.round(exponents, MERGE_DECIMALS) + 0.0
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inverse, coefficients)
    order = np.lexsort(uniq.T[::-1])
    return merged[order], uniq[order]


def multiply(p: Posynomial, q: Posynomial) -> Posynomial:
    """Distributed product; evaluation homomorphism by construction."""
    return p * q


def product(factors) -> Posynomial:
    """Product of an iterable of posynomials over one registry."""
    factors = list(factors)
    if not factors:
        raise ValueError("empty product")
    out = factors[0]
    for f in factors[1:]:
        out = out * f
    return out


def condense(g: Posynomial, x0) -> Monomial:
    """Best local monomial under-approximation of ``g`` at ``x0``.

    Weights are beta_l = u_l(x0) / g(x0) (the weighted AM-GM equality
    choice), giving gtilde = prod (u_l / beta_l)^beta_l with
    gtilde(x) <= g(x) everywhere and equality, in value and gradient,
    at x = x0.  Computed via softmax in log space; terms whose weight
    underflows to zero contribute the limit factor 1 and are dropped.
    """
    logs = g.log_term_values(x0)
    m = logs.max()
    w = np.exp(logs - m)
    beta = w / w.sum()
    keep = beta > 0
    beta = beta[keep]
    log_beta = logs[keep] - m - np.log(w.sum())
    log_coeff = float(beta @ (np.log(g.coefficients[keep]) - log_beta))
    exponents = beta @ g.exponents[keep]
    return Monomial(np.exp(log_coeff), exponents, g.registry)


@dataclass
class ConvexFormProblem:
    """Log-variable image of a GP in standard form.

    Objective and each inequality are log-sum-exp term lists
    (offsets are logs of the positive coefficients); monomial equalities
    become affine rows a.y + b = 0.
    """

    registry: Registry
    objective_exponents: np.ndarray      # (M0, n)
    objective_offsets: np.ndarray        # (M0,)
    constraint_exponents: list           # S arrays (Ms, n)
    constraint_offsets: list             # S arrays (Ms,)
    equality_exponents: np.ndarray       # (T, n)
    equality_offsets: np.ndarray         # (T,)

    @property
    def n_variables(self):
        return len(self.registry)

    @property
    def n_inequalities(self):
        return len(self.constraint_exponents)


def to_convex_form(objective: Posynomial, constraints=(), equalities=()) -> ConvexFormProblem:
    """Map a standard-form GP (min posynomial, posynomials <= 1, monomials = 1)
    to its convex log-sum-exp image in y = log x."""
    reg = objective.registry
    cons_a, cons_b = [], []
    for g in constraints:
        _check_registry(reg, g.registry)
        cons_a.append(g.exponents.copy())
        cons_b.append(np.log(g.coefficients))
    eq_a = np.zeros((len(tuple(equalities)), len(reg)))
    eq_b = np.zeros(len(eq_a))
    for t, h in enumerate(equalities):
        _check_registry(reg, h.registry)
        eq_a[t] = h.exponents
        eq_b[t] = np.log(h.coefficient)
    return ConvexFormProblem(
        registry=reg,
        objective_exponents=objective.exponents.copy(),
        objective_offsets=np.log(objective.coefficients),
        constraint_exponents=cons_a,
        constraint_offsets=cons_b,
        equality_exponents=eq_a,
        equality_offsets=eq_b,
    )
