"""Large-frequency expansions of the multiplier eigenvalues.

Each expansion is returned as an :class:`AsymptoticValue` that keeps the
individual terms (constant, power, logarithm, state) so that callers can
inspect which part dominates.  Oscillatory contributions from the horizon
boundary are dropped, as in the closed-form expansions.  They decay only
algebraically, so for the state part ``lambda12`` with ``beta < n`` they
dominate the retained power term.

Two expansions of ``lambda1`` are provided: the combined closed form
(``as_stated``) and the sum of the bond and state component expansions
(``as_sum``).  Their constant terms differ by a factor of two; the quadrature
reference decides between them (see ``studies.asymptotic_validation``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InvalidParameter
from .multipliers import Material
from .specfun import digamma, euler_gamma, gamma_fn, rgamma

BETA_NE_N = "beta_ne_n"
BETA_EQ_N = "beta_eq_n"


@dataclass(frozen=True)
class AsymptoticValue:
    """Value of an expansion together with its additive terms.

    ``degenerate`` is set when a coefficient was zeroed because a gamma
    function in its denominator sits on a pole.
    """

    value: float
    branch: str
    terms: tuple
    degenerate: bool = False

    @classmethod
    def from_terms(cls, branch: str, terms, degenerate: bool = False):
        terms = tuple((label, float(v)) for label, v in terms)
        total = 0.0
        for _, v in terms:
            total += v
        return cls(total, branch, terms, degenerate)

    def term(self, label: str) -> float:
        return sum(v for name, v in self.terms if name == label)


class GrowthClass(NamedTuple):
    kind: str  # "bounded", "logarithmic" or "power"
    exponent: float


def _check_radius(r: float) -> float:
    r = float(r)
    if not r > 0 or not math.isfinite(r):
        raise InvalidParameter(f"radius must be a positive finite real, got {r!r}")
    return r


def _branch(m: Material) -> str:
    return BETA_EQ_N if m.beta == m.n else BETA_NE_N


def _bond_constant(m: Material, factor: float) -> float:
    n, beta = m.n, m.beta
    return -factor * m.mu * (n + 2 - beta) * (n + 2) / (m.delta**2 * (n - beta))


def _log_terms(m: Material, r: float, shift: float):
    n = m.n
    pre = -2.0 * m.mu / m.delta**2 * (n + 2)
    const = math.log(m.delta**2 / 4.0) + euler_gamma() + shift - digamma((n + 2) / 2.0)
    return [("log", pre * 2.0 * math.log(r)), ("constant", pre * const)]


def _bond_power_scale(m: Material):
    """``Gamma((n+4)/2) Gamma((n+4-b)/2) / Gamma((b+2)/2) * (2/delta)^(n+2-b)``."""
    n, beta = m.n, m.beta
    inv = rgamma((beta + 2) / 2.0)
    coeff = gamma_fn((n + 4) / 2.0) * gamma_fn((n + 4 - beta) / 2.0) * inv
    return coeff * (2.0 / m.delta) ** (n + 2 - beta), inv == 0.0


def lambda2_asymptotic(m: Material, r: float) -> AsymptoticValue:
    """Two-term expansion of ``lambda2`` at ``|nu| = r``."""
    r = _check_radius(r)
    if _branch(m) == BETA_EQ_N:
        return AsymptoticValue.from_terms(BETA_EQ_N, _log_terms(m, r, 0.0))
    scale, degenerate = _bond_power_scale(m)
    power = -m.mu * scale / ((m.beta - m.n) / 2.0) * r ** (m.beta - m.n)
    return AsymptoticValue.from_terms(
        BETA_NE_N, [("constant", _bond_constant(m, 2.0)), ("power", power)], degenerate
    )


def _lambda11(m: Material, r: float, constant_factor: float) -> AsymptoticValue:
    if _branch(m) == BETA_EQ_N:
        return AsymptoticValue.from_terms(BETA_EQ_N, _log_terms(m, r, 2.0))
    n, beta = m.n, m.beta
    scale, degenerate = _bond_power_scale(m)
    power = -2.0 * m.mu * (n - beta - 1) / (n - beta) * scale * r ** (beta - n)
    return AsymptoticValue.from_terms(
        BETA_NE_N,
        [("constant", _bond_constant(m, constant_factor)), ("power", power)],
        degenerate,
    )


def _lambda12(m: Material, r: float) -> AsymptoticValue:
    n, beta = m.n, m.beta
    inv = rgamma(beta / 2.0)
    coeff = gamma_fn((n + 2) / 2.0) * gamma_fn((n + 4 - beta) / 2.0) * inv
    value = (
        -(m.lambda_star - m.mu) * coeff**2
        * (2.0 / m.delta) ** (2 * (n + 2 - beta))
        * r ** (2 * (beta - (n + 1)))
    )
    return AsymptoticValue.from_terms(_branch(m), [("state", value)], inv == 0.0)


def lambda1_component_asymptotics(m: Material, r: float):
    """Expansions of the bond part ``lambda11`` and state part ``lambda12``.

    When ``Gamma(beta/2)`` has a pole the state coefficient is zero and the
    returned value is flagged ``degenerate`` rather than raising.
    """
    r = _check_radius(r)
    return _lambda11(m, r, 2.0), _lambda12(m, r)


def lambda1_asymptotic_combined(m: Material, r: float):
    """Return ``(as_stated, as_sum)`` expansions of ``lambda1``.

    ``as_stated`` uses the combined closed form, whose constant term carries
    a factor 1 on ``(n+2-b)(n+2)/(delta^2 (n-b))``; ``as_sum`` adds the
    component expansions, where the same factor is 2.
    """
    r = _check_radius(r)
    state = _lambda12(m, r)
    parts = []
    for factor in (1.0, 2.0):
        bond = _lambda11(m, r, factor)
        parts.append(AsymptoticValue.from_terms(
            bond.branch, bond.terms + state.terms, bond.degenerate or state.degenerate
        ))
    return parts[0], parts[1]


def growth_class(m: Material) -> GrowthClass:
    """Growth of ``|lambda_i(k)|`` for large ``|k|``.

    Bounded for ``beta < n``, logarithmic for ``beta = n`` and a power
    ``|k|^(beta - n)`` for ``n < beta < n + 2``.
    """
    if m.beta < m.n:
        return GrowthClass("bounded", 0.0)
    if m.beta == m.n:
        return GrowthClass("logarithmic", 0.0)
    return GrowthClass("power", m.beta - m.n)
