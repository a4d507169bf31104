"""Special functions used by the multiplier formulas.

Generalized hypergeometric series ``pFq`` with ``p <= q`` (entire in ``z``),
the gamma and digamma functions and Euler's constant.  Everything here is
real-valued double precision and has no module-level state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .errors import DomainError, InvalidParameter, NonConvergence, PoleError

EULER_GAMMA = float(np.euler_gamma)

SERIES_TOL = 1e-16
MAX_TERMS = 20_000
CANCELLATION_LIMIT = 1e12
_STOP_RUN = 3


@dataclass(frozen=True)
class SeriesResult:
    """Value of a truncated hypergeometric series plus diagnostics.

    ``max_term_magnitude`` is the largest absolute term seen; its ratio to
    ``|value|`` measures how much cancellation the sum went through.
    """

    value: float
    terms_used: int
    converged: bool
    max_term_magnitude: float
    diagnostic: Optional[str] = None

    @property
    def cancellation_ratio(self) -> float:
        if self.value == 0.0:
            return math.inf if self.max_term_magnitude > 0 else 0.0
        return self.max_term_magnitude / abs(self.value)


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def _cancel_pairs(numer, denom):
    numer = list(numer)
    denom = list(denom)
    kept = []
    for a in numer:
        if a in denom:
            denom.remove(a)
        else:
            kept.append(a)
    return kept, denom


def pfq(
    numer: Sequence[float],
    denom: Sequence[float],
    z: float,
    *,
    tol: float = SERIES_TOL,
    max_terms: int = MAX_TERMS,
    cancellation_limit: float = CANCELLATION_LIMIT,
    reduce_pairs: bool = True,
) -> SeriesResult:
    """Sum the generalized hypergeometric series ``pFq(numer; denom; z)``.

    The power series is summed forward with Neumaier-compensated
    accumulation.  Summation stops after three consecutive terms that are
    each below ``tol`` relative to the running sum.

    Parameters
    ----------
    numer, denom : sequences of float
        Upper and lower parameters; ``len(numer) <= len(denom)``.
    z : float
        Real argument.
    cancellation_limit : float
        When ``max_term_magnitude / |value|`` exceeds this, the result is
        returned with ``converged=False`` and a ``"loss_of_precision"``
        diagnostic instead of being trusted silently.
    reduce_pairs : bool
        Drop parameters that appear in both lists before summing.

    Raises
    ------
    InvalidParameter
        ``p > q`` or a lower parameter is zero or a negative integer.
    NonConvergence
        The stopping rule was not met within ``max_terms`` terms.
    """
    numer = [float(a) for a in numer]
    denom = [float(b) for b in denom]
    if len(numer) > len(denom):
        raise InvalidParameter(
            f"pfq requires p <= q, got p={len(numer)}, q={len(denom)}"
        )
    for b in denom:
        if _is_nonpositive_integer(b):
            raise InvalidParameter(f"lower parameter {b} is a nonpositive integer")
    if reduce_pairs:
        numer, denom = _cancel_pairs(numer, denom)
    # a fixed multiplication order makes the value permutation invariant
    numer.sort()
    denom.sort()

    z = float(z)
    if z == 0.0:
        return SeriesResult(1.0, 1, True, 1.0)

    total = 1.0
    comp = 0.0
    term = 1.0
    max_term = 1.0
    small_run = 0
    m = 0
    terms_used = 1
    while True:
        if terms_used >= max_terms:
            raise NonConvergence(
                f"pfq did not converge within {max_terms} terms (z={z})"
            )
        ratio = z / (m + 1)
        for a in numer:
            ratio *= a + m
        for b in denom:
            ratio /= b + m
        term *= ratio
        m += 1
        terms_used += 1

        t = total + term
        if abs(total) >= abs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t

        mag = abs(term)
        if mag > max_term:
            max_term = mag
        if mag <= tol * abs(total + comp):
            small_run += 1
            if small_run >= _STOP_RUN:
                break
        else:
            small_run = 0

    value = total + comp
    result = SeriesResult(value, terms_used, True, max_term)
    if result.cancellation_ratio > cancellation_limit:
        return SeriesResult(value, terms_used, False, max_term, "loss_of_precision")
    return result


def gamma_fn(x: float) -> float:
    """Gamma function (``math.gamma``) with poles reported as :class:`PoleError`."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma has a pole at {x}")
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise DomainError(f"gamma overflows at {x}") from exc


def rgamma(x: float) -> float:
    """Reciprocal gamma, zero at the poles of gamma."""
    if _is_nonpositive_integer(float(x)):
        return 0.0
    return 1.0 / gamma_fn(x)


def digamma(x: float) -> float:
    """Digamma function for ``x > 0`` (``scipy.special.digamma``)."""
    x = float(x)
    if x <= 0:
        if x.is_integer():
            raise PoleError(f"digamma has a pole at {x}")
        raise DomainError(f"digamma is only provided for x > 0, got {x}")
    return float(special.digamma(x))


def euler_gamma() -> float:
    return EULER_GAMMA
