"""Fourier multipliers of the state-based peridynamic operator.

The multiplier of a radial kernel of horizon ``delta`` and exponent ``beta``
is a real symmetric ``n x n`` matrix with one eigenvalue ``lambda1`` along
``nu`` and a second eigenvalue ``lambda2`` (multiplicity ``n - 1``) on the
orthogonal complement.  It is evaluated two independent ways:

* closed form through generalized hypergeometric series (``specfun.pfq``);
* numerical integration of the bond and state integrals over the ball
  (``quadrature.ball_integral``).

The series path cancels catastrophically once ``|nu| * delta`` grows, so
:func:`eigenvalues_exact` falls back to quadrature when the series reports a
loss of precision.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import quadrature
from .errors import (
    ConsistencyError,
    DomainError,
    InvalidParameter,
    NonConvergence,
    PrecisionLoss,
)
from .specfun import gamma_fn, pfq

# pfq error grows like 1e-16 * (max term / |value|); 1e5 keeps ~1e-11.
SERIES_CANCELLATION_LIMIT = 1e5
CONSISTENCY_RTOL = 1e-10


@dataclass(frozen=True)
class Material:
    """Homogeneous isotropic peridynamic material on the n-torus.

    Parameters
    ----------
    n : int
        Spatial dimension.
    delta : float
        Horizon.
    beta : float
        Kernel exponent, ``beta < n + 2``.
    mu, lambda_star : float
        Lame parameters.
    """

    n: int
    delta: float
    beta: float
    mu: float
    lambda_star: float

    def __post_init__(self):
        if isinstance(self.n, bool) or not float(self.n).is_integer() or self.n < 1:
            raise InvalidParameter(f"n must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        for name in ("delta", "beta", "mu", "lambda_star"):
            value = getattr(self, name)
            if isinstance(value, bool) or not math.isfinite(float(value)):
                raise InvalidParameter(f"{name} must be a finite real, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.delta <= 0:
            raise InvalidParameter(f"delta must be > 0, got {self.delta}")
        if not self.beta < self.n + 2:
            raise InvalidParameter(
                f"beta must satisfy beta < n + 2 (got beta={self.beta:g}, n={self.n})"
            )
        if self.mu <= 0:
            raise InvalidParameter(f"mu must be > 0, got {self.mu}")

    def with_(self, **changes) -> "Material":
        params = {
            "n": self.n, "delta": self.delta, "beta": self.beta,
            "mu": self.mu, "lambda_star": self.lambda_star,
        }
        params.update(changes)
        return Material(**params)


@dataclass(frozen=True)
class MultiplierMatrix:
    """Multiplier stored through its eigenstructure.

    ``direction`` is the unit vector ``nu / |nu|``; it is ``None`` at
    ``nu = 0`` where the matrix vanishes identically.
    """

    dim: int
    lambda1: float
    lambda2: float
    direction: Optional[np.ndarray]
    method: str = "hypergeometric"

    def projector(self) -> np.ndarray:
        if self.direction is None:
            raise DomainError("direction is undefined at nu = 0")
        d = self.direction
        return np.outer(d, d)

    def dense(self) -> np.ndarray:
        if self.direction is None:
            return np.zeros((self.dim, self.dim))
        P = self.projector()
        return self.lambda1 * P + self.lambda2 * (np.eye(self.dim) - P)

    def det(self) -> float:
        if self.direction is None:
            return 0.0
        return self.lambda1 * self.lambda2 ** (self.dim - 1)

    def norm(self) -> float:
        """Operator 2-norm."""
        if self.direction is None:
            return 0.0
        if self.dim == 1:
            return abs(self.lambda1)
        return max(abs(self.lambda1), abs(self.lambda2))


class Coefficients(NamedTuple):
    alpha_b1: float
    alpha_b2: float
    alpha_s: float


class Eigenvalues(NamedTuple):
    lambda1: float
    lambda2: float
    method: str


class EigenComponents(NamedTuple):
    """Bond part ``lambda11`` and state part ``lambda12`` of ``lambda1``."""

    lambda2: float
    lambda11: float
    lambda12: float

    @property
    def lambda1(self) -> float:
        return self.lambda11 + self.lambda12


@dataclass(frozen=True)
class NegativityReport:
    passed: bool
    cutoff: int
    offenders: list = field(default_factory=list)
    checked: int = 0


def _as_vector(nu) -> np.ndarray:
    v = np.atleast_1d(np.asarray(nu, dtype=float))
    if v.ndim != 1:
        raise InvalidParameter(f"frequency must be a vector, got shape {v.shape}")
    return v


def _check_dim(m: Material, v: np.ndarray) -> None:
    if v.shape[0] != m.n:
        raise InvalidParameter(f"frequency has length {v.shape[0]}, material has n={m.n}")


def scaling_constant(m: Material) -> float:
    """Kernel normalization ``c^{delta,beta}``."""
    n, beta = m.n, m.beta
    return (
        2.0 * (n + 2 - beta) * gamma_fn(n / 2.0 + 1.0)
        / (math.pi ** (n / 2.0) * m.delta ** (n + 2 - beta))
    )


# -- hypergeometric path -----------------------------------------------------

def _series(m: Material, rho: float):
    n, beta = m.n, m.beta
    a = (n + 2 - beta) / 2.0
    z = -0.25 * (rho * m.delta) ** 2
    opts = {"cancellation_limit": SERIES_CANCELLATION_LIMIT}
    f23 = pfq([1.0, a], [2.0, (n + 4) / 2.0, a + 1.0], z, **opts)
    f12_bond = pfq([a], [(n + 4) / 2.0, a + 1.0], z, **opts)
    f12_state = pfq([a], [(n + 2) / 2.0, a + 1.0], z, **opts)
    return f23, f12_bond, f12_state


def _require_converged(*results) -> None:
    for r in results:
        if not r.converged:
            raise PrecisionLoss(
                f"hypergeometric series lost precision "
                f"(cancellation ratio {r.cancellation_ratio:.3g})"
            )


def multiplier_coefficients(m: Material, nu) -> Coefficients:
    """Scalar coefficients of ``M = a_b1 I + (a_b2 + a_s) nu (x) nu``."""
    v = _as_vector(nu)
    _check_dim(m, v)
    rho = float(np.linalg.norm(v))
    f23, f12_bond, f12_state = _series(m, rho)
    _require_converged(f23, f12_bond, f12_state)
    return Coefficients(
        alpha_b1=-m.mu * rho**2 * f23.value,
        alpha_b2=-2.0 * m.mu * f12_bond.value,
        alpha_s=-(m.lambda_star - m.mu) * f12_state.value**2,
    )


def _hypergeometric_eigenvalues(m: Material, rho: float) -> tuple[float, float]:
    n, beta = m.n, m.beta
    f23, f12_bond, f12_state = _series(m, rho)
    a = (n + 2 - beta) / 2.0
    z = -0.25 * (rho * m.delta) ** 2
    f34 = pfq([1.0, 2.5, a], [2.0, 1.5, (n + 4) / 2.0, a + 1.0], z,
              cancellation_limit=SERIES_CANCELLATION_LIMIT)
    _require_converged(f23, f12_bond, f12_state, f34)

    alpha_b1 = -m.mu * rho**2 * f23.value
    bond_axial = -2.0 * m.mu * f12_bond.value * rho**2
    state = -(m.lambda_star - m.mu) * f12_state.value**2 * rho**2
    lam1 = alpha_b1 + bond_axial + state
    lam1_alt = -(rho**2) * (3.0 * m.mu * f34.value) + state

    scale = max(abs(lam1), abs(alpha_b1), abs(bond_axial), abs(state), abs(lam1_alt))
    if abs(lam1 - lam1_alt) > CONSISTENCY_RTOL * scale:
        raise ConsistencyError(
            f"lambda1 forms disagree: {lam1!r} vs {lam1_alt!r} (rho={rho}, {m})"
        )
    return lam1, alpha_b1


def multiplier_matrix(m: Material, nu, *, fallback: bool = False) -> MultiplierMatrix:
    """``M^{delta,beta}(nu)`` from the hypergeometric closed form.

    With ``fallback=True`` a loss of series precision switches to the
    quadrature path instead of raising :class:`PrecisionLoss`.
    """
    v = _as_vector(nu)
    _check_dim(m, v)
    rho = float(np.linalg.norm(v))
    if rho == 0.0:
        return MultiplierMatrix(m.n, 0.0, 0.0, None)
    lam1, lam2, method = eigenvalues_exact(m, v, fallback=fallback)
    return MultiplierMatrix(m.n, lam1, lam2, v / rho, method)


def eigenvalues_exact(m: Material, nu, *, fallback: bool = True) -> Eigenvalues:
    """Eigenvalues ``(lambda1, lambda2)`` of the multiplier at ``nu``.

    ``lambda1`` is evaluated through both the ``2F3/1F2`` combination and the
    ``3F4 + 1F2^2`` form; the two must agree to ``1e-10`` relative.  When the
    series lose precision and ``fallback`` is true, the result comes from the
    quadrature oracle and ``method`` says so.
    """
    v = _as_vector(nu)
    _check_dim(m, v)
    return _eigenvalues_at_radius(m, float(np.linalg.norm(v)), fallback)


def _eigenvalues_at_radius(m: Material, rho: float, fallback: bool) -> Eigenvalues:
    if rho == 0.0:
        return Eigenvalues(0.0, 0.0, "exact")
    try:
        lam1, lam2 = _hypergeometric_eigenvalues(m, rho)
        return Eigenvalues(lam1, lam2, "hypergeometric")
    except (PrecisionLoss, NonConvergence):
        if not fallback:
            raise
    comps = _quadrature_components(m, rho)
    return Eigenvalues(comps.lambda1, comps.lambda2, "quadrature")


@lru_cache(maxsize=65536)
def eigenvalues_at_ksq(m: Material, ksq: int) -> Eigenvalues:
    """Cached eigenvalues at an integer squared lattice norm (with fallback)."""
    return _eigenvalues_at_radius(m, math.sqrt(ksq), True)


# -- quadrature path ---------------------------------------------------------

def _sinc(x):
    return np.sinc(x / np.pi)


def _cos_minus_one_over_sq(x):
    # (cos x - 1) / x^2 without cancellation
    return -0.5 * _sinc(0.5 * x) ** 2


def _sin_minus_x_over_cube(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 0.1
    xs = x[small] ** 2
    out[small] = -1 / 6 + xs * (1 / 120 + xs * (-1 / 5040 + xs * (1 / 362880 - xs / 39916800)))
    xl = x[~small]
    out[~small] = (np.sin(xl) - xl) / xl**3
    return out


def _radial_power(m: Material) -> float:
    return m.n + 1.0 - m.beta


@lru_cache(maxsize=65536)
def _quadrature_components(m: Material, rho: float) -> EigenComponents:
    if rho == 0.0:
        return EigenComponents(0.0, 0.0, 0.0)
    c = scaling_constant(m)
    bond = (m.n + 2) * m.mu * c

    def integrand(r, t):
        x = rho * r * t
        t2 = t * t
        return np.stack([
            bond * rho**2 * t2 * t2 * _sin_minus_x_over_cube(x),
            bond * rho**2 * t2 * t2 * _cos_minus_one_over_sq(x),
            0.5 * c * rho * t2 * _sinc(x),
        ])

    (lam2, lam11, half_sine), _ = quadrature.ball_integral(
        integrand, m.n, m.delta, rho, _radial_power(m)
    )
    lam12 = -(m.lambda_star - m.mu) * half_sine**2
    return EigenComponents(float(lam2), float(lam11), float(lam12))


def eigen_components_quadrature(m: Material, nu) -> EigenComponents:
    """Quadrature values of ``lambda2``, ``lambda11`` and ``lambda12``."""
    v = _as_vector(nu)
    _check_dim(m, v)
    return _quadrature_components(m, float(np.linalg.norm(v)))


def eigenvalues_quadrature(m: Material, nu) -> Eigenvalues:
    """Eigenvalues from their integral representations over the ball."""
    comps = eigen_components_quadrature(m, nu)
    return Eigenvalues(comps.lambda1, comps.lambda2, "quadrature")


@lru_cache(maxsize=4096)
def _transverse_bond(m: Material, rho: float) -> float:
    c = scaling_constant(m)
    bond = (m.n + 2) * m.mu * c
    n = m.n

    def integrand(r, t):
        x = rho * r * t
        return bond * rho**2 * t * t * (1.0 - t * t) / (n - 1) * _cos_minus_one_over_sq(x)

    value, _ = quadrature.ball_integral(integrand, n, m.delta, rho, _radial_power(m))
    return float(value)


def multiplier_quadrature(m: Material, nu) -> MultiplierMatrix:
    """Multiplier assembled from the bond and state integrals.

    The bond matrix is integrated as its axial moment (along ``nu``) and its
    transverse moment (averaged over the orthogonal complement, where the
    mixed moments cancel by symmetry of the ball).  The state matrix is the
    outer product of the sine moment, which points along ``nu``.
    """
    v = _as_vector(nu)
    _check_dim(m, v)
    rho = float(np.linalg.norm(v))
    if rho == 0.0:
        return MultiplierMatrix(m.n, 0.0, 0.0, None, "quadrature")
    comps = _quadrature_components(m, rho)
    lam2 = _transverse_bond(m, rho) if m.n > 1 else comps.lambda2
    return MultiplierMatrix(m.n, comps.lambda1, lam2, v / rho, "quadrature")


# -- local reference and matrix functions --------------------------------------

def navier_reference(m, nu) -> MultiplierMatrix:
    """Multiplier of the Navier operator ``(l* + mu) grad div + mu Laplacian``.

    ``m`` only needs ``mu`` and ``lambda_star`` attributes.
    """
    v = _as_vector(nu)
    rho2 = float(v @ v)
    if rho2 == 0.0:
        return MultiplierMatrix(v.shape[0], 0.0, 0.0, None, "navier")
    lam1 = -(m.lambda_star + 2.0 * m.mu) * rho2
    lam2 = -m.mu * rho2
    return MultiplierMatrix(v.shape[0], lam1, lam2, v / math.sqrt(rho2), "navier")


def matrix_function(M: MultiplierMatrix, f: Callable[[float], float],
                    *, at_zero: bool = False) -> np.ndarray:
    """Spectral calculus ``f(M) = f(l1) P + f(l2) (I - P)``.

    At ``nu = 0`` the direction is undefined; ``f(0) I`` is returned only
    when ``at_zero=True``.
    """
    eye = np.eye(M.dim)
    if M.direction is None:
        if not at_zero:
            raise DomainError("matrix function at nu = 0 requires at_zero=True")
        return _checked(f, 0.0) * eye
    P = M.projector()
    f1 = _checked(f, M.lambda1)
    if M.dim == 1:
        return f1 * P
    return f1 * P + _checked(f, M.lambda2) * (eye - P)


def _checked(f, x: float) -> float:
    try:
        with np.errstate(all="raise"):
            y = f(x)
    except (ZeroDivisionError, ValueError, ArithmeticError, FloatingPointError) as exc:
        raise DomainError(f"function undefined at eigenvalue {x!r}: {exc}") from exc
    y = float(y)
    if not math.isfinite(y):
        raise DomainError(f"function not finite at eigenvalue {x!r}")
    return y


def lattice_squared_norms(n: int, cutoff: int) -> dict:
    """Map ``|k|^2 -> [k, ...]`` for ``0 < |k|_inf <= cutoff``."""
    shells: dict = {}
    for k in itertools.product(range(-cutoff, cutoff + 1), repeat=n):
        ksq = sum(i * i for i in k)
        if ksq:
            shells.setdefault(ksq, []).append(k)
    return shells


def validate_negativity(m: Material, K: int) -> NegativityReport:
    """Check ``lambda1(k) < 0`` and ``lambda2(k) < 0`` for ``0 < |k|_inf <= K``."""
    if K < 1:
        raise InvalidParameter(f"cutoff must be >= 1, got {K}")
    offenders = []
    checked = 0
    for ksq, ks in sorted(lattice_squared_norms(m.n, K).items()):
        lam1, lam2, _ = eigenvalues_at_ksq(m, ksq)
        checked += len(ks)
        if not (lam1 < 0 and lam2 < 0):
            offenders.extend(ks)
    return NegativityReport(not offenders, K, offenders, checked)
