"""Exact coefficient-space solvers for the peridynamic and Navier operators.

Every operator here is diagonal in the Fourier basis and, for each ``k``,
acts as ``lambda1(k)`` along ``k`` and ``lambda2(k)`` on ``k``'s orthogonal
complement.  Functions of the multiplier (inverse, ``cos(sqrt(-M) t)``, ...)
are therefore applied by splitting each coefficient into its parallel and
transverse parts and scaling each part by a scalar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from ._parallel import parallel_map
from .errors import (
    InvalidParameter,
    NegativityError,
    NonzeroMeanForcing,
    SingularMode,
    WrongProblemKind,
)
from .fields import SpectralField
from .multipliers import Material, eigenvalues_at_ksq

ZERO_MEAN_ATOL = 1e-14
PROBLEM_KINDS = ("equilibrium", "homogeneous", "forced")


@dataclass(frozen=True)
class Peridynamic:
    material: Material
    kind = "peridynamic"

    def eigenvalues(self, ksq: np.ndarray):
        """``(lambda1, lambda2)`` arrays at integer squared norms ``ksq``."""
        values = np.unique(ksq[ksq > 0])
        pairs = parallel_map(lambda q: eigenvalues_at_ksq(self.material, int(q)), values)
        lookup = {int(q): (e.lambda1, e.lambda2) for q, e in zip(values, pairs)}
        lam1 = np.zeros(ksq.shape)
        lam2 = np.zeros(ksq.shape)
        for q, (l1, l2) in lookup.items():
            sel = ksq == q
            lam1[sel] = l1
            lam2[sel] = l2
        return lam1, lam2

    def effective_beta(self, n: int) -> float:
        return self.material.beta

    def describe(self) -> dict:
        m = self.material
        return {"kind": self.kind, "n": m.n, "delta": m.delta, "beta": m.beta,
                "mu": m.mu, "lambda_star": m.lambda_star}


@dataclass(frozen=True)
class Navier:
    mu: float
    lambda_star: float
    kind = "navier"

    def __post_init__(self):
        if not self.mu > 0:
            raise InvalidParameter(f"mu must be > 0, got {self.mu}")
        if not self.lambda_star + 2 * self.mu > 0:
            raise InvalidParameter("Navier operator needs lambda_star + 2 mu > 0")

    def eigenvalues(self, ksq: np.ndarray):
        k2 = ksq.astype(float)
        return -(self.lambda_star + 2.0 * self.mu) * k2, -self.mu * k2

    def effective_beta(self, n: int) -> float:
        # the local operator is the beta -> n + 2 limit
        return n + 2.0

    def describe(self) -> dict:
        return {"kind": self.kind, "mu": self.mu, "lambda_star": self.lambda_star}


def navier_of(m: Material) -> Navier:
    return Navier(m.mu, m.lambda_star)


# -- mode-wise spectral calculus ----------------------------------------------

@dataclass(frozen=True, eq=False)
class ModeData:
    """Eigenvalues and unit directions for every stored lattice point."""

    lam1: np.ndarray
    lam2: np.ndarray
    direction: np.ndarray
    nonzero: np.ndarray

    @classmethod
    def build(cls, op, n: int, K: int) -> "ModeData":
        template = SpectralField.zeros(n, K)
        ksq = template.ksq
        lam1, lam2 = op.eigenvalues(ksq)
        nonzero = ksq > 0
        norm = np.sqrt(np.where(nonzero, ksq, 1).astype(float))
        direction = template.wavevectors / norm[..., None]
        for a in (lam1, lam2, direction, nonzero):
            a.setflags(write=False)
        return cls(lam1, lam2, direction, nonzero)

    def apply(self, coeffs: np.ndarray, f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
        """``f1 * (parallel part) + f2 * (transverse part)`` of each coefficient."""
        d = self.direction
        along = np.sum(d * coeffs, axis=-1, keepdims=True)
        parallel = along * d
        out = f1[..., None] * parallel
        if d.shape[-1] > 1:
            out = out + f2[..., None] * (coeffs - parallel)
        return np.where(self.nonzero[..., None], out, 0.0)

    def check_solvable(self, op) -> None:
        lam1, lam2 = self.lam1[self.nonzero], self.lam2[self.nonzero]
        n = self.direction.shape[-1]
        zero = (lam1 == 0) | ((lam2 == 0) if n > 1 else False)
        if np.any(zero):
            raise SingularMode(f"{op.kind} multiplier is singular at a stored mode")
        bad = ~((lam1 < 0) & ((lam2 < 0) if n > 1 else True))
        if np.any(bad):
            ks = np.argwhere(self.nonzero)[bad] - (self.nonzero.shape[0] // 2)
            offenders = [tuple(int(i) for i in k) for k in ks]
            raise NegativityError(
                f"{op.kind} eigenvalues are not all negative on the cutoff "
                f"(first offender {offenders[0]})", offenders
            )


def _modes(op, field: SpectralField) -> ModeData:
    if isinstance(op, Peridynamic) and op.material.n != field.n:
        raise InvalidParameter(
            f"field dimension {field.n} does not match material dimension {op.material.n}"
        )
    return ModeData.build(op, field.n, field.K)


def _scalar(fn: Callable, lam: np.ndarray) -> np.ndarray:
    safe = np.where(lam < 0, lam, -1.0)
    return fn(safe)


def apply_operator(op, f: SpectralField) -> SpectralField:
    """Coefficients ``M_k f_k``; the ``k = 0`` mode maps to zero."""
    md = _modes(op, f)
    return f.with_coeffs(md.apply(f.coeffs, md.lam1, md.lam2))


def solve_equilibrium(op, b: SpectralField) -> SpectralField:
    """Solve ``L u = b`` in coefficient form: ``u_k = M_k^-1 b_k`` with ``u_0 = 0``.

    The forcing must have zero mean; its ``k = 0`` coefficient is checked
    against an absolute tolerance of ``1e-14`` per component.
    """
    b0 = b.mode((0,) * b.n)
    if np.any(np.abs(b0) > ZERO_MEAN_ATOL):
        raise NonzeroMeanForcing(f"forcing has nonzero mean b_0 = {b0.tolist()}")
    md = _modes(op, b)
    md.check_solvable(op)
    inv1 = _scalar(lambda x: 1.0 / x, md.lam1)
    inv2 = _scalar(lambda x: 1.0 / x, md.lam2)
    return b.with_coeffs(md.apply(b.coeffs, inv1, inv2))


# -- time evolution ------------------------------------------------------------

def _cos_shift(x, p):
    """``cos(x + p pi / 2)`` with the phase applied exactly."""
    return (np.cos(x), -np.sin(x), -np.cos(x), np.sin(x))[p % 4]


def _sin_shift(x, p):
    return (np.sin(x), np.cos(x), -np.sin(x), -np.cos(x))[p % 4]


def _omega_power(lam, p):
    # (sqrt(-lam))^p with integer powers of -lam kept exact for even p
    if p % 2 == 0:
        return (-lam) ** (p // 2)
    return (-lam) ** (p // 2) * np.sqrt(-lam)


@dataclass(frozen=True, eq=False)
class TimeSolution:
    """Closed-form solution of a homogeneous or forced evolution problem.

    ``data`` holds ``(f, g)`` for the homogeneous problem and ``(b,)`` for
    the forced one.  Per-mode eigendata is computed once at construction.
    """

    problem: str
    operator: object
    data: tuple
    modes: ModeData

    @property
    def n(self) -> int:
        return self.data[0].n

    @property
    def K(self) -> int:
        return self.data[0].K

    def _homogeneous_factors(self, lam, t, p):
        omega = np.sqrt(-lam)
        x = omega * t
        f_part = _omega_power(lam, p) * _cos_shift(x, p)
        if p == 0:
            g_part = np.sin(x) / omega
        else:
            g_part = _omega_power(lam, p - 1) * _sin_shift(x, p)
        return f_part, g_part

    def _forced_factor(self, lam, t, p):
        omega = np.sqrt(-lam)
        x = omega * t
        if p == 0:
            # (cos x - 1) / lam without cancellation
            return -2.0 * np.sin(0.5 * x) ** 2 / lam
        return _omega_power(lam, p) * _cos_shift(x, p) / lam

    def derivative(self, t: float, p: int) -> SpectralField:
        """``p``-th time derivative (``p = 0`` is the solution itself)."""
        t = float(t)
        if t < 0 or not math.isfinite(t):
            raise InvalidParameter(f"time must be finite and >= 0, got {t}")
        if p < 0:
            raise InvalidParameter(f"derivative order must be >= 0, got {p}")
        return SpectralField(self.n, self.K, self.evaluate(t, p), self._real())

    def _real(self) -> bool:
        return all(d.real_flag for d in self.data)

    def evaluate(self, t: float, p: int) -> np.ndarray:
        """Coefficient array of the ``p``-th derivative; any real ``t`` is accepted."""
        md = self.modes
        lam1 = _scalar(lambda x: x, md.lam1)
        lam2 = _scalar(lambda x: x, md.lam2)
        origin = (self.K,) * self.n
        if self.problem == "homogeneous":
            f, g = self.data
            if t == 0 and p < 2:
                # cos(0) = I: skip the split so the initial data come back bit for bit
                return np.array((f, g)[p].coeffs)
            f1, g1 = self._homogeneous_factors(lam1, t, p)
            f2, g2 = self._homogeneous_factors(lam2, t, p)
            coeffs = md.apply(f.coeffs, f1, f2) + md.apply(g.coeffs, g1, g2)
            f0, g0 = f.coeffs[origin], g.coeffs[origin]
            zero = {0: f0 + g0 * t, 1: g0}.get(p, np.zeros_like(f0))
        else:
            (b,) = self.data
            coeffs = md.apply(b.coeffs, self._forced_factor(lam1, t, p),
                              self._forced_factor(lam2, t, p))
            b0 = b.coeffs[origin]
            zero = {0: b0 * (0.5 * t * t), 1: b0 * t, 2: b0}.get(p, np.zeros_like(b0))
        coeffs = np.array(coeffs)
        coeffs[origin] = zero
        return coeffs

    def at(self, t: float) -> SpectralField:
        return self.derivative(t, 0)


def _check_pair(f: SpectralField, g: SpectralField) -> None:
    if f.n != g.n or f.K != g.K:
        raise InvalidParameter("initial displacement and velocity must share n and K")


def homogeneous_solution(op, f: SpectralField, g: SpectralField) -> TimeSolution:
    _check_pair(f, g)
    md = _modes(op, f)
    md.check_solvable(op)
    return TimeSolution("homogeneous", op, (f, g), md)


def forced_solution(op, b: SpectralField) -> TimeSolution:
    md = _modes(op, b)
    md.check_solvable(op)
    return TimeSolution("forced", op, (b,), md)


def evolve_homogeneous(op, f: SpectralField, g: SpectralField, t: float) -> SpectralField:
    """``U(t) = cos(sqrt(-M) t) f + sin(sqrt(-M) t) sqrt(-M)^-1 g``, ``U_0 = f_0 + g_0 t``."""
    return homogeneous_solution(op, f, g).at(t)


def evolve_forced(op, b: SpectralField, t: float) -> SpectralField:
    """``U(t) = [cos(sqrt(-M) t) - I] M^-1 b``, with ``U_0 = b_0 t^2 / 2``."""
    return forced_solution(op, b).at(t)


def time_derivative(sol: TimeSolution, t: float, p: int) -> SpectralField:
    """Analytic ``p``-th time derivative, ``p >= 1``."""
    if p < 1:
        raise InvalidParameter(f"derivative order must be >= 1, got {p}")
    return sol.derivative(t, p)


def mode_energy(sol: TimeSolution, t: float) -> float:
    """``sum_{k != 0} |U_k'|^2 + U_k^* (-M_k) U_k`` for the homogeneous problem."""
    if sol.problem != "homogeneous":
        raise WrongProblemKind("mode_energy is defined for the homogeneous problem only")
    md = sol.modes
    u = sol.derivative(t, 0).coeffs
    v = sol.derivative(t, 1).coeffs
    mu = md.apply(u, -md.lam1, -md.lam2)
    kinetic = np.sum(np.abs(v) ** 2, axis=-1)
    potential = np.real(np.sum(np.conj(u) * mu, axis=-1))
    total = np.where(md.nonzero, kinetic + potential, 0.0)
    return float(math.fsum(total.ravel()))


# -- regularity predictions -----------------------------------------------------

class RegularityPrediction(NamedTuple):
    """Spatial Sobolev index and temporal smoothness classes.

    ``gateaux`` and ``classical`` are an integer ``p`` for ``C^p``,
    ``math.inf`` for ``C^inf`` or ``None`` when no class is guaranteed
    (or the notion does not apply, as for the equilibrium problem).
    """

    spatial: float
    gateaux: Optional[float]
    classical: Optional[float]


_EPS = 1e-12


def _largest_strict(bound: float) -> int:
    """Largest integer ``p`` with ``p < bound``."""
    return math.ceil(bound - _EPS) - 1


def predicted_regularity(op, kind: str, *, n: Optional[int] = None,
                         s: Optional[float] = None, s1: Optional[float] = None,
                         s2: Optional[float] = None, S: Optional[float] = None,
                         q: Optional[float] = None) -> RegularityPrediction:
    """Regularity of the solution predicted from the data indices.

    Parameters
    ----------
    kind : {"equilibrium", "homogeneous", "forced"}
    s : float
        Index of the forcing for the equilibrium problem.
    s1, s2 : float
        Indices of the initial displacement and velocity.
    S : float
        Index of the forcing for the forced evolution problem.
    q : float, optional
        Target index for the Gateaux class; by default the class holding at
        the predicted spatial index is reported (``C^inf`` when
        ``beta <= n``, ``C^2`` otherwise).

    The Navier operator is treated as the ``beta = n + 2`` limit.  The
    classical class for ``beta < n`` assumes the Hoelder condition on the data.
    """
    if kind not in PROBLEM_KINDS:
        raise InvalidParameter(f"unknown problem kind {kind!r}")
    if n is None:
        if not isinstance(op, Peridynamic):
            raise InvalidParameter("dimension n is required for the Navier operator")
        n = op.material.n
    beta = op.effective_beta(n)
    gap = beta - n

    def need(name, value):
        if value is None:
            raise InvalidParameter(f"{kind} prediction needs index {name}")
        return float(value)

    if kind == "equilibrium":
        return RegularityPrediction(need("s", s) + max(0.0, gap), None, None)

    if kind == "homogeneous":
        s1, s2 = need("s1", s1), need("s2", s2)
        spatial = min(s1, s2 + max(0.0, gap / 2.0))
        if gap < 0:
            gateaux = math.inf if q is None or q <= spatial else None
            classical = math.inf
        elif gap == 0:
            gateaux = math.inf if q is None or q < spatial else None
            classical = math.inf if (s1 > n and s2 > n) else None
        else:
            if q is None:
                gateaux = 2
            else:
                p = math.floor(min(2 * (s1 - q) / gap - 1, 2 * (s2 - q) / gap) + _EPS)
                gateaux = p + 1 if p >= 1 else None
            p = min(_largest_strict(2 * (s1 - n) / gap), _largest_strict(1 + 2 * (s2 - n) / gap))
            classical = p if p >= 0 else None
        return RegularityPrediction(spatial, gateaux, classical)

    S = need("S", S)
    spatial = S + max(0.0, gap)
    if gap < 0:
        gateaux = math.inf if q is None or q <= S else None
        classical = math.inf
    elif gap == 0:
        gateaux = math.inf if q is None or q < S else None
        classical = math.inf if S > n else None
    else:
        if q is None:
            gateaux = 2
        else:
            p = math.floor(1 + 2 * (S - q) / gap + _EPS)
            gateaux = p + 1 if p >= 1 else None
        p = _largest_strict(2 + 2 * (S - n) / gap)
        classical = p if p >= 0 else None
    return RegularityPrediction(spatial, gateaux, classical)
