"""Tensor-product quadrature over a ball for axially symmetric integrands.

An integrand over ``B_delta(0)`` in ``R^n`` that depends on ``w`` only through
``r = |w|`` and ``t = cos(angle(w, nu))`` reduces to

    S_{n-2} * int_0^delta int_{-1}^{1} F(r, t) (1 - t^2)^((n-3)/2) dt dr

where ``S_{n-2}`` is the area of the unit sphere in ``R^(n-1)``.  For
``n = 1`` the angular part is the two-point sum over ``t = +-1``.

Radially, the integrands behave like ``r^p`` times an entire function of
``rho * r``.  The interval is split into equal panels whose count follows the
oscillation ``rho * delta``; the first panel uses Gauss-Jacobi nodes with
weight ``r^p`` so the endpoint singularity is integrated exactly, the others
use Gauss-Legendre nodes with ``r^p`` applied pointwise.  The error estimate
compares two rule orders on the same panels.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_chebyt, roots_jacobi, roots_legendre

from .errors import QuadratureFailure
from .specfun import gamma_fn

MAX_NODES = 4096
ABS_TOL = 1e-10
PANEL_ORDER = 20
# radians of oscillation allowed per radial panel
PANEL_PHASE = 8.0


@lru_cache(maxsize=512)
def _rule(kind: str, order: int, alpha: float = 0.0, beta: float = 0.0):
    if kind == "legendre":
        x, w = roots_legendre(order)
    elif kind == "chebyshev":
        x, w = roots_chebyt(order)
    else:
        x, w = roots_jacobi(order, alpha, beta)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def sphere_area(dim: int) -> float:
    """Surface area of the unit sphere S^dim in R^(dim+1)."""
    return 2.0 * math.pi ** ((dim + 1) / 2.0) / gamma_fn((dim + 1) / 2.0)


def angular_rule(n: int, order: int):
    """Nodes ``t`` and weights for ``int_{-1}^{1} F(t) (1-t^2)^((n-3)/2) dt``, times ``S_{n-2}``."""
    if n == 1:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    if n == 2:
        t, w = _rule("chebyshev", order)
    elif n == 3:
        t, w = _rule("legendre", order)
    else:
        expo = (n - 3) / 2.0
        t, w = _rule("jacobi", order, expo, expo)
    return t, w * sphere_area(n - 2)


def radial_rule(delta: float, p: float, panels: int, order: int):
    """Nodes and weights for ``int_0^delta r^p F(r) dr`` on equal panels."""
    h = delta / panels
    x, w = _rule("jacobi", order, 0.0, p)
    nodes = [0.5 * h * (1.0 + x)]
    weights = [w * (0.5 * h) ** (p + 1.0)]
    if panels > 1:
        xl, wl = _rule("legendre", order)
        left = h * np.arange(1, panels)[:, None]
        r = left + 0.5 * h * (1.0 + xl)[None, :]
        nodes.append(r.ravel())
        weights.append((0.5 * h * wl[None, :] * r**p).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def _apply(integrand, n, delta, p, panels, order, ang_order):
    r, wr = radial_rule(delta, p, panels, order)
    t, wt = angular_rule(n, ang_order)
    R, T = np.meshgrid(r, t, indexing="ij")
    vals = np.asarray(integrand(R, T), dtype=float)
    return np.einsum("...ij,i,j->...", vals, wr, wt)


def panel_count(rho: float, delta: float) -> int:
    return max(1, math.ceil(rho * delta / PANEL_PHASE))


def angular_order(rho: float, delta: float) -> int:
    return 24 + math.ceil(0.6 * rho * delta)


def ball_integral(integrand, n: int, delta: float, rho: float, p: float,
                  *, abs_tol: float = ABS_TOL, max_nodes: int = MAX_NODES):
    """Integrate ``r^p * integrand(r, t)`` over the ball in polar form.

    ``p`` must include the ``r^(n-1)`` Jacobian.  ``integrand`` must be
    vectorized and may return a stack of components with shape
    ``(m, *r.shape)``; each component is checked against
    ``abs_tol * max(1, |value|)``.

    Returns
    -------
    values, error_estimates : ndarray
    """
    if p <= -1.0:
        raise QuadratureFailure(f"radial exponent {p} is not integrable")
    panels = panel_count(rho, delta)
    ang = angular_order(rho, delta)
    order = PANEL_ORDER
    while True:
        if panels * (order + 8) > max_nodes or ang + 8 > max_nodes:
            raise QuadratureFailure(
                f"ball quadrature exceeded {max_nodes} nodes per axis "
                f"(n={n}, delta={delta}, rho={rho}, p={p})"
            )
        coarse = _apply(integrand, n, delta, p, panels, order, ang)
        fine = _apply(integrand, n, delta, p, panels, order + 8, ang + max(8, ang // 4))
        err = np.abs(fine - coarse)
        if np.all(err <= abs_tol * np.maximum(1.0, np.abs(fine))):
            return fine, err
        panels *= 2
        ang *= 2
