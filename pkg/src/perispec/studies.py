"""Experiment harness: local-limit sweeps, asymptotic validation, regularity
fits and temporal consistency checks.

Every study returns a :class:`StudyTable` whose metadata records the full
configuration, so :func:`rerun` reproduces it bit for bit.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._parallel import parallel_map
from .asymptotics import (
    lambda1_asymptotic_combined,
    lambda1_component_asymptotics,
    lambda2_asymptotic,
)
from .errors import ConfigError, InvalidParameter, PerispecError
from .fields import SpectralField, decay_exponent_fit, make_decay_field, sobolev_norm
from .multipliers import (
    Material,
    eigen_components_quadrature,
    eigenvalues_at_ksq,
    lattice_squared_norms,
)
from .solvers import (
    ModeData,
    Navier,
    Peridynamic,
    PROBLEM_KINDS,
    forced_solution,
    homogeneous_solution,
    navier_of,
    solve_equilibrium,
)

ORACLE_ENVELOPE = 500.0
TARGETS = ("multiplier",) + PROBLEM_KINDS
SWEEPS = ("delta_to_zero", "beta_to_np2")
CHANNELS = ("displacement", "velocity")
DATA_KINDS = ("random", "single_mode", "zero")


@dataclass(frozen=True)
class StudyTable:
    """Rows of ``(parameter, metrics...)`` plus the metadata that produced them."""

    study_kind: str
    parameter_name: str
    parameter_column: tuple
    metric_columns: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        params = tuple(float(x) for x in self.parameter_column)
        metrics = {str(k): tuple(float(x) for x in v) for k, v in self.metric_columns.items()}
        if len(params) < 2:
            raise InvalidParameter("a study table needs at least two rows")
        for name, col in metrics.items():
            if len(col) != len(params):
                raise InvalidParameter(f"column {name!r} has {len(col)} rows, expected {len(params)}")
            if any(math.isnan(x) for x in col):
                raise InvalidParameter(f"column {name!r} contains NaN")
        object.__setattr__(self, "parameter_column", params)
        object.__setattr__(self, "metric_columns", metrics)

    @property
    def columns(self) -> list:
        return [self.parameter_name] + list(self.metric_columns)

    def column(self, name: str) -> tuple:
        if name == self.parameter_name:
            return self.parameter_column
        return self.metric_columns[name]

    def rows(self):
        cols = [self.parameter_column] + list(self.metric_columns.values())
        return list(zip(*cols))

    def to_csv(self) -> str:
        lines = [f"# study_kind: {self.study_kind}"]
        for key, value in self.metadata.items():
            lines.append(f"# {key}: {json.dumps(value)}")
        lines.append(",".join(self.columns))
        for row in self.rows():
            lines.append(",".join(format(x, ".17g") for x in row))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "study_kind": self.study_kind,
            "parameter_name": self.parameter_name,
            "parameter_column": list(self.parameter_column),
            "metric_columns": {k: list(v) for k, v in self.metric_columns.items()},
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "StudyTable":
        doc = json.loads(text)
        return cls(doc["study_kind"], doc["parameter_name"], doc["parameter_column"],
                   doc["metric_columns"], doc.get("metadata", {}))


@dataclass(frozen=True)
class StudyConfig:
    """Parameters shared by every study; unused fields are ignored by a study.

    ``grid`` overrides the default dyadic sweep grid, ``modes`` restricts the
    multiplier sweep to given lattice points (default: all ``0 < |k| <= K``).
    """

    n: int = 1
    delta: float = 1.0
    beta: float = 1.0
    mu: float = 1.0
    lambda_star: float = 1.0
    K: int = 16
    grid: Optional[tuple] = None
    modes: Optional[tuple] = None
    s: float = 1.0
    s1: float = 2.0
    s2: float = 1.0
    S: float = 1.0
    t: float = 1.0
    epsilon: float = 0.5
    seed: int = 0
    data: str = "random"
    radii: tuple = (50.0, 100.0, 200.0)
    beta_values: tuple = (0.0, 2.0)
    channel: str = "displacement"
    h_values: tuple = (1e-2, 5e-3, 2.5e-3)

    def __post_init__(self):
        for name in ("grid", "radii", "beta_values", "h_values"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(float(x) for x in value))
        if self.modes is not None:
            object.__setattr__(self, "modes", tuple(tuple(int(i) for i in k) for k in self.modes))
        if self.data not in DATA_KINDS:
            raise ConfigError(f"data must be one of {DATA_KINDS}, got {self.data!r}")
        if self.channel not in CHANNELS:
            raise ConfigError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if not 0 < self.epsilon < 2:
            raise ConfigError(f"epsilon must lie in (0, 2), got {self.epsilon}")
        if self.K < 1:
            raise ConfigError(f"cutoff K must be >= 1, got {self.K}")

    @classmethod
    def from_dict(cls, doc: dict) -> "StudyConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown study configuration keys: {sorted(unknown)}")
        try:
            return cls(**doc)
        except PerispecError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid study configuration: {exc}") from exc

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = [list(v) if isinstance(v, tuple) else v for v in value]
            out[f.name] = value
        return out

    def material(self, **changes) -> Material:
        params = {"n": self.n, "delta": self.delta, "beta": self.beta,
                  "mu": self.mu, "lambda_star": self.lambda_star}
        params.update(changes)
        return Material(**params)


def _metadata(config: StudyConfig, **extra) -> dict:
    meta = dict(extra)
    meta["config"] = config.to_dict()
    return meta


# -- data ---------------------------------------------------------------------

def study_field(config: StudyConfig, index: float, offset: int = 0) -> SpectralField:
    """Synthetic data for a study: decay field, single mode along ``e1`` or zero."""
    n, K = config.n, config.K
    if config.data == "zero":
        return SpectralField.zeros(n, K)
    if config.data == "single_mode":
        k = (1,) + (0,) * (n - 1)
        e1 = np.eye(n)[0]
        return SpectralField.from_modes(n, K, {k: 0.5 * e1, tuple(-i for i in k): 0.5 * e1})
    return make_decay_field(n, K, index, config.seed + offset)


def default_grid(sweep: str, n: int) -> tuple:
    if sweep == "delta_to_zero":
        return tuple(2.0**-j for j in range(0, 7))
    return tuple(n + 2.0 - 2.0**-j for j in range(1, 8))


# -- local limits ---------------------------------------------------------------

def _sweep_material(config: StudyConfig, sweep: str, value: float) -> Material:
    if sweep == "delta_to_zero":
        return config.material(delta=value)
    return config.material(beta=value)


def _norm_index(target: str, sweep: str, config: StudyConfig) -> float:
    gap = config.beta - config.n
    eps = config.epsilon
    if target == "equilibrium":
        return config.s + (max(0.0, gap) if sweep == "delta_to_zero" else 2.0 - eps)
    if target == "homogeneous":
        theta = max(0.0, gap / 2.0) if sweep == "delta_to_zero" else (2.0 - eps) / 2.0
        return min(config.s1, config.s2 + theta)
    return config.S + (max(0.0, gap) if sweep == "delta_to_zero" else 2.0 - eps)


def _multiplier_shells(config: StudyConfig) -> list:
    if config.modes is not None:
        shells = sorted({sum(i * i for i in k) for k in config.modes})
        if 0 in shells or any(len(k) != config.n for k in config.modes):
            raise ConfigError("modes must be nonzero lattice points of length n")
        return shells
    return [q for q in sorted(lattice_squared_norms(config.n, config.K)) if q <= config.K**2]


def _multiplier_error(m: Material, shells: list) -> tuple:
    err = 0.0
    ref = 0.0
    for q in shells:
        lam1, lam2, _ = eigenvalues_at_ksq(m, q)
        nav1 = -(m.lambda_star + 2.0 * m.mu) * q
        nav2 = -m.mu * q
        diff = abs(lam1 - nav1) if m.n == 1 else max(abs(lam1 - nav1), abs(lam2 - nav2))
        size = abs(nav1) if m.n == 1 else max(abs(nav1), abs(nav2))
        err = max(err, diff)
        ref = max(ref, size)
    return err, ref


def _solution(target: str, op, data: tuple, t: float) -> SpectralField:
    if target == "equilibrium":
        return solve_equilibrium(op, data[0])
    if target == "homogeneous":
        return homogeneous_solution(op, *data).at(t)
    return forced_solution(op, data[0]).at(t)


def local_limit_sweep(target: str, sweep: str, config: StudyConfig) -> StudyTable:
    """Distance between the peridynamic and Navier objects along a sweep.

    ``delta_to_zero`` varies the horizon at fixed ``beta``; ``beta_to_np2``
    varies ``beta`` towards ``n + 2`` at fixed horizon.  For the multiplier
    target the error is ``max_k |M(k) - M^N(k)|`` (operator norm); for the
    solution targets it is the Sobolev norm of ``u - u^N`` at the index where
    convergence is known to hold.
    """
    if target not in TARGETS:
        raise ConfigError(f"unknown sweep target {target!r}")
    if sweep not in SWEEPS:
        raise ConfigError(f"unknown sweep {sweep!r}")
    grid = config.grid if config.grid is not None else default_grid(sweep, config.n)
    materials = [_sweep_material(config, sweep, v) for v in grid]
    meta = _metadata(config, target=target, sweep=sweep)

    if target == "multiplier":
        shells = _multiplier_shells(config)
        results = parallel_map(lambda m: _multiplier_error(m, shells), materials)
        errors = [e for e, _ in results]
        refs = [r for _, r in results]
        param = "delta" if sweep == "delta_to_zero" else "beta"
        return StudyTable(
            "local_limit_sweep", param, grid,
            {"error": errors, "relative_error": [e / r for e, r in zip(errors, refs)]}, meta,
        )

    if target == "equilibrium":
        data = (study_field(config, config.s),)
    elif target == "homogeneous":
        data = (study_field(config, config.s1), study_field(config, config.s2, offset=1))
    else:
        data = (study_field(config, config.S),)
    index = _norm_index(target, sweep, config)
    reference = _solution(target, navier_of(materials[0]), data, config.t)
    ref_norm = sobolev_norm(reference, index)

    def error(m):
        return sobolev_norm(_solution(target, Peridynamic(m), data, config.t) - reference, index)

    errors = parallel_map(error, materials)
    rel = [e / ref_norm if ref_norm > 0 else (0.0 if e == 0 else math.inf) for e in errors]
    meta["norm_index"] = index
    param = "delta" if sweep == "delta_to_zero" else "beta"
    return StudyTable("local_limit_sweep", param, grid,
                      {"error": errors, "relative_error": rel}, meta)


# -- asymptotics -----------------------------------------------------------------

def _relative(approx: float, exact: float) -> float:
    if exact == 0.0:
        return 0.0 if approx == 0.0 else math.inf
    return abs(approx - exact) / abs(exact)


def asymptotic_validation(config: StudyConfig) -> StudyTable:
    """Compare eigenvalues from quadrature with their large-frequency expansions.

    Columns per radius: exact (quadrature) and asymptotic values with
    relative errors for ``lambda2``, ``lambda11``, ``lambda12`` and both
    expansions of ``lambda1``.  ``lambda12`` errors are also given relative to
    ``|lambda1|`` since ``lambda12`` can vanish asymptotically.  The metadata
    names the ``lambda1`` expansion closer to the reference at the largest
    radius.
    """
    m = config.material()
    radii = config.radii
    limit = ORACLE_ENVELOPE / m.delta
    if any(r <= 0 or r > limit for r in radii):
        raise InvalidParameter(f"radii must lie in (0, {limit:g}] for the quadrature oracle")
    direction = np.eye(m.n)[0]

    def row(r):
        exact = eigen_components_quadrature(m, r * direction)
        a2 = lambda2_asymptotic(m, r)
        a11, a12 = lambda1_component_asymptotics(m, r)
        stated, summed = lambda1_asymptotic_combined(m, r)
        lam1 = exact.lambda1
        return {
            "lambda2_exact": exact.lambda2,
            "lambda2_asymptotic": a2.value,
            "lambda2_rel_error": _relative(a2.value, exact.lambda2),
            "lambda2_difference": exact.lambda2 - a2.value,
            "lambda11_exact": exact.lambda11,
            "lambda11_asymptotic": a11.value,
            "lambda11_rel_error": _relative(a11.value, exact.lambda11),
            "lambda12_exact": exact.lambda12,
            "lambda12_asymptotic": a12.value,
            "lambda12_rel_error": _relative(a12.value, exact.lambda12),
            "lambda12_error_over_lambda1": abs(a12.value - exact.lambda12) / abs(lam1),
            "lambda1_exact": lam1,
            "lambda1_as_stated": stated.value,
            "lambda1_as_sum": summed.value,
            "lambda1_as_stated_rel_error": _relative(stated.value, lam1),
            "lambda1_as_sum_rel_error": _relative(summed.value, lam1),
        }

    rows = parallel_map(row, radii)
    columns = {key: [r[key] for r in rows] for key in rows[0]}
    last = rows[-1]
    better = ("as_sum" if last["lambda1_as_sum_rel_error"] <= last["lambda1_as_stated_rel_error"]
              else "as_stated")
    degenerate = lambda1_component_asymptotics(m, radii[0])[1].degenerate
    meta = _metadata(config, branch=lambda2_asymptotic(m, radii[0]).branch,
                     better_lambda1_form=better, lambda12_coefficient_degenerate=degenerate)
    return StudyTable("asymptotic_validation", "radius", radii, columns, meta)


# -- regularity -------------------------------------------------------------------

def _envelope(kind: str, channel: str, data: tuple, md: ModeData) -> np.ndarray:
    """Per-mode amplitude bound of the solution, without the time oscillation."""
    if kind == "equilibrium":
        return md.apply(data[0].coeffs, 1.0 / _neg(md.lam1), 1.0 / _neg(md.lam2))
    if kind == "forced":
        return 2.0 * md.apply(data[0].coeffs, 1.0 / _neg(md.lam1), 1.0 / _neg(md.lam2))
    if channel == "displacement":
        return np.where(md.nonzero[..., None], data[0].coeffs, 0.0)
    return md.apply(data[1].coeffs, 1.0 / np.sqrt(-_neg(md.lam1)), 1.0 / np.sqrt(-_neg(md.lam2)))


def _neg(lam: np.ndarray) -> np.ndarray:
    return np.where(lam < 0, lam, -1.0)


def _operator_for_beta(m: Material, beta: float):
    # beta = n + 2 is the local (Navier) limit of the kernel family
    if beta == m.n + 2:
        return Navier(m.mu, m.lambda_star)
    return Peridynamic(m.with_(beta=beta))


def regularity_study(kind: str, config: StudyConfig) -> StudyTable:
    """Fit the coefficient decay of solutions built from synthetic data.

    For each ``beta`` in ``config.beta_values`` the per-mode amplitude of the
    solution (``|M^-1 b|`` for equilibrium, ``2 |M^-1 b|`` for the forced
    problem, ``|f|`` or ``|sqrt(-M)^-1 g|`` for the displacement or velocity
    channel of the homogeneous problem) is fitted against ``|k|``.  The
    predicted exponent is ``-(s' + n/2 + 0.51)`` with ``s'`` the predicted
    Sobolev index of that channel.  ``beta = n + 2`` selects the Navier
    operator.
    """
    if kind not in PROBLEM_KINDS:
        raise ConfigError(f"unknown problem kind {kind!r}")
    n, K = config.n, config.K
    base = config.material()
    if kind == "homogeneous":
        f = make_decay_field(n, K, config.s1, config.seed)
        g = make_decay_field(n, K, config.s2, config.seed + 1)
        data = (f, g)
        source = f if config.channel == "displacement" else g
        index = config.s1 if config.channel == "displacement" else config.s2
    else:
        index = config.s if kind == "equilibrium" else config.S
        source = make_decay_field(n, K, index, config.seed)
        data = (source,)
    input_slope = decay_exponent_fit(source)

    def row(beta):
        op = _operator_for_beta(base, beta)
        md = ModeData.build(op, n, K)
        md.check_solvable(op)
        env = SpectralField(n, K, _envelope(kind, config.channel, data, md), True)
        fitted = decay_exponent_fit(env)
        gap = beta - n
        if kind == "homogeneous":
            gain = max(0.0, gap / 2.0) if config.channel == "velocity" else 0.0
        else:
            gain = max(0.0, gap)
        predicted = -(index + gain + n / 2.0 + 0.51)
        return {
            "predicted_index": index + gain,
            "predicted_exponent": predicted,
            "fitted_exponent": fitted,
            "exponent_gap": fitted - predicted,
            "predicted_gain": gain,
            "fitted_gain": input_slope - fitted,
        }

    betas = config.beta_values
    rows = parallel_map(row, betas)
    columns = {key: [r[key] for r in rows] for key in rows[0]}
    meta = _metadata(config, kind=kind, input_exponent=input_slope)
    return StudyTable("regularity_study", "beta", betas, columns, meta)


# -- temporal consistency ------------------------------------------------------------

def temporal_consistency_check(kind: str, config: StudyConfig) -> StudyTable:
    """Central second difference in time against ``M U + b`` per mode.

    The residual for a step ``h`` is the largest per-mode discrepancy,
    relative to ``|M_k| * envelope_k`` (homogeneous) or ``|b_k|`` (forced).
    Modes with zero scale are skipped, so zero data gives a zero residual.
    """
    if kind not in ("homogeneous", "forced"):
        raise ConfigError(f"temporal check needs 'homogeneous' or 'forced', got {kind!r}")
    op = Peridynamic(config.material())
    t = config.t
    if kind == "homogeneous":
        f = study_field(config, config.s1)
        g = study_field(config, config.s2, offset=1)
        sol = homogeneous_solution(op, f, g)
        md = sol.modes
        norm_m = np.maximum(np.abs(md.lam1), np.abs(md.lam2))
        slowest = np.sqrt(np.minimum(np.abs(_neg(md.lam1)), np.abs(_neg(md.lam2))))
        env = np.linalg.norm(f.coeffs, axis=-1) + np.linalg.norm(g.coeffs, axis=-1) / slowest
        scale = np.where(md.nonzero, norm_m * env, 0.0)
        source = np.zeros_like(f.coeffs)
    else:
        b = study_field(config, config.S)
        sol = forced_solution(op, b)
        md = sol.modes
        scale = np.linalg.norm(b.coeffs, axis=-1)
        source = b.coeffs

    centre = sol.evaluate(t, 0)
    rhs = md.apply(centre, md.lam1, md.lam2) + source
    active = scale > 0

    def residual(h):
        second = (sol.evaluate(t + h, 0) - 2.0 * centre + sol.evaluate(t - h, 0)) / (h * h)
        defect = np.linalg.norm(second - rhs, axis=-1)
        if not np.any(active):
            return 0.0
        return float(np.max(defect[active] / scale[active]))

    hs = config.h_values
    values = [residual(h) for h in hs]
    meta = _metadata(config, kind=kind)
    return StudyTable("temporal_consistency_check", "h", hs, {"residual": values}, meta)


# -- replay -------------------------------------------------------------------------

def rerun(table: StudyTable) -> StudyTable:
    """Re-run a study from the metadata stored in its table."""
    meta = table.metadata
    config = StudyConfig.from_dict(meta["config"])
    if table.study_kind == "local_limit_sweep":
        return local_limit_sweep(meta["target"], meta["sweep"], config)
    if table.study_kind == "asymptotic_validation":
        return asymptotic_validation(config)
    if table.study_kind == "regularity_study":
        return regularity_study(meta["kind"], config)
    if table.study_kind == "temporal_consistency_check":
        return temporal_consistency_check(meta["kind"], config)
    raise ConfigError(f"unknown study kind {table.study_kind!r}")
