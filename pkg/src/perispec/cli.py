"""Command-line front end.

Usage::

    perispec CONFIG.json [--out PATH] [--format csv|json] [--seed N]

The configuration is a single JSON object with the keys ``command``,
``material``, ``problem`` and ``io``.  Unknown keys are rejected.  Exit
status is 0 on success, 2 for invalid input and 3 for numerical failures;
errors are reported on stderr as one line ``error=<CODE> message=<text>``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import studies
from .errors import ConfigError, NumericalError, PerispecError, ValidationError
from .fields import SpectralField, field_to_dict, load_field, make_decay_field
from .multipliers import (
    Material,
    eigenvalues_exact,
    eigenvalues_quadrature,
    multiplier_matrix,
    multiplier_quadrature,
    navier_reference,
)
from .solvers import (
    Navier,
    Peridynamic,
    forced_solution,
    homogeneous_solution,
    solve_equilibrium,
)
from .studies import StudyConfig, StudyTable

COMMANDS = (
    "multiplier", "eigenvalues", "solve-equilibrium", "solve-wave", "solve-forced",
    "asymptotics", "sweep", "regularity", "temporal-check",
)
FORMATS = ("csv", "json")
TOP_KEYS = {"command", "material", "problem", "io"}
MATERIAL_KEYS = ("n", "delta", "beta", "mu", "lambda_star")
IO_KEYS = {"inputs", "output", "format"}
STUDY_KEYS = {f for f in StudyConfig.__dataclass_fields__} - set(MATERIAL_KEYS)
SOLVE_KEYS = {"operator", "K", "s", "s1", "s2", "S", "seed", "t", "derivative"}

PROBLEM_KEYS = {
    "multiplier": {"nu", "method"},
    "eigenvalues": {"nu", "method"},
    "solve-equilibrium": SOLVE_KEYS,
    "solve-wave": SOLVE_KEYS,
    "solve-forced": SOLVE_KEYS,
    "asymptotics": STUDY_KEYS,
    "sweep": STUDY_KEYS | {"target", "sweep"},
    "regularity": STUDY_KEYS | {"kind"},
    "temporal-check": STUDY_KEYS | {"kind"},
}
INPUT_NAMES = {
    "solve-equilibrium": ("b",),
    "solve-wave": ("f", "g"),
    "solve-forced": ("b",),
}


def _strict(section: str, doc, allowed) -> dict:
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"'{section}' must be a JSON object")
    unknown = set(doc) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {sorted(unknown)}")
    return doc


def load_config(doc, overrides: dict | None = None) -> dict:
    """Validate a run configuration and apply command-line overrides."""
    doc = _strict("config", doc, TOP_KEYS)
    command = doc.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {list(COMMANDS)}, got {command!r}")
    material = _strict("material", doc.get("material"), MATERIAL_KEYS)
    missing = [k for k in MATERIAL_KEYS if k not in material]
    if missing:
        raise ConfigError(f"material is missing {missing}")
    problem = dict(_strict("problem", doc.get("problem"), PROBLEM_KEYS[command]))
    io = dict(_strict("io", doc.get("io"), IO_KEYS))
    overrides = overrides or {}
    if overrides.get("seed") is not None:
        if "seed" not in PROBLEM_KEYS[command]:
            raise ConfigError(f"--seed does not apply to '{command}'")
        problem["seed"] = overrides["seed"]
    for key in ("output", "format"):
        if overrides.get(key) is not None:
            io[key] = overrides[key]
    fmt = io.get("format")
    if fmt is not None and fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {fmt!r}")
    return {"command": command, "material": Material(**material),
            "problem": problem, "io": io}


# -- serialization ---------------------------------------------------------------

def emit(table: StudyTable, fmt: str = "csv") -> bytes:
    """Stable byte serialization of a study table."""
    if fmt == "csv":
        return table.to_csv().encode()
    if fmt == "json":
        return table.to_json().encode()
    raise ConfigError(f"format must be one of {FORMATS}, got {fmt!r}")


def emit_record(record: dict, fmt: str = "csv") -> bytes:
    """Serialize one flat record (scalar values) as a CSV row or JSON object."""
    if fmt == "json":
        return (json.dumps(record, indent=1) + "\n").encode()
    if fmt != "csv":
        raise ConfigError(f"format must be one of {FORMATS}, got {fmt!r}")

    def cell(v):
        return format(v, ".17g") if isinstance(v, float) else str(v)

    header = ",".join(record)
    row = ",".join(cell(v) for v in record.values())
    return (header + "\n" + row + "\n").encode()


def _emit_field(field: SpectralField, header: dict, fmt: str) -> bytes:
    if fmt != "json":
        raise ConfigError("solution fields are written as JSON only")
    doc = dict(header)
    doc.update(field_to_dict(field))
    return (json.dumps(doc, indent=1) + "\n").encode()


# -- commands -----------------------------------------------------------------------

def _frequency(problem: dict, m: Material) -> np.ndarray:
    if "nu" not in problem:
        raise ConfigError("problem.nu (frequency vector) is required")
    nu = np.atleast_1d(np.asarray(problem["nu"], dtype=float))
    if nu.shape != (m.n,):
        raise ConfigError(f"problem.nu must have length n={m.n}")
    return nu


def _run_multiplier(cfg) -> dict:
    m, problem = cfg["material"], cfg["problem"]
    nu = _frequency(problem, m)
    method = problem.get("method", "hypergeometric")
    builders = {
        "hypergeometric": lambda: multiplier_matrix(m, nu, fallback=True),
        "quadrature": lambda: multiplier_quadrature(m, nu),
        "navier": lambda: navier_reference(m, nu),
    }
    if method not in builders:
        raise ConfigError(f"multiplier method must be one of {sorted(builders)}")
    M = builders[method]()
    record = {"lambda1": M.lambda1, "lambda2": M.lambda2, "method": M.method}
    dense = M.dense()
    for i in range(m.n):
        for j in range(m.n):
            record[f"m{i + 1}{j + 1}"] = float(dense[i, j])
    return record


def _run_eigenvalues(cfg) -> dict:
    m, problem = cfg["material"], cfg["problem"]
    nu = _frequency(problem, m)
    method = problem.get("method", "exact")
    if method == "exact":
        ev = eigenvalues_exact(m, nu)
    elif method == "quadrature":
        ev = eigenvalues_quadrature(m, nu)
    else:
        raise ConfigError("eigenvalue method must be 'exact' or 'quadrature'")
    return {"lambda1": ev.lambda1, "lambda2": ev.lambda2, "method": ev.method}


def _operator(cfg):
    m = cfg["material"]
    kind = cfg["problem"].get("operator", "peridynamic")
    if kind == "peridynamic":
        return Peridynamic(m)
    if kind == "navier":
        return Navier(m.mu, m.lambda_star)
    raise ConfigError("operator must be 'peridynamic' or 'navier'")


def _inputs(cfg) -> list:
    """Load input fields, or synthesize decay fields from ``K``, index and ``seed``."""
    command, problem, m = cfg["command"], cfg["problem"], cfg["material"]
    inputs = cfg["io"].get("inputs") or {}
    names = INPUT_NAMES[command]
    unknown = set(inputs) - set(names)
    if unknown:
        raise ConfigError(f"unknown input field(s) {sorted(unknown)} for '{command}'")
    index_key = {"solve-equilibrium": ("s",), "solve-wave": ("s1", "s2"),
                 "solve-forced": ("S",)}[command]
    seed = int(problem.get("seed", 0))
    fields = []
    for i, name in enumerate(names):
        if name in inputs:
            f = load_field(inputs[name])
            if f.n != m.n:
                raise ConfigError(f"input '{name}' has n={f.n}, material has n={m.n}")
        else:
            if "K" not in problem:
                raise ConfigError(f"input '{name}' missing: give io.inputs.{name} or problem.K")
            f = make_decay_field(m.n, int(problem["K"]), float(problem.get(index_key[i], 1.0)),
                                 seed + i)
        fields.append(f)
    return fields


def _run_solve(cfg):
    command, problem = cfg["command"], cfg["problem"]
    op = _operator(cfg)
    data = _inputs(cfg)
    t = float(problem.get("t", 0.0))
    p = int(problem.get("derivative", 0))
    header = {"operator": op.describe()}
    if command == "solve-equilibrium":
        header.update(problem="equilibrium", t=None)
        return solve_equilibrium(op, data[0]), header
    if command == "solve-wave":
        sol = homogeneous_solution(op, data[0], data[1])
        header.update(problem="homogeneous", t=t)
    else:
        sol = forced_solution(op, data[0])
        header.update(problem="forced", t=t)
    if p:
        header["derivative"] = p
    return sol.derivative(t, p), header


def _study_config(cfg, exclude=()) -> StudyConfig:
    m = cfg["material"]
    doc = {k: v for k, v in cfg["problem"].items() if k not in exclude}
    doc.update({k: getattr(m, k) for k in MATERIAL_KEYS})
    return StudyConfig.from_dict(doc)


def _run_study(cfg) -> StudyTable:
    command, problem = cfg["command"], cfg["problem"]
    if command == "asymptotics":
        return studies.asymptotic_validation(_study_config(cfg))
    if command == "sweep":
        config = _study_config(cfg, ("target", "sweep"))
        return studies.local_limit_sweep(problem.get("target", "multiplier"),
                                         problem.get("sweep", "delta_to_zero"), config)
    if "kind" not in problem:
        raise ConfigError(f"'{command}' needs problem.kind")
    config = _study_config(cfg, ("kind",))
    if command == "regularity":
        return studies.regularity_study(problem["kind"], config)
    return studies.temporal_consistency_check(problem["kind"], config)


def run(cfg: dict) -> bytes:
    """Execute a validated configuration and return the output bytes."""
    command = cfg["command"]
    fmt = cfg["io"].get("format")
    if command in ("multiplier", "eigenvalues"):
        runner = _run_multiplier if command == "multiplier" else _run_eigenvalues
        return emit_record(runner(cfg), fmt or "csv")
    if command.startswith("solve-"):
        field, header = _run_solve(cfg)
        return _emit_field(field, header, fmt or "json")
    return emit(_run_study(cfg), fmt or "csv")


def _fail(exc: Exception, status: int) -> int:
    code = getattr(exc, "code", type(exc).__name__.upper())
    message = " ".join(str(exc).split())
    print(f"error={code} message={message}", file=sys.stderr)
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="perispec", description=__doc__.split("\n")[0])
    parser.add_argument("config", help="run configuration (JSON)")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=FORMATS, help="output format")
    parser.add_argument("--seed", type=int, help="override problem.seed")
    args = parser.parse_args(argv)
    try:
        try:
            doc = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config} is not valid JSON: {exc}") from exc
        cfg = load_config(doc, {"output": args.out, "format": args.format, "seed": args.seed})
        payload = run(cfg)
    except ValidationError as exc:
        return _fail(exc, 2)
    except (TypeError, ValueError, KeyError) as exc:
        return _fail(ConfigError(f"invalid configuration value: {exc}"), 2)
    except NumericalError as exc:
        return _fail(exc, 3)
    except PerispecError as exc:
        return _fail(exc, 3)
    out = cfg["io"].get("output")
    if out:
        Path(out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
