"""Truncated Fourier representation of periodic vector fields on ``[0, 2pi]^n``.

Coefficients follow ``g_hat_k = (2 pi)^-n * int g(x) exp(-i k.x) dx`` with
synthesis ``g(x) = sum_k g_hat_k exp(i k.x)``.  A field with cutoff ``K``
stores every lattice point with ``|k|_inf <= K`` in a dense array of shape
``(2K+1,)*n + (n,)``, indexed by ``k + K``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import AliasError, FieldFormatError, InsufficientData, InvalidParameter

DECAY_MARGIN = 0.51
HERMITIAN_RTOL = 1e-12


def _hermitian_defect(coeffs: np.ndarray, n: int) -> float:
    mirrored = np.conj(np.flip(coeffs, axis=tuple(range(n))))
    return float(np.max(np.abs(coeffs - mirrored), initial=0.0))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Immutable truncated Fourier series of an ``R^n``- or ``C^n``-valued field."""

    n: int
    K: int
    coeffs: np.ndarray
    real_flag: bool = True

    def __post_init__(self):
        if self.n < 1 or self.K < 0:
            raise InvalidParameter(f"need n >= 1 and K >= 0, got n={self.n}, K={self.K}")
        shape = (2 * self.K + 1,) * self.n + (self.n,)
        arr = np.array(self.coeffs, dtype=complex)
        if arr.shape != shape:
            raise FieldFormatError(f"coefficient array has shape {arr.shape}, expected {shape}")
        if not np.all(np.isfinite(arr)):
            raise FieldFormatError("coefficients must be finite")
        if self.real_flag:
            scale = max(1.0, float(np.max(np.abs(arr), initial=0.0)))
            if _hermitian_defect(arr, self.n) > HERMITIAN_RTOL * scale:
                raise FieldFormatError("real field violates Hermitian symmetry u_{-k} = conj(u_k)")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "real_flag", bool(self.real_flag))

    @classmethod
    def zeros(cls, n: int, K: int, real_flag: bool = True) -> "SpectralField":
        return cls(n, K, np.zeros((2 * K + 1,) * n + (n,), dtype=complex), real_flag)

    @classmethod
    def from_modes(cls, n: int, K: int, modes: dict, real_flag: bool = True) -> "SpectralField":
        """Build a field from ``{k: vector}``; ``k`` must satisfy ``|k|_inf <= K``."""
        arr = np.zeros((2 * K + 1,) * n + (n,), dtype=complex)
        for k, v in modes.items():
            k = tuple(int(i) for i in np.atleast_1d(k))
            if len(k) != n or max(abs(i) for i in k) > K:
                raise FieldFormatError(f"mode {k} outside the cutoff K={K} in dimension {n}")
            arr[tuple(i + K for i in k)] = np.atleast_1d(np.asarray(v, dtype=complex))
        return cls(n, K, arr, real_flag)

    def with_coeffs(self, coeffs, real_flag=None) -> "SpectralField":
        flag = self.real_flag if real_flag is None else real_flag
        return SpectralField(self.n, self.K, coeffs, flag)

    @cached_property
    def wavevectors(self) -> np.ndarray:
        """Integer lattice points, shape ``(2K+1,)*n + (n,)``."""
        axes = [np.arange(-self.K, self.K + 1)] * self.n
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    @cached_property
    def ksq(self) -> np.ndarray:
        return np.sum(self.wavevectors**2, axis=-1)

    def mode(self, k) -> np.ndarray:
        k = tuple(int(i) for i in np.atleast_1d(k))
        return self.coeffs[tuple(i + self.K for i in k)]

    def nonzero_modes(self):
        """Yield ``(k, vector)`` for every stored nonzero coefficient."""
        for idx in zip(*np.nonzero(np.any(self.coeffs != 0, axis=-1))):
            yield tuple(int(i) - self.K for i in idx), self.coeffs[idx]

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_compatible(self, other)
        return self.with_coeffs(self.coeffs + other.coeffs, self.real_flag and other.real_flag)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_compatible(self, other)
        return self.with_coeffs(self.coeffs - other.coeffs, self.real_flag and other.real_flag)

    def scaled(self, c: float) -> "SpectralField":
        return self.with_coeffs(float(c) * self.coeffs)


def _check_compatible(a: SpectralField, b: SpectralField) -> None:
    if a.n != b.n or a.K != b.K:
        raise InvalidParameter(f"fields differ in shape: (n={a.n}, K={a.K}) vs (n={b.n}, K={b.K})")


def sobolev_norm(field: SpectralField, q: float) -> float:
    """``sqrt(sum_k (1 + |k|^2)^q |u_k|^2)`` over the stored coefficients."""
    weights = (1.0 + field.ksq.astype(float)) ** float(q)
    sq = np.sum(np.abs(field.coeffs) ** 2, axis=-1)
    return float(math.sqrt(math.fsum((weights * sq).ravel())))


def synthesize(field: SpectralField, x) -> np.ndarray:
    """Evaluate ``sum_k u_k exp(i k.x)`` at a point or an array of points ``(..., n)``."""
    x = np.asarray(x, dtype=float)
    if field.n == 1 and x.shape[-1:] != (1,):
        x = x[..., None]
    if x.ndim == 0 or x.shape[-1] != field.n:
        raise InvalidParameter(f"points must have last axis of length {field.n}")
    k = field.wavevectors.reshape(-1, field.n)
    c = field.coeffs.reshape(-1, field.n)
    keep = np.any(c != 0, axis=-1)
    k, c = k[keep], c[keep]
    phase = np.exp(1j * (x @ k.T))
    out = phase @ c
    return out.real if field.real_flag else out


def _check_resolution(resolution: int, K: int) -> None:
    if resolution < 2 * K + 2:
        raise AliasError(f"grid resolution {resolution} < 2K+2 = {2 * K + 2} aliases the field")


def grid_transform(field: SpectralField, resolution: int | None = None) -> np.ndarray:
    """Sample the field on the uniform grid ``x_j = 2 pi j / N``.

    Returns an array of shape ``(N,)*n + (n,)``; real when ``real_flag``.
    """
    N = 2 * field.K + 2 if resolution is None else int(resolution)
    _check_resolution(N, field.K)
    n, K = field.n, field.K
    spectrum = np.zeros((N,) * n + (n,), dtype=complex)
    idx = np.ix_(*[np.arange(-K, K + 1) % N] * n)
    spectrum[idx] = field.coeffs
    grid = np.fft.ifftn(spectrum, axes=tuple(range(n))) * N**n
    return grid.real if field.real_flag else grid


def inverse_transform(grid, K: int, real_flag: bool | None = None) -> SpectralField:
    """Coefficients ``|k|_inf <= K`` of grid samples (inverse of :func:`grid_transform`)."""
    grid = np.asarray(grid)
    n = grid.ndim - 1
    if n < 1 or grid.shape[-1] != n or len(set(grid.shape[:-1])) != 1:
        raise FieldFormatError(f"grid of shape {grid.shape} is not (N,)*n + (n,)")
    N = grid.shape[0]
    _check_resolution(N, K)
    if real_flag is None:
        real_flag = not np.iscomplexobj(grid)
    spectrum = np.fft.fftn(grid, axes=tuple(range(n))) / N**n
    idx = np.ix_(*[np.arange(-K, K + 1) % N] * n)
    coeffs = spectrum[idx]
    if real_flag:
        coeffs = 0.5 * (coeffs + np.conj(np.flip(coeffs, axis=tuple(range(n)))))
    return SpectralField(n, K, coeffs, real_flag)


def make_decay_field(n: int, K: int, s: float, seed: int,
                     margin: float = DECAY_MARGIN) -> SpectralField:
    """Real field with ``|u_k| = |k|^(-s - n/2 - margin)`` and random directions.

    The directions are seeded unit complex vectors, made Hermitian so the
    field is real; ``u_0 = 0``.  With the default margin the field lies in
    ``H^s`` but not in ``H^(s + 0.6)``.
    """
    if K < 2:
        raise InvalidParameter(f"make_decay_field needs K >= 2, got {K}")
    rng = np.random.default_rng(seed)
    shape = (2 * K + 1,) * n + (n,)
    w = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    w = w + np.conj(np.flip(w, axis=tuple(range(n))))
    w /= np.linalg.norm(w, axis=-1, keepdims=True)
    field = SpectralField.zeros(n, K)
    ksq = field.ksq.astype(float)
    with np.errstate(divide="ignore"):
        mag = np.where(ksq > 0, ksq ** (-(s + n / 2.0 + margin) / 2.0), 0.0)
    return SpectralField(n, K, w * mag[..., None], True)


def shell_profile(field: SpectralField, kmin: float, kmax: float):
    """Geometric-mean ``|k|`` and ``|u_k|`` per integer shell ``round(|k|)``.

    Only modes with ``kmin <= round(|k|) <= kmax``, ``|k| <= kmax`` and a
    nonzero coefficient enter.
    """
    radius = np.sqrt(field.ksq.astype(float)).ravel()
    amp = np.linalg.norm(field.coeffs, axis=-1).ravel()
    shell = np.rint(radius)
    keep = (shell >= kmin) & (shell <= kmax) & (radius <= kmax) & (amp > 0)
    radius, amp, shell = radius[keep], amp[keep], shell[keep]
    ks, us = [], []
    for value in np.unique(shell):
        sel = shell == value
        ks.append(np.mean(np.log(radius[sel])))
        us.append(np.mean(np.log(amp[sel])))
    return np.array(ks), np.array(us)


def decay_exponent_fit(field: SpectralField) -> float:
    """Least-squares slope of ``log |u_k|`` against ``log |k|`` over shells in ``[K/4, K]``."""
    log_k, log_u = shell_profile(field, field.K / 4.0, float(field.K))
    if log_k.size < 4:
        raise InsufficientData(f"decay fit needs at least 4 nonempty shells, found {log_k.size}")
    slope, _ = np.polyfit(log_k, log_u, 1)
    return float(slope)


# -- serialization -----------------------------------------------------------

def field_to_dict(field: SpectralField) -> dict:
    entries = [
        {"k": list(k), "re": [float(c.real) for c in v], "im": [float(c.imag) for c in v]}
        for k, v in field.nonzero_modes()
    ]
    return {"n": field.n, "K": field.K, "real_flag": field.real_flag, "entries": entries}


def _int_field(doc, key):
    value = doc.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise FieldFormatError(f"field document needs integer '{key}', got {value!r}")
    return value


def field_from_dict(doc: dict) -> SpectralField:
    """Parse and validate a field document; rejects cutoff and symmetry violations."""
    if not isinstance(doc, dict):
        raise FieldFormatError("field document must be a JSON object")
    allowed = {"n", "K", "real_flag", "entries", "operator", "problem", "t", "derivative"}
    extra = set(doc) - allowed
    if extra:
        raise FieldFormatError(f"unknown field document keys: {sorted(extra)}")
    n, K = _int_field(doc, "n"), _int_field(doc, "K")
    if n < 1 or K < 0:
        raise FieldFormatError(f"invalid n={n} or K={K}")
    real_flag = doc.get("real_flag", True)
    if not isinstance(real_flag, bool):
        raise FieldFormatError("real_flag must be a boolean")
    entries = doc.get("entries", [])
    if not isinstance(entries, list):
        raise FieldFormatError("entries must be a list")
    modes = {}
    for e in entries:
        try:
            k = tuple(int(i) for i in e["k"])
            re = [float(x) for x in e["re"]]
            im = [float(x) for x in e["im"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise FieldFormatError(f"malformed entry {e!r}") from exc
        if len(k) != n or len(re) != n or len(im) != n:
            raise FieldFormatError(f"entry {k} does not have length n={n}")
        if max(abs(i) for i in k) > K:
            raise FieldFormatError(f"entry {k} violates the cutoff K={K}")
        if k in modes:
            raise FieldFormatError(f"duplicate entry {k}")
        modes[k] = np.array(re) + 1j * np.array(im)
    return SpectralField.from_modes(n, K, modes, real_flag)


def save_field(field: SpectralField, path, header: dict | None = None) -> None:
    doc = dict(header or {})
    doc.update(field_to_dict(field))
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_field(path) -> SpectralField:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FieldFormatError(f"{path}: invalid JSON ({exc})") from exc
    return field_from_dict(doc)


def lattice(n: int, K: int):
    """All lattice points with ``|k|_inf <= K`` in lexicographic order."""
    return itertools.product(range(-K, K + 1), repeat=n)
