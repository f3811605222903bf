"""Deterministic test matrices and the FFT symbol-inverse oracle."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import InvalidSpec, SymbolVanishes
from .operator_core import Topology

MASK64 = (1 << 64) - 1
KINDS = (
    "identity",
    "diagonal",
    "banded_random",
    "circulant_symbol",
    "toeplitz_symbol",
    "shift_causal",
    "geometric_profile",
)
SYMBOL_FLOOR = 1e-12


class DeterministicRng:
    """SplitMix64 stream; identical on every platform."""

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) / 9007199254740992.0

    def symmetric(self) -> float:
        """Uniform on [-1, 1)."""
        return 2.0 * self.uniform() - 1.0


@dataclass
class GeneratorSpec:
    kind: str
    size: int
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "GeneratorSpec":
        try:
            return cls(
                kind=str(doc["kind"]),
                size=int(doc["size"]),
                params=dict(doc.get("params", {})),
                seed=doc.get("seed"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"bad generator spec: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "GeneratorSpec":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"generator spec is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


def _parse_coeffs(raw) -> dict[int, complex]:
    """Accept ``{"k": c}`` or ``[[k, c], ...]`` with ``c`` a number or ``[re, im]``."""
    items = raw.items() if isinstance(raw, Mapping) else raw
    out: dict[int, complex] = {}
    for k, c in items:
        if isinstance(c, (list, tuple)):
            c = complex(c[0], c[1])
        out[int(k)] = out.get(int(k), 0) + complex(c)
    return out


def _check_symbol_offsets(coeffs: Mapping[int, complex], M: int) -> None:
    for k in coeffs:
        if not -M / 2 < k <= M / 2:
            raise InvalidSpec(f"symbol offset {k} outside (-M/2, M/2] for M = {M}")


def circulant_from_coeffs(coeffs: Mapping[int, complex], M: int) -> np.ndarray:
    """``A[m, n] = c[(m - n) mod M]``."""
    first_col = np.zeros(M, dtype=np.complex128)
    for k, c in coeffs.items():
        first_col[k % M] += c
    idx = np.arange(M)
    return first_col[(idx[:, None] - idx[None, :]) % M]


def toeplitz_from_coeffs(coeffs: Mapping[int, complex], M: int) -> np.ndarray:
    A = np.zeros((M, M), dtype=np.complex128)
    idx = np.arange(M)
    diff = idx[:, None] - idx[None, :]
    for k, c in coeffs.items():
        A[diff == k] += c
    return A


def generate(spec: GeneratorSpec | Mapping[str, Any]) -> tuple[np.ndarray, Topology]:
    if not isinstance(spec, GeneratorSpec):
        spec = GeneratorSpec.from_dict(spec)
    M, p = spec.size, spec.params
    if spec.kind not in KINDS:
        raise InvalidSpec(f"unknown generator kind {spec.kind!r}")
    if M < 2:
        raise InvalidSpec(f"size must be >= 2, got {M}")
    seed = 0 if spec.seed is None else int(spec.seed)
    if not 0 <= seed <= MASK64:
        raise InvalidSpec(f"seed {seed} is not a 64-bit unsigned integer")
    try:
        return _build(spec.kind, M, p, seed)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidSpec):
            raise
        raise InvalidSpec(f"bad parameters for {spec.kind}: {exc}") from exc


def _build(kind: str, M: int, p: Mapping[str, Any], seed: int) -> tuple[np.ndarray, Topology]:
    if kind == "identity":
        return np.eye(M, dtype=np.complex128), Topology.linear(M)

    if kind == "diagonal":
        vals = p.get("values")
        if vals is None:
            rng = DeterministicRng(seed)
            vals = [complex(rng.symmetric(), rng.symmetric()) for _ in range(M)]
        vals = [complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v) for v in vals]
        if len(vals) != M:
            raise InvalidSpec(f"diagonal needs {M} values, got {len(vals)}")
        return np.diag(np.array(vals, dtype=np.complex128)), Topology.linear(M)

    if kind == "banded_random":
        w = int(p.get("bandwidth", p.get("w", 1)))
        if w < 0:
            raise InvalidSpec("bandwidth must be nonnegative")
        dominance = float(p.get("dominance", 2 * w + 1))
        rng = DeterministicRng(seed)
        A = np.zeros((M, M), dtype=np.complex128)
        for m in range(M):
            for n in range(max(0, m - w), min(M, m + w + 1)):
                re = rng.symmetric()
                im = rng.symmetric()
                A[m, n] = complex(re, im)
        A += dominance * np.eye(M)
        return A, Topology(p.get("topology", "linear"), M)

    if kind in ("circulant_symbol", "toeplitz_symbol"):
        coeffs = _parse_coeffs(p["coeffs"])
        _check_symbol_offsets(coeffs, M)
        if kind == "circulant_symbol":
            return circulant_from_coeffs(coeffs, M), Topology.circulant(M)
        return toeplitz_from_coeffs(coeffs, M), Topology.linear(M)

    if kind == "shift_causal":
        lam = p.get("lambda", p.get("weight", 2.0))
        lam = complex(lam[0], lam[1]) if isinstance(lam, (list, tuple)) else complex(lam)
        return circulant_from_coeffs({0: 1.0, 1: -lam}, M), Topology.circulant(M)

    if kind == "geometric_profile":
        gamma = float(p.get("gamma", 0.5))
        if not gamma >= 0:
            raise InvalidSpec("gamma must be nonnegative")
        scale = float(p.get("scale", 1.0))
        dominance = float(p.get("dominance", 0.0))
        rng = DeterministicRng(seed)
        A = np.zeros((M, M), dtype=np.complex128)
        for m in range(M):
            for n in range(M):
                phase = 2 * math.pi * rng.uniform()
                A[m, n] = scale * gamma ** abs(m - n) * complex(math.cos(phase), math.sin(phase))
        A += dominance * np.eye(M)
        return A, Topology(p.get("topology", "linear"), M)

    raise InvalidSpec(f"unknown generator kind {kind!r}")


def symbol_inverse_coefficients(coeffs: Mapping[int, complex], M: int) -> dict[int, complex]:
    """Diagonals of the inverse of the circulant built from ``coeffs``.

    The symbol ``f(theta) = sum_k c_k e^{i k theta}`` is sampled on the
    ``M``-point grid, inverted pointwise and transformed back.
    """
    col = np.zeros(M, dtype=np.complex128)
    for k, c in coeffs.items():
        col[int(k) % M] += c
    # f(theta_j) = sum_k c_k e^{2 pi i j k / M}
    samples = np.fft.ifft(col) * M
    mags = np.abs(samples)
    j = int(np.argmin(mags))
    if mags[j] <= SYMBOL_FLOOR:
        raise SymbolVanishes(f"symbol vanishes at grid point {j} (|f| = {mags[j]:.3e})", grid_index=j)
    inv_col = np.fft.fft(1.0 / samples) / M
    topo = Topology.circulant(M)
    return {k: complex(inv_col[k % M]) for k in topo.offsets()}
