"""Finite matrix operators with the coordinate resolution of the identity.

A square matrix ``A`` is split into its diagonals: the k-th diagonal keeps the
entries with ``m - n == k`` (linear topology) or ``m - n == k (mod M)``
(circulant topology).  Those diagonals play the role of Fourier coefficients of
the operator, and a Fourier multiplier acts by scaling each diagonal by a
weight.  Everything here works on plain ``numpy`` complex arrays.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    IllConditioned,
    NonConvergence,
    OffsetOutOfRange,
    ShapeMismatch,
    Singular,
    TopologyUnsupported,
)

SVD_SIZE_LIMIT = 512
POWER_TOL = 1e-12
POWER_MAX_ITER = 10000
SINGULAR_PIVOT_REL = 1e-13
RESIDUAL_REL = 1e-8


class TopologyKind(str, enum.Enum):
    LINEAR = "linear"
    CIRCULANT = "circulant"


class NormMode(str, enum.Enum):
    SPECTRAL = "spectral"
    ROW_SUM = "row_sum"
    COL_SUM = "col_sum"

    @classmethod
    def parse(cls, value) -> "NormMode":
        if isinstance(value, cls):
            return value
        return cls(str(value).replace("-", "_"))


@dataclass(frozen=True)
class Topology:
    kind: TopologyKind
    size: int

    def __post_init__(self):
        object.__setattr__(self, "kind", TopologyKind(self.kind))
        if self.size < 1:
            raise ValueError(f"topology size must be positive, got {self.size}")

    @classmethod
    def linear(cls, size: int) -> "Topology":
        return cls(TopologyKind.LINEAR, size)

    @classmethod
    def circulant(cls, size: int) -> "Topology":
        return cls(TopologyKind.CIRCULANT, size)

    @property
    def is_circulant(self) -> bool:
        return self.kind is TopologyKind.CIRCULANT

    @property
    def min_offset(self) -> int:
        if self.is_circulant:
            return -((self.size + 1) // 2) + 1
        return -(self.size - 1)

    @property
    def max_offset(self) -> int:
        if self.is_circulant:
            return self.size // 2
        return self.size - 1

    def offsets(self) -> range:
        return range(self.min_offset, self.max_offset + 1)

    def contains(self, k: int) -> bool:
        return self.min_offset <= k <= self.max_offset

    def offset_matrix(self) -> np.ndarray:
        """Integer matrix whose (m, n) entry is the diagonal offset of that cell."""
        return _offset_matrix(self.kind, self.size)


_OFFSET_CACHE: dict[tuple[TopologyKind, int], np.ndarray] = {}


def _offset_matrix(kind: TopologyKind, size: int) -> np.ndarray:
    key = (kind, size)
    cached = _OFFSET_CACHE.get(key)
    if cached is None:
        idx = np.arange(size)
        diff = idx[:, None] - idx[None, :]
        if kind is TopologyKind.CIRCULANT:
            lo = -((size + 1) // 2) + 1
            diff = np.mod(diff - lo, size) + lo
        cached = diff
        cached.setflags(write=False)
        _OFFSET_CACHE[key] = cached
    return cached


@dataclass
class DiagonalProfile:
    topology: Topology
    values: dict[int, float] = field(default_factory=dict)

    def __getitem__(self, k: int) -> float:
        return self.values.get(k, 0.0)

    def support(self) -> list[int]:
        return sorted(k for k, v in self.values.items() if v > 0)

    def as_array(self) -> tuple[np.ndarray, np.ndarray]:
        ks = np.array(list(self.topology.offsets()))
        return ks, np.array([self[int(k)] for k in ks])


@dataclass
class MultiplierMap:
    """Offset -> complex weight.  Offsets not present have weight zero.

    ``exponents`` is set for purely exponential multipliers; composing two of
    them adds exponents before exponentiating so inverse pairs cancel exactly.
    """

    values: dict[int, complex]
    descriptor: str = ""
    exponents: dict[int, float] | None = None

    def weight(self, k: int) -> complex:
        return self.values.get(k, 0.0)

    def compose(self, other: "MultiplierMap") -> "MultiplierMap":
        desc = f"composite({self.descriptor},{other.descriptor})"
        if self.exponents is not None and other.exponents is not None:
            keys = sorted(set(self.exponents) & set(other.exponents))
            exps = {k: self.exponents[k] + other.exponents[k] for k in keys}
            return MultiplierMap({k: math.exp(e) for k, e in exps.items()}, desc, exps)
        keys = sorted(set(self.values) & set(other.values))
        return MultiplierMap({k: self.values[k] * other.values[k] for k in keys}, desc)

    @classmethod
    def identity(cls, topo: Topology) -> "MultiplierMap":
        return cls(
            {k: 1.0 for k in topo.offsets()},
            "identity",
            {k: 0.0 for k in topo.offsets()},
        )


def as_matrix(A) -> np.ndarray:
    """Validate and convert to a complex128 2-D array."""
    arr = np.asarray(A, dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def _square(A, topo: Topology | None = None) -> np.ndarray:
    arr = as_matrix(A)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeMismatch(f"matrix must be square, got {arr.shape}")
    if topo is not None and topo.size != arr.shape[0]:
        raise ShapeMismatch(f"matrix size {arr.shape[0]} does not match topology size {topo.size}")
    return arr


def extract_diagonal(A, topo: Topology, k: int) -> np.ndarray:
    arr = _square(A, topo)
    if not topo.contains(k):
        raise OffsetOutOfRange(
            f"offset {k} outside [{topo.min_offset}, {topo.max_offset}] for {topo.kind.value} topology"
        )
    return np.where(topo.offset_matrix() == k, arr, 0)


def diagonal_profile(A, topo: Topology) -> DiagonalProfile:
    arr = _square(A, topo)
    offs = topo.offset_matrix()
    shift = -topo.min_offset
    mags = np.zeros(topo.max_offset - topo.min_offset + 1)
    np.maximum.at(mags, (offs + shift).ravel(), np.abs(arr).ravel())
    values = {int(k): float(mags[k + shift]) for k in topo.offsets() if mags[k + shift] > 0}
    return DiagonalProfile(topo, values)


def multiplier_weights(m: MultiplierMap, topo: Topology) -> np.ndarray:
    """Dense weight matrix of ``m`` laid over the cells of ``topo``."""
    shift = -topo.min_offset
    table = np.zeros(topo.max_offset - topo.min_offset + 1, dtype=np.complex128)
    for k, w in m.values.items():
        if topo.contains(k):
            table[k + shift] = w
    return table[topo.offset_matrix() + shift]


def apply_multiplier(A, topo: Topology, m: MultiplierMap) -> np.ndarray:
    arr = _square(A, topo)
    return multiplier_weights(m, topo) * arr


def operator_norm(A, mode: NormMode | str = NormMode.SPECTRAL) -> float:
    arr = as_matrix(A)
    mode = NormMode.parse(mode)
    if arr.size == 0:
        return 0.0
    if mode is NormMode.ROW_SUM:
        return float(np.abs(arr).sum(axis=1).max())
    if mode is NormMode.COL_SUM:
        return float(np.abs(arr).sum(axis=0).max())
    if max(arr.shape) <= SVD_SIZE_LIMIT:
        return float(scipy.linalg.svdvals(arr)[0])
    return _power_spectral_norm(arr)


def _power_spectral_norm(arr: np.ndarray) -> float:
    rng = np.random.default_rng(0)
    x = rng.standard_normal(arr.shape[1]) + 0j
    x /= np.linalg.norm(x)
    lam = 0.0
    residual = math.inf
    for _ in range(POWER_MAX_ITER):
        y = arr.conj().T @ (arr @ x)
        new_lam = float(np.linalg.norm(y))
        if new_lam == 0.0:
            return 0.0
        residual = float(np.linalg.norm(y - np.vdot(x, y) * x)) / new_lam
        x = y / new_lam
        if abs(new_lam - lam) <= POWER_TOL * new_lam and residual <= math.sqrt(POWER_TOL):
            return math.sqrt(new_lam)
        lam = new_lam
    raise NonConvergence(
        f"power iteration did not converge in {POWER_MAX_ITER} iterations", residual=residual
    )


def direct_inverse(A) -> np.ndarray:
    """Inverse via LU with partial pivoting.

    Raises ``Singular`` when a pivot falls below ``1e-13`` times the largest
    entry magnitude; warns ``IllConditioned`` when the residual check fails.
    """
    arr = _square(A)
    n = arr.shape[0]
    scale = float(np.abs(arr).max()) if n else 0.0
    if scale == 0.0:
        raise Singular("zero matrix is singular")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(arr, check_finite=False)
    pivots = np.abs(np.diag(lu))
    worst = int(np.argmin(pivots))
    if pivots[worst] < SINGULAR_PIVOT_REL * scale:
        raise Singular(f"pivot {worst} has magnitude {pivots[worst]:.3e} (scale {scale:.3e})")
    B = scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=np.complex128), check_finite=False)
    norm_a = operator_norm(arr, NormMode.ROW_SUM)
    cond = norm_a * operator_norm(B, NormMode.ROW_SUM)
    residual = operator_norm(arr @ B - np.eye(n), NormMode.ROW_SUM)
    if residual > RESIDUAL_REL * norm_a * max(cond, 1.0):
        warnings.warn(
            f"inverse residual {residual:.3e} exceeds budget (cond estimate {cond:.3e})",
            IllConditioned,
            stacklevel=2,
        )
    return B


def condition_number(A, mode: NormMode | str = NormMode.SPECTRAL) -> float:
    return operator_norm(A, mode) * operator_norm(direct_inverse(A), mode)


def beurling_spectrum(A, topo: Topology, rel_tol: float = 0.0) -> set[int]:
    if not 0.0 <= rel_tol < 1.0:
        raise ValueError(f"rel_tol must lie in [0, 1), got {rel_tol}")
    prof = diagonal_profile(A, topo)
    if not prof.values:
        return set()
    peak = max(prof.values.values())
    return {k for k, v in prof.values.items() if v > rel_tol * peak}


def bandwidth(A, topo: Topology) -> int:
    spec = beurling_spectrum(A, topo, 0.0)
    return max((abs(k) for k in spec), default=0)


def commutator_with_position(A, topo: Topology | None = None) -> np.ndarray:
    """``D A - A D`` with ``D = diag(0, 1, ..., M-1)``; entry (m, n) becomes (m - n) A[m, n]."""
    arr = _square(A)
    if topo is not None and topo.is_circulant:
        raise TopologyUnsupported("the position operator is only defined for linear topology")
    return _offset_matrix(TopologyKind.LINEAR, arr.shape[0]) * arr
