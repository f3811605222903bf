"""Triangle windows, the periodic comparison kernel and exponential multipliers.

The triangle window of scale ``N`` shifted by ``n`` has hat
``max(0, 1 - |lam - N n| / N)``; its integer translates form a partition of
unity.  Evaluated at integer offsets it becomes a ``MultiplierMap``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, Overflow, WindowTooWide
from .operator_core import MultiplierMap, Topology

EXP_LIMIT = 700.0


@dataclass(frozen=True)
class TriangleWindow:
    N: int
    dim: int = 1

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"window scale must be a positive integer, got {self.N}")
        if self.dim < 1:
            raise ValueError(f"window dimension must be positive, got {self.dim}")


@dataclass(frozen=True)
class EtaParams:
    a: float
    alpha: float

    def __post_init__(self):
        if not (self.a > 0 and self.alpha > 0):
            raise ValueError(f"eta parameters must be positive, got a={self.a}, alpha={self.alpha}")


def _as_vec(x, dim: int, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1 or v.shape[0] != dim:
        raise DimensionMismatch(f"{name} has {v.shape[0] if v.ndim == 1 else v.shape} components, window dim is {dim}")
    return v


def hat_value(w: TriangleWindow, n, lam) -> float:
    nv = _as_vec(n, w.dim, "shift")
    lv = _as_vec(lam, w.dim, "lambda")
    out = 1.0
    for nj, lj in zip(nv, lv):
        out *= max(0.0, 1.0 - abs(lj - w.N * nj) / w.N)
    return out


def hat_weights(N: int, shift: float, ks: np.ndarray) -> np.ndarray:
    """Vectorised 1-d hat ``max(0, 1 - |k - N*shift| / N)`` over offsets ``ks``."""
    return np.maximum(0.0, 1.0 - np.abs(np.asarray(ks, dtype=float) - N * shift) / N)


def check_window_fits(N: int, topo: Topology) -> None:
    if topo.is_circulant and 2 * N > topo.size:
        raise WindowTooWide(f"window scale {N} needs 2N <= M, but M = {topo.size}")


def window_multiplier(w: TriangleWindow, n: int, topo: Topology) -> MultiplierMap:
    if w.dim != 1:
        raise DimensionMismatch("matrix windows are one-dimensional")
    check_window_fits(w.N, topo)
    values = {}
    for k in range(max(topo.min_offset, w.N * n - w.N + 1), min(topo.max_offset, w.N * n + w.N - 1) + 1):
        values[k] = 1.0 - abs(k - w.N * n) / w.N
    return MultiplierMap(values, f"triangle(N={w.N},n={n})")


def piece_range(N: int, topo: Topology) -> range:
    """Window shifts ``n`` whose support meets the topology's offset range."""
    lo = math.floor(topo.min_offset / N)
    hi = math.ceil(topo.max_offset / N)
    return range(lo, hi + 1)


def eta_value(p: EtaParams, lam: float) -> float:
    a, alpha = p.a, p.alpha
    # reduce to the base period [-3a, a)
    x = (lam + 3 * a) % (4 * a) - 3 * a
    if x >= -a:
        return math.exp(-alpha * x)
    return math.exp(alpha * (2 * a + x))


def eta_fourier_coeff(p: EtaParams, n: int) -> float:
    """Closed-form coefficient ``2 * int_0^{2a} e^{alpha(a-lam)} cos(pi n lam / 2a) dlam``."""
    a, alpha = p.a, p.alpha
    n = abs(int(n))
    sign = -1.0 if n % 2 else 1.0
    return (
        8 * alpha * a * a * math.exp(alpha * a) * (1 - math.exp(-2 * alpha * a) * sign)
        / (4 * alpha * alpha * a * a + math.pi ** 2 * n * n)
    )


def eta_synthesis_coeff(p: EtaParams, n: int) -> float:
    """Cosine-series coefficient on period ``4a``: ``c_n / (2a)``."""
    return eta_fourier_coeff(p, n) / (2 * p.a)


def h_zeroth_coeff(p: EtaParams) -> float:
    """Zeroth coefficient of ``eta - 1`` in the ``c_n`` normalisation."""
    return eta_fourier_coeff(p, 0) - 4 * p.a


def eta_partial_sum(p: EtaParams, terms: int, lam: float = 0.0) -> float:
    """Cosine synthesis of ``eta(. - a)`` at ``lam`` truncated after ``terms`` harmonics."""
    a, alpha = p.a, p.alpha
    n = np.arange(1, terms + 1, dtype=float)
    sign = np.where(n % 2 == 1, -1.0, 1.0)
    coeffs = (
        8 * alpha * a * a * math.exp(alpha * a) * (1 - math.exp(-2 * alpha * a) * sign)
        / (4 * alpha * alpha * a * a + math.pi ** 2 * n * n)
    ) / (2 * a)
    tail = coeffs * np.cos(math.pi * n * lam / (2 * a))
    # add smallest terms first
    return float(eta_synthesis_coeff(p, 0) / 2 + math.fsum(tail[::-1]))


EXP_SHAPES = ("two_sided", "right", "left")


def exp_multiplier(alpha: float, shape: str, topo: Topology) -> MultiplierMap:
    """Weights ``e^{alpha|k|}`` (two_sided), ``e^{alpha k}`` (right) or ``e^{-alpha k}`` (left)."""
    if shape not in EXP_SHAPES:
        raise ValueError(f"shape must be one of {EXP_SHAPES}, got {shape!r}")
    kmax = max(abs(topo.min_offset), abs(topo.max_offset))
    if abs(alpha) * kmax > EXP_LIMIT:
        raise Overflow(f"|alpha| * max|k| = {abs(alpha) * kmax:.1f} exceeds {EXP_LIMIT}")
    exps = {}
    for k in topo.offsets():
        if shape == "two_sided":
            exps[k] = alpha * abs(k)
        elif shape == "right":
            exps[k] = alpha * k
        else:
            exps[k] = -alpha * k
    return MultiplierMap({k: math.exp(e) for k, e in exps.items()}, f"exp({shape},{alpha})", exps)


def m_n_exponent(alpha: Sequence[float] | float, n: Sequence[int] | int) -> float:
    """``sum over k with n_k != 0 of alpha_k (1 - |n_k|)``."""
    av = np.atleast_1d(np.asarray(alpha, dtype=float))
    nv = np.atleast_1d(np.asarray(n))
    if av.shape != nv.shape:
        raise DimensionMismatch(f"alpha has shape {av.shape}, n has shape {nv.shape}")
    return float(sum(a * (1 - abs(int(k))) for a, k in zip(av, nv) if k != 0))
