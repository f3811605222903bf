"""Constructive inversion by band splitting plus a Neumann series.

``A = C + D`` where ``C`` keeps the five central windows of scale ``N`` and
``D`` holds the far diagonals.  With ``L = C^{-1}`` the inverse is
``B = L sum_j (-D L)^j``, convergent in the Wiener norm once
``||D L||_{1,N} < 1``.  Powers for the spectral-radius sequences live here too.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .class_norms import beurling_norm, wiener_norm, windowed_piece
from .errors import NoConvergentScale, NonConvergence, Overflow, Singular, WindowTooWide
from .operator_core import NormMode, Topology, _square, bandwidth, direct_inverse, operator_norm
from .windows import check_window_fits

AUTO_TARGET = 0.5
MAX_POWER = 24


@dataclass
class NeumannTrace:
    N: int
    iterations: int = 0
    wiener_norm_partials: list[float] = field(default_factory=list)
    increments: list[float] = field(default_factory=list)
    contraction: float | None = None
    residual: float = math.nan
    converged: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def band_split(A, topo: Topology, N: int) -> tuple[np.ndarray, np.ndarray]:
    arr = _square(A, topo)
    check_window_fits(N, topo)
    C = np.zeros_like(arr)
    for k in range(-2, 3):
        C = C + windowed_piece(arr, topo, N, k)
    return C, arr - C


def _scale_ok(arr, topo, N, mode):
    C, D = band_split(arr, topo, N)
    try:
        L = direct_inverse(C)
    except Singular:
        return None
    if not np.any(D):
        return C, D, L, 0.0
    q = wiener_norm(D, topo, N, mode) * wiener_norm(L, topo, N, mode)
    return C, D, L, q


def neumann_inverse(
    A,
    topo: Topology,
    N: int | str = "auto",
    tol: float = 1e-10,
    max_iter: int = 200,
    mode: NormMode | str = NormMode.SPECTRAL,
) -> tuple[np.ndarray, NeumannTrace]:
    """Approximate inverse and its iteration trace.

    Raises ``NonConvergence`` (carrying the trace) when ``max_iter`` is hit.
    """
    arr = _square(A, topo)
    mode = NormMode.parse(mode)
    if N == "auto":
        chosen = None
        limit = max(1, math.ceil(bandwidth(arr, topo) / 2))
        for K in range(1, limit + 1):
            try:
                got = _scale_ok(arr, topo, K, mode)
            except WindowTooWide:
                break
            if got is not None and got[3] < AUTO_TARGET:
                chosen = (K, got)
                break
        if chosen is None:
            raise NoConvergentScale("no window scale gives ||D||_{1,N} ||L||_{1,N} < 1/2")
        N, (C, D, L, q) = chosen
    else:
        N = int(N)
        got = _scale_ok(arr, topo, N, mode)
        if got is None:
            raise Singular(f"central band at scale {N} is singular")
        C, D, L, q = got

    trace = NeumannTrace(N=N, contraction=q)
    step = -D @ L
    term = L
    total = L.copy()
    partial = wiener_norm(total, topo, N, mode)
    trace.wiener_norm_partials.append(partial)
    for it in range(1, max_iter + 1):
        term = term @ step
        total = total + term
        inc = wiener_norm(term, topo, N, mode)
        trace.increments.append(inc)
        trace.wiener_norm_partials.append(wiener_norm(total, topo, N, mode))
        trace.iterations = it
        if not math.isfinite(inc):
            break
        if inc < tol:
            trace.converged = True
            break
    n = arr.shape[0]
    trace.residual = operator_norm(arr @ total - np.eye(n), NormMode.ROW_SUM)
    if not trace.converged:
        raise NonConvergence(
            f"Neumann series not converged after {trace.iterations} iterations",
            residual=trace.residual,
            trace=trace,
        )
    return total, trace


def spectral_radius_sequence(A, topo: Topology, norm: str = "wiener", m_max: int = 16,
                             mode: NormMode | str = NormMode.SPECTRAL) -> list[float]:
    """``(||A^m||)^{1/m}`` for ``m = 1..m_max`` in the Wiener (``||.||_{1,1}``) or Beurling norm."""
    if m_max > MAX_POWER:
        raise ValueError(f"m_max must be <= {MAX_POWER}, got {m_max}")
    if norm not in ("wiener", "beurling"):
        raise ValueError(f"norm must be 'wiener' or 'beurling', got {norm!r}")
    arr = _square(A, topo)
    mode = NormMode.parse(mode)
    out = []
    power = np.eye(arr.shape[0], dtype=np.complex128)
    for m in range(1, m_max + 1):
        power = power @ arr
        if not np.all(np.isfinite(power)):
            raise Overflow(f"A^{m} overflowed")
        val = wiener_norm(power, topo, 1, mode) if norm == "wiener" else beurling_norm(power, topo, mode)
        out.append(val ** (1.0 / m))
    return out


def matrix_powers(A, m_max: int) -> list[np.ndarray]:
    arr = _square(A)
    powers = []
    power = np.eye(arr.shape[0], dtype=np.complex128)
    for _ in range(m_max):
        power = power @ arr
        powers.append(power)
    return powers
