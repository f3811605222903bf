"""Windowed pieces, Wiener/Beurling/Sobolev-Wiener norms and decay classification."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import TopologyUnsupported
from .operator_core import (
    NormMode,
    Topology,
    _square,
    bandwidth,
    commutator_with_position,
    operator_norm,
)
from .parallel import ordered_map
from .windows import check_window_fits, hat_weights, piece_range

WIENER_PREFACTOR = 5.0

BANDED_FLOOR = 1e-12
# the outermost kept piece must stand clear of rounding-level tails
BANDED_EDGE = 1e-8
DEFAULT_FIT_FLOOR = 1e-8
FIT_RESIDUAL_MAX = 0.1
TAIL_FRACTION = 0.01
GAMMA_CLAMP = 1.5


def _window_matrix(topo: Topology, N: int, shift: float) -> np.ndarray:
    return hat_weights(N, shift, topo.offset_matrix())


def windowed_piece(A, topo: Topology, N: int, n: int) -> np.ndarray:
    arr = _square(A, topo)
    check_window_fits(N, topo)
    return _window_matrix(topo, N, n) * arr


def _piece_norm(arr: np.ndarray, topo: Topology, N: int, n: int, mode: NormMode) -> float:
    if N == 1:
        # a single diagonal is a weighted partial permutation in every mode
        mask = topo.offset_matrix() == n
        if not mask.any():
            return 0.0
        return float(np.abs(arr[mask]).max())
    return operator_norm(_window_matrix(topo, N, n) * arr, mode)


def piece_norms(A, topo: Topology, N: int = 1, mode: NormMode | str = NormMode.SPECTRAL) -> dict[int, float]:
    """``n -> ||phi_{N,n} A||`` for every shift whose window meets the offset range."""
    arr = _square(A, topo)
    check_window_fits(N, topo)
    mode = NormMode.parse(mode)
    shifts = list(piece_range(N, topo))
    norms = ordered_map(lambda n: _piece_norm(arr, topo, N, n, mode), shifts)
    return dict(zip(shifts, norms))


def wiener_norm(A, topo: Topology, N: int = 1, mode: NormMode | str = NormMode.SPECTRAL) -> float:
    return wiener_from_piece_norms(piece_norms(A, topo, N, mode))


def wiener_from_piece_norms(norms: Mapping[int, float]) -> float:
    total = 0.0
    for n in sorted(norms):
        total += norms[n]
    return WIENER_PREFACTOR * total


def integral_wiener_norm(A, topo: Topology, mode: NormMode | str = NormMode.SPECTRAL, step: float = 0.25) -> float:
    """Trapezoid rule for the integral of ``a -> ||phi_{1,a} A||`` over real shifts ``a``."""
    if not 0 < step <= 0.5:
        raise ValueError(f"step must lie in (0, 0.5], got {step}")
    arr = _square(A, topo)
    check_window_fits(1, topo)
    mode = NormMode.parse(mode)
    if not np.any(arr):
        return 0.0
    K = bandwidth(arr, topo)
    half = K + 2
    count = math.ceil(2 * half / step) + 1
    grid = np.linspace(-half, half, count)
    vals = ordered_map(lambda a: operator_norm(_window_matrix(topo, 1, a) * arr, mode), list(grid))
    return float(np.trapezoid(vals, grid))


def vector_wiener_norm(x, N: int = 1, p_mode: str = "l2") -> float:
    """Windowed vector norm ``sum_n ||(hat(N, n, j) x_j)_j||_p`` (no prefactor)."""
    v = np.asarray(x, dtype=np.complex128).ravel()
    if p_mode not in ("l2", "linf"):
        raise ValueError(f"p_mode must be 'l2' or 'linf', got {p_mode!r}")
    if v.size == 0:
        return 0.0
    pos = np.arange(v.size)
    total = 0.0
    for n in range(-1, math.ceil((v.size - 1) / N) + 2):
        piece = hat_weights(N, n, pos) * v
        total += float(np.linalg.norm(piece) if p_mode == "l2" else np.abs(piece).max())
    return total


def _tail_maxima(norms: Mapping[int, float]) -> list[float]:
    """``t[j] = max over |n| >= j of norms[n]`` for ``j = 0..max|n|``."""
    span = max((abs(n) for n in norms), default=0)
    by_abs = [0.0] * (span + 1)
    for n, w in norms.items():
        by_abs[abs(n)] = max(by_abs[abs(n)], w)
    tails = [0.0] * (span + 1)
    running = 0.0
    for j in range(span, -1, -1):
        running = max(running, by_abs[j])
        tails[j] = running
    return tails


def beurling_from_piece_norms(norms: Mapping[int, float]) -> float:
    tails = _tail_maxima(norms)
    total = tails[0]
    for j in range(1, len(tails)):
        total += 2 * tails[j]
    return total


def beurling_norm(A, topo: Topology, mode: NormMode | str = NormMode.SPECTRAL) -> float:
    return beurling_from_piece_norms(piece_norms(A, topo, 1, mode))


def sobolev_wiener_norm(A, topo: Topology, m: int, mode: NormMode | str = NormMode.SPECTRAL) -> float:
    if topo.is_circulant:
        raise TopologyUnsupported("Sobolev-Wiener norms need the position operator (linear topology)")
    current = _square(A, topo)
    total = 0.0
    for j in range(m + 1):
        if j:
            current = commutator_with_position(current, topo)
        total += wiener_norm(current, topo, 1, mode)
    return total


def causal_split(A, topo: Topology) -> tuple[np.ndarray, np.ndarray]:
    """Split into offsets ``k >= 0`` (causal) and ``k < 0`` (anticausal)."""
    arr = _square(A, topo)
    causal = topo.offset_matrix() >= 0
    return np.where(causal, arr, 0), np.where(causal, 0, arr)


@dataclass
class DecayFit:
    amplitude: float
    gamma_plus: float | None
    gamma_minus: float | None
    residual: float
    floor: float
    samples_plus: int = 0
    samples_minus: int = 0
    residual_plus: float | None = None
    residual_minus: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _fit_side(ns: list[int], ws: list[float]) -> tuple[float, float, float]:
    x = np.asarray(ns, dtype=float)
    y = np.log(np.asarray(ws, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), float(intercept), rms


def exp_decay_fit(piece_norms: Mapping[int, float], floor_rel: float = DEFAULT_FIT_FLOOR) -> DecayFit:
    """Log-linear fit of piece norms against ``|n|``, separately for each side.

    A side with fewer than three samples above ``floor_rel * max`` is left
    unfit (``None``).
    """
    if not 0 < floor_rel < 1:
        raise ValueError(f"floor_rel must lie in (0, 1), got {floor_rel}")
    peak = max(piece_norms.values(), default=0.0)
    if peak <= 0:
        raise ValueError("exp_decay_fit needs at least one positive piece norm")
    cut = floor_rel * peak
    sides = {}
    for sign in (1, -1):
        pts = sorted((abs(n), w) for n, w in piece_norms.items() if sign * n > 0 and w > cut)
        if len(pts) < 3:
            sides[sign] = (None, None, None, len(pts))
            continue
        slope, intercept, rms = _fit_side([p[0] for p in pts], [p[1] for p in pts])
        gamma = min(max(math.exp(slope), 0.0), GAMMA_CLAMP)
        sides[sign] = (gamma, intercept, rms, len(pts))
    fitted = [s for s in sides.values() if s[0] is not None]
    amplitude = max((math.exp(s[1]) for s in fitted), default=peak)
    residual = max((s[2] for s in fitted), default=0.0)
    return DecayFit(
        amplitude=amplitude,
        gamma_plus=sides[1][0],
        gamma_minus=sides[-1][0],
        residual=residual,
        floor=cut,
        samples_plus=sides[1][3],
        samples_minus=sides[-1][3],
        residual_plus=sides[1][2],
        residual_minus=sides[-1][2],
    )


@dataclass(frozen=True)
class DecayClass:
    kind: str
    bandwidth: int | None = None
    side: str | None = None
    gamma: float | None = None

    @property
    def label(self) -> str:
        if self.kind == "banded":
            return f"banded({self.bandwidth})"
        if self.kind == "exponential":
            return f"exponential({self.gamma:.6g})"
        if self.kind == "one_sided_exponential":
            return f"one_sided_exponential({self.side},{self.gamma:.6g})"
        return self.kind

    def __str__(self) -> str:
        return self.label

    def to_dict(self) -> dict:
        return {"label": self.label, "kind": self.kind, "bandwidth": self.bandwidth, "side": self.side, "gamma": self.gamma}


def classify_decay(piece_norms: Mapping[int, float], fit: DecayFit | None = None, max_shift: int | None = None) -> DecayClass:
    """Label a piece-norm sequence (window scale 1).

    Rules, in order: banded, exponential, one-sided exponential, wiener,
    unclassified.  ``max_shift`` is the largest representable ``|n|``; a band
    edge sitting on it cannot be told apart from truncated decay.
    """
    peak = max(piece_norms.values(), default=0.0)
    if peak <= 0:
        return DecayClass("banded", bandwidth=0)
    if max_shift is None:
        max_shift = max(abs(n) for n in piece_norms)
    significant = [abs(n) for n, w in piece_norms.items() if w >= BANDED_FLOOR * peak]
    edge = max(significant)
    edge_mass = max(w for n, w in piece_norms.items() if abs(n) == edge)
    if edge == 0 or (edge < max_shift and edge_mass >= BANDED_EDGE * peak):
        return DecayClass("banded", bandwidth=edge)

    if fit is None:
        fit = exp_decay_fit(piece_norms)

    def good(gamma, rms):
        return gamma is not None and rms < FIT_RESIDUAL_MAX and gamma < 1

    plus_ok = good(fit.gamma_plus, fit.residual_plus)
    minus_ok = good(fit.gamma_minus, fit.residual_minus)
    if plus_ok and minus_ok:
        return DecayClass("exponential", gamma=max(fit.gamma_plus, fit.gamma_minus))
    if plus_ok and fit.samples_minus < 3:
        return DecayClass("one_sided_exponential", side="causal", gamma=fit.gamma_plus)
    if minus_ok and fit.samples_plus < 3:
        return DecayClass("one_sided_exponential", side="anticausal", gamma=fit.gamma_minus)

    reach = max(abs(n) for n, w in piece_norms.items() if w > 0)
    total = math.fsum(piece_norms[n] for n in sorted(piece_norms))
    tail = math.fsum(piece_norms[n] for n in sorted(piece_norms) if abs(n) > reach / 2)
    if tail < TAIL_FRACTION * total:
        return DecayClass("wiener")
    return DecayClass("unclassified")


@dataclass
class ClassReport:
    operator_norm: float
    wiener_1_1: float
    wiener_1_N: dict[int, float]
    integral_wiener: float | None
    beurling: float
    sobolev: dict[int, float]
    fit: DecayFit
    classification: DecayClass
    causal_mass: float
    anticausal_mass: float
    piece_norms: dict[int, float] = field(repr=False, default_factory=dict)


def class_report(
    A,
    topo: Topology,
    mode: NormMode | str = NormMode.SPECTRAL,
    scales: Sequence[int] = (1, 2, 4),
    sobolev_orders: Sequence[int] = (0, 1, 2),
    integral_step: float | None = 0.25,
    floor_rel: float = DEFAULT_FIT_FLOOR,
) -> ClassReport:
    arr = _square(A, topo)
    mode = NormMode.parse(mode)
    norms1 = piece_norms(arr, topo, 1, mode)
    w11 = wiener_from_piece_norms(norms1)
    w1N = {}
    for N in sorted(set(scales)):
        if topo.is_circulant and 2 * N > topo.size:
            continue
        w1N[N] = w11 if N == 1 else wiener_norm(arr, topo, N, mode)
    sob = {}
    if not topo.is_circulant:
        for m in sorted(set(sobolev_orders)):
            sob[m] = sobolev_wiener_norm(arr, topo, m, mode)
    positive = any(w > 0 for w in norms1.values())
    fit = exp_decay_fit(norms1, floor_rel) if positive else DecayFit(0.0, None, None, 0.0, 0.0)
    max_shift = max(abs(topo.min_offset), topo.max_offset)
    return ClassReport(
        operator_norm=operator_norm(arr, mode),
        wiener_1_1=w11,
        wiener_1_N=w1N,
        integral_wiener=integral_wiener_norm(arr, topo, mode, integral_step) if integral_step else None,
        beurling=beurling_from_piece_norms(norms1),
        sobolev=sob,
        fit=fit,
        classification=classify_decay(norms1, fit if positive else None, max_shift),
        causal_mass=math.fsum(norms1[n] for n in sorted(norms1) if n >= 0),
        anticausal_mass=math.fsum(norms1[n] for n in sorted(norms1) if n < 0),
        piece_norms=norms1,
    )
