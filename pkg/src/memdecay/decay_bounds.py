"""A-priori decay certificates for inverses.

Two certificates are issued from bandwidth, norms and condition number alone:

* the banded certificate bounds every windowed piece of ``B = A^{-1}``:
  ``||phi_{N,n} B|| <= inf_alpha e^{alpha N (1-|n|)} ||B|| / (1 - (e^{alpha a} - 1) kappa)``
  for ``|n| > 1``, the infimum running over ``0 < alpha < ln(1 + 1/kappa) / a``;
* the Wiener certificate bounds ``||B||_{1,1}`` through the constants
  ``delta_A``, ``epsilon_A`` and the scale selector ``psi_A``.

Both are then checked against the directly computed inverse.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .class_norms import piece_norms, wiener_from_piece_norms, wiener_norm, windowed_piece
from .errors import EmptyDomain, InvalidKappa, WindowTooWide
from .operator_core import (
    NormMode,
    Topology,
    _square,
    apply_multiplier,
    bandwidth,
    direct_inverse,
    operator_norm,
)
from .windows import check_window_fits, exp_multiplier, m_n_exponent, piece_range

ALPHA_EDGE = 1e-9
GRID_POINTS = 64
GOLDEN_RTOL = 1e-12
SOUNDNESS_SLACK = 1e-8
_INVPHI = (math.sqrt(5) - 1) / 2


def alpha_domain(a: float, kappa: float) -> tuple[float, float]:
    """Open interval ``(0, ln(1 + 1/kappa) / a)`` on which the bound's denominator is positive."""
    if kappa < 1 - 1e-9:
        raise InvalidKappa(f"condition number must be >= 1, got {kappa}")
    if a <= 0:
        raise ValueError(f"bandwidth must be positive, got {a}")
    return 0.0, math.log1p(1.0 / kappa) / a


def _log_objective(alpha: float, a: float, N: int, kappa: float, exponent_per_alpha: float) -> float:
    # log of e^{alpha N M} / (1 - (e^{alpha a} - 1) kappa), without the ||B|| factor
    denom = 1.0 - math.expm1(alpha * a) * kappa
    if denom <= 0:
        return math.inf
    return alpha * N * exponent_per_alpha - math.log(denom)


def _golden_min(f, lo: float, hi: float) -> float:
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > GOLDEN_RTOL * max(abs(hi), abs(lo), 1e-300):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = f(x2)
    return (lo + hi) / 2


def optimal_alpha(a: float, N: int, kappa: float, n, d: int = 1) -> tuple[float, float]:
    """Minimise the bound over alpha; returns ``(alpha_star, log_factor)``.

    ``log_factor`` is the log of the bound divided by ``||B||``.  For ``d > 1``
    alpha is taken isotropic and ``a`` is the common half-width per axis.
    """
    nvec = np.atleast_1d(np.asarray(n))
    if nvec.size != d:
        raise ValueError(f"shift has {nvec.size} components, expected {d}")
    # exponent N * M_n(alpha) = alpha * N * m_coef for isotropic alpha
    m_coef = m_n_exponent(np.ones(d), nvec)
    if m_coef >= 0:
        return 0.0, 0.0
    a_sum = a * d
    _, amax = alpha_domain(a_sum, kappa)
    lo, hi = ALPHA_EDGE, amax - ALPHA_EDGE
    if hi <= lo:
        raise EmptyDomain(f"alpha domain (0, {amax:.3e}) too narrow")

    def f(x):
        return _log_objective(x, a_sum, N, kappa, m_coef)

    grid = np.linspace(lo, hi, GRID_POINTS)
    vals = [f(x) for x in grid]
    i = int(np.argmin(vals))
    blo, bhi = grid[max(i - 1, 0)], grid[min(i + 1, GRID_POINTS - 1)]
    x = _golden_min(f, blo, bhi)
    fx = f(x)
    if vals[i] < fx:
        x, fx = float(grid[i]), vals[i]
    return float(x), float(fx)


def banded_inverse_bound(a: float, N: int, norm_A: float, norm_B: float, n, d: int = 1) -> float:
    """Certified bound on ``||phi_{N,n} B||``; ``norm_B`` itself when ``|n| <= 1``."""
    nvec = np.atleast_1d(np.asarray(n))
    if np.max(np.abs(nvec)) <= 1 or a == 0:
        return float(norm_B)
    kappa = norm_A * norm_B
    _, logf = optimal_alpha(a, N, kappa, nvec, d)
    return float(norm_B * math.exp(logf))


@dataclass
class BoundEntry:
    n: int
    alpha_star: float | None
    bound: float


@dataclass
class BandedInverseCertificate:
    a: int
    N: int
    norm_A: float
    norm_B: float
    kappa: float
    alpha_max: float | None
    entries: list[BoundEntry]
    asymptotic_rate: float
    mode: str = "spectral"

    def bound(self, n: int) -> float:
        for e in self.entries:
            if e.n == n:
                return e.bound
        raise KeyError(n)

    def to_dict(self) -> dict:
        return asdict(self)


def banded_inverse_certificate(
    A, topo: Topology, N: int = 1, mode: NormMode | str = NormMode.SPECTRAL, B=None
) -> BandedInverseCertificate:
    arr = _square(A, topo)
    mode = NormMode.parse(mode)
    check_window_fits(N, topo)
    if B is None:
        B = direct_inverse(arr)
    a = bandwidth(arr, topo)
    norm_A = operator_norm(arr, mode)
    norm_B = operator_norm(B, mode)
    kappa = norm_A * norm_B
    entries = []
    if a == 0:
        # no off-diagonal band: only the trivial contraction bound is issued
        for n in piece_range(N, topo):
            entries.append(BoundEntry(n, None, norm_B))
        return BandedInverseCertificate(a, N, norm_A, norm_B, kappa, None, entries, 0.0, mode.value)
    _, amax = alpha_domain(a, kappa)
    if amax <= 2 * ALPHA_EDGE:
        raise EmptyDomain(f"alpha_max = {amax:.3e} leaves no admissible alpha")
    cache: dict[int, BoundEntry] = {}
    for n in piece_range(N, topo):
        if abs(n) <= 1:
            entries.append(BoundEntry(n, None, norm_B))
            continue
        if abs(n) not in cache:
            alpha, logf = optimal_alpha(a, N, kappa, n)
            cache[abs(n)] = BoundEntry(abs(n), alpha, norm_B * math.exp(logf))
        hit = cache[abs(n)]
        entries.append(BoundEntry(n, hit.alpha_star, hit.bound))
    return BandedInverseCertificate(a, N, norm_A, norm_B, kappa, amax, entries, math.exp(-amax), mode.value)


@dataclass
class Verification:
    checked: int
    max_relative_violation: float
    passed: bool
    worst: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _violation(measured: float, bound: float) -> float:
    if bound > 0:
        return (measured - bound) / bound
    return 0.0 if measured <= 0 else math.inf


def verify_banded_certificate(cert: BandedInverseCertificate, B, topo: Topology) -> tuple[Verification, dict[int, float]]:
    measured = piece_norms(B, topo, cert.N, cert.mode)
    worst_v, worst_n = -math.inf, None
    for e in cert.entries:
        v = _violation(measured.get(e.n, 0.0), e.bound)
        if v > worst_v:
            worst_v, worst_n = v, e.n
    worst_v = max(worst_v, 0.0) if cert.entries else 0.0
    ver = Verification(len(cert.entries), worst_v, worst_v <= SOUNDNESS_SLACK, worst_n)
    return ver, measured


def psi_A(A, topo: Topology, t: float, mode: NormMode | str = NormMode.SPECTRAL) -> int:
    """Smallest scale ``K`` whose out-of-band remainder has ``||.||_{1,K} <= t``."""
    if t <= 0:
        raise ValueError(f"threshold must be positive, got {t}")
    arr = _square(A, topo)
    mode = NormMode.parse(mode)
    K = 1
    while True:
        if topo.is_circulant and 2 * K > topo.size:
            raise WindowTooWide(f"psi_A scan reached K = {K} > M/2 = {topo.size / 2}")
        tail = out_of_band(arr, topo, K)
        if not np.any(tail) or wiener_norm(tail, topo, K, mode) <= t:
            return K
        K += 1


def out_of_band(A, topo: Topology, K: int) -> np.ndarray:
    """``A - sum_{|k| <= 2} phi_{K,k} A``."""
    arr = _square(A, topo)
    cover = sum(windowed_piece(arr, topo, K, k) for k in range(-2, 3))
    return arr - cover


def wiener_constants(kappa: float, d: int = 1) -> tuple[float, float]:
    """``(delta_A, epsilon_A)`` as functions of the condition number."""
    delta = ((4 * kappa + 3) / (4 * kappa + 2)) ** (1.0 / (3 * d))
    ratio = (2 * delta - 1) / (delta - 1)
    epsilon = 5.0 ** (-d) / (16 * ratio ** d - 12)
    return delta, epsilon


@dataclass
class WienerInverseCertificate:
    d: int
    kappa: float
    delta_A: float
    epsilon_A: float
    N: int
    norm_B: float
    bound_1_1: float
    bound_1_N: float
    mode: str = "spectral"

    def to_dict(self) -> dict:
        return asdict(self)


def wiener_inverse_certificate(
    A, topo: Topology, mode: NormMode | str = NormMode.SPECTRAL, B=None
) -> WienerInverseCertificate:
    arr = _square(A, topo)
    mode = NormMode.parse(mode)
    if B is None:
        B = direct_inverse(arr)
    norm_B = operator_norm(B, mode)
    kappa = operator_norm(arr, mode) * norm_B
    d = 1
    delta, eps = wiener_constants(kappa, d)
    N = psi_A(arr, topo, eps / norm_B, mode)
    return WienerInverseCertificate(
        d=d,
        kappa=kappa,
        delta_A=delta,
        epsilon_A=eps,
        N=N,
        norm_B=norm_B,
        bound_1_1=norm_B / eps * (2 * N + 1) ** d,
        bound_1_N=norm_B / eps,
        mode=mode.value,
    )


@dataclass
class WienerMeasurement:
    wiener_1_1: float
    wiener_1_N: float
    verification: Verification = field(default=None)


def verify_wiener_certificate(cert: WienerInverseCertificate, B, topo: Topology) -> WienerMeasurement:
    w11 = wiener_from_piece_norms(piece_norms(B, topo, 1, cert.mode))
    w1N = w11 if cert.N == 1 else wiener_norm(B, topo, cert.N, cert.mode)
    v11 = _violation(w11, cert.bound_1_1)
    # middle quantity of the chain: (2N+1)^d ||B||_{1,N}
    vmid = _violation((2 * cert.N + 1) ** cert.d * w1N, cert.bound_1_1)
    worst = max(v11, vmid, 0.0)
    return WienerMeasurement(w11, w1N, Verification(2, worst, worst <= SOUNDNESS_SLACK))


def one_sided_window_bound(
    A, topo: Topology, N: int, n: int, alpha: float, side: str, mode: NormMode | str = NormMode.SPECTRAL
) -> tuple[float, float]:
    """Both sides of ``||phi_{N,+-n} A|| <= e^{N M_n(alpha)} ||e_{+-alpha} A||`` for ``n >= 1``."""
    if topo.is_circulant:
        raise ValueError("one-sided window estimates are stated for linear topology")
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    arr = _square(A, topo)
    mode = NormMode.parse(mode)
    shift = n if side == "right" else -n
    lhs = operator_norm(windowed_piece(arr, topo, N, shift), mode)
    weighted = apply_multiplier(arr, topo, exp_multiplier(alpha, side, topo))
    rhs = math.exp(N * m_n_exponent(alpha, n)) * operator_norm(weighted, mode)
    return lhs, rhs


def two_sided_window_bound(
    A, topo: Topology, N: int, n: int, alpha: float, mode: NormMode | str = NormMode.SPECTRAL
) -> tuple[float, float]:
    """Both sides of ``||phi_{N,n} A|| <= e^{alpha N (1-|n|)} ||h_alpha A||``."""
    arr = _square(A, topo)
    mode = NormMode.parse(mode)
    lhs = operator_norm(windowed_piece(arr, topo, N, n), mode)
    weighted = apply_multiplier(arr, topo, exp_multiplier(alpha, "two_sided", topo))
    rhs = math.exp(N * m_n_exponent(alpha, n)) * operator_norm(weighted, mode)
    return lhs, rhs
