import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memdecay.class_norms import wiener_norm
from memdecay.decay_bounds import (
    alpha_domain,
    banded_inverse_bound,
    banded_inverse_certificate,
    one_sided_window_bound,
    optimal_alpha,
    out_of_band,
    psi_A,
    verify_banded_certificate,
    verify_wiener_certificate,
    wiener_constants,
    wiener_inverse_certificate,
)
from memdecay.errors import EmptyDomain, InvalidKappa
from memdecay.generators import circulant_from_coeffs, toeplitz_from_coeffs
from memdecay.operator_core import Topology, direct_inverse

from conftest import tridiagonal


def closed_form_alpha(a, N, kappa, n):
    # stationary point of alpha N (1-|n|) - log(1 - (e^{alpha a} - 1) kappa);
    # when it is not positive the infimum sits at the alpha -> 0 edge
    m = N * (abs(n) - 1)
    return max(math.log(m * (1 + kappa) / (kappa * (a + m))) / a, 0.0)


def closed_form_bound(a, N, norm_B, kappa, n):
    al = closed_form_alpha(a, N, kappa, n)
    return norm_B * math.exp(al * N * (1 - abs(n))) / (1 - math.expm1(al * a) * kappa)


class TestAlphaDomain:
    @pytest.mark.parametrize(
        "a, kappa, expected", [(1, 1, math.log(2)), (1, 3, 0.28768), (3, 3, 0.09589)]
    )
    def test_examples(self, a, kappa, expected):
        assert alpha_domain(a, kappa)[1] == pytest.approx(expected, abs=5e-6)

    def test_invalid_kappa(self):
        with pytest.raises(InvalidKappa):
            alpha_domain(1, 0.5)
        alpha_domain(1, 1 - 1e-10)


class TestBandedBound:
    def test_trivial_shifts(self):
        for n in (-1, 0, 1):
            assert banded_inverse_bound(1, 1, 6.0, 0.5, n) == 0.5

    def test_n5_matches_closed_form(self):
        alpha, _ = optimal_alpha(1, 1, 3.0, 5)
        # the objective is flat at the minimum, so alpha is only located to ~sqrt(eps)
        assert alpha == pytest.approx(math.log(16 / 15), rel=1e-6)
        assert banded_inverse_bound(1, 1, 6.0, 0.5, 5) == pytest.approx(closed_form_bound(1, 1, 0.5, 3.0, 5), rel=1e-10)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 4), st.floats(1.0, 50.0), st.integers(2, 60))
    def test_against_closed_form(self, a, N, kappa, n):
        alpha, logf = optimal_alpha(a, N, kappa, n)
        expected = closed_form_alpha(a, N, kappa, n)
        assert alpha == pytest.approx(expected, rel=1e-6, abs=1e-7)
        if expected > 0:
            assert math.exp(logf) == pytest.approx(closed_form_bound(a, N, 1.0, kappa, n), rel=1e-8)
        else:
            # the search stops 1e-9 inside the open interval
            assert 1 <= math.exp(logf) <= 1 + 2e-9 * kappa * a * (1 + N)

    def test_rate_limit(self):
        a, kappa = 1, 3.0
        _, amax = alpha_domain(a, kappa)
        alphas = [optimal_alpha(a, 1, kappa, n)[0] for n in (2, 5, 10, 50, 10**5)]
        assert all(x < y for x, y in zip(alphas, alphas[1:]))
        assert alphas[-1] < amax
        assert amax - alphas[-1] < 1e-3
        assert math.exp(-amax) == pytest.approx(0.75, rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.integers(1, 3), st.floats(1.0, 100.0))
    def test_monotone_in_n(self, a, N, kappa):
        bounds = [banded_inverse_bound(a, N, kappa, 1.0, n) for n in range(2, 40)]
        assert all(y <= x * (1 + 1e-12) for x, y in zip(bounds, bounds[1:]))

    def test_multidimensional_shift(self):
        # isotropic alpha: n = (10, 0) behaves like n = 10 in d=1 with summed half-width 2
        b2 = banded_inverse_bound(1, 1, 2.0, 1.0, [10, 0], d=2)
        assert b2 == pytest.approx(closed_form_bound(2, 1, 1.0, 2.0, 10), rel=1e-9)
        assert b2 < 1

    def test_empty_domain(self):
        with pytest.raises(EmptyDomain):
            banded_inverse_bound(1, 1, 1e9, 1.0, 4)


class TestBandedCertificate:
    def test_identity_degenerate(self):
        topo = Topology.linear(6)
        cert = banded_inverse_certificate(2 * np.eye(6), topo)
        assert cert.a == 0
        assert all(e.bound == 0.5 for e in cert.entries)
        ver, measured = verify_banded_certificate(cert, direct_inverse(2 * np.eye(6)), topo)
        assert ver.passed
        assert all(v == 0 for n, v in measured.items() if n)

    def test_circulant_symbol(self, circ_4_2cos):
        A, topo = circ_4_2cos(128)
        cert = banded_inverse_certificate(A, topo)
        B = direct_inverse(A)
        assert cert.kappa == pytest.approx(3.0, rel=1e-10)
        assert cert.norm_B == pytest.approx(0.5, rel=1e-10)
        assert cert.asymptotic_rate == pytest.approx(0.75, rel=1e-9)
        ver, measured = verify_banded_certificate(cert, B, topo)
        assert ver.passed and ver.max_relative_violation == 0
        r = 2 - math.sqrt(3)
        assert measured[5] == pytest.approx(r**5 / (2 * math.sqrt(3)), rel=1e-9)
        assert cert.bound(5) >= measured[5]
        assert cert.bound(5) == pytest.approx(closed_form_bound(1, 1, 0.5, 3.0, 5), rel=1e-9)

    def test_tridiagonal_margin(self):
        M = 64
        topo = Topology.linear(M)
        A = tridiagonal(M, -1, 4, -1)
        B = direct_inverse(A)
        cert = banded_inverse_certificate(A, topo)
        ver, measured = verify_banded_certificate(cert, B, topo)
        assert ver.passed
        assert all(e.bound >= measured[e.n] for e in cert.entries)

    def test_entry_invariants(self, circ_4_2cos):
        A, topo = circ_4_2cos(64)
        cert = banded_inverse_certificate(A, topo, N=2)
        for e in cert.entries:
            if abs(e.n) <= 1:
                assert e.bound == cert.norm_B
            else:
                assert 0 < e.alpha_star < cert.alpha_max
        by_abs = sorted({abs(e.n): e.bound for e in cert.entries if abs(e.n) >= 2}.items())
        assert all(y <= x for (_, x), (_, y) in zip(by_abs, by_abs[1:]))

    @settings(max_examples=15, deadline=None)
    @given(st.integers(8, 40), st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**31))
    def test_soundness_random(self, M, w, N, seed):
        from memdecay.generators import generate

        A, topo = generate({"kind": "banded_random", "size": M, "params": {"bandwidth": w}, "seed": seed})
        B = direct_inverse(A)
        for mode in ("spectral", "row_sum", "col_sum"):
            cert = banded_inverse_certificate(A, topo, N, mode, B=B)
            ver, _ = verify_banded_certificate(cert, B, topo)
            assert ver.passed, (mode, ver)
            wc = wiener_inverse_certificate(A, topo, mode, B=B)
            assert verify_wiener_certificate(wc, B, topo).verification.passed


def scan_psi(A, t):
    """Independent scan: explicit weights on each diagonal, explicit window sums."""
    M = A.shape[0]
    idx = np.arange(M)
    k = idx[:, None] - idx[None, :]
    K = 1
    while True:
        covered = sum(np.maximum(0.0, 1 - np.abs(k - K * j) / K) for j in range(-2, 3))
        D = (1 - covered) * A
        total = 0.0
        for n in range(-(M // K) - 2, M // K + 3):
            w = np.maximum(0.0, 1 - np.abs(k - K * n) / K)
            total += np.linalg.norm(w * D, 2)
        if 5 * total <= t:
            return K
        K += 1


class TestPsi:
    def test_bandwidth_one(self):
        for t in (1e-12, 1.0):
            assert psi_A(tridiagonal(20), Topology.linear(20), t) == 1
        assert not np.any(out_of_band(tridiagonal(20), Topology.linear(20), 1))

    def test_geometric(self):
        M = 64
        A = toeplitz_from_coeffs({k: 0.5 ** abs(k) for k in range(-(M - 1), M)}, M)
        topo = Topology.linear(M)
        assert psi_A(A, topo, 2 * wiener_norm(A, topo)) == 1
        expected = scan_psi(A, 1e-6)
        assert psi_A(A, topo, 1e-6) == expected
        assert 8 <= expected <= 14

    def test_out_of_band_support(self):
        M = 30
        A = toeplitz_from_coeffs({k: 1.0 for k in range(-(M - 1), M)}, M)
        idx = np.arange(M)
        k = np.abs(idx[:, None] - idx[None, :])
        for K in (1, 2, 3):
            D = out_of_band(A, Topology.linear(M), K)
            assert not np.any(D[k <= 2 * K])

    @settings(max_examples=20, deadline=None)
    @given(st.integers(4, 30), st.integers(1, 8), st.integers(0, 2**31))
    def test_terminates_and_monotone(self, M, w, seed):
        from memdecay.generators import generate

        A, topo = generate({"kind": "banded_random", "size": M, "params": {"bandwidth": w}, "seed": seed})
        from memdecay.operator_core import bandwidth

        cap = max(1, math.ceil(bandwidth(A, topo) / 2))
        ks = [psi_A(A, topo, t) for t in (1e-9, 1e-3, 1.0, 1e3)]
        assert all(k <= cap for k in ks)
        assert all(y <= x for x, y in zip(ks, ks[1:]))

    def test_circulant_full_profile(self):
        # every offset occupied; the scan still ends at ceil(bandwidth / 2) <= M / 4
        M = 8
        A = circulant_from_coeffs({k: 1.0 for k in range(-3, 5)}, M)
        assert psi_A(A, Topology.circulant(M), 1e-12) == 2

    def test_threshold_domain(self):
        with pytest.raises(ValueError):
            psi_A(np.eye(3), Topology.linear(3), 0)


class TestWienerCertificate:
    @pytest.mark.parametrize(
        "kappa, delta, eps", [(1.0, (7 / 6) ** (1 / 3), 6.18e-4), (3.0, (15 / 14) ** (1 / 3), 2.83e-4)]
    )
    def test_constants(self, kappa, delta, eps):
        d_, e_ = wiener_constants(kappa)
        assert d_ == pytest.approx(delta, rel=1e-14)
        assert e_ == pytest.approx(eps, rel=2e-3)

    def test_constants_closed_form(self):
        # independent evaluation of the ratio with fractions
        from fractions import Fraction

        delta, eps = wiener_constants(3.0)
        dl = Fraction(delta)
        ratio = (2 * dl - 1) / (dl - 1)
        assert eps == pytest.approx(float(1 / (5 * (16 * ratio - 12))), rel=1e-12)

    @settings(max_examples=40)
    @given(st.floats(1.0, 1e6), st.floats(1.0, 1e6), st.integers(1, 3))
    def test_monotone_in_kappa(self, k1, k2, d):
        lo, hi = sorted((k1, k2))
        if hi - lo < 1e-6 * hi:
            return
        d_lo, e_lo = wiener_constants(lo, d)
        d_hi, e_hi = wiener_constants(hi, d)
        assert d_hi > 1 and e_hi > 0
        assert d_hi <= d_lo and e_hi <= e_lo

    def test_circulant_symbol(self, circ_4_2cos):
        A, topo = circ_4_2cos(128)
        cert = wiener_inverse_certificate(A, topo)
        assert cert.N == 1
        assert cert.bound_1_1 == pytest.approx(3 * 0.5 / wiener_constants(3.0)[1], rel=1e-9)
        assert 5.2e3 < cert.bound_1_1 < 5.4e3
        meas = verify_wiener_certificate(cert, direct_inverse(A), topo)
        assert meas.wiener_1_1 == pytest.approx(2.5, rel=1e-9)
        assert meas.verification.passed


class TestOneSided:
    def test_lower_triangular_geometric(self):
        M = 24
        A = toeplitz_from_coeffs({k: 2.0 ** -k for k in range(M)}, M)
        lhs, rhs = one_sided_window_bound(A, Topology.linear(M), 1, 4, math.log(2), "right")
        assert math.isfinite(rhs) and lhs <= rhs
        assert lhs == pytest.approx(2.0**-4)

    def test_n_one_no_damping(self, rng):
        from conftest import random_complex

        A = random_complex(rng, 10, w=2)
        topo = Topology.linear(10)
        for side in ("right", "left"):
            lhs, rhs = one_sided_window_bound(A, topo, 1, 1, 0.7, side)
            from memdecay.operator_core import apply_multiplier, operator_norm
            from memdecay.windows import exp_multiplier

            assert rhs == pytest.approx(operator_norm(apply_multiplier(A, topo, exp_multiplier(0.7, side, topo))))
            assert lhs <= rhs

    def test_identity(self):
        for n in (1, 2, 3):
            lhs, _ = one_sided_window_bound(2 * np.eye(6), Topology.linear(6), 1, n, 0.3, "left")
            assert lhs == 0

    def test_circulant_rejected(self):
        with pytest.raises(ValueError):
            one_sided_window_bound(np.eye(4), Topology.circulant(4), 1, 1, 0.1, "right")
