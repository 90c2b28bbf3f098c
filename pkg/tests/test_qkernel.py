import math

import numpy as np
import pytest

from qcradle.errors import ConditioningWarning, DesignError
from qcradle.jacobi import build_jacobi
from qcradle.qkernel import (
    PolynomialEvaluator,
    QParams,
    dimensionless_recurrence,
    eval_hypergeometric_check,
    eval_monic,
    grid,
    positivity_branch,
    q_pochhammer,
    racah_factor_arrays,
    racah_factors,
    weight_table,
)
from qcradle.spectrum import make_design

from oracles import persymmetric_weights


def test_pochhammer_hand_values():
    assert q_pochhammer(0.3, 0.5, 0) == 1.0
    assert q_pochhammer(0.5, 0.5, 1) == 0.5
    # (1/2; 1/2)_2 = (1 - 1/2)(1 - 1/4)
    assert q_pochhammer(0.5, 0.5, 2) == pytest.approx(0.375, rel=1e-15)
    # (-1; q)_k = 2 (-q; q)_{k-1}
    q = 0.3
    assert q_pochhammer(-1.0, q, 3) == pytest.approx(2 * (1 + q) * (1 + q * q), rel=1e-15)
    with pytest.raises(ValueError):
        q_pochhammer(0.1, 0.5, -1)


def test_pochhammer_terminates_at_negative_power():
    q = 0.2
    assert q_pochhammer(q ** -2, q, 3) == 0.0


def test_params_validation():
    with pytest.raises(DesignError) as exc:
        QParams.from_qbar(1.2, 0.5, 3)
    assert exc.value.code == "q-range"


def test_factor_edges_are_exact_zeros():
    p = make_design(2, 1, 2, 5).params
    A, C = racah_factor_arrays(p)
    assert A[-1] == 0.0 and C[0] == 0.0
    assert np.all(A[:-1] != 0.0) and np.all(C[1:] != 0.0)
    with pytest.raises(ValueError):
        racah_factors(6, p)


def test_factor_persymmetry():
    # Persymmetry of the family: A_n = C_{N-n}.
    for args in [(2, 1, 2, 6), (3, 0, 1, 7), (2, 3, 4, 5)]:
        A, C = racah_factor_arrays(make_design(*args).params)
        assert np.allclose(A, C[::-1], rtol=1e-12, atol=0)


def test_free_free_n1_anchor():
    # N = 1, r = 2: A_0 = -1/2 in units of the scale (derived by hand).
    d = make_design(2, 0, 1, 1)
    A, C = racah_factor_arrays(d.params)
    assert d.scale * A[0] == pytest.approx(-0.5, rel=1e-14)
    jac = build_jacobi(d)
    assert jac.diag == pytest.approx([0.5, 0.5], rel=1e-14)
    assert jac.offsq == pytest.approx([0.25], rel=1e-14)


def test_free_free_flag():
    assert make_design(3, 0, 1, 4).params.free_free
    assert not make_design(3, 1, 2, 4).params.free_free


@pytest.mark.parametrize("args", [(2, 1, 2, 4), (3, 2, 3, 5), (2, 0, 1, 5), (4, 0, 1, 6), (2, 1, 4, 3)])
def test_weights_match_spectrum_only_oracle(args):
    d = make_design(*args)
    wt = weight_table(d.params, d.boundary)
    ref = np.array([float(w) for w in persymmetric_weights(grid(d.params))])
    assert np.sum(wt.weights) == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(wt.weights - ref) / ref) < 1e-12


def test_weights_for_gamma_sq_q_one_fixed_fixed():
    # (1, 2, 2) sits on gamma**2 q = 1, where the textbook product is 0/0.
    d = make_design(2, 1, 2, 6)
    assert d.params.gamma_sq * d.params.q == pytest.approx(1.0, rel=1e-13)
    w = weight_table(d.params, d.boundary).weights
    assert np.all(w > 0) and np.sum(w) == pytest.approx(1.0, abs=1e-12)


def test_free_free_weight_rejects_other_parameters():
    with pytest.raises(DesignError) as exc:
        weight_table(make_design(2, 1, 2, 3).params, "free-free")
    assert exc.value.code == "free-free-pair"


def test_grid_matches_free_free_closed_form():
    # Free-free: mu(x) = q**-x + q**x (gamma**2 q = 1/q ... shifted by the zero mode).
    p = make_design(2, 0, 1, 5).params
    x = np.arange(6)
    assert np.allclose(grid(p), p.q ** -x + p.q ** (x - 0) * p.gamma_sq * p.q, rtol=1e-15)


@pytest.mark.parametrize("args", [(2, 1, 2, 5), (3, 0, 1, 5), (2, 2, 3, 4)])
def test_recurrence_vs_basic_hypergeometric(args):
    """Monic polynomials from the recurrence equal the 4phi3 series (times A_0..A_{n-1}).

    Degrees up to N/2 only: that is the range the package evaluates (the rest
    follows by mirror symmetry), and past it forward recurrence loses digits.
    """
    p = make_design(*args).params
    b, u = dimensionless_recurrence(p)
    ev = PolynomialEvaluator(b, u)
    A, _ = racah_factor_arrays(p)
    mu = grid(p)
    for n in range(p.bigN // 2 + 1):
        lead = np.prod(A[:n])
        got = np.array([eval_monic(n, mu[x], ev) for x in range(p.bigN + 1)])
        want = np.array([lead * eval_hypergeometric_check(n, x, p) for x in range(p.bigN + 1)])
        assert np.max(np.abs(got - want)) <= 1e-10 * np.max(np.abs(want))


def test_dimensionless_recurrence_roots_are_grid():
    p = make_design(2, 1, 2, 5).params
    b, u = dimensionless_recurrence(p)
    J = np.diag(b) + np.diag(np.sqrt(u), 1) + np.diag(np.sqrt(u), -1)
    assert np.allclose(np.linalg.eigvalsh(J), grid(p), rtol=1e-10)


def test_positivity_branch_advisory():
    for args in [(2, 1, 2, 4), (3, 3, 4, 5), (2, 1, 4, 6)]:
        p = make_design(*args).params
        assert abs(p.gamma * p.q) <= 1.0 + 1e-12
        assert positivity_branch(p) in ("|gamma q| < 1", "none")


def test_conditioning_warning_threshold():
    p = make_design(5, 0, 1, 12).params
    assert p.magnitude_ratio() > 1e14
    with pytest.warns(ConditioningWarning):
        racah_factor_arrays(p)
    small = make_design(2, 0, 1, 4).params
    assert small.magnitude_ratio() < 1e14
    racah_factor_arrays(small)  # no warning needed
    assert math.isfinite(small.magnitude_ratio())


def test_recurrence_vs_basic_hypergeometric_all_degrees_high_precision():
    """Every degree, every grid point, in 60-digit arithmetic (formula-level oracle)."""
    mpmath = pytest.importorskip("mpmath")
    with mpmath.workdps(60):
        p = make_design(2, 1, 2, 5).params
        q, g, N = mpmath.mpf(p.q), mpmath.mpf(p.gamma), p.bigN

        def poch(a, k):
            return mpmath.fprod([1 - a * q ** j for j in range(k)])

        def factors(n):
            A = 0 if n == N else ((1 - g * g * q ** (2 * n + 2)) * (1 - q ** (2 * n - 2 * N))
                                  / ((1 + q ** (2 * n - N)) * (1 + q ** (2 * n - N + 1))))
            C = 0 if n == 0 else ((1 - q ** (2 * n)) * (g * g * q - q ** (2 * n - 2 * N - 1))
                                  / ((1 + q ** (2 * n - N - 1)) * (1 + q ** (2 * n - N))))
            return A, C

        A = [factors(n)[0] for n in range(N + 1)]
        C = [factors(n)[1] for n in range(N + 1)]
        b = [1 + g * g * q - A[n] - C[n] for n in range(N + 1)]
        for x in range(N + 1):
            mu = q ** -x + g * g * q ** (x + 1)
            P = [mpmath.mpf(1), mu - b[0]]
            for n in range(1, N):
                P.append((mu - b[n]) * P[n] - A[n - 1] * C[n] * P[n - 1])
            for n in range(N + 1):
                top = (q ** -n, -q ** (n - N), q ** -x, g * g * q ** (x + 1))
                bot = (q ** -N, g * q, -g * q)
                series = mpmath.fsum(
                    mpmath.fprod([poch(a, k) for a in top])
                    / (poch(q, k) * mpmath.fprod([poch(a, k) for a in bot])) * q ** k
                    for k in range(min(n, x) + 1))
                want = mpmath.fprod(A[:n]) * series
                assert abs(P[n] - want) <= mpmath.mpf(10) ** -40 * max(abs(want), 1)
