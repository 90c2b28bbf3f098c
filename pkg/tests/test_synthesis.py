import math

import numpy as np
import pytest

from qcradle.errors import DesignError
from qcradle.jacobi import EigenSystem, build_jacobi, eigensystem_analytic, eigensystem_numeric
from qcradle.spectrum import FIXED_FIXED, FREE_FREE, eigenvalues, make_design
from qcradle.synthesis import (
    ChainSpec,
    chain_eigensystem,
    chain_eigenvalues,
    chain_frequencies,
    chain_to_jacobi,
    free_free_closed_form,
    free_free_ladder,
    gamma_vector,
    gamma_vector_polynomial,
    ladder_y,
    synthesize_fixed_fixed,
    synthesize_free_free,
    synthesize_free_free_from_eigensystem,
)

from conftest import DESIGN_GRID, SMALL_DESIGNS


def synth(args, m0=1.0, omega=1.0):
    d = make_design(*args, omega=omega)
    jac = build_jacobi(d)
    if d.boundary == FREE_FREE:
        return d, jac, synthesize_free_free(d, m0=m0)
    return d, jac, synthesize_fixed_fixed(eigensystem_analytic(jac, d), jac, m0=m0, omega=omega)


def test_two_mass_anchor():
    # N = 1, r = 2: eigenvalues {0, omega**2} and m1 = m0 force K1 = omega**2 m0 / 2.
    for m0, om in [(1.0, 1.0), (2.5, 3.0)]:
        d = make_design(2, 0, 1, 1, omega=om)
        chain = synthesize_free_free(d, m0=m0)
        assert chain.masses == pytest.approx([m0, m0], rel=1e-15)
        assert chain.springs == pytest.approx([0.5 * om ** 2 * m0], rel=1e-15)


def test_frozen_free_free_n3():
    # Hand-derived from the exact recurrence entries b_0 = 15/14, u_1 = 3135/196, b_1 = 1679/14.
    _, _, chain = synth((2, 0, 1, 3))
    assert chain.masses == pytest.approx([1, 15 / 209, 15 / 209, 1], rel=1e-13)
    assert chain.springs == pytest.approx([15 / 14, 1575 / 209, 15 / 14], rel=1e-13)


@pytest.mark.parametrize("args", [(r, 0, 1, N) for r in (2, 3, 4, 5) for N in range(1, 13)])
def test_free_free_routes_agree(args):
    d = make_design(*args)
    jac = build_jacobi(d)
    m_cf, k_cf = free_free_closed_form(d, m0=1.3)
    m_l, k_l = free_free_ladder(jac, m0=1.3)
    assert np.max(np.abs(m_l - m_cf) / m_cf) < 1e-12
    assert np.max(np.abs(k_l - k_cf) / k_cf) < 1e-12
    zm = synthesize_free_free_from_eigensystem(eigensystem_analytic(jac, d), jac, m0=1.3)
    assert np.max(np.abs(zm.masses - m_cf) / m_cf) < 1e-11
    assert np.max(np.abs(zm.springs - k_cf) / k_cf) < 1e-11


def test_ladder_y_first_half():
    # y_i = K_{i+1}/m_i on a free-free chain; forward recurrence trusted on the first half.
    d = make_design(3, 0, 1, 8)
    jac = build_jacobi(d)
    chain = synthesize_free_free(d)
    y = ladder_y(jac)
    h = d.bigN // 2
    want = chain.springs[:h] / chain.masses[:h]
    assert np.allclose(y[:h], want, rtol=1e-12)


@pytest.mark.parametrize("args", DESIGN_GRID[::3])
def test_synthesized_spectrum(args):
    d, jac, chain = synth(args)
    assert chain.mirror_error() < 1e-10
    target = eigenvalues(d)
    got = chain_eigenvalues(chain)
    assert np.max(np.abs(got - target) / np.maximum(target, 1.0)) < 1e-10


@pytest.mark.parametrize("args", SMALL_DESIGNS)
def test_chain_round_trip(args):
    d, jac, chain = synth(args)
    back = chain_to_jacobi(chain)
    assert np.max(np.abs(back.diag - jac.diag) / np.abs(jac.diag).max()) < 1e-12
    assert np.max(np.abs(back.offsq - jac.offsq) / jac.offsq) < 1e-12


def test_mass_and_frequency_scaling():
    args = (2, 1, 2, 4)
    _, _, base = synth(args)
    _, _, heavy = synth(args, m0=3.0)
    assert np.allclose(heavy.masses, 3.0 * base.masses, rtol=1e-13)
    assert np.allclose(heavy.springs, 3.0 * base.springs, rtol=1e-13)
    _, _, fast = synth(args, omega=2.0)
    assert np.allclose(fast.masses, base.masses, rtol=1e-13)
    assert np.allclose(fast.springs, 4.0 * base.springs, rtol=1e-13)


@pytest.mark.parametrize("args", [(2, 1, 2, 5), (3, 2, 3, 6), (2, 1, 4, 4), (3, 3, 4, 7)])
def test_gamma_vector_routes(args):
    d = make_design(*args)
    jac = build_jacobi(d)
    eig = eigensystem_analytic(jac, d)
    G = gamma_vector(eig)
    assert np.all(G > 0)
    assert np.allclose(G, gamma_vector_polynomial(jac, eig), rtol=1e-11)
    assert np.allclose(G, G[::-1], rtol=1e-12)


def test_gamma_vector_rejects_zero_mode():
    d = make_design(2, 0, 1, 3)
    eig = eigensystem_analytic(build_jacobi(d), d)
    with pytest.raises(DesignError) as exc:
        gamma_vector(eig)
    assert exc.value.code == "zero-mode"
    with pytest.raises(DesignError):
        free_free_closed_form(make_design(2, 1, 2, 3))


def test_fixed_fixed_end_springs_equal():
    _, _, chain = synth((2, 2, 3, 5))
    assert chain.boundary == FIXED_FIXED
    assert chain.springs[0] == pytest.approx(chain.springs[-1], rel=1e-13)
    assert len(chain.springs) == chain.bigN + 2


@pytest.mark.parametrize("args", [(2, 0, 1, 6), (2, 1, 2, 6), (5, 0, 1, 10), (3, 1, 4, 8)])
def test_chain_eigensystem(args):
    d, jac, chain = synth(args)
    eig = chain_eigensystem(chain)
    ref = eigensystem_analytic(jac, d)
    assert eig.orthonormality_error() < 1e-10
    assert np.max(np.abs(eig.values - ref.values) / np.maximum(ref.values, 1.0)) < 1e-12
    # Row signs are only fixed where U_{n,0} is above rounding level.
    signs = np.sign(np.sum(eig.vectors * ref.vectors, axis=1))
    assert np.max(np.abs(signs[:, None] * eig.vectors - ref.vectors)) < 1e-8


def test_chain_frequencies_relative_accuracy():
    # Relative accuracy on a spectrum spanning ~9 decades in eigenvalue.
    d, _, chain = synth((5, 0, 1, 8))
    f = chain_frequencies(chain)
    k = d.kseq.astype(float)
    assert f[0] == 0.0
    assert np.max(np.abs(f[1:] - k[1:]) / k[1:]) < 1e-12


def test_numeric_eigensystem_matches_small_chain():
    d, jac, chain = synth((2, 1, 2, 3))
    num = eigensystem_numeric(chain_to_jacobi(chain))
    assert np.allclose(num.values, eigenvalues(d), rtol=1e-11)


@pytest.mark.parametrize("masses,springs,boundary,code", [
    ([1.0, 1.0], [1.0], FIXED_FIXED, "chain-shape"),
    ([1.0, 1.0], [1.0, 1.0], FREE_FREE, "chain-shape"),
    ([1.0, -1.0], [1.0], FREE_FREE, "synthesis"),
    ([1.0, 1.0], [math.nan], FREE_FREE, "synthesis"),
    ([1.0, 1.0], [1.0], "sliding", "boundary"),
])
def test_chainspec_validation(masses, springs, boundary, code):
    with pytest.raises(DesignError) as exc:
        ChainSpec(boundary=boundary, masses=masses, springs=springs)
    assert exc.value.code == code


def test_free_free_from_eigensystem_requires_zero():
    d = make_design(2, 1, 2, 3)
    jac = build_jacobi(d)
    with pytest.raises(DesignError) as exc:
        synthesize_free_free_from_eigensystem(eigensystem_analytic(jac, d), jac)
    assert exc.value.code == "zero-mode"
    bad = EigenSystem(values=np.array([0.0, 1.0]), vectors=np.array([[1.0, -1.0], [1.0, 1.0]]) / math.sqrt(2))
    with pytest.raises(DesignError) as exc:
        synthesize_free_free_from_eigensystem(bad, build_jacobi(make_design(2, 0, 1, 1)))
    assert exc.value.code == "synthesis"
