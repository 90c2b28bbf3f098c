"""Inverse problem: masses and springs from a Jacobi eigensystem, and the forward map back.

A chain of masses ``m_0..m_N`` is held by springs ``K_0..K_{N+1}``; the
free-free boundary has ``K_0 = K_{N+1} = 0``.  In mass-weighted coordinates
its stiffness operator is tridiagonal with

    b_i = (K_i + K_{i+1}) / m_i,      u_i = K_i**2 / (m_{i-1} m_i),

and negative off-diagonals ``-sqrt(u_i)``.
"""
from dataclasses import dataclass

import numpy as np

from . import tridiag
from .errors import DesignError
from .jacobi import EigenSystem, JacobiMatrix
from .spectrum import BOUNDARIES, FIXED_FIXED, FREE_FREE


@dataclass(frozen=True)
class ChainSpec:
    """Physical chain.

    ``springs`` holds ``K_0..K_{N+1}`` for fixed-fixed chains and
    ``K_1..K_N`` for free-free chains.
    """

    boundary: str
    masses: np.ndarray
    springs: np.ndarray
    alpha: float = 0.5
    omega: float = 1.0

    def __post_init__(self):
        if self.boundary not in BOUNDARIES:
            raise DesignError("boundary", f"unknown boundary {self.boundary!r}")
        m = np.asarray(self.masses, dtype=float)
        K = np.asarray(self.springs, dtype=float)
        want = len(m) + 1 if self.boundary == FIXED_FIXED else len(m) - 1
        if len(m) < 1 or len(K) != want:
            raise DesignError("chain-shape", f"{self.boundary} chain with {len(m)} masses needs {want} springs")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(K))):
            raise DesignError("synthesis", "non-finite mass or spring")
        if np.any(m <= 0) or np.any(K <= 0):
            raise DesignError("synthesis", "masses and springs must be strictly positive")
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "springs", K)

    @property
    def bigN(self):
        return len(self.masses) - 1

    @property
    def springs_full(self):
        """``K_0..K_{N+1}`` with zeros at free ends."""
        if self.boundary == FIXED_FIXED:
            return self.springs.copy()
        return np.concatenate([[0.0], self.springs, [0.0]])

    def mirror_error(self):
        m, K = self.masses, self.springs
        em = np.max(np.abs(m - m[::-1]) / m)
        eK = np.max(np.abs(K - K[::-1]) / K) if len(K) else 0.0
        return float(max(em, eK))

    def to_physical(self, p):
        """Mass-weighted momenta -> physical momenta ``P_i = sqrt(m_i) p_i``."""
        return np.sqrt(self.masses) * np.asarray(p)

    def to_weighted(self, P):
        return np.asarray(P) / np.sqrt(self.masses)


@dataclass(frozen=True)
class SynthesisWorkspace:
    gammaVec: np.ndarray = None
    yvec: np.ndarray = None
    scale: float = 1.0


def gamma_vector(eig):
    """``Gamma_i = sum_s U_{2s,i} U_{2s,0} / x_{2s}`` (physical gauge, all entries positive)."""
    x = eig.values
    if np.any(x[0::2] <= 0.0):
        raise DesignError("zero-mode", "a zero eigenvalue needs the free-free synthesis path")
    U = eig.vectors
    even = U[0::2]
    return (even * (even[:, :1] / x[0::2, None])).sum(axis=0)


def gamma_vector_polynomial(jac, eig):
    """The same vector from ``w_{2s}/x_{2s} * p_i(x_{2s})`` with orthonormal ``p_i``.

    Polynomials are evaluated on ``i <= N/2`` and mirrored (``Gamma_{N-i} = Gamma_i``).
    The positive-gauge sum carries a factor ``(-1)**i``, removed here.
    """
    N = jac.bigN
    h = N // 2
    off = np.sqrt(jac.offsq)
    w = eig.weights
    G = np.zeros(N + 1)
    for n in range(0, N + 1, 2):
        x = eig.values[n]
        p = np.empty(h + 1)
        p[0] = 1.0
        if h >= 1:
            p[1] = (x - jac.diag[0]) / off[0]
        for i in range(1, h):
            p[i + 1] = ((x - jac.diag[i]) * p[i] - off[i - 1] * p[i - 1]) / off[i]
        G[:h + 1] += w[n] / x * p
    G[:h + 1] *= (-1.0) ** np.arange(h + 1)
    G[h + 1:] = G[N - np.arange(h + 1, N + 1)]
    return G


def synthesize_fixed_fixed(eig, jac, m0=1.0, omega=1.0):
    """Fixed-fixed chain from the Gamma vector.

    Parameters
    ----------
    eig : EigenSystem
        Physical-gauge eigensystem with all eigenvalues positive.
    jac : JacobiMatrix
        Supplies ``u_i`` for the interior springs.
    m0 : float
        Mass of the first body; everything scales with it.

    Returns
    -------
    ChainSpec
        ``m_i = m0 (Gamma_i/Gamma_0)**2``,
        ``K_i = m0 Gamma_{i-1} Gamma_i / Gamma_0**2 sqrt(u_i)``,
        ``K_0 = K_{N+1} = m0 / (2 Gamma_0)``.
    """
    G = gamma_vector(eig)
    if np.any(G <= 0):
        raise DesignError("synthesis", "Gamma vector has non-positive entries")
    g = G / G[0]
    masses = m0 * g * g
    inner = m0 * g[:-1] * g[1:] * np.sqrt(jac.offsq)
    end = m0 / (2.0 * G[0])
    springs = np.concatenate([[end], inner, [end]])
    return ChainSpec(boundary=FIXED_FIXED, masses=masses, springs=springs, omega=omega)


def free_free_closed_form(design, m0=1.0):
    """Masses and springs of the free-free design from the Pochhammer closed form.

    The mass formula is a ratio of Pochhammer products whose individual
    factors overflow near ``i = N``; it is evaluated as the product of its
    successive ratios ``m_i / m_{i-1}``.
    """
    if design.boundary != FREE_FREE:
        raise DesignError("boundary", "closed form applies to free-free designs only")
    q, N, r, om = design.q, design.bigN, design.r, design.omega
    masses = np.empty(N + 1)
    masses[0] = m0
    for i in range(1, N + 1):
        ratio = ((1 - q ** (2 * i - 1)) * (1 - q ** (2 * (i - 1 - N)))
                 / ((1 - q ** (2 * i)) * (1 - q ** (2 * i - 2 * N - 1)))
                 * (1 + q ** (2 * i - N)) / (1 + q ** (2 * i - N - 2)))
        masses[i] = masses[i - 1] * ratio
    i = np.arange(1, N + 1)
    springs = (om ** 2 / (4.0 * (r * r - 1)) * (1 - q ** (2 * i)) * (q ** (2 * i - 2 * N - 1) - 1)
               / ((1 + q ** (2 * i - N - 1)) * (1 + q ** (2 * i - N))) * masses[1:])
    return masses, springs


def synthesize_free_free(design, m0=1.0):
    """Free-free chain of a ``(0, 1)`` design from the closed form."""
    masses, springs = free_free_closed_form(design, m0)
    return ChainSpec(boundary=FREE_FREE, masses=masses, springs=springs, omega=design.omega)


def free_free_ladder(jac, m0=1.0):
    """Ladder route: ``m_i = m_{i-1} A_{i-1} / C_i`` and ``K_i = -A_{i-1} m_{i-1}``."""
    if jac.factorA is None:
        raise DesignError("synthesis", "ladder route needs the factor arrays")
    A, C = jac.factorA, jac.factorC
    N = jac.bigN
    masses = np.empty(N + 1)
    masses[0] = m0
    for i in range(1, N + 1):
        masses[i] = masses[i - 1] * A[i - 1] / C[i]
    springs = -A[:-1] * masses[:-1]
    return masses, springs


def ladder_y(jac):
    """``y_0 = b_0``, ``y_i = b_i - u_i / y_{i-1}``: the ratios ``K_{i+1}/m_i`` of a free-free chain.

    The forward recurrence loses accuracy past the middle of large chains.
    """
    y = np.empty(jac.size)
    y[0] = jac.diag[0]
    for i in range(1, jac.size):
        y[i] = jac.diag[i] - jac.offsq[i - 1] / y[i - 1]
    return y


def synthesize_free_free_from_eigensystem(eig, jac, m0=1.0, omega=1.0):
    """Free-free chain from any Jacobi matrix with a zero mode.

    The zero-mode row is proportional to ``sqrt(m_i)``, which fixes the
    masses; then ``K_i = sqrt(u_i m_{i-1} m_i)``.
    """
    if abs(eig.values[0]) > 1e-12 * max(1.0, abs(eig.values[-1])):
        raise DesignError("zero-mode", "free-free synthesis needs a zero eigenvalue")
    z = eig.vectors[0]
    if np.any(z <= 0):
        raise DesignError("synthesis", "zero-mode row is not strictly positive")
    masses = m0 * (z / z[0]) ** 2
    springs = np.sqrt(jac.offsq * masses[:-1] * masses[1:])
    return ChainSpec(boundary=FREE_FREE, masses=masses, springs=springs, omega=omega)


def chain_to_jacobi(chain):
    """Forward map: ``b_i = (K_i + K_{i+1})/m_i``, ``u_i = K_i**2/(m_{i-1} m_i)``."""
    m = chain.masses
    K = chain.springs_full
    diag = (K[:-1] + K[1:]) / m
    offsq = K[1:-1] ** 2 / (m[:-1] * m[1:])
    return JacobiMatrix(diag=diag, offsq=offsq, variant=chain.boundary)


def spring_factor_offdiag(chain):
    """Off-diagonal of the zero-diagonal Golub-Kahan form of the chain's spring factor.

    The stiffness operator is ``G^T G`` with ``G`` bidiagonal (one row per
    spring); its singular values are the eigenfrequencies.
    """
    m, K = chain.masses, chain.springs_full
    off = []
    if chain.boundary == FIXED_FIXED:
        off.append(np.sqrt(K[0] / m[0]))
        for i in range(1, len(m)):
            off += [np.sqrt(K[i] / m[i - 1]), np.sqrt(K[i] / m[i])]
        off.append(np.sqrt(K[-1] / m[-1]))
    else:
        for i in range(len(m) - 1):
            off += [np.sqrt(K[i + 1] / m[i]), np.sqrt(K[i + 1] / m[i + 1])]
    return np.array(off)


def chain_frequencies(chain):
    """Eigenfrequencies (ascending) with relative accuracy, free-free zero mode included."""
    if chain.bigN == 0 and chain.boundary == FREE_FREE:
        return np.zeros(1)
    s = np.sort(tridiag.singular_values(spring_factor_offdiag(chain)))
    if chain.boundary == FREE_FREE:
        s = np.concatenate([[0.0], s[-chain.bigN:]])
    return s


def chain_eigenvalues(chain):
    return chain_frequencies(chain) ** 2


def chain_eigensystem(chain):
    """Numerical eigensystem of a chain, accurate on widely spread spectra.

    Values come from relative-accuracy bisection on the spring factor,
    vectors from inverse iteration on the same factor.  Rows use the
    physical gauge with ``U_{n,0} >= 0``; row signs are arbitrary where
    ``U_{n,0}`` is below rounding level.
    """
    N = chain.bigN
    freqs = chain_frequencies(chain)
    off = spring_factor_offdiag(chain)
    zero_diag = np.zeros(len(off) + 1)
    rows = []
    start = 0
    if chain.boundary == FREE_FREE:
        v = np.sqrt(chain.masses)
        rows.append(v / np.linalg.norm(v))
        start = 1
    for sig in freqs[start:]:
        z = tridiag.inverse_iteration(zero_diag, off, sig)
        v = z[0::2] if chain.boundary == FREE_FREE else z[1::2]
        v = v / np.linalg.norm(v)
        rows.append(v)
    U = np.array(rows)
    gauge = (-1.0) ** np.arange(N + 1)
    U[start:] *= gauge
    U *= np.where(U[:, :1] < 0, -1.0, 1.0)
    return EigenSystem(values=freqs ** 2, vectors=U)
