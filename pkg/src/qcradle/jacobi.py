"""Persymmetric Jacobi matrices of the design and their eigensystems.

Gauge convention
----------------
A :class:`JacobiMatrix` stores ``b_n`` and the *squared* off-diagonal
``u_n``; as an operator it may be read with positive off-diagonals
(orthogonal-polynomial convention) or negative ones (the physical stiffness
matrix ``M^-1/2 K M^-1/2``).  :class:`EigenSystem` rows are always given in the
physical gauge, so that ``U_{n,N-i} = (-1)**n U_{n,i}`` and ``U_{n,0} > 0``.
"""
from dataclasses import dataclass, field

import numpy as np

from . import tridiag
from .errors import DesignError
from .qkernel import racah_factor_arrays, weight_table
from .spectrum import FIXED_FIXED, eigenvalues


@dataclass(frozen=True)
class JacobiMatrix:
    """Tridiagonal operator with diagonal ``diag`` and squared off-diagonal ``offsq``.

    ``offsq[n-1]`` is ``u_n`` for ``n = 1..N``.  ``factorA``/``factorC`` are
    kept when the matrix comes straight from a design.
    """

    diag: np.ndarray
    offsq: np.ndarray
    variant: str = FIXED_FIXED
    factorA: np.ndarray = field(default=None, repr=False)
    factorC: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float)
        offsq = np.asarray(self.offsq, dtype=float)
        if offsq.shape != (len(diag) - 1,):
            raise ValueError("offsq must have one entry fewer than diag")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offsq", offsq)

    @property
    def size(self):
        return len(self.diag)

    @property
    def bigN(self):
        return len(self.diag) - 1

    def dense(self, physical=False):
        off = np.sqrt(self.offsq)
        if physical:
            off = -off
        return np.diag(self.diag) + np.diag(off, 1) + np.diag(off, -1)

    def persymmetry_error(self):
        """Largest relative mismatch of ``b_n`` vs ``b_{N-n}`` and ``u_n`` vs ``u_{N+1-n}``."""
        scale = max(float(np.max(np.abs(self.diag))), 1e-300)
        eb = float(np.max(np.abs(self.diag - self.diag[::-1]))) / scale
        if len(self.offsq) == 0:
            return eb
        eu = float(np.max(np.abs(self.offsq - self.offsq[::-1]) / self.offsq))
        return max(eb, eu)

    def is_persymmetric(self, tol=1e-11):
        return self.persymmetry_error() <= tol


def build_jacobi(design):
    """Jacobi matrix of a design: ``b_n = omega**2 k0**2 - (A_n + C_n)``, ``u_n = A_{n-1} C_n``."""
    A0, C0 = racah_factor_arrays(design.params)
    A = design.scale * A0
    C = design.scale * C0
    shift = (design.omega * design.k0) ** 2 if design.boundary == FIXED_FIXED else 0.0
    diag = shift - (A + C)
    offsq = A[:-1] * C[1:]
    if np.any(offsq <= 0.0) or not np.all(np.isfinite(offsq)):
        raise DesignError("positivity", "off-diagonal products u_n must be positive")
    return JacobiMatrix(diag=diag, offsq=offsq, variant=design.boundary, factorA=A, factorC=C)


def design_weights(design):
    """Spectral weights ``w_n`` of the design (squared first eigenvector components)."""
    return weight_table(design.params, design.boundary).weights


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and the orthonormal rows ``U_{n,.}`` (physical gauge).

    ``kseq``/``omega`` are set when the eigenvalues are known to be
    ``(omega k_n)**2`` for integers ``k_n``; the dynamics then uses exact phases.
    """

    values: np.ndarray
    vectors: np.ndarray
    kseq: np.ndarray = field(default=None, repr=False)
    omega: float = None

    @property
    def bigN(self):
        return len(self.values) - 1

    @property
    def weights(self):
        return self.vectors[:, 0] ** 2

    @property
    def frequencies(self):
        if self.kseq is not None:
            return self.omega * np.asarray(self.kseq, dtype=float)
        return np.sqrt(np.clip(self.values, 0.0, None))

    def orthonormality_error(self):
        U = self.vectors
        return float(np.max(np.abs(U @ U.T - np.eye(len(U)))))

    def mirror_error(self):
        U = self.vectors
        signs = (-1.0) ** np.arange(len(U))
        return float(np.max(np.abs(U[:, ::-1] - signs[:, None] * U)))

    def reconstruction_error(self, jac):
        """Max relative deviation of ``U A U^T`` from ``diag(values)``."""
        D = self.vectors @ jac.dense(physical=True) @ self.vectors.T
        scale = max(float(np.max(np.abs(self.values))), 1e-300)
        return float(np.max(np.abs(D - np.diag(self.values)))) / scale


def _orthonormal_values(diag, offsq, x, upto):
    """Orthonormal polynomial values ``p_0(x)..p_upto(x)`` (positive gauge, unnormalized p_0 = 1)."""
    off = np.sqrt(offsq)
    p = np.empty(upto + 1)
    p[0] = 1.0
    if upto >= 1:
        p[1] = (x - diag[0]) / off[0]
    for i in range(1, upto):
        p[i + 1] = ((x - diag[i]) * p[i] - off[i - 1] * p[i - 1]) / off[i]
    return p


def mirrored_rows(jac, values, indices=None):
    """Physical-gauge unit rows for a persymmetric matrix, one per eigenvalue.

    ``indices`` gives the position of each value in the ascending spectrum
    (default ``0, 1, ...``); it fixes the mirror sign of each row.

    Only components ``0..N//2`` come from the polynomial recurrence; the rest
    follow from ``U_{n,N-i} = (-1)**n U_{n,i}``.  The forward recurrence past the
    midpoint would amplify rounding by the ratio of the weights.
    """
    N = jac.bigN
    h = N // 2
    gauge = (-1.0) ** np.arange(N + 1)
    if indices is None:
        indices = range(len(values))
    U = np.empty((len(values), N + 1))
    for row, (n, x) in enumerate(zip(indices, values)):
        p = _orthonormal_values(jac.diag, jac.offsq, x, h)
        v = np.empty(N + 1)
        v[:h + 1] = p * gauge[:h + 1]
        sign = 1.0 if n % 2 == 0 else -1.0
        v[h + 1:] = sign * v[N - np.arange(h + 1, N + 1)]
        U[row] = v / np.linalg.norm(v)
    return U


def eigensystem_analytic(jac, design):
    """Eigensystem from the closed-form spectrum and the orthogonal polynomials.

    Parameters
    ----------
    jac : JacobiMatrix
        Matrix built from ``design``.
    design : SpectralDesign

    Returns
    -------
    EigenSystem
        Values ``(omega k_n)**2`` and rows ``U_{n,i} = (-1)**i sqrt(w_n) p_i(x_n)``.
    """
    values = eigenvalues(design)
    U = mirrored_rows(jac, values)
    return EigenSystem(values=values, vectors=U, kseq=design.kseq.copy(), omega=design.omega)


def eigensystem_from_spectrum(jac, values, kseq=None, omega=None):
    """Eigensystem of ``jac`` given its (known) eigenvalues.

    Persymmetric matrices use :func:`mirrored_rows`; otherwise each row is a
    twisted-factorization eigenvector.
    """
    values = np.asarray(values, dtype=float)
    if jac.is_persymmetric(1e-12):
        U = mirrored_rows(jac, values)
    else:
        gauge = (-1.0) ** np.arange(jac.size)
        U = np.array([tridiag.twisted_vector(jac.diag, jac.offsq, x) * gauge for x in values])
    return EigenSystem(values=values, vectors=U,
                       kseq=None if kseq is None else np.asarray(kseq).copy(), omega=omega)


def eigensystem_numeric(jac):
    """Independent eigensystem by Sturm bisection and inverse iteration.

    Absolute accuracy is ``~eps * ||A||``, so small eigenvalues of widely
    spread spectra carry correspondingly larger relative error.
    """
    vals = tridiag.bisect_eigenvalues(jac.diag, jac.offsq)
    off = np.sqrt(jac.offsq)
    gauge = (-1.0) ** np.arange(jac.size)
    rows = []
    for lam in vals:
        v = tridiag.inverse_iteration(jac.diag, off, lam) * gauge
        rows.append(-v if v[0] < 0 else v)
    return EigenSystem(values=vals, vectors=np.array(rows))
