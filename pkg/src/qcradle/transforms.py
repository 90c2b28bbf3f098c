"""Isospectral deformation and spectral surgery.

Deformation changes the two central couplings of a persymmetric matrix so
that the spectrum is kept but the mirror symmetry (and with it perfect
transfer) is traded for a tunable end-to-end split ``alpha``.

Surgery removes spectral points by Christoffel transforms of the weights:
one extreme point at a time, or an adjacent pair anywhere, which keeps the
weights positive and the matrix persymmetric.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import tridiag
from .errors import ConditioningWarning, DesignError, SurgeryError
from .jacobi import EigenSystem, JacobiMatrix, mirrored_rows
from .synthesis import ChainSpec

#: Cross-check tolerance between the two surgery routes before warning.
SURGERY_CROSSCHECK_TOL = 1e-9


def _check_alpha(alpha):
    if not (0.0 < alpha < 1.0):
        raise DesignError("alpha-range", f"alpha must lie strictly between 0 and 1, got {alpha!r}")


@dataclass(frozen=True)
class DeformationParams:
    alpha: float
    theta: float
    j: int


def deformation_params(alpha, N):
    """Angle ``theta`` with ``sin 2theta = 1 - 2 alpha`` and the middle index ``j``."""
    _check_alpha(alpha)
    s = (math.sqrt(1 - alpha) - math.sqrt(alpha)) / math.sqrt(2)
    c = (math.sqrt(1 - alpha) + math.sqrt(alpha)) / math.sqrt(2)
    j = (N - 1) // 2 if N % 2 else N // 2
    return DeformationParams(alpha=alpha, theta=math.atan2(s, c), j=j)


def v_matrix(N, alpha):
    """The symmetric involution pairing sites ``i`` and ``N - i``.

    Rows ``i < N - i`` carry ``(sin theta, cos theta)``, rows ``i > N - i``
    carry ``(cos theta, -sin theta)``; a middle site (``N`` even) is fixed.
    """
    th = deformation_params(alpha, N).theta
    s, c = math.sin(th), math.cos(th)
    V = np.zeros((N + 1, N + 1))
    for i in range(N + 1):
        if 2 * i < N:
            V[i, i], V[i, N - i] = s, c
        elif 2 * i > N:
            V[i, i], V[i, N - i] = -s, c
        else:
            V[i, i] = 1.0
    return V


def deform_jacobi(jac, alpha):
    """Deformed matrix with the same spectrum.

    N odd (``N = 2j + 1``): ``u_{j+1} -> 4 alpha (1 - alpha) u_{j+1}`` and
    ``b_j -> b_j - (1 - 2 alpha) sqrt(u_{j+1})``,
    ``b_{j+1} -> b_{j+1} + (1 - 2 alpha) sqrt(u_{j+1})``.

    N even (``N = 2j``): ``u_j -> 2 (1 - alpha) u_j`` and
    ``u_{j+1} -> 2 alpha u_{j+1}``.

    Equivalently ``A_j -> 2 alpha A_j`` and ``C_{N-j} -> 2 (1 - alpha) C_{N-j}``.
    """
    _check_alpha(alpha)
    N = jac.bigN
    if N < 1:
        raise DesignError("size", "deformation needs at least two sites")
    j = deformation_params(alpha, N).j
    diag = jac.diag.copy()
    offsq = jac.offsq.copy()
    if N % 2:
        root = math.sqrt(jac.offsq[j])
        offsq[j] = 4.0 * alpha * (1.0 - alpha) * jac.offsq[j]
        diag[j] = jac.diag[j] - (1.0 - 2.0 * alpha) * root
        diag[j + 1] = jac.diag[j + 1] + (1.0 - 2.0 * alpha) * root
    else:
        offsq[j - 1] = 2.0 * (1.0 - alpha) * jac.offsq[j - 1]
        offsq[j] = 2.0 * alpha * jac.offsq[j]
    A = C = None
    if jac.factorA is not None:
        A = jac.factorA.copy()
        C = jac.factorC.copy()
        A[j] *= 2.0 * alpha
        C[N - j] *= 2.0 * (1.0 - alpha)
    return JacobiMatrix(diag=diag, offsq=offsq, variant=jac.variant, factorA=A, factorC=C)


def row_factors(N, alpha):
    """``(N+1, N+1)`` array of the factors ``sqrt(1 +- (-1)**n (1 - 2 alpha))``."""
    _check_alpha(alpha)
    j = deformation_params(alpha, N).j
    par = (-1.0) ** np.arange(N + 1)[:, None]
    plus = np.sqrt(1.0 + par * (1.0 - 2.0 * alpha))
    minus = np.sqrt(1.0 - par * (1.0 - 2.0 * alpha))
    cols = np.arange(N + 1)[None, :]
    if N % 2:
        F = np.where(cols <= j, plus, minus)
    else:
        F = np.where(cols < j, plus, np.where(cols == j, 1.0, minus))
    return F


def deform_eigensystem(eig, alpha):
    """Rows diagonalizing the deformed matrix: ``U_{n,i}`` times :func:`row_factors`.

    Mirror alternation of the input makes each row keep unit length.
    """
    F = row_factors(eig.bigN, alpha)
    return EigenSystem(values=eig.values.copy(), vectors=eig.vectors * F,
                       kseq=eig.kseq, omega=eig.omega)


def deform_chain(chain, alpha):
    """Deformed chain: masses and springs past the middle scaled by ``alpha / (1 - alpha)``.

    N odd: ``m_i`` scaled for ``i > j``; ``K_{j+1} -> 2 alpha K_{j+1}``;
    ``K_i`` scaled for ``i > j + 1``.
    N even: ``m_j -> m_j / (2 (1 - alpha))``; ``m_i`` and ``K_i`` scaled for ``i > j``.
    The same rules apply to free-free chains.
    """
    _check_alpha(alpha)
    if not math.isclose(chain.alpha, 0.5, abs_tol=0.0):
        raise DesignError("deform-source", "only an undeformed (alpha = 1/2) chain can be deformed")
    N = chain.bigN
    j = deformation_params(alpha, N).j
    ratio = alpha / (1.0 - alpha)
    m = chain.masses.copy()
    K = chain.springs_full
    idx_m = np.arange(N + 1)
    idx_k = np.arange(N + 2)
    if N % 2:
        m[idx_m > j] *= ratio
        K[j + 1] *= 2.0 * alpha
        K[idx_k > j + 1] *= ratio
    else:
        m[j] /= 2.0 * (1.0 - alpha)
        m[idx_m > j] *= ratio
        K[idx_k > j] *= ratio
    springs = K if chain.boundary == "fixed-fixed" else K[1:-1]
    return ChainSpec(boundary=chain.boundary, masses=m, springs=springs,
                     alpha=alpha, omega=chain.omega)


# ---------------------------------------------------------------- surgery

@dataclass(frozen=True)
class ChristoffelStep:
    """Outcome of removing spectral points.

    ``E`` holds the ratios ``P_{n+1}(x_k)/P_n(x_k)`` for a single step (None
    for pair removal); ``crosscheck`` is the largest relative gap between the
    two independent reconstructions of the new matrix (pair removal only).
    """

    removed: tuple
    values: np.ndarray
    weights: np.ndarray
    jacobi: JacobiMatrix
    norm_const: float
    E: np.ndarray = field(default=None, repr=False)
    kseq: np.ndarray = field(default=None, repr=False)
    crosscheck: float = 0.0


def christoffel_weights(weights, values, removed):
    """``C prod_k (x_s - x_k) w_s`` over the kept points, normalized to sum one."""
    weights = np.asarray(weights, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = [s for s in range(len(values)) if s not in removed]
    w = weights[keep].copy()
    for k in removed:
        w *= values[keep] - values[k]
    total = float(np.sum(w))
    if total == 0.0 or not np.all(np.sign(w) == np.sign(total)):
        raise SurgeryError("surgery-positivity", "transformed weights are not of one sign")
    return w / total, 1.0 / total, np.array(keep)


def jacobi_from_weights(values, weights, persymmetric=True):
    """Rebuild ``(b, u)`` from nodes and positive weights (discrete Stieltjes procedure).

    With ``persymmetric`` only the first half of the entries is computed and
    the rest are mirrored.  The second half of a plain Stieltjes sweep divides
    by tiny norms and loses accuracy when the weights span many decades.
    """
    x = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    n = len(x)
    N = n - 1
    diag = np.zeros(n)
    offsq = np.zeros(max(n - 1, 0))
    last = N // 2 if persymmetric else N
    p_prev = np.zeros(n)
    p = np.ones(n) / math.sqrt(float(np.sum(w)))
    for k in range(last + 1):
        diag[k] = float(np.sum(w * x * p * p))
        if k == N:
            break
        v = (x - diag[k]) * p - (math.sqrt(offsq[k - 1]) * p_prev if k > 0 else 0.0)
        nv = math.sqrt(float(np.sum(w * v * v)))
        offsq[k] = nv * nv
        p_prev, p = p, v / nv
    if persymmetric:
        for k in range(last + 1, n):
            diag[k] = diag[N - k]
        for k in range(n - 1):
            if 2 * (k + 1) > N + 1:
                offsq[k] = offsq[N - 1 - k]
    return JacobiMatrix(diag=diag, offsq=offsq)


def christoffel_step(jac, values, k):
    """One Christoffel step removing the eigenvalue ``values[k]`` from ``jac``.

    The polynomial values at ``x_k`` are taken from a twisted-factorization
    eigenvector ``z`` (``P_n(x_k) ~ sqrt(u_1...u_n) z_n``), so

        E_n = sqrt(u_{n+1}) z_{n+1} / z_n,
        u'_n = u_n E_n / E_{n-1},
        b'_n = b_{n+1} + E_{n+1} - E_n   (E_N = 0)
             = x_k - sqrt(u_{n+1}) (z_n / z_{n+1} + z_{n+1} / z_n).

    Returns ``(JacobiMatrix, E)``.
    """
    N = jac.bigN
    if N < 1:
        raise SurgeryError("surgery-size", "cannot remove a point from a 1x1 matrix")
    xk = float(values[k])
    z = tridiag.twisted_vector(jac.diag, jac.offsq, xk)
    if np.any(z == 0.0) or not np.all(np.isfinite(z)):
        raise SurgeryError("surgery-singular", f"P_n(x_{k}) vanishes; the step is undefined")
    root = np.sqrt(jac.offsq)
    ratio = z[1:] / z[:-1]
    E = root * ratio
    diag = xk - root * (1.0 / ratio + ratio)
    offsq = jac.offsq[:-1] * E[1:] / E[:-1]
    if np.any(offsq <= 0.0) or not np.all(np.isfinite(offsq)):
        raise SurgeryError("surgery-positivity", "transformed couplings are not positive")
    return JacobiMatrix(diag=diag, offsq=offsq, variant=jac.variant), E


def christoffel_pair(jac, values, k):
    """Two Christoffel steps at once (removing ``x_k`` and ``x_{k+1}``), kernel form.

    Uses the unit eigenvectors ``a, b`` at the two points and the partial sums
    ``T_n = sum_{i<=n} a_i b_i`` (mirrored about the centre, which avoids the
    cancellation of a long running sum):

        u'_n = u_{n+1} T_{n+1} T_{n-1} / T_n**2,
        b'_n = b_{n+1} + sqrt(u_{n+2}) b_{n+2} a_{n+1} / T_{n+1}
                       - sqrt(u_{n+1}) b_{n+1} a_n / T_n.

    The input must be persymmetric.  This route is kept as an independent
    check of :func:`jacobi_from_weights`; it loses accuracy for large chains
    when the removed points are the largest ones.
    """
    N = jac.bigN
    gauge = (-1.0) ** np.arange(N + 1)
    rows = mirrored_rows(jac, [values[k], values[k + 1]], indices=(k, k + 1)) * gauge
    a, b = rows
    T = np.cumsum(a * b)
    for n in range(N):
        if 2 * n > N - 1:
            T[n] = T[N - 1 - n]
    m = N - 1
    root = np.sqrt(jac.offsq)
    diag = np.empty(m)
    for n in range(m):
        hi = root[n + 1] * b[n + 2] * a[n + 1] / T[n + 1]
        lo = root[n] * b[n + 1] * a[n] / T[n]
        diag[n] = jac.diag[n + 1] + hi - lo
    offsq = np.array([jac.offsq[n] * T[n + 1] * T[n - 1] / T[n] ** 2 for n in range(1, m)])
    return JacobiMatrix(diag=diag, offsq=offsq, variant=jac.variant)


def _check_kseq(kseq, removed):
    if kseq is None:
        return None
    return np.array([kk for s, kk in enumerate(kseq) if s not in removed], dtype=np.int64)


def surgery_remove_end(weights, values, jac, k, kseq=None):
    """Remove the smallest (``k = 0``) or largest (``k = N``) spectral point.

    Returns a :class:`ChristoffelStep`.  A single removal changes the parity
    pattern of the frequencies, so the result generally loses perfect transfer.
    """
    N = jac.bigN
    if k not in (0, N):
        raise SurgeryError("surgery-interior",
                           f"single-point removal keeps positive weights only for k = 0 or k = {N}; got k = {k}")
    if N < 1:
        raise SurgeryError("surgery-size", "nothing left after removal")
    new_w, C, keep = christoffel_weights(weights, values, (k,))
    new_jac, E = christoffel_step(jac, values, k)
    return ChristoffelStep(removed=(k,), values=np.asarray(values, dtype=float)[keep],
                           weights=new_w, jacobi=new_jac, norm_const=C, E=E,
                           kseq=_check_kseq(kseq, (k,)))


def surgery_remove_pair(weights, values, jac, k, kseq=None):
    """Remove the adjacent pair ``x_k, x_{k+1}`` from a persymmetric matrix.

    Parameters
    ----------
    weights, values : array_like
        Spectral weights ``w_s`` and eigenvalues ``x_s`` of ``jac``.
    jac : JacobiMatrix
        Persymmetric source matrix.
    k : int
        Lower index of the pair, ``0 <= k <= N - 1``.
    kseq : array_like, optional
        Integer frequencies, carried through to the result.

    Returns
    -------
    ChristoffelStep
        New weights ``C (x_s - x_k)(x_s - x_{k+1}) w_s`` and the matrix they
        define (rebuilt from the weights).  ``crosscheck`` reports the gap to
        the Christoffel kernel route.
    """
    N = jac.bigN
    if not 0 <= k <= N - 1:
        raise SurgeryError("surgery-pair", f"pair index k must lie in [0, {N - 1}], got {k}")
    if N - 2 < 1:
        raise SurgeryError("surgery-size", "pair removal must leave at least two sites")
    if not jac.is_persymmetric(1e-9):
        raise SurgeryError("surgery-persymmetry", "pair removal needs a persymmetric matrix")
    new_w, C, keep = christoffel_weights(weights, values, (k, k + 1))
    new_vals = np.asarray(values, dtype=float)[keep]
    rebuilt = jacobi_from_weights(new_vals, new_w, persymmetric=True)
    rebuilt = JacobiMatrix(diag=rebuilt.diag, offsq=rebuilt.offsq, variant=jac.variant)
    if np.any(rebuilt.offsq <= 0.0):
        raise SurgeryError("surgery-positivity", "rebuilt couplings are not positive")
    try:
        kernel = christoffel_pair(jac, values, k)
        scale = float(np.max(np.abs(rebuilt.diag)))
        gap = max(float(np.max(np.abs(kernel.diag - rebuilt.diag))) / scale,
                  float(np.max(np.abs(kernel.offsq - rebuilt.offsq) / rebuilt.offsq))
                  if len(rebuilt.offsq) else 0.0)
    except (FloatingPointError, ZeroDivisionError):
        gap = math.inf
    if not gap <= SURGERY_CROSSCHECK_TOL:
        warnings.warn(f"surgery routes differ by {gap:.2e}; the weight-based result is kept",
                      ConditioningWarning, stacklevel=2)
    return ChristoffelStep(removed=(k, k + 1), values=new_vals, weights=new_w, jacobi=rebuilt,
                           norm_const=C, kseq=_check_kseq(kseq, (k, k + 1)), crosscheck=gap)
