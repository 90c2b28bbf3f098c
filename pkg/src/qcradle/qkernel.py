"""Special persymmetric q-Racah kernel: Pochhammer symbols, grid, factors, weights.

Everything here is dimensionless.  The physical scaling (frequency scale,
affine shift) is applied by :mod:`qcradle.jacobi`.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningWarning, DesignError

#: Largest tolerated ratio between intermediate magnitudes before warning.
MAGNITUDE_LIMIT = 1e14


@dataclass(frozen=True)
class QParams:
    """Base ``q``, its square root ``qbar``, grid parameter ``gamma`` and order ``bigN``."""

    q: float
    qbar: float
    gamma: float
    bigN: int

    def __post_init__(self):
        if not 0.0 < self.qbar < 1.0:
            raise DesignError("q-range", f"qbar must lie in (0, 1), got {self.qbar!r}")
        if self.bigN < 0:
            raise DesignError("size", f"N must be nonnegative, got {self.bigN}")

    @classmethod
    def from_qbar(cls, qbar, gamma, bigN):
        return cls(q=qbar * qbar, qbar=qbar, gamma=gamma, bigN=int(bigN))

    @property
    def gamma_sq(self):
        return self.gamma * self.gamma

    @property
    def free_free(self):
        """True when gamma*q = -q**(1/2), i.e. gamma**2 * q = 1 with gamma < 0."""
        return self.gamma < 0 and math.isclose(self.gamma * self.q, -self.qbar, rel_tol=1e-13)

    def magnitude_ratio(self):
        """Largest power of ``1/q`` met while building the factors."""
        return self.q ** (-self.bigN)


def q_pochhammer(a, q, k):
    """Return ``(a; q)_k = prod_{j<k} (1 - a q**j)``; ``k = 0`` gives 1."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = 1.0
    aq = a
    for _ in range(k):
        out *= 1.0 - aq
        aq *= q
    return out


def grid_mu(x, params):
    """Grid point ``q**-x + gamma**2 q**(x+1)``."""
    q = params.q
    return q ** (-x) + params.gamma_sq * q ** (x + 1)


def grid(params):
    return np.array([grid_mu(x, params) for x in range(params.bigN + 1)])


def racah_factors(n, params):
    """Dimensionless factor pair ``(A_n, C_n)`` of the persymmetric family.

    ``A_N`` and ``C_0`` are returned as exact zeros.
    """
    N = params.bigN
    if not 0 <= n <= N:
        raise ValueError(f"n must lie in [0, {N}], got {n}")
    q, g2 = params.q, params.gamma_sq
    if n == N:
        A = 0.0
    else:
        A = ((1.0 - g2 * q ** (2 * n + 2)) * (1.0 - q ** (2 * n - 2 * N))
             / ((1.0 + q ** (2 * n - N)) * (1.0 + q ** (2 * n - N + 1))))
    if n == 0:
        C = 0.0
    else:
        C = ((1.0 - q ** (2 * n)) * (g2 * q - q ** (2 * n - 2 * N - 1))
             / ((1.0 + q ** (2 * n - N - 1)) * (1.0 + q ** (2 * n - N))))
    if not (math.isfinite(A) and math.isfinite(C)):
        raise DesignError("conditioning", f"factor overflow at n={n}, N={N}")
    return A, C


def racah_factor_arrays(params, warn=True):
    """Arrays ``A_0..A_N`` and ``C_0..C_N``; warns when ``q**-N`` exceeds the limit."""
    if warn and params.magnitude_ratio() > MAGNITUDE_LIMIT:
        warnings.warn(
            f"q**-N = {params.magnitude_ratio():.3g} exceeds {MAGNITUDE_LIMIT:.0e}; "
            "entries span a wide dynamic range",
            ConditioningWarning, stacklevel=2)
    pairs = [racah_factors(n, params) for n in range(params.bigN + 1)]
    A = np.array([p[0] for p in pairs])
    C = np.array([p[1] for p in pairs])
    return A, C


def dimensionless_recurrence(params):
    """Monic recurrence ``(b, u)`` on the grid ``mu``: ``b_n = 1 + gamma**2 q - (A_n + C_n)``."""
    A, C = racah_factor_arrays(params, warn=False)
    b = 1.0 + params.gamma_sq * params.q - (A + C)
    u = A[:-1] * C[1:]
    return b, u


def positivity_branch(params):
    """Name the algebraic positivity branch met by ``|gamma q|`` (advisory only)."""
    gq = abs(params.gamma * params.q)
    if gq < 1.0:
        return "|gamma q| < 1"
    if gq > params.q ** (-params.bigN + 1):
        return "|gamma q| > q^(1-N)"
    return "none"


@dataclass(frozen=True)
class WeightTable:
    weights: np.ndarray
    grid: np.ndarray

    def __len__(self):
        return len(self.weights)


def _normalization(params):
    q, gq, N = params.q, params.gamma * params.q, params.bigN
    return (q_pochhammer(gq, q, N) * q_pochhammer(-gq, q, N)
            / (q_pochhammer(-1.0, q, N) * q_pochhammer(params.gamma_sq * q * q, q, N)))


def _general_weights(params):
    # w_{x+1}/w_x as a running product.  The factor
    # (1 - g2 q^{2x+1}) (g2 q^2; q)_x / (1 - g2 q^{x+1}) is carried in the
    # cancelled form (1 - g2 q^{2x+1}) (g2 q^2; q)_{x-1}, which stays finite
    # when g2 q = 1 (the free-free family and some fixed-fixed designs).
    q, g2, N = params.q, params.gamma_sq, params.bigN
    w = np.empty(N + 1)
    w[0] = _normalization(params)
    run = w[0]
    for x in range(N):
        run *= (q ** x - q ** N) / ((1.0 - q ** (x + 1)) * (1.0 - g2 * q ** (N + 2 + x)))
        if x >= 1:
            run *= 1.0 - g2 * q ** (x + 1)
        w[x + 1] = run * (1.0 - g2 * q ** (2 * x + 3))
    return w


def _free_free_weights(params):
    # gamma q = -q^{1/2}: w_x = c (-q^N)^x eps_x (q^-N; q)_x / (q^{N+1}; q)_x
    # with eps_0 = 1 and eps_x = 1 + q^x otherwise.
    q, qb, N = params.q, params.qbar, params.bigN
    c = (q_pochhammer(qb, q, N) * q_pochhammer(-qb, q, N)
         / (q_pochhammer(-1.0, q, N) * q_pochhammer(q, q, N)))
    w = np.empty(N + 1)
    run = c
    w[0] = c
    for x in range(N):
        run *= (q ** x - q ** N) / (1.0 - q ** (N + 1 + x))
        w[x + 1] = run * (1.0 + q ** (x + 1))
    return w


def weight_table(params, variant="fixed-fixed"):
    """Orthogonality weights on the grid ``mu(0..N)``.

    Parameters
    ----------
    params : QParams
    variant : {"fixed-fixed", "free-free"}
        The free-free variant uses the reduced product valid when
        ``gamma q = -q**(1/2)`` and rejects other parameters.

    Returns
    -------
    WeightTable
        Positive weights summing to one, and the grid values.
    """
    if variant == "free-free":
        if not params.free_free:
            raise DesignError("free-free-pair", "free-free weights need gamma*q = -q**(1/2)")
        w = _free_free_weights(params)
    elif variant == "fixed-fixed":
        w = _general_weights(params)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise DesignError("positivity", "non-positive weight: parameters outside the valid region")
    return WeightTable(weights=w, grid=grid(params))


@dataclass(frozen=True)
class PolynomialEvaluator:
    """Monic three-term recurrence ``P_{n+1} = (x - b_n) P_n - u_{n+1} P_{n-1}``.

    ``offsq[n-1]`` holds ``u_n`` for ``n = 1..N``.
    """

    diag: np.ndarray
    offsq: np.ndarray

    def values(self, x, nmax=None):
        """All ``P_0(x)..P_nmax(x)`` as an array of shape ``(nmax+1,) + shape(x)``."""
        nmax = len(self.diag) if nmax is None else nmax
        x = np.asarray(x, dtype=float)
        out = np.empty((nmax + 1,) + x.shape)
        out[0] = 1.0
        if nmax >= 1:
            out[1] = x - self.diag[0]
        for n in range(1, nmax):
            out[n + 1] = (x - self.diag[n]) * out[n] - self.offsq[n - 1] * out[n - 1]
        return out


def eval_monic(n, x, rec):
    """Monic ``P_n(x)`` by forward recurrence."""
    return rec.values(x, n)[n]


def eval_hypergeometric_check(n, x, params):
    """Terminating 4phi3 value of the normalized polynomial at grid index ``x``.

    Independent of the recurrence; the monic value is this times ``A_0...A_{n-1}``.
    """
    q, g, N = params.q, params.gamma, params.bigN
    top = (q ** (-n), -q ** (n - N), q ** (-x), g * g * q ** (x + 1))
    bottom = (q ** (-N), g * q, -g * q)
    total = 0.0
    for k in range(min(n, x) + 1):
        num = 1.0
        for a in top:
            num *= q_pochhammer(a, q, k)
        den = q_pochhammer(q, q, k)
        for a in bottom:
            den *= q_pochhammer(a, q, k)
        total += num / den * q ** k
    return total
