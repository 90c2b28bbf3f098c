"""Small symmetric-tridiagonal toolkit: Sturm bisection, inverse iteration, twisted vectors.

Two flavours of bisection are provided.  :func:`bisect_eigenvalues` works on
the Jacobi entries directly and has absolute accuracy ``~eps * ||T||``.
:func:`singular_values` works on the zero-diagonal Golub-Kahan form of a
bidiagonal factor and keeps *relative* accuracy on every singular value, which
is what a chain's stiffness spectrum needs when it spans many decades.
"""
import numpy as np
from scipy.linalg import LinAlgError, solve_banded

EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


def sturm_count(diag, offsq, shifts):
    """Number of eigenvalues strictly below each shift (vectorized over shifts)."""
    shifts = np.asarray(shifts, dtype=float)
    count = np.zeros(shifts.shape, dtype=int)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        # A zero pivot is replaced by -tiny before counting (treated as negative).
        p = diag[0] - shifts
        p = np.where(p == 0.0, -_TINY, p)
        count += p < 0
        for i in range(1, len(diag)):
            p = diag[i] - shifts - offsq[i - 1] / p
            p = np.where(p == 0.0, -_TINY, p)
            count += p < 0
    return count


def gershgorin(diag, offsq):
    off = np.sqrt(np.asarray(offsq, dtype=float))
    rad = np.zeros(len(diag))
    rad[:-1] += off
    rad[1:] += off
    return float(np.min(diag - rad)), float(np.max(diag + rad))


def bisect_eigenvalues(diag, offsq, max_iter=200):
    """All eigenvalues (ascending) of the tridiagonal ``(diag, sqrt(offsq))``."""
    diag = np.asarray(diag, dtype=float)
    offsq = np.asarray(offsq, dtype=float)
    n = len(diag)
    if n == 1:
        return diag.copy()
    lo_b, hi_b = gershgorin(diag, offsq)
    pad = EPS * max(abs(lo_b), abs(hi_b)) + _TINY
    lo = np.full(n, lo_b - pad)
    hi = np.full(n, hi_b + pad)
    idx = np.arange(n)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        below = sturm_count(diag, offsq, mid) > idx
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
        if np.all(hi - lo <= 2 * EPS * np.maximum(abs(lo), abs(hi)) + _TINY):
            break
    else:
        raise RuntimeError("bisection did not converge")
    return 0.5 * (lo + hi)


def singular_values(off, max_iter=400):
    """Positive eigenvalues of the zero-diagonal tridiagonal with off-diagonal ``off``.

    These are the singular values of the bidiagonal whose entries, read
    alternately, make up ``off``.  Bisection uses geometric midpoints, so each
    value is found to a few ulps *relative* to itself.
    """
    off = np.asarray(off, dtype=float)
    n = len(off) + 1
    diag = np.zeros(n)
    offsq = off * off
    hi_b = 2.0 * float(np.max(off)) * (1 + 4 * EPS)
    lo_b = hi_b * EPS ** 2
    base = int(sturm_count(diag, offsq, lo_b))
    total = int(sturm_count(diag, offsq, hi_b))
    npos = total - base
    if npos <= 0:
        return np.zeros(0)
    idx = base + np.arange(npos)
    lo = np.full(npos, lo_b)
    hi = np.full(npos, hi_b)
    for _ in range(max_iter):
        ratio = hi / lo
        mid = np.where(ratio > 2.0, np.sqrt(lo * hi), 0.5 * (lo + hi))
        below = sturm_count(diag, offsq, mid) > idx
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
        if np.all(hi - lo <= 2 * EPS * hi):
            break
    else:
        raise RuntimeError("singular-value bisection did not converge")
    return 0.5 * (lo + hi)


def inverse_iteration(diag, off, lam, iterations=3):
    """Unit eigenvector of the tridiagonal ``(diag, off)`` near ``lam``."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    n = len(diag)
    if n == 1:
        return np.ones(1)
    # When the shifted matrix is exactly singular the shift is nudged, first
    # relative to |lam| and then (for lam near zero) relative to the matrix norm.
    norm = float(np.max(np.abs(diag)) + 2.0 * np.max(np.abs(off)))
    nudges = [0.0] + [f * abs(lam) for f in (4 * EPS, -4 * EPS, 1e-13, 1e-11)] \
        + [f * norm * EPS for f in (4.0, -4.0, 64.0)]
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[2, :-1] = off
    z = np.ones(n) / np.sqrt(n)
    for _ in range(iterations):
        for nudge in nudges:
            ab[1] = diag - (lam + nudge)
            try:
                y = solve_banded((1, 1), ab, z, check_finite=False)
            except (LinAlgError, ValueError):
                continue
            if np.all(np.isfinite(y)):
                break
        else:
            raise RuntimeError("inverse iteration failed")
        z = y / np.linalg.norm(y)
    return z


def twisted_vector(diag, offsq, lam):
    """Eigenvector at ``lam`` from a twisted factorization (positive off-diagonals).

    Both the top-down and bottom-up pivots are formed; the twist index with
    the smallest ``|gamma|`` is used, so no component is obtained by a
    long, error-amplifying recurrence.  Returns the unit vector with the
    sign fixed so that the first entry is nonnegative.
    """
    diag = np.asarray(diag, dtype=float)
    offsq = np.asarray(offsq, dtype=float)
    n = len(diag)
    if n == 1:
        return np.ones(1)
    a = diag - lam
    dp = np.empty(n)
    dm = np.empty(n)
    dp[0] = a[0]
    for i in range(1, n):
        prev = dp[i - 1] if dp[i - 1] != 0.0 else _TINY
        dp[i] = a[i] - offsq[i - 1] / prev
    dm[n - 1] = a[n - 1]
    for i in range(n - 2, -1, -1):
        nxt = dm[i + 1] if dm[i + 1] != 0.0 else _TINY
        dm[i] = a[i] - offsq[i] / nxt
    twist = int(np.argmin(np.abs(dp + dm - a)))
    off = np.sqrt(offsq)
    z = np.zeros(n)
    z[twist] = 1.0
    for i in range(twist - 1, -1, -1):
        z[i] = -off[i] * z[i + 1] / (dp[i] if dp[i] != 0.0 else _TINY)
    for i in range(twist + 1, n):
        z[i] = -off[i - 1] * z[i - 1] / (dm[i] if dm[i] != 0.0 else _TINY)
    z /= np.linalg.norm(z)
    return -z if z[0] < 0 else z
