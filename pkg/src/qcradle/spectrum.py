"""Integer eigenfrequency sequences on the q-hyperbolic lattice and derived parameters."""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DesignError
from .qkernel import QParams

INT64_MAX = 2 ** 63 - 1

FIXED_FIXED = "fixed-fixed"
FREE_FREE = "free-free"
BOUNDARIES = (FIXED_FIXED, FREE_FREE)


def qbar_from_r(r):
    """``r - sqrt(r**2 - 1)``, the lattice ratio in (0, 1)."""
    if int(r) != r or r < 2:
        raise DesignError("r-range", f"r must be an integer >= 2, got {r!r}")
    # r - sqrt(r^2-1) suffers cancellation; 1/(r + sqrt(r^2-1)) does not.
    return 1.0 / (r + math.sqrt(r * r - 1.0))


def eigenintegers(k0, k1, r, N):
    """``k_0..k_N`` from ``k_{n+1} = 2r k_n - k_{n-1}`` (exact, 64-bit checked)."""
    if N < 1:
        raise DesignError("size", f"N must be >= 1, got {N}")
    ks = [int(k0), int(k1)]
    while len(ks) < N + 1:
        nxt = 2 * r * ks[-1] - ks[-2]
        if abs(nxt) > INT64_MAX:
            raise DesignError("overflow", f"k_{len(ks)} exceeds 64-bit range at N={N}")
        ks.append(nxt)
    return np.array(ks[:N + 1], dtype=np.int64)


@dataclass(frozen=True)
class PSTReport:
    passed: bool
    violations: tuple = ()


def validate_pst_spectrum(kseq):
    """Check the integer commensurability conditions for perfect transfer."""
    ks = [int(k) for k in kseq]
    bad = []
    gaps = [b - a for a, b in zip(ks, ks[1:])]
    if any(g <= 0 for g in gaps):
        bad.append("not-increasing")
    if any(g % 2 == 0 for g in gaps):
        bad.append("even-gap")
    if ks and math.gcd(*ks) != 1:
        bad.append("common-factor")
    return PSTReport(passed=not bad, violations=tuple(bad))


def affine_params(k0, k1, qbar):
    """Return ``(Omega, d, gamma)`` placing ``k0, k1`` on the lattice.

    ``k_n = Omega (qbar**-n + d qbar**(n+1))`` and ``gamma = d``.
    """
    Omega = (k1 - k0 * qbar) / (1.0 / qbar - qbar)
    gq = (k0 - k1 * qbar) / (k1 - k0 * qbar)
    gamma = gq / (qbar * qbar)
    return Omega, gamma, gamma


def _check_pair(k0, k1, boundary):
    if boundary not in BOUNDARIES:
        raise DesignError("boundary", f"unknown boundary {boundary!r}")
    if k0 < 0 or k1 < 0:
        raise DesignError("order", "k0 and k1 must be nonnegative")
    if (k0 + k1) % 2 == 0:
        raise DesignError("parity", f"k0 + k1 must be odd, got ({k0}, {k1})")
    if math.gcd(k0, k1) != 1:
        raise DesignError("common-factor", f"k0 and k1 share the factor {math.gcd(k0, k1)}")
    if k0 >= k1:
        raise DesignError("order", f"need k0 < k1, got ({k0}, {k1})")
    if boundary == FREE_FREE and (k0, k1) != (0, 1):
        raise DesignError("free-free-pair", "free-free chains require (k0, k1) = (0, 1)")
    if boundary == FIXED_FIXED and k0 == 0:
        raise DesignError("boundary", "k0 = 0 gives a zero mode; use the free-free boundary")


@dataclass(frozen=True)
class SpectralDesign:
    """Integer design data and every parameter derived from it."""

    r: int
    k0: int
    k1: int
    bigN: int
    omega: float = 1.0
    boundary: str = FIXED_FIXED
    qbar: float = field(init=False)
    q: float = field(init=False)
    Omega: float = field(init=False)
    d: float = field(init=False)
    gamma: float = field(init=False)
    kseq: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_pair(self.k0, self.k1, self.boundary)
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise DesignError("omega", f"omega must be positive, got {self.omega!r}")
        qbar = qbar_from_r(self.r)
        Omega, d, gamma = affine_params(self.k0, self.k1, qbar)
        kseq = eigenintegers(self.k0, self.k1, self.r, self.bigN)
        for name, val in (("qbar", qbar), ("q", qbar * qbar), ("Omega", Omega),
                          ("d", d), ("gamma", gamma), ("kseq", kseq)):
            object.__setattr__(self, name, val)

    @property
    def variant(self):
        return self.boundary

    @property
    def params(self):
        return QParams.from_qbar(self.qbar, self.gamma, self.bigN)

    @property
    def scale(self):
        """``omega**2 (k1 - k0 qbar)**2 / (4 (r**2 - 1))``: the factor on ``A_n, C_n``."""
        return self.omega ** 2 * (self.k1 - self.k0 * self.qbar) ** 2 / (4.0 * (self.r ** 2 - 1))

    @property
    def tstar(self):
        return math.pi / self.omega


def make_design(r, k0, k1, N, omega=1.0, boundary=None):
    """Build a :class:`SpectralDesign`; the boundary defaults to free-free iff ``k0 == 0``."""
    if boundary is None:
        boundary = FREE_FREE if k0 == 0 else FIXED_FIXED
    return SpectralDesign(r=int(r), k0=int(k0), k1=int(k1), bigN=int(N),
                          omega=float(omega), boundary=boundary)


def eigenvalues(design):
    """Squared eigenfrequencies ``(omega k_n)**2``, with an exact zero for free-free."""
    return (design.omega * design.kseq.astype(float)) ** 2


def eigenvalues_closed_form(design):
    """The same values from the lattice formula (independent of the integer sequence)."""
    q, n = design.q, np.arange(design.bigN + 1)
    if design.boundary == FREE_FREE:
        return design.omega ** 2 * (q ** (-n) + q ** n - 2.0) / (4.0 * (design.r ** 2 - 1))
    g = design.gamma
    return design.scale * (q ** (-n) + g * g * q ** (n + 1) + 2.0 * g * design.qbar)


def lattice_kseq(design):
    """``Omega (qbar**-n + d qbar**(n+1))`` as floats."""
    n = np.arange(design.bigN + 1)
    return design.Omega * (design.qbar ** (-n) + design.d * design.qbar ** (n + 1))
