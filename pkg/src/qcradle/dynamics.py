"""Normal-mode evolution, perfect-transfer checks, revival schedules and a Verlet oracle.

Momenta are mass-weighted (``p_i = P_i / sqrt(m_i)``) unless stated otherwise.
The initial condition is a single kick on the first mass: ``q(0) = 0``,
``p(0) = (pbar, 0, ..., 0)``.
"""
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DesignError
from .spectrum import FIXED_FIXED, FREE_FREE

#: Condition ids of the congruence families that make a revival order valid.
CONDITIONS = (83, 84, 85, 86)
FREE_FREE_CONDITION = 105
SCAN_CONDITION = "scan"


@dataclass(frozen=True)
class SimulationConfig:
    pbar: float = 1.0
    tstar: float = math.pi
    times: np.ndarray = None

    def __post_init__(self):
        if not (self.pbar > 0 and math.isfinite(self.pbar)):
            raise DesignError("pbar", "kick momentum must be positive")
        if not self.tstar > 0:
            raise DesignError("tstar", "transfer time must be positive")


@dataclass(frozen=True)
class TrajectoryState:
    t: float
    qvec: np.ndarray
    pvec: np.ndarray


def initial_kick(size, pbar=1.0):
    q = np.zeros(size)
    p = np.zeros(size)
    p[0] = pbar
    return q, p


def _modal(eig, init):
    q0, p0 = (np.asarray(v, dtype=float) for v in init)
    U = eig.vectors
    return U @ q0, U @ p0


def _propagate(eig, init, cos_t, sin_t, t):
    """Combine modal amplitudes with given ``cos(w_n t)``, ``sin(w_n t)``."""
    a, b = _modal(eig, init)
    w = eig.frequencies
    zero = w == 0.0
    safe = np.where(zero, 1.0, w)
    sin_over_w = np.where(zero, t, sin_t / safe)
    qm = a * cos_t + b * sin_over_w
    pm = -a * w * sin_t + b * cos_t
    U = eig.vectors
    return TrajectoryState(t=t, qvec=U.T @ qm, pvec=U.T @ pm)


def evolve(eig, init, t):
    """Exact state at time ``t`` from the normal modes.

    Parameters
    ----------
    eig : EigenSystem
    init : tuple of arrays
        ``(q(0), p(0))`` in mass-weighted coordinates.
    t : float

    Returns
    -------
    TrajectoryState
    """
    if t == 0:
        q0, p0 = (np.array(v, dtype=float) for v in init)
        return TrajectoryState(t=0.0, qvec=q0, pvec=p0)
    w = eig.frequencies
    return _propagate(eig, init, np.cos(w * t), np.sin(w * t), float(t))


def _exact_phases(kseq, frac):
    """``cos, sin`` of ``pi * frac * k_n`` with the angle reduced mod 2 exactly."""
    red = [(frac * int(k)) % 2 for k in kseq]
    ang = np.array([math.pi * float(x) for x in red])
    return np.cos(ang), np.sin(ang)


def evolve_fraction(eig, init, frac):
    """State at ``t = frac * pi / omega`` using exact integer phase reduction.

    Requires ``eig.kseq``; ``frac`` is converted to a :class:`fractions.Fraction`.
    """
    if eig.kseq is None:
        raise ValueError("exact phases need the integer frequency sequence")
    frac = Fraction(frac)
    c, s = _exact_phases(eig.kseq, frac)
    return _propagate(eig, init, c, s, float(frac) * math.pi / eig.omega)


def energy(eig, state):
    """``1/2 p.p + 1/2 q.A.q`` evaluated in the eigenbasis."""
    a = eig.vectors @ state.qvec
    b = eig.vectors @ state.pvec
    return 0.5 * float(b @ b + np.sum(eig.values * a * a))


def _state_at(eig, init, tstar, frac):
    if eig.kseq is not None and math.isclose(tstar, math.pi / eig.omega, rel_tol=1e-15):
        return evolve_fraction(eig, init, frac)
    return evolve(eig, init, float(frac) * tstar)


def pst_fidelity(eig, config=SimulationConfig()):
    """Return ``(p_N(t*)/pbar, max_{i<N} |p_i(t*)|/pbar)`` for a kick on mass 0."""
    init = initial_kick(len(eig.values), config.pbar)
    st = _state_at(eig, init, config.tstar, 1)
    p = st.pvec / config.pbar
    return float(p[-1]), float(np.max(np.abs(p[:-1])))


# ---------------------------------------------------------------- revivals

def _divisors_from(values):
    g = 0
    for v in values:
        g = math.gcd(g, abs(int(v)))
    if g == 0:
        return None
    return {d for d in range(2, g + 1) if g % d == 0}


def revival_conditions(k0, k1, r, variant=FIXED_FIXED):
    """Map each valid revival order ``Z`` to the condition ids it satisfies.

    Each congruence family forces ``Z`` to divide every integer listed for
    it, so its orders are the divisors >= 2 of their gcd.
    """
    if variant == FREE_FREE:
        return {Z: (FREE_FREE_CONDITION,) for Z in sorted(_divisors_from([r]))}
    families = {
        83: [r],
        84: [r * k0 - k1, r * k1 - k0],
        85: [r * k0, r * k1 - k0, 2 * k0],
        86: [r * k0 - k1, 2 * k1, r * k1],
    }
    found = {}
    for cid in CONDITIONS:
        divs = _divisors_from(families[cid])
        for Z in divs or ():
            found.setdefault(Z, []).append(cid)
    return {Z: tuple(found[Z]) for Z in sorted(found)}


def revival_orders(k0, k1, r, variant=FIXED_FIXED):
    """All revival orders ``Z >= 2`` of the design."""
    return list(revival_conditions(k0, k1, r, variant))


def _congruent(k, ref, mod):
    return (k - ref) % mod == 0 or (k + ref) % mod == 0


def congruence_scan(k0, k1, r=None, zmax=None, kseq=None):
    """Orders ``Z`` with ``k_{2s} = +-k_0`` and ``k_{2s+1} = +-k_1 (mod 2Z)`` for every ``s``.

    With ``r`` the infinite sequence is scanned (it is periodic mod ``2Z``);
    with ``kseq`` only the given finite sequence is checked.
    """
    if kseq is not None:
        ks = [int(k) for k in kseq]
        k0, k1 = ks[0], ks[1]
        if zmax is None:
            zmax = max(2, (max(ks) + k0) // 2 + 1)
    elif zmax is None:
        zmax = 4 * r * (k0 + k1 + 1)
    out = []
    for Z in range(2, zmax + 1):
        mod = 2 * Z
        ok = True
        if kseq is not None:
            seq = enumerate(ks)
            for n, k in seq:
                if not _congruent(k, k0 if n % 2 == 0 else k1, mod):
                    ok = False
                    break
        else:
            a, b, n = k0 % mod, k1 % mod, 0
            seen = set()
            while (n % 2, a, b) not in seen:
                seen.add((n % 2, a, b))
                if not _congruent(a, k0 if n % 2 == 0 else k1, mod):
                    ok = False
                    break
                a, b, n = b, (2 * r * b - a) % mod, n + 1
        if ok:
            out.append(Z)
    return out


def revival_prediction(Z, l, k0, k1, alpha=0.5, variant=FIXED_FIXED, r=None):
    """Closed-form ``(p_0, p_N) / pbar`` at ``t = (l/Z) t*``.

    With ``c_e = cos(l k0 pi / Z)`` and ``c_o = cos(l k1 pi / Z)``:
    ``p_0 = (1 - alpha) c_e + alpha c_o`` and ``p_N = sqrt(alpha (1 - alpha)) (c_e - c_o)``.
    At ``alpha = 1/2`` this is the product form
    ``cos((k1+k0) l pi/2Z) cos((k1-k0) l pi/2Z)``, ``sin(...) sin(...)``.
    When ``r`` is given, ``Z`` must be a valid order of the design.
    """
    if not 0.0 < alpha < 1.0:
        raise DesignError("alpha-range", f"alpha must lie in (0, 1), got {alpha!r}")
    if not 0 <= l <= Z:
        raise DesignError("revival-index", f"l must lie in [0, {Z}], got {l}")
    if r is not None and Z not in revival_conditions(k0, k1, r, variant):
        raise DesignError("revival-order", f"Z = {Z} is not a revival order of this design")
    ce = math.cos(math.pi * float((Fraction(l * k0, Z)) % 2))
    co = math.cos(math.pi * float((Fraction(l * k1, Z)) % 2))
    return (1.0 - alpha) * ce + alpha * co, math.sqrt(alpha * (1.0 - alpha)) * (ce - co)


@dataclass(frozen=True)
class RevivalEntry:
    Z: int
    conditions: tuple
    ells: tuple
    fractions: tuple
    times: np.ndarray
    predictions: np.ndarray


@dataclass(frozen=True)
class RevivalSchedule:
    entries: tuple
    tstar: float
    alpha: float = 0.5

    @property
    def orders(self):
        return [e.Z for e in self.entries]

    def distinct_fractions(self):
        """All ``l/Z`` with ``1 <= l < Z`` over the schedule, sorted, duplicates removed."""
        return sorted({f for e in self.entries for f in e.fractions})


def revival_schedule(k0, k1, r, variant=FIXED_FIXED, alpha=0.5, omega=1.0, kseq=None):
    """Revival schedule of a design, or of an arbitrary integer sequence ``kseq``.

    Sequences that are not the full design sequence (e.g. after spectral
    surgery) are checked by the finite congruence scan, recorded with the
    condition id ``"scan"``.
    """
    if kseq is not None:
        ks = [int(k) for k in kseq]
        k0, k1 = ks[0], ks[1]
        conds = {Z: (SCAN_CONDITION,) for Z in congruence_scan(k0, k1, kseq=ks)}
    else:
        conds = revival_conditions(k0, k1, r, variant)
    if not conds:
        raise DesignError("schedule", "no revival order found")
    tstar = math.pi / omega
    entries = []
    for Z, ids in conds.items():
        ells = tuple(range(1, Z))
        fr = tuple(Fraction(l, Z) for l in ells)
        pred = np.array([revival_prediction(Z, l, k0, k1, alpha, variant) for l in ells])
        entries.append(RevivalEntry(Z=Z, conditions=ids, ells=ells, fractions=fr,
                                    times=np.array([float(f) * tstar for f in fr]),
                                    predictions=pred.reshape(-1, 2)))
    return RevivalSchedule(entries=tuple(entries), tstar=tstar, alpha=alpha)


# ---------------------------------------------------------------- oracle

def _forces(Kfull, x):
    f = -(Kfull[:-1] + Kfull[1:]) * x
    f[1:] += Kfull[1:-1] * x[:-1]
    f[:-1] += Kfull[1:-1] * x[1:]
    return f


def physical_energy(chain, x, P):
    K = chain.springs_full
    ext = np.concatenate([[0.0], x, [0.0]])
    stretch = np.diff(ext)
    return 0.5 * float(np.sum(P * P / chain.masses) + np.sum(K * stretch * stretch))


def verlet_oracle(chain, config, dt, t_end=None, times=None):
    """Velocity-Verlet integration of the physical chain ``m x'' = F(x)``.

    Parameters
    ----------
    chain : ChainSpec
    config : SimulationConfig
        The kick ``P_0(0) = sqrt(m_0) pbar`` matches ``p(0) = (pbar, 0, ...)``.
    dt : float
        Requested step; must satisfy ``dt <= (2 pi / w_max) / 50``.  Each
        interval between output times uses the largest step ``<= dt`` that
        lands on the output time exactly.
    t_end, times : float or array
        Output times (``times`` wins); defaults to ``config.tstar``.

    Returns
    -------
    list of TrajectoryState
        Physical displacements ``x`` and momenta ``P = m x'``.
    """
    from .synthesis import chain_frequencies

    wmax = float(np.max(chain_frequencies(chain)))
    if wmax > 0 and dt > (2.0 * math.pi / wmax) / 50.0:
        raise DesignError("verlet-step",
                          f"dt = {dt:g} exceeds 1/50 of the fastest period {2 * math.pi / wmax:g}")
    if times is None:
        times = [config.tstar if t_end is None else t_end]
    times = np.sort(np.asarray(times, dtype=float))
    m = chain.masses
    K = chain.springs_full
    x = np.zeros(len(m))
    v = np.zeros(len(m))
    v[0] = config.pbar / math.sqrt(m[0])
    acc = _forces(K, x) / m
    out = []
    t = 0.0
    for target in times:
        span = target - t
        steps = int(math.ceil(span / dt - 1e-12)) if span > 0 else 0
        h = span / steps if steps else 0.0
        for _ in range(steps):
            v += 0.5 * h * acc
            x += h * v
            acc = _forces(K, x) / m
            v += 0.5 * h * acc
        t = target
        out.append(TrajectoryState(t=float(target), qvec=x.copy(), pvec=m * v))
    return out


def to_weighted_state(chain, state):
    """Physical ``(x, P)`` -> mass-weighted ``(sqrt(m) x, P / sqrt(m))``."""
    sm = np.sqrt(chain.masses)
    return TrajectoryState(t=state.t, qvec=sm * state.qvec, pvec=state.pvec / sm)
