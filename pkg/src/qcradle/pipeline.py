"""Design -> synthesis -> transform pipeline and the verification suite behind the CLI."""
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import chainio
from .dynamics import (
    congruence_scan,
    evolve,
    initial_kick,
    revival_conditions,
    revival_schedule,
)
from .errors import DesignError
from .jacobi import build_jacobi, design_weights, eigensystem_analytic, eigensystem_from_spectrum
from .spectrum import FIXED_FIXED, FREE_FREE, eigenvalues, make_design, validate_pst_spectrum
from .synthesis import (
    chain_eigensystem,
    chain_eigenvalues,
    chain_to_jacobi,
    synthesize_fixed_fixed,
    synthesize_free_free,
    synthesize_free_free_from_eigensystem,
)
from .transforms import deform_chain, surgery_remove_pair

DEFAULT_MAX_N = 16
PST_TOL = 1e-8
FR_TOL = 1e-8
SPECTRUM_TOL = 1e-8
MIRROR_TOL = 1e-9
ENERGY_TOL = 1e-10


def max_n():
    """Size cap, overridable through the ``CRADLE_MAX_N`` environment variable."""
    raw = os.environ.get("CRADLE_MAX_N")
    if raw is None:
        return DEFAULT_MAX_N
    try:
        cap = int(raw)
    except ValueError:
        raise DesignError("size-cap", f"CRADLE_MAX_N must be an integer, got {raw!r}") from None
    if cap < 1:
        raise DesignError("size-cap", "CRADLE_MAX_N must be positive")
    return cap


def parse_surgery(text):
    """``"k,k+1;j,j+1"`` -> ``((k, k+1), (j, j+1))``; indices refer to the chain at that step."""
    if text is None or not str(text).strip():
        return ()
    pairs = []
    for chunk in str(text).split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            a, b = (int(v) for v in chunk.split(","))
        except ValueError:
            raise DesignError("surgery-pair", f"cannot parse surgery pair {chunk!r}") from None
        if b != a + 1:
            raise DesignError("surgery-pair", f"surgery pairs must be adjacent (k, k+1), got ({a}, {b})")
        pairs.append((a, b))
    return tuple(pairs)


@dataclass(frozen=True)
class DesignRequest:
    N: int
    r: int
    k0: int
    k1: int
    boundary: str = None
    omega: float = 1.0
    m0: float = 1.0
    pbar: float = 1.0
    alpha: float = 0.5
    surgery: tuple = ()

    def __post_init__(self):
        if self.boundary is None:
            object.__setattr__(self, "boundary", FREE_FREE if self.k0 == 0 else FIXED_FIXED)
        if not (0.0 < self.alpha < 1.0):
            raise DesignError("alpha-range", f"alpha must lie strictly between 0 and 1, got {self.alpha!r}")
        for name in ("omega", "m0", "pbar"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise DesignError(name, f"{name} must be positive and finite, got {val!r}")
        cap = max_n()
        if self.N > cap:
            raise DesignError("size-cap", f"N = {self.N} exceeds the cap {cap} (set CRADLE_MAX_N to override)")
        object.__setattr__(self, "surgery", tuple(tuple(int(v) for v in p) for p in self.surgery))

    def payload(self):
        d = asdict(self)
        d["surgery"] = [list(p) for p in self.surgery]
        return d


@dataclass(frozen=True)
class DesignResult:
    request: DesignRequest
    design: object
    jacobi: object
    eigensystem: object
    chain: object
    values: np.ndarray
    weights: np.ndarray
    kseq: np.ndarray
    surgery_crosscheck: tuple = field(default=())


def run_design(request):
    """Build the chain for a request: design, synthesis, surgery, deformation."""
    design = make_design(request.r, request.k0, request.k1, request.N,
                         omega=request.omega, boundary=request.boundary)
    jac = build_jacobi(design)
    values = eigenvalues(design)
    weights = design_weights(design)
    kseq = design.kseq.copy()
    eig = eigensystem_analytic(jac, design)
    checks = []
    for k, _ in request.surgery:
        step = surgery_remove_pair(weights, values, jac, k, kseq=kseq)
        jac, values, weights, kseq = step.jacobi, step.values, step.weights, step.kseq
        checks.append(step.crosscheck)
        eig = eigensystem_from_spectrum(jac, values, kseq=kseq, omega=design.omega)
    if not request.surgery and design.boundary == FREE_FREE:
        chain = synthesize_free_free(design, m0=request.m0)
    elif values[0] == 0.0:
        chain = synthesize_free_free_from_eigensystem(eig, jac, m0=request.m0, omega=design.omega)
    else:
        chain = synthesize_fixed_fixed(eig, jac, m0=request.m0, omega=design.omega)
    if request.alpha != 0.5:
        chain = deform_chain(chain, request.alpha)
    return DesignResult(request=request, design=design, jacobi=jac, eigensystem=eig, chain=chain,
                        values=values, weights=weights, kseq=kseq,
                        surgery_crosscheck=tuple(checks))


def design_document(request):
    """Chain-spec document for a request."""
    res = run_design(request)
    d = res.design
    design_block = {
        "N": d.bigN, "r": d.r, "k0": d.k0, "k1": d.k1,
        "omega": d.omega, "alpha": request.alpha, "m0": request.m0, "pbar": request.pbar,
        "boundary": d.boundary, "surgery": [list(p) for p in request.surgery],
    }
    derived = {
        "q": d.q, "qbar": d.qbar, "gamma": d.gamma, "Omega": d.Omega, "d": d.d,
        "kseq": [int(k) for k in res.kseq],
        "tstar": d.tstar,
    }
    return chainio.build_document(res.chain, design_block, derived, request.payload())


# ---------------------------------------------------------------- loaded chains

@dataclass(frozen=True)
class LoadedChain:
    chain: object
    kseq: np.ndarray
    r: int
    k0: int
    k1: int
    boundary: str
    omega: float
    alpha: float
    pbar: float
    surgered: bool

    @property
    def tstar(self):
        return math.pi / self.omega


def load_chain(doc):
    chain = chainio.chain_from_document(doc)
    des, der = doc["design"], doc["derived"]
    kseq = np.array(der["kseq"], dtype=np.int64)
    if len(kseq) != chain.bigN + 1:
        raise DesignError("document", "kseq length does not match the number of masses")
    surgered = bool(des.get("surgery"))
    return LoadedChain(chain=chain, kseq=kseq, r=int(des["r"]), k0=int(des["k0"]), k1=int(des["k1"]),
                       boundary=des.get("boundary", doc["boundary"]), omega=float(des.get("omega", 1.0)),
                       alpha=float(des.get("alpha", 0.5)), pbar=float(des.get("pbar", 1.0)),
                       surgered=surgered)


def schedule_for(loaded):
    """Revival schedule of a loaded chain (finite scan for surgered sequences)."""
    if loaded.surgered:
        return revival_schedule(None, None, None, alpha=loaded.alpha, omega=loaded.omega,
                                kseq=loaded.kseq)
    return revival_schedule(loaded.k0, loaded.k1, loaded.r, loaded.boundary,
                            alpha=loaded.alpha, omega=loaded.omega)


def schedule_report(doc):
    loaded = load_chain(doc)
    sched = schedule_for(loaded)
    m = loaded.chain.masses
    ratio = math.sqrt(m[-1] / m[0])
    entries = []
    for e in sched.entries:
        entries.append({
            "Z": e.Z,
            "conditions": list(e.conditions),
            "l": list(e.ells),
            "times": [float(t) for t in e.times],
            "p0": [float(v) for v in e.predictions[:, 0]],
            "pN": [float(v) for v in e.predictions[:, 1]],
            "physical_P0": [float(v) for v in e.predictions[:, 0]],
            "physical_PN": [float(v) * ratio for v in e.predictions[:, 1]],
        })
    return {
        "boundary": loaded.chain.boundary,
        "alpha": loaded.alpha,
        "tstar": loaded.tstar,
        "kseq": [int(k) for k in loaded.kseq],
        "orders": sched.orders,
        "momentum_convention": "p is mass-weighted (P/sqrt(m)) relative to pbar; "
                               "physical_* give P relative to sqrt(m0)*pbar",
        "entries": entries,
    }


# ---------------------------------------------------------------- simulation

def sample_times(loaded, samples=200, times=None):
    """Explicit times, or ``samples`` points on ``[0, t*]`` plus every revival time."""
    if times is not None:
        return np.asarray(times, dtype=float)
    grid = np.linspace(0.0, loaded.tstar, samples)
    fr = [float(f) * loaded.tstar for f in schedule_for(loaded).distinct_fractions()]
    return np.sort(np.concatenate([grid, fr]))


def simulate_rows(doc, samples=200, times=None):
    """Trajectory table: header and rows ``t, p_0..p_N, P_0..P_N, E``."""
    loaded = load_chain(doc)
    eig = chain_eigensystem(loaded.chain)
    N = loaded.chain.bigN
    init = initial_kick(N + 1, loaded.pbar)
    A = chain_to_jacobi(loaded.chain).dense(physical=True)
    header = (["t"] + [f"p_{i}" for i in range(N + 1)] + [f"P_{i}" for i in range(N + 1)] + ["E"])
    rows = []
    for t in sample_times(loaded, samples, times):
        st = evolve(eig, init, t)
        P = loaded.chain.to_physical(st.pvec)
        rows.append([float(t)] + [float(v) for v in st.pvec] + [float(v) for v in P]
                    + [direct_energy(A, st)])
    return header, rows


# ---------------------------------------------------------------- verification

@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class VerifyReport:
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def as_dict(self):
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}


def direct_energy(A, state):
    """``1/2 (p.p + q.A.q)`` evaluated directly with the dense chain matrix."""
    return 0.5 * float(state.pvec @ state.pvec + state.qvec @ A @ state.qvec)


def _add(checks, name, value, tol, note=""):
    value = float(value)
    checks.append(Check(name=name, value=value, tolerance=tol,
                        passed=bool(math.isfinite(value) and value <= tol), note=note))


def verify_document(doc):
    """Run the invariant suite on a chain-spec document."""
    loaded = load_chain(doc)
    chain = loaded.chain
    N = chain.bigN
    checks = []
    undeformed = loaded.alpha == 0.5

    if undeformed:
        _add(checks, "mirror-symmetry", chain.mirror_error(), MIRROR_TOL)

    target = (loaded.omega * loaded.kseq.astype(float)) ** 2
    got = chain_eigenvalues(chain)
    rel = np.abs(got - target) / np.maximum(target, loaded.omega ** 2)
    _add(checks, "spectrum", np.max(rel), SPECTRUM_TOL, "chain eigenvalues vs (omega k_n)^2")

    pst = validate_pst_spectrum(loaded.kseq)
    checks.append(Check("pst-spectrum", 0.0 if pst.passed else 1.0, 0.0, pst.passed,
                        ",".join(pst.violations)))

    eig = chain_eigensystem(chain)
    init = initial_kick(N + 1, 1.0)
    at_t = evolve(eig, init, loaded.tstar).pvec
    sign = (-1.0) ** int(loaded.kseq[0])
    if undeformed:
        _add(checks, "pst-end", abs(at_t[-1] - sign), PST_TOL, "p_N(t*)/pbar vs (-1)^k0")
        _add(checks, "pst-residual", np.max(np.abs(at_t[:-1])), PST_TOL, "max_{i<N} |p_i(t*)|/pbar")
    else:
        a = loaded.alpha
        dev = max(abs(at_t[0] - sign * (1 - 2 * a)), abs(at_t[-1] - sign * 2 * math.sqrt(a * (1 - a))))
        _add(checks, "split-at-tstar", dev, PST_TOL, "no PST (alpha != 1/2); end split vs prediction")
        interior = np.max(np.abs(at_t[1:-1])) if N > 1 else 0.0
        _add(checks, "split-residual", interior, PST_TOL)

    sched = schedule_for(loaded)
    checks.append(Check("schedule-nonempty", 0.0 if sched.entries else 1.0, 0.0, bool(sched.entries),
                        "orders " + ",".join(str(z) for z in sched.orders)))
    if not loaded.surgered:
        scan = congruence_scan(loaded.k0, loaded.k1, loaded.r) if loaded.boundary == FIXED_FIXED \
            else [z for z in range(2, loaded.r + 1) if loaded.r % z == 0]
        ok = list(revival_conditions(loaded.k0, loaded.k1, loaded.r, loaded.boundary)) == scan
        checks.append(Check("schedule-oracle", 0.0 if ok else 1.0, 0.0, ok, "orders vs congruence scan"))

    worst = 0.0
    interior = 0.0
    for e in sched.entries:
        for t, pred in zip(e.times, e.predictions):
            p = evolve(eig, init, t).pvec
            worst = max(worst, abs(p[0] - pred[0]), abs(p[-1] - pred[1]))
            if N > 1:
                interior = max(interior, float(np.max(np.abs(p[1:-1]))))
    _add(checks, "revival-ends", worst, FR_TOL, "simulated (p_0, p_N) vs prediction")
    _add(checks, "revival-interior", interior, FR_TOL)

    A = chain_to_jacobi(chain).dense(physical=True)
    e0 = direct_energy(A, evolve(eig, init, 0.0))
    e1 = direct_energy(A, evolve(eig, init, 0.37 * loaded.tstar))
    _add(checks, "energy", abs(e1 - e0) / e0, ENERGY_TOL, "direct 1/2(p.p + q.A.q) at 0.37 t* vs 0")
    return VerifyReport(checks=checks)
