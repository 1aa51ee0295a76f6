"""Generating-function predictions for the uniform choice heuristic.

Everything here is a pure function of a degree model, the second-choice
probability ``alpha`` and, for the size-dependent quantities, ``n``. Sums run
over ``0..max_degree`` of the (renormalized) model pmf.

Naming: ``r`` = a randomly chosen node; ``c`` = a node reached over an edge
its predecessor chose; ``nc1`` / ``nc2`` = reached over an edge the predecessor
did not choose, the node itself making one / two choices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.stats import binom

from .degrees import POWERLAW, DegreeModel, above_phase_transition

TOL = 1e-12
MAX_ITER = 10**6
PLAIN_STEPS = 5000
# iterates stop within TOL of a root; near q = 1 that leaves theta ~ TOL / (1 - slope)
NEGLIGIBLE = 1e-8
IMAG_RESIDUE = 1e-8


class ConvergenceError(RuntimeError):
    pass


class BelowTransition(ValueError):
    pass


# -- choice probabilities ---------------------------------------------------

def _safe_inv(k) -> np.ndarray:
    k = np.asarray(k, dtype=np.float64)
    return np.divide(1.0, k, out=np.zeros_like(k), where=k > 0)


def pi_r(a, alpha):
    """P(|C_u| = 1), P(|C_u| = 2) for a degree-``a`` node (0 at a = 0)."""
    inv = _safe_inv(a)
    on = (np.asarray(a) > 0).astype(np.float64)
    one = on * (1.0 - alpha) + alpha * inv
    two = on - one
    return one, two


def pi_c(b, alpha):
    """P(|C_v minus {u}| = k), k = 0, 1, 2, for a degree-``b`` node v."""
    inv = _safe_inv(b)
    b = np.asarray(b, dtype=np.float64)
    on = (b > 0).astype(np.float64)
    p0 = (on * (1.0 - alpha) + alpha * inv) * inv
    p1 = on * (1.0 - inv) * (1.0 - alpha + 3.0 * alpha * inv)
    p2 = on * alpha * (1.0 - inv) * (1.0 - 2.0 * inv)
    return p0, p1, p2


def pi_nc1(b):
    """P(u in C_v) when v makes a single choice."""
    return _safe_inv(b)


def pi_nc2(b):
    """P(v chose u twice), P(v chose u exactly once) when v makes two choices."""
    inv = _safe_inv(b)
    return inv * inv, 2.0 * (1.0 - inv) * inv


# -- model tables -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Tables:
    deg: np.ndarray  # 0..K
    p: np.ndarray  # P_G(a)
    w: np.ndarray  # b P_G(b) / Z_G
    mean: float


@lru_cache(maxsize=64)
def _tables(m: DegreeModel) -> _Tables:
    p = np.asarray(m.pmf_array)
    top = int(np.flatnonzero(p)[-1])  # trailing zeros (Poisson underflow) carry no mass
    p = p[: top + 1]
    deg = np.arange(top + 1, dtype=np.float64)
    mean = float(deg @ p)
    if mean <= 0:
        raise ValueError("mean degree is zero")
    return _Tables(deg, p, deg * p / mean, mean)


def _pow(x: float, e: np.ndarray) -> np.ndarray:
    """x**e with negative exponents mapped to 0 (their coefficients vanish)."""
    out = np.zeros(e.shape)
    ok = e >= 0
    out[ok] = np.power(x, e[ok])
    return out


def _jacobian(step, x: np.ndarray, fx: np.ndarray, h: float = 1e-7) -> np.ndarray:
    J = np.empty((x.size, x.size))
    for k in range(x.size):
        xh = x.copy()
        xh[k] += h
        J[:, k] = (step(xh) - fx) / h
    return J


def _newton_from_below(step, x: np.ndarray, fx: np.ndarray) -> np.ndarray:
    """One Newton step on F(x) - x, shortened until it stays below the fixed point.

    The maps are convex and increasing, so from below the smallest fixed point a
    Newton step lands below it again; the check guards against Jacobian error.
    """
    A = np.eye(x.size) - _jacobian(step, x, fx)
    d, *_ = np.linalg.lstsq(A, fx - x, rcond=None)
    d = np.maximum(d, 0.0)
    for _ in range(60):
        cand = np.minimum(x + d, 1.0)
        fc = np.minimum(step(cand), 1.0)
        if np.all(fc >= cand - 1e-13):
            return cand
        d *= 0.5
    return fx


def _iterate(step: Callable[[np.ndarray], np.ndarray], x0: np.ndarray,
             trace: list | None = None) -> np.ndarray:
    """Smallest fixed point by iteration from ``x0``; stops once the sup-norm
    change is <= TOL.

    Plain functional iteration first. Near a transition the map's slope tends
    to 1 and that crawls, so after PLAIN_STEPS the update switches to Newton
    steps from below. The maps are increasing with nonnegative coefficients,
    so iterates must be nondecreasing; a decrease means something is wrong.
    """
    x = np.asarray(x0, dtype=np.float64)
    for it in range(MAX_ITER):
        if trace is not None:
            trace.append(x.copy())
        fx = np.minimum(step(x), 1.0)
        nxt = fx if it < PLAIN_STEPS else _newton_from_below(step, x, fx)
        if np.any(nxt < x - 1e-13):
            raise ConvergenceError("fixed-point iterate decreased")
        if np.max(np.abs(fx - x)) <= TOL:
            if trace is not None:
                trace.append(fx.copy())
            return fx
        x = nxt
    raise ConvergenceError(f"no convergence within {MAX_ITER} iterations")


# -- dead ends in G -----------------------------------------------------------

def _failure_q(m: DegreeModel, gamma: float, trace: list | None = None) -> float:
    t = _tables(m)
    w, e = t.w[1:], t.deg[1:] - 1.0
    rho = float(w @ e)
    if gamma * rho <= 1.0:
        # at or below the (thinned) transition the only root in [0, 1] is 1
        return 1.0

    def step(x):
        base = (1.0 - gamma) + gamma * x[0]
        return np.array([w @ np.power(base, e)])

    return float(_iterate(step, np.zeros(1), trace)[0])


def solve_q(m: DegreeModel, trace: list | None = None) -> float:
    """Probability that a neighbor is a dead end in G (smallest fixed point)."""
    return _failure_q(m, 1.0, trace)


def theta_from_q(m: DegreeModel, q: float) -> float:
    """Fraction of nodes in G's giant component: 1 - sum_a P(a) q^a."""
    if q >= 1.0:
        return 0.0
    t = _tables(m)
    return float(min(1.0, max(0.0, 1.0 - t.p @ np.power(q, t.deg))))


class FailureFixedPoint(NamedTuple):
    q_prime: float
    theta_G_prime: float
    bound: float


def failure_fixed_point(m: DegreeModel, gamma: float, trace: list | None = None) -> FailureFixedPoint:
    """Giant component of G with each edge kept w.p. ``gamma``, and the
    resulting upper bound (theta_G' / theta_G)^2 on the reached fraction."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    qp = _failure_q(m, gamma, trace)
    th_p = theta_from_q(m, qp)
    th = theta_from_q(m, solve_q(m))
    bound = (th_p / th) ** 2 if th > 0 else 0.0
    return FailureFixedPoint(qp, th_p, bound)


# -- dead ends in D -----------------------------------------------------------

class DeadEnds(NamedTuple):
    q_c: float
    q_nc1: float
    q_nc2: float


def solve_dead_end_system(m: DegreeModel, alpha: float, trace: list | None = None) -> DeadEnds:
    """Joint smallest fixed point of the three coupled dead-end equations in D."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    t = _tables(m)
    b, w = t.deg[1:], t.w[1:]
    c0, c1, c2 = pi_c(b, alpha)
    n1 = pi_nc1(b)
    n20, n21 = pi_nc2(b)
    e1, e2, e3 = b - 1.0, b - 2.0, b - 3.0

    def step(v):
        qc, qn1, qn2 = v
        x = (1.0 - alpha) * qn1 + alpha * qn2
        x1, x2, x3 = _pow(x, e1), _pow(x, e2), _pow(x, e3)
        return np.array([
            w @ (c0 * x1 + c1 * qc * x2 + c2 * qc * qc * x3),
            w @ (1.0 - n1 + n1 * x1),
            w @ (1.0 - n20 - n21 + n20 * x1 + n21 * qc * x2),
        ])

    return DeadEnds(*map(float, _iterate(step, np.zeros(3), trace)))


def _mixed(alpha: float, de: DeadEnds) -> float:
    return (1.0 - alpha) * de.q_nc1 + alpha * de.q_nc2


def giant_membership_in_D(m: DegreeModel, alpha: float, de: DeadEnds) -> np.ndarray:
    """P(node in D's giant component | G-degree a), for a = 0..K."""
    t = _tables(m)
    r1, r2 = pi_r(t.deg, alpha)
    x = _mixed(alpha, de)
    out = 1.0 - r1 * de.q_c * _pow(x, t.deg - 1) - r2 * de.q_c ** 2 * _pow(x, t.deg - 2)
    out[0] = 0.0  # isolated nodes are never in the giant component
    return np.clip(out, 0.0, 1.0)


def theta_D(m: DegreeModel, alpha: float, q_c: float, q_nc1: float, q_nc2: float) -> float:
    """Fraction of nodes in D's giant component."""
    t = _tables(m)
    member = giant_membership_in_D(m, alpha, DeadEnds(q_c, q_nc1, q_nc2))
    return float(min(1.0, max(0.0, t.p @ member)))


# -- degrees in D -------------------------------------------------------------

class ReverseChoice(NamedTuple):
    r: float
    r_nc1: float
    r_nc2: float


def _reverse_weights(b: np.ndarray, alpha: float) -> np.ndarray:
    n20, n21 = pi_nc2(b)
    return (1.0 - alpha) * pi_nc1(b) + alpha * (n20 + n21)


def compute_r(m: DegreeModel, alpha: float) -> ReverseChoice:
    """Probability that an unchosen G-neighbor v chooses u back."""
    t = _tables(m)
    b, w = t.deg[1:], t.w[1:]
    r_nc1 = float(w @ pi_nc1(b))
    n20, n21 = pi_nc2(b)
    r_nc2 = float(w @ (n20 + n21))
    return ReverseChoice((1.0 - alpha) * r_nc1 + alpha * r_nc2, r_nc1, r_nc2)


def mean_degree_in_D(a, alpha: float, r):
    """E[D-degree | G-degree a]; ``r`` may vary with ``a``."""
    a = np.asarray(a, dtype=np.float64)
    r1, r2 = pi_r(a, alpha)
    return r1 * (1.0 + (a - 1.0) * r) + r2 * (2.0 + (a - 2.0) * r)


def degree_pmf_in_D(a: int, alpha: float, r: float) -> np.ndarray:
    """P(D-degree = i | G-degree a) for i = 0..a."""
    if a < 1:
        raise ValueError("G-degree must be at least 1")
    i = np.arange(a + 1)
    r1, r2 = pi_r(a, alpha)
    if r < np.finfo(np.float64).tiny:
        r = 0.0  # scipy's binomial overflows on subnormal p
    out = r1 * binom.pmf(i - 1, a - 1, r)
    if a >= 2:
        out = out + r2 * binom.pmf(i - 2, a - 2, r)
    return out


def z_gcc_d(m: DegreeModel, alpha: float, de: DeadEnds, r: float) -> float:
    """Mean D-degree over D's giant component (Bayes inversion on G-degree)."""
    t = _tables(m)
    member = giant_membership_in_D(m, alpha, de)
    th = float(t.p @ member)
    if th <= NEGLIGIBLE:
        raise BelowTransition("D has no giant component")
    return float((member * t.p) @ mean_degree_in_D(t.deg, alpha, r) / th)


def z_d_gcc_g(m: DegreeModel, alpha: float, q: float) -> float:
    """Mean D-degree over G's giant component.

    The neighbor law b P(b)/Z is replaced, per G-degree a, by its conditional
    on both endpoints lying in G's giant component,
    (b P(b)/Z) (1 - q^(a+b-2)) / (1 - q^a). Because q^(a+b-2) factors as
    q^(a-1) q^(b-1) the per-a reverse-choice probability needs only two sums.
    """
    if q >= 1.0:
        raise BelowTransition("G has no giant component")
    t = _tables(m)
    b, w = t.deg[1:], t.w[1:]
    f = _reverse_weights(b, alpha)
    s0 = float(w @ f)
    s1 = float(w @ (f * np.power(q, b - 1.0)))
    a = t.deg[1:]
    in_g = 1.0 - np.power(q, a)  # P(in G's giant | a)
    r_times_in = s0 - np.power(q, a - 1.0) * s1  # r_a (1 - q^a)
    r1, r2 = pi_r(a, alpha)
    weighted = in_g * (r1 + 2.0 * r2) + r_times_in * (r1 * (a - 1.0) + r2 * (a - 2.0))
    theta_g = float(t.p[1:] @ in_g)
    return float(t.p[1:] @ weighted / theta_g)


# -- path lengths -------------------------------------------------------------

@dataclass(frozen=True)
class Coefficients:
    """Linear coefficients of the four expected-neighbour recursions."""

    c_c: float
    c_nc1: float
    c_nc2: float
    nc1_nc1: float
    nc1_nc2: float
    nc2_c: float
    nc2_nc1: float
    nc2_nc2: float
    r_c: float
    r_nc1: float
    r_nc2: float

    @property
    def A(self) -> np.ndarray:
        return np.array([self.r_c, self.r_nc1, self.r_nc2])

    @property
    def B(self) -> np.ndarray:
        return np.array([
            [self.c_c, self.c_nc1, self.c_nc2],
            [0.0, self.nc1_nc1, self.nc1_nc2],
            [self.nc2_c, self.nc2_nc1, self.nc2_nc2],
        ])


def coefficients(m: DegreeModel, alpha: float, de: DeadEnds) -> Coefficients:
    t = _tables(m)
    b, w = t.deg[1:], t.w[1:]
    c0, c1, c2 = pi_c(b, alpha)
    n1 = pi_nc1(b)
    n20, n21 = pi_nc2(b)
    onward_c = float(w @ (c0 * (b - 1) + c1 * (b - 2) + c2 * (b - 3)))
    onward_n1 = float(w @ (n1 * (b - 1)))
    onward_n2 = float(w @ (n20 * (b - 1) + n21 * (b - 2)))

    member = giant_membership_in_D(m, alpha, de)
    th = float(t.p @ member)
    if th <= NEGLIGIBLE:
        raise BelowTransition("D has no giant component")
    a = t.deg
    r1, r2 = pi_r(a, alpha)
    weight = member * t.p / th
    onward_r = float(weight @ (r1 * (a - 1) + r2 * (a - 2)))
    return Coefficients(
        c_c=float(w @ (c1 + 2.0 * c2)),
        c_nc1=(1.0 - alpha) * onward_c,
        c_nc2=alpha * onward_c,
        nc1_nc1=(1.0 - alpha) * onward_n1,
        nc1_nc2=alpha * onward_n1,
        nc2_c=float(w @ n21),
        nc2_nc1=(1.0 - alpha) * onward_n2,
        nc2_nc2=alpha * onward_n2,
        r_c=float(weight @ (r1 + 2.0 * r2)),
        r_nc1=(1.0 - alpha) * onward_r,
        r_nc2=alpha * onward_r,
    )


@dataclass(frozen=True)
class Spectral:
    """Eigen-decomposition B = V diag(lam) V^-1, projected onto A and v0."""

    eigenvalues: np.ndarray
    left: np.ndarray  # A V
    right: np.ndarray  # V^-1 v0

    @classmethod
    def of(cls, A: np.ndarray, B: np.ndarray, v0: np.ndarray) -> "Spectral":
        lam, V = np.linalg.eig(B)
        gaps = np.abs(lam[:, None] - lam[None, :])[~np.eye(3, dtype=bool)]
        if gaps.min() < 1e-12:
            raise ConvergenceError("repeated eigenvalues; B is not diagonalizable this way")
        return cls(lam.astype(complex), A @ V, np.linalg.solve(V, v0.astype(complex)))

    def term(self, ell) -> np.ndarray:
        """Expected number of ell-neighbors, A B^(ell-1) v0."""
        ell = np.asarray(ell, dtype=np.float64)
        pw = np.power(self.eigenvalues[None, :], (ell.reshape(-1, 1) - 1.0))
        return ((pw * self.left) @ self.right).reshape(ell.shape)

    def cumulative(self, L) -> np.ndarray:
        """sum_{ell=1..L} of ``term``, via the geometric-series closed form."""
        L = np.asarray(L, dtype=np.float64).reshape(-1, 1)
        lam = self.eigenvalues[None, :]
        near_one = np.abs(lam - 1.0) < 1e-12
        denom = np.where(near_one, 1.0, lam - 1.0)
        geo = np.where(near_one, L, (np.power(lam, L) - 1.0) / denom)
        return ((geo * self.left) @ self.right)


def direct_terms(A: np.ndarray, B: np.ndarray, v0: np.ndarray, count: int) -> np.ndarray:
    """A B^(ell-1) v0 for ell = 1..count by repeated multiplication."""
    out = np.empty(count)
    vec = v0.astype(np.float64)
    for k in range(count):
        out[k] = A @ vec
        vec = B @ vec
    return out


def _bisect_increasing(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    flo, fhi = f(lo), f(hi)
    if flo > 0 or fhi < 0:
        raise ConvergenceError(f"root not bracketed on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def second_moment_diverges(m: DegreeModel) -> bool:
    """True when the untruncated <K^2> is infinite (power law with tau <= 3).

    The neighbour-count recursions then grow without bound as n grows, so no
    finite path-length prediction exists.
    """
    return m.kind == POWERLAW and math.isinf(m.untruncated_moments().second_moment)


@dataclass(frozen=True)
class PathLengths:
    Z_GCC_G: float
    rho: float
    L_G: float
    L_D: float
    Pt: float
    coefficients: Coefficients
    eigenvalues: np.ndarray
    imag_residue: float


def path_lengths(m: DegreeModel, alpha: float, n: int, q: float, de: DeadEnds,
                 rc: ReverseChoice) -> PathLengths:
    """Mean distances from the originator in G and in D, and their ratio."""
    t = _tables(m)
    th_g = theta_from_q(m, q)
    in_g = 1.0 - np.power(q, t.deg)
    z_gcc_g = float((t.deg * in_g) @ t.p / th_g)
    rho = float(t.w @ (t.deg - 1.0))
    if rho <= 1.0:
        raise BelowTransition("rho <= 1: neighbourhoods do not grow")
    L_G = math.log((n * th_g - 1.0) / z_gcc_g * (rho - 1.0) + 1.0) / math.log(rho)

    co = coefficients(m, alpha, de)
    v0 = np.array([1.0, rc.r_nc1, rc.r_nc2])
    spec = Spectral.of(co.A, co.B, v0)
    th_d = theta_D(m, alpha, *de)
    target = n * th_d - 1.0
    hi = 10.0 * math.log(n)

    def excess(L):
        return float(spec.cumulative(L)[0].real) - target

    if np.max(spec.eigenvalues.real) <= 1.0:
        raise BelowTransition("D's neighbourhoods do not grow (spectral radius <= 1)")
    if excess(1.0) >= 0.0:
        raise BelowTransition("D's giant component is smaller than one neighbourhood")
    # barely supercritical D grows slowly; widen the bracket before giving up
    while excess(hi) < 0.0 and hi < 1e6:
        hi *= 2.0
    L_D = _bisect_increasing(excess, 1.0, hi)
    imag = float(abs(spec.cumulative(L_D)[0].imag))
    # a negative eigenvalue raised to a non-integer L is complex; the real part
    # is the interpolation used, and the residue is reported rather than raised
    Pt = th_d * L_D / (th_g * L_G)
    return PathLengths(z_gcc_g, rho, L_G, L_D, Pt, co, spec.eigenvalues, imag)


# -- full bundle ----------------------------------------------------------------

@dataclass(frozen=True)
class Prediction:
    model: DegreeModel
    alpha: float
    n: int
    q: float
    theta_G: float
    dead_ends: DeadEnds
    theta_D: float
    reverse: ReverseChoice
    Z_GCC_D: float | None
    Z_D_GCC_G: float
    Pn: float
    Pm: float
    paths: PathLengths | None
    pt_status: str  # "ok", "non-convergent" or "no-giant-D"
    failure: FailureFixedPoint | None = None
    gamma: float | None = None
    notes: list = field(default_factory=list)

    @property
    def Pt(self) -> float | None:
        return None if self.paths is None else self.paths.Pt

    def as_row(self) -> dict:
        p = self.paths
        row = {
            "model": self.model.kind,
            "param": self.model.param,
            "alpha": self.alpha,
            "n": self.n,
            "q": self.q,
            "theta_G": self.theta_G,
            "q_c": self.dead_ends.q_c,
            "q_nc1": self.dead_ends.q_nc1,
            "q_nc2": self.dead_ends.q_nc2,
            "theta_D": self.theta_D,
            "r": self.reverse.r,
            "r_nc1": self.reverse.r_nc1,
            "r_nc2": self.reverse.r_nc2,
            "Z_GCC_D": self.Z_GCC_D,
            "Z_D_GCC_G": self.Z_D_GCC_G,
            "Z_GCC_G": None if p is None else p.Z_GCC_G,
            "rho": None if p is None else p.rho,
            "L_G": None if p is None else p.L_G,
            "L_D": None if p is None else p.L_D,
            "Pn": self.Pn,
            "Pm": self.Pm,
            "Pt": self.Pt,
            "pt_status": self.pt_status,
            "gamma": self.gamma,
            "q_prime": None if self.failure is None else self.failure.q_prime,
            "theta_G_prime": None if self.failure is None else self.failure.theta_G_prime,
            "failure_bound": None if self.failure is None else self.failure.bound,
            "notes": "; ".join(self.notes),
        }
        return row


def predict(m: DegreeModel, alpha: float, n: int, gamma: float | None = None) -> Prediction:
    """All predictions for the uniform heuristic on a graph with degree law ``m``."""
    if not above_phase_transition(m):
        raise BelowTransition(f"{m.label} is below phase transition")
    q = solve_q(m)
    th_g = theta_from_q(m, q)
    de = solve_dead_end_system(m, alpha)
    th_d = theta_D(m, alpha, *de)
    rc = compute_r(m, alpha)
    zd_g = z_d_gcc_g(m, alpha, q)
    pn = (th_d / th_g) ** 2
    failure = failure_fixed_point(m, gamma) if gamma is not None else None

    if th_d <= NEGLIGIBLE:
        # a diverging second moment decides Pt before D's giant component does
        if second_moment_diverges(m):
            status, notes = "non-convergent", ["D has no giant component"]
        else:
            status, notes = "no-giant-D", []
        return Prediction(m, alpha, n, q, th_g, de, th_d, rc, None, zd_g, pn, 0.0,
                          None, status, failure, gamma, notes)

    z_d = z_gcc_d(m, alpha, de, rc.r)
    pm = th_d ** 2 * n * z_d / (2.0 * th_g * (n * th_g - 1.0))
    if second_moment_diverges(m):
        paths, status = None, "non-convergent"
    else:
        try:
            paths, status = path_lengths(m, alpha, n, q, de, rc), "ok"
        except BelowTransition:
            paths, status = None, "no-giant-D"
    notes = []
    if paths is not None and paths.imag_residue > IMAG_RESIDUE:
        notes.append(f"path-length sum has imaginary residue {paths.imag_residue:.3g}")
    return Prediction(m, alpha, n, q, th_g, de, th_d, rc, z_d, zd_g, pn, pm,
                      paths, status, failure, gamma, notes)
