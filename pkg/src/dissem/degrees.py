"""Degree distributions: Poisson (Erdos-Renyi) and zeta power law.

Every model carries a ``max_degree`` cap; its pmf is the law truncated to
``0..max_degree`` and renormalized. Untruncated moments are available
separately for the phase-transition criterion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

POISSON = "poisson"
POWERLAW = "powerlaw"

ZETA_TERMS = 1000


class ModelError(ValueError):
    pass


def zeta(s: float, terms: int = ZETA_TERMS) -> float:
    """Riemann zeta for real ``s > 1``: direct sum plus Euler-Maclaurin tail.

    Returns ``inf`` for ``s <= 1`` where the series diverges.
    """
    if s <= 1.0:
        return math.inf
    y = np.arange(1, terms + 1, dtype=np.float64)
    head = float(np.sum(y[::-1] ** -s))
    N = float(terms)
    tail = (
        N ** (1.0 - s) / (s - 1.0)
        - 0.5 * N ** -s
        + s * N ** (-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * N ** (-s - 3.0) / 720.0
    )
    return head + tail


class Moments(NamedTuple):
    mean: float
    second_moment: float


@dataclass(frozen=True)
class DegreeModel:
    kind: str
    param: float
    max_degree: int

    def __post_init__(self):
        if self.kind == POISSON:
            if not self.param > 0:
                raise ModelError(f"Poisson mean degree must be positive, got {self.param}")
        elif self.kind == POWERLAW:
            if not self.param > 1:
                raise ModelError(f"power-law exponent must exceed 1, got {self.param}")
        else:
            raise ModelError(f"unknown degree model {self.kind!r}")
        if self.max_degree < 1:
            raise ModelError("max_degree must be at least 1")

    @property
    def label(self) -> str:
        name = "z" if self.kind == POISSON else "tau"
        return f"{self.kind}({name}={self.param:g})"

    @cached_property
    def pmf_array(self) -> np.ndarray:
        a = np.arange(self.max_degree + 1, dtype=np.float64)
        if self.kind == POISSON:
            p = np.empty_like(a)
            p[0] = math.exp(-self.param)
            # pmf(a) = pmf(a-1) * z / a; no factorials
            p[1:] = np.cumprod(self.param / a[1:]) * p[0]
        else:
            p = np.zeros_like(a)
            p[1:] = a[1:] ** -self.param
        p /= p.sum()
        p.setflags(write=False)
        return p

    @cached_property
    def moments(self) -> Moments:
        p = self.pmf_array
        a = np.arange(p.size, dtype=np.float64)
        return Moments(float(a @ p), float((a * a) @ p))

    def untruncated_moments(self) -> Moments:
        """Moments of the law without the degree cap (may be infinite)."""
        if self.kind == POISSON:
            z = self.param
            return Moments(z, z * z + z)
        t = self.param
        zt = zeta(t)
        return Moments(zeta(t - 1) / zt, zeta(t - 2) / zt)


def poisson(z: float, max_degree: int) -> DegreeModel:
    return DegreeModel(POISSON, float(z), int(max_degree))


def power_law(tau: float, max_degree: int) -> DegreeModel:
    return DegreeModel(POWERLAW, float(tau), int(max_degree))


def from_name(kind: str, param: float, max_degree: int) -> DegreeModel:
    return DegreeModel(kind, float(param), int(max_degree))


def pmf(m: DegreeModel, a: int) -> float:
    if not 0 <= a <= m.max_degree:
        raise ModelError(f"degree {a} outside 0..{m.max_degree}")
    return float(m.pmf_array[a])


def neighbor_pmf_array(m: DegreeModel) -> np.ndarray:
    """Degree law of a node reached by following a random edge: b P(b) / Z."""
    p = m.pmf_array
    mean = m.moments.mean
    if mean <= 0:
        raise ModelError("mean degree is zero")
    return np.arange(p.size) * p / mean


def neighbor_degree_pmf(m: DegreeModel, b: int) -> float:
    if not 0 <= b <= m.max_degree:
        raise ModelError(f"degree {b} outside 0..{m.max_degree}")
    if b == 0:
        return 0.0
    return float(neighbor_pmf_array(m)[b])


def criterion_ratio(m: DegreeModel, untruncated: bool = False) -> float:
    """<K^2> / Z; the giant component exists iff this exceeds 2."""
    mo = m.untruncated_moments() if untruncated else m.moments
    if mo.mean == 0:
        raise ModelError("mean degree is zero")
    if math.isinf(mo.second_moment) and math.isinf(mo.mean):
        return math.inf
    return mo.second_moment / mo.mean


def above_phase_transition(m: DegreeModel, untruncated: bool = False) -> bool:
    return criterion_ratio(m, untruncated) > 2.0


def _bisect(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    flo = f(lo)
    if flo * f(hi) > 0:
        raise ModelError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_mean_degree(max_degree: int = 200) -> float:
    """Poisson z at which <K^2>/Z = 2 under the truncated model."""
    return _bisect(lambda z: criterion_ratio(poisson(z, max_degree)) - 2.0, 0.05, 10.0)


def critical_exponent() -> float:
    """Power-law tau at which zeta(tau-2)/zeta(tau-1) = 2 (untruncated)."""
    return _bisect(
        lambda t: criterion_ratio(power_law(t, 1), untruncated=True) - 2.0, 3.05, 5.0
    )
