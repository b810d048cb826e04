"""Bishop-Phelps-Bollobas step for a single functional on an l_p domain.

Given a unit functional ``f`` and a unit vector ``x`` with ``|f(x)| > 1 - eps``
the solver returns a unit functional ``g`` and a unit vector ``y`` with
``|g(y)| = 1``, ``||x - y|| < sqrt(2 eps)`` and ``||f - g|| < sqrt(2 eps)``.

For ``p = 2`` the answer is closed form.  Other exponents use a
verified-output search: first along the segment from ``x`` to the aligned
norming vector of ``f``, then by multi-start projected ascent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import BpbSearchError, HypothesisError
from .domain import Functional, _nearest_simplex_weights, norming_functional, norming_vector

UNIT_TOL = 1e-8


@dataclass(frozen=True)
class FunctionalBpb:
    g: Functional
    y: np.ndarray
    dist_x: float
    dist_f: float
    bound: float
    method: str

    def __iter__(self):
        yield self.g
        yield self.y


def _candidate(f: Functional, x: np.ndarray, y: np.ndarray, bound: float, method: str):
    dom = f.domain
    y = dom.normalize(y)
    # |g(y)| = 1 allows a unimodular factor; match it to the phase of f(y)
    fy = f(y)
    c = fy / abs(fy) if fy != 0 else 1.0
    g = norming_functional(y, dom, near=f.scaled(np.conj(c))).scaled(c)
    dx = dom.norm(x - y)
    df = (f - g).norm()
    ok = dx < bound and df < bound and abs(abs(g(y)) - 1.0) <= 1e-10 and abs(g.norm() - 1.0) <= 1e-10
    return ok, FunctionalBpb(g, y, dx, df, bound, method)


def _score(c: FunctionalBpb) -> float:
    return c.bound - max(c.dist_x, c.dist_f)


def bpb_functional(f: Functional, x, eps: float, *, seed: int = 0, restarts: int = 32,
                   path_steps: int = 257) -> FunctionalBpb:
    dom = f.domain
    x = np.asarray(x, dtype=np.complex128)
    if not 0.0 < eps < 2.0:
        raise HypothesisError(f"eps must be positive, got {eps}")
    if abs(f.norm() - 1.0) > UNIT_TOL:
        raise HypothesisError(f"functional norm {f.norm():.12g} is not 1")
    if abs(dom.norm(x) - 1.0) > UNIT_TOL:
        raise HypothesisError(f"point norm {dom.norm(x):.12g} is not 1")
    fx = f(x)
    if not abs(fx) > 1.0 - eps:
        raise HypothesisError(f"|f(x)| = {abs(fx):.12g} is not above 1 - eps = {1 - eps:.12g}")
    bound = math.sqrt(2.0 * eps)
    c = fx / abs(fx)

    if dom.p == 2.0:
        v = f.vector
        u = np.conj(v) / np.linalg.norm(v)
        y = c * u
        dx = math.sqrt(max(0.0, 2.0 - 2.0 * abs(fx)))
        return FunctionalBpb(f, y, dx, 0.0, bound, "closed-form")

    best = None
    for y in _face_candidates(f, x, c, bound):
        ok, cand = _candidate(f, x, y, bound, "face")
        if ok:
            return cand
        if best is None or _score(cand) > _score(best):
            best = cand

    target = c * norming_vector(f)
    for t in np.linspace(0.0, 1.0, path_steps):
        ok, cand = _candidate(f, x, (1.0 - t) * x + t * target, bound, "segment")
        if ok:
            return cand
        if best is None or _score(cand) > _score(best):
            best = cand

    rng = np.random.default_rng(seed)
    for k in range(restarts):
        start = x + (0.1 * bound / (k + 1)) * (rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size))
        for cand in _ascent(f, x, dom.normalize(start), bound):
            ok, cand = _candidate(f, x, cand, bound, "ascent")
            if ok:
                return cand
            if _score(cand) > _score(best):
                best = cand
    raise BpbSearchError(
        "no verified functional BPB pair found",
        best={"dist_x": best.dist_x, "dist_f": best.dist_f, "bound": bound, "y": best.y.tolist()},
    )


def _face_candidates(f: Functional, x: np.ndarray, c: complex, bound: float):
    """Points on faces of the unit sphere where a functional close to ``f`` attains.

    ``p = 1``: y is supported on coordinates with ``|f_k|`` near 1, phases
    matched to ``f``; the weights are the simplex point nearest to ``x``.
    ``p = infinity``: coordinates of ``x`` close to the matched unimodular
    value are pushed onto it, the rest are kept.
    """
    p = f.domain.p
    v = f.vector
    a = np.abs(v)
    ph = np.where(a > 0, v / np.where(a > 0, a, 1.0), 1.0)
    if p == 1:
        for s in np.unique(1.0 - a):
            if s >= bound:
                break
            S = np.flatnonzero(1.0 - a <= s)
            t = _nearest_simplex_weights(x[S] * ph[S] / c) if S.size > 1 else np.ones(1)
            y = np.zeros_like(x)
            y[S] = c * t * np.conj(ph[S])
            yield y
    elif math.isinf(p):
        aligned = c * np.conj(ph)
        gap = np.abs(x - aligned)
        for s in np.unique(gap):
            if s >= bound:
                break
            y = x.copy()
            mask = gap <= s
            y[mask] = aligned[mask]
            yield y


def _ascent(f: Functional, x: np.ndarray, y: np.ndarray, radius: float, steps: int = 60):
    """Projected ascent of ``|f(y)|`` on the sphere inside the ball ``||y - x|| <= radius``."""
    dom = f.domain
    grad = np.conj(f.vector)
    for k in range(steps):
        ph = f(y)
        ph = ph / abs(ph) if ph != 0 else 1.0
        y = dom.normalize(y + (0.5 / (k + 1)) * ph * grad)
        if dom.norm(y - x) > radius:
            lo, hi = 0.0, 1.0
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                if dom.norm(dom.normalize(x + mid * (y - x)) - x) <= radius:
                    lo = mid
                else:
                    hi = mid
            y = dom.normalize(x + lo * (y - x))
        yield y
