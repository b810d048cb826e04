"""Finite-dimensional l_p domains, their functionals and duality maps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def pnorm(x, p: float) -> float:
    a = np.abs(np.asarray(x, dtype=np.complex128))
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return float(a.sum())
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((a / m) ** p) ** (1.0 / p))


def dual_norm(v, p: float) -> float:
    """Norm of ``x -> sum v_k x_k`` on ``(C^n, ||.||_p)``: the q-norm of v."""
    return pnorm(v, conjugate_exponent(p))


@dataclass(frozen=True)
class FiniteDomain:
    n: int
    p: float = 2.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be at least 1")
        p = float(self.p)
        if not (p >= 1.0):
            raise ValueError(f"norm exponent must be >= 1, got {self.p}")
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        return conjugate_exponent(self.p)

    def norm(self, x) -> float:
        return pnorm(x, self.p)

    def normalize(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        return x / self.norm(x)

    def to_dict(self) -> dict:
        return {"n": self.n, "p": "inf" if math.isinf(self.p) else self.p}


@dataclass(frozen=True)
class Functional:
    domain: FiniteDomain
    vector: np.ndarray

    def __post_init__(self):
        v = np.array(self.vector, dtype=np.complex128).ravel()
        if v.size != self.domain.n:
            raise ValueError(f"functional has {v.size} entries for a {self.domain.n}-dimensional domain")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    def __call__(self, x) -> complex:
        return complex(np.dot(self.vector, np.asarray(x, dtype=np.complex128)))

    def norm(self) -> float:
        return dual_norm(self.vector, self.domain.p)

    def __sub__(self, other: Functional) -> Functional:
        return Functional(self.domain, self.vector - other.vector)

    def scaled(self, c: complex) -> Functional:
        return Functional(self.domain, self.vector * c)


def _phase(z):
    z = np.asarray(z, dtype=np.complex128)
    a = np.abs(z)
    return np.where(a > 0, z / np.where(a > 0, a, 1.0), 1.0 + 0j)


def norming_vector(f: Functional) -> np.ndarray:
    """A unit vector ``x`` with ``f(x) = ||f||`` (``f`` nonzero)."""
    v, p = f.vector, f.domain.p
    a = np.abs(v)
    if math.isinf(p):
        return np.conj(_phase(v))
    if p == 1:
        x = np.zeros_like(v)
        k = int(np.argmax(a))
        x[k] = np.conj(_phase(v[k]))
        return x
    q = conjugate_exponent(p)
    x = np.conj(_phase(v)) * (a / a.max()) ** (q - 1.0)
    return x / pnorm(x, p)


def norming_functional(y, domain: FiniteDomain, near: Functional | None = None,
                       tol: float = 1e-12) -> Functional:
    """A unit functional ``g`` with ``g(y) = 1`` for unit ``y``.

    For ``1 < p < infinity`` it is unique.  For ``p = 1`` and ``p = infinity``
    the choice that minimises ``||near - g||`` is taken.
    """
    y = np.asarray(y, dtype=np.complex128)
    p = domain.p
    a = np.abs(y)
    ph = _phase(y)
    if p == 1:
        g = np.conj(ph)
        free = a <= tol
        if near is not None and np.any(free):
            # sup-norm distance splits over coordinates: project onto the unit disc
            f = near.vector[free]
            g[free] = f / np.maximum(np.abs(f), 1.0)
        elif np.any(free):
            g[free] = 0.0
        return Functional(domain, g)
    if math.isinf(p):
        active = np.flatnonzero(a >= a.max() - tol)
        t = np.zeros(y.size)
        if near is None or active.size == 1:
            t[active] = 1.0 / active.size
        else:
            t[active] = _nearest_simplex_weights(near.vector[active] * y[active])
        return Functional(domain, t * np.conj(ph))
    g = np.conj(ph) * a ** (p - 1.0)
    return Functional(domain, g / np.dot(g, y).real)


def _nearest_simplex_weights(target: np.ndarray, sweeps: int = 50) -> np.ndarray:
    """Minimise ``sum |target_k - t_k|`` over the probability simplex.

    Pairwise coordinate descent: each move shifts mass between two
    coordinates along a convex one-dimensional slice.
    """
    m = target.size
    t = np.clip(target.real, 0.0, None)
    t = t / t.sum() if t.sum() > 0 else np.full(m, 1.0 / m)

    def cost(w):
        return float(np.sum(np.abs(target - w)))

    best = cost(t)
    for _ in range(sweeps):
        improved = False
        for i in range(m):
            for j in range(i + 1, m):
                lo, hi = -t[i], t[j]
                if hi - lo <= 0:
                    continue

                def slice_cost(s, i=i, j=j):
                    w = t.copy()
                    w[i] += s
                    w[j] -= s
                    return cost(w)

                res = minimize_scalar(slice_cost, bounds=(lo, hi), method="bounded",
                                      options={"xatol": 1e-14})
                if res.fun < best - 1e-15:
                    t[i] += res.x
                    t[j] -= res.x
                    t = np.clip(t, 0.0, None)
                    t /= t.sum()
                    best = cost(t)
                    improved = True
        if not improved:
            break
    return t
