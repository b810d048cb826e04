"""Truncated disc-algebra elements.

A :class:`DiscPoly` is a polynomial ``a_0 + a_1 z + ... + a_d z^d`` viewed as
an element of the disc algebra.  For polynomials the continuous extension to
the closed disc is evaluation itself, so boundary values are plain samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .errors import AliasingError, OutsideDiscError

DISC_TOL = 1e-12
DEFAULT_DEGREE = 128


def is_power_of_two(M: int) -> bool:
    return M >= 1 and (M & (M - 1)) == 0


def next_power_of_two(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def default_grid(degree: int) -> int:
    """Grid size used when the caller does not pick one."""
    return max(4096, next_power_of_two(4 * (degree + 1)))


def check_in_disc(z, tol: float = DISC_TOL) -> None:
    z = np.asarray(z)
    if z.size and np.max(np.abs(z)) > 1.0 + tol:
        raise OutsideDiscError(f"point outside the closed unit disc: |z| = {np.max(np.abs(z)):.17g}")


@dataclass(frozen=True)
class DiscPoly:
    """Taylor coefficients ``a_0..a_d``; the trailing one may be zero."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        if c.size == 0:
            raise ValueError("a DiscPoly needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return evaluate(self, z)

    def __add__(self, other: DiscPoly) -> DiscPoly:
        n = max(self.coeffs.size, other.coeffs.size)
        return DiscPoly(_pad(self.coeffs, n) + _pad(other.coeffs, n))

    def __sub__(self, other: DiscPoly) -> DiscPoly:
        n = max(self.coeffs.size, other.coeffs.size)
        return DiscPoly(_pad(self.coeffs, n) - _pad(other.coeffs, n))

    def __mul__(self, other):
        if isinstance(other, DiscPoly):
            return DiscPoly(np.convolve(self.coeffs, other.coeffs))
        return DiscPoly(self.coeffs * complex(other))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def to_json(self) -> str:
        return json.dumps([[float(c.real), float(c.imag)] for c in self.coeffs])

    @classmethod
    def from_json(cls, text: str) -> DiscPoly:
        pairs = json.loads(text)
        return cls(np.array([complex(re, im) for re, im in pairs]))

    @classmethod
    def monomial(cls, n: int, scale: complex = 1.0) -> DiscPoly:
        c = np.zeros(n + 1, dtype=np.complex128)
        c[n] = scale
        return cls(c)


def _pad(c: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=np.complex128)
    out[: c.size] = c
    return out


def evaluate(p: DiscPoly, z):
    """Horner evaluation on the closed disc; scalar in, scalar out."""
    check_in_disc(z)
    out = _kernels.polyval(p.coeffs, z)
    if np.ndim(z) == 0:
        return complex(out)
    return out


def grid_points(M: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(M) / M)


def boundary_samples(p: DiscPoly, M: int) -> np.ndarray:
    """Values of ``p`` at the M-th roots of unity, ``samples[k] = p(e^{2 pi i k/M})``."""
    if not is_power_of_two(M):
        raise AliasingError(f"grid size {M} is not a power of two")
    if M < 2 * (p.degree + 1):
        raise AliasingError(f"grid size {M} aliases a degree-{p.degree} polynomial (need M >= {2 * (p.degree + 1)})")
    padded = np.zeros(M, dtype=np.complex128)
    padded[: p.coeffs.size] = p.coeffs
    return M * np.fft.ifft(padded)


def coefficients_from_samples(samples: np.ndarray, degree: int) -> np.ndarray:
    """Inverse of :func:`boundary_samples`."""
    return (np.fft.fft(samples) / samples.size)[: degree + 1]


def _refine_max(f, theta: float, half_width: float) -> tuple[float, float]:
    res = minimize_scalar(lambda t: -f(t), bounds=(theta - half_width, theta + half_width),
                          method="bounded", options={"xatol": 1e-13})
    return float(-res.fun), float(res.x)


@dataclass(frozen=True)
class SupNorm:
    value: float
    upper: float
    grid_max: float
    theta: float
    M: int


def sup_norm_bracket(p: DiscPoly, M: int | None = None) -> SupNorm:
    """Sup-norm estimate with a certified upper bound.

    The maximum-modulus principle puts the sup on the circle.  Between grid
    nodes the Bernstein inequality ``|p'| <= d ||p||`` limits the growth, so
    ``||p|| <= grid_max / (1 - pi d / M)`` whenever ``pi d < M``.
    """
    if M is None:
        M = default_grid(p.degree)
    samples = np.abs(boundary_samples(p, M))
    k = int(np.argmax(samples))
    grid_max = float(samples[k])
    theta_k = 2 * np.pi * k / M
    if p.degree == 0 or grid_max == 0.0:
        return SupNorm(grid_max, grid_max, grid_max, theta_k, M)
    coeffs = p.coeffs
    value, theta = _refine_max(lambda t: abs(_kernels.polyval(coeffs, np.array([np.exp(1j * t)]))[0]),
                               theta_k, 2 * np.pi / M)
    value = max(value, grid_max)
    ratio = math.pi * p.degree / M
    upper = grid_max / (1.0 - ratio) if ratio < 1 else math.inf
    return SupNorm(value, max(upper, value), grid_max, theta % (2 * np.pi), M)


def sup_norm(p: DiscPoly, M: int | None = None) -> float:
    return sup_norm_bracket(p, M).value


def hardy2_norm(p: DiscPoly) -> float:
    return float(np.linalg.norm(p.coeffs))


def bernstein_bound(p: DiscPoly, M: int | None = None) -> float:
    """Upper bound ``d * ||p||_inf`` for ``|p'|`` on the closed disc."""
    if p.degree == 0:
        return 0.0
    return p.degree * sup_norm(p, M)


def derivative(p: DiscPoly) -> DiscPoly:
    if p.degree == 0:
        return DiscPoly([0.0])
    return DiscPoly(p.coeffs[1:] * np.arange(1, p.degree + 1))
