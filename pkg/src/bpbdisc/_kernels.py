"""Hot numeric loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports and the environment variable
``BPBDISC_DISABLE_NUMBA`` is unset (or ``0``).  Both paths must agree to
rounding; ``tests/test_kernels.py`` checks that and
``benchmarks/bench_kernels.py`` times them against each other.
"""

from __future__ import annotations

import math
import os
from contextlib import contextmanager

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_ENV_FLAG = "BPBDISC_DISABLE_NUMBA"
_BISECT_STEPS = 64


def _env_disabled() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() not in {"", "0", "false", "no"}


_backend = "numba" if HAVE_NUMBA and not _env_disabled() else "numpy"


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    _backend = name


@contextmanager
def using_backend(name: str):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


# --------------------------------------------------------------------------
# numpy reference implementations
# --------------------------------------------------------------------------


def _polyval_np(coeffs, z):
    out = np.full(z.shape, coeffs[-1], dtype=np.complex128)
    for c in coeffs[-2::-1]:
        out = out * z + c
    return out


def _polyval_columns_np(C, z):
    out = np.empty((z.shape[0], C.shape[1]), dtype=np.complex128)
    out[:] = C[-1][None, :]
    zc = z[:, None]
    for row in C[-2::-1]:
        out *= zc
        out += row[None, :]
    return out


def _stolz_radius_np(eps, theta):
    # |1 - z|^2 written as (1 - r)^2 + 4 r sin^2(theta/2) to stay accurate near the corner
    a = 1.0 - eps
    s4 = 4.0 * np.sin(0.5 * theta) ** 2
    lo = np.zeros(theta.shape)
    hi = np.ones(theta.shape)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        below = a * np.sqrt((1.0 - mid) ** 2 + mid * s4) < 1.0 - mid
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _straight_point_np(beta, a, b, kappa):
    R = np.maximum((np.cos(beta) - a) / b, 0.0)
    return 1.0 - R**kappa * np.exp(1j * kappa * beta)


def _straight_radius_np(eps, theta):
    a = 1.0 - eps
    b = 0.5 * (1.0 - a * a)
    beta0 = np.arccos(a)
    kappa = 0.5 * np.pi / beta0
    target = np.mod(theta, 2.0 * np.pi)
    lo = np.full(theta.shape, -beta0)
    hi = np.full(theta.shape, beta0)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        ang = np.mod(np.angle(_straight_point_np(mid, a, b, kappa)), 2.0 * np.pi)
        below = ang < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return np.abs(_straight_point_np(0.5 * (lo + hi), a, b, kappa))


def _sup_abs_columns_np(A, X, chunk=256):
    out = np.empty(X.shape[1])
    for start in range(0, X.shape[1], chunk):
        block = A @ X[:, start:start + chunk]
        out[start:start + chunk] = np.abs(block).max(axis=0)
    return out


def _row_qnorms_np(V, q):
    absV = np.abs(V)
    if np.isinf(q):
        return absV.max(axis=1)
    if q == 1.0:
        return absV.sum(axis=1)
    scale = absV.max(axis=1)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * ((absV / safe[:, None]) ** q).sum(axis=1) ** (1.0 / q)


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if HAVE_NUMBA:
    _jit = numba.njit(cache=True, fastmath=False)

    @_jit
    def _polyval_nb(coeffs, z):
        m = coeffs.shape[0]
        out = np.empty(z.shape[0], dtype=np.complex128)
        for i in range(z.shape[0]):
            acc = coeffs[m - 1]
            zi = z[i]
            for j in range(m - 2, -1, -1):
                acc = acc * zi + coeffs[j]
            out[i] = acc
        return out

    @_jit
    def _polyval_columns_nb(C, z):
        m, n = C.shape
        out = np.empty((z.shape[0], n), dtype=np.complex128)
        for i in range(z.shape[0]):
            zi = z[i]
            for col in range(n):
                acc = C[m - 1, col]
                for j in range(m - 2, -1, -1):
                    acc = acc * zi + C[j, col]
                out[i, col] = acc
        return out

    # bisection loops run step-outer, point-inner: the points are independent,
    # so the inner loop pipelines instead of waiting on each sqrt/atan2
    @_jit
    def _stolz_radius_nb(eps, theta):
        a = 1.0 - eps
        n = theta.shape[0]
        s4 = 4.0 * np.sin(0.5 * theta) ** 2
        lo = np.zeros(n)
        hi = np.ones(n)
        for _ in range(_BISECT_STEPS):
            for i in range(n):
                mid = 0.5 * (lo[i] + hi[i])
                # |1 - mid e^{i theta}|^2 = (1 - mid)^2 + 4 mid sin^2(theta/2), no cancellation near 1
                d = 1.0 - mid
                below = a * math.sqrt(d * d + mid * s4[i]) < d
                lo[i] = mid if below else lo[i]
                hi[i] = hi[i] if below else mid
        return 0.5 * (lo + hi)

    @_jit
    def _straight_xy(beta, a, b, kappa):
        R = max((math.cos(beta) - a) / b, 0.0)
        Rk = R**kappa
        return 1.0 - Rk * math.cos(kappa * beta), -Rk * math.sin(kappa * beta)

    @_jit
    def _straight_radius_nb(eps, theta):
        a = 1.0 - eps
        b = 0.5 * (1.0 - a * a)
        beta0 = math.acos(a)
        kappa = 0.5 * math.pi / beta0
        two_pi = 2.0 * math.pi
        n = theta.shape[0]
        target = np.empty(n)
        for i in range(n):
            target[i] = theta[i] % two_pi
        lo = np.full(n, -beta0)
        hi = np.full(n, beta0)
        for _ in range(_BISECT_STEPS):
            for i in range(n):
                mid = 0.5 * (lo[i] + hi[i])
                x, y = _straight_xy(mid, a, b, kappa)
                below = math.atan2(y, x) % two_pi < target[i]
                lo[i] = mid if below else lo[i]
                hi[i] = hi[i] if below else mid
        out = np.empty(n)
        for i in range(n):
            x, y = _straight_xy(0.5 * (lo[i] + hi[i]), a, b, kappa)
            out[i] = math.hypot(x, y)
        return out

    @_jit
    def _sup_abs_columns_nb(A, X):
        # blocked BLAS product, max-abs fused so the block is never abs()-copied
        n = X.shape[1]
        out = np.zeros(n)
        chunk = 256
        for start in range(0, n, chunk):
            stop = min(start + chunk, n)
            block = np.dot(A, np.ascontiguousarray(X[:, start:stop]))
            for i in range(block.shape[0]):
                for col in range(stop - start):
                    v = block[i, col]
                    m = v.real * v.real + v.imag * v.imag
                    if m > out[start + col]:
                        out[start + col] = m
        return np.sqrt(out)

    @_jit
    def _row_qnorms_nb(V, q):
        k, n = V.shape
        out = np.empty(k)
        buf = np.empty(n)
        for i in range(k):
            scale = 0.0
            for j in range(n):
                v = V[i, j]
                buf[j] = math.sqrt(v.real * v.real + v.imag * v.imag)
                if buf[j] > scale:
                    scale = buf[j]
            if math.isinf(q):
                out[i] = scale
            elif q == 1.0:
                out[i] = buf.sum()
            elif scale == 0.0:
                out[i] = 0.0
            else:
                s = 0.0
                for j in range(n):
                    s += (buf[j] / scale) ** q
                out[i] = scale * s ** (1.0 / q)
        return out


# --------------------------------------------------------------------------
# dispatchers
# --------------------------------------------------------------------------


def polyval(coeffs, z):
    """Evaluate ``sum coeffs[k] z**k`` at every entry of ``z``."""
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    shape = z.shape
    flat = np.ascontiguousarray(z.ravel())
    if _backend == "numba":
        out = _polyval_nb(coeffs, flat)
    else:
        out = _polyval_np(coeffs, flat)
    return out.reshape(shape)


def polyval_columns(C, z):
    """Evaluate every column of a coefficient matrix at the points ``z``.

    Returns an array of shape ``(len(z), C.shape[1])``.
    """
    C = np.ascontiguousarray(C, dtype=np.complex128)
    z = np.ascontiguousarray(np.ravel(z), dtype=np.complex128)
    if _backend == "numba":
        return _polyval_columns_nb(C, z)
    return _polyval_columns_np(C, z)


def stolz_radius(eps: float, theta):
    theta = np.asarray(theta, dtype=np.float64)
    shape = theta.shape
    flat = np.ascontiguousarray(theta.ravel())
    if _backend == "numba":
        out = _stolz_radius_nb(float(eps), flat)
    else:
        out = _stolz_radius_np(float(eps), flat)
    return out.reshape(shape)


def straight_radius(eps: float, theta):
    """Polar radius of the corner-straightened Stolz region at angle ``theta``."""
    theta = np.asarray(theta, dtype=np.float64)
    shape = theta.shape
    flat = np.ascontiguousarray(theta.ravel())
    if _backend == "numba":
        out = _straight_radius_nb(float(eps), flat)
    else:
        out = _straight_radius_np(float(eps), flat)
    return out.reshape(shape)


def sup_abs_columns(A, X):
    """``max_i |(A @ X)[i, j]|`` for every column ``j`` without forming ``A @ X``."""
    A = np.ascontiguousarray(A, dtype=np.complex128)
    X = np.ascontiguousarray(X, dtype=np.complex128)
    if _backend == "numba":
        return _sup_abs_columns_nb(A, X)
    return _sup_abs_columns_np(A, X)


def row_qnorms(V, q: float):
    V = np.ascontiguousarray(np.atleast_2d(V), dtype=np.complex128)
    if _backend == "numba":
        return _row_qnorms_nb(V, float(q))
    return _row_qnorms_np(V, float(q))
